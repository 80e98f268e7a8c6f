//! Statz GaAs FET drain-current model
//! `I_d = β (U_gs − U_T)² (1 + λ U_ds) tanh(α U_ds)` and its derivatives.

mod fit;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fit::{fit_statz, read_iv_csv, FitError, FitOptions, FitReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeviceError {
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("reverse operation (u_ds = {0} V < 0) is not modelled")]
    ReverseBias(f64),
}

/// Statz model coefficients plus the linear input parasitics used in small-signal analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatzParams {
    /// Transconductance parameter, A/V².
    pub beta: f64,
    /// Threshold gate voltage, V.
    pub u_t: f64,
    /// Channel-length modulation, 1/V.
    pub lambda: f64,
    /// Hyperbolic-tangent parameter, 1/V.
    pub alpha: f64,
    /// Equivalent gate input capacitance, F.
    pub c_in: f64,
    /// Equivalent gate input resistance, Ω. Zero means no resistive input path.
    pub r_in: f64,
}

/// Small-signal conductances at a bias point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallSignal {
    /// ∂I_d/∂U_gs, S.
    pub g_m: f64,
    /// ∂I_d/∂U_ds, S.
    pub g_ds: f64,
}

/// One measured (or synthesised) point of a static I–V curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvSample {
    pub u_gs: f64,
    pub u_ds: f64,
    pub i_d: f64,
}

impl StatzParams {
    pub const DEFAULT_LAMBDA: f64 = 0.0;
    pub const DEFAULT_ALPHA: f64 = 2.0;

    pub fn new(
        beta: f64,
        u_t: f64,
        lambda: f64,
        alpha: f64,
        c_in: f64,
        r_in: f64,
    ) -> Result<Self, DeviceError> {
        let p = Self {
            beta,
            u_t,
            lambda,
            alpha,
            c_in,
            r_in,
        };
        p.check()?;
        Ok(p)
    }

    /// Fitted MGF4937AM coefficients at 0.35 K with λ, α at their defaults and
    /// no input parasitics.
    pub fn mgf4937_cold() -> Self {
        Self {
            beta: 0.08,
            u_t: -0.46,
            lambda: Self::DEFAULT_LAMBDA,
            alpha: Self::DEFAULT_ALPHA,
            c_in: 0.0,
            r_in: 0.0,
        }
    }

    pub fn check(&self) -> Result<(), DeviceError> {
        let all = [self.beta, self.u_t, self.lambda, self.alpha, self.c_in, self.r_in];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(DeviceError::InvalidParameter("non-finite value".into()));
        }
        if self.beta <= 0.0 {
            return Err(DeviceError::InvalidParameter("beta must be > 0".into()));
        }
        if self.alpha <= 0.0 {
            return Err(DeviceError::InvalidParameter("alpha must be > 0".into()));
        }
        if self.lambda < 0.0 {
            return Err(DeviceError::InvalidParameter("lambda must be >= 0".into()));
        }
        if self.c_in < 0.0 || self.r_in < 0.0 {
            return Err(DeviceError::InvalidParameter("cin and rin must be >= 0".into()));
        }
        Ok(())
    }

    /// Drain current for forward operation. Zero at and below threshold.
    pub fn drain_current(&self, u_gs: f64, u_ds: f64) -> Result<f64, DeviceError> {
        if u_ds < 0.0 || u_ds.is_nan() {
            return Err(DeviceError::ReverseBias(u_ds));
        }
        Ok(self.eval(u_gs, u_ds).0)
    }

    /// Analytic g_m and g_ds. Both vanish in cutoff.
    pub fn small_signal(&self, u_gs: f64, u_ds: f64) -> Result<SmallSignal, DeviceError> {
        if u_ds < 0.0 || u_ds.is_nan() {
            return Err(DeviceError::ReverseBias(u_ds));
        }
        let (_, g_m, g_ds) = self.eval(u_gs, u_ds);
        Ok(SmallSignal { g_m, g_ds })
    }

    /// Current and partial derivatives without the forward-bias check.
    ///
    /// The expression is smooth through `u_ds = 0`, which lets Newton iterates
    /// pass through small negative drain voltages on the way to a solution.
    pub(crate) fn eval(&self, u_gs: f64, u_ds: f64) -> (f64, f64, f64) {
        let overdrive = u_gs - self.u_t;
        if overdrive <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let clm = 1.0 + self.lambda * u_ds;
        let th = (self.alpha * u_ds).tanh();
        let sech2 = 1.0 - th * th;
        let square = self.beta * overdrive * overdrive;
        let i_d = square * clm * th;
        let g_m = 2.0 * self.beta * overdrive * clm * th;
        let g_ds = square * (self.lambda * th + clm * self.alpha * sech2);
        (i_d, g_m, g_ds)
    }

    /// Saturation asymptote `β (U_gs − U_T)² (1 + λ U_ds)`.
    pub fn saturation_current(&self, u_gs: f64, u_ds: f64) -> f64 {
        let overdrive = (u_gs - self.u_t).max(0.0);
        self.beta * overdrive * overdrive * (1.0 + self.lambda * u_ds)
    }

    /// Gate voltage that gives `i_d` at `u_ds` (inverse of the square law).
    pub fn gate_voltage_for(&self, u_ds: f64, i_d: f64) -> Option<f64> {
        let shape = self.beta * (1.0 + self.lambda * u_ds) * (self.alpha * u_ds).tanh();
        if !(i_d > 0.0) || !(shape > 0.0) {
            return None;
        }
        Some(self.u_t + (i_d / shape).sqrt())
    }

    /// `.model` line for a netlist.
    pub fn model_line(&self, name: &str) -> String {
        use crate::units::sig9;
        format!(
            ".model {name} STATZ beta={} vto={} lambda={} alpha={} cin={} rin={}",
            sig9(self.beta),
            sig9(self.u_t),
            sig9(self.lambda),
            sig9(self.alpha),
            sig9(self.c_in),
            sig9(self.r_in)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> StatzParams {
        StatzParams::mgf4937_cold()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn cutoff_and_zero_drain() {
        let p = reference();
        assert_eq!(p.drain_current(-0.46, 0.1).unwrap(), 0.0);
        assert_eq!(p.drain_current(-0.30, 0.0).unwrap(), 0.0);
        let ss = p.small_signal(-0.46, 0.1).unwrap();
        assert_eq!((ss.g_m, ss.g_ds), (0.0, 0.0));
    }

    #[test]
    fn operating_point_current() {
        // 0.08 · 0.084² · tanh(0.06), evaluated by hand
        let i = reference().drain_current(-0.376, 0.030).unwrap();
        assert!(rel(i, 3.3827e-5) < 1e-4, "{i}");
        let p_hemt = 0.030 * i;
        assert!(rel(p_hemt, 1.0e-6) < 0.02);
    }

    #[test]
    fn output_conductance_matches_sech_form() {
        let p = reference();
        let g = p.small_signal(-0.376, 0.030).unwrap().g_ds;
        let closed = 0.08 * 0.084f64.powi(2) * 2.0 / (0.06f64).cosh().powi(2);
        assert!(rel(g, closed) < 1e-12);
        assert!(rel(g, 1.125e-3) < 1e-3, "{g}");
    }

    #[test]
    fn reverse_bias_rejected() {
        assert_eq!(
            reference().drain_current(0.0, -0.01),
            Err(DeviceError::ReverseBias(-0.01))
        );
    }

    #[test]
    fn invalid_parameters() {
        assert!(StatzParams::new(0.0, -0.4, 0.0, 2.0, 0.0, 0.0).is_err());
        assert!(StatzParams::new(0.1, -0.4, -1.0, 2.0, 0.0, 0.0).is_err());
        assert!(StatzParams::new(0.1, -0.4, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(StatzParams::new(0.1, -0.4, 0.0, 2.0, -1e-12, 0.0).is_err());
    }

    #[test]
    fn gate_voltage_inverts_current() {
        let p = reference();
        let u = p.gate_voltage_for(0.030, 33.6e-6).unwrap();
        assert!(rel(p.drain_current(u, 0.030).unwrap(), 33.6e-6) < 1e-12);
        assert!(p.gate_voltage_for(0.030, 0.0).is_none());
        assert!(p.gate_voltage_for(0.0, 1e-6).is_none());
    }

    fn params() -> impl Strategy<Value = StatzParams> {
        (0.01f64..0.5, -1.0f64..-0.1, 0.0f64..0.5, 0.5f64..5.0).prop_map(
            |(beta, u_t, lambda, alpha)| StatzParams {
                beta,
                u_t,
                lambda,
                alpha,
                c_in: 0.0,
                r_in: 0.0,
            },
        )
    }

    proptest! {
        #[test]
        fn nonnegative_and_monotone_in_gate(p in params(), u in -1.5f64..0.5, du in 0.0f64..0.3, v in 0.0f64..1.0) {
            let a = p.drain_current(u, v).unwrap();
            let b = p.drain_current(u + du, v).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!(b >= a);
        }

        #[test]
        fn saturation_asymptote(p in params(), over in 0.01f64..0.5) {
            let u_gs = p.u_t + over;
            let u_ds = 20.0 / p.alpha;
            let i = p.drain_current(u_gs, u_ds).unwrap();
            let sat = p.saturation_current(u_gs, u_ds);
            prop_assert!((i - sat).abs() <= 1e-8 * sat);
        }

        #[test]
        fn derivatives_match_central_differences(p in params(), over in 0.02f64..0.5, u_ds in 0.005f64..1.0) {
            let u_gs = p.u_t + over;
            let h = 1e-6;
            let f = |g: f64, d: f64| p.drain_current(g, d).unwrap();
            let fd_gm = (f(u_gs + h, u_ds) - f(u_gs - h, u_ds)) / (2.0 * h);
            let fd_gds = (f(u_gs, u_ds + h) - f(u_gs, u_ds - h)) / (2.0 * h);
            let ss = p.small_signal(u_gs, u_ds).unwrap();
            prop_assert!((ss.g_m - fd_gm).abs() <= 1e-6 * ss.g_m.abs());
            prop_assert!((ss.g_ds - fd_gds).abs() <= 1e-6 * ss.g_ds.abs());
        }
    }
}
