//! Thermal (blackbody) photon budget of a closed cavity.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::constants::{BOLTZMANN, PLANCK, SPEED_OF_LIGHT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhotonError {
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error("temperature must be non-negative")]
    NegativeTemperature,
    #[error("need t_hot > t_cold > 0 (got {t_hot}, {t_cold})")]
    TemperatureOrder { t_hot: f64, t_cold: f64 },
}

/// Planck spectral radiance, W·m⁻²·Hz⁻¹·sr⁻¹. Zero at `t = 0`.
pub fn spectral_radiance(f: f64, t: f64) -> f64 {
    if t <= 0.0 || f <= 0.0 {
        return 0.0;
    }
    let x = PLANCK * f / (BOLTZMANN * t);
    2.0 * PLANCK * f.powi(3) / (SPEED_OF_LIGHT * SPEED_OF_LIGHT) / x.exp_m1()
}

/// Low-frequency limit `2 f² k T / c²`.
pub fn rayleigh_jeans(f: f64, t: f64) -> f64 {
    2.0 * f * f * BOLTZMANN * t / (SPEED_OF_LIGHT * SPEED_OF_LIGHT)
}

/// Natural log of the radiance, finite even where the radiance underflows.
fn ln_radiance(f: f64, t: f64) -> f64 {
    let x = PLANCK * f / (BOLTZMANN * t);
    // ln(e^x − 1) = x + ln(1 − e^−x)
    let ln_expm1 = if x > 30.0 { x + (-(-x).exp()).ln_1p() } else { x.exp_m1().ln() };
    (2.0 * PLANCK * f.powi(3) / (SPEED_OF_LIGHT * SPEED_OF_LIGHT)).ln() - ln_expm1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonBudget {
    pub f: f64,
    pub t: f64,
    pub area: f64,
    pub bandwidth: f64,
    pub radiance: f64,
    /// Power per unit bandwidth radiated into the half space, W/Hz.
    pub power_density: f64,
    /// Photons per second in the band.
    pub rate: f64,
}

/// Photon emission rate of a Lambertian surface of `area` within `bandwidth` around `f`.
pub fn photon_rate(f: f64, t: f64, area: f64, bandwidth: f64) -> Result<PhotonBudget, PhotonError> {
    let positive = |x: f64| x > 0.0 && x.is_finite();
    if !positive(f) {
        return Err(PhotonError::NonPositive("frequency"));
    }
    if !positive(area) {
        return Err(PhotonError::NonPositive("area"));
    }
    if !positive(bandwidth) {
        return Err(PhotonError::NonPositive("bandwidth"));
    }
    if !(t >= 0.0) {
        return Err(PhotonError::NegativeTemperature);
    }
    let radiance = spectral_radiance(f, t);
    let power_density = PI * area * radiance;
    Ok(PhotonBudget {
        f,
        t,
        area,
        bandwidth,
        radiance,
        power_density,
        rate: power_density * bandwidth / (PLANCK * f),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reduction {
    /// `B(f, t_hot) / B(f, t_cold)`; may be `inf` when it exceeds `f64`.
    pub ratio: f64,
    pub orders: f64,
    /// Frequency-integrated (T⁴) ratio.
    pub wideband_ratio: f64,
    pub wideband_orders: f64,
}

/// How much cooling from `t_hot` to `t_cold` suppresses radiance at `f` and in total.
pub fn radiance_reduction(f: f64, t_hot: f64, t_cold: f64) -> Result<Reduction, PhotonError> {
    if !(f > 0.0 && f.is_finite()) {
        return Err(PhotonError::NonPositive("frequency"));
    }
    if !(t_hot > t_cold && t_cold > 0.0 && t_hot.is_finite()) {
        return Err(PhotonError::TemperatureOrder { t_hot, t_cold });
    }
    let orders = (ln_radiance(f, t_hot) - ln_radiance(f, t_cold)) / std::f64::consts::LN_10;
    let wideband_ratio = (t_hot / t_cold).powi(4);
    Ok(Reduction {
        ratio: 10f64.powf(orders),
        orders,
        wideband_ratio,
        wideband_orders: 4.0 * (t_hot / t_cold).log10(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_temperature_is_dark() {
        assert_eq!(spectral_radiance(10e9, 0.0), 0.0);
        assert_eq!(photon_rate(10e9, 0.0, 1.0, 1e9).unwrap().rate, 0.0);
    }

    #[test]
    fn rayleigh_jeans_limit() {
        let t = 300.0;
        let f = 0.005 * BOLTZMANN * t / PLANCK;
        assert!((spectral_radiance(f, t) / rayleigh_jeans(f, t) - 1.0).abs() < 0.01);
    }

    #[test]
    fn radiance_at_ten_gigahertz() {
        let b = spectral_radiance(10e9, 0.020);
        assert!((b / 5.6e-31 - 1.0).abs() < 0.01, "{b}");
    }

    #[test]
    fn reductions() {
        let r = radiance_reduction(10e9, 1.0, 0.010).unwrap();
        assert!((20.0..=22.0).contains(&r.orders));
        let r = radiance_reduction(450e6, 1.0, 0.010).unwrap();
        assert!((2.0..=3.0).contains(&r.orders));
        assert_eq!(r.wideband_ratio, 1e8);
        assert!(radiance_reduction(1e9, 0.01, 1.0).is_err());
        // the log form must agree with the direct ratio where both are representable
        let direct = spectral_radiance(450e6, 1.0) / spectral_radiance(450e6, 0.010);
        assert!((r.ratio / direct - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_invalid() {
        assert!(photon_rate(-1.0, 1.0, 1.0, 1.0).is_err());
        assert!(photon_rate(1e9, -1.0, 1.0, 1.0).is_err());
        assert!(photon_rate(1e9, 1.0, 0.0, 1.0).is_err());
        assert!(photon_rate(1e9, 1.0, 1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_temperature_area_bandwidth(
            f in 1e8f64..1e11, t in 1e-3f64..10.0, a in 1e-4f64..1.0, bw in 1e3f64..1e9, k in 1.01f64..3.0,
        ) {
            let base = photon_rate(f, t, a, bw).unwrap();
            prop_assert!(base.rate >= 0.0);
            prop_assert!(spectral_radiance(f, t * k) > spectral_radiance(f, t) || base.radiance == 0.0);
            prop_assert!(photon_rate(f, t * k, a, bw).unwrap().rate > base.rate || base.rate == 0.0);
            prop_assert!(photon_rate(f, t, a * k, bw).unwrap().rate > base.rate || base.rate == 0.0);
            prop_assert!(photon_rate(f, t, a, bw * k).unwrap().rate > base.rate || base.rate == 0.0);
            let expected = base.power_density * bw / (PLANCK * f);
            prop_assert!((base.rate - expected).abs() <= 1e-12 * expected);
        }
    }
}
