use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TankError {
    #[error("tank parameters must be positive (f_res = {f_res}, q = {q}, l_t = {l_t})")]
    NonPositive { f_res: f64, q: f64, l_t: f64 },
}

/// Resonant readout tank acting as the amplifier's signal source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TankSource {
    pub f_res: f64,
    pub q: f64,
    pub l_t: f64,
    /// Drive phasor amplitude, V.
    pub drive: f64,
}

impl TankSource {
    /// 450 MHz, Q = 100, 2 nH, unit drive.
    pub fn readout() -> Self {
        Self {
            f_res: 450e6,
            q: 100.0,
            l_t: 2e-9,
            drive: 1.0,
        }
    }
}

/// Parallel R‖L‖C equivalent of a tank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TankEquivalent {
    pub r_p: f64,
    pub l_t: f64,
    pub c_t: f64,
    pub drive: f64,
}

impl TankEquivalent {
    pub fn impedance(&self, f: f64) -> Complex64 {
        let w = 2.0 * PI * f;
        let y = Complex64::new(1.0 / self.r_p, w * self.c_t - 1.0 / (w * self.l_t));
        1.0 / y
    }
}

pub fn tank_equivalent(t: &TankSource) -> Result<TankEquivalent, TankError> {
    if !(t.f_res > 0.0 && t.q > 0.0 && t.l_t > 0.0) {
        return Err(TankError::NonPositive {
            f_res: t.f_res,
            q: t.q,
            l_t: t.l_t,
        });
    }
    let w = 2.0 * PI * t.f_res;
    Ok(TankEquivalent {
        r_p: t.q * w * t.l_t,
        l_t: t.l_t,
        c_t: 1.0 / (w * w * t.l_t),
        drive: t.drive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn readout_tank_values() {
        let e = tank_equivalent(&TankSource::readout()).unwrap();
        assert!((e.r_p - 565.487).abs() < 1e-3);
        assert!((e.c_t / 62.54e-12 - 1.0).abs() < 1e-3);
        let z = e.impedance(450e6);
        assert!((z.re / e.r_p - 1.0).abs() < 1e-9);
        assert!(z.im.abs() < 1e-9 * z.re);
    }

    #[test]
    fn lossless_limit() {
        let t = TankSource { q: f64::INFINITY, ..TankSource::readout() };
        let e = tank_equivalent(&t).unwrap();
        assert!(e.impedance(450e6).norm() > 1e9);
        let z = e.impedance(300e6);
        assert_eq!(z.re, 0.0);
        assert!(z.im != 0.0);
    }

    #[test]
    fn rejects_non_positive() {
        let t = TankSource { q: 0.0, ..TankSource::readout() };
        assert!(tank_equivalent(&t).is_err());
    }
}
