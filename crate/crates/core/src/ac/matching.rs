use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("source and load are both {0} Ω; nothing to match")]
    Equal(f64),
    #[error("resistances and frequency must be positive and finite")]
    NonPositive,
}

/// Series-L/shunt-C (low-pass) or series-C/shunt-L (high-pass).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Topology {
    #[default]
    LowPass,
    HighPass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Reactance {
    Inductor(f64),
    Capacitor(f64),
}

impl Reactance {
    pub fn impedance(self, f: f64) -> Complex64 {
        let w = 2.0 * PI * f;
        match self {
            Reactance::Inductor(l) => Complex64::new(0.0, w * l),
            Reactance::Capacitor(c) => Complex64::new(0.0, -1.0 / (w * c)),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Reactance::Inductor(v) | Reactance::Capacitor(v) => v,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Reactance::Inductor(_) => 'L',
            Reactance::Capacitor(_) => 'C',
        }
    }
}

impl fmt::Display for Reactance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reactance::Inductor(v) => write!(f, "{v:e} H"),
            Reactance::Capacitor(v) => write!(f, "{v:e} F"),
        }
    }
}

/// Lossless two-element L-section.
///
/// The shunt element sits across the higher-resistance side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchDesign {
    pub r_source: f64,
    pub r_load: f64,
    pub f: f64,
    pub topology: Topology,
    pub series_element: Reactance,
    pub shunt_element: Reactance,
    pub q_match: f64,
}

impl MatchDesign {
    /// True when the shunt element is across the source terminals.
    pub fn shunt_at_source(&self) -> bool {
        self.r_source > self.r_load
    }

    /// SPICE fragment between nodes `src` and `load`.
    pub fn netlist_fragment(&self, src: &str, load: &str) -> String {
        let shunt_node = if self.shunt_at_source() { src } else { load };
        format!(
            "* L-section {:.6e} Ω -> {:.6e} Ω at {:.6e} Hz, q = {:.6}\n{}s {src} {load} {:.8e}\n{}p {shunt_node} 0 {:.8e}\n",
            self.r_source,
            self.r_load,
            self.f,
            self.q_match,
            self.series_element.letter(),
            self.series_element.value(),
            self.shunt_element.letter(),
            self.shunt_element.value(),
        )
    }
}

pub fn design_l_match(r_source: f64, r_load: f64, f: f64) -> Result<MatchDesign, MatchError> {
    design_l_match_with(r_source, r_load, f, Topology::LowPass)
}

pub fn design_l_match_with(r_source: f64, r_load: f64, f: f64, topology: Topology) -> Result<MatchDesign, MatchError> {
    let ok = |x: f64| x > 0.0 && x.is_finite();
    if !(ok(r_source) && ok(r_load) && ok(f)) {
        return Err(MatchError::NonPositive);
    }
    if r_source == r_load {
        return Err(MatchError::Equal(r_source));
    }
    let (hi, lo) = (r_source.max(r_load), r_source.min(r_load));
    let q = (hi / lo - 1.0).sqrt();
    let x_series = q * lo;
    let x_shunt = hi / q;
    let w = 2.0 * PI * f;
    let (series_element, shunt_element) = match topology {
        Topology::LowPass => (Reactance::Inductor(x_series / w), Reactance::Capacitor(1.0 / (w * x_shunt))),
        Topology::HighPass => (Reactance::Capacitor(1.0 / (w * x_series)), Reactance::Inductor(x_shunt / w)),
    };
    Ok(MatchDesign {
        r_source,
        r_load,
        f,
        topology,
        series_element,
        shunt_element,
        q_match: q,
    })
}

/// Impedance seen from the source terminals with the section terminated in `r_load`.
pub fn input_impedance(d: &MatchDesign, f: f64) -> Complex64 {
    let zs = d.series_element.impedance(f);
    let zp = d.shunt_element.impedance(f);
    let parallel = |a: Complex64, b: Complex64| a * b / (a + b);
    let load = Complex64::new(d.r_load, 0.0);
    if d.shunt_at_source() {
        parallel(load + zs, zp)
    } else {
        parallel(load, zp) + zs
    }
}
