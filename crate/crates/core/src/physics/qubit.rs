//! Stationary spectrum of a flux qubit (rf SQUID) in the flux basis.
//!
//! Flux is measured in flux quanta and energy in `E_L = Φ₀²/(2L)`, so the
//! Hamiltonian reads `−k ∂²/∂φ² − (β_L/2π²) cos 2πφ + (φ − φ_e)²` with
//! `k = ħ² L / (C Φ₀⁴)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::tridiag::Tridiagonal;
use crate::constants::{BOLTZMANN, FLUX_QUANTUM, HBAR, PLANCK};
use crate::par::{self, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QubitError {
    #[error("invalid qubit parameters: {0}")]
    InvalidParams(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("requested {requested} levels but the grid has only {available} interior points")]
    TooManyLevels { requested: usize, available: usize },
    #[error("invalid scan: {0}")]
    InvalidScan(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    /// Loop inductance, H.
    pub l: f64,
    /// Junction capacitance, F.
    pub c: f64,
    /// Screening parameter `2π I_c L / Φ₀`.
    pub beta_l: f64,
    /// External flux in units of Φ₀.
    pub phi_e: f64,
}

impl QubitParams {
    /// The double-well working point: 0.2 nH, β_L = 1.325, 76 fF, φ_e = 0.5135.
    pub fn working_point() -> Self {
        Self {
            l: 2e-10,
            c: 76e-15,
            beta_l: 1.325,
            phi_e: 0.5135,
        }
    }

    pub fn check(&self) -> Result<(), QubitError> {
        if !(self.l > 0.0 && self.l.is_finite()) || !(self.c > 0.0 && self.c.is_finite()) {
            return Err(QubitError::InvalidParams("l and c must be positive".into()));
        }
        if !(self.beta_l >= 0.0 && self.beta_l.is_finite()) || !self.phi_e.is_finite() {
            return Err(QubitError::InvalidParams("beta_l must be >= 0 and phi_e finite".into()));
        }
        Ok(())
    }

    /// Junction critical current, A.
    pub fn critical_current(&self) -> f64 {
        self.beta_l * FLUX_QUANTUM / (2.0 * PI * self.l)
    }

    /// Energy unit `Φ₀²/(2L)`, J.
    pub fn energy_unit(&self) -> f64 {
        FLUX_QUANTUM * FLUX_QUANTUM / (2.0 * self.l)
    }

    /// Coefficient of `−∂²/∂φ²` in units of `E_L`.
    pub fn kinetic_coefficient(&self) -> f64 {
        HBAR * HBAR * self.l / (self.c * FLUX_QUANTUM.powi(4))
    }

    /// Potential at flux `phi`, in units of `E_L`.
    pub fn potential(&self, phi: f64) -> f64 {
        -(self.beta_l / (2.0 * PI * PI)) * (2.0 * PI * phi).cos() + (phi - self.phi_e).powi(2)
    }

    /// Plasma frequency `1/(2π√(LC))` of the bare loop, Hz.
    pub fn harmonic_frequency(&self) -> f64 {
        1.0 / (2.0 * PI * (self.l * self.c).sqrt())
    }
}

/// Uniform flux grid including both Dirichlet end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub phi_min: f64,
    pub phi_max: f64,
    pub n: usize,
}

impl Grid {
    pub const DEFAULT_HALF_WIDTH: f64 = 1.2;
    pub const DEFAULT_POINTS: usize = 2048;

    /// `φ_e ± half_width` with `n` points.
    pub fn centered(phi_e: f64, half_width: f64, n: usize) -> Self {
        Self {
            phi_min: phi_e - half_width,
            phi_max: phi_e + half_width,
            n,
        }
    }

    pub fn default_for(q: &QubitParams) -> Self {
        Self::centered(q.phi_e, Self::DEFAULT_HALF_WIDTH, Self::DEFAULT_POINTS)
    }

    pub fn spacing(&self) -> f64 {
        (self.phi_max - self.phi_min) / (self.n - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|i| self.phi_min + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hamiltonian {
    pub params: QubitParams,
    pub grid: Grid,
    /// Operator on the interior points, in units of `E_L`.
    pub matrix: Tridiagonal,
    /// Potential on every grid point, in units of `E_L`.
    pub potential: Vec<f64>,
    /// Set when the grid resolves the shortest local wavelength with fewer
    /// than three points.
    pub coarse: bool,
}

pub fn build_hamiltonian(q: &QubitParams, grid: &Grid) -> Result<Hamiltonian, QubitError> {
    q.check()?;
    if grid.n < 3 {
        return Err(QubitError::InvalidGrid(format!("need at least 3 points, got {}", grid.n)));
    }
    if !(grid.phi_min < grid.phi_max) || !grid.phi_min.is_finite() || !grid.phi_max.is_finite() {
        return Err(QubitError::InvalidGrid("phi_min must be below phi_max".into()));
    }
    let h = grid.spacing();
    let k = q.kinetic_coefficient();
    let phis = grid.points();
    let potential: Vec<f64> = phis.iter().map(|&p| q.potential(p)).collect();
    let diag: Vec<f64> = potential[1..grid.n - 1].iter().map(|u| u + 2.0 * k / (h * h)).collect();
    let off = vec![-k / (h * h); grid.n - 3];

    // local wavenumber at the largest kinetic energy the grid can hold
    let (u_min, u_max) = potential
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| (lo.min(u), hi.max(u)));
    let wavelength = 2.0 * PI * (k / (u_max - u_min).max(f64::MIN_POSITIVE)).sqrt();
    Ok(Hamiltonian {
        params: *q,
        grid: *grid,
        matrix: Tridiagonal::new(diag, off),
        potential,
        coarse: wavelength < 3.0 * h,
    })
}

/// Which potential well a level sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WellAssignment {
    /// Index into [`SpectrumResult::minima`].
    Well(usize),
    /// ⟨φ⟩ lies within 0.01 Φ₀ of a barrier top.
    Delocalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub index: usize,
    pub energy_j: f64,
    pub energy_k: f64,
    pub energy_ghz: f64,
    /// ⟨φ⟩ in Φ₀.
    pub flux_expect: f64,
    pub well: WellAssignment,
}

/// A local extremum of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub phi: f64,
    pub potential_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub params: QubitParams,
    /// Flux at every grid point, Φ₀.
    pub grid: Vec<f64>,
    /// `U(φ)/k_B` at every grid point, K.
    pub potential_k: Vec<f64>,
    pub levels: Vec<Level>,
    /// Wavefunctions on every grid point (zero at the ends), normalised so
    /// that the trapezoidal integral of `ψ²` is one.
    pub wavefunctions: Vec<Vec<f64>>,
    /// Local minima of the potential, ascending in φ.
    pub minima: Vec<Extremum>,
    /// Barrier tops between neighbouring minima.
    pub barriers: Vec<Extremum>,
    pub coarse_grid: bool,
}

/// Lowest `k` levels of the Hamiltonian.
pub fn eigensolve(h: &Hamiltonian, k: usize) -> Result<SpectrumResult, QubitError> {
    let interior = h.matrix.len();
    if k > interior {
        return Err(QubitError::TooManyLevels {
            requested: k,
            available: interior,
        });
    }
    let q = &h.params;
    let unit = q.energy_unit();
    let to_k = unit / BOLTZMANN;
    let step = h.grid.spacing();
    let grid = h.grid.points();
    let (values, vectors) = h.matrix.lowest_eigenpairs(k);

    let potential_k: Vec<f64> = h.potential.iter().map(|u| u * to_k).collect();
    let (minima, barriers) = extrema(&grid, &potential_k);

    let mut wavefunctions = Vec::with_capacity(k);
    let mut levels = Vec::with_capacity(k);
    for (index, (e, v)) in values.iter().zip(vectors).enumerate() {
        let scale = 1.0 / step.sqrt();
        let mut psi = Vec::with_capacity(grid.len());
        psi.push(0.0);
        psi.extend(v.iter().map(|x| x * scale));
        psi.push(0.0);
        let flux_expect = flux_expectation(&grid, &psi);
        let energy_j = e * unit;
        levels.push(Level {
            index,
            energy_j,
            energy_k: energy_j / BOLTZMANN,
            energy_ghz: energy_j / PLANCK / 1e9,
            flux_expect,
            well: assign_well(flux_expect, &minima, &barriers),
        });
        wavefunctions.push(psi);
    }
    Ok(SpectrumResult {
        params: *q,
        grid,
        potential_k,
        levels,
        wavefunctions,
        minima,
        barriers,
        coarse_grid: h.coarse,
    })
}

/// Builds the Hamiltonian on the default grid and solves for `k` levels.
pub fn spectrum(q: &QubitParams, k: usize) -> Result<SpectrumResult, QubitError> {
    eigensolve(&build_hamiltonian(q, &Grid::default_for(q))?, k)
}

/// ⟨φ⟩ for a wavefunction of any normalisation.
pub fn flux_expectation(grid: &[f64], psi: &[f64]) -> f64 {
    let (num, den) = grid
        .iter()
        .zip(psi)
        .fold((0.0, 0.0), |(n, d), (x, p)| (n + x * p * p, d + p * p));
    num / den
}

fn extrema(grid: &[f64], u: &[f64]) -> (Vec<Extremum>, Vec<Extremum>) {
    let mut minima = Vec::new();
    let mut maxima = Vec::new();
    for i in 1..u.len().saturating_sub(1) {
        let e = Extremum {
            phi: grid[i],
            potential_k: u[i],
        };
        if u[i] < u[i - 1] && u[i] <= u[i + 1] {
            minima.push(e);
        } else if u[i] > u[i - 1] && u[i] >= u[i + 1] {
            maxima.push(e);
        }
    }
    let barriers = minima
        .windows(2)
        .filter_map(|w| {
            maxima
                .iter()
                .filter(|m| m.phi > w[0].phi && m.phi < w[1].phi)
                .max_by(|a, b| a.potential_k.total_cmp(&b.potential_k))
                .copied()
        })
        .collect();
    (minima, barriers)
}

fn assign_well(phi: f64, minima: &[Extremum], barriers: &[Extremum]) -> WellAssignment {
    if barriers.iter().any(|b| (phi - b.phi).abs() < 0.01) {
        return WellAssignment::Delocalized;
    }
    let well = barriers.iter().filter(|b| phi > b.phi).count();
    if minima.is_empty() {
        WellAssignment::Delocalized
    } else {
        WellAssignment::Well(well.min(minima.len() - 1))
    }
}

/// Shift of ⟨φ⟩ when a level moves between the shallow and the deep well.
///
/// Takes the lowest level localised in the shallowest well and the deep-well
/// level nearest to it in energy; `None` unless the potential has two or
/// more wells each holding a level.
pub fn well_flux_separation(s: &SpectrumResult) -> Option<f64> {
    if s.minima.len() < 2 {
        return None;
    }
    let deep = (0..s.minima.len()).min_by(|&a, &b| s.minima[a].potential_k.total_cmp(&s.minima[b].potential_k))?;
    let shallow = (0..s.minima.len())
        .filter(|&i| i != deep)
        .min_by(|&a, &b| s.minima[a].potential_k.total_cmp(&s.minima[b].potential_k))?;
    let upper = s.levels.iter().find(|l| l.well == WellAssignment::Well(shallow))?;
    let lower = s
        .levels
        .iter()
        .filter(|l| l.well == WellAssignment::Well(deep))
        .min_by(|a, b| (a.energy_j - upper.energy_j).abs().total_cmp(&(b.energy_j - upper.energy_j).abs()))?;
    Some((upper.flux_expect - lower.flux_expect).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    BetaL,
    PhiE,
    L,
    C,
}

impl ScanParameter {
    pub fn apply(self, q: &QubitParams, value: f64) -> QubitParams {
        let mut out = *q;
        match self {
            ScanParameter::BetaL => out.beta_l = value,
            ScanParameter::PhiE => out.phi_e = value,
            ScanParameter::L => out.l = value,
            ScanParameter::C => out.c = value,
        }
        out
    }

    pub fn name(self) -> &'static str {
        match self {
            ScanParameter::BetaL => "beta_l",
            ScanParameter::PhiE => "phi_e",
            ScanParameter::L => "l",
            ScanParameter::C => "c",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub value: f64,
    pub f_ghz: f64,
}

/// Transition frequency between levels `i < j` across `values` of one parameter.
///
/// Each point gets a grid of `points` samples centred on its own φ_e.
pub fn transition_scan(
    base: &QubitParams,
    vary: ScanParameter,
    values: &[f64],
    levels: (usize, usize),
    points: usize,
    exec: Execution,
) -> Result<Vec<ScanPoint>, QubitError> {
    let (i, j) = levels;
    if i >= j {
        return Err(QubitError::InvalidScan(format!("need i < j, got ({i}, {j})")));
    }
    par::map_slice(exec, values, |&value| {
        let q = vary.apply(base, value);
        let grid = Grid::centered(q.phi_e, Grid::DEFAULT_HALF_WIDTH, points);
        let s = eigensolve(&build_hamiltonian(&q, &grid)?, j + 1)?;
        Ok(ScanPoint {
            value,
            f_ghz: s.levels[j].energy_ghz - s.levels[i].energy_ghz,
        })
    })
    .into_iter()
    .collect()
}
