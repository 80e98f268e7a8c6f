//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use cryoamp::device::IvSample;

/// Drain current law written out directly, independent of the library.
pub fn statz(beta: f64, u_t: f64, lambda: f64, alpha: f64, u_gs: f64, u_ds: f64) -> f64 {
    if u_gs <= u_t {
        return 0.0;
    }
    beta * (u_gs - u_t).powi(2) * (1.0 + lambda * u_ds) * (alpha * u_ds).tanh()
}

/// Self-biased stage: supply → R_D → drain, gate grounded, source → R_S → ground.
#[derive(Debug, Clone, Copy)]
pub struct SelfBiasFixture {
    pub supply: f64,
    pub r_drain: f64,
    pub r_source: f64,
    pub beta: f64,
    pub u_t: f64,
    pub lambda: f64,
    pub alpha: f64,
}

/// Node voltages of a [`SelfBiasFixture`].
#[derive(Debug, Clone, Copy)]
pub struct SelfBiasSolution {
    pub i_d: f64,
    pub v_drain: f64,
    pub v_source: f64,
}

impl SelfBiasFixture {
    pub fn netlist(&self) -> String {
        format!(
            ".model M STATZ beta={:e} vto={:e} lambda={:e} alpha={:e} cin=0 rin=0\nV1 vdd 0 {:e}\nRD vdd d {:e}\nJ1 d 0 s M\nRS s 0 {:e}\n",
            self.beta, self.u_t, self.lambda, self.alpha, self.supply, self.r_drain, self.r_source
        )
    }

    /// Solves the single scalar equation `I = f(−I R_S, U − I (R_D + R_S))` by bisection.
    ///
    /// The residual `I − f(..)` is strictly increasing in `I`, negative at 0
    /// and positive where the channel voltage reaches zero.
    pub fn bisect(&self) -> SelfBiasSolution {
        let current = |i: f64| {
            statz(
                self.beta,
                self.u_t,
                self.lambda,
                self.alpha,
                -i * self.r_source,
                self.supply - i * (self.r_drain + self.r_source),
            )
        };
        let mut lo = 0.0;
        let mut hi = self.supply / (self.r_drain + self.r_source);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if mid - current(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let i_d = 0.5 * (lo + hi);
        SelfBiasSolution {
            i_d,
            v_drain: self.supply - i_d * self.r_drain,
            v_source: i_d * self.r_source,
        }
    }
}

/// Gate voltages of the synthetic I–V grid: three near pinch-off, two near
/// zero bias, which keeps β and U_T well separated in the fit.
pub const GATES: [f64; 5] = [-0.40, -0.35, -0.30, -0.05, 0.0];
/// Drain voltages of the synthetic I–V grid.
pub const DRAINS: [f64; 5] = [0.2, 0.5, 0.8, 1.1, 1.4];

/// Synthetic 5×5 I–V grid with optional relative Gaussian noise of standard
/// deviation `noise`.
pub fn noisy_iv(beta: f64, u_t: f64, noise: f64, seed: u64) -> Vec<IvSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut out = Vec::with_capacity(25);
    for u_gs in GATES {
        for u_ds in DRAINS {
            let clean = statz(beta, u_t, 0.0, 2.0, u_gs, u_ds);
            let i_d = clean * (1.0 + noise * normal.sample(&mut rng));
            out.push(IvSample { u_gs, u_ds, i_d: i_d.max(0.0) });
        }
    }
    out
}

/// First-order RC low-pass magnitude in dB.
pub fn rc_lowpass_db(r: f64, c: f64, f: f64) -> f64 {
    let wrc = 2.0 * std::f64::consts::PI * f * r * c;
    -10.0 * (1.0 + wrc * wrc).log10()
}
