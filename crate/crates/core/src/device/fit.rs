//! Least-squares extraction of β and U_T from static I–V data.

use std::io::Read;

use serde::Serialize;
use thiserror::Error;

use super::{IvSample, StatzParams};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("degenerate Jacobian: samples span fewer than two distinct gate voltages")]
    DegenerateJacobian,
    #[error("need at least 4 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("sample {index} is outside the forward region or not finite")]
    InvalidSample { index: usize },
    #[error("invalid fit options: {0}")]
    InvalidOptions(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Fixed coefficients, starting point and stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub lambda: f64,
    pub alpha: f64,
    pub init_beta: f64,
    pub init_u_t: f64,
    /// Carried into the returned parameters unchanged.
    pub c_in: f64,
    pub r_in: f64,
    pub max_iterations: usize,
    /// Converged when every relative parameter step falls below this.
    pub step_tolerance: f64,
}

impl Default for FitOptions {
    /// Stock simulator coefficients as the starting point.
    fn default() -> Self {
        Self {
            lambda: StatzParams::DEFAULT_LAMBDA,
            alpha: StatzParams::DEFAULT_ALPHA,
            init_beta: 0.1,
            init_u_t: -0.55,
            c_in: 0.0,
            r_in: 0.0,
            max_iterations: 200,
            step_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport {
    pub params: StatzParams,
    /// Root-mean-square current residual, A.
    pub rms: f64,
    pub iterations: usize,
    /// False when the iteration budget ran out; `params` is then the best point found.
    pub converged: bool,
}

/// Levenberg–Marquardt fit of (β, U_T) with λ and α held fixed.
pub fn fit_statz(samples: &[IvSample], opts: &FitOptions) -> Result<FitReport, FitError> {
    for (index, s) in samples.iter().enumerate() {
        let finite = s.u_gs.is_finite() && s.u_ds.is_finite() && s.i_d.is_finite();
        if !finite || s.u_ds < 0.0 || s.i_d < 0.0 {
            return Err(FitError::InvalidSample { index });
        }
    }
    if samples.is_empty() {
        return Err(FitError::InsufficientSamples(0));
    }
    let first_gate = samples.first().map(|s| s.u_gs);
    if !samples.iter().any(|s| Some(s.u_gs) != first_gate) {
        return Err(FitError::DegenerateJacobian);
    }
    if samples.len() < 4 {
        return Err(FitError::InsufficientSamples(samples.len()));
    }
    let mut params = StatzParams::new(
        opts.init_beta,
        opts.init_u_t,
        opts.lambda,
        opts.alpha,
        opts.c_in,
        opts.r_in,
    )
    .map_err(|e| FitError::InvalidOptions(e.to_string()))?;

    let cost = |p: &StatzParams| -> f64 {
        samples
            .iter()
            .map(|s| {
                let r = p.eval(s.u_gs, s.u_ds).0 - s.i_d;
                r * r
            })
            .sum()
    };

    let mut current = cost(&params);
    let mut damping = 1e-3;
    let mut converged = current == 0.0;
    let mut iterations = 0;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        // normal equations for the 2×2 system
        let (mut a00, mut a01, mut a11, mut g0, mut g1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for s in samples {
            let overdrive = s.u_gs - params.u_t;
            if overdrive <= 0.0 {
                continue;
            }
            let shape = (1.0 + params.lambda * s.u_ds) * (params.alpha * s.u_ds).tanh();
            let d_beta = overdrive * overdrive * shape;
            let d_ut = -2.0 * params.beta * overdrive * shape;
            let r = params.beta * d_beta - s.i_d;
            a00 += d_beta * d_beta;
            a01 += d_beta * d_ut;
            a11 += d_ut * d_ut;
            g0 += d_beta * r;
            g1 += d_ut * r;
        }
        let det = a00 * a11 - a01 * a01;
        if !(det > 1e-10 * a00 * a11) {
            if iterations == 1 {
                return Err(FitError::DegenerateJacobian);
            }
            break;
        }

        let mut accepted = false;
        while damping < 1e16 {
            let m00 = a00 * (1.0 + damping);
            let m11 = a11 * (1.0 + damping);
            let mdet = m00 * m11 - a01 * a01;
            let step_beta = -(m11 * g0 - a01 * g1) / mdet;
            let step_ut = -(m00 * g1 - a01 * g0) / mdet;
            let trial = StatzParams {
                beta: params.beta + step_beta,
                u_t: params.u_t + step_ut,
                ..params
            };
            let trial_cost = if trial.beta > 0.0 { cost(&trial) } else { f64::INFINITY };
            if trial_cost <= current {
                let small = step_beta.abs() <= opts.step_tolerance * params.beta.abs()
                    && step_ut.abs() <= opts.step_tolerance * params.u_t.abs().max(1e-12);
                params = trial;
                current = trial_cost;
                damping = (damping / 10.0).max(1e-12);
                accepted = true;
                converged = small || current == 0.0;
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            // no downhill step at any damping: already at the minimum to machine precision
            converged = true;
        }
    }

    Ok(FitReport {
        params,
        rms: (current / samples.len() as f64).sqrt(),
        iterations,
        converged,
    })
}

/// Reads samples from CSV with header `u_gs,u_ds,i_d` (SI units).
pub fn read_iv_csv<R: Read>(reader: R) -> Result<Vec<IvSample>, FitError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}
