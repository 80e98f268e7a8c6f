//! Acceptance suite: one PASS/FAIL line per criterion, runtimes included.
//!
//! Run with `cargo test --test acceptance` (add `--release` for representative timings).

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::SelfBiasFixture;
use cryoamp::ac::{design_l_match, input_impedance, linearize, log_grid, sweep_ac_with};
use cryoamp::amplifier::TWO_STAGE_AMP;
use cryoamp::dc::{solve_op, summary_selection, sweep_supply};
use cryoamp::device::{fit_statz, FitOptions};
use cryoamp::netlist::{parse, DcSweep};
use cryoamp::par::map_indexed;
use cryoamp::physics::qubit::{
    build_hamiltonian, eigensolve, spectrum, well_flux_separation, Grid, QubitParams,
};
use cryoamp::physics::{brightness_temperature, photon_rate, radiance_reduction};
use cryoamp::Execution;

struct Outcome {
    checks: Vec<(bool, String)>,
    limit: Option<Duration>,
}

impl Outcome {
    fn new(limit: Option<Duration>) -> Self {
        Self { checks: Vec::new(), limit }
    }

    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        self.checks.push((ok, detail.into()));
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value / target - 1.0).abs() <= rel
}

fn criterion(id: usize, name: &str, body: impl FnOnce(&mut Outcome), limit: Option<f64>) -> bool {
    let mut out = Outcome::new(limit.map(Duration::from_secs_f64));
    let start = Instant::now();
    body(&mut out);
    let elapsed = start.elapsed();
    if let Some(limit) = out.limit {
        out.check(elapsed < limit, format!("runtime {:.3} s < {:.1} s", elapsed.as_secs_f64(), limit.as_secs_f64()));
    }
    let pass = out.checks.iter().all(|(ok, _)| *ok);
    println!(
        "{} {id}. {name} ({:.3} s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    for (ok, detail) in &out.checks {
        println!("       [{}] {detail}", if *ok { "ok" } else { "!!" });
    }
    pass
}

fn operating_point(out: &mut Outcome) {
    let n = parse(TWO_STAGE_AMP).unwrap();
    let sweep = DcSweep {
        source: "V1".into(),
        start: 0.0,
        stop: 0.8,
        step: 0.01,
    };
    let table = sweep_supply(&n, &sweep).unwrap();
    let row = table.rows.iter().find(|r| (r.value - 0.44).abs() < 1e-9).unwrap();
    for fet in &row.op.fets {
        out.check(within(fet.u_ds, 0.030, 0.10), format!("{} U_ds = {:.3} mV (30 mV ± 10%)", fet.name, fet.u_ds * 1e3));
        out.check(within(fet.i_d, 33.6e-6, 0.10), format!("{} I_d = {:.3} µA (33.6 µA ± 10%)", fet.name, fet.i_d * 1e6));
        out.check(within(fet.p_hemt, 1.0e-6, 0.10), format!("{} P_HEMT = {:.4} µW (1.0 µW ± 10%)", fet.name, fet.p_hemt * 1e6));
    }
    for (rs, rd) in [("R2", "R4"), ("R3", "R5")] {
        let p = row.op.resistor_power[rs] + row.op.resistor_power[rd];
        out.check(within(p, 13.6e-6, 0.15), format!("P_bias({rs}+{rd}) = {:.3} µW (13.6 µW ± 15%, per stage)", p * 1e6));
    }
    let (fet, bias) = summary_selection(&n);
    let summary = table.summary(fet.as_deref(), &bias);
    out.check(summary.len() == 81, format!("{} sweep rows", summary.len()));
}

fn gain_triple(out: &mut Outcome) {
    let n = parse(TWO_STAGE_AMP).unwrap();
    let op = solve_op(&n).unwrap();
    let lin = linearize(&n, &op).unwrap();
    let g = lin.gains_at(450e6).unwrap().unwrap();
    out.check((g.gv + 6.0).abs() <= 3.0, format!("G_V(450 MHz) = {:.2} dB (−6 ± 3)", g.gv));
    out.check((g.gi - 21.0).abs() <= 3.0, format!("G_I(450 MHz) = {:.2} dB (21 ± 3)", g.gi));
    out.check((g.gp - 15.0).abs() <= 3.0, format!("G_P(450 MHz) = {:.2} dB (15 ± 3)", g.gp));
    let freqs: Vec<f64> = {
        let (a, b) = (1e8f64.ln(), 2e9f64.ln());
        (0..500).map(|i| (a + (b - a) * i as f64 / 499.0).exp()).collect()
    };
    let r = sweep_ac_with(&lin, &freqs, Execution::Parallel).unwrap();
    let worst = (0..r.gp.len())
        .map(|k| (r.gp[k] - r.gv[k] - r.gi[k]).abs())
        .fold(0.0, f64::max);
    out.check(r.failures.is_empty() && r.gp.len() == 500, format!("{} of 500 points solved", r.gp.len()));
    out.check(worst <= 1e-6, format!("max |G_P − G_V − G_I| = {worst:.2e} dB (≤ 1e-6)"));
}

fn statz_fit(out: &mut Outcome) {
    let clean = common::noisy_iv(0.08, -0.46, 0.0, 0);
    let r = fit_statz(&clean, &FitOptions::default()).unwrap();
    let (eb, eu) = ((r.params.beta / 0.08 - 1.0).abs(), (r.params.u_t / -0.46 - 1.0).abs());
    out.check(r.converged && eb <= 1e-6 && eu <= 1e-6, format!("round trip: |Δβ/β| = {eb:.1e}, |ΔU_T/U_T| = {eu:.1e} (≤ 1e-6)"));
    let betas = map_indexed(Execution::Parallel, 100, |seed| {
        fit_statz(&common::noisy_iv(0.08, -0.46, 0.01, seed as u64), &FitOptions::default())
            .map(|r| r.params.beta / 0.08 - 1.0)
            .unwrap_or(f64::INFINITY)
    });
    let worst = betas.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let mean = betas.iter().sum::<f64>() / betas.len() as f64;
    let sd = (betas.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (betas.len() - 1) as f64).sqrt();
    out.check(
        worst <= 0.03,
        format!("1% noise, 100 seeds: worst |Δβ/β| = {:.2}% (≤ 3%), mean {:+.2}%, σ {:.2}%", worst * 100.0, mean * 100.0, sd * 100.0),
    );
}

fn dc_oracle(out: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut fixtures = vec![SelfBiasFixture {
        supply: 0.44,
        r_drain: 1.00346e3,
        r_source: 11.1989e3,
        beta: 0.08,
        u_t: -0.46,
        lambda: 0.0,
        alpha: 2.0,
    }];
    for _ in 0..200 {
        fixtures.push(SelfBiasFixture {
            supply: rng.random_range(0.05..2.0),
            r_drain: rng.random_range(10.0..20e3),
            r_source: rng.random_range(10.0..50e3),
            beta: rng.random_range(0.01..0.5),
            u_t: rng.random_range(-1.0..-0.1),
            lambda: rng.random_range(0.0..0.2),
            alpha: rng.random_range(0.5..5.0),
        });
    }
    let mut worst_v = 0.0f64;
    let mut worst_kcl = 0.0f64;
    let mut failures = 0;
    for fx in &fixtures {
        let oracle = fx.bisect();
        match solve_op(&parse(&fx.netlist()).unwrap()) {
            Ok(op) if op.converged => {
                worst_v = worst_v
                    .max((op.voltage("d").unwrap() - oracle.v_drain).abs())
                    .max((op.voltage("s").unwrap() - oracle.v_source).abs());
                worst_kcl = worst_kcl.max(op.kcl_residual);
            }
            _ => failures += 1,
        }
    }
    let amp = parse(TWO_STAGE_AMP).unwrap();
    let table = sweep_supply(&amp, amp.dc_sweep().unwrap()).unwrap();
    for row in &table.rows {
        worst_kcl = worst_kcl.max(row.op.kcl_residual);
    }
    out.check(failures == 0, format!("{} of {} fixtures converged", fixtures.len() - failures, fixtures.len()));
    out.check(worst_v <= 1e-8, format!("max node-voltage deviation from bisection = {worst_v:.2e} V (≤ 1e-8)"));
    out.check(worst_kcl < 1e-12, format!("max KCL residual (fixtures + amplifier sweep) = {worst_kcl:.2e} A (< 1e-12)"));
}

fn qubit_spectrum(out: &mut Outcome) {
    let q = QubitParams::working_point();
    let s = spectrum(&q, 10).unwrap();
    out.check(s.grid.len() == Grid::DEFAULT_POINTS, format!("n = {}, {} levels", s.grid.len(), s.levels.len()));
    out.check(s.minima.len() == 2 && s.barriers.len() == 1, format!("{} minima, {} barrier", s.minima.len(), s.barriers.len()));
    match well_flux_separation(&s) {
        Some(sep) => out.check((sep - 0.3).abs() <= 0.05, format!("⟨Φ⟩ separation between wells = {sep:.4} Φ₀ (0.3 ± 0.05)")),
        None => out.check(false, "no level found in each well"),
    }

    let harmonic = QubitParams {
        beta_l: 0.0,
        phi_e: 0.5,
        ..q
    };
    let hs = spectrum(&harmonic, 6).unwrap();
    let quantum = harmonic.harmonic_frequency() / 1e9;
    let worst = hs
        .levels
        .windows(2)
        .map(|w| ((w[1].energy_ghz - w[0].energy_ghz) / quantum - 1.0).abs())
        .fold(0.0, f64::max);
    out.check(worst <= 5e-3, format!("β_L = 0 spacing vs 1/(2π√(LC)) = {quantum:.3} GHz: max deviation {:.3}% (≤ 0.5%)", worst * 100.0));

    let energies = |points: usize| -> Vec<f64> {
        let grid = Grid::centered(q.phi_e, Grid::DEFAULT_HALF_WIDTH, points);
        let s = eigensolve(&build_hamiltonian(&q, &grid).unwrap(), 8).unwrap();
        s.levels.iter().map(|l| l.energy_j).collect()
    };
    let (a, b, c) = (energies(513), energies(1025), energies(2049));
    let ratios: Vec<f64> = (0..8).map(|i| (a[i] - b[i]) / (b[i] - c[i])).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    out.check(
        lo >= 3.5 && hi <= 4.5,
        format!("refinement ratio over levels 0–7 in [{lo:.3}, {hi:.3}] (within [3.5, 4.5])"),
    );
}

fn photon_budget(out: &mut Outcome) {
    let rate = |f: f64, t: f64| photon_rate(f, t, 1.25e-2, f / 10.0).unwrap().rate;
    let r1 = rate(10e9, 30e-3) / rate(10e9, 20e-3);
    let t1 = 11600.0 / 3.6;
    out.check(r1 / t1 <= 1.5 && t1 / r1 <= 1.5, format!("rate(10 GHz, 30 mK)/rate(10 GHz, 20 mK) = {r1:.4e} (target {t1:.4e}, ×1.5)"));
    let r2 = rate(8e9, 20e-3) / rate(8e9, 10e-3);
    let t2 = 252.0 * 14.0 * 86400.0;
    out.check(r2 / t2 <= 2.0 && t2 / r2 <= 2.0, format!("rate(8 GHz, 20 mK)/rate(8 GHz, 10 mK) = {r2:.4e} (target {t2:.4e}, ×2)"));
    let hi = radiance_reduction(10e9, 1.0, 10e-3).unwrap();
    out.check((20.0..=22.0).contains(&hi.orders), format!("10 GHz, 1 K → 10 mK: {:.3} orders (in [20, 22])", hi.orders));
    let lo = radiance_reduction(450e6, 1.0, 10e-3).unwrap();
    out.check((2.0..=3.0).contains(&lo.orders), format!("450 MHz, 1 K → 10 mK: {:.3} orders (in [2, 3])", lo.orders));
    out.check(hi.wideband_ratio == 1e8, format!("wide-band T⁴ ratio = {:e} (exactly 1e8)", hi.wideband_ratio));
}

fn brightness(out: &mut Outcome) {
    let cases = [
        (1.0, 100.0, f64::NEG_INFINITY, 1.0),
        (1.0, 100.0, -20.0, 2.0),
        (0.01, 0.01, -20.0, 0.0101),
    ];
    for (t_g, t_d, s12, expected) in cases {
        let t_b = brightness_temperature(t_g, t_d, s12);
        out.check(
            (t_b - expected).abs() <= 1e-15 * expected,
            format!("T_b({t_g}, {t_d}, {s12}) = {t_b} (expected {expected})"),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    for _ in 0..1000 {
        let (t_g, t_d, s) = (rng.random_range(0.0..10.0), rng.random_range(0.0..1000.0), rng.random_range(-60.0..0.0));
        let base = brightness_temperature(t_g, t_d, s);
        let dt = rng.random_range(1e-6..1.0);
        let ds = rng.random_range(1e-6..1.0f64).min(-s);
        if brightness_temperature(t_g + dt, t_d, s) < base
            || brightness_temperature(t_g, t_d + dt, s) < base
            || brightness_temperature(t_g, t_d, s + ds) < base
        {
            violations += 1;
        }
    }
    out.check(violations == 0, format!("monotonicity over 1000 random points: {violations} violations"));
}

fn matching(out: &mut Outcome) {
    for (rs, rl) in [(5.6e3, 600.0), (600.0, 50.0)] {
        let d = design_l_match(rs, rl, 450e6).unwrap();
        let z = input_impedance(&d, 450e6);
        let err = (z - rs).norm() / rs;
        out.check(err <= 0.01, format!("{rs} Ω → {rl} Ω at 450 MHz: Z_in = {:.3} {:+.3}j Ω, error {:.2e}", z.re, z.im, err));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 100 {
        let rs = 10f64.powf(rng.random_range(0.0..5.0));
        let rl = 10f64.powf(rng.random_range(0.0..5.0));
        let f = 10f64.powf(rng.random_range(6.0..10.5));
        if (rs / rl - 1.0).abs() < 1e-3 {
            continue;
        }
        let d = design_l_match(rs, rl, f).unwrap();
        worst = worst.max((input_impedance(&d, f) - rs).norm() / rs);
        count += 1;
    }
    out.check(worst <= 0.01, format!("100 random triples: worst relative error {worst:.2e} (≤ 1%)"));
}

fn circuit_oracles(out: &mut Outcome) {
    let (r, c) = (1e3f64, 1e-9f64);
    let corner = 1.0 / (2.0 * std::f64::consts::PI * r * c);
    let rc = parse(&format!("V1 in 0 DC 0 AC 1\nR1 in out {r:e}\nC1 out 0 {c:e}\n")).unwrap();
    let lin = linearize(&rc, &solve_op(&rc).unwrap()).unwrap();
    let db = 20.0 * lin.solve_at(corner).unwrap().voltage("out").unwrap().norm().log10();
    out.check((db + 3.01).abs() <= 0.01, format!("RC low-pass at the corner: {db:.4} dB (−3.01 ± 0.01)"));

    let divider = parse(include_str!("../netlists/divider.cir")).unwrap();
    let mid = solve_op(&divider).unwrap().voltage("mid").unwrap();
    out.check((mid - 0.5).abs() <= 1e-12, format!("divider midpoint {mid} V (0.5 ± 1e-12)"));

    let amp = parse(TWO_STAGE_AMP).unwrap();
    let passive = linearize(&amp, &solve_op(&amp).unwrap()).unwrap().without_transconductance();
    let sweep = amp.ac_sweep().unwrap();
    let freqs = log_grid(sweep.f_start, sweep.f_stop, sweep.points_per_decade).unwrap();
    let res = sweep_ac_with(&passive, &freqs, Execution::Parallel).unwrap();
    let max_real = res.gp_real.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_product = res.gp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    out.check(max_product <= 0.0, format!("g_m = 0: max G_P over {} points = {max_product:.3} dB (≤ 0)", freqs.len()));
    out.check(
        res.failures.is_empty() && max_real <= 0.0,
        format!("g_m = 0: max active-power gain over {} points = {max_real:.3} dB (≤ 0)", freqs.len()),
    );
}

fn main() -> ExitCode {
    println!("acceptance suite ({} build)", if cfg!(debug_assertions) { "debug" } else { "release" });
    let results = [
        criterion(1, "operating point of the shipped two-stage amplifier", operating_point, Some(1.0)),
        criterion(2, "gain triple at 450 MHz and gain identity", gain_triple, Some(2.0)),
        criterion(3, "Statz parameter fit", statz_fit, None),
        criterion(4, "DC engine against the bisection oracle", dc_oracle, None),
        criterion(5, "qubit spectrum", qubit_spectrum, Some(5.0)),
        criterion(6, "photon budget ratios and radiance reduction", photon_budget, Some(0.1)),
        criterion(7, "brightness temperature", brightness, None),
        criterion(8, "L-section matching", matching, None),
        criterion(9, "analytic circuit oracles", circuit_oracles, None),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
