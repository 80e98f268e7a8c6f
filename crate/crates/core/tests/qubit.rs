use cryoamp::physics::qubit::{
    build_hamiltonian, eigensolve, flux_expectation, spectrum, transition_scan, well_flux_separation, Grid,
    QubitParams, ScanParameter, WellAssignment,
};
use cryoamp::Execution;

fn levels_on(q: &QubitParams, points: usize, k: usize) -> Vec<f64> {
    let grid = Grid::centered(q.phi_e, Grid::DEFAULT_HALF_WIDTH, points);
    let s = eigensolve(&build_hamiltonian(q, &grid).unwrap(), k).unwrap();
    s.levels.iter().map(|l| l.energy_j).collect()
}

#[test]
fn working_point_is_a_double_well() {
    let s = spectrum(&QubitParams::working_point(), 10).unwrap();
    assert_eq!(s.minima.len(), 2);
    assert_eq!(s.barriers.len(), 1);
    assert!(!s.coarse_grid);
    let sep = well_flux_separation(&s).unwrap();
    assert!((sep - 0.3).abs() < 0.05, "separation {sep}");
    assert!(s.levels.iter().any(|l| l.well == WellAssignment::Well(0)));
    assert!(s.levels.iter().any(|l| l.well == WellAssignment::Well(1)));
}

#[test]
fn refinement_is_second_order() {
    let q = QubitParams::working_point();
    // interval counts 512, 1024, 2048
    let coarse = levels_on(&q, 513, 8);
    let mid = levels_on(&q, 1025, 8);
    let fine = levels_on(&q, 2049, 8);
    for i in 0..8 {
        let ratio = (coarse[i] - mid[i]) / (mid[i] - fine[i]);
        assert!((3.5..=4.5).contains(&ratio), "level {i}: ratio {ratio}");
    }
}

#[test]
fn harmonic_limit_spacing() {
    let q = QubitParams {
        beta_l: 0.0,
        phi_e: 0.5,
        ..QubitParams::working_point()
    };
    let s = spectrum(&q, 6).unwrap();
    let quantum = q.harmonic_frequency() / 1e9;
    for w in s.levels.windows(2) {
        let spacing = w[1].energy_ghz - w[0].energy_ghz;
        assert!((spacing / quantum - 1.0).abs() < 5e-3, "{spacing} vs {quantum}");
    }
}

#[test]
fn eigenpairs_are_orthonormal_with_small_residual() {
    let q = QubitParams::working_point();
    let h = build_hamiltonian(&q, &Grid::default_for(&q)).unwrap();
    let (values, vectors) = h.matrix.lowest_eigenpairs(10);
    let norm = h.matrix.norm();
    for (i, (e, v)) in values.iter().zip(&vectors).enumerate() {
        let hv = h.matrix.mul(v);
        let r: f64 = hv.iter().zip(v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
        assert!(r < 1e-8 * norm, "pair {i}: residual {r}");
        for (j, w) in vectors.iter().enumerate() {
            let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((dot - expected).abs() < 1e-8, "gram ({i},{j}) = {dot}");
        }
    }
}

#[test]
fn wavefunctions_are_unit_normalised() {
    let s = spectrum(&QubitParams::working_point(), 4).unwrap();
    let h = s.grid[1] - s.grid[0];
    for psi in &s.wavefunctions {
        let total: f64 = psi.iter().map(|p| p * p).sum::<f64>() * h;
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn flux_expectation_ignores_scale() {
    let s = spectrum(&QubitParams::working_point(), 8).unwrap();
    for (level, psi) in s.levels.iter().zip(&s.wavefunctions) {
        for scale in [1e-6, 0.5, -3.0, 1e4] {
            let scaled: Vec<f64> = psi.iter().map(|p| p * scale).collect();
            let e = flux_expectation(&s.grid, &scaled);
            assert!((e - level.flux_expect).abs() < 1e-9);
        }
    }
}

#[test]
fn barrier_scan_stretches_transition() {
    let values: Vec<f64> = (0..=12).map(|i| 1.30 + 0.025 * i as f64).collect();
    let scan = transition_scan(
        &QubitParams::working_point(),
        ScanParameter::BetaL,
        &values,
        (6, 7),
        Grid::DEFAULT_POINTS,
        Execution::Parallel,
    )
    .unwrap();
    let f: Vec<f64> = scan.iter().map(|p| p.f_ghz).collect();
    assert!(f.iter().all(|&x| x > 0.0));
    let increasing = f.windows(2).all(|w| w[1] > w[0]);
    let decreasing = f.windows(2).all(|w| w[1] < w[0]);
    assert!(increasing || decreasing, "{f:?}");
    let (lo, hi) = (f.iter().cloned().fold(f64::INFINITY, f64::min), f.iter().cloned().fold(0.0, f64::max));
    assert!(hi / lo > 2.0, "{f:?}");
}

#[test]
fn external_flux_symmetry() {
    let deltas = [0.005, 0.0135, 0.03];
    let values: Vec<f64> = deltas.iter().flat_map(|d| [0.5 - d, 0.5 + d]).collect();
    let scan = transition_scan(
        &QubitParams::working_point(),
        ScanParameter::PhiE,
        &values,
        (0, 1),
        1025,
        Execution::Sequential,
    )
    .unwrap();
    for pair in scan.chunks(2) {
        assert!((pair[0].f_ghz / pair[1].f_ghz - 1.0).abs() < 1e-6, "{pair:?}");
    }
}

#[test]
fn sequential_and_parallel_scans_agree() {
    let values = [1.3, 1.4, 1.5];
    let run = |exec| {
        transition_scan(&QubitParams::working_point(), ScanParameter::BetaL, &values, (0, 1), 513, exec).unwrap()
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}
