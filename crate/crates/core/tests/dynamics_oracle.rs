use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signed_reservoir::analysis::{memory_capacity, MC_FLOOR, MC_FLOOR_RUN};
use signed_reservoir::network::{
    flip_edges, make_base_network, make_input_vector, normalize_matrix, normalize_spectral, InputKind,
    NormalizedAdjacency, SpectralMode,
};
use signed_reservoir::reservoir::{run_reservoir, ReservoirConfig};
use signed_reservoir::signals::{lorenz_generate, standardize, uniform_drive, LorenzParams, TimeSeries};

fn small_adjacency(m: usize, seed: u64, target: f64) -> NormalizedAdjacency {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(m, m, |i, j| if i != j { rng.random_range(-1.0..1.0) } else { 0.0 });
    normalize_matrix(&a, target, SpectralMode::MaxModulus).unwrap()
}

fn drive(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn series(v: Vec<f64>) -> TimeSeries {
    TimeSeries::new(v, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_nodes_superpose(seed in any::<u64>(), m in 2usize..12, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let adj = small_adjacency(m, seed, 0.5);
        let w = make_input_vector(m, InputKind::UniformRandom, seed ^ 1);
        let cfg = ReservoirConfig { size: m, transient: 20, n_record: 80, ..ReservoirConfig::linear(1.4) };
        let s1 = drive(100, seed ^ 2);
        let s2 = drive(100, seed ^ 3);
        let mix: Vec<f64> = s1.iter().zip(&s2).map(|(x, y)| a * x + b * y).collect();
        let r1 = run_reservoir(&adj, &w, &series(s1), &cfg).unwrap().nodes();
        let r2 = run_reservoir(&adj, &w, &series(s2), &cfg).unwrap().nodes();
        let r = run_reservoir(&adj, &w, &series(mix), &cfg).unwrap().nodes();
        let expected = r1 * a + r2 * b;
        prop_assert!((r - &expected).amax() < 1e-10 * (1.0 + expected.amax()));
    }

    #[test]
    fn states_are_deterministic(seed in any::<u64>(), m in 2usize..10) {
        let adj = small_adjacency(m, seed, 1.0);
        let w = make_input_vector(m, InputKind::AllOnes, 0);
        let cfg = ReservoirConfig { size: m, transient: 10, n_record: 40, ..ReservoirConfig::leaky_tanh(0.35) };
        let s = series(drive(50, seed));
        let a = run_reservoir(&adj, &w, &s, &cfg).unwrap();
        let b = run_reservoir(&adj, &w, &s, &cfg).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }
}

#[test]
fn step_halving_converges_at_fourth_order() {
    let (x, _, _) = lorenz_generate(&LorenzParams::default()).unwrap();
    let lorenz = standardize(&x).unwrap();
    let uniform = uniform_drive(12_000, 5).unwrap();
    let w = make_input_vector(100, InputKind::Alternating, 0);
    let net = make_base_network(100, 9800, 3).unwrap();
    for (lambda, target, s) in [(1.4, 0.5, &lorenz), (6.0, 0.5, &uniform)] {
        for eps in [0.0, 0.25, 0.5] {
            let flipped = flip_edges(&net, (eps * net.n_nonzero() as f64).round() as usize, 4).unwrap();
            let adj = normalize_spectral(&flipped, target).unwrap();
            let cfg = ReservoirConfig::polynomial(lambda);
            let coarse = run_reservoir(&adj, &w, s, &cfg).unwrap().nodes();
            let fine = run_reservoir(&adj, &w, s, &ReservoirConfig { substeps: 2, ..cfg }).unwrap().nodes();
            let finer = run_reservoir(&adj, &w, s, &ReservoirConfig { substeps: 4, ..cfg }).unwrap().nodes();
            let d = (&coarse - &fine).amax();
            let d2 = (&fine - &finer).amax();
            // successive halvings shrink the change at fourth order or faster
            assert!(d / d2 >= 12.0, "lambda {lambda}, eps {eps}: ratio {}", d / d2);
            if lambda < 2.0 {
                assert!(d < 2.5e-4, "lambda {lambda}, eps {eps}: max change {d:e}");
                assert!(d2 < 1e-4, "lambda {lambda}, eps {eps}: max change at dt/2 {d2:e}");
            }
        }
    }
}

// Independent memory capacity: per-delay ridge fit by normal equations and a
// textbook Pearson correlation, with the same stopping rule.
fn memory_by_normal_equations(omega: &DMatrix<f64>, s: &[f64], offset: usize, k_max: usize, ridge: f64) -> f64 {
    let n = omega.nrows();
    let p = omega.ncols();
    let chol = (omega.tr_mul(omega) + DMatrix::identity(p, p) * (ridge * ridge)).cholesky().unwrap();
    let mut total = 0.0;
    let mut low = 0;
    for k in 1..=k_max {
        let target = DVector::from_column_slice(&s[offset - k..offset - k + n]);
        let c = chol.solve(&omega.tr_mul(&target));
        let h = omega * c;
        let (mh, mt) = (h.mean(), target.mean());
        let cov: f64 = h.iter().zip(target.iter()).map(|(a, b)| (a - mh) * (b - mt)).sum();
        let vh: f64 = h.iter().map(|a| (a - mh).powi(2)).sum();
        let vt: f64 = target.iter().map(|b| (b - mt).powi(2)).sum();
        let r2 = cov * cov / (vh * vt);
        total += r2;
        low = if r2 < MC_FLOOR { low + 1 } else { 0 };
        if low >= MC_FLOOR_RUN {
            break;
        }
    }
    total
}

#[test]
fn memory_capacity_agrees_with_normal_equations() {
    let net = make_base_network(100, 9800, 11).unwrap();
    let flipped = flip_edges(&net, net.n_nonzero() / 2, 12).unwrap();
    let adj = normalize_spectral(&flipped, 1.36).unwrap();
    let w = make_input_vector(100, InputKind::Alternating, 0);
    let cfg = ReservoirConfig::leaky_tanh(0.66);
    let report = memory_capacity(&adj, &w, &cfg, 100, 13).unwrap();

    let s = uniform_drive(cfg.input_len(), 13).unwrap();
    let omega = run_reservoir(&adj, &w, &s, &cfg).unwrap();
    let oracle = memory_by_normal_equations(omega.values(), s.samples(), cfg.transient, 100, 1e-5);
    let rel = (report.mc_total - oracle).abs() / oracle;
    assert!(rel < 0.02, "library {} vs oracle {oracle}", report.mc_total);
    assert!(report.mc_total > 1.0);
}
