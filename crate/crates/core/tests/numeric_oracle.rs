use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signed_reservoir::analysis::{covariance_rank, RankPolicy};
use signed_reservoir::eigen::eigenvalues;
use signed_reservoir::network::{normalize_spectral, SignedNetwork};
use signed_reservoir::readout::{fit_matrix, predict_matrix};
use signed_reservoir::reservoir::StateMatrix;

fn random_signed(m: usize, density: f64, rng: &mut ChaCha8Rng) -> SignedNetwork {
    let entries = (0..m * m)
        .map(|idx| {
            if idx / m != idx % m && rng.random_bool(density) {
                if rng.random_bool(0.5) { 1 } else { -1 }
            } else {
                0
            }
        })
        .collect();
    SignedNetwork::from_entries(m, entries).unwrap()
}

fn ridge_by_normal_equations(omega: &DMatrix<f64>, g: &[f64], k: f64) -> DVector<f64> {
    let p = omega.ncols();
    let gram = omega.tr_mul(omega) + DMatrix::identity(p, p) * (k * k);
    let rhs = omega.tr_mul(&DVector::from_column_slice(g));
    gram.cholesky().expect("gram is positive definite").solve(&rhs)
}

#[test]
fn readout_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..100 {
        let m = rng.random_range(1..=20);
        let n = rng.random_range(m + 2..=200);
        let k = if case % 2 == 0 { 1e-5 } else { 1e-2 };
        let mut omega = DMatrix::from_fn(n, m + 1, |_, _| rng.random_range(-1.0..1.0));
        omega.column_mut(m).fill(1.0);
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let model = fit_matrix(&omega, &g, k).unwrap();
        let oracle = ridge_by_normal_equations(&omega, &g, k);
        let c = DVector::from_vec(model.coeffs.clone());
        let rel = (&c - &oracle).norm() / oracle.norm();
        assert!(rel < 1e-8, "case {case}: N={n} M={m} relative difference {rel:e}");
    }
}

#[test]
fn eigenvalue_power_sums_are_exact_traces() {
    // sum_i lambda_i^k equals trace(A^k), an exact integer for a signed matrix
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..30 {
        let m = rng.random_range(2..=12);
        let net = random_signed(m, rng.random_range(0.1..0.9), &mut rng);
        let a: Vec<i128> = net.entries().iter().map(|&v| v as i128).collect();
        let eig = eigenvalues(&net.to_matrix()).unwrap();
        assert_eq!(eig.len(), m);
        let mut power = a.clone();
        for k in 1..=m {
            if k > 1 {
                let mut next = vec![0i128; m * m];
                for i in 0..m {
                    for l in 0..m {
                        let x = power[i * m + l];
                        if x != 0 {
                            for j in 0..m {
                                next[i * m + j] += x * a[l * m + j];
                            }
                        }
                    }
                }
                power = next;
            }
            let trace: i128 = (0..m).map(|i| power[i * m + i]).sum();
            let sum = eig.iter().fold(nalgebra::Complex::new(0.0, 0.0), |acc, z| acc + z.powu(k as u32));
            let scale = eig.iter().map(|z| z.norm().powi(k as i32)).sum::<f64>().max(1.0);
            assert!((sum.re - trace as f64).abs() < 1e-9 * scale, "case {case} k={k}: {} vs {trace}", sum.re);
            assert!(sum.im.abs() < 1e-9 * scale, "case {case} k={k}: imaginary residue {}", sum.im);
        }
    }
}

#[test]
fn normalization_hits_target_by_independent_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..20 {
        let net = random_signed(20, rng.random_range(0.2..1.0), &mut rng);
        let target = rng.random_range(0.1..2.0);
        let adj = match normalize_spectral(&net, target) {
            Ok(a) => a,
            Err(_) => continue,
        };
        let oracle = adj.entries.clone().schur().complex_eigenvalues();
        let extent = oracle.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        assert!((extent - target).abs() < 1e-9, "case {case}: {extent} vs {target}");
    }
}

// Exact rank over the rationals by fraction-free elimination.
fn exact_rank(rows: &[Vec<BigInt>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let (n, p) = (a.len(), a[0].len());
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for col in 0..p {
        let Some(pivot) = (rank..n).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, pivot);
        for r in rank + 1..n {
            for c in col + 1..p {
                a[r][c] = (&a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c]) / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
        if rank == n {
            break;
        }
    }
    rank
}

#[test]
fn covariance_rank_matches_exact_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..40 {
        let (n, m) = (60, rng.random_range(2..=12));
        let r = rng.random_range(1..=m);
        let b: Vec<i64> = (0..n * r).map(|_| rng.random_range(-3..=3)).collect();
        let c: Vec<i64> = (0..r * m).map(|_| rng.random_range(-3..=3)).collect();
        let x: Vec<i64> = (0..n * m).map(|idx| (0..r).map(|l| b[(idx / m) * r + l] * c[l * m + idx % m]).sum()).collect();
        // N * (x - column mean) is an integer matrix with the covariance's rank
        let col_sum: Vec<i64> = (0..m).map(|j| (0..n).map(|i| x[i * m + j]).sum()).collect();
        let centered: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..m).map(|j| BigInt::from(n as i64 * x[i * m + j] - col_sum[j])).collect())
            .collect();
        let expected = exact_rank(&centered);
        let nodes = DMatrix::from_fn(n, m, |i, j| x[i * m + j] as f64);
        let states = StateMatrix::from_nodes(&nodes).unwrap();
        for policy in [RankPolicy::UlpScaled, RankPolicy::fixed_default()] {
            let got = covariance_rank(&states, policy).unwrap().gamma;
            assert_eq!(got, expected, "case {case}: policy {policy:?}, N={n} M={m} inner={r}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn readout_is_row_order_invariant(seed in any::<u64>(), n in 30usize..120, m in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = DMatrix::from_fn(n, m + 1, |_, j| if j == m { 1.0 } else { rng.random_range(-1.0..1.0) });
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let shuffled = DMatrix::from_fn(n, m + 1, |i, j| omega[(order[i], j)]);
        let g2: Vec<f64> = order.iter().map(|&i| g[i]).collect();
        let c1 = fit_matrix(&omega, &g, 1e-5).unwrap().coeffs;
        let c2 = fit_matrix(&shuffled, &g2, 1e-5).unwrap().coeffs;
        for (a, b) in c1.iter().zip(&c2) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn tiny_ridge_reaches_least_squares(seed in any::<u64>(), n in 30usize..120, m in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = DMatrix::from_fn(n, m + 1, |_, j| if j == m { 1.0 } else { rng.random_range(-1.0..1.0) });
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = DVector::from_vec(fit_matrix(&omega, &g, 1e-12).unwrap().coeffs);
        let qr = omega.clone().qr();
        let qtg = qr.q().tr_mul(&DVector::from_column_slice(&g));
        let ls = qr.r().solve_upper_triangular(&qtg).unwrap();
        prop_assert!((&c - &ls).norm() < 1e-8 * (1.0 + ls.norm()));
        // the residual is orthogonal to every column
        let h = DVector::from_vec(predict_matrix(&omega, c.as_slice()).unwrap());
        let resid = DVector::from_column_slice(&g) - h;
        prop_assert!(omega.tr_mul(&resid).amax() < 1e-9 * n as f64);
    }
}
