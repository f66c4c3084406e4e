//! Checks of the proximal operators and the ALM solver against independent
//! oracles (nalgebra's SVD and symmetric eigensolver, closed-form formulas).

use lrr_fusion_core::linalg::Matrix;
use lrr_fusion_core::lrr::{l21_shrink, lrr_solve, nuclear_norm, svt, AlmParams};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr_oracle::normal;

mod rand_distr_oracle {
    use rand::Rng;

    /// Box-Muller; kept local so the test data path shares no code with the crate.
    pub fn normal(rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let v: f64 = rng.random();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }
}

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| normal(rng))
}

fn oracle_singular_values(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Column-normalized rank-`r` data.
fn low_rank_data(rng: &mut StdRng, rows: usize, cols: usize, r: usize) -> Matrix {
    let x = random_matrix(rng, rows, r).matmul(&random_matrix(rng, r, cols));
    let norms = x.column_norms();
    Matrix::from_fn(rows, cols, |i, j| x[(i, j)] / norms[j])
}

#[test]
fn svt_spectrum_matches_oracle() {
    let mut rng = StdRng::seed_from_u64(5);
    let m = random_matrix(&mut rng, 5, 5);
    let out = svt(&m, 0.5).unwrap();
    let expected: Vec<f64> = oracle_singular_values(&m).iter().map(|s| (s - 0.5).max(0.0)).collect();
    let got = oracle_singular_values(&out);
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-10, "{got:?} vs {expected:?}");
    }
}

#[test]
fn svt_matches_oracle_reconstruction_on_random_cases() {
    let mut rng = StdRng::seed_from_u64(11);
    for case in 0..1000 {
        let rows = rng.random_range(1..=8);
        let cols = rng.random_range(1..=8);
        let m = random_matrix(&mut rng, rows, cols);
        let tau = rng.random::<f64>() * 2.0;
        let got = svt(&m, tau).unwrap();

        let svd = to_na(&m).svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let shrunk = DMatrix::from_diagonal(&svd.singular_values.map(|s| (s - tau).max(0.0)));
        let expected = u * shrunk * vt;
        let err = (to_na(&got) - expected).abs().max();
        assert!(err < 1e-9, "case {case}: {rows}x{cols} tau={tau} err={err}");
    }
}

#[test]
fn l21_shrink_matches_scalar_oracle() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..1000 {
        let rows = rng.random_range(1..=6);
        let cols = rng.random_range(1..=8);
        let m = random_matrix(&mut rng, rows, cols);
        let tau = rng.random::<f64>() * 3.0;
        let got = l21_shrink(&m, tau);
        for j in 0..cols {
            let c: f64 = (0..rows).map(|i| m[(i, j)] * m[(i, j)]).sum::<f64>().sqrt();
            for i in 0..rows {
                let expected = if c > tau { m[(i, j)] * (c - tau) / c } else { 0.0 };
                assert!((got[(i, j)] - expected).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn l21_shrink_four_by_six() {
    let mut rng = StdRng::seed_from_u64(13);
    let m = random_matrix(&mut rng, 4, 6);
    let got = l21_shrink(&m, 0.3);
    for j in 0..6 {
        let col = m.column(j);
        let c = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let k = if c > 0.3 { 1.0 - 0.3 / c } else { 0.0 };
        for i in 0..4 {
            assert!((got[(i, j)] - k * col[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn nuclear_norm_matches_eigen_oracle() {
    let mut rng = StdRng::seed_from_u64(14);
    for _ in 0..20 {
        let m = random_matrix(&mut rng, 8, 8);
        let mtm = to_na(&m).transpose() * to_na(&m);
        let eig = nalgebra::SymmetricEigen::new(mtm);
        let oracle: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
        assert!((nuclear_norm(&m).unwrap() - oracle).abs() < 1e-9);
    }
}

#[test]
fn noiseless_low_rank_recovers_shape_interaction() {
    let mut rng = StdRng::seed_from_u64(15);
    let x = low_rank_data(&mut rng, 16, 10, 2);
    let sol = lrr_solve(&x, &AlmParams::with_lambda(10.0)).unwrap();
    assert!(sol.converged);
    assert!(sol.e.frobenius_norm() < 1e-3 * x.frobenius_norm());
    assert!((nuclear_norm(&sol.z).unwrap() - 2.0).abs() < 0.05);

    // V_r V_rᵀ from the oracle SVD
    let svd = to_na(&x).svd(false, true);
    let vt = svd.v_t.unwrap();
    let vr = vt.rows(0, 2);
    let shape_interaction = vr.transpose() * vr;
    assert!((to_na(&sol.z) - shape_interaction).abs().max() < 1e-3);
}

#[test]
fn gross_column_corruption_goes_to_noise_term() {
    let mut rng = StdRng::seed_from_u64(16);
    let mut x = low_rank_data(&mut rng, 16, 16, 2);
    let bad = 7;
    for i in 0..16 {
        x[(i, bad)] = normal(&mut rng) * 1.5 / 4.0;
    }
    let sol = lrr_solve(&x, &AlmParams::with_lambda(0.5)).unwrap();
    let energy: Vec<f64> = sol.e.column_norms().iter().map(|c| c * c).collect();
    let total: f64 = energy.iter().sum();
    assert!(energy[bad] / total >= 0.9, "{energy:?}");
}

#[test]
fn converged_solutions_are_feasible_and_beat_trivial_point() {
    let mut rng = StdRng::seed_from_u64(17);
    for case in 0..100 {
        let rows = rng.random_range(2..=12);
        let cols = rng.random_range(2..=12);
        let x = random_matrix(&mut rng, rows, cols).scale(rng.random::<f64>() + 0.05);
        let params = AlmParams::with_lambda(rng.random::<f64>() * 5.0 + 0.1);
        let sol = lrr_solve(&x, &params).unwrap();
        if sol.converged {
            assert!(sol.final_residual <= params.tol);
        }
        let trivial = params.lambda * x.l21_norm();
        let obj = sol.objective(params.lambda).unwrap();
        // the returned point satisfies the constraint only to `tol`
        let slack = 1e-4 * (1.0 + trivial);
        assert!(obj <= trivial + slack, "case {case}: {obj} > {trivial}");
    }
}

#[test]
fn smaller_lambda_separates_more_noise() {
    let mut rng = StdRng::seed_from_u64(18);
    let clean = low_rank_data(&mut rng, 16, 16, 3);
    let x = Matrix::from_fn(16, 16, |i, j| clean[(i, j)] + 0.1 * normal(&mut rng));
    let grid = [20.0, 10.0, 5.0, 3.0, 2.0, 1.0, 0.5, 0.3];
    let norms: Vec<f64> =
        grid.iter().map(|&l| lrr_solve(&x, &AlmParams::with_lambda(l)).unwrap().e.frobenius_norm()).collect();
    for w in norms.windows(2) {
        assert!(w[1] >= w[0] - 1e-6, "{norms:?}");
    }
}

#[test]
fn solver_is_deterministic() {
    let mut rng = StdRng::seed_from_u64(19);
    let x = random_matrix(&mut rng, 12, 12);
    let a = lrr_solve(&x, &AlmParams::with_lambda(2.0)).unwrap();
    let b = lrr_solve(&x, &AlmParams::with_lambda(2.0)).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svt_is_non_expansive(
        a in proptest::collection::vec(-2.0f64..2.0, 20),
        b in proptest::collection::vec(-2.0f64..2.0, 20),
        tau in 0.0f64..2.0,
    ) {
        let a = Matrix::new(4, 5, a).unwrap();
        let b = Matrix::new(4, 5, b).unwrap();
        let lhs = (&svt(&a, tau).unwrap() - &svt(&b, tau).unwrap()).frobenius_norm();
        let rhs = (&a - &b).frobenius_norm();
        prop_assert!(lhs <= rhs + 1e-12);
    }
}
