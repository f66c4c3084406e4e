//! Low-rank representation by the inexact augmented Lagrange multiplier method.
//!
//! Solves
//!
//! ```text
//! min ‖Z‖* + λ‖E‖₂,₁   subject to   X = X·Z + E
//! ```
//!
//! with the data matrix itself as the dictionary. The nuclear norm is split off
//! onto an auxiliary `J` with `Z = J`, so each iteration is a singular value
//! thresholding step for `J`, a linear solve for `Z` and a column shrinkage for
//! `E`, followed by the dual ascent and a geometric increase of the penalty.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Cholesky, Matrix};

/// Parameters of the inexact ALM iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlmParams {
    /// Weight of the column-sparse noise term.
    pub lambda: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub rho: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AlmParams {
    fn default() -> Self {
        AlmParams { lambda: 1.0, mu0: 1e-1, mu_max: 1e8, rho: 1.1, tol: 1e-6, max_iter: 500 }
    }
}

impl AlmParams {
    pub fn with_lambda(lambda: f64) -> Self {
        AlmParams { lambda, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.lambda, self.mu0, self.mu_max, self.rho, self.tol].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("ALM parameters must be finite"));
        }
        if self.lambda <= 0.0 {
            return Err(Error::InvalidParameter("lambda must be positive"));
        }
        if self.mu0 <= 0.0 || self.mu_max < self.mu0 {
            return Err(Error::InvalidParameter("need 0 < mu0 <= mu_max"));
        }
        if self.rho <= 1.0 {
            return Err(Error::InvalidParameter("rho must exceed 1"));
        }
        if self.tol <= 0.0 {
            return Err(Error::InvalidParameter("tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrrSolution {
    /// Coefficients, `cols x cols`.
    pub z: Matrix,
    /// Column-sparse noise, same shape as the input.
    pub e: Matrix,
    pub iterations: usize,
    pub converged: bool,
    /// `‖X − XZ − E‖∞` at exit.
    pub final_residual: f64,
}

impl LrrSolution {
    fn zero(rows: usize, cols: usize) -> Self {
        LrrSolution {
            z: Matrix::zeros(cols, cols),
            e: Matrix::zeros(rows, cols),
            iterations: 0,
            converged: true,
            final_residual: 0.0,
        }
    }

    /// `‖Z‖* + λ‖E‖₂,₁`
    pub fn objective(&self, lambda: f64) -> Result<f64> {
        Ok(nuclear_norm(&self.z)? + lambda * self.e.l21_norm())
    }
}

/// Singular value thresholding: `U · max(Σ − τ, 0) · Vᵀ`.
pub fn svt(m: &Matrix, tau: f64) -> Result<Matrix> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter("threshold must be non-negative"));
    }
    let d = linalg::svd(m)?;
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for (k, &sigma) in d.s.iter().enumerate() {
        let shrunk = sigma - tau;
        if shrunk <= 0.0 {
            // singular values are sorted
            break;
        }
        for i in 0..m.rows() {
            let ui = d.u[(i, k)] * shrunk;
            if ui == 0.0 {
                continue;
            }
            for j in 0..m.cols() {
                out[(i, j)] += ui * d.v[(j, k)];
            }
        }
    }
    Ok(out)
}

/// Proximal operator of `τ‖·‖₂,₁`: each column is shrunk toward zero by `τ`
/// in Euclidean norm.
pub fn l21_shrink(m: &Matrix, tau: f64) -> Matrix {
    let norms = m.column_norms();
    let scales: Vec<f64> = norms.iter().map(|&c| if c > tau { (c - tau) / c } else { 0.0 }).collect();
    Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] * scales[j])
}

/// Sum of singular values.
pub fn nuclear_norm(m: &Matrix) -> Result<f64> {
    Ok(linalg::singular_values(m)?.iter().sum())
}

/// Runs inexact ALM on `X = XZ + E`.
///
/// Non-convergence within `max_iter` is reported through
/// [`LrrSolution::converged`], not as an error.
pub fn lrr_solve(x: &Matrix, params: &AlmParams) -> Result<LrrSolution> {
    params.validate()?;
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::InvalidDimensions { width: x.cols(), height: x.rows() });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite);
    }
    let (m, n) = (x.rows(), x.cols());
    // flat patch: the zero solution is feasible and optimal
    if x.max_abs() < 1e-12 {
        return Ok(LrrSolution::zero(m, n));
    }

    let xtx = x.t_matmul(x);
    let chol = Cholesky::new(&(&xtx + &Matrix::identity(n)))?;

    let mut z = Matrix::zeros(n, n);
    let mut j;
    let mut e = Matrix::zeros(m, n);
    let mut y1 = Matrix::zeros(m, n);
    let mut y2 = Matrix::zeros(n, n);
    let mut mu = params.mu0;

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while iterations < params.max_iter {
        iterations += 1;
        let inv_mu = 1.0 / mu;

        j = svt(&z.add_scaled(&y2, inv_mu), inv_mu)?;

        // (XᵀX + I) Z = Xᵀ(X − E + Y1/μ) + J − Y2/μ
        let rhs_x = x.add_scaled(&e, -1.0).add_scaled(&y1, inv_mu);
        let rhs = x.t_matmul(&rhs_x).add_scaled(&j, 1.0).add_scaled(&y2, -inv_mu);
        z = chol.solve(&rhs);

        let x_minus_xz = x.add_scaled(&x.matmul(&z), -1.0);
        e = l21_shrink(&x_minus_xz.add_scaled(&y1, inv_mu), params.lambda * inv_mu);

        let leq1 = x_minus_xz.add_scaled(&e, -1.0);
        let leq2 = z.add_scaled(&j, -1.0);
        residual = leq1.max_abs();
        let stop = residual.max(leq2.max_abs());
        if !stop.is_finite() {
            return Err(Error::NonFinite);
        }
        if stop <= params.tol {
            converged = true;
            break;
        }
        y1 = y1.add_scaled(&leq1, mu);
        y2 = y2.add_scaled(&leq2, mu);
        mu = (params.rho * mu).min(params.mu_max);
    }

    Ok(LrrSolution { z, e, iterations, converged, final_residual: residual })
}
