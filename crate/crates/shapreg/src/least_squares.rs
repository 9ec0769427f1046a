//! Numerical kernel: column standardization, zero-intercept least squares,
//! intercept OLS, and the R² utility behind the coalition sweep.
//!
//! Matrices here are tiny (a few dozen rows, at most a couple dozen
//! columns), so the solver favors accuracy: normal equations with a
//! Cholesky factorization first, falling back to an orthogonal
//! decomposition whenever the factorization fails, the condition estimate
//! blows past 1e12, or the normal-equation residual is not orthogonal
//! enough. The fallback is a one-sided Jacobi orthogonalization rather
//! than a bidiagonalization SVD: Jacobi decouples exactly collinear
//! columns exactly, which keeps singular coalitions well-defined (their
//! R² is unique even when the coefficients are not) and returns the
//! minimum-norm solution.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::is_constant;

/// Condition-estimate threshold that routes a fit to the orthogonal path.
const CONDITION_LIMIT: f64 = 1e12;

/// Per-column centering/scaling constants. Scale is the population
/// standard deviation (divisor m), matching the usual scaler default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

/// Least-squares fit output. `intercept` is 0 for zero-intercept fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_sum_squares: f64,
    pub fitted: Vec<f64>,
}

/// Standardizes each column to mean 0 and population standard deviation 1.
pub fn standardize(columns: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, StandardizationParams)> {
    let mut out = Vec::with_capacity(columns.len());
    let mut means = Vec::with_capacity(columns.len());
    let mut scales = Vec::with_capacity(columns.len());
    for (i, column) in columns.iter().enumerate() {
        if is_constant(column) {
            return Err(Error::ConstantColumn {
                column: format!("column {i}"),
            });
        }
        let m = column.len() as f64;
        let mean = column.iter().sum::<f64>() / m;
        let variance = column.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m;
        let scale = variance.sqrt();
        if scale == 0.0 {
            return Err(Error::ConstantColumn {
                column: format!("column {i}"),
            });
        }
        out.push(column.iter().map(|x| (x - mean) / scale).collect());
        means.push(mean);
        scales.push(scale);
    }
    Ok((out, StandardizationParams { means, scales }))
}

/// Convenience wrapper for standardizing a single vector.
pub fn standardize_vector(values: &[f64]) -> Result<Vec<f64>> {
    let column = [values.to_vec()];
    let (mut cols, _) = standardize(&column)?;
    Ok(cols.pop().unwrap())
}

fn column_matrix(columns: &[Vec<f64>], rows: usize) -> Result<DMatrix<f64>> {
    for column in columns {
        if column.len() != rows {
            return Err(Error::DimensionMismatch {
                left: column.len(),
                right: rows,
            });
        }
    }
    Ok(DMatrix::from_fn(rows, columns.len(), |r, c| columns[c][r]))
}

struct LsSolution {
    beta: DVector<f64>,
    rank_deficient: bool,
}

/// Hybrid least-squares solve, minimum-norm on the orthogonal path.
fn solve_ls(x: &DMatrix<f64>, y: &DVector<f64>) -> LsSolution {
    let k = x.ncols();
    if k == 0 {
        return LsSolution {
            beta: DVector::zeros(0),
            rank_deficient: false,
        };
    }

    let gram = x.transpose() * x;
    let rhs = x.transpose() * y;

    if let Some(chol) = gram.clone().cholesky() {
        let diag = chol.l().diagonal();
        let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
        for d in diag.iter() {
            dmin = dmin.min(*d);
            dmax = dmax.max(*d);
        }
        let cond_estimate = (dmax / dmin).powi(2);
        if cond_estimate.is_finite() && cond_estimate <= CONDITION_LIMIT {
            let beta = chol.solve(&rhs);
            // Accept only if the normal-equation residual is orthogonal to
            // working precision; slightly-off solutions would surface as
            // spurious negative R² marginals downstream.
            let gradient = x.transpose() * (y - x * &beta);
            let scale = rhs.amax().max(1.0);
            if gradient.amax() <= 1e-11 * scale {
                return LsSolution {
                    beta,
                    rank_deficient: false,
                };
            }
        }
    }

    let (beta, rank) = jacobi_least_squares(x, y);
    LsSolution {
        beta,
        rank_deficient: rank < k,
    }
}

/// One-sided Jacobi orthogonalization: rotates column pairs of a working
/// copy W = X·V until all pairs are mutually orthogonal (relative inner
/// product below 1e-14). Column norms of W are then the singular values
/// and V collects the rotations. Exactly collinear pairs cancel exactly,
/// leaving true zero columns.
fn jacobi_orthogonalize(x: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (m, k) = x.shape();
    let mut w = x.clone();
    let mut v = DMatrix::identity(k, k);
    const ORTHO_TOL: f64 = 1e-14;
    const MAX_SWEEPS: usize = 40;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for r in 0..m {
                    let (a, b) = (w[(r, p)], w[(r, q)]);
                    alpha += a * a;
                    beta += b * b;
                    gamma += a * b;
                }
                if gamma == 0.0 || gamma.abs() <= ORTHO_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..m {
                    let (a, b) = (w[(r, p)], w[(r, q)]);
                    w[(r, p)] = c * a - s * b;
                    w[(r, q)] = s * a + c * b;
                }
                for r in 0..k {
                    let (a, b) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = c * a - s * b;
                    v[(r, q)] = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

/// Minimum-norm least squares via Jacobi orthogonalization. Directions
/// with singular value at or below max(m,k)·ε·σ_max are treated as null
/// space and excluded, which is what makes the solution minimum-norm.
fn jacobi_least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, usize) {
    let (m, k) = x.shape();
    let (w, v) = jacobi_orthogonalize(x);
    let norms: Vec<f64> = (0..k).map(|j| w.column(j).norm()).collect();
    let sigma_max = norms.iter().fold(0.0f64, |acc, n| acc.max(*n));
    let cutoff = sigma_max * f64::EPSILON * m.max(k) as f64;
    let mut beta = DVector::zeros(k);
    let mut rank = 0;
    for (j, norm) in norms.iter().enumerate() {
        if *norm > cutoff {
            rank += 1;
            // w_j = σ_j·u_j, so (u_j·y)/σ_j = (w_j·y)/σ_j².
            let coefficient = w.column(j).dot(y) / (norm * norm);
            beta += v.column(j) * coefficient;
        }
    }
    (beta, rank)
}

/// Least squares without a constant term: minimizes ‖y − Xβ‖².
///
/// On standardized data the returned R² = 1 − SS_res/Σy² coincides with
/// the centered definition (standardized y has zero mean) and lies in
/// [0, 1]. Exactly collinear columns resolve to the minimum-norm β.
pub fn fit_zero_intercept(columns: &[Vec<f64>], y: &[f64]) -> Result<FitResult> {
    let m = y.len();
    let x = column_matrix(columns, m)?;
    let yv = DVector::from_column_slice(y);
    let solution = solve_ls(&x, &yv);
    let fitted = &x * &solution.beta;
    let residual_sum_squares = (&yv - &fitted).norm_squared();
    let ss_tot = yv.norm_squared();
    let r_squared = if ss_tot > 0.0 {
        1.0 - residual_sum_squares / ss_tot
    } else {
        0.0
    };
    Ok(FitResult {
        coefficients: solution.beta.iter().copied().collect(),
        intercept: 0.0,
        r_squared,
        residual_sum_squares,
        fitted: fitted.iter().copied().collect(),
    })
}

/// Ordinary least squares with a constant term, on raw (unstandardized)
/// data. Exact collinearity among the regressors plus the constant is an
/// error. When y is constant (SS_tot = 0), R² is reported as 0.
pub fn fit_with_intercept(columns: &[Vec<f64>], y: &[f64]) -> Result<FitResult> {
    let m = y.len();
    let x = column_matrix(columns, m)?;
    let augmented = {
        let mut a = DMatrix::from_element(m, x.ncols() + 1, 1.0);
        a.columns_mut(1, x.ncols()).copy_from(&x);
        a
    };
    let yv = DVector::from_column_slice(y);
    let solution = solve_ls(&augmented, &yv);
    if solution.rank_deficient {
        return Err(Error::SingularSystem);
    }
    let fitted = &augmented * &solution.beta;
    let residual_sum_squares = (&yv - &fitted).norm_squared();
    let mean = yv.sum() / m as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - residual_sum_squares / ss_tot
    } else {
        0.0
    };
    Ok(FitResult {
        coefficients: solution.beta.iter().skip(1).copied().collect(),
        intercept: solution.beta[0],
        r_squared,
        residual_sum_squares,
        fitted: fitted.iter().copied().collect(),
    })
}
