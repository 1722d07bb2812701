//! Dense numeric kernel: component-wise exp/log/power operations, SVD-based
//! nullspaces and least squares, and a phase-I simplex feasibility solver.
//!
//! Matrices are `nalgebra::DMatrix<f64>`; vectors crossing the public API are
//! plain slices so that network coordinates can be passed without copying.

mod simplex;

pub use simplex::{lp_feasible, FeasibilityOutcome, FeasibilityStatus, LinearFeasibilityProblem};

use nalgebra::{DMatrix, DVector};

use crate::error::{CrnError, Result};

pub type Matrix = DMatrix<f64>;

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_TOL: f64 = 1e-10;

fn check_positive(x: &[f64], what: &str) -> Result<()> {
    match x.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        Some(i) => Err(CrnError::Domain(format!(
            "{what}: component {i} = {} is not a finite positive number",
            x[i]
        ))),
        None => Ok(()),
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(CrnError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Generalized monomial `∏ x_i^{y_i}` for positive `x`.
pub fn monomial_eval(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x.len(), y.len())?;
    check_positive(x, "monomial base")?;
    Ok(monomial_unchecked(x, y))
}

/// Caller guarantees `x > 0` and equal lengths.
#[inline]
pub(crate) fn monomial_unchecked(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .filter(|(_, &e)| e != 0.0)
        .map(|(&b, &e)| if e == 1.0 { b } else { b.powf(e) })
        .product()
}

/// `x^M`: component `k` is the monomial of `x` with exponent column `k` of `m`.
///
/// `m` may be rectangular (`n × k`), which is how the source-exponent matrix of
/// a network is evaluated.
pub fn matrix_power_eval(x: &[f64], m: &Matrix) -> Result<Vec<f64>> {
    check_len(m.nrows(), x.len())?;
    check_positive(x, "matrix power base")?;
    let logs = log_unchecked(x);
    Ok(m
        .column_iter()
        .map(|col| col.iter().zip(&logs).map(|(e, l)| e * l).sum::<f64>().exp())
        .collect())
}

pub fn log_vec(x: &[f64]) -> Result<Vec<f64>> {
    check_positive(x, "logarithm argument")?;
    Ok(log_unchecked(x))
}

fn log_unchecked(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.ln()).collect()
}

pub fn exp_vec(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| v.exp()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

/// Builds a matrix from row vectors. All rows must share the length `cols`.
pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Matrix {
    Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Builds a matrix whose columns are the given vectors of length `rows`.
pub fn from_columns(cols: &[Vec<f64>], rows: usize) -> Matrix {
    Matrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

fn cutoff(singular_values: &DVector<f64>) -> f64 {
    RANK_TOL * singular_values.iter().fold(0.0_f64, |m, &s| m.max(s))
}

/// Orthonormal basis of `ker(m)`. Returns an empty list for a trivial kernel.
pub fn nullspace(m: &Matrix) -> Vec<Vec<f64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    if m.nrows() == 0 || m.iter().all(|&v| v == 0.0) {
        return identity_basis(n);
    }
    // Zero-pad to at least square so the SVD exposes a full right basis.
    let padded = if m.nrows() < n {
        let mut p = Matrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let tol = cutoff(&svd.singular_values);
    let mut basis = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            basis.push(v_t.row(k).iter().copied().collect());
        }
    }
    basis
}

/// Orthonormal basis of the column space of `m`.
pub fn column_space(m: &Matrix) -> Vec<Vec<f64>> {
    if m.ncols() == 0 || m.nrows() == 0 || m.iter().all(|&v| v == 0.0) {
        return Vec::new();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let tol = cutoff(&svd.singular_values);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol)
        .map(|(k, _)| u.column(k).iter().copied().collect())
        .collect()
}

pub fn rank(m: &Matrix) -> usize {
    column_space(m).len()
}

fn identity_basis(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect()
}

/// Minimum-norm least-squares solution of `a z ≈ b` and the residual `‖a z − b‖₂`.
pub fn least_squares(a: &Matrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    check_len(a.nrows(), b.len())?;
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 || a.iter().all(|&v| v == 0.0) {
        return Ok((vec![0.0; n], norm2(b)));
    }
    let svd = a.clone().svd(true, true);
    let tol = cutoff(&svd.singular_values);
    let rhs = DVector::from_column_slice(b);
    let z = svd
        .solve(&rhs, tol)
        .map_err(|e| CrnError::Numerical(e.to_string()))?;
    let residual = (a * &z - rhs).norm();
    Ok((z.as_slice().to_vec(), residual))
}

pub fn determinant(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

pub fn inverse(m: &Matrix) -> Option<Matrix> {
    m.clone().try_inverse()
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &Matrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    let min = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, LN_2};

    #[test]
    fn monomial_examples() {
        assert_eq!(monomial_eval(&[2.0, 3.0], &[3.0, 2.0]).unwrap(), 72.0);
        assert_eq!(monomial_eval(&[5.0, 7.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert_relative_eq!(monomial_eval(&[2.0, 4.0], &[-1.0, 0.5]).unwrap(), 1.0);
        assert!(matches!(
            monomial_eval(&[0.0, 1.0], &[1.0, 1.0]),
            Err(CrnError::Domain(_))
        ));
        assert!(monomial_eval(&[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn matrix_power_examples() {
        let id = Matrix::identity(2, 2);
        let r = matrix_power_eval(&[E, 1.0], &id).unwrap();
        assert_relative_eq!(r[0], E, max_relative = 1e-15);
        assert_relative_eq!(r[1], 1.0);

        // columns (1,1) and (0,2)
        let m = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 2.0]);
        let r = matrix_power_eval(&[2.0, 3.0], &m).unwrap();
        assert_relative_eq!(r[0], 6.0, max_relative = 1e-14);
        assert_relative_eq!(r[1], 9.0, max_relative = 1e-14);

        let r = matrix_power_eval(&[0.3, 17.0], &Matrix::zeros(2, 2)).unwrap();
        assert_eq!(r, vec![1.0, 1.0]);

        assert!(matrix_power_eval(&[1.0, 2.0, 3.0], &id).is_err());
    }

    #[test]
    fn log_exp() {
        assert_eq!(log_vec(&[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        let e = exp_vec(&[0.0, LN_2]);
        assert_eq!(e[0], 1.0);
        assert_relative_eq!(e[1], 2.0, max_relative = 1e-15);
        let r = exp_vec(&log_vec(&[2.0, 3.0]).unwrap());
        assert_relative_eq!(r[0], 2.0, max_relative = 1e-15);
        assert_relative_eq!(r[1], 3.0, max_relative = 1e-15);
        assert!(log_vec(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn nullspace_examples() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let ns = nullspace(&m);
        assert_eq!(ns.len(), 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(ns[0][0].abs(), s, max_relative = 1e-12);
        assert_relative_eq!(ns[0][0], -ns[0][1], max_relative = 1e-12);

        assert!(nullspace(&Matrix::identity(3, 3)).is_empty());

        let m = Matrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let ns = nullspace(&m);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((v[0] + 2.0 * v[1] + 3.0 * v[2]).abs() <= 1e-12);
            assert_relative_eq!(norm2(v), 1.0, max_relative = 1e-12);
        }
        assert!(dot(&ns[0], &ns[1]).abs() < 1e-12);
    }

    #[test]
    fn least_squares_examples() {
        let (z, r) = least_squares(&Matrix::identity(2, 2), &[3.0, 4.0]).unwrap();
        assert_relative_eq!(z[0], 3.0);
        assert_relative_eq!(z[1], 4.0);
        assert!(r < 1e-14);

        let a = Matrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let (z, r) = least_squares(&a, &[0.0, 2.0]).unwrap();
        assert_relative_eq!(z[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(r, 2f64.sqrt(), max_relative = 1e-14);

        // A = [[1,1],[1,1]], b = (1,3): pseudoinverse A⁺ = A/4, so
        // A⁺b = (1,1)·(1+3)/4 = (1,1); residual ‖(2,2)−(1,3)‖ = √2.
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (z, r) = least_squares(&a, &[1.0, 3.0]).unwrap();
        assert_relative_eq!(z[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(z[1], 1.0, max_relative = 1e-12);
        assert_relative_eq!(r, 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn column_space_and_rank() {
        let m = Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(rank(&m), 1);
        assert_eq!(rank(&Matrix::identity(3, 3)), 3);
        assert_eq!(rank(&Matrix::zeros(2, 2)), 0);
    }
}
