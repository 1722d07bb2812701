//! Phase-I simplex for `A v = b, v ≥ 0`.
//!
//! Dense tableau, Bland's rule for both entering and leaving variables. Rows are
//! scaled to unit ∞-norm before solving; the witness is re-solved on the final
//! basis and checked against the unscaled constraints.

use serde::{Deserialize, Serialize};

use super::{least_squares, norm_inf, Matrix};
use crate::error::{CrnError, Result};

/// Relative feasibility tolerance on `‖A v − b‖∞ / (1 + ‖b‖∞)`.
pub const FEAS_TOL: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFeasibilityProblem {
    a: Matrix,
    b: Vec<f64>,
}

impl LinearFeasibilityProblem {
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(CrnError::DimensionMismatch {
                expected: a.nrows(),
                found: b.len(),
            });
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(CrnError::Domain("non-finite LP coefficient".into()));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn num_vars(&self) -> usize {
        self.a.ncols()
    }

    /// `‖A v − b‖∞` in the original (unscaled) coordinates.
    pub fn residual(&self, v: &[f64]) -> f64 {
        let av = super::mat_vec(&self.a, v);
        av.iter()
            .zip(&self.b)
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    fn tolerance(&self) -> f64 {
        FEAS_TOL * (1.0 + norm_inf(&self.b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityOutcome {
    pub status: FeasibilityStatus,
    pub witness: Option<Vec<f64>>,
    pub max_residual: f64,
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    /// Phase-I reduced costs, one per column (structural then artificial).
    cost: Vec<f64>,
    basis: Vec<usize>,
    structural: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        *self.t[i].last().unwrap()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.t[row].len();
        let p = self.t[row][col];
        for k in 0..width {
            self.t[row][k] /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for k in 0..width {
                    r[k] -= f * pivot_row[k];
                }
                r[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for k in 0..self.cost.len() {
                self.cost[k] -= f * pivot_row[k];
            }
            self.cost[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Runs Bland's rule until optimal. Artificial columns never re-enter.
    fn optimize(&mut self) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..self.structural).find(|&j| self.cost[j] < -PIVOT_EPS);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][col];
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => {
                    return Err(CrnError::Numerical(
                        "phase-I simplex reported an unbounded direction".into(),
                    ))
                }
            }
        }
        Err(CrnError::Numerical("simplex pivot limit exceeded".into()))
    }
}

/// Decides feasibility of `A v = b, v ≥ 0`.
pub fn lp_feasible(problem: &LinearFeasibilityProblem) -> Result<FeasibilityOutcome> {
    let n = problem.num_vars();
    let tol = problem.tolerance();

    // Row scaling; all-zero rows are checked directly and dropped.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (i, row) in problem.a.row_iter().enumerate() {
        let coeffs: Vec<f64> = row.iter().copied().collect();
        let scale = norm_inf(&coeffs);
        let bi = problem.b[i];
        if scale == 0.0 {
            if bi.abs() > tol {
                return Ok(FeasibilityOutcome {
                    status: FeasibilityStatus::Infeasible,
                    witness: None,
                    max_residual: bi.abs(),
                });
            }
            continue;
        }
        let sign = if bi < 0.0 { -1.0 } else { 1.0 };
        rows.push(coeffs.iter().map(|v| sign * v / scale).collect());
        rhs.push(sign * bi / scale);
    }
    let m = rows.len();
    if m == 0 {
        return Ok(FeasibilityOutcome {
            status: FeasibilityStatus::Feasible,
            witness: Some(vec![0.0; n]),
            max_residual: 0.0,
        });
    }

    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        t[i][..n].copy_from_slice(&rows[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = rhs[i];
    }
    let mut cost = vec![0.0; width];
    for j in 0..n {
        cost[j] = -rows.iter().map(|r| r[j]).sum::<f64>();
    }
    cost[width - 1] = -rhs.iter().sum::<f64>();
    let mut tab = Tableau {
        t,
        cost,
        basis: (n..n + m).collect(),
        structural: n,
    };
    tab.optimize()?;

    let mut v = vec![0.0; n];
    for (i, &bj) in tab.basis.iter().enumerate() {
        if bj < n {
            v[bj] = tab.rhs(i).max(0.0);
        }
    }
    let phase_one: f64 = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &bj)| bj >= n)
        .map(|(i, _)| tab.rhs(i).max(0.0))
        .sum();
    let scaled_tol = FEAS_TOL * (1.0 + norm_inf(&rhs));
    if phase_one > scaled_tol {
        return Ok(FeasibilityOutcome {
            status: FeasibilityStatus::Infeasible,
            witness: None,
            max_residual: problem.residual(&v),
        });
    }

    // Re-solve on the basic structural columns to shed accumulated pivot error.
    let basic: Vec<usize> = tab.basis.iter().copied().filter(|&j| j < n).collect();
    let mut best_res = problem.residual(&v);
    if !basic.is_empty() && best_res > 0.0 {
        let sub = Matrix::from_fn(problem.a.nrows(), basic.len(), |i, k| problem.a[(i, basic[k])]);
        if let Ok((z, _)) = least_squares(&sub, &problem.b) {
            let scale = 1.0 + norm_inf(&z);
            if z.iter().all(|&x| x >= -1e-12 * scale) {
                let mut refined = vec![0.0; n];
                for (k, &j) in basic.iter().enumerate() {
                    refined[j] = z[k].max(0.0);
                }
                let res = problem.residual(&refined);
                if res < best_res {
                    v = refined;
                    best_res = res;
                }
            }
        }
    }
    if best_res > tol {
        return Err(CrnError::Numerical(format!(
            "simplex witness residual {best_res:.3e} exceeds tolerance {tol:.3e}"
        )));
    }
    Ok(FeasibilityOutcome {
        status: FeasibilityStatus::Feasible,
        witness: Some(v),
        max_residual: best_res,
    })
}
