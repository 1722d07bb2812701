//! Complex and detailed balance.

use serde::{Deserialize, Serialize};

use crate::error::{CrnError, Result};
use crate::linalg::{self, Matrix};
use crate::network::{MassActionSystem, SubspaceBasis};

/// Default tolerance on the log-space residual.
pub const BALANCE_TOL: f64 = 1e-9;
/// Relative tolerance when re-checking the balance equations at a witness.
pub const VERIFY_TOL: f64 = 1e-8;

/// One tree constant per vertex, grouped by linkage class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConstants {
    pub values: Vec<f64>,
    pub classes: Vec<Vec<usize>>,
}

impl TreeConstants {
    pub fn get(&self, vertex: usize) -> f64 {
        self.values[vertex]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceResult {
    pub balanced: bool,
    pub witness: Option<Vec<f64>>,
    /// ∞-norm of the log-linear residual; infinite when the test fails structurally.
    pub residual: f64,
}

impl BalanceResult {
    fn rejected() -> Self {
        Self {
            balanced: false,
            witness: None,
            residual: f64::INFINITY,
        }
    }
}

/// Matrix-Tree constants: `K_i` is the `(i, i)` cofactor of the class Laplacian
/// `diag(out-rates) − (κ_ij)`.
pub fn tree_constants(sys: &MassActionSystem) -> Result<TreeConstants> {
    let g = sys.network();
    let classes = g.linkage_classes();
    let scc = g.scc_labels();
    let mut values = vec![0.0; g.num_vertices()];
    for class in &classes {
        if class.iter().any(|&v| scc[v] != scc[class[0]]) {
            return Err(CrnError::TreeConstantsUndefined { class: class.clone() });
        }
        let m = class.len();
        let local = |v: usize| class.iter().position(|&c| c == v);
        let mut lap = Matrix::zeros(m, m);
        for (k, &(i, j)) in g.edges().iter().enumerate() {
            if let (Some(a), Some(b)) = (local(i), local(j)) {
                let rate = sys.rates()[k];
                lap[(a, a)] += rate;
                lap[(a, b)] -= rate;
            }
        }
        for (a, &v) in class.iter().enumerate() {
            values[v] = if m == 1 {
                1.0
            } else {
                linalg::determinant(&lap.clone().remove_row(a).remove_column(a))
            };
        }
    }
    Ok(TreeConstants { values, classes })
}

/// Largest per-vertex relative imbalance of outflow and inflow at `x`.
pub fn complex_balance_residual(sys: &MassActionSystem, x: &[f64]) -> Result<f64> {
    let g = sys.network();
    let mono = g
        .vertices()
        .iter()
        .map(|y| linalg::monomial_eval(x, y))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![0.0; g.num_vertices()];
    let mut inflow = vec![0.0; g.num_vertices()];
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        let flux = sys.rates()[k] * mono[i];
        out[i] += flux;
        inflow[j] += flux;
    }
    Ok(out
        .iter()
        .zip(&inflow)
        .map(|(&o, &n)| {
            let big = o.max(n);
            if big == 0.0 {
                0.0
            } else {
                (o - n).abs() / big
            }
        })
        .fold(0.0, f64::max))
}

/// Largest per-edge relative mismatch `|κ_ij x^{y_i} − κ_ji x^{y_j}|`; infinite
/// when some edge has no reverse.
pub fn detailed_balance_residual(sys: &MassActionSystem, x: &[f64]) -> Result<f64> {
    let g = sys.network();
    let mut worst = 0.0_f64;
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        let Some(back) = g.edge_index(j, i) else {
            return Ok(f64::INFINITY);
        };
        let fwd = sys.rates()[k] * linalg::monomial_eval(x, g.vertex(i))?;
        let rev = sys.rates()[back] * linalg::monomial_eval(x, g.vertex(j))?;
        worst = worst.max((fwd - rev).abs() / fwd.max(rev));
    }
    Ok(worst)
}

fn solve_log_system(rows: Vec<Vec<f64>>, rhs: Vec<f64>, n: usize) -> Result<(Vec<f64>, f64)> {
    if rows.is_empty() {
        return Ok((vec![0.0; n], 0.0));
    }
    let a = linalg::from_rows(&rows, n);
    let (z, _) = linalg::least_squares(&a, &rhs)?;
    let fit = linalg::mat_vec(&a, &z);
    Ok((z, linalg::norm_inf(&linalg::sub(&fit, &rhs))))
}

pub fn is_complex_balanced(sys: &MassActionSystem, tol: f64) -> Result<BalanceResult> {
    let g = sys.network();
    if !g.is_weakly_reversible() {
        return Ok(BalanceResult::rejected());
    }
    let k = tree_constants(sys)?;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for class in &k.classes {
        let r = class[0];
        for &i in &class[1..] {
            rows.push(linalg::sub(g.vertex(i), g.vertex(r)));
            rhs.push(k.get(i).ln() - k.get(r).ln());
        }
    }
    let (z, residual) = solve_log_system(rows, rhs, g.dimension())?;
    let x = linalg::exp_vec(&z);
    let balanced = residual <= tol && complex_balance_residual(sys, &x)? <= VERIFY_TOL;
    Ok(BalanceResult {
        balanced,
        witness: balanced.then_some(x),
        residual,
    })
}

pub fn is_detailed_balanced(sys: &MassActionSystem, tol: f64) -> Result<BalanceResult> {
    let g = sys.network();
    if !g.is_reversible() {
        return Ok(BalanceResult::rejected());
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        if i < j {
            let back = g.edge_index(j, i).expect("reversible network");
            rows.push(linalg::sub(g.vertex(j), g.vertex(i)));
            rhs.push((sys.rates()[e] / sys.rates()[back]).ln());
        }
    }
    let (z, residual) = solve_log_system(rows, rhs, g.dimension())?;
    let x = linalg::exp_vec(&z);
    let balanced = residual <= tol && detailed_balance_residual(sys, &x)? <= VERIFY_TOL;
    Ok(BalanceResult {
        balanced,
        witness: balanced.then_some(x),
        residual,
    })
}

/// The complex-balanced steady states are `x* ∘ exp(u)` for `u` in the
/// returned basis of `S⊥`.
pub fn complex_balanced_steady_state_set(
    sys: &MassActionSystem,
    witness: &[f64],
) -> Result<(Vec<f64>, SubspaceBasis)> {
    if complex_balance_residual(sys, witness)? > VERIFY_TOL {
        return Err(CrnError::NotBalanced);
    }
    Ok((witness.to_vec(), sys.network().conservation_laws()))
}

/// `Σ_i x_i (ln x_i − ln x*_i − 1) + x*_i`.
pub fn lyapunov_value(x: &[f64], x_star: &[f64]) -> Result<f64> {
    if x.len() != x_star.len() {
        return Err(CrnError::DimensionMismatch {
            expected: x_star.len(),
            found: x.len(),
        });
    }
    if x.iter().chain(x_star).any(|&v| !(v > 0.0)) {
        return Err(CrnError::Domain("arguments must be strictly positive".into()));
    }
    Ok(x
        .iter()
        .zip(x_star)
        .map(|(&a, &b)| a * (a.ln() - b.ln() - 1.0) + b)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    #[test]
    fn two_cycle_constants() {
        let sys = MassActionSystem::from_parts(1, vec![vec![0.0], vec![1.0]], &[(0, 1, 2.0), (1, 0, 5.0)]).unwrap();
        let k = tree_constants(&sys).unwrap();
        assert_eq!(k.values, vec![5.0, 2.0]);
    }

    #[test]
    fn line_graph_constants() {
        let sys = fixtures::system("k3_line");
        let k = tree_constants(&sys).unwrap();
        for v in &k.values {
            assert_relative_eq!(*v, 3.0, max_relative = 1e-12);
        }
        let doubled = sys.with_rates(sys.rates().iter().map(|r| 2.0 * r).collect()).unwrap();
        let k2 = tree_constants(&doubled).unwrap();
        for (a, b) in k.values.iter().zip(&k2.values) {
            assert_relative_eq!(4.0 * a, *b, max_relative = 1e-12);
        }
    }

    #[test]
    fn undefined_for_non_weakly_reversible() {
        assert!(matches!(
            tree_constants(&fixtures::system("fig1")),
            Err(CrnError::TreeConstantsUndefined { .. })
        ));
        let r = is_complex_balanced(&fixtures::system("fig1"), BALANCE_TOL).unwrap();
        assert!(!r.balanced && r.witness.is_none());
    }

    #[test]
    fn line_graph_balance() {
        let sys = fixtures::system("k3_line");
        let r = is_complex_balanced(&sys, BALANCE_TOL).unwrap();
        assert!(r.balanced);
        assert_relative_eq!(r.witness.unwrap()[0], 1.0, max_relative = 1e-12);
        let mut rates = sys.rates().to_vec();
        rates[0] = 3.0;
        let off = is_complex_balanced(&sys.with_rates(rates).unwrap(), BALANCE_TOL).unwrap();
        assert!(!off.balanced && off.residual > 1e-3);
    }

    #[test]
    fn fig2b_detailed() {
        let r = is_detailed_balanced(&fixtures::system("fig2b"), BALANCE_TOL).unwrap();
        assert!(r.balanced);
        let x = r.witness.unwrap();
        assert!(detailed_balance_residual(&fixtures::system("fig2b"), &x).unwrap() < 1e-12);
        assert!(!is_detailed_balanced(&fixtures::system("fig1"), BALANCE_TOL).unwrap().balanced);
    }

    #[test]
    fn steady_state_set() {
        let sys = MassActionSystem::from_parts(2, vec![vec![0.0, 0.0], vec![1.0, 0.0]], &[(0, 1, 1.0), (1, 0, 3.0)]).unwrap();
        let r = is_complex_balanced(&sys, BALANCE_TOL).unwrap();
        let (x, perp) = complex_balanced_steady_state_set(&sys, r.witness.as_ref().unwrap()).unwrap();
        assert_eq!(perp.dim(), 1);
        for t in [-2.0, 0.5, 3.0] {
            let u: Vec<f64> = perp.vectors[0].iter().map(|v| t * v).collect();
            let p: Vec<f64> = x.iter().zip(linalg::exp_vec(&u)).map(|(a, b)| a * b).collect();
            assert!(complex_balance_residual(&sys, &p).unwrap() < 1e-12);
        }
        assert!(complex_balanced_steady_state_set(&sys, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn lyapunov() {
        assert_eq!(lyapunov_value(&[2.0, 3.0], &[2.0, 3.0]).unwrap(), 0.0);
        assert_relative_eq!(lyapunov_value(&[std::f64::consts::E, 1.0], &[1.0, 1.0]).unwrap(), 1.0, max_relative = 1e-14);
        assert!(lyapunov_value(&[0.0, 1.0], &[1.0, 1.0]).is_err());
    }
}
