//! Mass-action vector field, steady-state search and trajectory tools.

mod cycles;
mod export;
mod integrate;

pub use cycles::{detect_limit_cycle, LimitCycleOptions, LimitCycleReport, LimitCycleVerdict};
pub use export::{portrait_svg, trajectory_csv, vector_field_csv, vector_field_grid, FieldSample};
pub use integrate::{integrate, IntegrateOptions, Trajectory, TrajectoryStatus};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CrnError, Result};
use crate::linalg::{self, Matrix};
use crate::network::MassActionSystem;

/// `F(x) = Σ_k κ_k x^{y_{i_k}} (y_{j_k} − y_{i_k})`.
pub fn rhs_eval(sys: &MassActionSystem, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != sys.dimension() {
        return Err(CrnError::DimensionMismatch {
            expected: sys.dimension(),
            found: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|&v| !(v > 0.0)) {
        return Err(CrnError::Domain(format!("state component {i} = {} is not positive", x[i])));
    }
    Ok(VectorField::new(sys).eval(x))
}

/// Precomputed edge data for repeated evaluation of `F` and its log-Jacobian.
#[derive(Debug, Clone)]
pub(crate) struct VectorField {
    n: usize,
    /// Per source vertex: exponent and the rate-weighted net vector `w_i`.
    sources: Vec<(Vec<f64>, Vec<f64>)>,
    /// Per edge: rate, source exponent index into `sources`, `‖y_j − y_i‖∞`.
    edge_weights: Vec<(f64, usize, f64)>,
}

impl VectorField {
    pub(crate) fn new(sys: &MassActionSystem) -> Self {
        let g = sys.network();
        let w = sys.net_reaction_vectors();
        let index_of: std::collections::BTreeMap<usize, usize> =
            w.sources().into_iter().enumerate().map(|(k, i)| (i, k)).collect();
        let sources = w.iter().map(|(i, wi)| (g.vertex(i).to_vec(), wi.to_vec())).collect();
        let edge_weights = g
            .edges()
            .iter()
            .enumerate()
            .map(|(k, &(i, _))| (sys.rates()[k], index_of[&i], linalg::norm_inf(&g.reaction_vector(k))))
            .collect();
        Self {
            n: g.dimension(),
            sources,
            edge_weights,
        }
    }

    fn monomials(&self, x: &[f64]) -> Vec<f64> {
        self.sources.iter().map(|(y, _)| linalg::monomial_unchecked(x, y)).collect()
    }

    pub(crate) fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mono = self.monomials(x);
        let mut f = vec![0.0; self.n];
        for ((_, w), m) in self.sources.iter().zip(&mono) {
            for (fi, wi) in f.iter_mut().zip(w) {
                *fi += m * wi;
            }
        }
        f
    }

    /// Largest single-reaction contribution `κ_k x^{y_k} ‖y'_k − y_k‖∞`; 1 when
    /// the network has no reactions. Residual tolerances are relative to this.
    pub(crate) fn scale(&self, x: &[f64]) -> f64 {
        let mono = self.monomials(x);
        let s = self
            .edge_weights
            .iter()
            .fold(0.0_f64, |a, &(rate, src, len)| a.max(rate * mono[src] * len));
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// `∂F(exp z)/∂z = Σ_i x^{y_i} w_i y_iᵀ` evaluated at `x = exp z`.
    fn log_jacobian(&self, x: &[f64]) -> Matrix {
        let mono = self.monomials(x);
        let mut j = Matrix::zeros(self.n, self.n);
        for ((y, w), m) in self.sources.iter().zip(&mono) {
            for r in 0..self.n {
                for c in 0..self.n {
                    j[(r, c)] += m * w[r] * y[c];
                }
            }
        }
        j
    }

    fn is_zero(&self) -> bool {
        self.sources.iter().all(|(_, w)| w.iter().all(|&v| v == 0.0))
    }
}

/// `F(x) = Γ · D · x^{Y_s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeDecomposition {
    /// Stoichiometric matrix, `n × R`.
    pub gamma: Matrix,
    /// Source exponents, `n × R`.
    pub source_exponents: Matrix,
    /// Diagonal rate matrix, `R × R`.
    pub rates: Matrix,
}

impl OdeDecomposition {
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mono = linalg::matrix_power_eval(x, &self.source_exponents)?;
        Ok(linalg::mat_vec(&(&self.gamma * &self.rates), &mono))
    }
}

pub fn ode_decomposition(sys: &MassActionSystem) -> OdeDecomposition {
    let g = sys.network();
    OdeDecomposition {
        gamma: g.stoichiometric_matrix(),
        source_exponents: g.source_matrix(),
        rates: Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(sys.rates())),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteadyStateOptions {
    /// Grid points per axis of the log-space start grid.
    pub grid_points: usize,
    /// The start grid covers `[−grid_radius, grid_radius]ⁿ` in `log x`.
    pub grid_radius: f64,
    /// Uniform perturbation applied to every grid start, in `log x`.
    pub jitter: f64,
    pub seed: u64,
    /// Extra starting points, in concentration space. Tried before the grid.
    pub starts: Vec<Vec<f64>>,
    /// Stop once this many distinct states are found.
    pub max_states: Option<usize>,
    /// Two roots are the same when `max_i |ln x_i − ln x'_i|` is below this.
    pub dedup_tol: f64,
    /// Accept `x` when `‖F(x)‖∞ ≤ residual_tol · scale(x)`.
    pub residual_tol: f64,
    pub max_iterations: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            grid_points: 5,
            grid_radius: 2.0,
            jitter: 0.1,
            seed: 0,
            starts: Vec::new(),
            max_states: None,
            dedup_tol: 1e-6,
            residual_tol: 1e-10,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub x: Vec<f64>,
    /// `‖F(x)‖∞`.
    pub residual: f64,
    /// Flux scale the residual is measured against.
    pub scale: f64,
    /// `c · x` for each conservation law `c` of the report.
    pub conserved: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateReport {
    pub states: Vec<SteadyState>,
    pub conservation_laws: Vec<Vec<f64>>,
    /// `F ≡ 0`: every positive point is a steady state.
    pub degenerate: bool,
}

fn log_starts(n: usize, opts: &SteadyStateOptions) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = opts
        .starts
        .iter()
        .filter(|s| s.len() == n && s.iter().all(|&v| v > 0.0))
        .map(|s| s.iter().map(|v| v.ln()).collect())
        .collect();
    let k = opts.grid_points.max(1);
    let axis: Vec<f64> = if k == 1 {
        vec![0.0]
    } else {
        (0..k)
            .map(|i| -opts.grid_radius + 2.0 * opts.grid_radius * i as f64 / (k - 1) as f64)
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let total = k.pow(n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut z = Vec::with_capacity(n);
        for _ in 0..n {
            let j = if opts.jitter > 0.0 {
                rng.gen_range(-opts.jitter..opts.jitter)
            } else {
                0.0
            };
            z.push(axis[rem % k] + j);
            rem /= k;
        }
        out.push(z);
    }
    out
}

/// Row-weighted Gauss–Newton in log coordinates on `[F(x); C x − t]`.
///
/// `constraints` holds the rows of `C` with their targets `t`; it is empty for
/// the plain steady-state problem.
fn newton_log(
    field: &VectorField,
    z0: &[f64],
    constraints: &[(Vec<f64>, f64)],
    opts: &SteadyStateOptions,
) -> Option<Vec<f64>> {
    const Z_LIMIT: f64 = 60.0;
    let n = z0.len();
    let merit = |x: &[f64]| -> f64 {
        let f = field.eval(x);
        let mut m = linalg::norm_inf(&f) / field.scale(x);
        for (c, t) in constraints {
            m = m.max((linalg::dot(c, x) - t).abs() / (1.0 + t.abs()));
        }
        m
    };
    let mut z = z0.to_vec();
    let mut x = linalg::exp_vec(&z);
    let mut phi = merit(&x);
    for _ in 0..opts.max_iterations {
        if !phi.is_finite() {
            return None;
        }
        if phi <= 1e-14 {
            break;
        }
        let s = field.scale(&x);
        let f = field.eval(&x);
        let jf = field.log_jacobian(&x);
        let rows = n + constraints.len();
        let mut jac = Matrix::zeros(rows, n);
        let mut rhs = vec![0.0; rows];
        for r in 0..n {
            rhs[r] = -f[r] / s;
            for c in 0..n {
                jac[(r, c)] = jf[(r, c)] / s;
            }
        }
        for (k, (cv, t)) in constraints.iter().enumerate() {
            let w = 1.0 + t.abs();
            rhs[n + k] = -(linalg::dot(cv, &x) - t) / w;
            for c in 0..n {
                jac[(n + k, c)] = cv[c] * x[c] / w;
            }
        }
        let (mut dz, _) = linalg::least_squares(&jac, &rhs).ok()?;
        let len = linalg::norm_inf(&dz);
        if len > 2.0 {
            dz.iter_mut().for_each(|d| *d *= 2.0 / len);
        }
        if len < 1e-15 {
            break;
        }
        let mut accepted = false;
        let mut step = 1.0;
        for _ in 0..30 {
            let trial: Vec<f64> = z.iter().zip(&dz).map(|(a, d)| a + step * d).collect();
            if trial.iter().any(|v| v.abs() > Z_LIMIT) {
                return None;
            }
            let xt = linalg::exp_vec(&trial);
            let pt = merit(&xt);
            if pt < phi {
                z = trial;
                x = xt;
                phi = pt;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some(z)
}

fn is_duplicate(states: &[SteadyState], x: &[f64], tol: f64) -> bool {
    states.iter().any(|s| {
        s.x.iter()
            .zip(x)
            .all(|(a, b)| (a.ln() - b.ln()).abs() <= tol)
    })
}

fn collect_states<F>(
    field: &VectorField,
    starts: &[Vec<f64>],
    laws: &[Vec<f64>],
    opts: &SteadyStateOptions,
    solve: F,
) -> Vec<SteadyState>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
{
    let accept = |z: Vec<f64>| -> Option<SteadyState> {
        let x = linalg::exp_vec(&z);
        let f = field.eval(&x);
        let scale = field.scale(&x);
        let residual = linalg::norm_inf(&f);
        (residual <= opts.residual_tol * scale && x.iter().all(|v| v.is_finite() && *v > 0.0)).then(|| {
            SteadyState {
                conserved: laws.iter().map(|c| linalg::dot(c, &x)).collect(),
                x,
                residual,
                scale,
            }
        })
    };
    let mut states: Vec<SteadyState> = Vec::new();
    match opts.max_states {
        Some(limit) => {
            for z0 in starts {
                if states.len() >= limit {
                    break;
                }
                if let Some(s) = solve(z0).and_then(accept) {
                    if !is_duplicate(&states, &s.x, opts.dedup_tol) {
                        states.push(s);
                    }
                }
            }
        }
        None => {
            let found: Vec<Option<SteadyState>> =
                starts.par_iter().map(|z0| solve(z0).and_then(accept)).collect();
            for s in found.into_iter().flatten() {
                if !is_duplicate(&states, &s.x, opts.dedup_tol) {
                    states.push(s);
                }
            }
        }
    }
    states
}

/// Multistart Newton search for positive steady states.
pub fn find_steady_states(sys: &MassActionSystem, opts: &SteadyStateOptions) -> SteadyStateReport {
    let field = VectorField::new(sys);
    let n = sys.dimension();
    let laws = sys.network().conservation_laws().vectors;
    let starts = log_starts(n, opts);
    if field.is_zero() {
        let states = starts
            .iter()
            .map(|z| {
                let x = linalg::exp_vec(z);
                SteadyState {
                    conserved: laws.iter().map(|c| linalg::dot(c, &x)).collect(),
                    scale: field.scale(&x),
                    residual: 0.0,
                    x,
                }
            })
            .take(opts.max_states.unwrap_or(usize::MAX))
            .collect();
        return SteadyStateReport {
            states,
            conservation_laws: laws,
            degenerate: true,
        };
    }
    let states = collect_states(&field, &starts, &laws, opts, |z0| newton_log(&field, z0, &[], opts));
    SteadyStateReport {
        states,
        conservation_laws: laws,
        degenerate: false,
    }
}

/// Steady states in the stoichiometric compatibility class of `x0`.
pub fn steady_states_in_class(
    sys: &MassActionSystem,
    x0: &[f64],
    opts: &SteadyStateOptions,
) -> Result<SteadyStateReport> {
    if x0.len() != sys.dimension() {
        return Err(CrnError::DimensionMismatch {
            expected: sys.dimension(),
            found: x0.len(),
        });
    }
    linalg::log_vec(x0)?;
    let field = VectorField::new(sys);
    let laws = sys.network().conservation_laws().vectors;
    let constraints: Vec<(Vec<f64>, f64)> =
        laws.iter().map(|c| (c.clone(), linalg::dot(c, x0))).collect();
    let n = sys.dimension();

    // Starts: x0, every grid start, and each grid start projected onto the class.
    let mut starts = vec![x0.iter().map(|v| v.ln()).collect::<Vec<_>>()];
    for z in log_starts(n, opts) {
        let p = linalg::exp_vec(&z);
        let mut q = p.clone();
        for (c, t) in &constraints {
            let gap = t - linalg::dot(c, &p);
            for (qi, ci) in q.iter_mut().zip(c) {
                *qi += gap * ci;
            }
        }
        starts.push(z);
        if q.iter().all(|&v| v > 0.0) {
            starts.push(q.iter().map(|v| v.ln()).collect());
        }
    }

    let in_class = |x: &[f64]| {
        constraints
            .iter()
            .all(|(c, t)| (linalg::dot(c, x) - t).abs() <= 1e-8 * (1.0 + t.abs()))
    };
    if field.is_zero() {
        return Ok(SteadyStateReport {
            states: vec![SteadyState {
                x: x0.to_vec(),
                residual: 0.0,
                scale: 1.0,
                conserved: constraints.iter().map(|c| c.1).collect(),
            }],
            conservation_laws: laws,
            degenerate: true,
        });
    }
    let states = collect_states(&field, &starts, &laws, opts, |z0| {
        newton_log(&field, z0, &constraints, opts).filter(|z| in_class(&linalg::exp_vec(z)))
    });
    Ok(SteadyStateReport {
        states,
        conservation_laws: laws,
        degenerate: false,
    })
}
