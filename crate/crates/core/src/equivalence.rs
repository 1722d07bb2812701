//! Dynamical equivalence, realization search and disguised toric membership.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balance;
use crate::dynamics::{self, SteadyStateOptions};
use crate::error::{CrnError, Result};
use crate::linalg::{self, FeasibilityOutcome, LinearFeasibilityProblem, Matrix};
use crate::network::{MassActionSystem, NetReactionVectors, Network};

/// Default tolerance for [`dynamically_equivalent`].
pub const DE_TOL: f64 = 1e-9;
/// Tolerance used when re-verifying a pruned certificate.
pub const CERT_TOL: f64 = 1e-7;
/// Relative size below which realization entries are dropped.
pub const SUPPORT_TOL: f64 = 1e-10;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = 1.0 + linalg::norm_inf(a).max(linalg::norm_inf(b));
    linalg::norm_inf(&linalg::sub(a, b)) <= tol * scale
}

/// Net reaction vectors agree at every source vertex of either system.
///
/// Vertices are matched by exact coordinates; a vertex that sources in one
/// system only must have a zero net vector there.
pub fn dynamically_equivalent(a: &MassActionSystem, b: &MassActionSystem, tol: f64) -> Result<bool> {
    if a.dimension() != b.dimension() {
        return Err(CrnError::DimensionMismatch {
            expected: a.dimension(),
            found: b.dimension(),
        });
    }
    let zero = vec![0.0; a.dimension()];
    let (wa, wb) = (a.net_reaction_vectors(), b.net_reaction_vectors());
    let lookup = |sys: &MassActionSystem, w: &NetReactionVectors, y: &[f64]| -> Vec<f64> {
        sys.network()
            .find_vertex(y)
            .and_then(|i| w.get(i))
            .map_or_else(|| zero.clone(), <[f64]>::to_vec)
    };
    for (i, w) in wa.iter() {
        if !close(w, &lookup(b, &wb, a.network().vertex(i)), tol) {
            return Ok(false);
        }
    }
    for (i, w) in wb.iter() {
        if !close(w, &lookup(a, &wa, b.network().vertex(i)), tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Ordered pairs `(i, j)`, `i ≠ j`, of the complete digraph on `m` vertices,
/// in row-major order. This is the variable order of [`find_realization`].
pub fn complete_edges(m: usize) -> Vec<(usize, usize)> {
    (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

/// Realization LP in the variables `f_ij = κ'_ij · weights[i]`.
fn realization_rows(
    targets: &NetReactionVectors,
    vertices: &[Vec<f64>],
    weights: &[f64],
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let m = vertices.len();
    let n = targets.dimension();
    let edges = complete_edges(m);
    let mut rows = Vec::with_capacity(m * n);
    let mut rhs = Vec::with_capacity(m * n);
    for i in 0..m {
        let w = targets.get(i);
        for r in 0..n {
            let mut row = vec![0.0; edges.len()];
            for (k, &(a, b)) in edges.iter().enumerate() {
                if a == i {
                    row[k] = vertices[b][r] - vertices[a][r];
                }
            }
            rows.push(row);
            rhs.push(w.map_or(0.0, |w| w[r]) * weights[i]);
        }
    }
    (rows, rhs)
}

fn feasibility(rows: Vec<Vec<f64>>, rhs: Vec<f64>, vars: usize) -> Result<FeasibilityOutcome> {
    let a = if rows.is_empty() {
        Matrix::zeros(0, vars)
    } else {
        linalg::from_rows(&rows, vars)
    };
    linalg::lp_feasible(&LinearFeasibilityProblem::new(a, rhs)?)
}

/// Searches for `κ' ≥ 0` on the complete digraph over `candidate_vertices`
/// with `Σ_j κ'_ij (y_j − y_i) = w_i` for each candidate `i`, where `targets` is
/// keyed by candidate position (missing keys mean zero). `extra_rows` are
/// appended as `(coefficients, value)` equalities over the same variables.
pub fn find_realization(
    targets: &NetReactionVectors,
    candidate_vertices: &[Vec<f64>],
    extra_rows: &[(Vec<f64>, f64)],
) -> Result<FeasibilityOutcome> {
    let m = candidate_vertices.len();
    let vars = m * m.saturating_sub(1);
    if candidate_vertices.iter().any(|v| v.len() != targets.dimension()) {
        return Err(CrnError::DimensionMismatch {
            expected: targets.dimension(),
            found: candidate_vertices.iter().map(Vec::len).find(|&l| l != targets.dimension()).unwrap(),
        });
    }
    if let Some(i) = targets.sources().into_iter().find(|&i| i >= m) {
        return Err(CrnError::InvalidNetwork(format!("target for vertex {i} but only {m} candidates")));
    }
    let (mut rows, mut rhs) = realization_rows(targets, candidate_vertices, &vec![1.0; m]);
    for (k, (row, value)) in extra_rows.iter().enumerate() {
        if row.len() != vars {
            return Err(CrnError::InvalidNetwork(format!(
                "extra row {k} has {} coefficients, expected {vars}",
                row.len()
            )));
        }
        rows.push(row.clone());
        rhs.push(*value);
    }
    feasibility(rows, rhs, vars)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Member,
    NotMember,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipResult {
    pub verdict: Verdict,
    /// Balanced realization on the source vertices, when `Member`.
    pub realization: Option<MassActionSystem>,
    pub steady_state: Option<Vec<f64>>,
    pub diagnostics: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MembershipOptions {
    /// A known positive steady state; searched for when absent or invalid.
    pub steady_state: Option<Vec<f64>>,
    pub seed: u64,
}

#[derive(Clone, Copy, PartialEq)]
enum Balance {
    Complex,
    Detailed,
}

fn is_steady(sys: &MassActionSystem, x: &[f64]) -> bool {
    let Ok(f) = dynamics::rhs_eval(sys, x) else {
        return false;
    };
    linalg::norm_inf(&f) <= 1e-9 * dynamics::VectorField::new(sys).scale(x)
}

fn membership(sys: &MassActionSystem, opts: &MembershipOptions, kind: Balance) -> Result<MembershipResult> {
    let g = sys.network();
    let n = g.dimension();
    let w = sys.net_reaction_vectors();
    let sources = g.source_vertices();
    let vertices: Vec<Vec<f64>> = sources.iter().map(|&i| g.vertex(i).to_vec()).collect();
    let flux_scale = g
        .edges()
        .iter()
        .enumerate()
        .map(|(k, _)| sys.rates()[k] * linalg::norm_inf(&g.reaction_vector(k)))
        .fold(0.0, f64::max);

    if w.iter().all(|(_, v)| linalg::norm_inf(v) <= 1e-13 * flux_scale) {
        return Ok(MembershipResult {
            verdict: Verdict::Member,
            realization: Some(MassActionSystem::new(Network::new(n, vertices, vec![])?, vec![])?),
            steady_state: Some(vec![1.0; n]),
            diagnostics: "all net reaction vectors vanish; the empty realization is balanced".into(),
        });
    }

    let hint = opts.steady_state.as_ref().filter(|x| x.len() == n && is_steady(sys, x));
    let x_star = match hint {
        Some(x) => x.clone(),
        None => {
            // Widen the start grid until something turns up.
            let report = [(5, 2.0), (9, 6.0), (13, 12.0)]
                .into_iter()
                .map(|(grid_points, grid_radius)| {
                    dynamics::find_steady_states(
                        sys,
                        &SteadyStateOptions {
                            grid_points,
                            grid_radius,
                            max_states: Some(1),
                            seed: opts.seed,
                            ..Default::default()
                        },
                    )
                })
                .find(|r| !r.states.is_empty());
            match report.and_then(|r| r.states.into_iter().next()) {
                Some(s) => s.x,
                None => {
                    return Ok(MembershipResult {
                        verdict: Verdict::Unknown,
                        realization: None,
                        steady_state: None,
                        diagnostics: "no positive steady state found".into(),
                    })
                }
            }
        }
    };

    // Work in fluxes f_ij = κ'_ij x*^{y_i} / c, with c chosen so the right-hand
    // side has unit size; balance rows become linear in f alone.
    let m = vertices.len();
    let mut mono = vertices
        .iter()
        .map(|y| linalg::monomial_eval(&x_star, y))
        .collect::<Result<Vec<_>>>()?;
    let c = sources
        .iter()
        .zip(&mono)
        .filter_map(|(&i, mi)| w.get(i).map(|v| linalg::norm_inf(v) * mi))
        .fold(0.0, f64::max);
    mono.iter_mut().for_each(|v| *v /= c);
    let local_targets = NetReactionVectors::new(
        n,
        sources
            .iter()
            .enumerate()
            .filter_map(|(a, &i)| w.get(i).map(|v| (a, v.to_vec())))
            .collect(),
    )?;
    let edges = complete_edges(m);
    let (mut rows, mut rhs) = realization_rows(&local_targets, &vertices, &mono);
    match kind {
        Balance::Complex => {
            for i in 0..m {
                let row = edges
                    .iter()
                    .map(|&(a, b)| f64::from(a == i) - f64::from(b == i))
                    .collect();
                rows.push(row);
                rhs.push(0.0);
            }
        }
        Balance::Detailed => {
            for (k, &(a, b)) in edges.iter().enumerate() {
                if a < b {
                    let back = edges.iter().position(|&e| e == (b, a)).unwrap();
                    let mut row = vec![0.0; edges.len()];
                    row[k] = 1.0;
                    row[back] = -1.0;
                    rows.push(row);
                    rhs.push(0.0);
                }
            }
        }
    }
    let outcome = match feasibility(rows, rhs, edges.len()) {
        Ok(o) => o,
        Err(e) => {
            return Ok(MembershipResult {
                verdict: Verdict::Unknown,
                realization: None,
                steady_state: Some(x_star),
                diagnostics: format!("linear program failed: {e}"),
            })
        }
    };
    let Some(f) = outcome.witness.filter(|_| outcome.status == linalg::FeasibilityStatus::Feasible) else {
        return Ok(MembershipResult {
            verdict: Verdict::NotMember,
            realization: None,
            steady_state: Some(x_star),
            diagnostics: format!("realization LP infeasible at the steady state (max residual {:.3e})", outcome.max_residual),
        });
    };

    let f_max = f.iter().copied().fold(0.0, f64::max);
    let (kept, rates): (Vec<(usize, usize)>, Vec<f64>) = edges
        .iter()
        .zip(&f)
        .filter(|(_, &v)| v > SUPPORT_TOL * f_max)
        .map(|(&(a, b), &v)| ((a, b), v / mono[a]))
        .unzip();
    let cert = MassActionSystem::new(Network::new(n, vertices, kept)?, rates)?;

    let equivalent = dynamically_equivalent(sys, &cert, CERT_TOL)?;
    let balanced = match kind {
        Balance::Complex => balance::is_complex_balanced(&cert, CERT_TOL)?.balanced,
        Balance::Detailed => balance::is_detailed_balanced(&cert, CERT_TOL)?.balanced,
    };
    let reversible = cert.network().is_weakly_reversible();
    if equivalent && balanced && reversible {
        Ok(MembershipResult {
            verdict: Verdict::Member,
            realization: Some(cert),
            steady_state: Some(x_star),
            diagnostics: String::new(),
        })
    } else {
        Ok(MembershipResult {
            verdict: Verdict::Unknown,
            realization: Some(cert),
            steady_state: Some(x_star),
            diagnostics: format!(
                "certificate failed re-verification (equivalent: {equivalent}, balanced: {balanced}, weakly reversible: {reversible})"
            ),
        })
    }
}

/// Is the system dynamically equivalent to a complex-balanced system supported
/// on its own source vertices?
pub fn is_disguised_toric(sys: &MassActionSystem, opts: &MembershipOptions) -> Result<MembershipResult> {
    membership(sys, opts, Balance::Complex)
}

/// As [`is_disguised_toric`], with a detailed-balanced realization.
pub fn is_disguised_detailed_balanced(sys: &MassActionSystem, opts: &MembershipOptions) -> Result<MembershipResult> {
    membership(sys, opts, Balance::Detailed)
}

/// How rate vectors are drawn for [`sample_disguised_locus`]. Each range is a
/// `(lo, hi)` interval for one edge, sampled log-uniformly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum LocusSpec {
    Random {
        ranges: Vec<(f64, f64)>,
        count: usize,
        seed: u64,
    },
    /// `points` log-spaced values per edge; a single point is the geometric mean.
    Grid { ranges: Vec<(f64, f64)>, points: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocusSample {
    pub rates: Vec<f64>,
    pub verdict: Verdict,
}

fn log_point(lo: f64, hi: f64, s: f64) -> f64 {
    (lo.ln() + s * (hi.ln() - lo.ln())).exp()
}

/// Membership verdicts over sampled rate vectors of `network`, in sample order.
pub fn sample_disguised_locus(network: &Network, spec: &LocusSpec) -> Result<Vec<LocusSample>> {
    let (ranges, seed) = match spec {
        LocusSpec::Random { ranges, seed, .. } => (ranges, *seed),
        LocusSpec::Grid { ranges, .. } => (ranges, 0),
    };
    if ranges.len() != network.num_edges() {
        return Err(CrnError::DimensionMismatch {
            expected: network.num_edges(),
            found: ranges.len(),
        });
    }
    if ranges.iter().any(|&(lo, hi)| !(lo > 0.0 && hi >= lo && hi.is_finite())) {
        return Err(CrnError::Domain("rate ranges need 0 < lo ≤ hi".into()));
    }
    let samples: Vec<Vec<f64>> = match spec {
        LocusSpec::Random { count, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..*count)
                .map(|_| ranges.iter().map(|&(lo, hi)| log_point(lo, hi, rng.gen::<f64>())).collect())
                .collect()
        }
        LocusSpec::Grid { points, .. } => {
            let p = *points;
            let total = if p == 0 { 0 } else { p.pow(ranges.len() as u32) };
            (0..total)
                .map(|idx| {
                    let mut rem = idx;
                    ranges
                        .iter()
                        .map(|&(lo, hi)| {
                            let k = rem % p;
                            rem /= p;
                            let s = if p == 1 { 0.5 } else { k as f64 / (p - 1) as f64 };
                            log_point(lo, hi, s)
                        })
                        .collect()
                })
                .collect()
        }
    };
    samples
        .into_par_iter()
        .enumerate()
        .map(|(k, rates)| {
            let sys = MassActionSystem::new(network.clone(), rates.clone())?;
            let opts = MembershipOptions {
                steady_state: None,
                seed: seed.wrapping_add(k as u64),
            };
            let verdict = is_disguised_toric(&sys, &opts).map_or(Verdict::Unknown, |r| r.verdict);
            Ok(LocusSample { rates, verdict })
        })
        .collect()
}
