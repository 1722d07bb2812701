//! Newton polytopes and endotactic tests.
//!
//! Both tests work from the support-function form of the definitions: for a
//! direction `u`, a reaction is `u`-essential when `u · (y' − y) ≠ 0`. A network
//! is endotactic when, for every `u`, the `u`-essential reactions whose sources
//! maximize `u · y` among all `u`-essential sources point down. It is strongly
//! endotactic when, in addition, every `u` not orthogonal to the stoichiometric
//! subspace has a downward reaction among the sources maximizing `u · y`
//! over all sources. Each quantifier over `u` becomes a finite family of linear
//! feasibility problems.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{CrnError, Result};
use crate::linalg::{self, LinearFeasibilityProblem, Matrix};
use crate::network::Network;

pub const MAX_DIMENSION: usize = 4;
const FACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    /// Outward unit normal, lying in the direction space of the affine hull.
    pub normal: Vec<f64>,
    pub offset: f64,
    /// Vertex indices (into the network) on the facet.
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolytopeFacets {
    pub dimension: usize,
    /// Source vertex indices spanning the polytope.
    pub sources: Vec<usize>,
    pub hull_origin: Vec<f64>,
    /// Orthonormal basis of the affine hull's direction space.
    pub hull_basis: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
}

impl PolytopeFacets {
    pub fn hull_dimension(&self) -> usize {
        self.hull_basis.len()
    }

    /// Vertex sets of all nonempty faces, the whole polytope included.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
        faces.insert(self.sources.clone());
        let mut frontier: Vec<Vec<usize>> = self.facets.iter().map(|f| f.vertices.clone()).collect();
        while let Some(face) = frontier.pop() {
            if face.is_empty() || !faces.insert(face.clone()) {
                continue;
            }
            for f in &self.facets {
                let meet: Vec<usize> = face.iter().copied().filter(|v| f.vertices.contains(v)).collect();
                if meet.len() < face.len() {
                    frontier.push(meet);
                }
            }
        }
        faces.into_iter().collect()
    }
}

fn check_dimension(g: &Network) -> Result<()> {
    if g.dimension() > MAX_DIMENSION {
        return Err(CrnError::Unsupported(format!(
            "polytope computations support dimension ≤ {MAX_DIMENSION}, got {}",
            g.dimension()
        )));
    }
    Ok(())
}

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Facets of the convex hull of the source vertices, within their affine hull.
pub fn newton_polytope(g: &Network) -> Result<PolytopeFacets> {
    check_dimension(g)?;
    let sources = g.source_vertices();
    let Some(&first) = sources.first() else {
        return Err(CrnError::InvalidNetwork("network has no source vertices".into()));
    };
    let n = g.dimension();
    let origin = g.vertex(first).to_vec();
    let diffs: Vec<Vec<f64>> = sources.iter().map(|&i| linalg::sub(g.vertex(i), &origin)).collect();
    let basis = linalg::column_space(&linalg::from_columns(&diffs, n));
    let d = basis.len();
    let local: Vec<Vec<f64>> = diffs
        .iter()
        .map(|v| basis.iter().map(|b| linalg::dot(b, v)).collect())
        .collect();
    let spread = diffs.iter().map(|v| linalg::norm_inf(v)).fold(1.0, f64::max);
    let tol = FACE_TOL * spread;

    let mut facets: Vec<Facet> = Vec::new();
    let mut add = |u_local: Vec<f64>| {
        let norm = linalg::norm2(&u_local);
        let u_local: Vec<f64> = u_local.iter().map(|v| v / norm).collect();
        let heights: Vec<f64> = local.iter().map(|p| linalg::dot(&u_local, p)).collect();
        let top = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let on: Vec<usize> = sources
            .iter()
            .zip(&heights)
            .filter(|(_, &h)| h >= top - tol)
            .map(|(&i, _)| i)
            .collect();
        if facets.iter().any(|f| f.vertices == on) {
            return;
        }
        let mut normal = vec![0.0; n];
        for (b, c) in basis.iter().zip(&u_local) {
            for (ni, bi) in normal.iter_mut().zip(b) {
                *ni += c * bi;
            }
        }
        let offset = linalg::dot(&normal, &origin) + top;
        facets.push(Facet {
            normal,
            offset,
            vertices: on,
        });
    };

    match d {
        0 => {}
        1 => {
            add(vec![1.0]);
            add(vec![-1.0]);
        }
        _ => {
            for subset in subsets(local.len(), d) {
                let p0 = &local[subset[0]];
                let rows: Vec<Vec<f64>> = subset[1..].iter().map(|&k| linalg::sub(&local[k], p0)).collect();
                let null = linalg::nullspace(&linalg::from_rows(&rows, d));
                if null.len() != 1 {
                    continue;
                }
                let u = &null[0];
                let heights: Vec<f64> = local.iter().map(|p| linalg::dot(u, &linalg::sub(p, p0))).collect();
                if heights.iter().all(|&h| h <= tol) {
                    add(u.clone());
                } else if heights.iter().all(|&h| h >= -tol) {
                    add(u.iter().map(|v| -v).collect());
                }
            }
        }
    }
    Ok(PolytopeFacets {
        dimension: n,
        sources,
        hull_origin: origin,
        hull_basis: basis,
        facets,
    })
}

/// Feasibility of a system over a free vector `u ∈ ℝⁿ`: `eq` rows are
/// `(a, β)` with `a·u = β`, `le` rows are `(a, β)` with `a·u ≤ β`.
fn free_feasible(n: usize, eq: &[(Vec<f64>, f64)], le: &[(Vec<f64>, f64)]) -> Result<bool> {
    // u = p − q, one slack per inequality.
    let vars = 2 * n + le.len();
    let rows = eq.len() + le.len();
    let mut a = Matrix::zeros(rows, vars);
    let mut b = Vec::with_capacity(rows);
    for (r, (coef, beta)) in eq.iter().chain(le).enumerate() {
        for k in 0..n {
            a[(r, k)] = coef[k];
            a[(r, n + k)] = -coef[k];
        }
        if r >= eq.len() {
            a[(r, 2 * n + r - eq.len())] = 1.0;
        }
        b.push(*beta);
    }
    Ok(linalg::lp_feasible(&LinearFeasibilityProblem::new(a, b)?)?.is_feasible())
}

/// Reaction-index sets closed under linear span, one per flat spanned by at
/// most `max_size` reaction vectors (the empty flat included).
fn reaction_flats(vectors: &[Vec<f64>], max_size: usize) -> Vec<Vec<usize>> {
    let n = vectors.first().map_or(0, Vec::len);
    let mut flats: BTreeSet<Vec<usize>> = BTreeSet::new();
    for k in 0..=max_size.min(vectors.len()) {
        for subset in subsets(vectors.len(), k) {
            let gens: Vec<Vec<f64>> = subset.iter().map(|&i| vectors[i].clone()).collect();
            let basis = if gens.is_empty() {
                Vec::new()
            } else {
                linalg::column_space(&linalg::from_columns(&gens, n))
            };
            if basis.len() != k {
                continue;
            }
            let members = (0..vectors.len())
                .filter(|&i| {
                    let v = &vectors[i];
                    let mut rest = v.clone();
                    for b in &basis {
                        let c = linalg::dot(b, v);
                        for (r, bi) in rest.iter_mut().zip(b) {
                            *r -= c * bi;
                        }
                    }
                    linalg::norm_inf(&rest) <= 1e-10 * (1.0 + linalg::norm_inf(v))
                })
                .collect();
            flats.insert(members);
        }
    }
    flats.into_iter().collect()
}

pub fn is_endotactic(g: &Network) -> Result<bool> {
    check_dimension(g)?;
    let n = g.dimension();
    let vectors: Vec<Vec<f64>> = (0..g.num_edges()).map(|k| g.reaction_vector(k)).collect();
    if vectors.is_empty() {
        return Ok(true);
    }
    let rank = linalg::rank(&linalg::from_columns(&vectors, n));
    let flats = reaction_flats(&vectors, rank.saturating_sub(1));
    for (k0, &(src0, _)) in g.edges().iter().enumerate() {
        let y0 = g.vertex(src0);
        for flat in &flats {
            if flat.contains(&k0) {
                continue;
            }
            // u · v0 = 1, u ⟂ the flat, and no essential source sits above y0.
            let mut eq = vec![(vectors[k0].clone(), 1.0)];
            eq.extend(flat.iter().map(|&s| (vectors[s].clone(), 0.0)));
            let le: Vec<(Vec<f64>, f64)> = g
                .edges()
                .iter()
                .enumerate()
                .filter(|(s, &(src, _))| !flat.contains(s) && src != src0)
                .map(|(_, &(src, _))| (linalg::sub(g.vertex(src), y0), 0.0))
                .collect();
            if free_feasible(n, &eq, &le)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn is_strongly_endotactic(g: &Network) -> Result<bool> {
    if !is_endotactic(g)? {
        return Ok(false);
    }
    let n = g.dimension();
    if g.num_edges() == 0 {
        return Ok(true);
    }
    let poly = newton_polytope(g)?;
    let vectors: Vec<Vec<f64>> = (0..g.num_edges()).map(|k| g.reaction_vector(k)).collect();
    for face in poly.faces() {
        let y0 = g.vertex(face[0]);
        let mut eq: Vec<(Vec<f64>, f64)> = face[1..].iter().map(|&i| (linalg::sub(g.vertex(i), y0), 0.0)).collect();
        eq.extend(
            g.edges()
                .iter()
                .enumerate()
                .filter(|(_, (src, _))| face.contains(src))
                .map(|(k, _)| (vectors[k].clone(), 0.0)),
        );
        let mut le: Vec<(Vec<f64>, f64)> = poly
            .sources
            .iter()
            .filter(|i| !face.contains(i))
            .map(|&i| (linalg::sub(g.vertex(i), y0), -1.0))
            .collect();
        // u must also see some reaction vector s with σ u·s ≥ 1.
        for s in &vectors {
            for sigma in [1.0, -1.0] {
                le.push((s.iter().map(|v| -sigma * v).collect(), -1.0));
                let found = free_feasible(n, &eq, &le)?;
                le.pop();
                if found {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
