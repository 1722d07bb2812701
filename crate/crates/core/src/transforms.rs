//! Invertible affine and projective maps acting on networks.
//!
//! Rates travel with edge indices: the image of edge `k` keeps rate `κ_k`.

use serde_json::{json, Value};

use crate::error::{CrnError, Result};
use crate::linalg::{self, Matrix};
use crate::network::{parse_number, MassActionSystem, Network};

const INVERTIBILITY_TOL: f64 = 1e-12;
/// Vertices with `|ℓ₀(y)|` at or below this are rejected by projective maps.
pub const PROJECTIVE_DOMAIN_TOL: f64 = 1e-12;

fn check_invertible(m: &Matrix, what: &str) -> Result<()> {
    let n = m.nrows() as i32;
    let scale = m.iter().fold(1.0_f64, |a, v| a.max(v.abs())).powi(n);
    let det = linalg::determinant(m);
    if !(det.abs() > INVERTIBILITY_TOL * scale) {
        return Err(CrnError::Singular(format!("{what} has determinant {det:.3e}")));
    }
    Ok(())
}

/// `y ↦ M y + b` with `M` invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    m: Matrix,
    b: Vec<f64>,
}

impl AffineMap {
    pub fn new(m: Matrix, b: Vec<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(CrnError::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if b.len() != m.nrows() {
            return Err(CrnError::DimensionMismatch {
                expected: m.nrows(),
                found: b.len(),
            });
        }
        check_invertible(&m, "affine matrix M")?;
        Ok(Self { m, b })
    }

    pub fn linear(m: Matrix) -> Result<Self> {
        let n = m.nrows();
        Self::new(m, vec![0.0; n])
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: Matrix::identity(n, n),
            b: vec![0.0; n],
        }
    }

    /// Counter-clockwise rotation of the plane.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            m: Matrix::from_row_slice(2, 2, &[c, -s, s, c]),
            b: vec![0.0; 2],
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn offset(&self) -> &[f64] {
        &self.b
    }

    pub fn dimension(&self) -> usize {
        self.b.len()
    }

    pub fn apply_point(&self, y: &[f64]) -> Vec<f64> {
        let mut out = linalg::mat_vec(&self.m, y);
        for (o, b) in out.iter_mut().zip(&self.b) {
            *o += b;
        }
        out
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = linalg::inverse(&self.m)
            .ok_or_else(|| CrnError::Singular("affine matrix M is not invertible".into()))?;
        let b = linalg::mat_vec(&inv, &self.b).into_iter().map(|v| -v).collect();
        Ok(Self { m: inv, b })
    }

    /// `self ∘ first`: applies `first`, then `self`.
    pub fn compose(&self, first: &AffineMap) -> Result<Self> {
        if self.dimension() != first.dimension() {
            return Err(CrnError::DimensionMismatch {
                expected: self.dimension(),
                found: first.dimension(),
            });
        }
        let m = &self.m * &first.m;
        let b = self.apply_point(&first.b);
        Self::new(m, b)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Vec<f64>> = self.m.row_iter().map(|r| r.iter().copied().collect()).collect();
        json!({ "M": rows, "b": self.b })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| CrnError::parse("$", e.to_string()))?;
        let m = parse_square(v.get("M"), "M", None)?;
        let n = m.nrows();
        let b = match v.get("b") {
            None => vec![0.0; n],
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, x)| parse_number(x, &format!("b[{i}]")))
                .collect::<Result<Vec<_>>>()?,
            Some(_) => return Err(CrnError::parse("b", "expected an array")),
        };
        if b.len() != n {
            return Err(CrnError::parse("b", format!("expected {n} entries")));
        }
        Self::new(m, b)
    }
}

fn parse_square(v: Option<&Value>, field: &str, size: Option<usize>) -> Result<Matrix> {
    let rows = v
        .ok_or_else(|| CrnError::parse(field, "missing field"))?
        .as_array()
        .ok_or_else(|| CrnError::parse(field, "expected an array of rows"))?;
    let n = rows.len();
    if n == 0 || size.is_some_and(|s| s != n) {
        return Err(CrnError::parse(field, "wrong number of rows"));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| CrnError::parse(format!("{field}[{i}]"), format!("expected {n} entries")))?;
        for (j, x) in row.iter().enumerate() {
            data.push(parse_number(x, &format!("{field}[{i}][{j}]"))?);
        }
    }
    Ok(Matrix::from_row_slice(n, n, &data))
}

/// `y ↦ (ℓ₁(y)/ℓ₀(y), …, ℓₙ(y)/ℓ₀(y))` with `ℓ_i(y) = a_i0 + Σ_j a_ij y_j`.
///
/// Row `i` of the coefficient matrix holds `(a_i0, a_i1, …, a_in)`; row 0 is the
/// denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMap {
    p: Matrix,
}

impl ProjectiveMap {
    pub fn new(p: Matrix) -> Result<Self> {
        if !p.is_square() || p.nrows() < 2 {
            return Err(CrnError::DimensionMismatch {
                expected: p.nrows(),
                found: p.ncols(),
            });
        }
        check_invertible(&p, "projective coefficient matrix")?;
        Ok(Self { p })
    }

    /// Embeds an affine map with `ℓ₀ ≡ 1`.
    pub fn from_affine(a: &AffineMap) -> Self {
        let n = a.dimension();
        let mut p = Matrix::zeros(n + 1, n + 1);
        p[(0, 0)] = 1.0;
        for i in 0..n {
            p[(i + 1, 0)] = a.b[i];
            for j in 0..n {
                p[(i + 1, j + 1)] = a.m[(i, j)];
            }
        }
        Self { p }
    }

    pub fn coefficients(&self) -> &Matrix {
        &self.p
    }

    pub fn dimension(&self) -> usize {
        self.p.nrows() - 1
    }

    fn linear_forms(&self, y: &[f64]) -> Vec<f64> {
        let mut h = Vec::with_capacity(y.len() + 1);
        h.push(1.0);
        h.extend_from_slice(y);
        linalg::mat_vec(&self.p, &h)
    }

    pub fn denominator(&self, y: &[f64]) -> f64 {
        self.linear_forms(y)[0]
    }

    pub fn apply_point(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dimension() {
            return Err(CrnError::DimensionMismatch {
                expected: self.dimension(),
                found: y.len(),
            });
        }
        let l = self.linear_forms(y);
        if !(l[0].abs() > PROJECTIVE_DOMAIN_TOL) {
            return Err(CrnError::Domain(format!(
                "vertex {y:?} lies on the locus ℓ₀ = 0 (ℓ₀ = {:.3e})",
                l[0]
            )));
        }
        Ok(l[1..].iter().map(|v| v / l[0]).collect())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Vec<f64>> = self.p.row_iter().map(|r| r.iter().copied().collect()).collect();
        json!({ "P": rows })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| CrnError::parse("$", e.to_string()))?;
        Self::new(parse_square(v.get("P"), "P", None)?)
    }
}

pub fn apply_affine(a: &AffineMap, sys: &MassActionSystem) -> Result<MassActionSystem> {
    let g = sys.network();
    if a.dimension() != g.dimension() {
        return Err(CrnError::DimensionMismatch {
            expected: g.dimension(),
            found: a.dimension(),
        });
    }
    let vertices = g.vertices().iter().map(|y| a.apply_point(y)).collect();
    let image = Network::new(g.dimension(), vertices, g.edges().to_vec())
        .map_err(|e| CrnError::Numerical(format!("affine image vertices collide: {e}")))?;
    MassActionSystem::new(image, sys.rates().to_vec())
}

pub fn apply_projective(p: &ProjectiveMap, sys: &MassActionSystem) -> Result<MassActionSystem> {
    let g = sys.network();
    if p.dimension() != g.dimension() {
        return Err(CrnError::DimensionMismatch {
            expected: g.dimension(),
            found: p.dimension(),
        });
    }
    let vertices = g
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, y)| {
            p.apply_point(y).map_err(|e| match e {
                CrnError::Domain(msg) => CrnError::Domain(format!("vertex {i}: {msg}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let image = Network::new(g.dimension(), vertices, g.edges().to_vec())?;
    MassActionSystem::new(image, sys.rates().to_vec())
}

pub fn affine_inverse(a: &AffineMap) -> Result<AffineMap> {
    a.inverse()
}

pub fn affine_compose(second: &AffineMap, first: &AffineMap) -> Result<AffineMap> {
    second.compose(first)
}

/// Maps a positive steady state `x` of `A(G)` to `x^M`, a steady state of `G`.
pub fn steady_state_pushforward(x: &[f64], m: &Matrix) -> Result<Vec<f64>> {
    check_invertible(m, "M")?;
    linalg::matrix_power_eval(x, m)
}

/// Maps a positive steady state `x'` of `G` to `x'^{M⁻¹}`, a steady state of `A(G)`.
pub fn steady_state_pullback(x: &[f64], m: &Matrix) -> Result<Vec<f64>> {
    let inv = linalg::inverse(m).ok_or_else(|| CrnError::Singular("M is not invertible".into()))?;
    check_invertible(m, "M")?;
    linalg::matrix_power_eval(x, &inv)
}

/// `M = [[4/3, 1/2], [1/3, 1]]`, taking `fig1` to `fig4a`.
pub fn doubletargets_map() -> AffineMap {
    AffineMap::linear(Matrix::from_row_slice(2, 2, &[4.0 / 3.0, 0.5, 1.0 / 3.0, 1.0]))
        .expect("invertible")
}

/// `y ↦ [[1, 1], [0, −1]] y + (0, 1)`, taking `fig5a` to `fig5b`.
pub fn multistationarity_map() -> AffineMap {
    AffineMap::new(Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, -1.0]), vec![0.0, 1.0])
        .expect("invertible")
}

/// `P(x, y) = ((−17x + 7y + 3)/(−17x + 3y + 3), (−33x + 3y + 3)/(−17x + 3y + 3))`,
/// taking `fig7a` to `fig7b`.
pub fn fig7_projective_map() -> ProjectiveMap {
    ProjectiveMap::new(Matrix::from_row_slice(
        3,
        3,
        &[3.0, -17.0, 3.0, 3.0, -17.0, 7.0, 3.0, -33.0, 3.0],
    ))
    .expect("invertible")
}
