//! JSON network files.
//!
//! ```json
//! {"dimension": 2,
//!  "vertices": [[0, 0], [1, "1/2"]],
//!  "edges": [{"from": 0, "to": 1, "rate": 1}]}
//! ```
//!
//! Numbers are JSON numbers or strings holding a rational `"p/q"` (or a plain
//! decimal). Indices are 0-based. Edge order is preserved and fixes rate order.

use serde::Serialize;
use serde_json::{Map, Value};

use super::{MassActionSystem, Network};
use crate::error::{CrnError, Result};

/// Reads a JSON number or a rational string at `field`.
pub fn parse_number(value: &Value, field: &str) -> Result<f64> {
    let x = match value {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| CrnError::parse(field, "number out of range"))?,
        Value::String(s) => parse_rational(s).ok_or_else(|| {
            CrnError::parse(field, format!("`{s}` is not a number or rational p/q"))
        })?,
        other => {
            return Err(CrnError::parse(
                field,
                format!("expected number or rational string, found {other}"),
            ))
        }
    };
    if !x.is_finite() {
        return Err(CrnError::parse(field, "value is not finite"));
    }
    Ok(x)
}

fn parse_rational(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            (q != 0.0).then(|| p / q)
        }
        None => s.parse().ok(),
    }
}

fn object<'a>(value: &'a Value, field: &str) -> Result<&'a Map<String, Value>> {
    value
        .as_object()
        .ok_or_else(|| CrnError::parse(field, "expected a JSON object"))
}

fn array<'a>(value: Option<&'a Value>, field: &str) -> Result<&'a Vec<Value>> {
    value
        .ok_or_else(|| CrnError::parse(field, "missing field"))?
        .as_array()
        .ok_or_else(|| CrnError::parse(field, "expected an array"))
}

fn index(value: Option<&Value>, field: &str) -> Result<usize> {
    value
        .ok_or_else(|| CrnError::parse(field, "missing field"))?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| CrnError::parse(field, "expected a nonnegative integer index"))
}

fn reject_unknown(map: &Map<String, Value>, allowed: &[&str], prefix: &str) -> Result<()> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(CrnError::parse(format!("{prefix}{key}"), "unknown field"));
        }
    }
    Ok(())
}

pub fn parse_network(text: &str) -> Result<MassActionSystem> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| CrnError::parse("$", e.to_string()))?;
    let top = object(&root, "$")?;
    reject_unknown(top, &["dimension", "vertices", "edges"], "")?;

    let dimension = top
        .get("dimension")
        .ok_or_else(|| CrnError::parse("dimension", "missing field"))?
        .as_u64()
        .filter(|&d| d > 0)
        .ok_or_else(|| CrnError::parse("dimension", "expected a positive integer"))?
        as usize;

    let mut vertices = Vec::new();
    for (i, v) in array(top.get("vertices"), "vertices")?.iter().enumerate() {
        let field = format!("vertices[{i}]");
        let coords = v
            .as_array()
            .ok_or_else(|| CrnError::parse(&field, "expected an array of coordinates"))?;
        if coords.len() != dimension {
            return Err(CrnError::parse(
                &field,
                format!("has {} coordinates, expected {dimension}", coords.len()),
            ));
        }
        let point = coords
            .iter()
            .enumerate()
            .map(|(c, x)| parse_number(x, &format!("{field}[{c}]")))
            .collect::<Result<Vec<_>>>()?;
        if let Some(j) = vertices.iter().position(|p: &Vec<f64>| *p == point) {
            return Err(CrnError::parse(&field, format!("duplicates vertices[{j}]")));
        }
        vertices.push(point);
    }

    let mut edges = Vec::new();
    let mut rates = Vec::new();
    for (k, e) in array(top.get("edges"), "edges")?.iter().enumerate() {
        let field = format!("edges[{k}]");
        let obj = object(e, &field)?;
        reject_unknown(obj, &["from", "to", "rate"], &format!("{field}."))?;
        let from = index(obj.get("from"), &format!("{field}.from"))?;
        let to = index(obj.get("to"), &format!("{field}.to"))?;
        let rate_field = format!("{field}.rate");
        let rate = parse_number(
            obj.get("rate")
                .ok_or_else(|| CrnError::parse(&rate_field, "missing field"))?,
            &rate_field,
        )?;
        if rate <= 0.0 {
            return Err(CrnError::parse(rate_field, "rate must be positive"));
        }
        for (name, idx) in [("from", from), ("to", to)] {
            if idx >= vertices.len() {
                return Err(CrnError::parse(
                    format!("{field}.{name}"),
                    format!("index {idx} out of range"),
                ));
            }
        }
        if from == to {
            return Err(CrnError::parse(&field, "self-loop"));
        }
        if edges.contains(&(from, to)) {
            return Err(CrnError::parse(&field, "duplicate edge"));
        }
        edges.push((from, to));
        rates.push(rate);
    }

    let network = Network::new(dimension, vertices, edges)
        .map_err(|e| CrnError::parse("$", e.to_string()))?;
    MassActionSystem::new(network, rates)
}

#[derive(Serialize)]
struct EdgeOut {
    from: usize,
    to: usize,
    rate: f64,
}

#[derive(Serialize)]
struct NetworkOut<'a> {
    dimension: usize,
    vertices: &'a [Vec<f64>],
    edges: Vec<EdgeOut>,
}

pub fn serialize_network(sys: &MassActionSystem) -> String {
    let g = sys.network();
    let out = NetworkOut {
        dimension: g.dimension(),
        vertices: g.vertices(),
        edges: g
            .edges()
            .iter()
            .zip(sys.rates())
            .map(|(&(from, to), &rate)| EdgeOut { from, to, rate })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&out).expect("network serialization is infallible");
    s.push('\n');
    s
}
