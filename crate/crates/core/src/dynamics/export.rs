use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Trajectory, VectorField};
use crate::error::{CrnError, Result};
use crate::network::MassActionSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

/// CSV with header `t,x1,…,xn`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.states.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for i in 1..=n {
        write!(out, ",x{i}").unwrap();
    }
    out.push('\n');
    for (t, x) in traj.times.iter().zip(&traj.states) {
        write!(out, "{t}").unwrap();
        for v in x {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Samples `F` on a regular `grid`-per-axis lattice of the box `window`.
/// Lattice points on or outside the orthant boundary are skipped.
pub fn vector_field_grid(sys: &MassActionSystem, window: &[(f64, f64)], grid: usize) -> Result<Vec<FieldSample>> {
    let n = sys.dimension();
    if window.len() != n {
        return Err(CrnError::DimensionMismatch {
            expected: n,
            found: window.len(),
        });
    }
    if grid < 2 {
        return Err(CrnError::Domain("grid needs at least two points per axis".into()));
    }
    if window.iter().any(|&(lo, hi)| !(lo < hi)) {
        return Err(CrnError::Domain("window bounds must satisfy lo < hi".into()));
    }
    let field = VectorField::new(sys);
    let mut samples = Vec::new();
    let total = grid.pow(n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let x: Vec<f64> = window
            .iter()
            .map(|&(lo, hi)| {
                let k = rem % grid;
                rem /= grid;
                lo + (hi - lo) * k as f64 / (grid - 1) as f64
            })
            .collect();
        if x.iter().all(|&v| v > 0.0) {
            samples.push(FieldSample { f: field.eval(&x), x });
        }
    }
    Ok(samples)
}

/// CSV with header `x1,…,xn,f1,…,fn`.
pub fn vector_field_csv(samples: &[FieldSample]) -> String {
    let n = samples.first().map_or(0, |s| s.x.len());
    let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain((1..=n).map(|i| format!("f{i}"))).collect();
    let mut out = header.join(",");
    out.push('\n');
    for s in samples {
        let row: Vec<String> = s.x.iter().chain(&s.f).map(f64::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Planar phase portrait: normalized field arrows plus trajectories.
pub fn portrait_svg(
    sys: &MassActionSystem,
    window: &[(f64, f64)],
    grid: usize,
    trajectories: &[Trajectory],
) -> Result<String> {
    if sys.dimension() != 2 {
        return Err(CrnError::Unsupported("phase portraits are drawn for two species only".into()));
    }
    let samples = vector_field_grid(sys, window, grid)?;
    let size = 480.0;
    let pad = 20.0;
    let (xl, xh) = window[0];
    let (yl, yh) = window[1];
    let px = |x: f64| pad + (x - xl) / (xh - xl) * size;
    let py = |y: f64| pad + (yh - y) / (yh - yl) * size;
    let arrow = 0.4 * size / (grid - 1) as f64;

    let mut svg = String::new();
    let full = size + 2.0 * pad;
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" viewBox="0 0 {full} {full}">"#
    )
    .unwrap();
    writeln!(
        svg,
        r##"<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="#888"/>"##
    )
    .unwrap();
    for s in &samples {
        let norm = (s.f[0] * s.f[0] + s.f[1] * s.f[1]).sqrt();
        if norm == 0.0 {
            continue;
        }
        let (x0, y0) = (px(s.x[0]), py(s.x[1]));
        let (x1, y1) = (x0 + arrow * s.f[0] / norm, y0 - arrow * s.f[1] / norm);
        writeln!(
            svg,
            r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="#4a6fa5" stroke-width="1"/>"##
        )
        .unwrap();
        writeln!(svg, r##"<circle cx="{x1:.2}" cy="{y1:.2}" r="1.5" fill="#4a6fa5"/>"##).unwrap();
    }
    for traj in trajectories {
        let points: Vec<String> = traj
            .states
            .iter()
            .filter(|x| x[0] >= xl && x[0] <= xh && x[1] >= yl && x[1] <= yh)
            .map(|x| format!("{:.2},{:.2}", px(x[0]), py(x[1])))
            .collect();
        if points.len() > 1 {
            writeln!(
                svg,
                r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="1.2"/>"##,
                points.join(" ")
            )
            .unwrap();
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TrajectoryStatus;
    use crate::fixtures;

    #[test]
    fn csv_headers() {
        let traj = Trajectory {
            times: vec![0.0, 0.5],
            states: vec![vec![1.0, 2.0], vec![1.5, 2.5]],
            status: TrajectoryStatus::Completed,
        };
        assert_eq!(trajectory_csv(&traj), "t,x1,x2\n0,1,2\n0.5,1.5,2.5\n");
        let samples = vector_field_grid(&fixtures::system("fig1"), &[(0.0, 2.0), (0.0, 2.0)], 3).unwrap();
        assert_eq!(samples.len(), 4);
        let csv = vector_field_csv(&samples);
        assert!(csv.starts_with("x1,x2,f1,f2\n1,1,0,0\n"));
    }

    #[test]
    fn svg_is_planar_only() {
        let sys = fixtures::system("fig1");
        let svg = portrait_svg(&sys, &[(0.1, 2.0), (0.1, 2.0)], 5, &[]).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(portrait_svg(&fixtures::system("k3_line"), &[(0.1, 2.0)], 5, &[]).is_err());
    }
}
