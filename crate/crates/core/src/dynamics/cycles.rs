use serde::{Deserialize, Serialize};

use super::{integrate, IntegrateOptions, TrajectoryStatus, VectorField};
use crate::error::Result;
use crate::linalg::{self, Matrix};
use crate::network::MassActionSystem;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitCycleOptions {
    pub t_end: f64,
    pub integrate: IntegrateOptions,
    /// Successive section returns closer than this count as repeating.
    pub return_tol: f64,
    /// Minimum spread of the analysed orbit for a cycle verdict.
    pub min_diameter: f64,
    /// Relative residual below which the end state counts as stationary.
    pub residual_tol: f64,
    /// Allowed relative drift over the last tenth of the run.
    pub variation_tol: f64,
}

impl Default for LimitCycleOptions {
    fn default() -> Self {
        Self {
            t_end: 2000.0,
            integrate: IntegrateOptions {
                rtol: 1e-10,
                atol: 1e-13,
                max_step: Some(1.0),
                ..IntegrateOptions::default()
            },
            return_tol: 1e-3,
            min_diameter: 1e-2,
            residual_tol: 1e-8,
            variation_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitCycleVerdict {
    CycleSuspected,
    ConvergenceSuspected,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCycleReport {
    pub verdict: LimitCycleVerdict,
    /// Points where the orbit crosses the section, in time order.
    pub returns: Vec<Vec<f64>>,
    /// Distances between successive returns.
    pub return_distances: Vec<f64>,
    /// Bounding-box diagonal of the second half of the run.
    pub diameter: f64,
    pub final_state: Vec<f64>,
    /// `‖F‖∞ / scale` at the final state.
    pub final_residual: f64,
    pub status: TrajectoryStatus,
}

fn hermite(x0: &[f64], x1: &[f64], f0: &[f64], f1: &[f64], h: f64, s: f64) -> Vec<f64> {
    let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
    let h10 = s.powi(3) - 2.0 * s * s + s;
    let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
    let h11 = s.powi(3) - s * s;
    (0..x0.len())
        .map(|i| h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i])
        .collect()
}

/// Integrates from `x0` and classifies the long-run behaviour.
///
/// The end state is tested for stationarity first. Otherwise the second half
/// of the orbit is cut by the hyperplane through its mean, normal to its
/// principal axis, and the upward crossings are compared.
pub fn detect_limit_cycle(sys: &MassActionSystem, x0: &[f64], opts: &LimitCycleOptions) -> Result<LimitCycleReport> {
    let traj = integrate(sys, x0, opts.t_end, &opts.integrate)?;
    let field = VectorField::new(sys);
    let n = sys.dimension();
    let final_state = traj.last().to_vec();
    let final_residual = linalg::norm_inf(&field.eval(&final_state)) / field.scale(&final_state);

    let half = traj.times.partition_point(|&t| t < 0.5 * opts.t_end);
    let tail = &traj.states[half..];
    let diameter = (0..n)
        .map(|i| {
            let (lo, hi) = tail
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x[i]), hi.max(x[i])));
            (hi - lo).powi(2)
        })
        .sum::<f64>()
        .sqrt();

    let mut report = LimitCycleReport {
        verdict: LimitCycleVerdict::Inconclusive,
        returns: Vec::new(),
        return_distances: Vec::new(),
        diameter,
        final_state: final_state.clone(),
        final_residual,
        status: traj.status,
    };
    if traj.status != TrajectoryStatus::Completed || tail.len() < 3 {
        return Ok(report);
    }

    let last_tenth = traj.times.partition_point(|&t| t < 0.9 * opts.t_end);
    let variation = traj.states[last_tenth..]
        .iter()
        .map(|x| linalg::norm_inf(&linalg::sub(x, &final_state)))
        .fold(0.0, f64::max)
        / (1.0 + linalg::norm_inf(&final_state));
    if final_residual < opts.residual_tol && variation < opts.variation_tol {
        report.verdict = LimitCycleVerdict::ConvergenceSuspected;
        return Ok(report);
    }

    let m = tail.len() as f64;
    let mean: Vec<f64> = (0..n).map(|i| tail.iter().map(|x| x[i]).sum::<f64>() / m).collect();
    let mut cov = Matrix::zeros(n, n);
    for x in tail {
        let d = linalg::sub(x, &mean);
        for r in 0..n {
            for c in 0..n {
                cov[(r, c)] += d[r] * d[c] / m;
            }
        }
    }
    let eig = cov.symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let normal: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    let side = |x: &[f64]| linalg::dot(&linalg::sub(x, &mean), &normal);

    let times = &traj.times[half..];
    for w in 0..tail.len() - 1 {
        let (a, b) = (&tail[w], &tail[w + 1]);
        let (sa, sb) = (side(a), side(b));
        if !(sa < 0.0 && sb >= 0.0) {
            continue;
        }
        let h = times[w + 1] - times[w];
        let (fa, fb) = (field.eval(a), field.eval(b));
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if side(&hermite(a, b, &fa, &fb, h, mid)) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        report.returns.push(hermite(a, b, &fa, &fb, h, 0.5 * (lo + hi)));
    }
    report.return_distances = report
        .returns
        .windows(2)
        .map(|p| linalg::norm2(&linalg::sub(&p[1], &p[0])))
        .collect();
    let d = &report.return_distances;
    if report.returns.len() >= 3
        && d[d.len() - 2..].iter().all(|&v| v < opts.return_tol)
        && diameter > opts.min_diameter
    {
        report.verdict = LimitCycleVerdict::CycleSuspected;
    }
    Ok(report)
}
