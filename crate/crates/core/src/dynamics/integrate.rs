use serde::{Deserialize, Serialize};

use super::VectorField;
use crate::error::{CrnError, Result};
use crate::network::MassActionSystem;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Integration stops once any component falls below this.
    pub floor: f64,
    /// Largest step; `None` leaves it unbounded.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-12,
            floor: 1e-12,
            max_step: None,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryStatus {
    Completed,
    LeftPositiveOrthant,
    /// Step size underflow or the step budget ran out.
    StepFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("a trajectory holds its initial state")
    }
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) integration of `ẋ = F(x)` on `[0, t_end]`.
///
/// Every accepted step is recorded. A step whose stages leave the positive
/// orthant is retried with a smaller step; if that cannot be avoided, or an
/// accepted state drops below `opts.floor`, the run ends with
/// [`TrajectoryStatus::LeftPositiveOrthant`].
pub fn integrate(sys: &MassActionSystem, x0: &[f64], t_end: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    if x0.len() != sys.dimension() {
        return Err(CrnError::DimensionMismatch {
            expected: sys.dimension(),
            found: x0.len(),
        });
    }
    if x0.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(CrnError::Domain("initial state must be strictly positive".into()));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(CrnError::Domain(format!("t_end = {t_end} must be finite and nonnegative")));
    }
    let field = VectorField::new(sys);
    let n = x0.len();
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    if t_end == 0.0 {
        return Ok(Trajectory {
            times,
            states,
            status: TrajectoryStatus::Completed,
        });
    }

    let max_step = opts.max_step.unwrap_or(f64::INFINITY).min(t_end);
    let mut t = 0.0;
    let mut x = x0.to_vec();
    let mut k1 = field.eval(&x);
    let f_norm = k1.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let x_norm = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut h = if f_norm > 0.0 { 0.01 * x_norm / f_norm } else { t_end };
    h = h.clamp(1e-12 * t_end.max(1.0), max_step);

    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut steps = 0usize;
    let status = loop {
        if t >= t_end {
            break TrajectoryStatus::Completed;
        }
        if steps >= opts.max_steps {
            break TrajectoryStatus::StepFailure;
        }
        let h_min = 1e-14 * t.abs().max(1.0);
        if h < h_min {
            break if states.last().unwrap().iter().any(|&v| v < 1e3 * opts.floor) {
                TrajectoryStatus::LeftPositiveOrthant
            } else {
                TrajectoryStatus::StepFailure
            };
        }
        let h_step = h.min(t_end - t);
        k[0].clone_from(&k1);
        let mut in_domain = true;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in A[s].iter().enumerate().take(s) {
                    acc += a * k[j][i];
                }
                stage[i] = x[i] + h_step * acc;
            }
            if stage.iter().any(|&v| !(v > 0.0)) {
                in_domain = false;
                break;
            }
            k[s] = field.eval(&stage);
        }
        if !in_domain {
            h = 0.25 * h_step;
            continue;
        }
        // Stage 7 is evaluated at the fifth-order solution.
        let x_new = stage.clone();
        let mut err = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for s in 0..7 {
                e += (B5[s] - B4[s]) * k[s][i];
            }
            let sc = opts.atol + opts.rtol * x[i].abs().max(x_new[i].abs());
            err += (h_step * e / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            h = 0.25 * h_step;
            continue;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            steps += 1;
            t = if h_step == t_end - t { t_end } else { t + h_step };
            x = x_new;
            k1.clone_from(&k[6]);
            if x.iter().any(|&v| v < opts.floor) {
                break TrajectoryStatus::LeftPositiveOrthant;
            }
            times.push(t);
            states.push(x.clone());
            h = (h_step * factor).min(max_step);
        } else {
            h = h_step * factor.min(1.0);
        }
    };
    Ok(Trajectory { times, states, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::MassActionSystem;

    #[test]
    fn exponential_decay() {
        // 1 → 0 at rate 1: x' = −x
        let sys = MassActionSystem::from_parts(1, vec![vec![1.0], vec![0.0]], &[(0, 1, 1.0)]).unwrap();
        let traj = integrate(&sys, &[1.0], 5.0, &IntegrateOptions::default()).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::Completed);
        assert_eq!(*traj.times.last().unwrap(), 5.0);
        assert!((traj.last()[0] - (-5.0f64).exp()).abs() < 1e-9);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_horizon() {
        let sys = MassActionSystem::from_parts(1, vec![vec![1.0], vec![0.0]], &[(0, 1, 1.0)]).unwrap();
        let traj = integrate(&sys, &[2.0], 0.0, &IntegrateOptions::default()).unwrap();
        assert_eq!(traj.states, vec![vec![2.0]]);
    }

    #[test]
    fn leaves_orthant() {
        // 0 → −1 at rate 1: x' = −1 hits zero at t = 1
        let sys = MassActionSystem::from_parts(1, vec![vec![0.0], vec![-1.0]], &[(0, 1, 1.0)]).unwrap();
        let traj = integrate(&sys, &[1.0], 3.0, &IntegrateOptions::default()).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::LeftPositiveOrthant);
        assert!(traj.states.iter().all(|x| x[0] > 0.0));
        assert!(*traj.times.last().unwrap() < 1.0 + 1e-9);
    }
}
