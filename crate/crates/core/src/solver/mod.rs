//! Time-domain integrators: the multi-step differential transform driver
//! and the RK-4 + Newton reference.

mod msdtm;
mod rk4;
mod stability;

pub use msdtm::{msdtm_run, msdtm_run_span};
pub use rk4::{rk4_run, rk4_run_span, AlgebraicNewton};
pub use stability::{
    blowup_bound, max_stable_step_by, msdtm_max_stable_step,
    rk4_max_stable_step, rk4_linear_stable, StepSearch,
};

use crate::error::{Error, Result};
use crate::model::{residual_alg, AlgVec, DfigParams, InputVec, StateVec};
use crate::scenario::Scenario;

/// Integration controls shared by both methods.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Truncation order `NL` of the series in each window.
    pub order: usize,
    /// Window length of the transform method (s).
    pub h: f64,
    /// Horizon override; the scenario's own horizon is used when `None`.
    pub t_end: Option<f64>,
    /// Sampling interval of the returned trajectory (s).
    pub output_dt: f64,
    /// Ceiling on the condition estimate of the per-window algebraic matrix.
    pub cond_max: f64,
    /// Convergence threshold (max-norm of the algebraic residual) of every
    /// Newton solve.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Step length of the RK-4 reference (s).
    pub rk4_step: f64,
    /// Abort with a solver error once any state magnitude exceeds this.
    pub blowup: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            order: 8,
            h: 0.01,
            t_end: None,
            output_dt: 0.01,
            cond_max: 1e10,
            newton_tol: 1e-13,
            newton_max_iter: 30,
            rk4_step: 1e-3,
            blowup: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| {
            Err(Error::InvalidParameter {
                field: field.to_string(),
                reason,
            })
        };
        if self.order < 2 || self.order > crate::series::MAX_ORDER {
            return bad(
                "order",
                format!("must lie in 2..={}, got {}", crate::series::MAX_ORDER, self.order),
            );
        }
        for (field, v) in [
            ("h", self.h),
            ("output_dt", self.output_dt),
            ("cond_max", self.cond_max),
            ("newton_tol", self.newton_tol),
            ("rk4_step", self.rk4_step),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(field, format!("must be positive and finite, got {v}"));
            }
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0) || !t.is_finite() {
                return bad("t_end", format!("must be positive and finite, got {t}"));
            }
            if self.h > t {
                return bad("h", format!("window {} exceeds the horizon {t}", self.h));
            }
        }
        if self.newton_max_iter == 0 {
            return bad("newton_max_iter", "must be at least 1".into());
        }
        Ok(())
    }

    pub fn horizon(&self, scenario: &Scenario) -> f64 {
        self.t_end.unwrap_or(scenario.t_end())
    }
}

/// Run statistics. One window of the transform method, or one RK-4 step,
/// counts as one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimStats {
    pub windows_taken: usize,
    pub wall_time: f64,
    pub max_alg_residual: f64,
}

/// A sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub times: Vec<f64>,
    pub states: Vec<StateVec>,
    pub algs: Vec<AlgVec>,
    pub stats: SimStats,
}

impl SimResult {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Final sample.
    pub fn last(&self) -> Option<(f64, &StateVec, &AlgVec)> {
        let n = self.times.len().checked_sub(1)?;
        Some((self.times[n], &self.states[n], &self.algs[n]))
    }

    /// One state variable over time.
    pub fn state_column(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[i]).collect()
    }

    pub fn alg_column(&self, i: usize) -> Vec<f64> {
        self.algs.iter().map(|a| a[i]).collect()
    }
}

/// Output grid `j·output_dt` for `j = 0, 1, ...` up to `t_end`, with a
/// final sample at `t_end` if the grid does not land on it.
pub(crate) fn output_grid(t_start: f64, t_end: f64, output_dt: f64) -> Vec<f64> {
    let tol = 1e-9 * output_dt;
    let first = (t_start / output_dt - 1e-9).ceil().max(0.0) as usize;
    let mut grid = Vec::new();
    let mut j = first;
    loop {
        let t = j as f64 * output_dt;
        if t > t_end + tol {
            break;
        }
        grid.push(t.min(t_end));
        j += 1;
    }
    if grid.first().is_none_or(|&t| (t - t_start).abs() > tol) {
        grid.insert(0, t_start);
    }
    if grid.last().is_none_or(|&t| (t - t_end).abs() > tol) {
        grid.push(t_end);
    }
    grid
}

/// Snaps `t` onto `target` when they differ only by rounding.
pub(crate) fn snap(t: f64, target: f64, scale: f64) -> f64 {
    if (t - target).abs() <= 1e-9 * scale {
        target
    } else {
        t
    }
}

/// Max-norm of the algebraic residual along a trajectory, using the input
/// in effect just before each sample time.
pub fn max_alg_residual(
    params: &DfigParams,
    scenario: &Scenario,
    times: &[f64],
    states: &[StateVec],
    algs: &[AlgVec],
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for ((&t, x), a) in times.iter().zip(states).zip(algs) {
        let input: InputVec = scenario.input_before(t);
        let r = residual_alg(params, x, a, &input)?;
        worst = r.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    Ok(worst)
}

pub(crate) fn check_blowup(
    cfg: &SolverConfig,
    x: &StateVec,
    window: usize,
    time: f64,
) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Solver {
            window,
            time,
            reason: "non-finite state".into(),
        });
    }
    if let Some(bound) = cfg.blowup {
        if x.norm_inf() > bound {
            return Err(Error::Solver {
                window,
                time,
                reason: format!("state magnitude {} exceeds the blow-up bound {bound}", x.norm_inf()),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_both_ends() {
        let g = output_grid(0.0, 1.0, 0.25);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = output_grid(0.5, 1.0, 0.3);
        assert_eq!(g.first(), Some(&0.5));
        assert_eq!(g.last(), Some(&1.0));
        assert!((g[1] - 0.6).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let c = SolverConfig { order: 1, ..Default::default() };
        assert!(c.validate().is_err());
        let c = SolverConfig { h: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = SolverConfig { t_end: Some(0.001), ..Default::default() };
        assert!(c.validate().is_err());
    }
}
