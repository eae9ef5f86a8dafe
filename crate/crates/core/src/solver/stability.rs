use super::{msdtm_run, rk4_run, SimResult, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{AlgVec, DfigParams, StateVec};
use crate::scenario::Scenario;

/// Outcome of a step-length sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSearch {
    /// Largest step before the first unstable one, `None` if the smallest
    /// step already failed.
    pub max_stable_step: Option<f64>,
    /// First step judged unstable, `None` if the whole grid was stable.
    pub first_unstable: Option<f64>,
    /// Every step tried, with its verdict.
    pub tried: Vec<(f64, bool)>,
}

/// Instability threshold: ten times the initial state magnitude.
pub fn blowup_bound(x0: &StateVec) -> f64 {
    10.0 * x0.norm_inf()
}

/// Walks an ascending step grid and stops at the first step for which
/// `stable` returns `false`.
pub fn max_stable_step_by(grid: &[f64], mut stable: impl FnMut(f64) -> bool) -> Result<StepSearch> {
    if grid.is_empty() {
        return Err(Error::Precondition("step grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > 0.0) {
        return Err(Error::Precondition(
            "step grid must be positive and strictly ascending".into(),
        ));
    }
    let mut search = StepSearch {
        max_stable_step: None,
        first_unstable: None,
        tried: Vec::new(),
    };
    for &h in grid {
        let ok = stable(h);
        search.tried.push((h, ok));
        if !ok {
            search.first_unstable = Some(h);
            break;
        }
        search.max_stable_step = Some(h);
    }
    Ok(search)
}

fn bounded(run: Result<SimResult>, bound: f64) -> bool {
    match run {
        Ok(r) => r.states.iter().all(|x| x.is_finite() && x.norm_inf() <= bound),
        Err(_) => false,
    }
}

/// Step-length sweep of the transform method on `scenario`.
pub fn msdtm_max_stable_step(
    params: &DfigParams,
    scenario: &Scenario,
    x0: &StateVec,
    a0: &AlgVec,
    cfg: &SolverConfig,
    grid: &[f64],
) -> Result<StepSearch> {
    let bound = blowup_bound(x0);
    max_stable_step_by(grid, |h| {
        let c = SolverConfig {
            h,
            output_dt: h,
            blowup: Some(bound),
            ..cfg.clone()
        };
        bounded(msdtm_run(params, scenario, x0, a0, &c), bound)
    })
}

/// Step-length sweep of the RK-4 reference on `scenario`.
pub fn rk4_max_stable_step(
    params: &DfigParams,
    scenario: &Scenario,
    x0: &StateVec,
    a0: &AlgVec,
    cfg: &SolverConfig,
    grid: &[f64],
) -> Result<StepSearch> {
    let bound = blowup_bound(x0);
    max_stable_step_by(grid, |h| {
        let c = SolverConfig {
            rk4_step: h,
            output_dt: h,
            blowup: Some(bound),
            ..cfg.clone()
        };
        bounded(rk4_run(params, scenario, x0, a0, &c), bound)
    })
}

/// Whether `steps` RK-4 steps of length `h` on `dy/dt = -λ·y`, `y(0) = 1`,
/// stay within ten times the initial magnitude.
pub fn rk4_linear_stable(lambda: f64, h: f64, steps: usize) -> bool {
    let f = |y: f64| -lambda * y;
    let mut y = 1.0_f64;
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(y.abs() <= 10.0) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_below_the_limit_returns_its_maximum() {
        let s = max_stable_step_by(&[0.1, 0.2, 0.3], |_| true).unwrap();
        assert_eq!(s.max_stable_step, Some(0.3));
        assert_eq!(s.first_unstable, None);
    }

    #[test]
    fn everything_unstable() {
        let s = max_stable_step_by(&[0.1, 0.2], |_| false).unwrap();
        assert_eq!(s.max_stable_step, None);
        assert_eq!(s.first_unstable, Some(0.1));
    }

    #[test]
    fn linear_rk4_bound() {
        let lambda = 50.0;
        let grid: Vec<f64> = (1..=200).map(|i| i as f64 * 0.0005).collect();
        let s = max_stable_step_by(&grid, |h| rk4_linear_stable(lambda, h, 5000)).unwrap();
        let bound = 2.785293563405282 / lambda;
        assert!((s.max_stable_step.unwrap() - bound).abs() <= 0.0005 + 1e-12);
    }

    #[test]
    fn rejects_unsorted_grid() {
        assert!(max_stable_step_by(&[0.2, 0.1], |_| true).is_err());
        assert!(max_stable_step_by(&[], |_| true).is_err());
    }
}
