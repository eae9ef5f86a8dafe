use std::time::Instant;

use super::{check_blowup, output_grid, snap, SimResult, SimStats, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{generate_window, residual_alg, solve_algebraic, AlgVec, DfigParams, StateVec};
use crate::scenario::Scenario;

/// Largest algebraic residual accepted for the starting point.
pub(crate) const START_CONSISTENCY: f64 = 1e-8;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn in_window(e: Error, window: usize, time: f64) -> Error {
    match e {
        e @ (Error::StructuralSingularity { .. } | Error::Solver { .. }) => e,
        other => Error::Solver {
            window,
            time,
            reason: other.to_string(),
        },
    }
}

/// Multi-step differential transform simulation over the scenario horizon.
pub fn msdtm_run(
    params: &DfigParams,
    scenario: &Scenario,
    x0: &StateVec,
    a0: &AlgVec,
    cfg: &SolverConfig,
) -> Result<SimResult> {
    msdtm_run_span(params, scenario, x0, a0, 0.0, cfg.horizon(scenario), cfg)
}

/// Multi-step differential transform simulation over `[t_start, t_end]`.
///
/// Windows have length `cfg.h`, counted from the start of the run or the
/// most recent event, and are shortened so that no window crosses an
/// event or the horizon. Each window's series is seeded with the previous
/// window's endpoint. When the input changes at a window start, the
/// algebraic variables are re-solved by Newton with the states held.
pub fn msdtm_run_span(
    params: &DfigParams,
    scenario: &Scenario,
    x0: &StateVec,
    a0: &AlgVec,
    t_start: f64,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<SimResult> {
    cfg.validate()?;
    params.validate()?;
    if !(t_end > t_start) {
        return Err(Error::Precondition(format!(
            "empty time span [{t_start}, {t_end}]"
        )));
    }
    let clock = Instant::now();
    let mut input = scenario.input_before(t_start);
    if t_start == 0.0 {
        input = scenario.input_at(0.0);
    }
    let start_residual = max_abs(&residual_alg(params, x0, a0, &input)?);
    if !(start_residual <= START_CONSISTENCY) {
        return Err(Error::Precondition(format!(
            "initial point is not consistent: algebraic residual {start_residual:e}"
        )));
    }

    let grid = output_grid(t_start, t_end, cfg.output_dt);
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    let mut algs = Vec::with_capacity(grid.len());
    let mut worst = start_residual;
    times.push(grid[0]);
    states.push(*x0);
    algs.push(*a0);
    let mut next_out = 1;

    let (mut x, mut a) = (*x0, *a0);
    let mut t0 = t_start;
    let mut seg_start = t_start;
    let mut seg_index = 0usize;
    let mut windows = 0usize;
    let scale = cfg.h;

    while t0 < t_end - 1e-9 * scale {
        let now = scenario.input_at(t0);
        if now != input {
            input = now;
            a = solve_algebraic(params, &x, &a, &input, cfg.newton_tol, cfg.newton_max_iter)
                .map_err(|e| in_window(e, windows, t0))?
                .alg;
        }
        let limit = scenario
            .next_event_after(t0)
            .map_or(t_end, |te| te.min(t_end));
        let nominal = seg_start + (seg_index + 1) as f64 * cfg.h;
        let t1 = snap(nominal, limit, scale).min(limit);

        let series = generate_window(params, &input, &x, &a, t0, cfg.order, cfg.cond_max)
            .map_err(|e| in_window(e, windows, t0))?;
        if !series.is_finite() {
            return Err(Error::Solver {
                window: windows,
                time: t0,
                reason: "non-finite series coefficient".into(),
            });
        }
        while next_out < grid.len() && grid[next_out] <= t1 + 1e-9 * scale {
            let t = grid[next_out].min(t1);
            let (xs, as_) = (series.state_at(t), series.alg_at(t));
            let g = residual_alg(params, &xs, &as_, &input).map_err(|e| in_window(e, windows, t))?;
            worst = worst.max(max_abs(&g));
            times.push(grid[next_out]);
            states.push(xs);
            algs.push(as_);
            next_out += 1;
        }
        x = series.state_at(t1);
        a = series.alg_at(t1);
        windows += 1;
        check_blowup(cfg, &x, windows, t1)?;
        if t1 == limit {
            seg_start = t1;
            seg_index = 0;
        } else {
            seg_index += 1;
        }
        t0 = t1;
    }

    Ok(SimResult {
        times,
        states,
        algs,
        stats: SimStats {
            windows_taken: windows,
            wall_time: clock.elapsed().as_secs_f64(),
            max_alg_residual: worst,
        },
    })
}
