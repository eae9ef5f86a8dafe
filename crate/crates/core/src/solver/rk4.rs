use std::time::Instant;

use super::msdtm::START_CONSISTENCY;
use super::{check_blowup, output_grid, snap, SimResult, SimStats, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::model::{
    alg_jacobian, residual_alg, residual_diff, AlgVec, DfigParams, InputVec, StateVec, N_ALG,
    N_STATES,
};
use crate::scenario::Scenario;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Chord-Newton solver for the algebraic variables with the states held.
///
/// The Jacobian factorization is kept between calls and refreshed only when
/// the iteration contracts slowly or stalls.
#[derive(Debug, Clone, Default)]
pub struct AlgebraicNewton {
    lu: Option<Lu>,
    factorizations: usize,
}

impl AlgebraicNewton {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    /// Forgets the stored factorization.
    pub fn reset(&mut self) {
        self.lu = None;
    }

    #[allow(clippy::too_many_arguments)]
    pub fn solve(
        &mut self,
        p: &DfigParams,
        x: &StateVec,
        guess: &AlgVec,
        input: &InputVec,
        tol: f64,
        max_iter: usize,
        time: f64,
    ) -> Result<AlgVec> {
        let mut a = *guess;
        let mut r = residual_alg(p, x, &a, input)?;
        let mut norm = max_abs(&r);
        let mut iterations = 0;
        let mut fresh = false;
        while norm > tol {
            if iterations >= max_iter {
                return Err(Error::ReferenceSolver {
                    time,
                    iterations,
                    residual: norm,
                });
            }
            if self.lu.is_none() {
                self.lu = Some(Lu::factor(&alg_jacobian(p, x, &a, input)).map_err(|_| {
                    Error::ReferenceSolver {
                        time,
                        iterations,
                        residual: norm,
                    }
                })?);
                self.factorizations += 1;
                fresh = true;
            }
            let lu = self.lu.as_ref().expect("factorization present");
            lu.solve_in_place(&mut r);
            for i in 0..N_ALG {
                a[i] -= r[i];
            }
            iterations += 1;
            r = residual_alg(p, x, &a, input)?;
            let new_norm = max_abs(&r);
            if !(new_norm < 0.1 * norm) && !fresh {
                self.lu = None;
            }
            fresh = false;
            norm = new_norm;
        }
        Ok(a)
    }
}

/// Classical RK-4 reference over the scenario horizon.
pub fn rk4_run(
    params: &DfigParams,
    scenario: &Scenario,
    x0: &StateVec,
    a0: &AlgVec,
    cfg: &SolverConfig,
) -> Result<SimResult> {
    rk4_run_span(params, scenario, x0, a0, 0.0, cfg.horizon(scenario), cfg)
}

fn axpy(x: &StateVec, h: f64, k: &[f64; N_STATES]) -> StateVec {
    let mut y = *x;
    for i in 0..N_STATES {
        y[i] += h * k[i];
    }
    y
}

/// Classical four-stage Runge-Kutta on the 14 states over
/// `[t_start, t_end]`, with the algebraic variables re-solved by Newton at
/// every stage. Steps of `cfg.rk4_step` are shortened to land exactly on
/// output samples, events and the horizon.
pub fn rk4_run_span(
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

    let mut newton = AlgebraicNewton::new();
    let (tol, max_iter) = (cfg.newton_tol, cfg.newton_max_iter);
    let (mut x, mut a) = (*x0, *a0);
    let mut t = t_start;
    let mut steps = 0usize;
    let h_nom = cfg.rk4_step;

    while t < t_end - 1e-9 * h_nom {
        let now = scenario.input_at(t);
        if now != input {
            input = now;
            newton.reset();
            a = newton.solve(params, &x, &a, &input, tol, max_iter, t)?;
        }
        let mut limit = scenario
            .next_event_after(t)
            .map_or(t_end, |te| te.min(t_end));
        if next_out < grid.len() {
            limit = limit.min(grid[next_out]);
        }
        let t1 = snap(t + h_nom, limit, h_nom).min(limit);
        let h = t1 - t;

        let k1 = residual_diff(params, &x, &a, &input)?;
        let x2 = axpy(&x, 0.5 * h, &k1);
        let a2 = newton.solve(params, &x2, &a, &input, tol, max_iter, t + 0.5 * h)?;
        let k2 = residual_diff(params, &x2, &a2, &input)?;
        let x3 = axpy(&x, 0.5 * h, &k2);
        let a3 = newton.solve(params, &x3, &a2, &input, tol, max_iter, t + 0.5 * h)?;
        let k3 = residual_diff(params, &x3, &a3, &input)?;
        let x4 = axpy(&x, h, &k3);
        let a4 = newton.solve(params, &x4, &a3, &input, tol, max_iter, t1)?;
        let k4 = residual_diff(params, &x4, &a4, &input)?;
        for i in 0..N_STATES {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        steps += 1;
        check_blowup(cfg, &x, steps, t1)?;
        a = newton.solve(params, &x, &a4, &input, tol, max_iter, t1)?;
        t = t1;

        if next_out < grid.len() && t1 >= grid[next_out] - 1e-9 * h_nom {
            worst = worst.max(max_abs(&residual_alg(params, &x, &a, &input)?));
            times.push(grid[next_out]);
            states.push(x);
            algs.push(a);
            next_out += 1;
        }
    }

    Ok(SimResult {
        times,
        states,
        algs,
        stats: SimStats {
            windows_taken: steps,
            wall_time: clock.elapsed().as_secs_f64(),
            max_alg_residual: worst,
        },
    })
}
