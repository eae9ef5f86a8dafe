//! Scenario runs, the method benchmark and modal sweeps, with their files.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use super::config::ConfigBundle;
use super::output::{format_value, write_csv, write_summary};
use super::Scenario;
use crate::error::{Error, Result};
use crate::model::{equilibrium, AlgVec, DfigParams, StateVec, N_STATES, STATE_NAMES};
use crate::smallsignal::{sweep_eigs, Sweep};
use crate::solver::{
    msdtm_max_stable_step, msdtm_run, rk4_max_stable_step, rk4_run, SimResult, SolverConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dtm,
    Rk4,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dtm => "dtm",
            Method::Rk4 => "rk4",
        }
    }

    pub fn run(
        self,
        params: &DfigParams,
        scenario: &Scenario,
        x0: &StateVec,
        a0: &AlgVec,
        cfg: &SolverConfig,
    ) -> Result<SimResult> {
        match self {
            Method::Dtm => msdtm_run(params, scenario, x0, a0, cfg),
            Method::Rk4 => rk4_run(params, scenario, x0, a0, cfg),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dtm" => Ok(Method::Dtm),
            "rk4" => Ok(Method::Rk4),
            other => Err(Error::Config(format!("unknown method `{other}` (expected dtm or rk4)"))),
        }
    }
}

/// Equilibrium at the scenario's initial inputs.
pub fn initial_point(bundle: &ConfigBundle) -> Result<(StateVec, AlgVec)> {
    equilibrium(&bundle.params, &bundle.scenario.initial())
}

#[derive(Debug, Serialize)]
struct RunSummary {
    scenario: String,
    method: String,
    status: String,
    error: Option<String>,
    steps: usize,
    samples: usize,
    t_end: f64,
    wall_time_s: f64,
    max_alg_residual: f64,
    order: usize,
    h: f64,
    rk4_step: f64,
    output_dt: f64,
    csv: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub result: SimResult,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Simulates the bundle's scenario from its initial equilibrium and writes
/// `<scenario>_<method>.csv` and `<scenario>_<method>_summary.toml` into
/// `out_dir`. On failure only the summary is written, with
/// `status = "failed"`, and the error is returned.
pub fn run_scenario(bundle: &ConfigBundle, method: Method, out_dir: &Path) -> Result<RunOutput> {
    std::fs::create_dir_all(out_dir)?;
    let stem = format!("{}_{}", bundle.scenario.name(), method.name());
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let summary_path = out_dir.join(format!("{stem}_summary.toml"));
    let cfg = &bundle.solver;
    let mut summary = RunSummary {
        scenario: bundle.scenario.name().to_string(),
        method: method.name().to_string(),
        status: "failed".into(),
        error: None,
        steps: 0,
        samples: 0,
        t_end: cfg.horizon(&bundle.scenario),
        wall_time_s: 0.0,
        max_alg_residual: 0.0,
        order: cfg.order,
        h: cfg.h,
        rk4_step: cfg.rk4_step,
        output_dt: cfg.output_dt,
        csv: None,
    };
    let outcome = initial_point(bundle).and_then(|(x0, a0)| {
        method.run(&bundle.params, &bundle.scenario, &x0, &a0, cfg)
    });
    let result = match outcome {
        Ok(r) => r,
        Err(e) => {
            summary.error = Some(format!("scenario `{}`: {e}", bundle.scenario.name()));
            write_summary(&summary_path, &summary)?;
            return Err(e);
        }
    };
    write_csv(&csv_path, &result)?;
    summary.status = "ok".into();
    summary.steps = result.stats.windows_taken;
    summary.samples = result.len();
    summary.wall_time_s = result.stats.wall_time;
    summary.max_alg_residual = result.stats.max_alg_residual;
    summary.csv = csv_path.file_name().map(|n| n.to_string_lossy().into_owned());
    write_summary(&summary_path, &summary)?;
    Ok(RunOutput {
        result,
        csv_path,
        summary_path,
    })
}

/// Benchmark controls.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    /// Timed repetitions per method after one warm-up run (at least 5).
    pub repetitions: usize,
    /// Length of the accuracy comparison against the fine reference (s).
    pub accuracy_horizon: f64,
    /// RK-4 step of the fine reference.
    pub reference_step: f64,
    /// RK-4 steps considered when matching the transform method's accuracy.
    pub rk4_candidates: Vec<f64>,
    /// Ascending step grid of the stability search (both methods).
    pub stability_grid: Vec<f64>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            repetitions: 5,
            accuracy_horizon: 10.0,
            reference_step: 1e-4,
            rk4_candidates: vec![2e-4, 2.5e-4, 5e-4, 1e-3, 2e-3, 2.5e-3, 5e-3],
            stability_grid: (5..=20).map(|i| i as f64 * 1e-3).collect(),
        }
    }
}

impl BenchOptions {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 5 {
            return Err(Error::InvalidParameter {
                field: "repetitions".into(),
                reason: format!("at least 5 timed repetitions are required, got {}", self.repetitions),
            });
        }
        if self.rk4_candidates.is_empty() || self.stability_grid.is_empty() {
            return Err(Error::InvalidParameter {
                field: "rk4_candidates/stability_grid".into(),
                reason: "must not be empty".into(),
            });
        }
        Ok(())
    }
}

/// Per-method benchmark figures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub method: String,
    /// Window length or RK-4 step used for the timed runs.
    pub step: f64,
    pub steps: usize,
    /// Median wall time of the timed repetitions (s).
    pub wall_time: f64,
    pub wall_times: Vec<f64>,
    pub max_stable_step: Option<f64>,
    pub first_unstable_step: Option<f64>,
    /// Max state error against the fine reference over the accuracy horizon.
    pub error_vs_reference: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub scenario: String,
    pub t_end: f64,
    pub order: usize,
    pub repetitions: usize,
    pub accuracy_horizon: f64,
    pub reference_step: f64,
    pub methodology: String,
    pub dtm: MethodReport,
    pub rk4: MethodReport,
    /// Max absolute difference per state between the two timed runs.
    pub state_errors: Vec<(String, f64)>,
    pub csv: String,
}

fn max_state_error(a: &SimResult, b: &SimResult) -> Vec<f64> {
    let mut err = vec![0.0_f64; N_STATES];
    let mut j = 0;
    for (i, &t) in a.times.iter().enumerate() {
        while j < b.times.len() && b.times[j] < t - 1e-9 {
            j += 1;
        }
        if j < b.times.len() && (b.times[j] - t).abs() <= 1e-9 {
            for (k, e) in err.iter_mut().enumerate() {
                *e = e.max((a.states[i][k] - b.states[j][k]).abs());
            }
        }
    }
    err
}

fn overall(errors: &[f64]) -> f64 {
    errors.iter().fold(0.0, |m, &e| m.max(e))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn timed(
    method: Method,
    params: &DfigParams,
    scenario: &Scenario,
    x0: &StateVec,
    a0: &AlgVec,
    cfg: &SolverConfig,
    repetitions: usize,
) -> Result<(SimResult, Vec<f64>)> {
    let mut last = method.run(params, scenario, x0, a0, cfg)?;
    let mut times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let clock = Instant::now();
        last = method.run(params, scenario, x0, a0, cfg)?;
        times.push(clock.elapsed().as_secs_f64());
    }
    Ok((last, times))
}

/// Compares the two integrators on the bundle's scenario.
///
/// 1. A fine RK-4 reference is computed over the accuracy horizon.
/// 2. The transform method runs with the configured order and window; the
///    RK-4 step is the largest candidate whose error against the reference
///    does not exceed the transform method's.
/// 3. Both configurations run over the full horizon: one warm-up, then
///    `repetitions` timed runs; the median wall time is reported.
/// 4. Both methods go through the same step-length stability search.
///
/// Writes `bench_<scenario>.csv` (one row per method),
/// `bench_<scenario>_errors.csv` (per-state differences) and
/// `bench_<scenario>_summary.toml`.
pub fn run_benchmark(
    bundle: &ConfigBundle,
    opts: &BenchOptions,
    out_dir: &Path,
) -> Result<BenchReport> {
    opts.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let params = &bundle.params;
    let scenario = &bundle.scenario;
    let cfg = &bundle.solver;
    let (x0, a0) = initial_point(bundle)?;
    let t_end = cfg.horizon(scenario);

    let horizon = opts.accuracy_horizon.min(t_end);
    let short = SolverConfig {
        t_end: Some(horizon),
        ..cfg.clone()
    };
    let reference = rk4_run(
        params,
        scenario,
        &x0,
        &a0,
        &SolverConfig {
            rk4_step: opts.reference_step,
            ..short.clone()
        },
    )?;
    let dtm_short = msdtm_run(params, scenario, &x0, &a0, &short);
    let dtm_error = dtm_short
        .as_ref()
        .map(|r| overall(&max_state_error(r, &reference)))
        .unwrap_or(f64::INFINITY);

    let mut candidates = opts.rk4_candidates.clone();
    candidates.sort_by(|a, b| b.total_cmp(a));
    let mut rk4_step = *candidates.last().expect("non-empty candidates");
    let mut rk4_error = f64::INFINITY;
    for &h in &candidates {
        let run = rk4_run(params, scenario, &x0, &a0, &SolverConfig { rk4_step: h, ..short.clone() });
        if let Ok(r) = run {
            let e = overall(&max_state_error(&r, &reference));
            if e <= dtm_error {
                rk4_step = h;
                rk4_error = e;
                break;
            }
            if h == rk4_step {
                rk4_error = e;
            }
        }
    }

    let rk4_cfg = SolverConfig {
        rk4_step,
        ..cfg.clone()
    };
    let dtm_timed = timed(Method::Dtm, params, scenario, &x0, &a0, cfg, opts.repetitions);
    let rk4_timed = timed(Method::Rk4, params, scenario, &x0, &a0, &rk4_cfg, opts.repetitions);
    let dtm_search = msdtm_max_stable_step(params, scenario, &x0, &a0, cfg, &opts.stability_grid)?;
    let rk4_search = rk4_max_stable_step(params, scenario, &x0, &a0, cfg, &opts.stability_grid)?;

    let report_for = |method: Method,
                      step: f64,
                      timed: &Result<(SimResult, Vec<f64>)>,
                      search: &crate::solver::StepSearch,
                      error_vs_reference: f64| {
        let (steps, wall_times, error) = match timed {
            Ok((r, times)) => (r.stats.windows_taken, times.clone(), None),
            Err(e) => (0, Vec::new(), Some(e.to_string())),
        };
        let mut sorted = wall_times.clone();
        MethodReport {
            method: method.name().to_string(),
            step,
            steps,
            wall_time: if sorted.is_empty() { f64::NAN } else { median(&mut sorted) },
            wall_times,
            max_stable_step: search.max_stable_step,
            first_unstable_step: search.first_unstable,
            error_vs_reference,
            error,
        }
    };
    let dtm = report_for(Method::Dtm, cfg.h, &dtm_timed, &dtm_search, dtm_error);
    let rk4 = report_for(Method::Rk4, rk4_step, &rk4_timed, &rk4_search, rk4_error);
    let state_errors: Vec<(String, f64)> = match (&dtm_timed, &rk4_timed) {
        (Ok((d, _)), Ok((r, _))) => STATE_NAMES
            .iter()
            .zip(max_state_error(d, r))
            .map(|(n, e)| (n.to_string(), e))
            .collect(),
        _ => Vec::new(),
    };

    let name = scenario.name();
    let csv_name = format!("bench_{name}.csv");
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), format_value);
    let mut table = String::from(
        "method,step,steps,wall_time_median_s,max_stable_step,first_unstable_step,error_vs_reference\n",
    );
    for m in [&dtm, &rk4] {
        table.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            m.method,
            format_value(m.step),
            m.steps,
            format_value(m.wall_time),
            opt(m.max_stable_step),
            opt(m.first_unstable_step),
            format_value(m.error_vs_reference)
        ));
    }
    std::fs::write(out_dir.join(&csv_name), table)?;
    let mut errors = String::from("state,max_abs_error\n");
    for (n, e) in &state_errors {
        errors.push_str(&format!("{n},{}\n", format_value(*e)));
    }
    std::fs::write(out_dir.join(format!("bench_{name}_errors.csv")), errors)?;

    let report = BenchReport {
        scenario: name.to_string(),
        t_end,
        order: cfg.order,
        repetitions: opts.repetitions,
        accuracy_horizon: horizon,
        reference_step: opts.reference_step,
        methodology: format!(
            "wall time is the median of {} runs after one warm-up run on this machine; \
             one window or one RK-4 step counts as one step; the RK-4 step is the largest \
             candidate matching the transform method's error against an RK-4 reference \
             with step {} over the first {} s; a step is stable when the run completes \
             with every state within ten times the initial state magnitude",
            opts.repetitions, opts.reference_step, horizon
        ),
        dtm,
        rk4,
        state_errors,
        csv: csv_name,
    };
    write_summary(&out_dir.join(format!("bench_{name}_summary.toml")), &report)?;
    if let (Err(e), Err(_)) = (&dtm_timed, &rk4_timed) {
        return Err(e.clone());
    }
    Ok(report)
}

/// Writes `modal.csv` with one row per eigenvalue and wind speed:
/// `v_w, status, mode, re, im, damping, frequency_hz, dominant_state`
/// and the participation factor of every state. Points whose equilibrium
/// or eigen-analysis failed get a single row with the error as status.
pub fn run_modal(bundle: &ConfigBundle, wind: &[f64], out_dir: &Path) -> Result<(PathBuf, Sweep)> {
    if wind.is_empty() {
        return Err(Error::Config("wind grid is empty".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let sweep = sweep_eigs(&bundle.params, wind);
    let mut text = String::from("v_w,status,mode,re,im,damping,frequency_hz,dominant_state");
    for n in STATE_NAMES {
        text.push_str(&format!(",p_{n}"));
    }
    text.push('\n');
    for entry in &sweep.entries {
        match &entry.outcome {
            Ok(op) => {
                let r = &op.report;
                for i in 0..r.eigenvalues.len() {
                    let l = r.eigenvalues[i];
                    let status = if r.participation_available[i] { "ok" } else { "defective" };
                    text.push_str(&format!(
                        "{},{status},{},{},{},{},{},{}",
                        format_value(entry.v_w),
                        i + 1,
                        format_value(l.re),
                        format_value(l.im),
                        format_value(r.damping_ratios[i]),
                        format_value(r.frequencies[i]),
                        STATE_NAMES[r.dominant_state(i)]
                    ));
                    for k in 0..N_STATES {
                        text.push_str(&format!(",{}", format_value(r.participation[(k, i)])));
                    }
                    text.push('\n');
                }
            }
            Err(e) => {
                let msg = e.to_string().replace(',', ";");
                text.push_str(&format!("{},failed: {msg},,,,,,", format_value(entry.v_w)));
                text.push_str(&",".repeat(N_STATES));
                text.push('\n');
            }
        }
    }
    let path = out_dir.join("modal.csv");
    std::fs::write(&path, text)?;
    Ok((path, sweep))
}
