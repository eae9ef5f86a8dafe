use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dfig_core::scenario::{
    load_config, load_scenario, parse_config, run_benchmark, run_modal, run_scenario,
    BenchOptions, ConfigBundle, Method,
};
use dfig_core::{Error, Result};

#[derive(Parser)]
#[command(name = "dfig", version, about = "DFIG wind turbine simulation with the multi-step differential transform method")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Truncation order of the transform method.
    #[arg(long)]
    order: Option<usize>,
    /// Window length of the transform method, or the step of `--method rk4`.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Dtm,
    Rk4,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its trajectory CSV and run summary.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Preset (case1, case2, case3) or a scenario TOML file.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, value_enum, default_value = "dtm")]
        method: MethodArg,
    },
    /// Compare both integrators: matched-accuracy timings and stability limits.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scenario: Option<String>,
        /// Timed repetitions per method (at least 5).
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
    },
    /// Eigenvalues and participation factors over a wind-speed grid.
    Modal {
        #[command(flatten)]
        common: Common,
        /// `start:step:end` (inclusive) or a comma-separated list, in m/s.
        #[arg(long, default_value = "10:0.25:12")]
        wind: String,
    },
}

fn load(common: &Common, scenario: Option<&str>, method: Method) -> Result<ConfigBundle> {
    let mut bundle = match &common.config {
        Some(path) => load_config(path)?,
        None => parse_config("")?,
    };
    if let Some(spec) = scenario {
        bundle.scenario = load_scenario(spec, &bundle.params)?;
    }
    if let Some(order) = common.order {
        bundle.solver.order = order;
    }
    if let Some(step) = common.step {
        match method {
            Method::Dtm => bundle.solver.h = step,
            Method::Rk4 => bundle.solver.rk4_step = step,
        }
    }
    bundle.solver.validate()?;
    Ok(bundle)
}

fn parse_wind(spec: &str) -> Result<Vec<f64>> {
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad wind speed `{s}` in `{spec}`")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end) = (number(start)?, number(step)?, number(end)?);
            if !(step > 0.0) || !(end >= start) {
                return Err(Error::Config(format!(
                    "wind range `{spec}` needs a positive step and end >= start"
                )));
            }
            let n = ((end - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| start + i as f64 * step).collect()
        }
        [_] => spec.split(',').map(number).collect::<Result<Vec<f64>>>()?,
        _ => return Err(Error::Config(format!("wind grid `{spec}` is not start:step:end"))),
    };
    if grid.is_empty() {
        return Err(Error::Config("wind grid is empty".into()));
    }
    Ok(grid)
}

fn shown(path: &Path) -> String {
    path.display().to_string()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            common,
            scenario,
            method,
        } => {
            let method = match method {
                MethodArg::Dtm => Method::Dtm,
                MethodArg::Rk4 => Method::Rk4,
            };
            let bundle = load(&common, scenario.as_deref(), method)?;
            let out = run_scenario(&bundle, method, &common.out)?;
            let stats = out.result.stats;
            println!(
                "{} with {}: {} samples, {} steps, {:.3} s, max algebraic residual {:.2e}",
                bundle.scenario.name(),
                method.name(),
                out.result.len(),
                stats.windows_taken,
                stats.wall_time,
                stats.max_alg_residual
            );
            println!("wrote {} and {}", shown(&out.csv_path), shown(&out.summary_path));
        }
        Command::Bench {
            common,
            scenario,
            repetitions,
        } => {
            let bundle = load(&common, scenario.as_deref(), Method::Dtm)?;
            let opts = BenchOptions {
                repetitions,
                ..Default::default()
            };
            let report = run_benchmark(&bundle, &opts, &common.out)?;
            println!("{:<6}{:>12}{:>10}{:>14}{:>16}{:>14}", "method", "step", "steps", "median s", "max stable step", "error");
            for m in [&report.dtm, &report.rk4] {
                let stable = m.max_stable_step.map_or("none".to_string(), |h| format!("{h}"));
                println!(
                    "{:<6}{:>12}{:>10}{:>14.4}{:>16}{:>14.2e}",
                    m.method, m.step, m.steps, m.wall_time, stable, m.error_vs_reference
                );
                if let Some(e) = &m.error {
                    println!("       {} failed: {e}", m.method);
                }
            }
            println!("{}", report.methodology);
            println!("wrote {}", shown(&common.out.join(&report.csv)));
        }
        Command::Modal { common, wind } => {
            let bundle = load(&common, None, Method::Dtm)?;
            let grid = parse_wind(&wind)?;
            let (path, sweep) = run_modal(&bundle, &grid, &common.out)?;
            for entry in &sweep.entries {
                match &entry.outcome {
                    Ok(op) => {
                        let r = &op.report;
                        let weakest = r.least_damped_oscillatory().map_or(String::new(), |i| {
                            format!(
                                ", least damped {:.4} at {:.2} Hz",
                                r.damping_ratios[i], r.frequencies[i]
                            )
                        });
                        println!("v_w = {:>6.2}: max Re {:+.4e}{weakest}", entry.v_w, r.max_real());
                    }
                    Err(e) => println!("v_w = {:>6.2}: failed: {e}", entry.v_w),
                }
            }
            match sweep.first_unstable {
                Some(v) => println!("first unstable wind speed: {v} m/s"),
                None => println!("all operating points are small-signal stable"),
            }
            println!("wrote {}", shown(&path));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wind_grids() {
        assert_eq!(parse_wind("10:0.25:11").unwrap(), vec![10.0, 10.25, 10.5, 10.75, 11.0]);
        assert_eq!(parse_wind("10:0.25:12").unwrap().len(), 9);
        assert_eq!(parse_wind("10,11.5").unwrap(), vec![10.0, 11.5]);
        assert!(parse_wind("10:0:12").is_err());
        assert!(parse_wind("12:1:10").is_err());
        assert!(parse_wind("a:b").is_err());
    }
}
