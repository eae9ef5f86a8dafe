//! TOML configuration files.
//!
//! ```toml
//! [machine]        # omega_el, omega_s, r_s, r_r, l_ss, l_rr, l_m
//! [drivetrain]     # h_g, h_t, k_sh, c_sh, k_opt, v_wb
//! [converter]      # c_dc, x_tg, v_dcref, q_gref
//! [controllers]    # kp1..kp6, ki1..ki6, delta_igref, v_sref, e_igref
//! [network]        # x_e, v_qinf
//! [solver]         # order, h, t_end, output_dt, cond_max, newton_tol,
//!                  # newton_max_iter, rk4_step
//! [scenario]       # preset = "case1" | inline schedule, see below
//! ```
//!
//! Every key is optional; omitted keys keep the built-in defaults. An
//! inline scenario looks like
//!
//! ```toml
//! [scenario]
//! name = "gust"
//! t_end = 20.0
//! v_w = 10.0
//! events = [ { time = 5.0, field = "v_w", value = 10.5 } ]
//! ```

use std::path::Path;

use serde::Deserialize;

use super::{Event, InputField, Scenario};
use crate::error::{Error, Result};
use crate::model::{DfigParams, InputVec};
use crate::solver::SolverConfig;

/// A fully validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigBundle {
    pub params: DfigParams,
    pub scenario: Scenario,
    pub solver: SolverConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    machine: Option<RawMachine>,
    drivetrain: Option<RawDrivetrain>,
    converter: Option<RawConverter>,
    controllers: Option<RawControllers>,
    network: Option<RawNetwork>,
    solver: Option<RawSolver>,
    scenario: Option<RawScenario>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMachine {
    omega_el: Option<f64>,
    omega_s: Option<f64>,
    r_s: Option<f64>,
    r_r: Option<f64>,
    l_ss: Option<f64>,
    l_rr: Option<f64>,
    l_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrivetrain {
    h_g: Option<f64>,
    h_t: Option<f64>,
    k_sh: Option<f64>,
    c_sh: Option<f64>,
    k_opt: Option<f64>,
    v_wb: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConverter {
    c_dc: Option<f64>,
    x_tg: Option<f64>,
    v_dcref: Option<f64>,
    q_gref: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControllers {
    kp1: Option<f64>,
    kp2: Option<f64>,
    kp3: Option<f64>,
    kp4: Option<f64>,
    kp5: Option<f64>,
    kp6: Option<f64>,
    ki1: Option<f64>,
    ki2: Option<f64>,
    ki3: Option<f64>,
    ki4: Option<f64>,
    ki5: Option<f64>,
    ki6: Option<f64>,
    delta_igref: Option<f64>,
    v_sref: Option<f64>,
    e_igref: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    x_e: Option<f64>,
    v_qinf: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    order: Option<usize>,
    h: Option<f64>,
    t_end: Option<f64>,
    output_dt: Option<f64>,
    cond_max: Option<f64>,
    newton_tol: Option<f64>,
    newton_max_iter: Option<usize>,
    rk4_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    preset: Option<String>,
    fault_start: Option<f64>,
    name: Option<String>,
    t_end: Option<f64>,
    v_w: Option<f64>,
    x_e: Option<f64>,
    v_qinf: Option<f64>,
    events: Option<Vec<RawEvent>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    time: f64,
    field: String,
    value: f64,
}

macro_rules! overlay {
    ($target:expr, $raw:expr, $($field:ident),+ $(,)?) => {
        if let Some(raw) = $raw {
            $(if let Some(v) = raw.$field { $target.$field = v; })+
        }
    };
}

fn build_scenario(raw: Option<RawScenario>, params: &DfigParams) -> Result<Scenario> {
    let Some(raw) = raw else {
        return Scenario::case1(params);
    };
    if let Some(preset) = &raw.preset {
        let base = match (preset.as_str(), raw.fault_start) {
            ("case3", Some(t_f)) => Scenario::case3(params, t_f)?,
            (_, Some(_)) => {
                return Err(Error::Config(
                    "`fault_start` only applies to the case3 preset".into(),
                ))
            }
            (name, None) => Scenario::preset(name, params)?,
        };
        if raw.events.is_some() || raw.v_w.is_some() || raw.x_e.is_some() || raw.v_qinf.is_some()
        {
            return Err(Error::Config(
                "a preset scenario cannot also define inputs or events".into(),
            ));
        }
        return match raw.t_end {
            Some(t) => base.with_t_end(t),
            None => Ok(base),
        };
    }
    let t_end = raw
        .t_end
        .ok_or_else(|| Error::Config("inline scenario needs `t_end`".into()))?;
    let initial = InputVec {
        v_w: raw
            .v_w
            .ok_or_else(|| Error::Config("inline scenario needs `v_w`".into()))?,
        x_e: raw.x_e.unwrap_or(params.x_e),
        v_qinf: raw.v_qinf.unwrap_or(params.v_qinf),
    };
    let events = raw
        .events
        .unwrap_or_default()
        .into_iter()
        .map(|e| {
            Ok(Event {
                time: e.time,
                field: InputField::parse(&e.field)?,
                value: e.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Scenario::new(raw.name.as_deref().unwrap_or("custom"), initial, events, t_end)
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<ConfigBundle> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut params = DfigParams::default();
    overlay!(params, raw.machine, omega_el, omega_s, r_s, r_r, l_ss, l_rr, l_m);
    overlay!(params, raw.drivetrain, h_g, h_t, k_sh, c_sh, k_opt, v_wb);
    overlay!(params, raw.converter, c_dc, x_tg, v_dcref, q_gref);
    overlay!(
        params,
        raw.controllers,
        kp1,
        kp2,
        kp3,
        kp4,
        kp5,
        kp6,
        ki1,
        ki2,
        ki3,
        ki4,
        ki5,
        ki6,
        delta_igref,
        v_sref,
        e_igref
    );
    overlay!(params, raw.network, x_e, v_qinf);
    params.validate()?;

    let mut solver = SolverConfig::default();
    let mut t_end = None;
    if let Some(s) = raw.solver {
        t_end = s.t_end;
        overlay!(
            solver,
            Some(s),
            order,
            h,
            output_dt,
            cond_max,
            newton_tol,
            newton_max_iter,
            rk4_step
        );
    }
    solver.t_end = t_end;
    solver.validate()?;
    let scenario = build_scenario(raw.scenario, &params)?;
    Ok(ConfigBundle {
        params,
        scenario,
        solver,
    })
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ConfigBundle> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Resolves a scenario argument: a preset name or the path of a TOML file
/// with the same keys as the `[scenario]` section.
pub fn load_scenario(spec: &str, params: &DfigParams) -> Result<Scenario> {
    if matches!(spec, "case1" | "case2" | "case3") {
        return Scenario::preset(spec, params);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!(
            "`{spec}` is neither a preset (case1, case2, case3) nor a readable file: {e}"
        ))
    })?;
    let raw: RawScenario = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    build_scenario(Some(raw), params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let b = parse_config("").unwrap();
        assert_eq!(b.params, DfigParams::default());
        assert_eq!(b.solver, SolverConfig::default());
        assert_eq!(b.scenario.name(), "case1");
    }

    #[test]
    fn sections_override_fields() {
        let b = parse_config(
            "[drivetrain]\nh_g = 0.7\n[controllers]\nkp1 = 0.02\n[solver]\norder = 6\nt_end = 5.0\n\
             [scenario]\npreset = \"case3\"\nfault_start = 0.5\n",
        )
        .unwrap();
        assert_eq!(b.params.h_g, 0.7);
        assert_eq!(b.params.kp1, 0.02);
        assert_eq!(b.solver.order, 6);
        assert_eq!(b.solver.t_end, Some(5.0));
        assert_eq!(b.scenario.events()[0].time, 0.5);
    }

    #[test]
    fn inline_scenario() {
        let b = parse_config(
            "[scenario]\nname = \"gust\"\nt_end = 20.0\nv_w = 10.0\n\
             events = [ { time = 5.0, field = \"v_w\", value = 10.5 } ]\n",
        )
        .unwrap();
        assert_eq!(b.scenario.name(), "gust");
        assert_eq!(b.scenario.input_at(6.0).v_w, 10.5);
    }

    #[test]
    fn parse_errors_carry_the_line() {
        let err = parse_config("[machine]\nr_s = 0.1\nl_m = = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        let err = parse_config("[machine]\nbogus = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn invariant_violations_name_the_field() {
        match parse_config("[converter]\nc_dc = -1.0\n") {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "c_dc"),
            other => panic!("unexpected {other:?}"),
        }
        match parse_config("[solver]\norder = 1\n") {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "order"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
