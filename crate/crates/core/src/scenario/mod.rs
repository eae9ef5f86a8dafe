//! Disturbance schedules, configuration files and the run harness.

pub mod config;
pub mod harness;
pub mod output;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DfigParams, InputVec};

pub use config::{load_config, load_scenario, parse_config, ConfigBundle};
pub use harness::{
    run_benchmark, run_modal, run_scenario, BenchOptions, BenchReport, Method, MethodReport,
    RunOutput,
};
pub use output::{read_csv, write_csv, write_summary};

/// Which exogenous input an [`Event`] changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputField {
    #[serde(rename = "v_w")]
    WindSpeed,
    #[serde(rename = "x_e")]
    GridReactance,
    #[serde(rename = "v_qinf")]
    BusVoltage,
}

impl InputField {
    pub fn name(self) -> &'static str {
        match self {
            InputField::WindSpeed => "v_w",
            InputField::GridReactance => "x_e",
            InputField::BusVoltage => "v_qinf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "v_w" => Ok(InputField::WindSpeed),
            "x_e" => Ok(InputField::GridReactance),
            "v_qinf" => Ok(InputField::BusVoltage),
            other => Err(Error::Config(format!(
                "unknown event field `{other}` (expected v_w, x_e or v_qinf)"
            ))),
        }
    }

    fn apply(self, input: &mut InputVec, value: f64) {
        match self {
            InputField::WindSpeed => input.v_w = value,
            InputField::GridReactance => input.x_e = value,
            InputField::BusVoltage => input.v_qinf = value,
        }
    }
}

/// A step change of one input at `time` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub field: InputField,
    pub value: f64,
}

/// A piecewise-constant input schedule.
///
/// The input is right-continuous: an event at `t_e` is in effect on
/// `[t_e, next event)`. Integrators end a window or step exactly at every
/// event time, so a sample taken at `t_e` carries the pre-event value
/// (the end of the previous window).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    name: String,
    events: Vec<Event>,
    t_end: f64,
    initial: InputVec,
}

/// Default fault onset of the voltage-dip preset.
pub const CASE3_FAULT_START: f64 = 1.0;

impl Scenario {
    pub fn new(name: &str, initial: InputVec, events: Vec<Event>, t_end: f64) -> Result<Self> {
        initial.validate()?;
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidParameter {
                field: "t_end".into(),
                reason: format!("must be positive and finite, got {t_end}"),
            });
        }
        let mut input = initial;
        let mut last = 0.0_f64;
        for (i, e) in events.iter().enumerate() {
            if !(e.time > 0.0) || !(e.time < t_end) {
                return Err(Error::InvalidParameter {
                    field: format!("events[{i}].time"),
                    reason: format!("must lie in (0, t_end = {t_end}), got {}", e.time),
                });
            }
            if i > 0 && !(e.time > last) {
                return Err(Error::InvalidParameter {
                    field: format!("events[{i}].time"),
                    reason: "event times must be strictly increasing".into(),
                });
            }
            last = e.time;
            e.field.apply(&mut input, e.value);
            input.validate().map_err(|_| Error::InvalidParameter {
                field: format!("events[{i}].value"),
                reason: format!("{} = {} is not admissible", e.field.name(), e.value),
            })?;
        }
        Ok(Self {
            name: name.to_string(),
            events,
            t_end,
            initial,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn initial(&self) -> InputVec {
        self.initial
    }

    /// Input in effect at time `t` (events at exactly `t` included).
    pub fn input_at(&self, t: f64) -> InputVec {
        let mut input = self.initial;
        for e in self.events.iter().take_while(|e| e.time <= t) {
            e.field.apply(&mut input, e.value);
        }
        input
    }

    /// Input in effect just before `t` (events at exactly `t` excluded).
    pub fn input_before(&self, t: f64) -> InputVec {
        let mut input = self.initial;
        for e in self.events.iter().take_while(|e| e.time < t) {
            e.field.apply(&mut input, e.value);
        }
        input
    }

    /// First event time strictly after `t`.
    pub fn next_event_after(&self, t: f64) -> Option<f64> {
        self.events.iter().map(|e| e.time).find(|&te| te > t)
    }

    /// The same schedule over a different horizon; events at or beyond the
    /// new horizon are dropped.
    pub fn with_t_end(&self, t_end: f64) -> Result<Self> {
        let events = self.events.iter().copied().filter(|e| e.time < t_end).collect();
        Self::new(&self.name, self.initial, events, t_end)
    }

    /// Constant inputs from `params` for `t_end` seconds.
    pub fn constant(params: &DfigParams, v_w: f64, t_end: f64) -> Result<Self> {
        Self::new(
            "constant",
            InputVec::new(v_w, params.x_e, params.v_qinf)?,
            Vec::new(),
            t_end,
        )
    }

    /// Wind-speed steps 10 → 11 m/s at 2 s and back to 10 m/s at 100 s.
    pub fn case1(params: &DfigParams) -> Result<Self> {
        Self::new(
            "case1",
            InputVec::new(10.0, params.x_e, params.v_qinf)?,
            vec![
                Event { time: 2.0, field: InputField::WindSpeed, value: 11.0 },
                Event { time: 100.0, field: InputField::WindSpeed, value: 10.0 },
            ],
            200.0,
        )
    }

    /// Grid reactance 0.02 → 0.04 p.u. at 2 s and back at 50 s.
    pub fn case2(params: &DfigParams) -> Result<Self> {
        Self::new(
            "case2",
            InputVec::new(10.0, 0.02, params.v_qinf)?,
            vec![
                Event { time: 2.0, field: InputField::GridReactance, value: 0.04 },
                Event { time: 50.0, field: InputField::GridReactance, value: 0.02 },
            ],
            100.0,
        )
    }

    /// Infinite-bus voltage dip to 0.92 p.u. for 0.1 s starting at `t_f`.
    pub fn case3(params: &DfigParams, t_f: f64) -> Result<Self> {
        Self::new(
            "case3",
            InputVec::new(10.0, params.x_e, 1.0)?,
            vec![
                Event { time: t_f, field: InputField::BusVoltage, value: 0.92 },
                Event { time: t_f + 0.1, field: InputField::BusVoltage, value: 1.0 },
            ],
            5.0,
        )
    }

    /// Looks up a built-in preset by name.
    pub fn preset(name: &str, params: &DfigParams) -> Result<Self> {
        match name {
            "case1" => Self::case1(params),
            "case2" => Self::case2(params),
            "case3" => Self::case3(params, CASE3_FAULT_START),
            other => Err(Error::Config(format!(
                "unknown scenario preset `{other}` (expected case1, case2 or case3)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_encode_the_schedules() {
        let p = DfigParams::default();
        let c1 = Scenario::case1(&p).unwrap();
        assert_eq!(c1.t_end(), 200.0);
        assert_eq!(c1.initial().v_w, 10.0);
        assert_eq!(
            c1.events(),
            &[
                Event { time: 2.0, field: InputField::WindSpeed, value: 11.0 },
                Event { time: 100.0, field: InputField::WindSpeed, value: 10.0 },
            ]
        );
        let c3 = Scenario::preset("case3", &p).unwrap();
        assert_eq!(c3.events()[0].time, 1.0);
        assert_eq!(c3.events()[1].time, 1.0 + 0.1);
        assert_eq!(c3.t_end(), 5.0);
    }

    #[test]
    fn input_is_right_continuous() {
        let c1 = Scenario::case1(&DfigParams::default()).unwrap();
        assert_eq!(c1.input_at(1.999).v_w, 10.0);
        assert_eq!(c1.input_at(2.0).v_w, 11.0);
        assert_eq!(c1.input_before(2.0).v_w, 10.0);
        assert_eq!(c1.input_at(150.0).v_w, 10.0);
        assert_eq!(c1.next_event_after(2.0), Some(100.0));
        assert_eq!(c1.next_event_after(100.0), None);
    }

    #[test]
    fn invariants_are_checked() {
        let input = InputVec::new(10.0, 0.02, 1.0).unwrap();
        let e = |time, value| Event { time, field: InputField::WindSpeed, value };
        assert!(Scenario::new("x", input, vec![e(2.0, 11.0), e(2.0, 10.0)], 10.0).is_err());
        assert!(Scenario::new("x", input, vec![e(12.0, 11.0)], 10.0).is_err());
        assert!(Scenario::new("x", input, vec![e(1.0, -1.0)], 10.0).is_err());
        assert!(Scenario::new("x", input, vec![], 0.0).is_err());
        assert!(Scenario::preset("case9", &DfigParams::default()).is_err());
    }
}
