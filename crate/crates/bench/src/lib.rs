//! Shared fixtures for the benchmarks.

use dfig_core::model::{equilibrium, solve_algebraic, sx, InputVec};
use dfig_core::{AlgVec, DfigParams, Scenario, StateVec};

/// Default parameters, a Case 1 schedule cut to `t_end` seconds and its
/// starting equilibrium.
pub fn case1(t_end: f64) -> (DfigParams, Scenario, StateVec, AlgVec) {
    let p = DfigParams::default();
    let scenario = Scenario::case1(&p)
        .and_then(|s| s.with_t_end(t_end))
        .expect("case1 preset");
    let (x, a) = equilibrium(&p, &scenario.initial()).expect("equilibrium at 10 m/s");
    (p, scenario, x, a)
}

/// A consistent point slightly off the 10 m/s equilibrium.
pub fn disturbed_point() -> (DfigParams, InputVec, StateVec, AlgVec) {
    let p = DfigParams::default();
    let input = InputVec::new(10.0, p.x_e, p.v_qinf).expect("inputs");
    let (mut x, a) = equilibrium(&p, &input).expect("equilibrium at 10 m/s");
    x[sx::OMEGA_R] += 1e-3;
    let a = solve_algebraic(&p, &x, &a, &input, 1e-13, 30).expect("algebraic solve").alg;
    (p, input, x, a)
}
