use dfig_core::model::{
    ax, equilibrium, generate_window, residual_alg, solve_algebraic, sx, AlgVec, InputVec,
    StateVec, N_STATES,
};
use dfig_core::solver::{msdtm_run, msdtm_run_span, rk4_run, SimResult};
use dfig_core::{DfigParams, Error, Scenario, SolverConfig};

fn start(p: &DfigParams, scenario: &Scenario) -> (StateVec, AlgVec) {
    equilibrium(p, &scenario.initial()).unwrap()
}

fn perturbed_start(p: &DfigParams, input: &InputVec) -> (StateVec, AlgVec) {
    let (mut x, a) = equilibrium(p, input).unwrap();
    x[sx::OMEGA_R] += 1e-5;
    x[sx::U1] -= 1e-5;
    let a = solve_algebraic(p, &x, &a, input, 1e-13, 30).unwrap().alg;
    (x, a)
}

fn max_gap(a: &SimResult, b: &SimResult) -> f64 {
    assert_eq!(a.len(), b.len());
    a.states
        .iter()
        .zip(&b.states)
        .flat_map(|(x, y)| (0..N_STATES).map(move |i| (x[i] - y[i]).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn restarting_at_a_window_boundary_reproduces_the_single_run() {
    let p = DfigParams::default();
    let scenario = Scenario::constant(&p, 10.5, 1.0).unwrap();
    let (x0, a0) = perturbed_start(&p, &scenario.initial());
    let cfg = SolverConfig::default();
    let whole = msdtm_run(&p, &scenario, &x0, &a0, &cfg).unwrap();
    let first = msdtm_run_span(&p, &scenario, &x0, &a0, 0.0, 0.5, &cfg).unwrap();
    let (_, xm, am) = first.last().unwrap();
    let second = msdtm_run_span(&p, &scenario, xm, am, 0.5, 1.0, &cfg).unwrap();
    assert_eq!(first.len() + second.len() - 1, whole.len());
    for (i, t) in second.times.iter().enumerate() {
        let j = first.len() - 1 + i;
        assert!((whole.times[j] - t).abs() < 1e-12);
        for k in 0..N_STATES {
            assert!((whole.states[j][k] - second.states[i][k]).abs() <= 1e-12, "t = {t}, state {k}");
        }
    }
}

#[test]
fn reruns_are_bit_identical() {
    let p = DfigParams::default();
    let scenario = Scenario::case1(&p).unwrap().with_t_end(3.0).unwrap();
    let (x0, a0) = start(&p, &scenario);
    let cfg = SolverConfig::default();
    let a = msdtm_run(&p, &scenario, &x0, &a0, &cfg).unwrap();
    let b = msdtm_run(&p, &scenario, &x0, &a0, &cfg).unwrap();
    assert_eq!((&a.times, &a.states, &a.algs), (&b.times, &b.states, &b.algs));
    let a = rk4_run(&p, &scenario, &x0, &a0, &cfg).unwrap();
    let b = rk4_run(&p, &scenario, &x0, &a0, &cfg).unwrap();
    assert_eq!((&a.times, &a.states, &a.algs), (&b.times, &b.states, &b.algs));
}

#[test]
fn output_points_satisfy_the_bookkeeping_identities() {
    let p = DfigParams::default();
    let scenario = Scenario::case1(&p).unwrap().with_t_end(10.0).unwrap();
    let (x0, a0) = start(&p, &scenario);
    let run = msdtm_run(&p, &scenario, &x0, &a0, &SolverConfig::default()).unwrap();
    for (x, a) in run.states.iter().zip(&run.algs) {
        let q_s = a[ax::V_DS] * x[sx::I_QS] - a[ax::V_QS] * x[sx::I_DS];
        assert!((a[ax::Q_GRID] - (q_s + a[ax::Q_G])).abs() <= 1e-8);
        let v_s2 = a[ax::V_DS].powi(2) + a[ax::V_QS].powi(2);
        assert!((a[ax::V_S].powi(2) - v_s2).abs() <= 1e-8);
        let e2 = x[sx::E_QS].powi(2) + x[sx::E_DS].powi(2);
        assert!((a[ax::E_IG].powi(2) - e2).abs() <= 1e-8);
    }
}

#[test]
fn interior_points_of_each_window_satisfy_the_algebraic_equations() {
    let p = DfigParams::default();
    let scenario = Scenario::case1(&p).unwrap().with_t_end(4.0).unwrap();
    let (mut x, mut a) = start(&p, &scenario);
    let cfg = SolverConfig::default();
    let mut input = scenario.input_at(0.0);
    let mut worst = 0.0_f64;
    for w in 0..400 {
        let t0 = w as f64 * cfg.h;
        let now = scenario.input_at(t0);
        if now != input {
            input = now;
            a = solve_algebraic(&p, &x, &a, &input, 1e-13, 30).unwrap().alg;
        }
        let s = generate_window(&p, &input, &x, &a, t0, cfg.order, cfg.cond_max).unwrap();
        for j in 1..=10 {
            let t = t0 + cfg.h * j as f64 / 11.0;
            let g = residual_alg(&p, &s.state_at(t), &s.alg_at(t), &input).unwrap();
            worst = g.iter().fold(worst, |m, v| m.max(v.abs()));
        }
        x = s.state_at(t0 + cfg.h);
        a = s.alg_at(t0 + cfg.h);
    }
    assert!(worst <= 1e-6, "interior residual {worst:e}");
}

#[test]
fn post_event_algebraic_point_is_consistent() {
    let p = DfigParams::default();
    for scenario in [
        Scenario::case1(&p).unwrap().with_t_end(3.0).unwrap(),
        Scenario::case2(&p).unwrap().with_t_end(3.0).unwrap(),
        Scenario::case3(&p, 1.0).unwrap().with_t_end(1.5).unwrap(),
    ] {
        let (x0, a0) = start(&p, &scenario);
        let cfg = SolverConfig::default();
        let run = msdtm_run(&p, &scenario, &x0, &a0, &cfg).unwrap();
        for e in scenario.events() {
            let i = run.times.iter().position(|&t| t == e.time).expect("sample at event");
            let input = scenario.input_at(e.time);
            let post = solve_algebraic(&p, &run.states[i], &run.algs[i], &input, 1e-13, 30).unwrap();
            assert!(post.residual <= 1e-8, "{}: {:e}", scenario.name(), post.residual);
            assert!(run.times[i + 1] > e.time);
        }
    }
}

#[test]
fn network_disturbances_agree_with_the_reference_at_a_finer_window() {
    let p = DfigParams::default();
    for scenario in [
        Scenario::case2(&p).unwrap().with_t_end(10.0).unwrap(),
        Scenario::case3(&p, 1.0).unwrap(),
    ] {
        let (x0, a0) = start(&p, &scenario);
        let cfg = SolverConfig { h: 0.0025, ..Default::default() };
        let dtm = msdtm_run(&p, &scenario, &x0, &a0, &cfg).unwrap();
        let reference =
            rk4_run(&p, &scenario, &x0, &a0, &SolverConfig { rk4_step: 1e-4, ..cfg }).unwrap();
        let gap = max_gap(&dtm, &reference);
        assert!(gap <= 1e-4, "{}: {gap:e}", scenario.name());
    }
}

#[test]
fn truncation_order_convergence_is_monotone() {
    let p = DfigParams::default();
    let scenario = Scenario::case1(&p).unwrap().with_t_end(3.0).unwrap();
    let (x0, a0) = start(&p, &scenario);
    let reference = rk4_run(
        &p,
        &scenario,
        &x0,
        &a0,
        &SolverConfig { rk4_step: 1e-4, ..Default::default() },
    )
    .unwrap();
    let errors: Vec<f64> = [4, 6, 8, 10]
        .iter()
        .map(|&order| {
            let cfg = SolverConfig { order, ..Default::default() };
            match msdtm_run(&p, &scenario, &x0, &a0, &cfg) {
                Ok(run) => max_gap(&run, &reference),
                Err(Error::Solver { .. }) => f64::INFINITY,
                Err(e) => panic!("order {order}: {e}"),
            }
        })
        .collect();
    assert!(errors.windows(2).all(|w| w[1] <= w[0]), "{errors:?}");
    assert!(errors[2] <= 1e-4, "{errors:?}");
}

#[test]
fn wind_step_moves_the_rotor_and_returns() {
    let p = DfigParams::default();
    let scenario = Scenario::case1(&p).unwrap();
    let (x0, a0) = start(&p, &scenario);
    let run = msdtm_run(
        &p,
        &scenario,
        &x0,
        &a0,
        &SolverConfig { output_dt: 1.0, ..Default::default() },
    )
    .unwrap();
    let x11 = equilibrium(&p, &scenario.input_at(50.0)).unwrap().0;
    let at = |t: f64| run.states[run.times.iter().position(|&s| s == t).unwrap()][sx::OMEGA_R];
    let (w10, w11) = (x0[sx::OMEGA_R], x11[sx::OMEGA_R]);
    assert!(w11 > w10);
    assert!((at(100.0) - w11).abs() < 0.05 * (w11 - w10), "{} vs {w11}", at(100.0));
    assert!((at(200.0) - w10).abs() < 0.05 * (w11 - w10), "{} vs {w10}", at(200.0));
}

#[test]
fn bus_voltage_dip_shows_in_the_terminal_voltage() {
    let p = DfigParams::default();
    let scenario = Scenario::case3(&p, 1.0).unwrap();
    let (x0, a0) = start(&p, &scenario);
    let run = msdtm_run(&p, &scenario, &x0, &a0, &SolverConfig::default()).unwrap();
    let v_s = run.alg_column(ax::V_S);
    let before = v_s[0];
    let during = run
        .times
        .iter()
        .zip(&v_s)
        .filter(|(&t, _)| t > 1.0 && t < 1.1)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    assert!(during < before - 0.03, "no dip: {before} -> {during}");
    assert!(during > 0.8, "dip too deep: {during}");
    let last = *v_s.last().unwrap();
    assert!((last - before).abs() < 1e-2, "no recovery: {last}");
}

#[test]
fn constant_scenario_stays_flat() {
    let p = DfigParams::default();
    let scenario = Scenario::constant(&p, 11.0, 20.0).unwrap();
    let (x0, a0) = start(&p, &scenario);
    let run = msdtm_run(&p, &scenario, &x0, &a0, &SolverConfig::default()).unwrap();
    for (x, a) in run.states.iter().zip(&run.algs) {
        for i in 0..N_STATES {
            assert!((x[i] - x0[i]).abs() <= 1e-9);
        }
        assert!((a[ax::P_GRID] - a0[ax::P_GRID]).abs() <= 1e-9);
    }
}

#[test]
fn inconsistent_start_is_rejected() {
    let p = DfigParams::default();
    let scenario = Scenario::constant(&p, 10.0, 1.0).unwrap();
    let (x0, mut a0) = start(&p, &scenario);
    a0[ax::V_S] += 1e-3;
    let cfg = SolverConfig::default();
    assert!(matches!(msdtm_run(&p, &scenario, &x0, &a0, &cfg), Err(Error::Precondition(_))));
    assert!(rk4_run(&p, &scenario, &x0, &a0, &cfg).is_err());
}
