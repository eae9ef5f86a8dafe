//! Order-by-order recurrences of the transformed DFIG equations.
//!
//! Within one window every signal is a truncated power series. Given the
//! order-0 point, the coefficients are filled in the sequence
//!
//! ```text
//! x[1], a[1], x[2], a[2], ..., x[NL], a[NL]
//! ```
//!
//! The state coefficient `x[k+1]` is explicit in coefficients of order
//! `≤ k`. The algebraic coefficients of order `k` enter every transformed
//! algebraic equation linearly, with a coefficient matrix that depends only
//! on the order-0 point, so one LU factorization per window serves all
//! orders.

use super::params::DfigParams;
use super::residual::{alg_equation_name, cp, turbine_power_gain};
use super::vars::{ax, sx, AlgVec, InputVec, StateVec, N_ALG, N_STATES};
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::series::{
    cauchy_at, check_divisor, horner, horner_derivative, sin_step_at, triple_at,
    PowerSeries,
};

/// Auxiliary signals of the performance-coefficient and dc-link recurrences.
///
/// * `B1 = v_w / ω_r`
/// * `B2 = 1.283927808·B1 − 9.7697`
/// * `B3 = −(280/1299)·B1 + 0.735`
/// * `B4 = exp(B3)`
/// * `FF = v_dc[0] · (P_r − P_g) / v_dc`, so that `C_dc·v_dc[0]·dv_dc/dt = FF`
#[derive(Debug, Clone, PartialEq)]
pub struct AuxSeriesBundle {
    pub b1: PowerSeries,
    pub b2: PowerSeries,
    pub b3: PowerSeries,
    pub b4: PowerSeries,
    pub ff: PowerSeries,
}

/// Every state, algebraic and auxiliary series of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSeries {
    pub x: Vec<PowerSeries>,
    pub a: Vec<PowerSeries>,
    pub aux: AuxSeriesBundle,
    order: usize,
    t0: f64,
}

#[inline]
fn rho(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        0.0
    }
}

impl SystemSeries {
    /// Seeds order 0 from a consistent point and fills the order-0
    /// auxiliary coefficients. Higher orders start at zero.
    pub fn seed(
        order: usize,
        t0: f64,
        x0: &StateVec,
        a0: &AlgVec,
        input: &InputVec,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::Precondition("truncation order must be at least 1".into()));
        }
        let make = |v: f64| PowerSeries::constant(v, order, t0);
        let x = x0.as_slice().iter().map(|&v| make(v)).collect::<Result<Vec<_>>>()?;
        let a = a0.as_slice().iter().map(|&v| make(v)).collect::<Result<Vec<_>>>()?;
        let zero = PowerSeries::zeros(order, t0)?;
        let mut s = Self {
            x,
            a,
            aux: AuxSeriesBundle {
                b1: zero.clone(),
                b2: zero.clone(),
                b3: zero.clone(),
                b4: zero.clone(),
                ff: zero,
            },
            order,
            t0,
        };
        dt_aux_update(&mut s, input, 0)?;
        Ok(s)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    fn xs(&self, i: usize) -> &[f64] {
        self.x[i].coeffs()
    }

    fn as_(&self, i: usize) -> &[f64] {
        self.a[i].coeffs()
    }

    /// Order-`k` coefficients of all states.
    pub fn state_coeffs(&self, k: usize) -> StateVec {
        let mut v = StateVec::zeros();
        for i in 0..N_STATES {
            v[i] = self.x[i][k];
        }
        v
    }

    /// Order-`k` coefficients of all algebraic variables.
    pub fn alg_coeffs(&self, k: usize) -> AlgVec {
        let mut v = AlgVec::zeros();
        for i in 0..N_ALG {
            v[i] = self.a[i][k];
        }
        v
    }

    pub fn set_alg_coeffs(&mut self, k: usize, v: &AlgVec) {
        for i in 0..N_ALG {
            self.a[i].coeffs_mut()[k] = v[i];
        }
    }

    /// Evaluates the state polynomials at absolute time `t`.
    pub fn state_at(&self, t: f64) -> StateVec {
        let dt = t - self.t0;
        let mut v = StateVec::zeros();
        for i in 0..N_STATES {
            v[i] = horner(self.xs(i), dt);
        }
        v
    }

    pub fn alg_at(&self, t: f64) -> AlgVec {
        let dt = t - self.t0;
        let mut v = AlgVec::zeros();
        for i in 0..N_ALG {
            v[i] = horner(self.as_(i), dt);
        }
        v
    }

    /// Time derivative of the state polynomials at absolute time `t`.
    pub fn state_derivative_at(&self, t: f64) -> StateVec {
        let dt = t - self.t0;
        let mut v = StateVec::zeros();
        for i in 0..N_STATES {
            v[i] = horner_derivative(self.xs(i), dt);
        }
        v
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.a).all(|s| s.is_finite())
    }
}

/// Fills the order-`k` coefficients of `B1..B4`. Requires `ω_r` up to
/// order `k` and `B1..B4` up to order `k − 1`.
pub fn dt_aux_update(series: &mut SystemSeries, input: &InputVec, k: usize) -> Result<()> {
    let wr = series.x[sx::OMEGA_R].coeffs();
    check_divisor(wr[0], "omega_r")?;
    let numerator = |m: usize| input.v_w * rho(m);
    let b1_prev = series.aux.b1.coeffs();
    let tail: f64 = (0..k).map(|m| b1_prev[m] * wr[k - m]).sum();
    let b1 = (numerator(k) - tail) / wr[0];
    let b2 = cp::LAMBDA_GAIN * b1 - cp::OFFSET * rho(k);
    let b3 = -cp::EXP_GAIN * b1 + cp::EXP_OFFSET * rho(k);
    series.aux.b1.coeffs_mut()[k] = b1;
    series.aux.b2.coeffs_mut()[k] = b2;
    series.aux.b3.coeffs_mut()[k] = b3;
    let b4 = if k == 0 {
        b3.exp()
    } else {
        sin_step_at(series.aux.b4.coeffs(), series.aux.b3.coeffs(), k)
    };
    if !b4.is_finite() {
        return Err(Error::Range(format!("exp({b3}) overflows in the performance coefficient")));
    }
    series.aux.b4.coeffs_mut()[k] = b4;
    Ok(())
}

/// Order-`k` coefficient of the performance coefficient `C_p(v_w, ω_r)`.
pub fn dt_cp_coeff(series: &SystemSeries, input: &InputVec, k: usize) -> f64 {
    cauchy_at(series.aux.b2.coeffs(), series.aux.b4.coeffs(), k)
        + cp::LINEAR_GAIN * series.x[sx::OMEGA_R][k] / input.v_w
}

/// Writes the order-`k + 1` coefficient of every state series, and `FF[k]`.
pub fn dt_state_advance(
    p: &DfigParams,
    series: &mut SystemSeries,
    input: &InputVec,
    k: usize,
) -> Result<()> {
    let _ = input;
    if k >= series.order {
        return Err(Error::Precondition(format!(
            "cannot advance past truncation order {} (k = {k})",
            series.order
        )));
    }
    let s = &*series;
    let x = |i: usize| s.xs(i);
    let a = |i: usize| s.as_(i);
    let (ws, wel) = (p.omega_s, p.omega_el);
    let lsp = p.l_s_prime();
    let (kmrr, tau_r, r1, r2) = (p.k_mrr(), p.tau_r(), p.r_1(), p.r_2());
    let kp1 = (k + 1) as f64;

    let vdc = x(sx::V_DC);
    check_divisor(vdc[0], "v_dc")?;
    let w = cauchy_at(a(ax::V_DR), a(ax::I_DR), k) + cauchy_at(a(ax::V_QR), a(ax::I_QR), k)
        - cauchy_at(a(ax::V_DG), a(ax::I_DG), k)
        - cauchy_at(a(ax::V_QG), a(ax::I_QG), k);
    let ff_prev = s.aux.ff.coeffs();
    let ff_tail: f64 = (0..k).map(|m| ff_prev[m] * vdc[k - m]).sum();
    let ff = w - ff_tail / vdc[0];

    let damping = p.c_sh * wel * (x(sx::OMEGA_T)[k] - x(sx::OMEGA_R)[k]);
    let wr_eqs = cauchy_at(x(sx::OMEGA_R), x(sx::E_QS), k);
    let wr_eds = cauchy_at(x(sx::OMEGA_R), x(sx::E_DS), k);
    let (iqs, ids) = (x(sx::I_QS)[k], x(sx::I_DS)[k]);
    let (eqs, eds) = (x(sx::E_QS)[k], x(sx::E_DS)[k]);
    let power_error = a(ax::P_REF)[k] - a(ax::P_GRID)[k];
    let vs_error = p.v_sref * rho(k) - a(ax::V_S)[k];

    let mut next = [0.0; N_STATES];
    next[sx::OMEGA_R] = (a(ax::T_SH)[k] + damping - a(ax::T_E)[k]) / (2.0 * p.h_g * kp1);
    next[sx::OMEGA_T] = (a(ax::T_M)[k] - a(ax::T_SH)[k] - damping) / (2.0 * p.h_t * kp1);
    next[sx::THETA_TW] = wel * (x(sx::OMEGA_T)[k] - x(sx::OMEGA_R)[k]) / kp1;
    next[sx::I_QS] = wel / lsp
        * (-r1 * iqs + ws * lsp * ids + wr_eqs / ws - eds / (tau_r * ws) - a(ax::V_QS)[k]
            + kmrr * a(ax::V_QR)[k])
        / kp1;
    next[sx::I_DS] = wel / lsp
        * (-r1 * ids - ws * lsp * iqs + wr_eds / ws + eqs / (tau_r * ws) - a(ax::V_DS)[k]
            + kmrr * a(ax::V_DR)[k])
        / kp1;
    next[sx::E_QS] = wel
        * ws
        * (r2 * ids - eqs / (tau_r * ws) + eds - wr_eds / ws - kmrr * a(ax::V_DR)[k])
        / kp1;
    next[sx::E_DS] = wel
        * ws
        * (kmrr * a(ax::V_QR)[k] - r2 * iqs - eds / (tau_r * ws) - eqs + wr_eqs / ws)
        / kp1;
    next[sx::V_DC] = ff / (p.c_dc * vdc[0] * kp1);
    next[sx::U1] = power_error / kp1;
    next[sx::U2] = (p.delta_igref * rho(k) - a(ax::DELTA_IG)[k]
        + p.kp1 * power_error
        + p.ki1 * x(sx::U1)[k])
        / kp1;
    next[sx::U3] = vs_error / kp1;
    next[sx::U4] =
        (p.e_igref * rho(k) - a(ax::E_IG)[k] + p.kp3 * vs_error + p.ki3 * x(sx::U3)[k]) / kp1;
    next[sx::U5] = (p.v_dcref * rho(k) - vdc[k]) / kp1;
    next[sx::U6] = (p.q_gref * rho(k) - a(ax::Q_G)[k]) / kp1;

    if let Some(i) = next.iter().position(|v| !v.is_finite()) {
        return Err(Error::ModelEvaluation {
            equation: super::residual::diff_equation_name(i),
        });
    }
    series.aux.ff.coeffs_mut()[k] = ff;
    for (i, v) in next.into_iter().enumerate() {
        series.x[i].coeffs_mut()[k + 1] = v;
    }
    Ok(())
}

/// Order-`k` coefficient of every transformed algebraic equation, evaluated
/// with whatever is currently stored at order `k`.
///
/// At `k = 0` the trigonometric rows are `φ − sin δ` and `ψ − cos δ`, so the
/// result equals the untransformed algebraic residual. For `k ≥ 1` they use
/// the coupled sine/cosine recurrence. Every other row is the Cauchy
/// expansion of its product form, valid at all orders. Requires `B1..B4` at
/// order `k`.
pub fn dt_alg_residual(
    p: &DfigParams,
    series: &SystemSeries,
    input: &InputVec,
    k: usize,
) -> [f64; N_ALG] {
    let x = |i: usize| series.xs(i);
    let a = |i: usize| series.as_(i);
    let c = |i: usize, j: usize| cauchy_at(a(i), a(j), k);
    let ck = |i: usize| a(i)[k];
    let ws = p.omega_s;
    let kmrr = p.k_mrr();
    let r0 = rho(k);

    let mut r = [0.0; N_ALG];
    r[ax::V_DS] = ck(ax::V_DS) * input.v_qinf - input.x_e * ck(ax::P_GRID);
    r[ax::V_QS] = c(ax::V_QS, ax::V_QS) + c(ax::V_DS, ax::V_DS) - ck(ax::V_QS) * input.v_qinf
        - input.x_e * ck(ax::Q_GRID);
    r[ax::V_DR] = ck(ax::V_DR) - c(ax::V_R, ax::PHI_R);
    r[ax::V_QR] = ck(ax::V_QR) - c(ax::V_R, ax::PSI_R);
    r[ax::V_DG] =
        ck(ax::V_DG) + p.x_tg * (p.kp5 * (p.v_dcref * r0 - x(sx::V_DC)[k]) + p.ki5 * x(sx::U5)[k]);
    r[ax::V_QG] = ck(ax::V_QG)
        - p.x_tg * (p.kp6 * (p.q_gref * r0 - ck(ax::Q_G)) + p.ki6 * x(sx::U6)[k])
        + p.v_sref * r0
        - ck(ax::V_S);
    r[ax::I_DG] = ck(ax::I_DG) * p.x_tg - ck(ax::V_QS) + ck(ax::V_QG);
    r[ax::I_QG] = ck(ax::I_QG) * p.x_tg - ck(ax::V_DG) + ck(ax::V_DS);
    r[ax::I_DR] = ck(ax::I_DR) - x(sx::E_QS)[k] / (ws * p.l_m) + kmrr * x(sx::I_DS)[k];
    r[ax::I_QR] = ck(ax::I_QR) + x(sx::E_DS)[k] / (ws * p.l_m) + kmrr * x(sx::I_QS)[k];
    let (vds, vqs, vdg, vqg) = (a(ax::V_DS), a(ax::V_QS), a(ax::V_DG), a(ax::V_QG));
    let (ids, iqs) = (x(sx::I_DS), x(sx::I_QS));
    let (idg, iqg) = (a(ax::I_DG), a(ax::I_QG));
    r[ax::P_GRID] = ck(ax::P_GRID)
        - (cauchy_at(vds, ids, k)
            + cauchy_at(vqs, iqs, k)
            + cauchy_at(vdg, idg, k)
            + cauchy_at(vqg, iqg, k));
    r[ax::Q_GRID] = ck(ax::Q_GRID)
        - (cauchy_at(vds, iqs, k) - cauchy_at(vqs, ids, k) + cauchy_at(vdg, iqg, k)
            - cauchy_at(vqg, idg, k));
    let wr = x(sx::OMEGA_R);
    r[ax::P_REF] = ck(ax::P_REF) - p.k_opt * triple_at(wr, wr, wr, k);
    r[ax::Q_G] = ck(ax::Q_G) - (cauchy_at(vdg, iqg, k) - cauchy_at(vqg, idg, k));
    r[ax::V_S] = c(ax::V_S, ax::V_S) - c(ax::V_QS, ax::V_QS) - c(ax::V_DS, ax::V_DS);
    let (eqs, eds) = (x(sx::E_QS), x(sx::E_DS));
    r[ax::E_IG] = c(ax::E_IG, ax::E_IG) - cauchy_at(eqs, eqs, k) - cauchy_at(eds, eds, k);
    r[ax::DELTA_R] = ck(ax::DELTA_R)
        - (p.kp2 * (p.delta_igref * r0 - ck(ax::DELTA_IG) + p.kp1 * (ck(ax::P_REF) - ck(ax::P_GRID)))
            + p.kp2 * p.ki1 * x(sx::U1)[k]
            + p.ki2 * x(sx::U2)[k]);
    r[ax::V_R] = ck(ax::V_R)
        - (p.kp4 * (p.e_igref * r0 - ck(ax::E_IG) + p.kp3 * (p.v_sref * r0 - ck(ax::V_S)))
            + p.kp4 * p.ki3 * x(sx::U3)[k]
            + p.ki4 * x(sx::U4)[k]);
    if k == 0 {
        r[ax::DELTA_IG] = ck(ax::PSI_IG) - ck(ax::DELTA_IG).cos();
        r[ax::PHI_R] = ck(ax::PHI_R) - ck(ax::DELTA_R).sin();
        r[ax::PSI_R] = ck(ax::PSI_R) - ck(ax::DELTA_R).cos();
        r[ax::PHI_IG] = ck(ax::PHI_IG) - ck(ax::DELTA_IG).sin();
    } else {
        r[ax::DELTA_IG] = ck(ax::PSI_IG) + sin_step_at(a(ax::PHI_IG), a(ax::DELTA_IG), k);
        r[ax::PHI_R] = ck(ax::PHI_R) - sin_step_at(a(ax::PSI_R), a(ax::DELTA_R), k);
        r[ax::PSI_R] = ck(ax::PSI_R) + sin_step_at(a(ax::PHI_R), a(ax::DELTA_R), k);
        r[ax::PHI_IG] = ck(ax::PHI_IG) - sin_step_at(a(ax::PSI_IG), a(ax::DELTA_IG), k);
    }
    r[ax::PSI_IG] = c(ax::PSI_IG, ax::E_IG) - eqs[k];
    r[ax::T_E] = ck(ax::T_E) - (cauchy_at(eqs, iqs, k) + cauchy_at(eds, ids, k)) / ws;
    r[ax::T_M] = cauchy_at(a(ax::T_M), x(sx::OMEGA_T), k) - ck(ax::P_T);
    r[ax::T_SH] = ck(ax::T_SH) - p.k_sh * x(sx::THETA_TW)[k];
    r[ax::P_T] = ck(ax::P_T) - turbine_power_gain(p, input.v_w) * ck(ax::C_PPU);
    r[ax::C_PPU] = ck(ax::C_PPU) - dt_cp_coeff(series, input, k);
    r
}

/// Coefficient matrix of the order-`k` algebraic unknowns (`k ≥ 1`) in the
/// transformed algebraic equations, in [`AlgVec`] order for both rows and
/// columns. Entries are order-0 values only.
pub fn dt_alg_matrix(p: &DfigParams, series: &SystemSeries, input: &InputVec) -> Matrix {
    let a = |i: usize| series.a[i][0];
    let x = |i: usize| series.x[i][0];
    let mut m = Matrix::zeros(N_ALG, N_ALG);
    let mut set = |row: usize, col: usize, v: f64| m[(row, col)] += v;

    set(ax::V_DS, ax::V_DS, input.v_qinf);
    set(ax::V_DS, ax::P_GRID, -input.x_e);

    set(ax::V_QS, ax::V_QS, 2.0 * a(ax::V_QS) - input.v_qinf);
    set(ax::V_QS, ax::V_DS, 2.0 * a(ax::V_DS));
    set(ax::V_QS, ax::Q_GRID, -input.x_e);

    set(ax::V_DR, ax::V_DR, 1.0);
    set(ax::V_DR, ax::V_R, -a(ax::PHI_R));
    set(ax::V_DR, ax::PHI_R, -a(ax::V_R));

    set(ax::V_QR, ax::V_QR, 1.0);
    set(ax::V_QR, ax::V_R, -a(ax::PSI_R));
    set(ax::V_QR, ax::PSI_R, -a(ax::V_R));

    set(ax::V_DG, ax::V_DG, 1.0);

    set(ax::V_QG, ax::V_QG, 1.0);
    set(ax::V_QG, ax::Q_G, p.x_tg * p.kp6);
    set(ax::V_QG, ax::V_S, -1.0);

    set(ax::I_DG, ax::I_DG, p.x_tg);
    set(ax::I_DG, ax::V_QS, -1.0);
    set(ax::I_DG, ax::V_QG, 1.0);

    set(ax::I_QG, ax::I_QG, p.x_tg);
    set(ax::I_QG, ax::V_DG, -1.0);
    set(ax::I_QG, ax::V_DS, 1.0);

    set(ax::I_DR, ax::I_DR, 1.0);
    set(ax::I_QR, ax::I_QR, 1.0);

    set(ax::P_GRID, ax::P_GRID, 1.0);
    set(ax::P_GRID, ax::V_DS, -x(sx::I_DS));
    set(ax::P_GRID, ax::V_QS, -x(sx::I_QS));
    set(ax::P_GRID, ax::V_DG, -a(ax::I_DG));
    set(ax::P_GRID, ax::I_DG, -a(ax::V_DG));
    set(ax::P_GRID, ax::V_QG, -a(ax::I_QG));
    set(ax::P_GRID, ax::I_QG, -a(ax::V_QG));

    set(ax::Q_GRID, ax::Q_GRID, 1.0);
    set(ax::Q_GRID, ax::V_DS, -x(sx::I_QS));
    set(ax::Q_GRID, ax::V_QS, x(sx::I_DS));
    set(ax::Q_GRID, ax::V_DG, -a(ax::I_QG));
    set(ax::Q_GRID, ax::I_QG, -a(ax::V_DG));
    set(ax::Q_GRID, ax::V_QG, a(ax::I_DG));
    set(ax::Q_GRID, ax::I_DG, a(ax::V_QG));

    set(ax::P_REF, ax::P_REF, 1.0);

    set(ax::Q_G, ax::Q_G, 1.0);
    set(ax::Q_G, ax::V_DG, -a(ax::I_QG));
    set(ax::Q_G, ax::I_QG, -a(ax::V_DG));
    set(ax::Q_G, ax::V_QG, a(ax::I_DG));
    set(ax::Q_G, ax::I_DG, a(ax::V_QG));

    set(ax::V_S, ax::V_S, 2.0 * a(ax::V_S));
    set(ax::V_S, ax::V_QS, -2.0 * a(ax::V_QS));
    set(ax::V_S, ax::V_DS, -2.0 * a(ax::V_DS));

    set(ax::E_IG, ax::E_IG, 2.0 * a(ax::E_IG));

    set(ax::DELTA_IG, ax::PSI_IG, 1.0);
    set(ax::DELTA_IG, ax::DELTA_IG, a(ax::PHI_IG));

    set(ax::DELTA_R, ax::DELTA_R, 1.0);
    set(ax::DELTA_R, ax::DELTA_IG, p.kp2);
    set(ax::DELTA_R, ax::P_REF, -p.kp2 * p.kp1);
    set(ax::DELTA_R, ax::P_GRID, p.kp2 * p.kp1);

    set(ax::V_R, ax::V_R, 1.0);
    set(ax::V_R, ax::E_IG, p.kp4);
    set(ax::V_R, ax::V_S, p.kp4 * p.kp3);

    set(ax::PHI_R, ax::PHI_R, 1.0);
    set(ax::PHI_R, ax::DELTA_R, -a(ax::PSI_R));

    set(ax::PSI_R, ax::PSI_R, 1.0);
    set(ax::PSI_R, ax::DELTA_R, a(ax::PHI_R));

    set(ax::PHI_IG, ax::PHI_IG, 1.0);
    set(ax::PHI_IG, ax::DELTA_IG, -a(ax::PSI_IG));

    set(ax::PSI_IG, ax::PSI_IG, a(ax::E_IG));
    set(ax::PSI_IG, ax::E_IG, a(ax::PSI_IG));

    set(ax::T_E, ax::T_E, 1.0);

    set(ax::T_M, ax::T_M, x(sx::OMEGA_T));
    set(ax::T_M, ax::P_T, -1.0);

    set(ax::T_SH, ax::T_SH, 1.0);

    set(ax::P_T, ax::P_T, 1.0);
    set(ax::P_T, ax::C_PPU, -turbine_power_gain(p, input.v_w));

    set(ax::C_PPU, ax::C_PPU, 1.0);
    m
}

/// The factorized algebraic coefficient matrix of one window.
#[derive(Debug, Clone)]
pub struct AlgSystem {
    lu: Lu,
    condition: f64,
}

impl AlgSystem {
    /// Assembles and factorizes the coefficient matrix at the window's
    /// order-0 point. Fails when the matrix is singular or its condition
    /// estimate exceeds `cond_max`.
    pub fn assemble(
        p: &DfigParams,
        series: &SystemSeries,
        input: &InputVec,
        cond_max: f64,
    ) -> Result<Self> {
        let m = dt_alg_matrix(p, series, input);
        let singular = |condition| Error::StructuralSingularity {
            time: series.t0,
            condition,
        };
        let lu = Lu::factor(&m).map_err(|_| singular(f64::INFINITY))?;
        let condition = lu.condition_estimate();
        if !(condition <= cond_max) {
            return Err(singular(condition));
        }
        Ok(Self { lu, condition })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Solves for the order-`k` algebraic coefficients (`k ≥ 1`), after
    /// updating the auxiliary series at order `k`. States must be known up
    /// to order `k`.
    pub fn solve(
        &self,
        p: &DfigParams,
        series: &mut SystemSeries,
        input: &InputVec,
        k: usize,
    ) -> Result<()> {
        if k == 0 || k > series.order {
            return Err(Error::Precondition(format!(
                "algebraic order {k} outside 1..={}",
                series.order
            )));
        }
        dt_aux_update(series, input, k)?;
        series.set_alg_coeffs(k, &AlgVec::zeros());
        let mut rhs = dt_alg_residual(p, series, input, k);
        rhs.iter_mut().for_each(|v| *v = -*v);
        self.lu.solve_in_place(&mut rhs);
        if let Some(i) = rhs.iter().position(|v| !v.is_finite()) {
            return Err(Error::ModelEvaluation {
                equation: alg_equation_name(i),
            });
        }
        series.set_alg_coeffs(k, &AlgVec(rhs));
        Ok(())
    }
}

/// Solves the order-`k` algebraic coefficients, assembling the window
/// matrix on the spot. [`generate_window`] assembles once and reuses it.
pub fn dt_alg_solve(
    p: &DfigParams,
    series: &mut SystemSeries,
    input: &InputVec,
    k: usize,
    cond_max: f64,
) -> Result<()> {
    AlgSystem::assemble(p, series, input, cond_max)?.solve(p, series, input, k)
}

/// Builds every series of one window from a consistent order-0 point.
pub fn generate_window(
    p: &DfigParams,
    input: &InputVec,
    x0: &StateVec,
    a0: &AlgVec,
    t0: f64,
    order: usize,
    cond_max: f64,
) -> Result<SystemSeries> {
    let mut series = SystemSeries::seed(order, t0, x0, a0, input)?;
    let system = AlgSystem::assemble(p, &series, input, cond_max)?;
    for k in 0..order {
        dt_state_advance(p, &mut series, input, k)?;
        system.solve(p, &mut series, input, k + 1)?;
    }
    Ok(series)
}
