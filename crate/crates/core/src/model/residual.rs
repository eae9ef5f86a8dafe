//! The original (untransformed) differential-algebraic equations.
//!
//! `residual_diff` returns the state derivatives `ẋ = f(x, a, u)` and
//! `residual_alg` the algebraic residuals `g(x, a, u)`, one row per
//! algebraic variable in [`AlgVec`] order. Row `j` is the equation that the
//! transformed solver uses to determine variable `j`.

use super::params::DfigParams;
use super::vars::{ax, sx, AlgVec, InputVec, StateVec, N_ALG, N_STATES};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

const DIFF_EQUATIONS: [&str; N_STATES] = [
    "d(omega_r)/dt",
    "d(omega_t)/dt",
    "d(theta_tw)/dt",
    "d(i_qs)/dt",
    "d(i_ds)/dt",
    "d(e_qs)/dt",
    "d(e_ds)/dt",
    "d(v_dc)/dt",
    "d(u1)/dt",
    "d(u2)/dt",
    "d(u3)/dt",
    "d(u4)/dt",
    "d(u5)/dt",
    "d(u6)/dt",
];

const ALG_EQUATIONS: [&str; N_ALG] = [
    "network active power",
    "network reactive power",
    "rotor voltage d",
    "rotor voltage q",
    "GSC voltage d",
    "GSC voltage q",
    "GSC current d",
    "GSC current q",
    "rotor current d",
    "rotor current q",
    "grid active power",
    "grid reactive power",
    "MPPT reference",
    "GSC reactive power",
    "terminal voltage magnitude",
    "internal voltage magnitude",
    "cos(delta_ig)",
    "rotor angle control",
    "rotor voltage control",
    "sin(delta_r)",
    "cos(delta_r)",
    "sin(delta_ig)",
    "internal voltage angle",
    "electromagnetic torque",
    "mechanical torque",
    "shaft torque",
    "turbine power",
    "performance coefficient",
];

pub fn diff_equation_name(i: usize) -> &'static str {
    DIFF_EQUATIONS[i]
}

pub fn alg_equation_name(i: usize) -> &'static str {
    ALG_EQUATIONS[i]
}

/// Constants of the normalized performance-coefficient curve.
pub mod cp {
    pub const LAMBDA_GAIN: f64 = 1.283927808;
    pub const OFFSET: f64 = 9.7697;
    pub const EXP_GAIN: f64 = 280.0 / 1299.0;
    pub const EXP_OFFSET: f64 = 0.735;
    pub const LINEAR_GAIN: f64 = 1.3801875;
}

/// Performance coefficient as a function of wind speed and rotor speed,
/// with the pitch angle already eliminated.
pub fn cp_value(v_w: f64, omega_r: f64) -> Result<f64> {
    if !(omega_r > 0.0) {
        return Err(Error::Domain(format!("rotor speed must be positive, got {omega_r}")));
    }
    if !(v_w > 0.0) {
        return Err(Error::Domain(format!("wind speed must be positive, got {v_w}")));
    }
    let ratio = v_w / omega_r;
    Ok((cp::LAMBDA_GAIN * ratio - cp::OFFSET) * (-cp::EXP_GAIN * ratio + cp::EXP_OFFSET).exp()
        + cp::LINEAR_GAIN * omega_r / v_w)
}

/// `(v_w / v_wB)³ · k_opt`, the factor between `C_ppu` and turbine power.
pub fn turbine_power_gain(params: &DfigParams, v_w: f64) -> f64 {
    params.k_opt * (v_w / params.v_wb).powi(3)
}

pub fn residual_diff(
    p: &DfigParams,
    x: &StateVec,
    a: &AlgVec,
    input: &InputVec,
) -> Result<[f64; N_STATES]> {
    let _ = input;
    let (ws, wel) = (p.omega_s, p.omega_el);
    let lsp = p.l_s_prime();
    let (kmrr, tau_r, r1, r2) = (p.k_mrr(), p.tau_r(), p.r_1(), p.r_2());

    let (wr, wt) = (x[sx::OMEGA_R], x[sx::OMEGA_T]);
    let (iqs, ids) = (x[sx::I_QS], x[sx::I_DS]);
    let (eqs, eds) = (x[sx::E_QS], x[sx::E_DS]);
    let vdc = x[sx::V_DC];
    let damping = p.c_sh * wel * (wt - wr);

    let mut d = [0.0; N_STATES];
    d[sx::OMEGA_R] = (a[ax::T_SH] + damping - a[ax::T_E]) / (2.0 * p.h_g);
    d[sx::OMEGA_T] = (a[ax::T_M] - a[ax::T_SH] - damping) / (2.0 * p.h_t);
    d[sx::THETA_TW] = wel * (wt - wr);
    d[sx::I_QS] = wel / lsp
        * (-r1 * iqs + ws * lsp * ids + wr * eqs / ws - eds / (tau_r * ws) - a[ax::V_QS]
            + kmrr * a[ax::V_QR]);
    d[sx::I_DS] = wel / lsp
        * (-r1 * ids - ws * lsp * iqs + wr * eds / ws + eqs / (tau_r * ws) - a[ax::V_DS]
            + kmrr * a[ax::V_DR]);
    d[sx::E_QS] = wel
        * ws
        * (r2 * ids - eqs / (tau_r * ws) + (1.0 - wr / ws) * eds - kmrr * a[ax::V_DR]);
    d[sx::E_DS] = wel
        * ws
        * (kmrr * a[ax::V_QR] - r2 * iqs - eds / (tau_r * ws) - (1.0 - wr / ws) * eqs);
    let p_r = a[ax::V_DR] * a[ax::I_DR] + a[ax::V_QR] * a[ax::I_QR];
    let p_g = a[ax::V_DG] * a[ax::I_DG] + a[ax::V_QG] * a[ax::I_QG];
    d[sx::V_DC] = (p_r - p_g) / (p.c_dc * vdc);
    let power_error = a[ax::P_REF] - a[ax::P_GRID];
    d[sx::U1] = power_error;
    d[sx::U2] = p.delta_igref - a[ax::DELTA_IG] + p.kp1 * power_error + p.ki1 * x[sx::U1];
    let vs_error = p.v_sref - a[ax::V_S];
    d[sx::U3] = vs_error;
    d[sx::U4] = p.e_igref - a[ax::E_IG] + p.kp3 * vs_error + p.ki3 * x[sx::U3];
    d[sx::U5] = p.v_dcref - vdc;
    d[sx::U6] = p.q_gref - a[ax::Q_G];

    if let Some(i) = d.iter().position(|v| !v.is_finite()) {
        return Err(Error::ModelEvaluation {
            equation: DIFF_EQUATIONS[i],
        });
    }
    Ok(d)
}

pub fn residual_alg(
    p: &DfigParams,
    x: &StateVec,
    a: &AlgVec,
    input: &InputVec,
) -> Result<[f64; N_ALG]> {
    let ws = p.omega_s;
    let kmrr = p.k_mrr();
    let (vds, vqs) = (a[ax::V_DS], a[ax::V_QS]);
    let (vdg, vqg) = (a[ax::V_DG], a[ax::V_QG]);
    let (idg, iqg) = (a[ax::I_DG], a[ax::I_QG]);
    let (ids, iqs) = (x[sx::I_DS], x[sx::I_QS]);
    let (eqs, eds) = (x[sx::E_QS], x[sx::E_DS]);
    let wr = x[sx::OMEGA_R];
    let cp_now = cp_value(input.v_w, wr)?;

    let mut r = [0.0; N_ALG];
    r[ax::V_DS] = vds * input.v_qinf - input.x_e * a[ax::P_GRID];
    r[ax::V_QS] = vqs * vqs + vds * vds - vqs * input.v_qinf - input.x_e * a[ax::Q_GRID];
    r[ax::V_DR] = a[ax::V_DR] - a[ax::V_R] * a[ax::PHI_R];
    r[ax::V_QR] = a[ax::V_QR] - a[ax::V_R] * a[ax::PSI_R];
    r[ax::V_DG] = vdg + p.x_tg * (p.kp5 * (p.v_dcref - x[sx::V_DC]) + p.ki5 * x[sx::U5]);
    r[ax::V_QG] = vqg - p.x_tg * (p.kp6 * (p.q_gref - a[ax::Q_G]) + p.ki6 * x[sx::U6]) + p.v_sref
        - a[ax::V_S];
    r[ax::I_DG] = idg * p.x_tg - vqs + vqg;
    r[ax::I_QG] = iqg * p.x_tg - vdg + vds;
    r[ax::I_DR] = a[ax::I_DR] - eqs / (ws * p.l_m) + kmrr * ids;
    r[ax::I_QR] = a[ax::I_QR] + eds / (ws * p.l_m) + kmrr * iqs;
    r[ax::P_GRID] = a[ax::P_GRID] - (vds * ids + vqs * iqs + vdg * idg + vqg * iqg);
    r[ax::Q_GRID] = a[ax::Q_GRID] - (vds * iqs - vqs * ids + vdg * iqg - vqg * idg);
    r[ax::P_REF] = a[ax::P_REF] - p.k_opt * wr * wr * wr;
    r[ax::Q_G] = a[ax::Q_G] - (vdg * iqg - vqg * idg);
    r[ax::V_S] = a[ax::V_S] * a[ax::V_S] - vqs * vqs - vds * vds;
    r[ax::E_IG] = a[ax::E_IG] * a[ax::E_IG] - eqs * eqs - eds * eds;
    r[ax::DELTA_IG] = a[ax::PSI_IG] - a[ax::DELTA_IG].cos();
    r[ax::DELTA_R] = a[ax::DELTA_R]
        - (p.kp2 * (p.delta_igref - a[ax::DELTA_IG] + p.kp1 * (a[ax::P_REF] - a[ax::P_GRID]))
            + p.kp2 * p.ki1 * x[sx::U1]
            + p.ki2 * x[sx::U2]);
    r[ax::V_R] = a[ax::V_R]
        - (p.kp4 * (p.e_igref - a[ax::E_IG] + p.kp3 * (p.v_sref - a[ax::V_S]))
            + p.kp4 * p.ki3 * x[sx::U3]
            + p.ki4 * x[sx::U4]);
    r[ax::PHI_R] = a[ax::PHI_R] - a[ax::DELTA_R].sin();
    r[ax::PSI_R] = a[ax::PSI_R] - a[ax::DELTA_R].cos();
    r[ax::PHI_IG] = a[ax::PHI_IG] - a[ax::DELTA_IG].sin();
    r[ax::PSI_IG] = a[ax::PSI_IG] * a[ax::E_IG] - eqs;
    r[ax::T_E] = a[ax::T_E] - (eqs * iqs + eds * ids) / ws;
    r[ax::T_M] = a[ax::T_M] * x[sx::OMEGA_T] - a[ax::P_T];
    r[ax::T_SH] = a[ax::T_SH] - p.k_sh * x[sx::THETA_TW];
    r[ax::P_T] = a[ax::P_T] - turbine_power_gain(p, input.v_w) * a[ax::C_PPU];
    r[ax::C_PPU] = a[ax::C_PPU] - cp_now;

    if let Some(i) = r.iter().position(|v| !v.is_finite()) {
        return Err(Error::ModelEvaluation {
            equation: ALG_EQUATIONS[i],
        });
    }
    Ok(r)
}

/// Exact Jacobian `∂g/∂a` of [`residual_alg`].
pub fn alg_jacobian(p: &DfigParams, x: &StateVec, a: &AlgVec, input: &InputVec) -> Matrix {
    let mut j = Matrix::zeros(N_ALG, N_ALG);
    let (vds, vqs) = (a[ax::V_DS], a[ax::V_QS]);
    let (vdg, vqg) = (a[ax::V_DG], a[ax::V_QG]);
    let (idg, iqg) = (a[ax::I_DG], a[ax::I_QG]);
    let (ids, iqs) = (x[sx::I_DS], x[sx::I_QS]);

    j[(ax::V_DS, ax::V_DS)] = input.v_qinf;
    j[(ax::V_DS, ax::P_GRID)] = -input.x_e;

    j[(ax::V_QS, ax::V_QS)] = 2.0 * vqs - input.v_qinf;
    j[(ax::V_QS, ax::V_DS)] = 2.0 * vds;
    j[(ax::V_QS, ax::Q_GRID)] = -input.x_e;

    j[(ax::V_DR, ax::V_DR)] = 1.0;
    j[(ax::V_DR, ax::V_R)] = -a[ax::PHI_R];
    j[(ax::V_DR, ax::PHI_R)] = -a[ax::V_R];

    j[(ax::V_QR, ax::V_QR)] = 1.0;
    j[(ax::V_QR, ax::V_R)] = -a[ax::PSI_R];
    j[(ax::V_QR, ax::PSI_R)] = -a[ax::V_R];

    j[(ax::V_DG, ax::V_DG)] = 1.0;

    j[(ax::V_QG, ax::V_QG)] = 1.0;
    j[(ax::V_QG, ax::Q_G)] = p.x_tg * p.kp6;
    j[(ax::V_QG, ax::V_S)] = -1.0;

    j[(ax::I_DG, ax::I_DG)] = p.x_tg;
    j[(ax::I_DG, ax::V_QS)] = -1.0;
    j[(ax::I_DG, ax::V_QG)] = 1.0;

    j[(ax::I_QG, ax::I_QG)] = p.x_tg;
    j[(ax::I_QG, ax::V_DG)] = -1.0;
    j[(ax::I_QG, ax::V_DS)] = 1.0;

    j[(ax::I_DR, ax::I_DR)] = 1.0;
    j[(ax::I_QR, ax::I_QR)] = 1.0;

    j[(ax::P_GRID, ax::P_GRID)] = 1.0;
    j[(ax::P_GRID, ax::V_DS)] = -ids;
    j[(ax::P_GRID, ax::V_QS)] = -iqs;
    j[(ax::P_GRID, ax::V_DG)] = -idg;
    j[(ax::P_GRID, ax::I_DG)] = -vdg;
    j[(ax::P_GRID, ax::V_QG)] = -iqg;
    j[(ax::P_GRID, ax::I_QG)] = -vqg;

    j[(ax::Q_GRID, ax::Q_GRID)] = 1.0;
    j[(ax::Q_GRID, ax::V_DS)] = -iqs;
    j[(ax::Q_GRID, ax::V_QS)] = ids;
    j[(ax::Q_GRID, ax::V_DG)] = -iqg;
    j[(ax::Q_GRID, ax::I_QG)] = -vdg;
    j[(ax::Q_GRID, ax::V_QG)] = idg;
    j[(ax::Q_GRID, ax::I_DG)] = vqg;

    j[(ax::P_REF, ax::P_REF)] = 1.0;

    j[(ax::Q_G, ax::Q_G)] = 1.0;
    j[(ax::Q_G, ax::V_DG)] = -iqg;
    j[(ax::Q_G, ax::I_QG)] = -vdg;
    j[(ax::Q_G, ax::V_QG)] = idg;
    j[(ax::Q_G, ax::I_DG)] = vqg;

    j[(ax::V_S, ax::V_S)] = 2.0 * a[ax::V_S];
    j[(ax::V_S, ax::V_QS)] = -2.0 * vqs;
    j[(ax::V_S, ax::V_DS)] = -2.0 * vds;

    j[(ax::E_IG, ax::E_IG)] = 2.0 * a[ax::E_IG];

    j[(ax::DELTA_IG, ax::PSI_IG)] = 1.0;
    j[(ax::DELTA_IG, ax::DELTA_IG)] = a[ax::DELTA_IG].sin();

    j[(ax::DELTA_R, ax::DELTA_R)] = 1.0;
    j[(ax::DELTA_R, ax::DELTA_IG)] = p.kp2;
    j[(ax::DELTA_R, ax::P_REF)] = -p.kp2 * p.kp1;
    j[(ax::DELTA_R, ax::P_GRID)] = p.kp2 * p.kp1;

    j[(ax::V_R, ax::V_R)] = 1.0;
    j[(ax::V_R, ax::E_IG)] = p.kp4;
    j[(ax::V_R, ax::V_S)] = p.kp4 * p.kp3;

    j[(ax::PHI_R, ax::PHI_R)] = 1.0;
    j[(ax::PHI_R, ax::DELTA_R)] = -a[ax::DELTA_R].cos();

    j[(ax::PSI_R, ax::PSI_R)] = 1.0;
    j[(ax::PSI_R, ax::DELTA_R)] = a[ax::DELTA_R].sin();

    j[(ax::PHI_IG, ax::PHI_IG)] = 1.0;
    j[(ax::PHI_IG, ax::DELTA_IG)] = -a[ax::DELTA_IG].cos();

    j[(ax::PSI_IG, ax::PSI_IG)] = a[ax::E_IG];
    j[(ax::PSI_IG, ax::E_IG)] = a[ax::PSI_IG];

    j[(ax::T_E, ax::T_E)] = 1.0;

    j[(ax::T_M, ax::T_M)] = x[sx::OMEGA_T];
    j[(ax::T_M, ax::P_T)] = -1.0;

    j[(ax::T_SH, ax::T_SH)] = 1.0;

    j[(ax::P_T, ax::P_T)] = 1.0;
    j[(ax::P_T, ax::C_PPU)] = -turbine_power_gain(p, input.v_w);

    j[(ax::C_PPU, ax::C_PPU)] = 1.0;
    j
}

/// Active power flowing from the rotor into the dc link, `v_dr i_dr + v_qr i_qr`.
pub fn rotor_power(a: &AlgVec) -> f64 {
    a[ax::V_DR] * a[ax::I_DR] + a[ax::V_QR] * a[ax::I_QR]
}

/// Active power leaving the dc link through the grid-side converter.
pub fn gsc_power(a: &AlgVec) -> f64 {
    a[ax::V_DG] * a[ax::I_DG] + a[ax::V_QG] * a[ax::I_QG]
}

/// Stator reactive power `v_ds i_qs - v_qs i_ds`.
pub fn stator_reactive_power(x: &StateVec, a: &AlgVec) -> f64 {
    a[ax::V_DS] * x[sx::I_QS] - a[ax::V_QS] * x[sx::I_DS]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cp_exponent_vanishes_at_reference_ratio() {
        let v_w = 10.0;
        let omega_r = 2800.0 / (1299.0 * 0.735);
        let ratio = v_w / omega_r;
        let expected = cp::LAMBDA_GAIN * ratio - cp::OFFSET + cp::LINEAR_GAIN * omega_r / v_w;
        assert!((cp_value(v_w, omega_r).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn cp_golden_value() {
        // (12.83927808 - 9.7697) * exp(-2800/1299 + 0.735) + 0.13801875
        let golden = 3.06957808 * (-2800.0_f64 / 1299.0 + 0.735).exp() + 0.13801875;
        assert!((cp_value(10.0, 1.0).unwrap() - golden).abs() < 1e-14);
        assert!((cp_value(10.0, 1.0).unwrap() - 0.8796047707).abs() < 1e-9);
    }

    #[test]
    fn cp_rejects_nonpositive_speed() {
        assert!(matches!(cp_value(10.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(cp_value(10.0, -1.0), Err(Error::Domain(_))));
    }
}
