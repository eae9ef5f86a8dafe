//! Consistent initial points: steady-state equilibria and algebraic
//! re-solves with the states held fixed.

use super::params::DfigParams;
use super::residual::{alg_jacobian, cp_value, residual_alg, residual_diff};
use super::vars::{ax, sx, AlgVec, InputVec, StateVec, N_ALG, N_STATES};
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};

pub const INIT_MAX_ITER: usize = 50;
pub const INIT_TOL: f64 = 1e-10;

const N_ALL: usize = N_STATES + N_ALG;

/// Speed ratio `v_w / ω_r` at the peak of the performance-coefficient curve.
pub const OPTIMAL_SPEED_RATIO: f64 = 12.0276;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Concatenated steady-state residual `[f(x, a); g(x, a)]`.
pub fn steady_residual(
    p: &DfigParams,
    x: &StateVec,
    a: &AlgVec,
    input: &InputVec,
) -> Result<[f64; N_ALL]> {
    let f = residual_diff(p, x, a, input)?;
    let g = residual_alg(p, x, a, input)?;
    let mut r = [0.0; N_ALL];
    r[..N_STATES].copy_from_slice(&f);
    r[N_STATES..].copy_from_slice(&g);
    Ok(r)
}

fn split(z: &[f64]) -> (StateVec, AlgVec) {
    (
        StateVec::from_slice(&z[..N_STATES]).expect("state block"),
        AlgVec::from_slice(&z[N_STATES..]).expect("algebraic block"),
    )
}

fn steady_jacobian(p: &DfigParams, z: &[f64; N_ALL], input: &InputVec) -> Result<Matrix> {
    let mut jac = Matrix::zeros(N_ALL, N_ALL);
    for j in 0..N_ALL {
        let h = 1e-7 * z[j].abs().max(1.0);
        let mut zp = *z;
        let mut zm = *z;
        zp[j] += h;
        zm[j] -= h;
        let (xp, ap) = split(&zp);
        let (xm, am) = split(&zm);
        let rp = steady_residual(p, &xp, &ap, input)?;
        let rm = steady_residual(p, &xm, &am, input)?;
        for i in 0..N_ALL {
            jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Newton solve of `f(x, a) = 0, g(x, a) = 0` from `guess`.
///
/// Each step is damped by halving until the residual decreases. Fails with
/// [`Error::Initialization`] if the maximum residual is still above
/// [`INIT_TOL`] after [`INIT_MAX_ITER`] iterations.
pub fn init_equilibrium(
    p: &DfigParams,
    input: &InputVec,
    guess: (&StateVec, &AlgVec),
) -> Result<(StateVec, AlgVec)> {
    p.validate()?;
    input.validate()?;
    let mut z = [0.0; N_ALL];
    z[..N_STATES].copy_from_slice(guess.0.as_slice());
    z[N_STATES..].copy_from_slice(guess.1.as_slice());
    let (x, a) = split(&z);
    let mut r = steady_residual(p, &x, &a, input)?;
    let mut norm = max_abs(&r);
    for _ in 0..INIT_MAX_ITER {
        if norm <= INIT_TOL {
            break;
        }
        let jac = steady_jacobian(p, &z, input)?;
        let lu = Lu::factor(&jac).map_err(|_| Error::Initialization {
            iterations: 0,
            residual: norm,
        })?;
        let step = lu.solve(&r);
        let mut lambda = 1.0;
        loop {
            let mut trial = z;
            for (t, s) in trial.iter_mut().zip(&step) {
                *t -= lambda * s;
            }
            let (xt, at) = split(&trial);
            let accepted = match steady_residual(p, &xt, &at, input) {
                Ok(rt) if max_abs(&rt) < norm || lambda < 1e-3 => Some(rt),
                _ => None,
            };
            if let Some(rt) = accepted {
                z = trial;
                r = rt;
                norm = max_abs(&r);
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-4 {
                return Err(Error::Initialization {
                    iterations: INIT_MAX_ITER,
                    residual: norm,
                });
            }
        }
    }
    if !(norm <= INIT_TOL) {
        return Err(Error::Initialization {
            iterations: INIT_MAX_ITER,
            residual: norm,
        });
    }
    Ok(split(&z))
}

/// Equilibrium from the built-in physical guess.
pub fn equilibrium(p: &DfigParams, input: &InputVec) -> Result<(StateVec, AlgVec)> {
    let (x, a) = default_guess(p, input)?;
    init_equilibrium(p, input, (&x, &a))
}

fn solve2(m: [[f64; 2]; 2], b: [f64; 2]) -> Result<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() < 1e-14 {
        return Err(Error::Initialization {
            iterations: 0,
            residual: f64::INFINITY,
        });
    }
    Ok([
        (b[0] * m[1][1] - m[0][1] * b[1]) / det,
        (m[0][0] * b[1] - m[1][0] * b[0]) / det,
    ])
}

/// A physically based starting point for [`init_equilibrium`]: MPPT rotor
/// speed, network voltages from the power flow, steady machine fluxes from
/// the stator and rotor voltage equations, and controller integrators that
/// reproduce the steady converter commands.
pub fn default_guess(p: &DfigParams, input: &InputVec) -> Result<(StateVec, AlgVec)> {
    let ws = p.omega_s;
    let (lsp, kmrr, tau, r1, r2) = (p.l_s_prime(), p.k_mrr(), p.tau_r(), p.r_1(), p.r_2());
    let wr = input.v_w / OPTIMAL_SPEED_RATIO * (p.v_wb / OPTIMAL_SPEED_RATIO);
    let p_out = p.k_opt * wr.powi(3);
    let vds = input.x_e * p_out / input.v_qinf;
    let vqs_sq = p.v_sref * p.v_sref - vds * vds;
    if !(vqs_sq > 0.0) {
        return Err(Error::Initialization {
            iterations: 0,
            residual: f64::INFINITY,
        });
    }
    let vqs = vqs_sq.sqrt();
    let q_out = (vqs * vqs + vds * vds - vqs * input.v_qinf) / input.x_e;

    let mut p_gsc = 0.0;
    let (mut ids, mut iqs) = (0.0, 0.0);
    let mut machine = Matrix::zeros(4, 4);
    let mut unknowns = vec![0.0; 4];
    let (mut idr, mut iqr) = (0.0, 0.0);
    for _ in 0..20 {
        [ids, iqs] = solve2([[vds, vqs], [-vqs, vds]], [p_out - p_gsc, q_out])?;
        let c = 1.0 / (tau * ws);
        let rows = [
            [wr / ws, -c, 0.0, kmrr],
            [c, wr / ws, kmrr, 0.0],
            [-c, 1.0 - wr, -kmrr, 0.0],
            [-(1.0 - wr), -c, 0.0, kmrr],
        ];
        for (i, row) in rows.iter().enumerate() {
            machine.row_mut(i).copy_from_slice(row);
        }
        let rhs = [
            r1 * iqs - ws * lsp * ids + vqs,
            r1 * ids + ws * lsp * iqs + vds,
            -r2 * ids,
            r2 * iqs,
        ];
        unknowns = Lu::factor(&machine)?.solve(&rhs);
        let (eqs, eds, vdr, vqr) = (unknowns[0], unknowns[1], unknowns[2], unknowns[3]);
        idr = eqs / (ws * p.l_m) - kmrr * ids;
        iqr = -eds / (ws * p.l_m) - kmrr * iqs;
        p_gsc = vdr * idr + vqr * iqr;
    }
    let (eqs, eds, vdr, vqr) = (unknowns[0], unknowns[1], unknowns[2], unknowns[3]);

    let xtg = p.x_tg;
    let gsc = |v: [f64; 2]| {
        let idg = (vqs - v[1]) / xtg;
        let iqg = (v[0] - vds) / xtg;
        [v[0] * idg + v[1] * iqg - p_gsc, v[0] * iqg - v[1] * idg]
    };
    let mut v = [vds, vqs];
    for _ in 0..30 {
        let r = gsc(v);
        if max_abs(&r) < 1e-14 {
            break;
        }
        let h = 1e-7;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut vp = v;
            vp[j] += h;
            let rp = gsc(vp);
            jac[0][j] = (rp[0] - r[0]) / h;
            jac[1][j] = (rp[1] - r[1]) / h;
        }
        let d = solve2(jac, r)?;
        v = [v[0] - d[0], v[1] - d[1]];
    }
    let [vdg, vqg] = v;
    let idg = (vqs - vqg) / xtg;
    let iqg = (vdg - vds) / xtg;

    let v_r = vdr.hypot(vqr);
    let delta_r = vdr.atan2(vqr);
    let e_ig = eqs.hypot(eds);
    let delta_ig = eds.atan2(eqs);
    let t_e = (eqs * iqs + eds * ids) / ws;
    let c_p = cp_value(input.v_w, wr)?;

    let mut x = StateVec::zeros();
    x[sx::OMEGA_R] = wr;
    x[sx::OMEGA_T] = wr;
    x[sx::THETA_TW] = t_e / p.k_sh;
    x[sx::I_QS] = iqs;
    x[sx::I_DS] = ids;
    x[sx::E_QS] = eqs;
    x[sx::E_DS] = eds;
    x[sx::V_DC] = p.v_dcref;
    x[sx::U1] = (delta_ig - p.delta_igref) / p.ki1;
    x[sx::U2] = delta_r / p.ki2;
    x[sx::U3] = (e_ig - p.e_igref) / p.ki3;
    x[sx::U4] = v_r / p.ki4;
    x[sx::U5] = -vdg / (xtg * p.ki5);
    x[sx::U6] = (vqg - vqs + p.v_sref) / (xtg * p.ki6);

    let mut a = AlgVec::zeros();
    a[ax::V_DS] = vds;
    a[ax::V_QS] = vqs;
    a[ax::V_DR] = vdr;
    a[ax::V_QR] = vqr;
    a[ax::V_DG] = vdg;
    a[ax::V_QG] = vqg;
    a[ax::I_DG] = idg;
    a[ax::I_QG] = iqg;
    a[ax::I_DR] = idr;
    a[ax::I_QR] = iqr;
    a[ax::P_GRID] = p_out;
    a[ax::Q_GRID] = q_out;
    a[ax::P_REF] = p_out;
    a[ax::Q_G] = 0.0;
    a[ax::V_S] = p.v_sref;
    a[ax::E_IG] = e_ig;
    a[ax::DELTA_IG] = delta_ig;
    a[ax::DELTA_R] = delta_r;
    a[ax::V_R] = v_r;
    a[ax::PHI_R] = delta_r.sin();
    a[ax::PSI_R] = delta_r.cos();
    a[ax::PHI_IG] = delta_ig.sin();
    a[ax::PSI_IG] = delta_ig.cos();
    a[ax::T_E] = t_e;
    a[ax::T_M] = t_e;
    a[ax::T_SH] = t_e;
    a[ax::P_T] = t_e * wr;
    a[ax::C_PPU] = c_p;
    Ok((x, a))
}

/// Outcome of an algebraic Newton solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgSolve {
    pub alg: AlgVec,
    pub iterations: usize,
    pub residual: f64,
}

/// Newton solve of `g(x, a) = 0` for `a` with `x` fixed, using the exact
/// algebraic Jacobian and refactoring every iteration.
pub fn solve_algebraic(
    p: &DfigParams,
    x: &StateVec,
    guess: &AlgVec,
    input: &InputVec,
    tol: f64,
    max_iter: usize,
) -> Result<AlgSolve> {
    let mut a = *guess;
    let mut r = residual_alg(p, x, &a, input)?;
    let mut norm = max_abs(&r);
    let mut iterations = 0;
    while norm > tol {
        if iterations == max_iter {
            return Err(Error::Initialization {
                iterations,
                residual: norm,
            });
        }
        let lu = Lu::factor(&alg_jacobian(p, x, &a, input))?;
        lu.solve_in_place(&mut r);
        for i in 0..N_ALG {
            a[i] -= r[i];
        }
        iterations += 1;
        r = residual_alg(p, x, &a, input)?;
        norm = max_abs(&r);
    }
    Ok(AlgSolve {
        alg: a,
        iterations,
        residual: norm,
    })
}
