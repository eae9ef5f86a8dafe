//! Small-signal analysis about an equilibrium: the reduced state matrix,
//! its eigenvalues, damping ratios and participation factors.

use crate::error::{Error, Result};
use crate::linalg::{eig_dense, Lu, Matrix, C64};
use crate::model::{
    equilibrium, residual_alg, residual_diff, solve_algebraic, AlgVec, DfigParams, InputVec,
    StateVec, N_ALG, N_STATES, STATE_NAMES,
};
use crate::scenario::Scenario;
use crate::solver::{msdtm_run, SolverConfig};

/// Relative finite-difference step of the Jacobians.
pub const FD_STEP: f64 = 1e-6;

/// Residual threshold for accepting a point as an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

/// Modes whose biorthogonality `|wᵀv|/(‖w‖‖v‖)` falls below this are
/// reported without participation factors.
pub const DEFECTIVE_TOL: f64 = 1e-8;

/// Blocks of the DAE Jacobian.
#[derive(Debug, Clone)]
pub struct Jacobians {
    pub fx: Matrix,
    pub fa: Matrix,
    pub gx: Matrix,
    pub ga: Matrix,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Central-difference Jacobians with step `rel·max(1, |z_i|)`.
pub fn jacobians(
    p: &DfigParams,
    input: &InputVec,
    x: &StateVec,
    a: &AlgVec,
    rel: f64,
) -> Result<Jacobians> {
    let mut j = Jacobians {
        fx: Matrix::zeros(N_STATES, N_STATES),
        fa: Matrix::zeros(N_STATES, N_ALG),
        gx: Matrix::zeros(N_ALG, N_STATES),
        ga: Matrix::zeros(N_ALG, N_ALG),
    };
    for c in 0..N_STATES {
        let h = rel * x[c].abs().max(1.0);
        let (mut xp, mut xm) = (*x, *x);
        xp[c] += h;
        xm[c] -= h;
        let fp = residual_diff(p, &xp, a, input)?;
        let fm = residual_diff(p, &xm, a, input)?;
        let gp = residual_alg(p, &xp, a, input)?;
        let gm = residual_alg(p, &xm, a, input)?;
        for r in 0..N_STATES {
            j.fx[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
        for r in 0..N_ALG {
            j.gx[(r, c)] = (gp[r] - gm[r]) / (2.0 * h);
        }
    }
    for c in 0..N_ALG {
        let h = rel * a[c].abs().max(1.0);
        let (mut ap, mut am) = (*a, *a);
        ap[c] += h;
        am[c] -= h;
        let fp = residual_diff(p, x, &ap, input)?;
        let fm = residual_diff(p, x, &am, input)?;
        let gp = residual_alg(p, x, &ap, input)?;
        let gm = residual_alg(p, x, &am, input)?;
        for r in 0..N_STATES {
            j.fa[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
        for r in 0..N_ALG {
            j.ga[(r, c)] = (gp[r] - gm[r]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// `A_red = f_x − f_a·g_a⁻¹·g_x` from a given set of Jacobians.
pub fn reduce(j: &Jacobians) -> Result<Matrix> {
    let lu = Lu::factor(&j.ga)?;
    let mut sol = Matrix::zeros(N_ALG, N_STATES);
    for c in 0..N_STATES {
        let col: Vec<f64> = (0..N_ALG).map(|r| j.gx[(r, c)]).collect();
        sol.set_column(c, &lu.solve(&col));
    }
    let correction = j.fa.mul_mat(&sol)?;
    let mut a = j.fx.clone();
    for r in 0..N_STATES {
        for c in 0..N_STATES {
            a[(r, c)] -= correction[(r, c)];
        }
    }
    Ok(a)
}

/// Reduced state matrix with a custom relative finite-difference step.
pub fn linearize_with_step(
    p: &DfigParams,
    input: &InputVec,
    x: &StateVec,
    a: &AlgVec,
    rel: f64,
) -> Result<Matrix> {
    let f = max_abs(&residual_diff(p, x, a, input)?);
    let g = max_abs(&residual_alg(p, x, a, input)?);
    if !(f.max(g) <= EQUILIBRIUM_TOL) {
        return Err(Error::Precondition(format!(
            "linearization point is not an equilibrium (residual {:e})",
            f.max(g)
        )));
    }
    reduce(&jacobians(p, input, x, a, rel)?)
}

/// Reduced 14×14 state matrix at an equilibrium.
pub fn linearize(p: &DfigParams, input: &InputVec, x: &StateVec, a: &AlgVec) -> Result<Matrix> {
    linearize_with_step(p, input, x, a, FD_STEP)
}

/// Participation factors `p_ki = |v_ki·w_ki|`, normalized so each mode's
/// column sums to one. Columns of modes flagged in `defective` are zero.
pub fn participation_factors(
    right: &[Vec<C64>],
    left: &[Vec<C64>],
    defective: &[bool],
) -> Result<Matrix> {
    let modes = right.len();
    if left.len() != modes || defective.len() != modes {
        return Err(Error::Dimension("eigenvector sets differ in size".into()));
    }
    let n = right.first().map_or(0, |v| v.len());
    let mut p = Matrix::zeros(n, modes);
    for i in 0..modes {
        if defective[i] {
            continue;
        }
        let col: Vec<f64> = (0..n).map(|k| (right[i][k] * left[i][k]).norm()).collect();
        let total: f64 = col.iter().sum();
        if total > 0.0 {
            for k in 0..n {
                p[(k, i)] = col[k] / total;
            }
        }
    }
    Ok(p)
}

/// Modal data of one operating point.
#[derive(Debug, Clone)]
pub struct ModalReport {
    pub eigenvalues: Vec<C64>,
    /// `−Re λ / |λ|`.
    pub damping_ratios: Vec<f64>,
    /// `|Im λ| / 2π` in Hz.
    pub frequencies: Vec<f64>,
    /// States × modes, column-normalized.
    pub participation: Matrix,
    /// `false` for modes whose participation factors are unavailable.
    pub participation_available: Vec<bool>,
    pub labels: Vec<&'static str>,
    pub trace: f64,
}

impl ModalReport {
    pub fn from_matrix(a: &Matrix) -> Result<Self> {
        let eig = eig_dense(a)?;
        let available: Vec<bool> = eig.biorthogonality.iter().map(|&b| b > DEFECTIVE_TOL).collect();
        let defective: Vec<bool> = available.iter().map(|ok| !ok).collect();
        let participation = participation_factors(&eig.right, &eig.left, &defective)?;
        let damping_ratios = eig
            .values
            .iter()
            .map(|l| if l.norm() > 0.0 { -l.re / l.norm() } else { 1.0 })
            .collect();
        let frequencies = eig
            .values
            .iter()
            .map(|l| l.im.abs() / (2.0 * std::f64::consts::PI))
            .collect();
        Ok(Self {
            eigenvalues: eig.values,
            damping_ratios,
            frequencies,
            participation,
            participation_available: available,
            labels: STATE_NAMES.to_vec(),
            trace: a.trace(),
        })
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_stable(&self) -> bool {
        self.max_real() < 0.0
    }

    /// Index of the oscillatory mode (`|Im λ| > 1e-6`) with the smallest
    /// damping ratio.
    pub fn least_damped_oscillatory(&self) -> Option<usize> {
        (0..self.eigenvalues.len())
            .filter(|&i| self.eigenvalues[i].im.abs() > 1e-6)
            .min_by(|&i, &j| self.damping_ratios[i].total_cmp(&self.damping_ratios[j]))
    }

    /// Index of the state with the largest participation in mode `i`.
    pub fn dominant_state(&self, i: usize) -> usize {
        (0..self.participation.rows())
            .max_by(|&k, &l| self.participation[(k, i)].total_cmp(&self.participation[(l, i)]))
            .unwrap_or(0)
    }
}

/// Equilibrium and modal data at one wind speed.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    pub v_w: f64,
    pub state: StateVec,
    pub alg: AlgVec,
    pub report: ModalReport,
}

/// One entry of a wind-speed sweep; failures are recorded, not fatal.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub v_w: f64,
    pub outcome: std::result::Result<OperatingPoint, Error>,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub entries: Vec<SweepEntry>,
    /// First wind speed with an eigenvalue in the right half plane.
    pub first_unstable: Option<f64>,
}

pub fn operating_point(p: &DfigParams, v_w: f64) -> Result<OperatingPoint> {
    let input = InputVec::new(v_w, p.x_e, p.v_qinf)?;
    let (x, a) = equilibrium(p, &input)?;
    let m = linearize(p, &input, &x, &a)?;
    Ok(OperatingPoint {
        v_w,
        state: x,
        alg: a,
        report: ModalReport::from_matrix(&m)?,
    })
}

/// Modal analysis over a grid of wind speeds.
pub fn sweep_eigs(p: &DfigParams, wind: &[f64]) -> Sweep {
    let entries: Vec<SweepEntry> = wind
        .iter()
        .map(|&v_w| SweepEntry {
            v_w,
            outcome: operating_point(p, v_w),
        })
        .collect();
    let first_unstable = entries
        .iter()
        .find(|e| matches!(&e.outcome, Ok(op) if !op.report.is_stable()))
        .map(|e| e.v_w);
    Sweep {
        entries,
        first_unstable,
    }
}

/// Growth of a small perturbation in the nonlinear simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainVerdict {
    /// Max state deviation from the equilibrium over `[5, 10]` s.
    pub early: f64,
    /// Max state deviation over `[15, 20]` s.
    pub late: f64,
    pub stable: bool,
}

/// Perturbs every state of an equilibrium by `1e-4` (alternating sign),
/// simulates 20 s with constant inputs, and calls the point stable when the
/// deviation over the last 5 s is smaller than over `[5, 10]` s.
pub fn time_domain_verdict(
    p: &DfigParams,
    op: &OperatingPoint,
    cfg: &SolverConfig,
) -> Result<TimeDomainVerdict> {
    let input = InputVec::new(op.v_w, p.x_e, p.v_qinf)?;
    let mut x = op.state;
    for i in 0..N_STATES {
        x[i] += if i % 2 == 0 { 1e-4 } else { -1e-4 };
    }
    let a = solve_algebraic(p, &x, &op.alg, &input, cfg.newton_tol, cfg.newton_max_iter)?.alg;
    let scenario = Scenario::constant(p, op.v_w, 20.0)?;
    let c = SolverConfig {
        t_end: None,
        output_dt: 0.01,
        ..cfg.clone()
    };
    let stable_run = msdtm_run(p, &scenario, &x, &a, &c);
    let run = match stable_run {
        Ok(r) => r,
        Err(Error::Solver { .. }) => {
            return Ok(TimeDomainVerdict {
                early: f64::INFINITY,
                late: f64::INFINITY,
                stable: false,
            })
        }
        Err(e) => return Err(e),
    };
    let deviation = |lo: f64, hi: f64| {
        run.times
            .iter()
            .zip(&run.states)
            .filter(|(&t, _)| t >= lo && t <= hi)
            .map(|(_, s)| (0..N_STATES).map(|i| (s[i] - op.state[i]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    };
    let early = deviation(5.0, 10.0);
    let late = deviation(15.0, 20.0);
    Ok(TimeDomainVerdict {
        early,
        late,
        stable: late.is_finite() && late < early,
    })
}
