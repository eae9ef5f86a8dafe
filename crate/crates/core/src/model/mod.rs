//! The DFIG single-machine-infinite-bus model: parameters, variable
//! layout, the original equations and their transformed recurrences.

pub mod dt;
pub mod init;
pub mod params;
pub mod residual;
pub mod vars;

pub use dt::{
    dt_alg_matrix, dt_alg_residual, dt_alg_solve, dt_aux_update, dt_cp_coeff, dt_state_advance,
    generate_window, AlgSystem, AuxSeriesBundle, SystemSeries,
};
pub use init::{default_guess, equilibrium, init_equilibrium, solve_algebraic, AlgSolve};
pub use params::DfigParams;
pub use residual::{alg_jacobian, cp_value, residual_alg, residual_diff};
pub use vars::{ax, sx, AlgVec, InputVec, StateVec, ALG_NAMES, N_ALG, N_STATES, STATE_NAMES};
