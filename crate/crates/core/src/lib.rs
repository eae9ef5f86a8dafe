pub mod error;
pub mod linalg;
pub mod model;
pub mod scenario;
pub mod series;
pub mod smallsignal;
pub mod solver;

pub use error::{Error, Result};
pub use model::{AlgVec, DfigParams, InputVec, StateVec};
pub use scenario::Scenario;
pub use solver::{SimResult, SolverConfig};
