use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular division: leading coefficient of `{signal}` is {value:e}")]
    SingularDivision { signal: String, value: f64 },

    #[error("singular square root: leading coefficient of `{signal}` is {value:e}")]
    SingularSqrt { signal: String, value: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("non-finite value in equation `{equation}`")]
    ModelEvaluation { equation: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("singular matrix: zero pivot at column {pivot}")]
    SingularMatrix { pivot: usize },

    #[error("algebraic matrix is structurally singular at t = {time} s (condition estimate {condition:e})")]
    StructuralSingularity { time: f64, condition: f64 },

    #[error("initialization failed after {iterations} iterations, residual norm {residual:e}")]
    Initialization { iterations: usize, residual: f64 },

    #[error("solver error in window {window} (t = {time} s): {reason}")]
    Solver {
        window: usize,
        time: f64,
        reason: String,
    },

    #[error("reference solver: Newton failed at t = {time} s after {iterations} iterations (residual {residual:e})")]
    ReferenceSolver {
        time: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("eigensolver: {0}")]
    Eigen(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
