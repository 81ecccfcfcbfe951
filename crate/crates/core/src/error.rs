use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("point lies outside the open hemisphere of the tangent point (x.y = {dot:e})")]
    OutsideHemisphere { dot: f64 },

    #[error("region is not contained in an open hemisphere (enclosing radius {radius})")]
    NotInOpenHemisphere { radius: f64 },

    #[error("rejection sampling stalled: acceptance rate {rate:e} after {proposals} proposals")]
    RejectionStall { rate: f64, proposals: u64 },

    #[error("target area {target} cannot be realised: {reason}")]
    InfeasibleTarget { target: f64, reason: String },

    #[error(
        "evaluation budget of {max_evals} exhausted before tolerance (error estimate {err_est:e})"
    )]
    BudgetExceeded { max_evals: u64, err_est: f64 },

    #[error("integrand evaluated to a non-finite value")]
    NonFiniteIntegrand,

    #[error("quadrature method {method} cannot integrate this region")]
    MethodMismatch { method: String },

    #[error(
        "tangent point is not admissible: feasibility margin {margin:e} below floor {floor:e}"
    )]
    InfeasiblePoint { margin: f64, floor: f64 },

    #[error("no admissible tangent point: {0}")]
    NoAdmissiblePoint(String),

    #[error("optimizer stopped after {iterations} iterations with gradient norm {grad_norm:e}")]
    MaxItersExceeded {
        iterations: usize,
        grad_norm: f64,
        value: f64,
    },

    #[error("no admissible matching cap: {0}")]
    NoAdmissibleCap(String),

    #[error("potential direction mismatch: {0}")]
    DirectionMismatch(String),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl Error {
    /// Stable machine-readable name used in CLI error bodies.
    pub fn code_name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidPoint(_) => "invalid-point",
            Error::InvalidRegion(_) => "invalid-region",
            Error::Parse { .. } => "parse-error",
            Error::OutsideHemisphere { .. } => "outside-hemisphere",
            Error::NotInOpenHemisphere { .. } => "not-in-open-hemisphere",
            Error::RejectionStall { .. } => "rejection-stall",
            Error::InfeasibleTarget { .. } => "infeasible-target",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::NonFiniteIntegrand => "non-finite-integrand",
            Error::MethodMismatch { .. } => "method-mismatch",
            Error::InfeasiblePoint { .. } => "infeasible-point",
            Error::NoAdmissiblePoint(_) => "no-admissible-point",
            Error::MaxItersExceeded { .. } => "max-iters-exceeded",
            Error::NoAdmissibleCap(_) => "no-admissible-cap",
            Error::DirectionMismatch(_) => "direction-mismatch",
            Error::InvalidOption(_) => "invalid-option",
            Error::Io(_) => "io-error",
            Error::VerificationFailed(_) => "verification-failed",
        }
    }

    /// Process exit code: 1 parse/validation, 2 infeasibility, 3 numerical failure,
    /// 4 verification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch { .. }
            | Error::InvalidPoint(_)
            | Error::InvalidRegion(_)
            | Error::Parse { .. }
            | Error::MethodMismatch { .. }
            | Error::DirectionMismatch(_)
            | Error::InvalidOption(_)
            | Error::InfeasibleTarget { .. }
            | Error::Io(_) => 1,
            Error::OutsideHemisphere { .. }
            | Error::NotInOpenHemisphere { .. }
            | Error::InfeasiblePoint { .. }
            | Error::NoAdmissiblePoint(_)
            | Error::NoAdmissibleCap(_) => 2,
            Error::RejectionStall { .. }
            | Error::BudgetExceeded { .. }
            | Error::NonFiniteIntegrand
            | Error::MaxItersExceeded { .. } => 3,
            Error::VerificationFailed(_) => 4,
        }
    }
}
