use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid of {got} samples is too coarse for {n_modes} modes (need at least {needed})")]
    GridTooCoarse { got: usize, n_modes: usize, needed: usize },

    #[error("nonlinearity evaluated outside its domain: {0}")]
    DomainViolation(String),

    #[error("argument out of range: {0}")]
    ArgumentOutOfRange(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("solvability violated: forcing mean {mean:e} must vanish")]
    SolvabilityViolation { mean: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("condition violated: {0}")]
    ConditionViolation(String),

    #[error("ordering violated: {0}")]
    OrderingViolation(String),

    #[error("no constant root of g(a) + mean(e) in (0, {bracket:e}]")]
    NoConstantRoot { bracket: f64 },

    #[error("continuation stalled at lambda = {lambda} (step {step:e})")]
    ContinuationStall { lambda: f64, step: f64 },

    #[error("positivity lost: min(u) = {min:e} at lambda = {lambda}")]
    PositivityLoss { min: f64, lambda: f64 },

    #[error("branch seed failed: {0}")]
    SeedFailure(String),

    #[error("branch stalled at a fold near mu = {mu} (step {step:e})")]
    StallAtFold { mu: f64, step: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GridTooCoarse { .. } => "grid_too_coarse",
            Error::DomainViolation(_) => "domain_violation",
            Error::ArgumentOutOfRange(_) => "argument_out_of_range",
            Error::QuadratureNonConvergence(_) => "quadrature_non_convergence",
            Error::SolvabilityViolation { .. } => "solvability_violation",
            Error::NonConvergence { .. } => "non_convergence",
            Error::ConditionViolation(_) => "condition_violation",
            Error::OrderingViolation(_) => "ordering_violation",
            Error::NoConstantRoot { .. } => "no_constant_root",
            Error::ContinuationStall { .. } => "continuation_stall",
            Error::PositivityLoss { .. } => "positivity_loss",
            Error::SeedFailure(_) => "seed_failure",
            Error::StallAtFold { .. } => "stall_at_fold",
            Error::InvalidParameter(_) => "invalid_parameter",
        }
    }
}
