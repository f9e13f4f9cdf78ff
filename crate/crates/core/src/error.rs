use alloc::string::String;

pub type Result<T> = core::result::Result<T, WideError>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WideError {
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("unknown energy `{0}`")]
    UnknownEnergy(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("initial values violated at node {node}")]
    ConstraintViolated { node: usize },
    #[error("non-finite value encountered")]
    NonFiniteValue,
    #[error("dissipation is not differentiable; use the proximal solver")]
    NonSmoothDissipation,
    #[error("system may be singular: tau = {tau} >= -1/lambda = {limit}")]
    SingularityRisk { tau: f64, limit: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("singular system (pivot {pivot} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("line search failed at iteration {iteration}")]
    LineSearchFailure { iteration: usize },
    #[error("proximal step collapsed below {step:e}")]
    StepTooSmall { step: f64 },
    #[error("free dimension {dim} exceeds brute-force limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("implicit Euler step {step} did not converge")]
    StepNewtonFailure { step: usize },
    #[error("incremental step {step} did not converge")]
    StepMinimizationFailure { step: usize },
    #[error("time step {tau} exceeds stability limit {limit}")]
    StabilityViolation { tau: f64, limit: f64 },
    #[error("node {node} minimization failed")]
    NodeMinimizationFailure { node: usize },
    #[error("unknown catalogue entry `{0}`")]
    UnknownEntry(String),
    #[error("solve failed at eps = {eps}: {reason}")]
    SolveFailed { eps: f64, reason: String },
    #[error("growth exponent {0} outside (1, inf)")]
    InvalidGrowth(f64),
    #[error("mode {k} outside 1..={m}")]
    ModeOutOfRange { k: usize, m: usize },
    #[error("grid with {n} steps is too short for the stencil")]
    GridTooShort { n: usize },
    #[error("operation requires {0}")]
    WrongRegime(&'static str),
    #[error("need at least {need} sweep entries, got {got}")]
    InsufficientSweep { need: usize, got: usize },
}
