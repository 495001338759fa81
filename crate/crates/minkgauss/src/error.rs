use thiserror::Error;

/// Errors shared across the crate.
///
/// Verification-style failures carry a human-readable witness (point, node,
/// or time) so reports can name the offending location.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty ball family: {0}")]
    EmptyFamily(String),

    #[error("profile tolerance not met: {0}")]
    ToleranceNotMet(String),

    #[error("asymptotic shift estimates not monotone: {0}")]
    NonMonotoneTail(String),

    #[error("boost bracket failure: {0}")]
    BracketFailure(String),

    #[error("not spacelike: {0}")]
    NotSpacelike(String),

    #[error("not convex: {0}")]
    NotConvex(String),

    #[error("boundary data not spacelike-compatible: {0}")]
    NotSpacelikeCompatible(String),

    #[error("nodal Hessian numerically singular: {0}")]
    SingularHessian(String),

    #[error("line search stalled: {0}")]
    LineSearchStalled(String),

    #[error("maximum iterations reached: {0}")]
    MaxIterations(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("ordering violated: {0}")]
    OrderingViolated(String),

    #[error("time step collapsed: {0}")]
    StepCollapse(String),

    #[error("no exponential decay: {0}")]
    NoDecay(String),

    #[error("timeout: {0}")]
    Timeout(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("barrier gap too small for mollification: {0}")]
    GapTooSmall(String),

    #[error("monitor exceeded: {0}")]
    MonitorExceeded(String),

    #[error("unsupported dimension: {0}")]
    DimensionUnsupported(String),

    #[error("exhaustion not Cauchy: {0}")]
    NotCauchy(String),

    #[error("sup/inf over radii not decreasing: {0}")]
    NotDecreasing(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
