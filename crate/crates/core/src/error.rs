use thiserror::Error;

/// Errors raised while building problems, generating weights or solving.
///
/// Numerical failures that happen *during* a march (divergence, Newton
/// stalls) are not errors: they are reported through [`crate::RetCode`] so
/// that sweeps can record them as data points.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("fractional order must be positive, got {0}")]
    NonPositiveOrder(f64),
    #[error("empty time span [{t0}, {tf}]")]
    EmptyTimeSpan { t0: f64, tf: f64 },
    #[error("invalid step size {0}")]
    InvalidStep(f64),
    #[error("{coefficients} coefficients but {orders} orders")]
    LengthMismatch { coefficients: usize, orders: usize },
    #[error("leading coefficient of the highest-order term is zero")]
    ZeroLeadingCoefficient,
    #[error("expected {expected} initial conditions, got {got}")]
    MissingInitialConditions { expected: usize, got: usize },
    #[error("gamma function pole at {0}")]
    PoleError(f64),
    #[error("Mittag-Leffler evaluation did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("singular moment system for starting weights (alpha = {alpha})")]
    SingularMomentSystem { alpha: f64 },
    #[error("Newton iteration failed to converge after {0} iterations")]
    NewtonFailed(usize),
    #[error("singular Jacobian in Newton iteration")]
    SingularJacobian,
    #[error("exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("benchmark case has no analytical solution")]
    NoExactSolution,
    #[error("method {method} cannot solve {problem}")]
    UnsupportedMethod { method: String, problem: String },
}

pub type Result<T, E = FracError> = std::result::Result<T, E>;
