use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("not a rational function: {0}")]
    NotRational(String),
    #[error("degree {0} is below 2")]
    DegreeTooSmall(usize),
    #[error("numerator and denominator share a root")]
    NotCoprime,
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("root finder did not converge ({converged} of {total} roots)")]
    NonConvergence { converged: usize, total: usize },
    #[error("series order {have} is insufficient, need {need}")]
    InsufficientOrder { have: i64, need: i64 },
    #[error("series has a nonzero constant term")]
    NonzeroConstantTerm,
    #[error("series is not invertible")]
    NotInvertible,
    #[error("point is indeterminate (0:0)")]
    IndeterminatePoint,
    #[error("degree {degree} exceeds cap {cap}")]
    DegreeCapExceeded { degree: u64, cap: u64 },
    #[error("point is not periodic")]
    NotPeriodic,
    #[error("cycle is not parabolic")]
    NotParabolic,
    #[error("N = {big_n} is not divisible by n = {n}")]
    NonDivisible { big_n: usize, n: usize },
    #[error("leading coefficient of the first return map is not a root of unity")]
    NotRootOfUnity,
    #[error("divergence is not invariant under the first return map")]
    UnsupportedDivergence,
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("points are degenerate: {0}")]
    DegeneratePoints(String),
    #[error("reconstruction residual {residual:e} exceeds tolerance {tolerance:e}")]
    ReconstructionResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("quadratic differential is not integrable")]
    NotIntegrable,
    #[error("quadrature budget exhausted (error estimate {estimate:e})")]
    QuadratureBudgetExceeded { estimate: f64 },
    #[error("chart radius too large: {0}")]
    RadiusTooLarge(String),
    #[error("flux extrapolation did not converge (spread {spread:e})")]
    FluxNotConverged { spread: f64 },
    #[error("A does not contain the critical values")]
    CriticalValuesMissing,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for errors caused by the input rather than by numerical breakdown.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::SyntaxError { .. }
                | Error::NotRational(_)
                | Error::DegreeTooSmall(_)
                | Error::NotCoprime
                | Error::NotPeriodic
                | Error::NotParabolic
                | Error::InvalidInput(_)
                | Error::CriticalValuesMissing
                | Error::DegeneratePoints(_)
                | Error::NotIntegrable
                | Error::UnsupportedDivergence
        )
    }
}
