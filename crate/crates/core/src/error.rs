use thiserror::Error;

/// Every failure the toolkit reports. Variant names follow the operation
/// that raised them; the payload says what went wrong.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),
    #[error("potential is not normalised: {0}")]
    Normalization(String),
    #[error("point outside the potential domain: {0}")]
    Domain(String),
    #[error("inversion failed: {0}")]
    Inversion(String),
    #[error("monotonicity violated: {0}")]
    Monotonicity(String),
    #[error("series inversion failed: {0}")]
    SeriesInversion(String),
    #[error("bad leading coefficient: {0}")]
    LeadingCoefficient(String),
    #[error("tolerance out of range: {0}")]
    Tolerance(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("ODE integration failed: {0}")]
    Integration(String),
    #[error("singular denominator: {0}")]
    SingularDenominator(String),
    #[error("no P(G) decomposition: {0}")]
    DecompositionUnavailable(String),
    #[error("no bracket: {0}")]
    Bracket(String),
    #[error("boundary margin too small: {0}")]
    Margin(String),
    #[error("no convergence: {0}")]
    Convergence(String),
}

impl Error {
    /// Stable kind name, used by the CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ParameterDomain(_) => "ParameterDomainError",
            Error::Normalization(_) => "NormalizationError",
            Error::Domain(_) => "DomainError",
            Error::Inversion(_) => "InversionError",
            Error::Monotonicity(_) => "MonotonicityError",
            Error::SeriesInversion(_) => "SeriesInversionError",
            Error::LeadingCoefficient(_) => "LeadingCoefficientError",
            Error::Tolerance(_) => "ToleranceError",
            Error::Quadrature(_) => "QuadratureError",
            Error::Integration(_) => "IntegrationError",
            Error::SingularDenominator(_) => "SingularDenominatorError",
            Error::DecompositionUnavailable(_) => "DecompositionUnavailable",
            Error::Bracket(_) => "BracketError",
            Error::Margin(_) => "MarginError",
            Error::Convergence(_) => "ConvergenceError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
