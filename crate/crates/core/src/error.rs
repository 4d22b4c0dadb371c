use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point lies on the x0 axis (rho = 0)")]
    DegenerateAxis,
    #[error("point is the origin (r = 0)")]
    ZeroPoint,
    #[error("finite-difference stencil leaves the domain: {0}")]
    StencilOutOfDomain(String),
    #[error("path needs at least two distinct vertices")]
    EmptyPath,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("result not representable: {0}")]
    Overflow(String),
    #[error("pole at {0}")]
    Pole(String),
    #[error("degenerate separation mode: {0}")]
    DegenerateMode(String),
    #[error("zero frequency: {0}")]
    ZeroFrequency(String),
    #[error("candidate arity {got} does not match system arity {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("non-finite sample at {0:?}")]
    NonFiniteSample(Vec<f64>),
    #[error("partial derivative unavailable: {0}")]
    PartialUnavailable(String),
    #[error("grid resolution {0} is below the minimum of 8")]
    ResolutionTooLow(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no closed form for {0}")]
    NoClosedForm(String),
    #[error("transform diverges at this point: {0}")]
    ConvergenceDomain(String),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
}

impl Error {
    /// Stable machine-readable tag, used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateAxis => "DegenerateAxis",
            Error::ZeroPoint => "ZeroPoint",
            Error::StencilOutOfDomain(_) => "StencilOutOfDomain",
            Error::EmptyPath => "EmptyPath",
            Error::Domain(_) => "DomainError",
            Error::Overflow(_) => "OverflowError",
            Error::Pole(_) => "PoleError",
            Error::DegenerateMode(_) => "DegenerateMode",
            Error::ZeroFrequency(_) => "ZeroFrequency",
            Error::ArityMismatch { .. } => "ArityMismatch",
            Error::NonFiniteSample(_) => "NonFiniteSample",
            Error::PartialUnavailable(_) => "PartialUnavailable",
            Error::ResolutionTooLow(_) => "ResolutionTooLow",
            Error::InvalidParams(_) => "InvalidParams",
            Error::NoClosedForm(_) => "NoClosedForm",
            Error::ConvergenceDomain(_) => "ConvergenceDomain",
            Error::QuadratureFailure(_) => "QuadratureFailure",
        }
    }
}
