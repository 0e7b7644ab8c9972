use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no tabulated triangle constant for {0}")]
    UnknownKappa(String),

    #[error("feasibility violated: l*u = {ell_u} is not below {bound}")]
    FeasibilityViolated { ell_u: f64, bound: f64 },

    #[error("support of {support} atoms exceeds the enumeration cap of {cap}")]
    SupportTooLarge { support: usize, cap: usize },

    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound}")]
    QuadratureNotConverged { estimate: f64, error_bound: f64 },

    #[error("norm diverges: {0}")]
    Divergent(String),

    #[error("sets overlap at index {0}")]
    Overlap(usize),

    #[error("filtration is not nested at position {0}")]
    NotNested(usize),

    #[error("filtration is empty")]
    EmptyFiltration,

    #[error("operation requires a normed family (kappa = 1), got kappa = {0}")]
    NotNormed(f64),

    #[error("malformed document: {0}")]
    Document(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
