use std::fmt;

/// Errors produced by solvers, quadrature and mechanism construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Parameters violate a constructor's constraints.
    InvalidParameters(String),
    /// An argument lies outside the domain of the operation.
    Domain(String),
    /// A density evaluated below the representable floor.
    DegenerateDensity { theta: f64, pdf: f64 },
    /// A root bracket does not contain a sign change.
    Bracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    /// An iterative routine exhausted its budget before converging.
    Convergence(String),
    /// The requested construction is outside the proven scope.
    Unsupported(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameters(msg) => write!(f, "invalid parameters: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::DegenerateDensity { theta, pdf } => {
                write!(f, "degenerate density at theta={theta}: pdf={pdf}")
            }
            Error::Bracket { lo, hi, g_lo, g_hi } => write!(
                f,
                "no sign change on bracket [{lo}, {hi}]: g(lo)={g_lo}, g(hi)={g_hi}"
            ),
            Error::Convergence(msg) => write!(f, "failed to converge: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
