use thiserror::Error;

/// Errors raised by the lifting library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed multi-index {entries:?} in dimension {dim}: {reason}")]
    MalformedIndex {
        entries: Vec<usize>,
        dim: usize,
        reason: &'static str,
    },

    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree overflow: {p} + {q} exceeds ambient dimension {dim}")]
    DegreeOverflow { p: usize, q: usize, dim: usize },

    #[error("vertical direction: the (1..n) component vanishes, no Jacobian exists")]
    VerticalDirection,

    #[error("negative parameter {name} = {value}")]
    NegativeParameter { name: &'static str, value: f64 },

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("cube with base {base:?} and axes {axes:?} is not part of the cubical set")]
    CubeNotInComplex { base: Vec<i64>, axes: Vec<usize> },

    #[error("cost evaluated outside its domain: {0}")]
    DomainViolation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("solver diverged at iteration {iteration}: {reason}")]
    Diverged { iteration: usize, reason: String },

    #[error("value {value} outside codomain range [{min}, {max}]")]
    OutsideCodomain { value: f64, min: f64, max: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
