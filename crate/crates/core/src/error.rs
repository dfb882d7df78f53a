use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("{what} needs even dimensions, found {rows}x{cols}")]
    OddDimension {
        what: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("{what} must be square, found {rows}x{cols}")]
    NotSquare {
        what: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("{what} is not symmetric (max asymmetry {residual:e})")]
    Asymmetric { what: &'static str, residual: f64 },

    #[error("{what} contains a non-finite entry")]
    NonFinite { what: &'static str },

    #[error("invalid horizon ({t}, {s}): need finite t < s")]
    InvalidHorizon { t: f64, s: f64 },

    #[error("integration length must be positive and finite, got {0}")]
    InvalidDuration(f64),

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),

    #[error("subspace {name} has odd dimension {dim}; the rank threshold probably split a cluster")]
    OddSubspace { name: &'static str, dim: usize },

    #[error(
        "subspace dimensions do not add up: 2*{n1} + 2*{n2} + 2*{n3} != {state_dim} (rank threshold misclassification)"
    )]
    DimensionBookkeeping {
        n1: usize,
        n2: usize,
        n3: usize,
        state_dim: usize,
    },

    #[error("span is not invariant under J (residual {residual:e})")]
    NotJInvariant { residual: f64 },

    #[error("pairing construction stalled after {found} of {wanted} vectors")]
    PairingExhausted { found: usize, wanted: usize },

    #[error("cross-check of {what} failed: principal angle {angle:e}")]
    CrossCheck { what: &'static str, angle: f64 },

    #[error("{what} is not orthogonal (residual {residual:e})")]
    NotOrthogonal { what: &'static str, residual: f64 },

    #[error("resolvent is singular at s = {re} + {im}i")]
    SingularResolvent { re: f64, im: f64 },

    #[error("canonical structure check failed: {0}")]
    Structure(String),

    #[error("numerical failure: {0}")]
    Numerical(&'static str),

    #[error("invalid input:\n  - {}", .0.join("\n  - "))]
    InvalidInput(Vec<String>),

    #[error("unknown builtin example {0:?}")]
    UnknownExample(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the caller's input rather than by a failed check.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::UnknownExample(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Asymmetric { .. }
                | Error::NonFinite { .. }
                | Error::Dimension { .. }
                | Error::OddDimension { .. }
                | Error::NotSquare { .. }
                | Error::InvalidHorizon { .. }
                | Error::InvalidDuration(_)
                | Error::InvalidTolerance(_)
                | Error::NotOrthogonal { .. }
        )
    }
}
