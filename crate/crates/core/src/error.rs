use thiserror::Error;

/// Errors produced by the approximation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("norming functional undefined at zero")]
    ZeroVector,

    #[error("atom {index} has norm {norm}, exceeding 1")]
    AtomNorm { index: usize, norm: f64 },

    #[error("atom {0} is the zero vector and cannot be normalized")]
    ZeroAtom(usize),

    #[error("dictionary is empty")]
    EmptyDictionary,

    #[error("combinatorial budget exceeded: {subsets} subsets > {budget}; reduce the dictionary size or m")]
    BudgetExceeded { subsets: u128, budget: u128 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error comes from a failed computation rather than from
    /// the inputs or the environment.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Self::ZeroVector)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
