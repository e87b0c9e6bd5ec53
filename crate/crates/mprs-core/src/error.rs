use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// All training values are equal; the angle transform is undefined.
    #[error("degenerate data range: all training values equal {0}")]
    DegenerateRange(f64),

    /// A neighbor query asked for more neighbors than there are samples.
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// Slope estimation was asked for with fewer than two energy values.
    #[error("insufficient history: slope fit needs at least 2 points, got {got}")]
    InsufficientHistory { got: usize },

    /// The kriging system could not be solved. `duplicates` lists pairs of
    /// coinciding sample sites when those are the cause.
    #[error("singular kriging system{}", format_duplicates(duplicates))]
    SingularSystem { duplicates: Vec<(usize, usize)> },

    /// Covariance factorization failed even after jitter escalation.
    #[error("covariance factorization failed after jitter escalation")]
    FactorizationFailure,

    /// A split request that cannot produce non-empty train and validation sets.
    #[error("invalid split: {0}")]
    InvalidSplit(String),

    /// A parameter outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Mismatched dimensions or lengths between point sets / arrays.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Non-finite value in an input array.
    #[error("non-finite input: {0}")]
    NonFiniteInput(String),
}

fn format_duplicates(dups: &[(usize, usize)]) -> String {
    if dups.is_empty() {
        String::new()
    } else {
        let pairs: Vec<String> = dups.iter().map(|(i, j)| format!("({i},{j})")).collect();
        format!(": duplicate sample sites {}", pairs.join(", "))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
