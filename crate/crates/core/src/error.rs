use thiserror::Error;

/// Errors raised by construction, verification and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singularity: {0}")]
    Singularity(String),

    /// An operator that must be a scalar multiple of the identity on the
    /// edge-safe subspace failed the check; carries the maximal deviation.
    #[error("identity violation: {context} (max deviation {deviation:.3e})")]
    IdentityViolation { context: String, deviation: f64 },

    #[error("gauge error: {0}")]
    Gauge(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("factorization error: {0}")]
    Factorization(String),

    #[error("lattice error: {0}")]
    Lattice(String),

    #[error("decomposition error: {0}")]
    Decomposition(String),

    #[error("asymptotics mismatch: {0}")]
    Asymptotics(String),

    #[error("sample-set error: {0}")]
    SampleSet(String),

    #[error("missing value: {0}")]
    Missing(String),

    #[error("numerical error: {0}")]
    Numerics(String),
}

pub type Result<T> = std::result::Result<T, Error>;
