use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Mismatched dimensions or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A state failed a physicality check (non-positive covariance).
    #[error("state error: {0}")]
    State(String),

    /// Finite-difference derivatives failed to converge.
    #[error("numerical instability: {0}")]
    Instability(String),

    /// Readout covariance is singular or otherwise unusable.
    #[error("measurement model error: {0}")]
    MeasurementModel(String),

    /// Photon-number cutoff too small for the requested tail accuracy.
    #[error("cutoff error: tail bound {tail:.3e} above target; suggest n_max >= {suggested}")]
    Cutoff { tail: f64, suggested: usize },

    /// A quadrature or series refinement failed to reach its tolerance.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// No finite optimum inside the search range.
    #[error("range error: {0}")]
    Range(String),

    /// A closed form diverges at the requested parameters.
    #[error("divergence error: {0}")]
    Divergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
