//! Error types shared across the library.

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A metric (or induced metric) lost positive definiteness.
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    /// A numerical procedure failed to reach its accuracy target.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A barrier profile touched |k| = 1 before the outer radius,
    /// signalling that the anchor radius is too small.
    #[error("barrier failure at r = {radius}: {message}")]
    BarrierFailure { radius: f64, message: String },

    /// Newton iteration (or continuation) did not converge.
    #[error("solver non-convergence: {0}")]
    NonConvergence(String),

    /// A least-squares fit was ill-posed (sign changes, conditioning).
    #[error("fit error: {0}")]
    Fit(String),

    /// Invalid run configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
