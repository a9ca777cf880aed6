use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The operation is undefined at the given point (typically the pole `x = 0`).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A surface or field description that violates the catalog rules.
    #[error("rejected surface spec: {0}")]
    Spec(String),

    /// A radius or region that does not fit inside the surface domain.
    #[error("region not admissible: {0}")]
    Region(String),

    #[error("linear solve failed: {message} (residual {residual:e})")]
    Solver { message: String, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    /// Reading a config or writing a report failed.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
