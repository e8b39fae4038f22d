use thiserror::Error;

/// Errors raised by mesh construction, assembly and the linear solvers.
#[derive(Debug, Error)]
pub enum LdgError {
    #[error("invalid mesh specification: {0}")]
    InvalidMesh(String),

    #[error("{name} = {value} is outside {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("coefficient assumption violated: {0}")]
    Coefficients(String),

    #[error("matrix is singular: zero pivot at row {pivot}")]
    Singular { pivot: usize },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("solver failure (N={n}, k={k}, eps={eps:e}, dt={dt:e}): {source}")]
    Step {
        n: usize,
        k: usize,
        eps: f64,
        dt: f64,
        #[source]
        source: Box<LdgError>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LdgError>;
