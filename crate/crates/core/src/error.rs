use thiserror::Error;

/// Errors raised by geometry, special functions, solvers and suites.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resource limit exceeded: {what} (cap {cap})")]
    Resource { what: String, cap: usize },
    #[error("value out of range: {0}")]
    Range(String),
    #[error("s = {s} is not below the Dirichlet ground energy estimate E1 = {e1}")]
    SpectralRange { s: f64, e1: f64 },
    #[error("{what} did not converge (residual {residual:e})")]
    Solver { what: String, residual: f64 },
    #[error(
        "quadrature hit {subdivisions} subdivisions: estimate {estimate}, error bound {error_bound:e}"
    )]
    Accuracy {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },
    #[error("degenerate triangle {index} (signed area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error(
        "boundary layer unresolved: sqrt(|s|) * h_boundary = {product:.4} exceeds 0.2 \
         (finest admissible mu on this mesh is about {finest_mu:.4e})"
    )]
    ResolutionCap { product: f64, finest_mu: f64 },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("unsupported domain: {0}")]
    Unsupported(String),
    #[error("mesh format: line {line}: {message}")]
    MeshFormat { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
