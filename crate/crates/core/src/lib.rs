//! Optimal Robin boundary parameters on bounded planar domains.
//!
//! For a prescribed boundary integral `mu`, the Robin parameter maximizing
//! the principal eigenvalue of the Laplacian is built from the Dirichlet
//! resolvent `U_s = (-Delta_D - s)^{-1} 1`: the maximal eigenvalue is the root
//! `s(mu)` of `F(s) = s^2 int U_s + s |Omega| = mu`, the optimizer is
//! `sigma_mu = -s dU_s/dn` and `u_mu = s U_s + 1` is its ground state.
//!
//! The numerical core is generic over [`Real`]; the aliases below fix it to
//! `f64`.

pub mod error;
pub mod fem;
pub mod geometry;
pub mod optimizer;
pub mod oracles;
pub mod linalg;
pub mod scalar;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Domain = geometry::Domain<f64>;
pub type DomainMetrics = geometry::DomainMetrics<f64>;
pub type Mesh = geometry::Mesh<f64>;
pub type SparseMatrix = linalg::CsrMatrix<f64>;
pub type FemSpace = fem::FemSpace<f64>;
pub type FieldSolution = fem::FieldSolution<f64>;
pub type BoundaryFunction = fem::BoundaryFunction<f64>;
pub type SpectralResult = fem::SpectralResult<f64>;
pub type HeatContentCurve = fem::HeatContentCurve<f64>;
pub type OptimizeResult = optimizer::OptimizeResult<f64>;
pub type AsymptoticPrediction = oracles::AsymptoticPrediction<f64>;
