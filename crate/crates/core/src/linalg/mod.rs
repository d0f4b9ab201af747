//! Sparse symmetric linear algebra: CSR storage, envelope Cholesky with
//! reverse Cuthill–McKee ordering, preconditioned conjugate gradients and a
//! small dense symmetric eigensolver.

mod cg;
mod cholesky;
mod csr;
mod dense;

pub use cg::{pcg, CgOutcome};
pub use cholesky::{rcm_ordering, Cholesky, ENVELOPE_CAP};
pub use csr::{dot, CsrMatrix};
pub use dense::{generalized_symmetric_eigen, symmetric_eigen, DenseMatrix};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves a symmetric positive definite system by Cholesky, falling back to
/// conjugate gradients when the envelope would exceed [`ENVELOPE_CAP`].
pub fn solve_spd<T: Real>(a: &CsrMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    match Cholesky::factor(a) {
        Ok(c) => Ok(c.solve(b)),
        Err(Error::Resource { .. }) => {
            log::warn!("envelope too large for a direct solve; using conjugate gradients");
            let tol = T::tol_floor(1e-12, 100.0);
            Ok(pcg(a, b, None, tol, 20 * a.dim() + 1000)?.x)
        }
        Err(e) => Err(e),
    }
}
