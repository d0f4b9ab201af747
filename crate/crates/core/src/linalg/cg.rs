use super::csr::{dot, CsrMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct CgOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Final `||b - A x|| / ||b||`.
    pub relative_residual: T,
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite
/// `a`, started from `x0`.
pub fn pcg<T: Real>(a: &CsrMatrix<T>, b: &[T], x0: Option<&[T]>, tol: T, max_iter: usize) -> Result<CgOutcome<T>> {
    let n = a.dim();
    let inv_diag: Vec<T> = a
        .diagonal()
        .iter()
        .map(|&d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![T::zero(); n]);
    let bnorm = dot(b, b).sqrt();
    if bnorm == T::zero() {
        return Ok(CgOutcome { x: vec![T::zero(); n], iterations: 0, relative_residual: T::zero() });
    }
    let ax = a.mul_vec(&x);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    for it in 0..max_iter {
        if rel <= tol {
            return Ok(CgOutcome { x, iterations: it, relative_residual: rel });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::NotPositiveDefinite { pivot: it });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
    }
    if rel <= tol {
        return Ok(CgOutcome { x, iterations: max_iter, relative_residual: rel });
    }
    Err(Error::Solver { what: format!("conjugate gradients ({max_iter} iterations)"), residual: rel.to_f64_lossy() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_on_poisson_1d() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t).unwrap();
        let b = vec![1.0f64; n];
        let out = pcg(&a, &b, None, 1e-12, 500).unwrap();
        let r: f64 = a.mul_vec(&out.x).iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(r < 1e-10);
        assert!(pcg(&a, &b, None, 1e-300, 3).is_err());
    }
}
