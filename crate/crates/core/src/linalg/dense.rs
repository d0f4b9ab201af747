use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense square matrix for small Rayleigh–Ritz problems.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
/// ascending eigenvalues and the matching eigenvectors as columns.
pub fn symmetric_eigen<T: Real>(a: &DenseMatrix<T>) -> Result<(Vec<T>, DenseMatrix<T>)> {
    let n = a.n;
    let mut a = a.clone();
    let mut v = DenseMatrix::identity(n);
    let scale: T = a.data.iter().map(|x| *x * *x).sum::<T>().sqrt();
    let mut converged = n < 2;
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<T>()
            .sqrt();
        if off <= T::epsilon() * scale || off == T::zero() {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Solver { what: "Jacobi eigenvalue sweeps".into(), residual: f64::NAN });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = idx.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = DenseMatrix::zeros(n);
    for (new, &old) in idx.iter().enumerate() {
        for k in 0..n {
            vecs[(k, new)] = v[(k, old)];
        }
    }
    Ok((vals, vecs))
}

/// Solves `A x = lambda B x` for symmetric `A` and symmetric positive
/// definite `B` by Cholesky reduction.
pub fn generalized_symmetric_eigen<T: Real>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
) -> Result<(Vec<T>, DenseMatrix<T>)> {
    let n = a.n;
    let mut l = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = b[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if !(acc > T::zero()) {
                    return Err(Error::NotPositiveDefinite { pivot: i });
                }
                l[(i, i)] = acc.sqrt();
            } else {
                l[(i, j)] = acc / l[(j, j)];
            }
        }
    }
    // C = L^{-1} A L^{-T}
    let mut w = a.clone();
    for col in 0..n {
        for i in 0..n {
            let mut acc = w[(i, col)];
            for k in 0..i {
                acc -= l[(i, k)] * w[(k, col)];
            }
            w[(i, col)] = acc / l[(i, i)];
        }
    }
    let mut c = DenseMatrix::zeros(n);
    for row in 0..n {
        for i in 0..n {
            let mut acc = w[(row, i)];
            for k in 0..i {
                acc -= l[(i, k)] * c[(row, k)];
            }
            c[(row, i)] = acc / l[(i, i)];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let m = (c[(i, j)] + c[(j, i)]) / T::lit(2.0);
            c[(i, j)] = m;
            c[(j, i)] = m;
        }
    }
    let (vals, y) = symmetric_eigen(&c)?;
    // x = L^{-T} y
    let mut x = DenseMatrix::zeros(n);
    for col in 0..n {
        for i in (0..n).rev() {
            let mut acc = y[(i, col)];
            for k in i + 1..n {
                acc -= l[(k, i)] * x[(k, col)];
            }
            x[(i, col)] = acc / l[(i, i)];
        }
    }
    Ok((vals, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_two_by_two() {
        let mut a = DenseMatrix::<f64>::zeros(2);
        a.data = vec![2.0, 1.0, 1.0, 2.0];
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        assert!((vecs[(0, 0)].abs() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn generalized_matches_scaled_problem() {
        let mut a = DenseMatrix::<f64>::zeros(3);
        a.data = vec![4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let mut b = DenseMatrix::identity(3);
        for i in 0..3 {
            b[(i, i)] = 2.0;
        }
        let (g, x) = generalized_symmetric_eigen(&a, &b).unwrap();
        let (s, _) = symmetric_eigen(&a).unwrap();
        for k in 0..3 {
            assert!((g[k] - s[k] / 2.0).abs() < 1e-13);
            // B-orthonormal columns
            let nrm: f64 = (0..3).map(|i| 2.0 * x[(i, k)] * x[(i, k)]).sum();
            assert!((nrm - 1.0).abs() < 1e-12);
        }
    }
}
