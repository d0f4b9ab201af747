use super::csr::CsrMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;
use std::collections::VecDeque;

/// Entries allowed in the envelope before the factorization refuses.
pub const ENVELOPE_CAP: usize = 150_000_000;

/// Reverse Cuthill–McKee ordering; `perm[new] = old`.
pub fn rcm_ordering<T: Real>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(a, seed, &degree);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        let mut nbrs = Vec::new();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(a.row(v).0.iter().copied().filter(|&j| !visited[j]));
            nbrs.sort_by_key(|&j| (degree[j], j));
            for &j in &nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels<T: Real>(a: &CsrMatrix<T>, start: usize) -> Vec<Vec<usize>> {
    let mut levels = vec![vec![start]];
    let mut seen = std::collections::HashSet::new();
    seen.insert(start);
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &j in a.row(v).0 {
                if seen.insert(j) {
                    next.push(j);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

fn pseudo_peripheral<T: Real>(a: &CsrMatrix<T>, seed: usize, degree: &[usize]) -> usize {
    let mut v = seed;
    let mut ecc = bfs_levels(a, v).len();
    for _ in 0..8 {
        let levels = bfs_levels(a, v);
        let last = levels.last().unwrap();
        let cand = *last.iter().min_by_key(|&&j| (degree[j], j)).unwrap();
        let e = bfs_levels(a, cand).len();
        if e <= ecc {
            break;
        }
        ecc = e;
        v = cand;
    }
    v
}

/// Envelope (skyline) Cholesky factor `P A P^T = L L^T` of a symmetric
/// positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let perm = rcm_ordering(a);
        Self::factor_with_ordering(a, perm)
    }

    pub fn factor_with_ordering(a: &CsrMatrix<T>, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0usize; n];
        for i in 0..n {
            let row = a.row(perm[i]).0;
            first[i] = row.iter().map(|&j| inv[j]).filter(|&j| j <= i).min().unwrap_or(i);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0usize);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let total = start[n];
        if total > ENVELOPE_CAP {
            return Err(Error::Resource { what: format!("Cholesky envelope of {total} entries"), cap: ENVELOPE_CAP });
        }
        let mut vals = vec![T::zero(); total];
        for i in 0..n {
            let (c, v) = a.row(perm[i]);
            for (&j, &x) in c.iter().zip(v) {
                let jj = inv[j];
                if jj <= i {
                    vals[start[i] + jj - first[i]] = x;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let si = start[i];
            for j in fi..i {
                let fj = first[j];
                let sj = start[j];
                let k0 = fi.max(fj);
                let (head, tail) = vals.split_at_mut(si);
                let lj = &head[sj + k0 - fj..sj + j - fj];
                let li = &tail[k0 - fi..j - fi];
                let mut acc = tail[j - fi];
                for (x, y) in li.iter().zip(lj) {
                    acc -= *x * *y;
                }
                tail[j - fi] = acc / head[sj + j - fj];
            }
            let row = &mut vals[si..si + i - fi + 1];
            let (off, diag) = row.split_at_mut(i - fi);
            let mut d = diag[0];
            for x in off.iter() {
                d -= *x * *x;
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: perm[i] });
            }
            diag[0] = d.sqrt();
        }
        Ok(Self { perm, first, start, vals })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn envelope_size(&self) -> usize {
        self.vals.len()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            let mut acc = y[i];
            for (k, &l) in row[..i - fi].iter().enumerate() {
                acc -= l * y[fi + k];
            }
            y[i] = acc / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            y[i] = y[i] / row[i - fi];
            let xi = y[i];
            for (k, &l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= l * xi;
            }
        }
        let mut x = vec![T::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize, shift: f64) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + shift));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn solves_tridiagonal() {
        let a = laplacian_1d(50, 0.0);
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x);
        let c = Cholesky::factor(&a).unwrap();
        let y = c.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite() {
        // eigenvalues of the 1D Laplacian lie in (0, 4); shifting by -1 is indefinite
        let a = laplacian_1d(20, -1.0);
        assert!(matches!(Cholesky::factor(&a), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_1d(30, 0.0);
        let mut p = rcm_ordering(&a);
        p.sort();
        assert_eq!(p, (0..30).collect::<Vec<_>>());
    }
}
