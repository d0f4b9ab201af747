use super::{BoundaryFunction, FemSpace, FieldKind, FieldSolution, SpectralResult};
use crate::error::{Error, Result};
use crate::linalg::{dot, generalized_symmetric_eigen, Cholesky, CsrMatrix, DenseMatrix};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shift decreases allowed after the first failed factorization.
pub const SHIFT_RETRIES: usize = 5;

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions<T> {
    /// Absolute residual target in the lumped dual norm.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for EigenOptions<T> {
    fn default() -> Self {
        Self { tol: T::tol_floor(1e-8, 1e3), max_iter: 2000 }
    }
}

/// Rows of a generalized problem restricted to `dofs` (all nodes, or the
/// interior for Dirichlet conditions).
struct Pencil<'a, T> {
    space: &'a FemSpace<T>,
    a: CsrMatrix<T>,
    m: &'a CsrMatrix<T>,
    weights: Vec<T>,
}

impl<T: Real> Pencil<'_, T> {
    fn shifted(&self, tau: T) -> CsrMatrix<T> {
        self.a.linear_combination(T::one(), self.m, -tau)
    }

    fn dual_norm(&self, r: &[T]) -> T {
        r.iter().zip(&self.weights).map(|(&x, &w)| x * x / w).sum::<T>().sqrt()
    }

    fn normalize(&self, x: &mut [T]) {
        let mx = self.m.mul_vec(x);
        let nrm = dot(x, &mx).sqrt();
        let sign = if dot(&self.weights, x) < T::zero() { -T::one() } else { T::one() };
        for v in x.iter_mut() {
            *v = *v * sign / nrm;
        }
    }

    /// Rayleigh quotient and residual norm of an M-normalized vector.
    fn rayleigh(&self, x: &[T]) -> (T, T) {
        let ax = self.a.mul_vec(x);
        let mx = self.m.mul_vec(x);
        let lambda = dot(x, &ax) / dot(x, &mx);
        let r: Vec<T> = ax.iter().zip(&mx).map(|(&p, &q)| p - lambda * q).collect();
        (lambda, self.dual_norm(&r))
    }

    /// Shift-and-invert power iteration for the lowest eigenpair, starting
    /// from a shift known to lie below it. Shifts are moved up towards the
    /// Rayleigh quotient whenever the shifted matrix stays positive definite.
    fn lowest(&self, mut tau: T, mut factor: Cholesky<T>, opts: &EigenOptions<T>, relative: bool) -> Result<(T, Vec<T>, T, usize, T)> {
        let n = self.a.dim();
        let mut x = vec![T::one(); n];
        self.normalize(&mut x);
        let mut prev_res = T::infinity();
        let mut last = (T::zero(), T::infinity());
        for it in 1..=opts.max_iter {
            let mx = self.m.mul_vec(&x);
            x = factor.solve(&mx);
            self.normalize(&mut x);
            let (lambda, res) = self.rayleigh(&x);
            last = (lambda, res);
            let target = if relative { opts.tol * lambda.abs().max(T::one()) } else { opts.tol };
            if res <= target {
                return Ok((lambda, x, res, it, tau));
            }
            // refine the shift when convergence is slow
            if res > T::lit(0.05) * prev_res || it % 10 == 0 {
                let mut tau_try = lambda - T::lit(4.0) * res;
                for _ in 0..2 {
                    if tau_try <= tau {
                        break;
                    }
                    match Cholesky::factor(&self.shifted(tau_try)) {
                        Ok(f) => {
                            factor = f;
                            tau = tau_try;
                            break;
                        }
                        Err(Error::NotPositiveDefinite { .. }) => tau_try = (tau + tau_try) / T::lit(2.0),
                        Err(e) => return Err(e),
                    }
                }
            }
            prev_res = res;
        }
        Err(Error::Solver {
            what: format!("shift-and-invert iteration ({} iterations, eigenvalue estimate {})", opts.max_iter, last.0),
            residual: last.1.to_f64_lossy(),
        })
    }
}

/// Smallest eigenvalue of `(K + B_sigma) u = lambda M u` on all nodes.
pub fn robin_principal_eigenvalue<T: Real>(space: &FemSpace<T>, sigma: &BoundaryFunction<T>) -> Result<SpectralResult<T>> {
    robin_principal_eigenvalue_with(space, sigma, &EigenOptions::default())
}

pub fn robin_principal_eigenvalue_with<T: Real>(
    space: &FemSpace<T>,
    sigma: &BoundaryFunction<T>,
    opts: &EigenOptions<T>,
) -> Result<SpectralResult<T>> {
    let b = space.trace_mass(sigma)?;
    let pencil = Pencil {
        space,
        a: space.stiffness().linear_combination(T::one(), &b, T::one()),
        m: space.mass(),
        weights: space.mass_ones().to_vec(),
    };
    let neg = sigma.values().iter().map(|&v| (-v).max(T::zero())).fold(T::zero(), T::max);
    let mut tau = -T::lit(1.5) * neg * neg - T::one();
    let mut retries = 0;
    let factor = loop {
        match Cholesky::factor(&pencil.shifted(tau)) {
            Ok(f) => break f,
            Err(Error::NotPositiveDefinite { .. }) if retries < SHIFT_RETRIES => {
                retries += 1;
                let lower = T::lit(2.0) * tau - T::one();
                log::debug!("shift {tau} not below the Robin spectrum; retrying at {lower}");
                tau = lower;
            }
            Err(Error::NotPositiveDefinite { pivot }) => {
                return Err(Error::Solver {
                    what: format!(
                        "Robin shift-and-invert: no definite shift after {SHIFT_RETRIES} decreases (last {tau}, pivot {pivot})"
                    ),
                    residual: f64::NAN,
                })
            }
            Err(e) => return Err(e),
        }
    };
    let (lambda, x, res, iterations, shift) = pencil.lowest(tau, factor, opts, false)?;
    Ok(SpectralResult {
        eigenvalue: lambda,
        eigenfunction: FieldSolution {
            mesh_id: pencil.space.mesh_id(),
            values: x,
            kind: FieldKind::Eigenfunction,
            parameter: lambda,
            boundary_layer_resolved: true,
        },
        residual_norm: res,
        iterations,
        shift,
    })
}

fn dirichlet_pencil<T: Real>(space: &FemSpace<T>) -> Pencil<'_, T> {
    Pencil {
        space,
        a: space.stiffness_interior().clone(),
        m: space.mass_interior(),
        weights: space.interior_load(),
    }
}

/// Principal Dirichlet eigenpair by inverse iteration on the interior block.
pub fn dirichlet_ground_state<T: Real>(space: &FemSpace<T>) -> Result<SpectralResult<T>> {
    let pencil = dirichlet_pencil(space);
    let factor = Cholesky::factor(&pencil.a)?;
    let opts = EigenOptions { tol: T::tol_floor(1e-8, 1e3), max_iter: 2000 };
    let (lambda, x, res, iterations, shift) = pencil.lowest(T::zero(), factor, &opts, true)?;
    Ok(SpectralResult {
        eigenvalue: lambda,
        eigenfunction: FieldSolution {
            mesh_id: space.mesh_id(),
            values: space.extend_interior(&x),
            kind: FieldKind::Eigenfunction,
            parameter: lambda,
            boundary_layer_resolved: true,
        },
        residual_norm: res,
        iterations,
        shift,
    })
}

/// Dirichlet ground energy `E_1` of the discrete problem (cached per space).
pub fn estimate_dirichlet_e1<T: Real>(space: &FemSpace<T>) -> Result<T> {
    space.dirichlet_e1()
}

impl<T: Real> FemSpace<T> {
    pub fn dirichlet_e1(&self) -> Result<T> {
        if let Some(&e) = self.e1.get() {
            return Ok(e);
        }
        let e = dirichlet_ground_state(self)?.eigenvalue;
        Ok(*self.e1.get_or_init(|| e))
    }
}

/// The `count` lowest Dirichlet eigenpairs by subspace iteration with
/// Rayleigh–Ritz projection. Eigenfunctions are M-orthonormal.
pub fn dirichlet_eigenpairs<T: Real>(space: &FemSpace<T>, count: usize) -> Result<Vec<SpectralResult<T>>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let pencil = dirichlet_pencil(space);
    let n = pencil.a.dim();
    let p = (count + 4).min(n);
    if count > n {
        return Err(Error::InvalidInput(format!("{count} eigenpairs requested on {n} interior nodes")));
    }
    let factor = Cholesky::factor(&pencil.a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut block: Vec<Vec<T>> = (0..p)
        .map(|j| {
            (0..n)
                .map(|_| if j == 0 { T::one() } else { T::lit(rng.gen_range(-1.0..1.0)) })
                .collect()
        })
        .collect();
    let tol = T::tol_floor(1e-8, 1e3);
    for it in 1..=500 {
        let y: Vec<Vec<T>> = block.iter().map(|x| factor.solve(&pencil.m.mul_vec(x))).collect();
        let ay: Vec<Vec<T>> = y.iter().map(|v| pencil.a.mul_vec(v)).collect();
        let my: Vec<Vec<T>> = y.iter().map(|v| pencil.m.mul_vec(v)).collect();
        let mut ka = DenseMatrix::zeros(p);
        let mut ma = DenseMatrix::zeros(p);
        for i in 0..p {
            for j in 0..=i {
                let k = dot(&y[i], &ay[j]);
                let m = dot(&y[i], &my[j]);
                ka[(i, j)] = k;
                ka[(j, i)] = k;
                ma[(i, j)] = m;
                ma[(j, i)] = m;
            }
        }
        let (vals, q) = generalized_symmetric_eigen(&ka, &ma)?;
        block = (0..p)
            .map(|c| {
                let mut v = vec![T::zero(); n];
                for (r, yr) in y.iter().enumerate() {
                    let coef = q[(r, c)];
                    for (vi, &yi) in v.iter_mut().zip(yr) {
                        *vi += coef * yi;
                    }
                }
                v
            })
            .collect();
        let mut worst = T::zero();
        let mut residuals = Vec::with_capacity(count);
        for (c, x) in block.iter().take(count).enumerate() {
            let ax = pencil.a.mul_vec(x);
            let mx = pencil.m.mul_vec(x);
            let r: Vec<T> = ax.iter().zip(&mx).map(|(&a, &m)| a - vals[c] * m).collect();
            let res = pencil.dual_norm(&r);
            worst = worst.max(res / vals[c].abs());
            residuals.push(res);
        }
        if worst <= tol {
            return Ok(block
                .into_iter()
                .take(count)
                .enumerate()
                .map(|(c, mut x)| {
                    pencil.normalize(&mut x);
                    SpectralResult {
                        eigenvalue: vals[c],
                        eigenfunction: FieldSolution {
                            mesh_id: space.mesh_id(),
                            values: space.extend_interior(&x),
                            kind: FieldKind::Eigenfunction,
                            parameter: vals[c],
                            boundary_layer_resolved: true,
                        },
                        residual_norm: residuals[c],
                        iterations: it,
                        shift: T::zero(),
                    }
                })
                .collect());
        }
    }
    Err(Error::Solver { what: format!("subspace iteration for {count} Dirichlet eigenpairs"), residual: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble;
    use crate::geometry::{generate_mesh, Domain};
    use std::f64::consts::PI;

    #[test]
    fn neumann_ground_state() {
        let space = assemble(generate_mesh(&Domain::disk(1.0f64), 0.1, 0.0).unwrap()).unwrap();
        let r = robin_principal_eigenvalue(&space, &BoundaryFunction::constant(&space, 0.0)).unwrap();
        assert!(r.eigenvalue.abs() < 1e-10);
        let u = &r.eigenfunction.values;
        let c = 1.0 / space.area().sqrt();
        assert!(u.iter().all(|v| (v - c).abs() < 1e-6));
    }

    #[test]
    fn positive_sigma_lies_below_e1() {
        let space = assemble(generate_mesh(&Domain::disk(1.0f64), 0.08, 0.0).unwrap()).unwrap();
        let r = robin_principal_eigenvalue(&space, &BoundaryFunction::constant(&space, 2.0)).unwrap();
        let e1 = estimate_dirichlet_e1(&space).unwrap();
        assert!(r.eigenvalue > 0.0 && r.eigenvalue < e1);
        assert!(r.eigenfunction.values.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn square_e1_and_eigenpairs() {
        let space = assemble(generate_mesh(&Domain::unit_square(), 0.05f64, 0.0).unwrap()).unwrap();
        let e1 = estimate_dirichlet_e1(&space).unwrap();
        assert!((e1 - 2.0 * PI * PI).abs() / (2.0 * PI * PI) < 0.01);
        let pairs = dirichlet_eigenpairs(&space, 3).unwrap();
        assert!((pairs[0].eigenvalue - e1).abs() < 1e-6 * e1);
        // 5 pi^2 is double in the continuum; the mesh splits it slightly
        for p in &pairs[1..] {
            assert!((p.eigenvalue - 5.0 * PI * PI).abs() < 0.03 * 5.0 * PI * PI);
        }
    }

    #[test]
    fn strongly_negative_sigma_converges() {
        let space = assemble(generate_mesh(&Domain::disk(1.0f64), 0.05, 0.02).unwrap()).unwrap();
        let r = robin_principal_eigenvalue(&space, &BoundaryFunction::constant(&space, -10.0)).unwrap();
        assert!(r.residual_norm <= 1e-8);
        // leading behaviour -sigma^2 + sigma/R
        assert!(r.eigenvalue < -100.0 && r.eigenvalue > -115.0, "{}", r.eigenvalue);
    }
}
