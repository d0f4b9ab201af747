use super::{BoundaryFunction, FemSpace, FieldKind, FieldSolution};
use crate::error::{Error, Result};
use crate::linalg::{solve_spd, Cholesky};
use crate::scalar::Real;

/// Largest admissible `sqrt(|s|) h_boundary`.
pub const RESOLUTION_LIMIT: f64 = 0.2;

/// `sqrt(|s|) h_boundary`, the number of boundary-layer widths spanned by
/// one boundary element.
pub fn resolution_product<T: Real>(space: &FemSpace<T>, s: T) -> T {
    s.abs().sqrt() * space.mesh().h_boundary()
}

/// Solves `(K - s M) U = M 1` on interior nodes with `U = 0` on the boundary.
pub fn solve_resolvent<T: Real>(space: &FemSpace<T>, s: T) -> Result<FieldSolution<T>> {
    if !s.is_finite() {
        return Err(Error::InvalidInput(format!("spectral parameter must be finite, got {s}")));
    }
    if s > T::zero() {
        let e1 = space.dirichlet_e1()?;
        if s >= e1 {
            return Err(Error::SpectralRange { s: s.to_f64_lossy(), e1: e1.to_f64_lossy() });
        }
    }
    let resolved = resolution_product(space, s) <= T::lit(RESOLUTION_LIMIT);
    if !resolved {
        log::warn!(
            "boundary layer of U_s unresolved at s = {s}: sqrt(|s|) h_boundary = {}",
            resolution_product(space, s)
        );
    }
    let a = space.stiffness_interior().linear_combination(T::one(), space.mass_interior(), -s);
    let load = space.interior_load();
    let ui = match solve_spd(&a, &load) {
        Ok(u) => u,
        Err(Error::NotPositiveDefinite { .. }) if s > T::zero() => {
            let e1 = space.dirichlet_e1()?;
            return Err(Error::SpectralRange { s: s.to_f64_lossy(), e1: e1.to_f64_lossy() });
        }
        Err(e) => return Err(e),
    };
    let res = residual_ratio(&a, &ui, &load);
    let mut floor = T::tol_floor(1e-9, 1e4);
    if s > T::zero() {
        // conditioning degrades like E1 / (E1 - s)
        let e1 = space.dirichlet_e1()?;
        floor = floor * e1 / (e1 - s);
    }
    if !(res <= floor) {
        return Err(Error::Solver { what: format!("resolvent solve at s = {s}"), residual: res.to_f64_lossy() });
    }
    if ui.iter().any(|&v| !(v > T::zero())) {
        log::warn!("resolvent at s = {s} is not positive at every interior node");
    }
    let kind = if s == T::zero() { FieldKind::Torsion } else { FieldKind::Resolvent };
    Ok(FieldSolution {
        mesh_id: space.mesh_id(),
        values: space.extend_interior(&ui),
        kind,
        parameter: s,
        boundary_layer_resolved: resolved,
    })
}

fn residual_ratio<T: Real>(a: &crate::linalg::CsrMatrix<T>, x: &[T], b: &[T]) -> T {
    let ax = a.mul_vec(x);
    let r: T = ax.iter().zip(b).map(|(&p, &q)| (p - q) * (p - q)).sum::<T>().sqrt();
    let nb: T = b.iter().map(|&q| q * q).sum::<T>().sqrt();
    r / nb
}

/// Variational normal derivative of `U_s` on the boundary:
/// `w_i flux_i = [(K - s M) U - M 1]_i` at every boundary node `i`.
pub fn normal_flux<T: Real>(space: &FemSpace<T>, u: &FieldSolution<T>, s: T) -> Result<BoundaryFunction<T>> {
    if u.mesh_id != space.mesh_id() || u.values.len() != space.node_count() {
        return Err(Error::Contract("field does not belong to this mesh".into()));
    }
    if !matches!(u.kind, FieldKind::Resolvent | FieldKind::Torsion) || u.parameter != s {
        return Err(Error::Contract(format!(
            "normal_flux needs the resolvent at s = {s}, got {:?} at {}",
            u.kind, u.parameter
        )));
    }
    let ku = space.stiffness().mul_vec(&u.values);
    let mu = space.mass().mul_vec(&u.values);
    let ones = space.mass_ones();
    let w = space.boundary_weights();
    let vals = space
        .mesh()
        .boundary_nodes()
        .iter()
        .map(|&g| (ku[g] - s * mu[g] - ones[g]) / w[g])
        .collect();
    BoundaryFunction::new(space, vals)
}

/// Factorization of `K_II - s M_II` kept for repeated solves.
pub struct ResolventSolver<T> {
    pub(crate) s: T,
    pub(crate) factor: Cholesky<T>,
}

impl<T: Real> ResolventSolver<T> {
    pub fn new(space: &FemSpace<T>, s: T) -> Result<Self> {
        let a = space.stiffness_interior().linear_combination(T::one(), space.mass_interior(), -s);
        Ok(Self { s, factor: Cholesky::factor(&a)? })
    }

    pub fn shift(&self) -> T {
        self.s
    }

    /// Interior solution for an interior right-hand side.
    pub fn solve_interior(&self, b: &[T]) -> Vec<T> {
        self.factor.solve(b)
    }
}
