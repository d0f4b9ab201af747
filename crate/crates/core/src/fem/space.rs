use crate::error::{Error, Result};
use crate::geometry::{Mesh, MeshId};
use crate::linalg::CsrMatrix;
use crate::scalar::Real;
use std::sync::{Arc, OnceLock};

use super::BoundaryFunction;

/// Assembled P1 space on a mesh: stiffness `K`, consistent mass `M`, lumped
/// boundary weights and the interior (Dirichlet-eliminated) blocks.
#[derive(Clone, Debug)]
pub struct FemSpace<T> {
    mesh: Arc<Mesh<T>>,
    stiffness: CsrMatrix<T>,
    mass: CsrMatrix<T>,
    boundary_weights: Vec<T>,
    interior: Vec<usize>,
    stiffness_ii: CsrMatrix<T>,
    mass_ii: CsrMatrix<T>,
    mass_ones: Vec<T>,
    area: T,
    perimeter: T,
    pub(crate) e1: OnceLock<T>,
}

/// Assembles the finite-element space of `mesh`.
pub fn assemble<T: Real>(mesh: Mesh<T>) -> Result<FemSpace<T>> {
    FemSpace::new(Arc::new(mesh))
}

impl<T: Real> FemSpace<T> {
    pub fn new(mesh: Arc<Mesh<T>>) -> Result<Self> {
        let n = mesh.node_count();
        let nodes = mesh.nodes();
        let mut kt = Vec::with_capacity(9 * mesh.triangles().len());
        let mut mt = Vec::with_capacity(9 * mesh.triangles().len());
        let twelfth = T::lit(1.0 / 12.0);
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let p = tri.map(|i| nodes[i]);
            let area = mesh.triangle_area(t);
            if !(area > T::zero()) || !area.is_finite() {
                return Err(Error::DegenerateTriangle { index: t, area: area.to_f64_lossy() });
            }
            // gradient of the hat function at vertex a is rot90(p_c - p_b) / (2 area)
            let g: [[T; 2]; 3] = std::array::from_fn(|a| {
                let b = p[(a + 1) % 3];
                let c = p[(a + 2) % 3];
                [b[1] - c[1], c[0] - b[0]]
            });
            let scale = T::one() / (T::lit(4.0) * area);
            for a in 0..3 {
                for b in 0..3 {
                    let k = (g[a][0] * g[b][0] + g[a][1] * g[b][1]) * scale;
                    kt.push((tri[a], tri[b], k));
                    let m = if a == b { T::lit(2.0) } else { T::one() } * area * twelfth;
                    mt.push((tri[a], tri[b], m));
                }
            }
        }
        let stiffness = CsrMatrix::from_triplets(n, &kt)?;
        let mass = CsrMatrix::from_triplets(n, &mt)?;
        let boundary_weights = mesh.boundary_weights();
        let interior: Vec<usize> = (0..n).filter(|&i| !mesh.is_boundary(i)).collect();
        if interior.is_empty() {
            return Err(Error::Geometry("mesh has no interior nodes".into()));
        }
        let stiffness_ii = stiffness.submatrix(&interior);
        let mass_ii = mass.submatrix(&interior);
        let mass_ones = mass.row_sums();
        let area = mass_ones.iter().copied().sum();
        let perimeter = boundary_weights.iter().copied().sum();
        Ok(Self {
            mesh,
            stiffness,
            mass,
            boundary_weights,
            interior,
            stiffness_ii,
            mass_ii,
            mass_ones,
            area,
            perimeter,
            e1: OnceLock::new(),
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn mesh_id(&self) -> MeshId {
        self.mesh.id()
    }

    pub fn node_count(&self) -> usize {
        self.mesh.node_count()
    }

    pub fn stiffness(&self) -> &CsrMatrix<T> {
        &self.stiffness
    }

    pub fn mass(&self) -> &CsrMatrix<T> {
        &self.mass
    }

    pub fn stiffness_interior(&self) -> &CsrMatrix<T> {
        &self.stiffness_ii
    }

    pub fn mass_interior(&self) -> &CsrMatrix<T> {
        &self.mass_ii
    }

    /// Interior node indices, ascending.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// `M 1`, which is also the lumped mass.
    pub fn mass_ones(&self) -> &[T] {
        &self.mass_ones
    }

    /// `(M 1)` restricted to the interior nodes.
    pub fn interior_load(&self) -> Vec<T> {
        self.interior.iter().map(|&i| self.mass_ones[i]).collect()
    }

    /// Lumped boundary weight of every node (zero in the interior).
    pub fn boundary_weights(&self) -> &[T] {
        &self.boundary_weights
    }

    /// `1^T M 1`.
    pub fn area(&self) -> T {
        self.area
    }

    pub fn perimeter(&self) -> T {
        self.perimeter
    }

    /// Scatters interior values into a full nodal vector with zero boundary.
    pub fn extend_interior(&self, ui: &[T]) -> Vec<T> {
        let mut u = vec![T::zero(); self.node_count()];
        for (&g, &v) in self.interior.iter().zip(ui) {
            u[g] = v;
        }
        u
    }

    pub fn restrict_interior(&self, u: &[T]) -> Vec<T> {
        self.interior.iter().map(|&g| u[g]).collect()
    }

    /// `int u` with the consistent mass.
    pub fn integral(&self, u: &[T]) -> T {
        crate::linalg::dot(&self.mass_ones, u)
    }

    /// `sqrt(u^T M u)`.
    pub fn mass_norm(&self, u: &[T]) -> T {
        self.mass.bilinear(u, u).max(T::zero()).sqrt()
    }

    /// Dual norm `sqrt(sum r_i^2 / m_i)` with the lumped mass `m`.
    pub fn dual_norm(&self, r: &[T]) -> T {
        r.iter().zip(&self.mass_ones).map(|(&x, &m)| x * x / m).sum::<T>().sqrt()
    }

    /// Dual norm restricted to interior rows.
    pub fn dual_norm_interior(&self, r: &[T]) -> T {
        r.iter()
            .zip(&self.interior)
            .map(|(&x, &g)| x * x / self.mass_ones[g])
            .sum::<T>()
            .sqrt()
    }

    /// Diagonal boundary mass `diag(w_i sigma_i)`.
    pub fn trace_mass(&self, sigma: &BoundaryFunction<T>) -> Result<CsrMatrix<T>> {
        self.check_boundary(sigma)?;
        let mut d = vec![T::zero(); self.node_count()];
        for (k, &g) in sigma.nodes().iter().enumerate() {
            d[g] = self.boundary_weights[g] * sigma.values()[k];
        }
        Ok(CsrMatrix::diagonal_matrix(&d))
    }

    pub(crate) fn check_boundary(&self, sigma: &BoundaryFunction<T>) -> Result<()> {
        if sigma.mesh_id() != self.mesh_id() {
            return Err(Error::Contract("boundary function belongs to a different mesh".into()));
        }
        Ok(())
    }

    /// Largest distance between two boundary nodes.
    pub fn diameter(&self) -> T {
        let nodes = self.mesh.nodes();
        let b = self.mesh.boundary_nodes();
        let mut d2 = T::zero();
        for (k, &i) in b.iter().enumerate() {
            for &j in &b[k + 1..] {
                let dx = nodes[i][0] - nodes[j][0];
                let dy = nodes[i][1] - nodes[j][1];
                d2 = d2.max(dx * dx + dy * dy);
            }
        }
        d2.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_mesh, Domain};

    #[test]
    fn partition_of_unity_identities() {
        let mesh = generate_mesh(&Domain::disk(1.0f64), 0.1, 0.05).unwrap();
        let area = mesh.area();
        let per = mesh.perimeter();
        let space = assemble(mesh).unwrap();
        let ones = vec![1.0; space.node_count()];
        let k1 = space.stiffness().mul_vec(&ones);
        assert!(k1.iter().all(|v| v.abs() < 1e-11));
        assert!((space.mass().bilinear(&ones, &ones) - area).abs() < 1e-12);
        let sigma = BoundaryFunction::constant(&space, 1.0);
        let b = space.trace_mass(&sigma).unwrap();
        assert!((b.bilinear(&ones, &ones) - per).abs() < 1e-12);
        assert!(space.stiffness().is_symmetric() && space.mass().is_symmetric());
    }

    #[test]
    fn stiffness_is_positive_semidefinite() {
        let mesh = generate_mesh(&Domain::unit_square(), 0.25f64, 0.0).unwrap();
        let space = assemble(mesh).unwrap();
        let n = space.node_count();
        for k in 0..5 {
            let x: Vec<f64> = (0..n).map(|i| ((i * (k + 3)) as f64 * 0.7).sin()).collect();
            assert!(space.stiffness().bilinear(&x, &x) >= -1e-12);
            assert!(space.mass().bilinear(&x, &x) > 0.0);
        }
    }

    #[test]
    fn foreign_boundary_function_is_rejected() {
        let a = assemble(generate_mesh(&Domain::unit_square(), 0.5f64, 0.0).unwrap()).unwrap();
        let b = assemble(generate_mesh(&Domain::unit_square(), 0.5f64, 0.0).unwrap()).unwrap();
        let s = BoundaryFunction::constant(&b, 1.0);
        assert!(matches!(a.trace_mass(&s), Err(Error::Contract(_))));
    }
}
