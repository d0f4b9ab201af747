use crate::error::{Error, Result};
use crate::geometry::MeshId;
use crate::scalar::Real;

use super::FemSpace;

/// What a nodal field represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// `U_s = (-Delta_D - s)^{-1} 1`.
    Resolvent,
    /// `u_mu = s U_s + 1`.
    Minimizer,
    Eigenfunction,
    HeatState,
    /// `U_0`.
    Torsion,
}

/// Nodal P1 field tied to the mesh it was computed on.
#[derive(Clone, Debug)]
pub struct FieldSolution<T> {
    pub mesh_id: MeshId,
    pub values: Vec<T>,
    pub kind: FieldKind,
    /// Spectral parameter `s`, eigenvalue or time, depending on `kind`.
    pub parameter: T,
    /// False when `sqrt(|s|) h_boundary > 0.2`.
    pub boundary_layer_resolved: bool,
}

impl<T: Real> FieldSolution<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }
}

/// Function on the boundary nodes, integrated with lumped weights.
#[derive(Clone, Debug)]
pub struct BoundaryFunction<T> {
    mesh_id: MeshId,
    nodes: Vec<usize>,
    weights: Vec<T>,
    values: Vec<T>,
    integral: T,
}

impl<T: Real> BoundaryFunction<T> {
    /// `values[k]` belongs to `space.mesh().boundary_nodes()[k]`.
    pub fn new(space: &FemSpace<T>, values: Vec<T>) -> Result<Self> {
        let nodes = space.mesh().boundary_nodes().to_vec();
        if values.len() != nodes.len() {
            return Err(Error::Contract(format!(
                "boundary function needs {} values, got {}",
                nodes.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("boundary values must be finite".into()));
        }
        let weights: Vec<T> = nodes.iter().map(|&g| space.boundary_weights()[g]).collect();
        let integral = weights.iter().zip(&values).map(|(&w, &v)| w * v).sum();
        Ok(Self { mesh_id: space.mesh_id(), nodes, weights, values, integral })
    }

    pub fn constant(space: &FemSpace<T>, c: T) -> Self {
        let n = space.mesh().boundary_nodes().len();
        Self::new(space, vec![c; n]).expect("sizes match")
    }

    /// Takes boundary entries from a full nodal vector.
    pub fn from_nodal(space: &FemSpace<T>, nodal: &[T]) -> Result<Self> {
        let vals = space.mesh().boundary_nodes().iter().map(|&g| nodal[g]).collect();
        Self::new(space, vals)
    }

    pub fn mesh_id(&self) -> MeshId {
        self.mesh_id
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Lumped boundary integral.
    pub fn integral(&self) -> T {
        self.integral
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// `max - min`.
    pub fn spread(&self) -> T {
        self.max() - self.min()
    }

    /// Same support, new values.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        if values.len() != self.nodes.len() {
            return Err(Error::Contract("boundary function length mismatch".into()));
        }
        let integral = self.weights.iter().zip(&values).map(|(&w, &v)| w * v).sum();
        Ok(Self { mesh_id: self.mesh_id, nodes: self.nodes.clone(), weights: self.weights.clone(), values, integral })
    }

    /// Pointwise `a self + b other`.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if other.mesh_id != self.mesh_id {
            return Err(Error::Contract("boundary functions on different meshes".into()));
        }
        self.with_values(self.values.iter().zip(&other.values).map(|(&x, &y)| a * x + b * y).collect())
    }
}

/// Principal eigenpair with solver diagnostics.
#[derive(Clone, Debug)]
pub struct SpectralResult<T> {
    pub eigenvalue: T,
    /// Positive, unit norm in the mass inner product.
    pub eigenfunction: FieldSolution<T>,
    /// `||(A - lambda M) u||` in the lumped dual norm.
    pub residual_norm: T,
    pub iterations: usize,
    /// Final shift of the shift-and-invert iteration.
    pub shift: T,
}

/// Heat content samples `Q(t_k)`.
#[derive(Clone, Debug)]
pub struct HeatContentCurve<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    /// Human-readable description of the time stepping.
    pub scheme: String,
    pub steps: usize,
}
