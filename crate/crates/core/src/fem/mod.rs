//! P1 finite elements: assembly, Dirichlet resolvent solves with variational
//! flux recovery, Robin and Dirichlet eigenvalue iterations, and Dirichlet
//! heat-content time stepping.

mod eigen;
mod heat;
mod resolvent;
mod space;
mod types;

pub use eigen::{
    dirichlet_eigenpairs, dirichlet_ground_state, estimate_dirichlet_e1, robin_principal_eigenvalue,
    robin_principal_eigenvalue_with, EigenOptions, SHIFT_RETRIES,
};
pub use heat::{
    heat_content, heat_content_with, heat_trajectory, laplace_transform_check, laplace_transform_checks,
    HeatOptions, LaplaceCheck,
};
pub use resolvent::{normal_flux, resolution_product, solve_resolvent, ResolventSolver, RESOLUTION_LIMIT};
pub use space::{assemble, FemSpace};
pub use types::{BoundaryFunction, FieldKind, FieldSolution, HeatContentCurve, SpectralResult};
