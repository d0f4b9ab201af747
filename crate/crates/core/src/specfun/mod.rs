//! Special functions and one-dimensional quadrature.

mod bessel;
mod corner;
mod quad;

pub use bessel::{
    bessel_i, bessel_i_scaled, bessel_j, bessel_k, bessel_ratio, bessel_ratio_derivative, gamma,
};
pub use corner::corner_coefficient;
pub use quad::{integrate, integrate_with_error, QuadEstimate, Quadrature};
