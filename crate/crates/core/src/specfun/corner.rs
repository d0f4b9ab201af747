//! The corner coefficient `c(alpha)` of the small-time heat content of a
//! polygon.

use super::quad::{integrate, Quadrature};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `c(alpha) = int_0^inf 4 sinh((pi - alpha) x) / (sinh(pi x) cosh(alpha x)) dx`
/// for an interior angle `0 < alpha < 2 pi`.
pub fn corner_coefficient<T: Real>(alpha: T) -> Result<T> {
    let two_pi = T::lit(2.0) * T::PI();
    if !(alpha > T::zero() && alpha < two_pi) {
        return Err(Error::InvalidInput(format!("corner angle must lie in (0, 2pi), got {alpha}")));
    }
    if alpha == T::PI() {
        return Ok(T::zero());
    }
    let pi = T::PI();
    let two = T::lit(2.0);
    let eight = T::lit(8.0);
    let small = T::lit(1e-8);
    let limit = T::lit(4.0) * (pi - alpha) / pi;
    // rewritten in decaying exponentials:
    // 8 (e^{-2 a x} - e^{-2 pi x}) / ((1 - e^{-2 pi x}) (1 + e^{-2 a x}))
    let integrand = move |x: T| {
        if x < small {
            return limit;
        }
        let ea = (-two * alpha * x).exp();
        let num = if alpha < pi {
            -ea * (-two * (pi - alpha) * x).exp_m1()
        } else {
            (-two * pi * x).exp() * (-two * (alpha - pi) * x).exp_m1()
        };
        let den = -(-two * pi * x).exp_m1() * (T::one() + ea);
        eight * num / den
    };
    let eps = T::epsilon().to_f64_lossy();
    let tol = T::lit(1e-12f64.max(100.0 * eps));
    let quad = Quadrature { abs_tol: tol, rel_tol: tol, max_subdivisions: 4000 };
    integrate(integrand, T::zero(), T::infinity(), &quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn right_angle_closed_form() {
        // at alpha = pi/2 the integrand reduces to 2 sech^2(pi x / 2)
        let x = 0.731f64;
        let raw = 4.0 * ((PI / 2.0) * x).sinh() / ((PI * x).sinh() * ((PI / 2.0) * x).cosh());
        let reduced = 2.0 / ((PI * x / 2.0).cosh().powi(2));
        assert!((raw - reduced).abs() < 1e-14);
        let c = corner_coefficient(PI / 2.0).unwrap();
        assert!((c - 4.0 / PI).abs() < 1e-10, "{c}");
    }

    #[test]
    fn straight_angle_is_zero() {
        assert_eq!(corner_coefficient(PI).unwrap(), 0.0);
        assert!(corner_coefficient(PI * (1.0 - 1e-9)).unwrap().abs() < 1e-8);
    }

    #[test]
    fn reflex_angle_is_negative() {
        assert!(corner_coefficient(1.5 * PI).unwrap() < 0.0);
    }

    #[test]
    fn matches_direct_integrand() {
        let alpha = 1.1f64;
        let direct = |x: f64| {
            if x == 0.0 {
                4.0 * (PI - alpha) / PI
            } else if x > 30.0 {
                0.0
            } else {
                4.0 * ((PI - alpha) * x).sinh() / ((PI * x).sinh() * (alpha * x).cosh())
            }
        };
        let q = Quadrature::new(1e-13, 1e-13, 4000).unwrap();
        let d = integrate(direct, 0.0, 30.0, &q).unwrap();
        assert!((d - corner_coefficient(alpha).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn strictly_decreasing() {
        let mut prev = f64::INFINITY;
        for k in 1..=50 {
            let a = 2.0 * PI * k as f64 / 51.0;
            let c = corner_coefficient(a).unwrap();
            assert!(c < prev, "alpha {a}");
            prev = c;
        }
    }

    #[test]
    fn domain_errors() {
        assert!(corner_coefficient(0.0f64).is_err());
        assert!(corner_coefficient(2.0 * PI).is_err());
        assert!(corner_coefficient(f64::NAN).is_err());
    }
}
