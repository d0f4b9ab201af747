//! Adaptive Gauss–Kronrod (7/15) quadrature on finite and half-infinite
//! intervals.

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Real> Default for Quadrature<T> {
    fn default() -> Self {
        Self { abs_tol: T::lit(1e-12), rel_tol: T::lit(1e-12), max_subdivisions: 2000 }
    }
}

impl<T: Real> Quadrature<T> {
    pub fn new(abs_tol: T, rel_tol: T, max_subdivisions: usize) -> Result<Self> {
        let q = Self { abs_tol, rel_tol, max_subdivisions };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero()) || !(self.rel_tol > T::zero()) || self.max_subdivisions < 1 {
            return Err(Error::InvalidInput(format!(
                "quadrature tolerances must be positive and max_subdivisions >= 1, got {:?}",
                (self.abs_tol.to_f64_lossy(), self.rel_tol.to_f64_lossy(), self.max_subdivisions)
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Result<Panel<T>> {
    let center = (a + b) / T::lit(2.0);
    let half = (b - a) / T::lit(2.0);
    let fc = f(center);
    let mut resk = fc * T::lit(WGK[7]);
    let mut resg = fc * T::lit(WG[3]);
    let mut resabs = resk.abs();
    let mut fv = [T::zero(); 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        let w = T::lit(WGK[j]);
        resk += w * (f1 + f2);
        resabs += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    if fv.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("integrand is not finite on [{a}, {b}]")));
    }
    let mean = resk / T::lit(2.0);
    let mut resasc = WGK[7] * (fc - mean).abs().to_f64_lossy();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs()).to_f64_lossy();
    }
    let hf = half.abs().to_f64_lossy();
    let resasc = resasc * hf;
    let resabs = resabs.to_f64_lossy() * hf;
    let mut err = ((resk - resg) * half).abs().to_f64_lossy();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let eps = T::epsilon().to_f64_lossy();
    if resabs > f64::MIN_POSITIVE / (50.0 * eps) {
        err = err.max(50.0 * eps * resabs);
    }
    Ok(Panel { a, b, value: resk * half, error: T::lit(err) })
}

/// Result of a converged quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate<T> {
    pub value: T,
    pub error: T,
    pub subdivisions: usize,
}

/// Integrates `f` over `(a, b)`; `b` may be `+inf`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(f: F, a: T, b: T, quad: &Quadrature<T>) -> Result<T> {
    integrate_with_error(f, a, b, quad).map(|e| e.value)
}

/// Like [`integrate`] but returns the error estimate as well.
pub fn integrate_with_error<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    quad: &Quadrature<T>,
) -> Result<QuadEstimate<T>> {
    quad.validate()?;
    if a.is_nan() || b.is_nan() || !a.is_finite() {
        return Err(Error::InvalidInput(format!("invalid integration bounds [{a}, {b}]")));
    }
    if b == T::infinity() {
        // x = a + t/(1 - t), dx = dt/(1 - t)^2
        let mut g = |t: T| {
            let one_m = T::one() - t;
            let x = a + t / one_m;
            f(x) / (one_m * one_m)
        };
        return adapt(&mut g, T::zero(), T::one(), quad);
    }
    if !b.is_finite() {
        return Err(Error::InvalidInput(format!("invalid integration bounds [{a}, {b}]")));
    }
    adapt(&mut f, a, b, quad)
}

fn adapt<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T, quad: &Quadrature<T>) -> Result<QuadEstimate<T>> {
    let mut panels = vec![kronrod(f, a, b)?];
    loop {
        let value: T = panels.iter().map(|p| p.value).sum();
        let error: T = panels.iter().map(|p| p.error).sum();
        let target = quad.abs_tol.max(quad.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadEstimate { value, error, subdivisions: panels.len() - 1 });
        }
        if panels.len() > quad.max_subdivisions {
            return Err(Error::Accuracy {
                estimate: value.to_f64_lossy(),
                error_bound: error.to_f64_lossy(),
                subdivisions: panels.len() - 1,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let p = panels.swap_remove(worst);
        let mid = (p.a + p.b) / T::lit(2.0);
        if mid <= p.a || mid >= p.b {
            // interval cannot be split further in this precision
            return Err(Error::Accuracy {
                estimate: value.to_f64_lossy(),
                error_bound: error.to_f64_lossy(),
                subdivisions: panels.len(),
            });
        }
        panels.push(kronrod(f, p.a, mid)?);
        panels.push(kronrod(f, mid, p.b)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel::bessel_k;
    use std::f64::consts::PI;

    #[test]
    fn trivial_integrals() {
        let q = Quadrature::default();
        assert!((integrate(|_| 1.0f64, 0.0, 1.0, &q).unwrap() - 1.0).abs() < 1e-14);
        assert!((integrate(|x: f64| (-x).exp(), 0.0, f64::INFINITY, &q).unwrap() - 1.0).abs() < 1e-12);
        let g = integrate(|x: f64| x.sqrt() * (-x).exp(), 0.0, f64::INFINITY, &q).unwrap();
        assert!((g - PI.sqrt() / 2.0).abs() < 1e-11);
    }

    #[test]
    fn k0_moment() {
        let q = Quadrature::new(1e-11, 1e-11, 2000).unwrap();
        let v = integrate(|t: f64| if t == 0.0 { 0.0 } else { t * bessel_k(0.0, t).unwrap() }, 0.0, f64::INFINITY, &q)
            .unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn accuracy_error_carries_estimate() {
        let q = Quadrature::new(1e-14, 1e-14, 3).unwrap();
        match integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 3.0, &q) {
            Err(Error::Accuracy { estimate, error_bound, subdivisions }) => {
                assert!(estimate.is_finite() && error_bound > 0.0 && subdivisions >= 3);
            }
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_tolerances() {
        assert!(Quadrature::new(0.0f64, 1e-3, 10).is_err());
        assert!(Quadrature::new(1e-3f64, 1e-3, 0).is_err());
    }
}
