//! Closed-form references: disk, ball and annulus values of `F`, the
//! constant-parameter Robin eigenvalue of the disk, square torsion, and the
//! two-term expansions of `Lambda_mu`.

use crate::error::{Error, Result};
use crate::fem::FemSpace;
use crate::geometry::{Domain, DomainMetrics};
use crate::optimizer::solve_s_of_mu;
use crate::scalar::Real;
use crate::specfun::{bessel_i, bessel_j, bessel_k, bessel_ratio, bessel_ratio_derivative, corner_coefficient, gamma};
use serde::Serialize;

/// Which expansion a prediction belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    Smooth,
    Polygon,
    SmallMu,
}

/// Two-term expansion of `Lambda_mu`. For `Smooth` and `Polygon`,
/// `leading * mu^2 + subleading * mu`; for `SmallMu`,
/// `leading * mu + subleading * mu^2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticPrediction<T> {
    pub leading: T,
    pub subleading: T,
    pub regime: Regime,
    pub remainder_order: String,
}

impl<T: Real> AsymptoticPrediction<T> {
    pub fn evaluate(&self, mu: T) -> T {
        match self.regime {
            Regime::SmallMu => self.leading * mu + self.subleading * mu * mu,
            _ => self.leading * mu * mu + self.subleading * mu,
        }
    }

    /// `Lambda_mu` minus the two-term expansion.
    pub fn remainder(&self, mu: T, lambda: T) -> T {
        lambda - self.evaluate(mu)
    }
}

fn check_radius<T: Real>(r: T) -> Result<()> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// First positive zero of `J_0`.
pub fn j0_first_zero<T: Real>() -> T {
    let (mut lo, mut hi) = (T::lit(2.0), T::lit(3.0));
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if bessel_j(T::zero(), mid).expect("argument below 12") > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// `F(s)` on the disk of radius `r`: `-2 pi r kappa I_1(kappa r)/I_0(kappa r)`
/// for `s = -kappa^2 <= 0` and `2 pi r k J_1(k r)/J_0(k r)` for
/// `0 < s = k^2 < (j_{0,1}/r)^2`.
pub fn disk_f<T: Real>(r: T, s: T) -> Result<T> {
    check_radius(r)?;
    let two_pi_r = T::lit(2.0) * T::PI() * r;
    if s == T::zero() {
        Ok(T::zero())
    } else if s < T::zero() {
        let k = (-s).sqrt();
        Ok(-two_pi_r * k * bessel_ratio(T::zero(), k * r)?)
    } else {
        let k = s.sqrt();
        if k * r >= j0_first_zero::<T>() {
            return Err(Error::SpectralRange {
                s: s.to_f64_lossy(),
                e1: (j0_first_zero::<T>() / r).powi(2).to_f64_lossy(),
            });
        }
        Ok(two_pi_r * k * bessel_j(T::one(), k * r)? / bessel_j(T::zero(), k * r)?)
    }
}

/// `d/ds disk_f` for `s < 0`.
pub fn disk_f_prime<T: Real>(r: T, s: T) -> Result<T> {
    check_radius(r)?;
    if s >= T::zero() {
        return Err(Error::InvalidInput("disk_f_prime needs s < 0".into()));
    }
    let k = (-s).sqrt();
    let x = k * r;
    let g = bessel_ratio(T::zero(), x)? + x * bessel_ratio_derivative(T::zero(), x)?;
    Ok(T::PI() * r * g / k)
}

/// `F(s)` on the `n`-dimensional ball of radius `r` for `s < 0`:
/// `-|dB| kappa I_{n/2}(kappa r) / I_{n/2-1}(kappa r)`.
pub fn ball_f<T: Real>(n: usize, r: T, s: T) -> Result<T> {
    check_radius(r)?;
    if n < 2 {
        return Err(Error::InvalidInput(format!("ball dimension must be >= 2, got {n}")));
    }
    if s > T::zero() {
        return Err(Error::InvalidInput("ball_f needs s <= 0".into()));
    }
    if s == T::zero() {
        return Ok(T::zero());
    }
    let nf = T::from_usize_lossy(n);
    let half = nf / T::lit(2.0);
    // surface of the unit sphere in R^n
    let surface = T::lit(2.0) * T::PI().powf(half) / gamma(half);
    let k = (-s).sqrt();
    Ok(-surface * r.powi(n as i32 - 1) * k * bessel_ratio(half - T::one(), k * r)?)
}

/// `F(s)` on the annulus `inner < |x| < outer` for `s < 0`, from the radial
/// solution `1 + s U_s = A I_0(kappa r) + B K_0(kappa r)`.
pub fn annulus_f<T: Real>(outer: T, inner: T, s: T) -> Result<T> {
    check_radius(inner)?;
    if !(outer > inner) {
        return Err(Error::InvalidInput("annulus needs outer > inner".into()));
    }
    if s >= T::zero() {
        return Err(Error::InvalidInput("annulus_f needs s < 0".into()));
    }
    let k = (-s).sqrt();
    let (i0a, k0a, i0b, k0b) = (
        bessel_i(T::zero(), k * inner)?,
        bessel_k(T::zero(), k * inner)?,
        bessel_i(T::zero(), k * outer)?,
        bessel_k(T::zero(), k * outer)?,
    );
    let det = i0a * k0b - k0a * i0b;
    let a = (k0b - k0a) / det;
    let b = (i0a - i0b) / det;
    let prim = |x: T| -> Result<T> { Ok(x * (a * bessel_i(T::one(), k * x)? - b * bessel_k(T::one(), k * x)?) / k) };
    let integral = T::lit(2.0) * T::PI() * (prim(outer)? - prim(inner)?);
    Ok(s * integral)
}

/// Solves `k I_1(k r)/I_0(k r) = q` for `k > 0`, `q > 0`.
fn solve_modified_robin<T: Real>(r: T, q: T) -> Result<T> {
    let g = |k: T| -> Result<(T, T)> {
        let x = k * r;
        let ratio = bessel_ratio(T::zero(), x)?;
        Ok((k * ratio - q, ratio + x * bessel_ratio_derivative(T::zero(), x)?))
    };
    let mut lo = T::zero();
    let mut hi = q + T::one() / r + T::one();
    while g(hi)?.0 < T::zero() {
        lo = hi;
        hi = hi * T::lit(2.0);
    }
    let mut k = (q + T::one() / (T::lit(2.0) * r)).min(hi).max(lo);
    if q * r < T::lit(0.5) {
        // small argument: k I_1/I_0 ~ k^2 r / 2
        k = (T::lit(2.0) * q / r).sqrt().min(hi);
    }
    for _ in 0..200 {
        let (v, d) = g(k)?;
        if v.abs() <= T::lit(4.0) * T::epsilon() * q {
            return Ok(k);
        }
        if v < T::zero() {
            lo = k;
        } else {
            hi = k;
        }
        let newton = k - v / d;
        let next = if newton > lo && newton < hi { newton } else { (lo + hi) / T::lit(2.0) };
        if (next - k).abs() <= T::epsilon() * k {
            return Ok(next);
        }
        k = next;
    }
    Err(Error::Solver {
        what: format!("disk Robin root k I1(kr)/I0(kr) = {q} in bracket [{lo}, {hi}]"),
        residual: f64::NAN,
    })
}

/// Solves `k J_1(k r) = sigma J_0(k r)` on `(0, j_{0,1}/r)` for `sigma > 0`.
fn solve_bessel_robin<T: Real>(r: T, sigma: T) -> Result<T> {
    let h = |k: T| -> Result<T> { Ok(k * bessel_j(T::one(), k * r)? - sigma * bessel_j(T::zero(), k * r)?) };
    let mut lo = T::zero();
    let mut hi = j0_first_zero::<T>() / r;
    for _ in 0..300 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if h(mid)? < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Solver {
        what: format!("disk Robin root k J1 = sigma J0 in bracket [{lo}, {hi}]"),
        residual: f64::NAN,
    })
}

/// Principal eigenvalue of the disk of radius `r` with constant Robin
/// parameter `sigma`.
pub fn disk_robin_lambda<T: Real>(r: T, sigma: T) -> Result<T> {
    check_radius(r)?;
    if !sigma.is_finite() {
        return Err(Error::InvalidInput(format!("sigma must be finite, got {sigma}")));
    }
    if sigma == T::zero() {
        Ok(T::zero())
    } else if sigma < T::zero() {
        let k = solve_modified_robin(r, -sigma)?;
        Ok(-k * k)
    } else {
        let k = solve_bessel_robin(r, sigma)?;
        Ok(k * k)
    }
}

/// Exact `Lambda_mu` on the disk. The optimal parameter is the constant
/// `mu / (2 pi r)`, so this is the constant-parameter eigenvalue.
pub fn disk_s_of_mu<T: Real>(r: T, mu: T) -> Result<T> {
    check_radius(r)?;
    disk_robin_lambda(r, mu / (T::lit(2.0) * T::PI() * r))
}

/// `int U_0 = pi r^4 / 8` on the disk.
pub fn disk_torsion_integral<T: Real>(r: T) -> T {
    T::PI() * r.powi(4) / T::lit(8.0)
}

/// `int U_0` on the rectangle `[0, a] x [0, b]` from the one-dimensional
/// series `a^3 b / 12 - (16 a^4 / pi^5) sum_{m odd} tanh(m pi b / 2a) / m^5`.
pub fn rectangle_torsion_integral<T: Real>(a: T, b: T) -> T {
    let mut sum = T::zero();
    let mut m = 1usize;
    loop {
        let mf = T::from_usize_lossy(m);
        let term = (mf * T::PI() * b / (T::lit(2.0) * a)).tanh() / mf.powi(5);
        sum += term;
        if term < T::epsilon() * sum * T::lit(1e-2) {
            break;
        }
        m += 2;
    }
    a.powi(3) * b / T::lit(12.0) - T::lit(16.0) * a.powi(4) / T::PI().powi(5) * sum
}

/// Two-term expansion of `Lambda_mu` as `mu -> -inf`, from boundary
/// metrics. Smooth boundaries use the signed curvature integral, polygons
/// the corner coefficients.
pub fn predict_from_metrics<T: Real>(m: &DomainMetrics<T>) -> Result<AsymptoticPrediction<T>> {
    let p2 = m.perimeter * m.perimeter;
    let leading = -T::one() / p2;
    if m.corner_angles.is_empty() {
        // (N - 1) with N = 2
        Ok(AsymptoticPrediction {
            leading,
            subleading: m.curvature_integral / p2,
            regime: Regime::Smooth,
            remainder_order: "O(1)".into(),
        })
    } else {
        if m.curvature_integral.abs() > T::lit(1e-9) * m.perimeter {
            return Err(Error::Unsupported(
                "boundary with both corners and curved arcs has no two-term expansion".into(),
            ));
        }
        let mut total = T::zero();
        for &a in &m.corner_angles {
            total += corner_coefficient(a)?;
        }
        Ok(AsymptoticPrediction {
            leading,
            subleading: T::lit(2.0) * total / p2,
            regime: Regime::Polygon,
            remainder_order: "O(1)".into(),
        })
    }
}

pub fn predict_lambda<T: Real>(domain: &Domain<T>) -> Result<AsymptoticPrediction<T>> {
    predict_from_metrics(&domain.metrics()?)
}

/// `Lambda_mu ~ mu / |Omega| - mu^2 (int U_0) / |Omega|^3` as `mu -> 0`,
/// from inverting `F(s) = s |Omega| + s^2 int U_0 + O(s^3)`.
pub fn predict_small_mu<T: Real>(area: T, torsion_integral: T) -> AsymptoticPrediction<T> {
    AsymptoticPrediction {
        leading: T::one() / area,
        subleading: -torsion_integral / (area * area * area),
        regime: Regime::SmallMu,
        remainder_order: "O(mu^3)".into(),
    }
}

/// Checks `lambda_measured <= Lambda_mu + tol` for `mu = sigma |dOmega|`.
/// `Lambda_mu` is exact on the disk and comes from `space` otherwise.
pub fn constant_sigma_bound_check<T: Real>(
    domain: &Domain<T>,
    space: Option<&FemSpace<T>>,
    sigma: T,
    lambda_measured: T,
    tol: T,
) -> Result<bool> {
    if sigma == T::zero() {
        return Ok(lambda_measured <= tol);
    }
    let lambda_max = match (domain, space) {
        (Domain::Disk { radius }, _) => disk_s_of_mu(*radius, sigma * T::lit(2.0) * T::PI() * *radius)?,
        (_, Some(sp)) => {
            let mu = sigma * sp.perimeter();
            solve_s_of_mu(sp, mu, crate::optimizer::default_tol(mu))?
        }
        (_, None) => {
            return Err(Error::InvalidInput("a finite-element space is needed off the disk".into()));
        }
    };
    Ok(lambda_measured <= lambda_max + tol)
}

/// Free resolvent mass on the whole plane: `int (-Delta - s)^{-1} f = |f|_1 / |s|`
/// for `s < 0`, the leading behaviour of `int U_s` as `s -> -inf`.
pub fn free_resolvent_mass<T: Real>(area: T, s: T) -> Result<T> {
    if s >= T::zero() {
        return Err(Error::InvalidInput("free_resolvent_mass needs s < 0".into()));
    }
    Ok(area / -s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{integrate, Quadrature};
    use std::f64::consts::PI;

    #[test]
    fn disk_f_matches_radial_quadrature() {
        for s in [-1.0f64, -4.0, -25.0] {
            let k = (-s).sqrt();
            let i0k = bessel_i(0.0, k).unwrap();
            // U_s(r) = (1 - I0(k r)/I0(k)) / k^2
            let q = Quadrature::new(1e-14, 1e-14, 500).unwrap();
            let int_u = integrate(|r: f64| 2.0 * PI * r * (1.0 - bessel_i(0.0, k * r).unwrap() / i0k) / (k * k), 0.0, 1.0, &q)
                .unwrap();
            let direct = s * s * int_u + s * PI;
            let closed = disk_f(1.0, s).unwrap();
            assert!((direct - closed).abs() <= 1e-10 * closed.abs(), "s {s}: {direct} vs {closed}");
        }
        assert!((disk_f(1.0f64, -1.0).unwrap() + 2.804_750_875).abs() < 1e-8);
        assert_eq!(disk_f(1.0f64, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn disk_f_two_term_asymptote() {
        let v = disk_f(1.0f64, -1e4).unwrap();
        let a = -2.0 * PI * 100.0 + PI;
        assert!(((v - a) / a).abs() < 6e-3);
        let mut s = -25.0f64;
        while s > -1e6 {
            let d = disk_f(1.0, s).unwrap() + 2.0 * PI * (-s).sqrt() - PI;
            assert!(d.abs() <= 5.0 / (-s).sqrt(), "s {s}: {d}");
            s *= 1.9;
        }
    }

    #[test]
    fn disk_f_increasing_and_derivative() {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..50 {
            let s = -200.0 + 4.0 * k as f64;
            let f = disk_f(1.0, s).unwrap();
            assert!(f > prev);
            prev = f;
            let d = 1e-5 * (1.0 + s.abs());
            let fd = (disk_f(1.0, s + d).unwrap() - disk_f(1.0, s - d).unwrap()) / (2.0 * d);
            assert!(((fd - disk_f_prime(1.0, s).unwrap()) / fd).abs() < 1e-6);
        }
    }

    #[test]
    fn disk_f_positive_branch() {
        let s = 2.0f64;
        // F(s) for s > 0 continues the negative branch: compare with a nearby difference quotient
        let f = disk_f(1.0, s).unwrap();
        assert!(f > 0.0);
        assert!(disk_f(1.0f64, 5.8).is_err());
        let small = disk_f(1.0f64, 1e-6).unwrap();
        assert!((small / 1e-6 - PI).abs() < 1e-5);
    }

    #[test]
    fn ball_reduces_to_disk_and_closed_form() {
        for s in [-0.3f64, -7.0] {
            assert!((ball_f(2, 1.3, s).unwrap() - disk_f(1.3, s).unwrap()).abs() < 1e-12);
            let k = (-s).sqrt();
            let x = 1.3 * k;
            let exact = -4.0 * PI * 1.3f64.powi(2) * k * (1.0 / x.tanh() - 1.0 / x);
            assert!(((ball_f(3, 1.3, s).unwrap() - exact) / exact).abs() < 1e-12);
        }
    }

    #[test]
    fn robin_lambda_values() {
        assert_eq!(disk_robin_lambda(1.0f64, 0.0).unwrap(), 0.0);
        let sigma = disk_f(1.0f64, -1.0).unwrap() / (2.0 * PI);
        assert!((sigma + 0.446_389_965_896_534_5).abs() < 1e-12);
        assert!((disk_robin_lambda(1.0, sigma).unwrap() + 1.0).abs() < 1e-12);
        let l = disk_robin_lambda(1.0f64, -100.0).unwrap();
        assert!((l / -1e4 - 1.0).abs() < 0.02);
        let p = disk_robin_lambda(1.0f64, 3.0).unwrap();
        assert!(p > 0.0 && p < j0_first_zero::<f64>().powi(2));
        // the J-Bessel branch satisfies its Robin condition
        let k = p.sqrt();
        assert!((k * bessel_j(1.0, k).unwrap() - 3.0 * bessel_j(0.0, k).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn robin_lambda_subleading() {
        // lambda/(-sigma^2) - 1 ~ -(1/R)/sigma
        for sigma in [-200.0f64, -800.0] {
            let l = disk_robin_lambda(1.0, sigma).unwrap();
            let d = l / -(sigma * sigma) - 1.0;
            let expected = -1.0 / sigma;
            assert!(((d - expected) / expected).abs() < 0.01, "{sigma}: {d} vs {expected}");
        }
    }

    #[test]
    fn s_of_mu_round_trip() {
        for mu in [-200.0f64, -10.0, -1e-3, 0.5, 5.0] {
            let s = disk_s_of_mu(1.0, mu).unwrap();
            assert!((disk_f(1.0, s).unwrap() - mu).abs() < 1e-10 * (1.0 + mu.abs()), "mu {mu}");
        }
    }

    #[test]
    fn j0_zero() {
        assert!((j0_first_zero::<f64>() - 2.404_825_557_695_773).abs() < 1e-14);
    }

    #[test]
    fn predictions() {
        let d = predict_lambda(&Domain::disk(1.0f64)).unwrap();
        assert!((d.leading + 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!((d.subleading - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let q = predict_lambda(&Domain::<f64>::unit_square()).unwrap();
        assert_eq!(q.regime, Regime::Polygon);
        assert!((q.leading + 1.0 / 16.0).abs() < 1e-15);
        assert!((q.subleading - 2.0 / PI).abs() < 1e-9);
    }

    #[test]
    fn disk_expansion_remainder_is_bounded() {
        let p = predict_lambda(&Domain::disk(1.0f64)).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..=36 {
            let mu = -20.0 - 5.0 * k as f64;
            let r = p.remainder(mu, disk_s_of_mu(1.0, mu).unwrap());
            worst = worst.max(r.abs());
        }
        assert!(worst < 4.0, "{worst}");
    }

    #[test]
    fn annulus_uses_signed_curvature() {
        // the inner circle bends the other way, so the curvature terms cancel
        let p = predict_lambda(&Domain::Annulus { outer: 2.0f64, inner: 1.0 }).unwrap();
        assert!(p.subleading.abs() < 1e-14);
        let per = 6.0 * PI;
        for s in [-25.0f64, -100.0, -400.0] {
            let k = (-s).sqrt();
            let d = annulus_f(2.0, 1.0, s).unwrap() + per * k;
            assert!(d.abs() < 8.0 / k, "s {s}: {d}");
        }
        // with unsigned curvature the constant term would be 2 pi
        let d = annulus_f(2.0f64, 1.0, -400.0).unwrap() + per * 20.0;
        assert!((d - 2.0 * PI).abs() > 6.0);
    }

    #[test]
    fn torsion_integrals() {
        assert!((disk_torsion_integral(1.0f64) - PI / 8.0).abs() < 1e-15);
        // independent oracle: double Fourier series over odd m, n
        let mut fourier = 0.0f64;
        for m in (1..2000).step_by(2) {
            for n in (1..2000).step_by(2) {
                let (m, n) = (m as f64, n as f64);
                fourier += 64.0 / (PI.powi(6) * m * m * n * n * (m * m + n * n));
            }
        }
        let t = rectangle_torsion_integral(1.0f64, 1.0);
        assert!((t - fourier).abs() < 1e-9, "{t} vs {fourier}");
        assert!((t - 0.035_144_254).abs() < 1e-8);
    }

    #[test]
    fn small_mu_expansion_on_the_disk() {
        let p = predict_small_mu(PI, disk_torsion_integral(1.0f64));
        for mu in [-0.05f64, 0.05] {
            let exact = disk_s_of_mu(1.0, mu).unwrap();
            let c = (exact - mu / PI) / (mu * mu);
            assert!((c / p.subleading - 1.0).abs() < 0.02, "{mu}: {c}");
            // a |Omega|^2 denominator would be a factor pi too large
            assert!((c / (-(PI / 8.0) / (PI * PI)) - 1.0 / PI).abs() < 0.01);
        }
    }

    #[test]
    fn constant_sigma_bound_on_the_disk() {
        let sigma = -3.0f64;
        let l = disk_robin_lambda(1.0, sigma).unwrap();
        assert!(constant_sigma_bound_check(&Domain::disk(1.0), None, sigma, l, 1e-10).unwrap());
        assert!(!constant_sigma_bound_check(&Domain::disk(1.0), None, sigma, l + 1e-6, 1e-10).unwrap());
        assert!(constant_sigma_bound_check(&Domain::disk(1.0), None, 0.0, 0.0, 1e-12).unwrap());
        assert!(constant_sigma_bound_check(&Domain::<f64>::unit_square(), None, -1.0, 0.0, 0.0).is_err());
    }
}
