//! Modified Bessel functions `I_nu`, `K_nu`, the ratio `I_{nu+1}/I_nu`, and
//! the small-argument `J_nu` series needed for positive Robin parameters.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Switch from the power series to the large-argument expansion of `I_nu`.
const SERIES_LIMIT: f64 = 15.0;
const MAX_TERMS: usize = 500;

/// Lanczos approximation (g = 7, n = 9) of the gamma function for `x > 0`.
pub fn gamma<T: Real>(x: T) -> T {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < T::lit(0.5) {
        // reflection
        return T::PI() / ((T::PI() * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut a = T::lit(COEF[0]);
    let t = x + T::lit(G + 0.5);
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += T::lit(*c) / (x + T::from_usize_lossy(i));
    }
    (T::lit(2.0) * T::PI()).sqrt() * t.powf(x + T::lit(0.5)) * (-t).exp() * a
}

fn check_args<T: Real>(nu: T, x: T) -> Result<()> {
    if !(nu >= T::zero()) || !nu.is_finite() {
        return Err(Error::InvalidInput(format!("Bessel order must be >= 0, got {nu}")));
    }
    if !(x >= T::zero()) || !x.is_finite() {
        return Err(Error::InvalidInput(format!("Bessel argument must be >= 0, got {x}")));
    }
    Ok(())
}

/// Power series of `I_nu(x)`; every term is positive.
fn i_series<T: Real>(nu: T, x: T) -> T {
    if x == T::zero() {
        return if nu == T::zero() { T::one() } else { T::zero() };
    }
    let half = x / T::lit(2.0);
    let q = half * half;
    let mut term = half.powf(nu) / gamma(nu + T::one());
    let mut sum = term;
    for k in 1..MAX_TERMS {
        let kk = T::from_usize_lossy(k);
        term = term * q / (kk * (kk + nu));
        sum += term;
        if term <= sum * T::epsilon() {
            break;
        }
    }
    sum
}

/// Large-argument expansion of `sqrt(2 pi x) e^{-x} I_nu(x)`.
fn i_asymptotic_scaled<T: Real>(nu: T, x: T) -> T {
    let mu = T::lit(4.0) * nu * nu;
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..MAX_TERMS {
        let kk = T::from_usize_lossy(k);
        let odd = T::lit(2.0) * kk - T::one();
        let next = -term * (mu - odd * odd) / (T::lit(8.0) * kk * x);
        if next.abs() >= term.abs() && k > 1 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= sum.abs() * T::epsilon() {
            break;
        }
    }
    sum
}

/// `I_nu(x)` for `nu >= 0`, `x >= 0`.
///
/// Fails with a range error when the value overflows; use [`bessel_ratio`]
/// or [`bessel_i_scaled`] for large arguments.
pub fn bessel_i<T: Real>(nu: T, x: T) -> Result<T> {
    check_args(nu, x)?;
    let v = if x <= T::lit(SERIES_LIMIT) {
        i_series(nu, x)
    } else {
        x.exp() / (T::lit(2.0) * T::PI() * x).sqrt() * i_asymptotic_scaled(nu, x)
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!(
            "I_{nu}({x}) overflows; use bessel_ratio or bessel_i_scaled"
        )))
    }
}

/// `e^{-x} I_nu(x)`, finite for all `x >= 0`.
pub fn bessel_i_scaled<T: Real>(nu: T, x: T) -> Result<T> {
    check_args(nu, x)?;
    if x <= T::lit(SERIES_LIMIT) {
        Ok(i_series(nu, x) * (-x).exp())
    } else {
        Ok(i_asymptotic_scaled(nu, x) / (T::lit(2.0) * T::PI() * x).sqrt())
    }
}

/// `I_{nu+1}(x) / I_nu(x)` by the modified Lentz continued fraction.
///
/// Overflow-free for every `x > 0`; the result lies in `(0, 1)`.
pub fn bessel_ratio<T: Real>(nu: T, x: T) -> Result<T> {
    check_args(nu, x)?;
    if x == T::zero() {
        return Err(Error::InvalidInput("bessel_ratio requires x > 0".into()));
    }
    let tiny = T::min_positive_value().sqrt();
    let eps = T::epsilon();
    let two_over_x = T::lit(2.0) / x;
    let mut f = tiny;
    let mut c = f;
    let mut d = T::zero();
    let max_iter = 100_000 + 2 * x.to_f64_lossy().min(1e8) as usize;
    for k in 1..=max_iter {
        let b = two_over_x * (nu + T::from_usize_lossy(k));
        d = b + d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + T::one() / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < eps {
            return Ok(f);
        }
    }
    Err(Error::Solver {
        what: format!("continued fraction for I_{{nu+1}}/I_nu at nu = {nu}, x = {x}"),
        residual: f64::NAN,
    })
}

/// Derivative of `x -> I_{nu+1}(x)/I_nu(x)`, from the Riccati identity
/// `r' = 1 - (2 nu + 1) r / x - r^2`.
pub fn bessel_ratio_derivative<T: Real>(nu: T, x: T) -> Result<T> {
    let r = bessel_ratio(nu, x)?;
    Ok(T::one() - (T::lit(2.0) * nu + T::one()) * r / x - r * r)
}

fn order_kind<T: Real>(nu: T) -> Option<(usize, bool)> {
    let twice = (nu + nu).to_f64_lossy();
    if twice.fract() != 0.0 {
        return None;
    }
    let twice = twice as usize;
    Some((twice / 2, twice % 2 == 1))
}

/// `K_0` and `K_1` by the logarithmic series (small `x`).
fn k01_series<T: Real>(x: T) -> (T, T) {
    let euler = T::lit(0.577_215_664_901_532_9);
    let half = x / T::lit(2.0);
    let q = half * half;
    let l = half.ln();
    // K0 = -(ln(x/2) + gamma) I0 + sum q^k/(k!)^2 H_k
    let mut t = T::one();
    let mut h = T::zero();
    let mut s0 = T::zero();
    // K1 = 1/x + ln(x/2) I1 - (x/4) sum (psi(k+1) + psi(k+2)) q^k/(k!(k+1)!)
    let mut t1 = T::one();
    let mut s1 = T::zero();
    for k in 0..MAX_TERMS {
        let kk = T::from_usize_lossy(k);
        if k > 0 {
            t = t * q / (kk * kk);
            h += T::one() / kk;
            s0 += t * h;
            t1 = t1 * q / (kk * (kk + T::one()));
        }
        let psi = -euler + h + (-euler + h + T::one() / (kk + T::one()));
        s1 += psi * t1;
        if k > 2 && t.abs() < T::epsilon() * s0.abs().max(T::min_positive_value()) && t1.abs() < T::epsilon() {
            break;
        }
    }
    let k0 = -(l + euler) * i_series(T::zero(), x) + s0;
    let k1 = T::one() / x + l * i_series(T::one(), x) - x / T::lit(4.0) * s1;
    (k0, k1)
}

/// `K_0` and `K_1` by Steed's continued fraction (`x >= 2`).
fn k01_steed<T: Real>(x: T) -> Result<(T, T)> {
    let two = T::lit(2.0);
    let mut b = two * (T::one() + x);
    let mut d = T::one() / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = T::zero();
    let mut q2 = T::one();
    let a1 = T::lit(0.25);
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = T::one() + q * delh;
    let mut converged = false;
    for i in 1..100_000usize {
        let ii = T::from_usize_lossy(i);
        a -= two * ii;
        c = -a * c / (ii + T::one());
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += two;
        d = T::one() / (b + a * d);
        delh = (b * d - T::one()) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < T::epsilon() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Solver {
            what: format!("Steed continued fraction for K at x = {x}"),
            residual: f64::NAN,
        });
    }
    h = a1 * h;
    let k0 = (T::PI() / (two * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + T::lit(0.5) - h) / x;
    Ok((k0, k1))
}

/// `K_nu(x)` for integer and half-integer orders, `x > 0`.
pub fn bessel_k<T: Real>(nu: T, x: T) -> Result<T> {
    check_args(nu, x)?;
    if x == T::zero() {
        return Err(Error::Range("K_nu is singular at x = 0".into()));
    }
    let (n, half_integer) = order_kind(nu).ok_or_else(|| {
        Error::InvalidInput(format!("K_nu is implemented for integer and half-integer orders, got {nu}"))
    })?;
    if half_integer {
        // K_{n+1/2}(x) = sqrt(pi/2x) e^{-x} sum_k (n+k)!/(k!(n-k)!) (2x)^{-k}
        let mut sum = T::zero();
        let mut coef = T::one();
        for k in 0..=n {
            if k > 0 {
                let kk = T::from_usize_lossy(k);
                let nn = T::from_usize_lossy(n);
                coef = coef * (nn + kk) * (nn - kk + T::one()) / kk;
            }
            sum += coef / (T::lit(2.0) * x).powi(k as i32);
        }
        return Ok((T::PI() / (T::lit(2.0) * x)).sqrt() * (-x).exp() * sum);
    }
    let (mut km, mut k) = if x < T::lit(2.0) { k01_series(x) } else { k01_steed(x)? };
    if n == 0 {
        return Ok(km);
    }
    for j in 1..n {
        let next = km + T::lit(2.0) * T::from_usize_lossy(j) / x * k;
        km = k;
        k = next;
    }
    Ok(k)
}

/// `J_nu(x)` by its power series, for `0 <= x <= 12`.
pub fn bessel_j<T: Real>(nu: T, x: T) -> Result<T> {
    check_args(nu, x)?;
    if x > T::lit(12.0) {
        return Err(Error::Range(format!("J_nu series is limited to x <= 12, got {x}")));
    }
    if x == T::zero() {
        return Ok(if nu == T::zero() { T::one() } else { T::zero() });
    }
    let half = x / T::lit(2.0);
    let q = half * half;
    let mut term = half.powf(nu) / gamma(nu + T::one());
    let mut sum = term;
    for k in 1..MAX_TERMS {
        let kk = T::from_usize_lossy(k);
        term = -term * q / (kk * (kk + nu));
        sum += term;
        if term.abs() <= sum.abs() * T::epsilon() * T::lit(0.1) {
            break;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain 30-term series, independent of the adaptive truncation above.
    fn i_series_30(nu: f64, x: f64) -> f64 {
        let mut s = 0.0;
        for k in 0..30 {
            let kf = k as f64;
            s += (x / 2.0).powf(2.0 * kf + nu) / (gamma(kf + 1.0) * gamma(kf + nu + 1.0));
        }
        s
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(1.0f64) - 1.0).abs() < 1e-14);
        assert!((gamma(5.0f64) - 24.0).abs() < 1e-12);
        assert!((gamma(1.5f64) - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-14);
        assert!((gamma(0.5f64) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn i_at_zero_and_one() {
        assert_eq!(bessel_i(0.0f64, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.0f64, 0.0).unwrap(), 0.0);
        let oracle = i_series_30(0.0, 1.0);
        assert!((oracle - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((bessel_i(0.0f64, 1.0).unwrap() - oracle).abs() < 1e-15);
    }

    #[test]
    fn i_relative_accuracy_up_to_30() {
        // half-integer orders have closed forms: I_{1/2} = sqrt(2/(pi x)) sinh x
        for &x in &[0.3, 2.0, 9.0, 14.9, 15.1, 22.0, 30.0] {
            let exact = (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sinh();
            let got = bessel_i(0.5f64, x).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-12, "x {x}");
            // integer order: series (no cancellation) vs asymptotic across the switch
            if x <= 30.0 {
                let s = i_series_30(0.0, x.min(14.0));
                let g = bessel_i(0.0f64, x.min(14.0)).unwrap();
                assert!(((s - g) / s).abs() < 1e-13);
            }
        }
        // continuity across the series/asymptotic switch
        let a = bessel_i(1.0f64, 15.0 + 1e-9).unwrap();
        let b = i_series(1.0f64, 15.0 + 1e-9);
        assert!(((a - b) / a).abs() < 1e-12);
        let c = bessel_i(0.0f64, 15.0 + 1e-9).unwrap();
        let d = i_series(0.0f64, 15.0 + 1e-9);
        assert!(((c - d) / d).abs() < 1e-12);
    }

    #[test]
    fn i_overflow_is_a_range_error() {
        assert!(matches!(bessel_i(0.0f64, 1000.0), Err(Error::Range(_))));
        assert!(bessel_i_scaled(0.0f64, 1000.0).unwrap().is_finite());
    }

    #[test]
    fn ratio_examples() {
        let r = bessel_ratio(0.0f64, 1e-6).unwrap();
        assert!((r - 5e-7).abs() < 1e-18);
        // oracle: I1(1)/I0(1) from the plain series
        let oracle = i_series_30(1.0, 1.0) / i_series_30(0.0, 1.0);
        assert!((bessel_ratio(0.0f64, 1.0).unwrap() - oracle).abs() < 1e-15);
        assert!((oracle - 0.446_389_965_896_534_5).abs() < 1e-15);
        // x = 100 against the scaled asymptotic quotient
        let big = bessel_ratio(0.0f64, 100.0).unwrap();
        let asym = i_asymptotic_scaled(1.0f64, 100.0) / i_asymptotic_scaled(0.0f64, 100.0);
        assert!(((big - asym) / asym).abs() < 1e-13);
        assert!((big - 0.994_987_373_005_168_4).abs() < 1e-12);
    }

    #[test]
    fn ratio_half_integer_closed_form_to_1e4() {
        // I_{3/2}/I_{1/2} = coth x - 1/x
        let mut x = 0.01f64;
        while x <= 1e4 {
            let exact = 1.0 / x.tanh() - 1.0 / x;
            let got = bessel_ratio(0.5, x).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-10, "x {x}");
            x *= 1.7;
        }
    }

    #[test]
    fn ratio_monotone_and_bounded() {
        let mut prev = 0.0;
        for k in 1..400 {
            let x = 0.05 * k as f64 * (1.0 + k as f64 / 20.0);
            let r = bessel_ratio(0.0f64, x).unwrap();
            assert!(r > prev && r < 1.0);
            prev = r;
        }
    }

    #[test]
    fn k_wronskian() {
        for nu in [0.0f64, 1.0, 2.0, 0.5, 1.5] {
            let mut x = 0.1;
            while x <= 20.0 {
                let w = bessel_i(nu, x).unwrap() * bessel_k(nu + 1.0, x).unwrap()
                    + bessel_i(nu + 1.0, x).unwrap() * bessel_k(nu, x).unwrap();
                assert!((w * x - 1.0).abs() < 1e-10, "nu {nu} x {x}: {}", w * x);
                x += 0.37;
            }
        }
    }

    #[test]
    fn k_branches_agree_at_two() {
        let (a0, a1) = k01_series(2.0f64);
        let (b0, b1) = k01_steed(2.0f64).unwrap();
        assert!(((a0 - b0) / b0).abs() < 1e-13);
        assert!(((a1 - b1) / b1).abs() < 1e-13);
    }

    #[test]
    fn j_series_zero_and_root() {
        assert_eq!(bessel_j(0.0f64, 0.0).unwrap(), 1.0);
        // first zero of J0
        assert!(bessel_j(0.0f64, 2.404_825_557_695_773).unwrap().abs() < 1e-14);
        assert!((bessel_j(1.0f64, 1.0).unwrap() - 0.440_050_585_744_933_5).abs() < 1e-15);
    }

    #[test]
    fn single_precision() {
        let r = bessel_ratio(0.0f32, 1.0).unwrap();
        assert!((r - 0.446_389_97).abs() < 1e-6);
    }
}
