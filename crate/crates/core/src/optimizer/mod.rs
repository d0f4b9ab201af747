//! The maximal principal eigenvalue `Lambda_mu = s(mu)` as the root of
//! `F(s) = s^2 int U_s + s |Omega| = mu`, and the optimal parameter
//! `sigma_mu = -s dU_s/dn` with ground state `u_mu = s U_s + 1`.

use crate::error::{Error, Result};
use crate::fem::{
    dirichlet_eigenpairs, normal_flux, resolution_product, robin_principal_eigenvalue, solve_resolvent,
    BoundaryFunction, FemSpace, FieldKind, FieldSolution, RESOLUTION_LIMIT,
};
use crate::linalg::dot;
use crate::scalar::Real;

/// Relative distance below `E_1` that positive `s` may not cross.
pub const E1_MARGIN: f64 = 1e-4;

/// Default root tolerance `1e-10 (1 + |mu|)`.
pub fn default_tol<T: Real>(mu: T) -> T {
    T::tol_floor(1e-10, 1e3) * (T::one() + mu.abs())
}

/// `F(s)` together with `F'(s)` and the resolvent it came from.
#[derive(Clone, Debug)]
pub struct FEvaluation<T> {
    pub s: T,
    pub f: T,
    pub f_prime: T,
    pub resolvent: FieldSolution<T>,
}

pub fn eval_f_with_derivative<T: Real>(space: &FemSpace<T>, s: T) -> Result<FEvaluation<T>> {
    let u = solve_resolvent(space, s)?;
    let f = s * s * space.integral(&u.values) + s * space.area();
    let g: Vec<T> = u.values.iter().map(|&v| T::one() + s * v).collect();
    let f_prime = space.mass().bilinear(&g, &g);
    Ok(FEvaluation { s, f, f_prime, resolvent: u })
}

/// `F(s) = s^2 1^T M U_s + s 1^T M 1`.
pub fn eval_f<T: Real>(space: &FemSpace<T>, s: T) -> Result<T> {
    if s == T::zero() {
        return Ok(T::zero());
    }
    Ok(eval_f_with_derivative(space, s)?.f)
}

/// `F'(s) = int (1 + s U_s)^2`.
pub fn eval_f_prime<T: Real>(space: &FemSpace<T>, s: T) -> Result<T> {
    Ok(eval_f_with_derivative(space, s)?.f_prime)
}

/// Most negative `s` with `sqrt(|s|) h_boundary <= 0.2`.
pub fn resolution_cap<T: Real>(space: &FemSpace<T>) -> T {
    let r = T::lit(RESOLUTION_LIMIT) / space.mesh().h_boundary();
    -(r * r)
}

/// Boundary-layer width `0.7 / kappa` for the decay rate `kappa` expected
/// at constraint value `mu`.
pub fn boundary_layer_width<T: Real>(perimeter: T, mu: T) -> T {
    let kappa = mu.abs() / perimeter + T::one();
    T::lit(0.7) / kappa
}

#[derive(Clone, Debug)]
pub struct RootSolve<T> {
    pub s: T,
    pub f_residual: T,
    pub iterations: usize,
    pub evaluation: Option<FEvaluation<T>>,
}

/// Solves `F(s) = mu` to `|F(s) - mu| <= tol`.
pub fn solve_s_of_mu<T: Real>(space: &FemSpace<T>, mu: T, tol: T) -> Result<T> {
    Ok(solve_s_of_mu_detailed(space, mu, tol)?.s)
}

pub fn solve_s_of_mu_detailed<T: Real>(space: &FemSpace<T>, mu: T, tol: T) -> Result<RootSolve<T>> {
    if !(tol > T::zero()) || !mu.is_finite() {
        return Err(Error::InvalidInput(format!("need finite mu and tol > 0, got mu = {mu}, tol = {tol}")));
    }
    if mu == T::zero() {
        return Ok(RootSolve { s: T::zero(), f_residual: T::zero(), iterations: 0, evaluation: None });
    }
    let area = space.area();
    let (mut lo, mut hi);
    if mu < T::zero() {
        let cap = resolution_cap(space);
        // the constant test function gives s(mu) <= mu/|Omega|
        hi = mu / area;
        let p = space.perimeter();
        lo = -T::lit(4.0) * (mu / p) * (mu / p) - T::one();
        loop {
            if lo < cap {
                lo = cap;
            }
            let f_lo = eval_f(space, lo)?;
            if f_lo <= mu {
                break;
            }
            if lo == cap {
                return Err(Error::ResolutionCap {
                    product: (mu / p).abs().to_f64_lossy() * space.mesh().h_boundary().to_f64_lossy(),
                    finest_mu: f_lo.to_f64_lossy(),
                });
            }
            lo = lo * T::lit(2.0);
        }
        if hi <= lo {
            hi = T::zero();
        }
    } else {
        let e1 = space.dirichlet_e1()?;
        lo = T::zero();
        hi = e1 * (T::one() - T::lit(E1_MARGIN));
        let guess = mu / area;
        let bracketed = guess < hi && {
            let f = eval_f(space, guess)?;
            if f <= mu {
                lo = guess;
                false
            } else {
                hi = guess;
                true
            }
        };
        if !bracketed {
            let f_hi = eval_f(space, hi)?;
            if f_hi < mu {
                return Err(Error::Range(format!(
                    "mu = {mu} needs s beyond {hi} (too close to E1 = {e1}); use mu below {f_hi}"
                )));
            }
        }
    }
    // safeguarded Newton, started at the constant-test-function bound
    let mut s = mu / area;
    if !(s > lo && s < hi) {
        s = (lo + hi) / T::lit(2.0);
    }
    let max_iter = 200;
    for it in 1..=max_iter {
        let ev = eval_f_with_derivative(space, s)?;
        let r = ev.f - mu;
        if r.abs() <= tol {
            return Ok(RootSolve { s, f_residual: r.abs(), iterations: it, evaluation: Some(ev) });
        }
        if r < T::zero() {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - r / ev.f_prime;
        let next = if newton > lo && newton < hi { newton } else { (lo + hi) / T::lit(2.0) };
        if next == s || hi - lo <= T::epsilon() * s.abs() * T::lit(4.0) {
            return Err(Error::Solver {
                what: format!("root of F(s) = {mu} stalled at s = {s}"),
                residual: r.abs().to_f64_lossy(),
            });
        }
        s = next;
    }
    Err(Error::Solver { what: format!("root of F(s) = {mu}"), residual: f64::NAN })
}

/// Output of [`optimize`].
#[derive(Clone, Debug)]
pub struct OptimizeResult<T> {
    pub mu: T,
    /// `Lambda_mu`.
    pub s_mu: T,
    pub sigma_mu: BoundaryFunction<T>,
    pub u_mu: FieldSolution<T>,
    /// `|F(s_mu) - mu|`.
    pub f_residual: T,
    /// `|int sigma_mu - mu|`.
    pub sigma_integral_error: T,
    /// Principal eigenvalue of the Robin problem with `sigma_mu`, computed
    /// independently.
    pub independent_lambda: T,
    pub eigen_residual: T,
    pub iterations: usize,
    pub tol: T,
    /// `|independent_lambda - s_mu| <= 50 tol`.
    pub consistent: bool,
    pub boundary_layer_resolved: bool,
}

/// Builds `sigma_mu` and `u_mu` for the constraint `int sigma = mu`.
pub fn optimize<T: Real>(space: &FemSpace<T>, mu: T, tol: T) -> Result<OptimizeResult<T>> {
    let root = solve_s_of_mu_detailed(space, mu, tol)?;
    let s = root.s;
    let u = match root.evaluation {
        Some(ev) => ev.resolvent,
        None => solve_resolvent(space, s)?,
    };
    let flux = normal_flux(space, &u, s)?;
    let sigma = flux.with_values(flux.values().iter().map(|&v| -s * v).collect())?;
    let u_mu = FieldSolution {
        mesh_id: space.mesh_id(),
        values: u.values.iter().map(|&v| s * v + T::one()).collect(),
        kind: FieldKind::Minimizer,
        parameter: s,
        boundary_layer_resolved: u.boundary_layer_resolved,
    };
    if u_mu.values.iter().any(|&v| !(v > T::zero())) {
        log::warn!("u_mu is not positive at every node (mu = {mu})");
    }
    let eig = robin_principal_eigenvalue(space, &sigma)?;
    let consistent = (eig.eigenvalue - s).abs() <= T::lit(50.0) * tol;
    if !consistent {
        log::warn!("independent eigenvalue {} differs from s_mu = {s}", eig.eigenvalue);
    }
    Ok(OptimizeResult {
        mu,
        s_mu: s,
        f_residual: root.f_residual,
        sigma_integral_error: (sigma.integral() - mu).abs(),
        sigma_mu: sigma,
        u_mu,
        independent_lambda: eig.eigenvalue,
        eigen_residual: eig.residual_norm,
        iterations: root.iterations,
        tol,
        consistent,
        boundary_layer_resolved: resolution_product(space, s) <= T::lit(RESOLUTION_LIMIT),
    })
}

/// Torsion integral `int U_0`, equal to `sum_j alpha_j^2 / E_j`.
pub fn small_mu_coefficient<T: Real>(space: &FemSpace<T>) -> Result<T> {
    let u = solve_resolvent(space, T::zero())?;
    Ok(space.integral(&u.values))
}

/// Two-term small-`mu` expansion `mu/|Omega| - mu^2 int U_0 / |Omega|^3`.
pub fn small_mu_prediction<T: Real>(space: &FemSpace<T>, mu: T) -> Result<T> {
    let a = space.area();
    Ok(mu / a - mu * mu * small_mu_coefficient(space)? / (a * a * a))
}

/// `sum_{j <= count} alpha_j^2 / E_j` from computed Dirichlet eigenpairs,
/// with `alpha_j = int phi_j`.
pub fn truncated_eigen_sum<T: Real>(space: &FemSpace<T>, count: usize) -> Result<T> {
    let pairs = dirichlet_eigenpairs(space, count)?;
    Ok(pairs
        .iter()
        .map(|p| {
            let alpha = dot(space.mass_ones(), &p.eigenfunction.values);
            alpha * alpha / p.eigenvalue
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble;
    use crate::geometry::{generate_mesh, Domain};

    fn space(domain: Domain<f64>, h: f64, w: f64) -> FemSpace<f64> {
        assemble(generate_mesh(&domain, h, w).unwrap()).unwrap()
    }

    #[test]
    fn f_at_zero_and_derivative_bounds() {
        let sp = space(Domain::disk(1.0), 0.08, 0.0);
        assert_eq!(eval_f(&sp, 0.0).unwrap(), 0.0);
        assert!((eval_f_prime(&sp, 0.0).unwrap() - sp.area()).abs() < 1e-12);
        for s in [-0.5, -3.0, -20.0] {
            let d = eval_f_prime(&sp, s).unwrap();
            assert!(d > 0.0 && d <= sp.area());
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let sp = space(Domain::unit_square(), 0.05, 0.0);
        for s in [-2.0, -10.0, 5.0] {
            let d = 1e-4 * (1.0 + f64::abs(s));
            let fd = (eval_f(&sp, s + d).unwrap() - eval_f(&sp, s - d).unwrap()) / (2.0 * d);
            let an = eval_f_prime(&sp, s).unwrap();
            assert!(((fd - an) / an).abs() < 1e-4, "s {s}: {fd} vs {an}");
        }
    }

    #[test]
    fn zero_mu_is_trivial() {
        let sp = space(Domain::disk(1.0), 0.1, 0.0);
        let r = optimize(&sp, 0.0, default_tol(0.0)).unwrap();
        assert_eq!(r.s_mu, 0.0);
        assert!(r.sigma_mu.values().iter().all(|&v| v == 0.0));
        assert!(r.u_mu.values.iter().all(|&v| v == 1.0));
        assert!(r.independent_lambda.abs() < 1e-10);
    }

    #[test]
    fn round_trip_and_monotone() {
        let sp = space(Domain::disk(1.0), 0.05, 0.0);
        let mut prev = f64::NEG_INFINITY;
        for mu in [-15.0, -10.0, -1.0, -0.1, 0.5, 2.0] {
            let tol = default_tol(mu);
            let s = solve_s_of_mu(&sp, mu, tol).unwrap();
            assert!((eval_f(&sp, s).unwrap() - mu).abs() <= tol);
            assert!(s > prev);
            assert_eq!(s < 0.0, mu < 0.0);
            prev = s;
        }
    }

    #[test]
    fn optimizer_identities() {
        let sp = space(Domain::unit_square(), 0.05, 0.02);
        let mu = -8.0;
        let r = optimize(&sp, mu, default_tol(mu)).unwrap();
        assert!(r.consistent);
        assert!(r.sigma_integral_error <= 1e-8 * (1.0 + mu.abs()));
        for &g in sp.mesh().boundary_nodes() {
            assert!((r.u_mu.values[g] - 1.0).abs() < 1e-15);
        }
        assert!(r.u_mu.values.iter().all(|&v| v > 0.0));
        // u_mu is an eigenvector of K + B with eigenvalue s_mu
        let b = sp.trace_mass(&r.sigma_mu).unwrap();
        let a = sp.stiffness().linear_combination(1.0, &b, 1.0);
        let au = a.mul_vec(&r.u_mu.values);
        let mu_vec = sp.mass().mul_vec(&r.u_mu.values);
        let res: Vec<f64> = au.iter().zip(&mu_vec).map(|(x, y)| x - r.s_mu * y).collect();
        assert!(sp.dual_norm(&res) <= 1e-6 * sp.mass_norm(&r.u_mu.values));
    }

    #[test]
    fn positive_mu_too_large_is_a_range_error() {
        let sp = space(Domain::disk(1.0), 0.1, 0.0);
        assert!(matches!(solve_s_of_mu(&sp, 1e9, 1e-3), Err(Error::Range(_))));
    }

    #[test]
    fn resolution_cap_refuses() {
        let sp = space(Domain::disk(1.0), 0.1, 0.0);
        match solve_s_of_mu(&sp, -1e4, 1e-6) {
            Err(Error::ResolutionCap { finest_mu, .. }) => assert!(finest_mu < 0.0 && finest_mu > -1e4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eigen_sum_below_torsion() {
        let sp = space(Domain::disk(1.0), 0.05, 0.0);
        let t = small_mu_coefficient(&sp).unwrap();
        let e = truncated_eigen_sum(&sp, 5).unwrap();
        assert!(e <= t && e >= 0.9 * t, "{e} {t}");
    }
}
