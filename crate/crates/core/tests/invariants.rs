use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use robinopt::fem::{assemble, robin_principal_eigenvalue, BoundaryFunction};
use robinopt::geometry::{generate_mesh, shoelace_area, Domain};
use robinopt::optimizer::{default_tol, eval_f, eval_f_prime, optimize};
use robinopt::oracles::{disk_f, disk_s_of_mu};
use robinopt::specfun::corner_coefficient;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn disk_f_is_scale_invariant(r in 0.2f64..5.0, s in -50.0f64..-0.01) {
        let a = disk_f(r, s).unwrap();
        let b = disk_f(1.0, r * r * s).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn disk_inverse_round_trip(mu in -300.0f64..-0.01) {
        let s = disk_s_of_mu(1.0, mu).unwrap();
        // the constant test function gives lambda(sigma) <= mu / |Omega| for every sigma
        prop_assert!(s < 0.0 && s <= mu / PI + 1e-12);
        let back = disk_f(1.0, s).unwrap();
        prop_assert!((back - mu).abs() <= 1e-9 * (1.0 + mu.abs()), "{back} vs {mu}");
    }

    #[test]
    fn corner_coefficient_decreases(a in 0.05f64..6.2, d in 0.01f64..0.5) {
        let b = (a + d).min(2.0 * PI - 0.02);
        prop_assume!(b > a + 1e-3);
        prop_assert!(corner_coefficient(b).unwrap() < corner_coefficient(a).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn polygon_mesh_preserves_area(w in 0.5f64..2.0, ht in 0.5f64..2.0, skew in -0.4f64..0.4) {
        let vertices = vec![[0.0, 0.0], [w, 0.0], [w + skew, ht], [skew * 0.5, ht * 0.8]];
        let exact = shoelace_area(&vertices);
        let space = assemble(generate_mesh(&Domain::Polygon { vertices }, 0.1, 0.0).unwrap()).unwrap();
        prop_assert!((space.area() - exact).abs() <= 1e-12 * exact);
        let ones: f64 = space.mass_ones().iter().sum();
        prop_assert!((ones - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn f_is_increasing_on_meshes(w in 0.6f64..1.6, s1 in -40.0f64..-0.5, ds in 0.1f64..5.0) {
        let space = assemble(generate_mesh(&Domain::Rectangle { width: w, height: 1.0 }, 0.1, 0.0).unwrap()).unwrap();
        let s2 = s1 + ds;
        prop_assert!(eval_f(&space, s1).unwrap() < eval_f(&space, s2).unwrap());
        prop_assert!(eval_f_prime(&space, s1).unwrap() > 0.0);
    }

    #[test]
    fn optimizer_dominates_perturbations(
        w in 0.7f64..1.5,
        mu in -6.0f64..-0.5,
        bumps in proptest::collection::vec(-1.0f64..1.0, 8),
    ) {
        let space = assemble(generate_mesh(&Domain::Rectangle { width: w, height: 1.0 }, 0.1, 0.3).unwrap()).unwrap();
        let tol = default_tol(mu);
        let r = optimize(&space, mu, tol).unwrap();
        prop_assert!(r.sigma_integral_error <= 1e-8 * (1.0 + mu.abs()));
        // smooth zero-mean perturbation built from boundary arc position
        let base = r.sigma_mu.values().to_vec();
        let wts = r.sigma_mu.weights().to_vec();
        let n = base.len();
        let mut eta: Vec<f64> = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                bumps.iter().enumerate().map(|(k, b)| b * ((k + 1) as f64 * t).sin()).sum::<f64>()
            })
            .collect();
        let mean = eta.iter().zip(&wts).map(|(e, w)| e * w).sum::<f64>() / wts.iter().sum::<f64>();
        eta.iter_mut().for_each(|e| *e -= mean);
        let scale = 0.3 * (mu.abs() / space.perimeter()).max(1.0);
        let vals: Vec<f64> = base.iter().zip(&eta).map(|(b, e)| b + scale * e).collect();
        let sigma = BoundaryFunction::new(&space, vals).unwrap();
        prop_assert!((sigma.integral() - mu).abs() <= 1e-8 * (1.0 + mu.abs()));
        let lam = robin_principal_eigenvalue(&space, &sigma).unwrap().eigenvalue;
        prop_assert!(lam <= r.s_mu + 50.0 * tol, "{lam} > {}", r.s_mu);
    }
}

#[test]
fn constant_sigma_on_the_disk_is_optimal() {
    let space = assemble(generate_mesh(&Domain::disk(1.0), 0.05, 0.2).unwrap()).unwrap();
    let mu = -6.0;
    let r = optimize(&space, mu, default_tol(mu)).unwrap();
    let constant = BoundaryFunction::constant(&space, mu / space.perimeter());
    let lam = robin_principal_eigenvalue(&space, &constant).unwrap().eigenvalue;
    assert_relative_eq!(lam, r.s_mu, max_relative = 1e-4);
    assert_relative_eq!(r.s_mu, disk_s_of_mu(1.0, mu).unwrap(), max_relative = 5e-3);
}
