use approx::assert_relative_eq;
use robinopt::fem::{assemble, solve_resolvent};
use robinopt::geometry::{generate_mesh, Domain};
use robinopt::optimizer::eval_f;
use robinopt::oracles::{annulus_f, ball_f, disk_f, predict_lambda, rectangle_torsion_integral};

#[test]
fn ball_in_two_dimensions_is_the_disk() {
    for s in [-0.3, -2.0, -30.0] {
        assert_relative_eq!(ball_f(2, 1.3, s).unwrap(), disk_f(1.3, s).unwrap(), max_relative = 1e-12);
    }
}

#[test]
fn annulus_fem_matches_closed_form() {
    let dom = Domain::Annulus { outer: 1.0, inner: 0.4 };
    let space = assemble(generate_mesh(&dom, 0.03, 0.15).unwrap()).unwrap();
    for s in [-1.0, -9.0] {
        let exact = annulus_f(1.0, 0.4, s).unwrap();
        assert_relative_eq!(eval_f(&space, s).unwrap(), exact, max_relative = 2e-3);
    }
}

#[test]
fn rectangle_torsion_fem_matches_series() {
    let dom = Domain::Rectangle { width: 2.0, height: 1.0 };
    let space = assemble(generate_mesh(&dom, 0.03, 0.0).unwrap()).unwrap();
    let u = solve_resolvent(&space, 0.0).unwrap();
    assert_relative_eq!(space.integral(&u.values), rectangle_torsion_integral(2.0, 1.0), max_relative = 2e-3);
}

#[test]
fn predictions_follow_the_geometry() {
    let disk = predict_lambda(&Domain::disk(2.0)).unwrap();
    // -mu^2 / (4 pi)^2 + (2 pi / (4 pi)^2) mu
    let p = 4.0 * std::f64::consts::PI;
    assert_relative_eq!(disk.evaluate(-10.0), -100.0 / (p * p) - 10.0 * 2.0 * std::f64::consts::PI / (p * p), max_relative = 1e-12);
    let annulus = predict_lambda(&Domain::Annulus { outer: 1.0, inner: 0.5 }).unwrap();
    assert_eq!(annulus.subleading, 0.0);
    let square = predict_lambda(&Domain::<f64>::unit_square()).unwrap();
    assert_relative_eq!(square.subleading, 2.0 * 16.0 / std::f64::consts::PI / 16.0, max_relative = 1e-8);
}

#[test]
fn single_precision_pipeline() {
    let space = assemble(generate_mesh(&Domain::<f32>::disk(1.0), 0.1, 0.0).unwrap()).unwrap();
    let f = eval_f(&space, -2.0f32).unwrap();
    let exact = disk_f(1.0f64, -2.0).unwrap();
    assert!(((f as f64 - exact) / exact).abs() < 1e-2, "{f} vs {exact}");
}
