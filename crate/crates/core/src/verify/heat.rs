use std::f64::consts::PI;

use super::{least_squares, Case, SuiteReport};
use crate::error::Result;
use crate::fem::{assemble, heat_content, laplace_transform_checks, FemSpace};
use crate::geometry::{generate_mesh, Domain};
use crate::specfun::corner_coefficient;

/// Constraint-free and constrained fits of `Q(t)` on a small-`t` window.
#[derive(Clone, Debug)]
pub struct HeatFit {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Constant of the fit against `{1, sqrt t, t}`.
    pub area_term: f64,
    /// `sqrt t` coefficient of the fit of `Q - |Omega|` against `{sqrt t, t}`.
    pub sqrt_coefficient: f64,
    /// `t` coefficient after removing `|Omega|` and the exact `sqrt t` term.
    pub linear_coefficient: f64,
}

/// Twenty log-spaced times in `[25 h^2, 100 h^2]`.
pub fn heat_fit_times(h: f64) -> Vec<f64> {
    let (a, b) = (25.0 * h * h, 100.0 * h * h);
    (0..20).map(|k| a * (b / a).powf(k as f64 / 19.0)).collect()
}

pub fn fit_heat_content(space: &FemSpace<f64>, times: &[f64], perimeter: f64) -> Result<HeatFit> {
    let curve = heat_content(space, times)?;
    let (ts, qs) = (curve.times, curve.values);
    let area = space.area();
    let full = least_squares(&ts, &qs, &[&|_| 1.0, &|t: f64| t.sqrt(), &|t| t]);
    let shifted: Vec<f64> = qs.iter().map(|q| q - area).collect();
    let two = least_squares(&ts, &shifted, &[&|t: f64| t.sqrt(), &|t| t]);
    let a = -2.0 * perimeter / PI.sqrt();
    let rest: Vec<f64> = ts.iter().zip(&shifted).map(|(t, y)| y - a * t.sqrt()).collect();
    let one = least_squares(&ts, &rest, &[&|t| t]);
    Ok(HeatFit { times: ts, values: qs, area_term: full[0], sqrt_coefficient: two[0], linear_coefficient: one[0] })
}

/// Small-time heat content coefficients and the Laplace identity
/// `int U_s = int_0^inf e^{st} Q(t) dt` on a quasi-uniform mesh of size `h`.
pub fn run_heat_content_suite(domain: &Domain<f64>, h: f64) -> Result<SuiteReport> {
    let m = domain.metrics()?;
    let space = assemble(generate_mesh(domain, h, 0.0)?)?;
    let fit = fit_heat_content(&space, &heat_fit_times(h), m.perimeter)?;
    let mut cases = vec![
        Case::relative("area term of the heat content fit", fit.area_term, space.area(), 1e-3),
        Case::relative("sqrt(t) coefficient vs -2|dOmega|/sqrt(pi)", fit.sqrt_coefficient, -2.0 * m.perimeter / PI.sqrt(), 0.03),
    ];
    let linear = if m.corner_angles.is_empty() {
        Some(("t coefficient vs (1/2) int H", 0.5 * m.curvature_integral))
    } else if m.curvature_integral.abs() <= 1e-9 * m.perimeter {
        let mut c = 0.0;
        for &a in &m.corner_angles {
            c += corner_coefficient(a)?;
        }
        Some(("t coefficient vs sum of corner coefficients", c))
    } else {
        None
    };
    if let Some((label, expected)) = linear {
        // a vanishing expectation is judged on the scale of the sqrt(t) term
        let tol = if expected.abs() > 1e-9 { 0.05 * expected.abs() } else { 0.05 * m.perimeter };
        cases.push(Case::absolute(label, fit.linear_coefficient, expected, tol));
    }
    for chk in laplace_transform_checks(&space, &[-0.5, -1.0, -2.0])? {
        cases.push(Case::relative(
            format!("Laplace identity at s = {}", chk.s),
            chk.rhs,
            chk.lhs,
            0.02,
        ));
    }
    Ok(SuiteReport::new(format!("heat:{}", domain_label(domain)), cases))
}

pub(crate) fn domain_label(d: &Domain<f64>) -> String {
    match d {
        Domain::Disk { radius } => format!("disk({radius})"),
        Domain::Annulus { outer, inner } => format!("annulus({outer},{inner})"),
        Domain::Rectangle { width, height } => format!("rect({width},{height})"),
        Domain::RegularPolygon { sides, circumradius } => format!("ngon({sides},{circumradius})"),
        Domain::LShape { arm } => format!("lshape({arm})"),
        Domain::Polygon { vertices } => format!("polygon({} vertices)", vertices.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_window() {
        let t = heat_fit_times(0.02);
        assert_eq!(t.len(), 20);
        assert!((t[0] - 0.01).abs() < 1e-15 && (t[19] - 0.04).abs() < 1e-15);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn square_heat_content_matches_product_formula() {
        // Q = q(t)^2 with q = 1 - 4 sqrt(t/pi) up to exponentially small terms
        let space = assemble(generate_mesh(&Domain::unit_square(), 0.025, 0.0).unwrap()).unwrap();
        let fit = fit_heat_content(&space, &heat_fit_times(0.025), 4.0).unwrap();
        for (t, q) in fit.times.iter().zip(&fit.values) {
            let exact = (1.0 - 4.0 * (t / PI).sqrt()).powi(2);
            assert!((q - exact).abs() < 2e-3, "t {t}: {q} vs {exact}");
        }
    }
}
