//! Verification suites with machine-readable reports.
//!
//! Every case carries the measured value next to the expected value and the
//! tolerance it was judged against. Suites are deterministic for fixed
//! inputs; wall-clock time is recorded only when requested.

mod asymptotic;
mod blowup;
mod heat;
mod optimality;

pub use asymptotic::{
    default_fem_grid, fem_remainder_sweep, run_asymptotic_suite, square_sweep_default_grid, RemainderPoint,
    RemainderSweep, REMAINDER_BAND, SPREAD_FRACTION,
};
pub use blowup::{blowup_report, run_blowup_demo, BlowupTrace};
pub use heat::{heat_fit_times, run_heat_content_suite, HeatFit};
pub use optimality::run_optimality_suite;

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{assemble, FemSpace};
use crate::geometry::{generate_mesh, Domain};
use crate::optimizer::boundary_layer_width;

/// One checked quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Case {
    pub description: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Case {
    /// `|measured - expected| <= tolerance`.
    pub fn absolute(description: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (measured - expected).abs() <= tolerance;
        Self::with_flag(description, measured, expected, tolerance, pass)
    }

    /// `|measured - expected| <= tolerance |expected|`.
    pub fn relative(description: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        let pass = (measured - expected).abs() <= tolerance * expected.abs();
        Self::with_flag(description, measured, expected, tolerance, pass)
    }

    /// `measured <= expected + tolerance`.
    pub fn at_most(description: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        let pass = measured <= expected + tolerance;
        Self::with_flag(description, measured, expected, tolerance, pass)
    }

    pub fn with_flag(description: impl Into<String>, measured: f64, expected: f64, tolerance: f64, pass: bool) -> Self {
        Case { description: description.into(), measured, expected, tolerance, pass: pass && measured.is_finite() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: Vec<Case>,
    pub pass: bool,
    pub runtime_s: Option<f64>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, cases: Vec<Case>) -> Self {
        let pass = !cases.is_empty() && cases.iter().all(|c| c.pass);
        SuiteReport { suite: suite.into(), cases, pass, runtime_s: None }
    }

    /// Concatenates reports, prefixing case descriptions with the suite name.
    pub fn merge(suite: impl Into<String>, reports: &[SuiteReport]) -> Self {
        let cases = reports
            .iter()
            .flat_map(|r| {
                r.cases.iter().map(move |c| Case { description: format!("{}: {}", r.suite, c.description), ..c.clone() })
            })
            .collect();
        let mut out = Self::new(suite, cases);
        if reports.iter().all(|r| r.runtime_s.is_some()) && !reports.is_empty() {
            out.runtime_s = Some(reports.iter().filter_map(|r| r.runtime_s).sum());
        }
        out
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table with six significant digits.
    pub fn to_table(&self) -> String {
        let width = self.cases.iter().map(|c| c.description.len()).max().unwrap_or(0).max(11);
        let mut out = String::new();
        let _ = writeln!(out, "suite: {}", self.suite);
        let _ = writeln!(out, "{:<width$}  {:>13}  {:>13}  {:>10}  result", "description", "measured", "expected", "tolerance");
        for c in &self.cases {
            let _ = writeln!(
                out,
                "{:<width$}  {:>13.6e}  {:>13.6e}  {:>10.3e}  {}",
                c.description,
                c.measured,
                c.expected,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        let _ = write!(out, "overall: {}", if self.pass { "pass" } else { "FAIL" });
        if let Some(t) = self.runtime_s {
            let _ = write!(out, " ({t:.2} s)");
        }
        out.push('\n');
        out
    }
}

/// Shared knobs for the suites.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    /// Interior element size.
    pub h: f64,
    /// Root tolerance; `None` uses the `mu`-scaled default.
    pub tol: Option<f64>,
    pub seed: u64,
    pub samples: usize,
    /// Constraint value for the optimality suite.
    pub mu: f64,
    /// Constraint values for the asymptotic suite; empty picks a default.
    pub mu_grid: Vec<f64>,
    pub blowup_mu: f64,
    pub blowup_n_max: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            h: 0.02,
            tol: None,
            seed: 7,
            samples: 100,
            mu: -10.0,
            mu_grid: Vec::new(),
            blowup_mu: -1.0,
            blowup_n_max: 40,
        }
    }
}

/// Meshes `domain` at size `h`, graded for the boundary layer expected at
/// the most negative entry of `mus`.
pub fn space_for(domain: &Domain<f64>, h: f64, mus: &[f64]) -> Result<FemSpace<f64>> {
    let worst = mus.iter().fold(0.0f64, |a, &m| a.min(m));
    let w = boundary_layer_width(domain.metrics()?.perimeter, worst);
    assemble(generate_mesh(domain, h, w)?)
}

/// Runs the suites named `optimality`, `asymptotic`, `heat` and `blowup`, or
/// all of them for `all`.
pub fn run_suite(name: &str, domain: &Domain<f64>, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match name {
        "optimality" => {
            let space = Arc::new(space_for(domain, cfg.h, &[cfg.mu])?);
            run_optimality_suite(&space, cfg.mu, cfg.samples, cfg.seed, cfg.tol)
        }
        "asymptotic" => run_asymptotic_suite(domain, &cfg.mu_grid, cfg.h),
        "heat" => run_heat_content_suite(domain, cfg.h),
        "blowup" => Ok(blowup_report(&run_blowup_demo(domain, cfg.blowup_mu, cfg.blowup_n_max)?)),
        "all" => {
            let reports = SUITES
                .iter()
                .map(|s| run_suite(s, domain, cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok(SuiteReport::merge("all", &reports))
        }
        other => Err(Error::InvalidInput(format!(
            "unknown suite '{other}' (expected one of {}, all)",
            SUITES.join(", ")
        ))),
    }
}

pub const SUITES: [&str; 4] = ["optimality", "asymptotic", "heat", "blowup"];

/// Least-squares coefficients of `y ~ sum_j c_j basis_j(t)`.
pub(crate) fn least_squares(ts: &[f64], ys: &[f64], basis: &[&dyn Fn(f64) -> f64]) -> Vec<f64> {
    let p = basis.len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (&t, &y) in ts.iter().zip(ys) {
        let row: Vec<f64> = basis.iter().map(|b| b(t)).collect();
        for i in 0..p {
            for j in 0..p {
                a[i][j] += row[i] * row[j];
            }
            a[i][p] += row[i] * y;
        }
    }
    // Gaussian elimination with partial pivoting on the normal equations
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in col + 1..p {
            let f = a[r][col] / a[col][col];
            for c in col..=p {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; p];
    for r in (0..p).rev() {
        let s: f64 = (r + 1..p).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][p] - s) / a[r][r];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_coefficients() {
        let ts: Vec<f64> = (1..30).map(|k| k as f64 * 0.01).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 - 2.0 * t.sqrt() + 0.5 * t).collect();
        let c = least_squares(&ts, &ys, &[&|_| 1.0, &|t: f64| t.sqrt(), &|t| t]);
        assert!((c[0] - 3.0).abs() < 1e-10 && (c[1] + 2.0).abs() < 1e-9 && (c[2] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn report_pass_flags_and_formats() {
        let r = SuiteReport::new(
            "demo",
            vec![Case::absolute("a", 1.0, 1.0, 0.0), Case::relative("b", 1.05, 1.0, 0.01)],
        );
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
        let json = r.to_json();
        assert!(json.contains("\"runtime_s\": null"));
        assert!(r.to_table().contains("FAIL"));
        let m = SuiteReport::merge("all", &[r.clone(), SuiteReport::new("x", vec![Case::at_most("c", 0.0, 1.0, 0.0)])]);
        assert_eq!(m.cases.len(), 3);
        assert!(m.cases[2].description.starts_with("x: "));
        assert!(!SuiteReport::new("empty", vec![]).pass);
        assert!(!Case::absolute("nan", f64::NAN, 0.0, 1.0).pass);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        let e = run_suite("nosuch", &Domain::disk(1.0), &SuiteConfig::default()).unwrap_err();
        assert!(e.to_string().contains("optimality"));
    }
}
