use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use robinopt::fem::{assemble, heat_content, FemSpace};
use robinopt::geometry::{generate_mesh, DomainMetrics};
use robinopt::optimizer::{boundary_layer_width, default_tol, optimize};
use robinopt::oracles::{ball_f, disk_f, disk_robin_lambda, disk_s_of_mu, predict_from_metrics, AsymptoticPrediction};
use robinopt::specfun::corner_coefficient;
use robinopt::verify::{run_optimality_suite, run_suite, SuiteConfig};
use robinopt::Error;

use crate::domain_spec::{parse_domain, DomainSpec};
use crate::output::{to_json, Cell, Table};
use crate::{Command, Format, MeshArgs, OracleCommand, OutputArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INCONSISTENT: u8 = 2;
pub const EXIT_PARTIAL: u8 = 3;

/// Turning angle above which a vertex of an imported mesh counts as a corner.
const CORNER_TOL: f64 = 0.3;

/// Smallest corner angle accepted by `corner-coeff`.
const MIN_CORNER_ANGLE: f64 = 0.05;

pub fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Optimize { mesh, mu, tol, sigma_profile, out } => cmd_optimize(&mesh, mu, tol, sigma_profile, &out),
        Command::Sweep { mesh, mu_min, mu_max, count, tol, jobs, timing, out } => {
            cmd_sweep(&mesh, mu_min, mu_max, count, tol, jobs, timing, &out)
        }
        Command::HeatContent { mesh, times, t_min, t_max, count, out } => {
            cmd_heat(&mesh, times, t_min, t_max, count, &out)
        }
        Command::Verify { suite, domain, h, mu, samples, seed, tol, mu_grid, blowup_mu, n_max, timing, out } => {
            let cfg = SuiteConfig { h, tol, seed, samples, mu, mu_grid, blowup_mu, blowup_n_max: n_max };
            cmd_verify(&suite, &domain, &cfg, timing, &out)
        }
        Command::CornerCoeff { alpha, degrees, out } => {
            let a = match (alpha, degrees) {
                (Some(a), _) => a,
                (None, Some(d)) => d.to_radians(),
                (None, None) => bail!("give --alpha or --degrees"),
            };
            cmd_corner(a, &out)
        }
        Command::Oracle { which, out } => cmd_oracle(which, &out),
    }
}

fn emit(out: &OutputArgs, text: &str) -> Result<()> {
    match &out.output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
            Ok(())
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        bail!("--{name} must be positive and finite, got {v}");
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        bail!("--{name} must be finite, got {v}");
    }
    Ok(())
}

struct Setup {
    label: String,
    space: Arc<FemSpace<f64>>,
    metrics: DomainMetrics<f64>,
}

/// Builds the finite-element space, grading for the most negative entry of
/// `mus` unless a width is given.
fn setup(mesh: &MeshArgs, mus: &[f64], grade: bool) -> Result<Setup> {
    check_positive("h", mesh.h)?;
    if let Some(w) = mesh.boundary_layer {
        if !(w >= 0.0) || !w.is_finite() {
            bail!("--boundary-layer must be non-negative, got {w}");
        }
    }
    match parse_domain(&mesh.domain)? {
        DomainSpec::Analytic(d) => {
            let metrics = d.metrics()?;
            let worst = mus.iter().fold(0.0f64, |a, &m| a.min(m));
            let w = match mesh.boundary_layer {
                Some(w) => w,
                None if grade => boundary_layer_width(metrics.perimeter, worst),
                None => 0.0,
            };
            let space = assemble(generate_mesh(&d, mesh.h, w)?)?;
            Ok(Setup { label: mesh.domain.clone(), space: Arc::new(space), metrics })
        }
        DomainSpec::MeshFile(p) => {
            let m = DomainSpec::read_mesh(&p)?;
            let metrics = m.polygon_metrics(CORNER_TOL);
            Ok(Setup { label: mesh.domain.clone(), space: Arc::new(assemble(m)?), metrics })
        }
    }
}

fn prediction(metrics: &DomainMetrics<f64>) -> Option<AsymptoticPrediction<f64>> {
    predict_from_metrics(metrics).ok()
}

fn key_values(rows: &[(&str, Cell)], format: Format) -> String {
    match format {
        Format::Table => {
            let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            rows.iter()
                .map(|(k, v)| {
                    let v = match v {
                        Cell::Num(x) => crate::output::sig6(*x),
                        Cell::Int(i) => i.to_string(),
                        Cell::Text(t) => t.clone(),
                        Cell::Empty => "-".into(),
                    };
                    format!("{k:<w$}  {v}\n")
                })
                .collect()
        }
        _ => {
            let mut t = Table::new(&rows.iter().map(|(k, _)| *k).collect::<Vec<_>>());
            t.rows.push(rows.iter().map(|(_, v)| v.clone()).collect());
            match format {
                Format::Csv => t.csv(),
                _ => {
                    // one object rather than a one-element array
                    let s = t.json();
                    let v: serde_json::Value = serde_json::from_str(&s).expect("valid json");
                    to_json(&v[0])
                }
            }
        }
    }
}

fn cmd_optimize(
    mesh: &MeshArgs,
    mu: f64,
    tol: Option<f64>,
    sigma_profile: Option<std::path::PathBuf>,
    out: &OutputArgs,
) -> Result<u8> {
    check_finite("mu", mu)?;
    if let Some(t) = tol {
        check_positive("tol", t)?;
    }
    let st = setup(mesh, &[mu], true)?;
    let sp = &st.space;
    let tol = tol.unwrap_or_else(|| default_tol(mu));
    let r = optimize(sp, mu, tol)?;
    let pred = prediction(&st.metrics).filter(|_| mu < 0.0);
    let gap = if r.s_mu != 0.0 { (r.independent_lambda - r.s_mu).abs() / r.s_mu.abs() } else { r.independent_lambda.abs() };
    let rows = vec![
        ("domain", Cell::Text(st.label.clone())),
        ("nodes", Cell::Int(sp.node_count() as i64)),
        ("h_boundary", Cell::Num(sp.mesh().h_boundary())),
        ("mu", Cell::Num(mu)),
        ("lambda_mu", Cell::Num(r.s_mu)),
        ("f_residual", Cell::Num(r.f_residual)),
        ("sigma_integral_error", Cell::Num(r.sigma_integral_error)),
        ("independent_lambda", Cell::Num(r.independent_lambda)),
        ("relative_eigen_gap", Cell::Num(gap)),
        ("eigen_residual", Cell::Num(r.eigen_residual)),
        ("sigma_min", Cell::Num(r.sigma_mu.min())),
        ("sigma_max", Cell::Num(r.sigma_mu.max())),
        ("sigma_spread", Cell::Num(r.sigma_mu.spread())),
        ("predicted_two_term", pred.map(|p| Cell::Num(p.evaluate(mu))).unwrap_or(Cell::Empty)),
        ("root_iterations", Cell::Int(r.iterations as i64)),
        ("tol", Cell::Num(tol)),
        ("boundary_layer_resolved", Cell::Text(r.boundary_layer_resolved.to_string())),
        ("consistent", Cell::Text(r.consistent.to_string())),
    ];
    emit(out, &key_values(&rows, out.format.unwrap_or(Format::Table)))?;
    if let Some(path) = sigma_profile {
        let mut t = Table::new(&["loop", "node", "arc_length", "x", "y", "sigma"]);
        let values: HashMap<usize, f64> = r.sigma_mu.nodes().iter().copied().zip(r.sigma_mu.values().iter().copied()).collect();
        let m = sp.mesh();
        for (li, lp) in m.boundary_loops().iter().enumerate() {
            let mut arc = 0.0;
            for (k, &node) in lp.iter().enumerate() {
                if k > 0 {
                    let (a, b) = (m.nodes()[lp[k - 1]], m.nodes()[node]);
                    arc += (a[0] - b[0]).hypot(a[1] - b[1]);
                }
                let p = m.nodes()[node];
                t.rows.push(vec![
                    Cell::Int(li as i64),
                    Cell::Int(node as i64),
                    Cell::Num(arc),
                    Cell::Num(p[0]),
                    Cell::Num(p[1]),
                    Cell::Num(values[&node]),
                ]);
            }
        }
        std::fs::write(&path, t.csv()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(if r.consistent { EXIT_OK } else { EXIT_INCONSISTENT })
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    mesh: &MeshArgs,
    mu_min: f64,
    mu_max: f64,
    count: usize,
    tol: Option<f64>,
    jobs: Option<usize>,
    timing: bool,
    out: &OutputArgs,
) -> Result<u8> {
    check_finite("mu-min", mu_min)?;
    check_finite("mu-max", mu_max)?;
    if mu_min > mu_max {
        bail!("--mu-min ({mu_min}) must not exceed --mu-max ({mu_max})");
    }
    if count == 0 {
        bail!("--count must be at least 1");
    }
    if jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    if let Some(t) = tol {
        check_positive("tol", t)?;
    }
    let grid: Vec<f64> = if count == 1 {
        vec![mu_min]
    } else {
        (0..count).map(|k| mu_min + (mu_max - mu_min) * k as f64 / (count - 1) as f64).collect()
    };
    let st = setup(mesh, &grid, true)?;
    let pred = prediction(&st.metrics);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let sp = st.space.clone();
    let results: Vec<(f64, robinopt::Result<(robinopt::OptimizeResult, f64)>)> = pool.install(|| {
        grid.par_iter()
            .map(|&mu| {
                let t0 = Instant::now();
                let r = optimize(&sp, mu, tol.unwrap_or_else(|| default_tol(mu)));
                (mu, r.map(|r| (r, t0.elapsed().as_secs_f64())))
            })
            .collect()
    });
    let mut t = Table::new(&[
        "mu",
        "s_mu",
        "predicted_two_term",
        "remainder",
        "sigma_spread",
        "independent_lambda",
        "wall_seconds",
    ]);
    let mut skipped = 0;
    let mut inconsistent = 0;
    for (mu, r) in results {
        match r {
            Ok((r, secs)) => {
                if !r.consistent {
                    inconsistent += 1;
                }
                let p = pred.as_ref().filter(|_| mu < 0.0).map(|p| p.evaluate(mu));
                t.rows.push(vec![
                    Cell::Num(mu),
                    Cell::Num(r.s_mu),
                    p.map(Cell::Num).unwrap_or(Cell::Empty),
                    p.map(|p| Cell::Num(r.s_mu - p)).unwrap_or(Cell::Empty),
                    Cell::Num(r.sigma_mu.spread()),
                    Cell::Num(r.independent_lambda),
                    if timing { Cell::Num(secs) } else { Cell::Empty },
                ]);
            }
            Err(e @ (Error::ResolutionCap { .. } | Error::Range(_) | Error::SpectralRange { .. })) => {
                log::warn!("skipping mu = {mu}: {e}");
                eprintln!("warning: skipping mu = {mu}: {e}");
                skipped += 1;
            }
            Err(e) => return Err(e).with_context(|| format!("sweep point mu = {mu}")),
        }
    }
    if t.rows.is_empty() {
        bail!("no admissible mu in [{mu_min}, {mu_max}] on this mesh; refine --h");
    }
    let text = match out.format.unwrap_or(Format::Csv) {
        Format::Csv => t.csv(),
        Format::Json => t.json(),
        Format::Table => t.text(),
    };
    emit(out, &text)?;
    Ok(if skipped > 0 {
        EXIT_PARTIAL
    } else if inconsistent > 0 {
        EXIT_INCONSISTENT
    } else {
        EXIT_OK
    })
}

fn cmd_heat(
    mesh: &MeshArgs,
    times: Vec<f64>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    count: usize,
    out: &OutputArgs,
) -> Result<u8> {
    let times = if !times.is_empty() {
        times
    } else {
        let (Some(a), Some(b)) = (t_min, t_max) else {
            bail!("give --times or both --t-min and --t-max");
        };
        check_positive("t-min", a)?;
        check_positive("t-max", b)?;
        if a >= b || count < 2 {
            bail!("need t-min < t-max and --count >= 2");
        }
        (0..count).map(|k| a * (b / a).powf(k as f64 / (count - 1) as f64)).collect()
    };
    let st = setup(mesh, &[], false)?;
    let curve = heat_content(&st.space, &times)?;
    let mut t = Table::new(&["t", "q"]);
    for (ti, q) in curve.times.iter().zip(&curve.values) {
        t.rows.push(vec![Cell::Num(*ti), Cell::Num(*q)]);
    }
    let text = match out.format.unwrap_or(Format::Csv) {
        Format::Csv => t.csv(),
        Format::Json => to_json(&serde_json::json!({
            "domain": st.label,
            "area": st.space.area(),
            "scheme": curve.scheme,
            "steps": curve.steps,
            "times": curve.times,
            "values": curve.values,
        })),
        Format::Table => t.text(),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_verify(suite: &str, domain: &str, cfg: &SuiteConfig, timing: bool, out: &OutputArgs) -> Result<u8> {
    check_positive("h", cfg.h)?;
    check_finite("mu", cfg.mu)?;
    if let Some(t) = cfg.tol {
        check_positive("tol", t)?;
    }
    let t0 = Instant::now();
    let mut report = match parse_domain(domain)? {
        DomainSpec::Analytic(d) => run_suite(suite, &d, cfg)?,
        DomainSpec::MeshFile(p) if suite == "optimality" => {
            let space = assemble(DomainSpec::read_mesh(&p)?)?;
            run_optimality_suite(&space, cfg.mu, cfg.samples, cfg.seed, cfg.tol)?
        }
        DomainSpec::MeshFile(_) => bail!("suite '{suite}' needs an analytic domain; mesh files support 'optimality' only"),
    };
    if timing {
        report.runtime_s = Some(t0.elapsed().as_secs_f64());
    }
    let text = match out.format.unwrap_or(Format::Table) {
        Format::Json => to_json(&report),
        Format::Table => report.to_table(),
        Format::Csv => {
            let mut t = Table::new(&["description", "measured", "expected", "tolerance", "pass"]);
            for c in &report.cases {
                t.rows.push(vec![
                    Cell::Text(c.description.clone()),
                    Cell::Num(c.measured),
                    Cell::Num(c.expected),
                    Cell::Num(c.tolerance),
                    Cell::Text(c.pass.to_string()),
                ]);
            }
            t.csv()
        }
    };
    emit(out, &text)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_INCONSISTENT })
}

fn cmd_corner(alpha: f64, out: &OutputArgs) -> Result<u8> {
    check_finite("alpha", alpha)?;
    if alpha < MIN_CORNER_ANGLE || alpha >= 2.0 * std::f64::consts::PI {
        bail!("corner angle must lie in [{MIN_CORNER_ANGLE}, 2 pi) radians, got {alpha}");
    }
    let c = corner_coefficient(alpha)?;
    let rows = vec![("alpha", Cell::Num(alpha)), ("degrees", Cell::Num(alpha.to_degrees())), ("c", Cell::Num(c))];
    emit(out, &key_values(&rows, out.format.unwrap_or(Format::Table)))?;
    Ok(EXIT_OK)
}

fn cmd_oracle(which: OracleCommand, out: &OutputArgs) -> Result<u8> {
    let rows = match which {
        OracleCommand::DiskF { radius, s } => {
            if s > 0.0 {
                // the positive branch is defined below the first Dirichlet eigenvalue
                check_finite("s", s)?;
            }
            vec![("radius", Cell::Num(radius)), ("s", Cell::Num(s)), ("f", Cell::Num(disk_f(radius, s)?))]
        }
        OracleCommand::DiskLambda { radius, mu } => {
            check_finite("mu", mu)?;
            vec![("radius", Cell::Num(radius)), ("mu", Cell::Num(mu)), ("lambda_mu", Cell::Num(disk_s_of_mu(radius, mu)?))]
        }
        OracleCommand::DiskRobin { radius, sigma } => vec![
            ("radius", Cell::Num(radius)),
            ("sigma", Cell::Num(sigma)),
            ("lambda", Cell::Num(disk_robin_lambda(radius, sigma)?)),
        ],
        OracleCommand::BallF { dim, radius, s } => vec![
            ("dim", Cell::Int(dim as i64)),
            ("radius", Cell::Num(radius)),
            ("s", Cell::Num(s)),
            ("f", Cell::Num(ball_f(dim, radius, s)?)),
        ],
        OracleCommand::Predict { domain } => {
            let metrics = match parse_domain(&domain)? {
                DomainSpec::Analytic(d) => d.metrics()?,
                DomainSpec::MeshFile(p) => DomainSpec::read_mesh(&p)?.polygon_metrics(CORNER_TOL),
            };
            let p = predict_from_metrics(&metrics)?;
            vec![
                ("domain", Cell::Text(domain)),
                ("regime", Cell::Text(format!("{:?}", p.regime))),
                ("leading", Cell::Num(p.leading)),
                ("subleading", Cell::Num(p.subleading)),
                ("remainder_order", Cell::Text(p.remainder_order.clone())),
            ]
        }
    };
    emit(out, &key_values(&rows, out.format.unwrap_or(Format::Table)))?;
    Ok(EXIT_OK)
}

