use serde::Serialize;

use super::heat::domain_label;
use super::{Case, SuiteReport};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::specfun::{integrate, Quadrature};

/// Rayleigh quotients `Q[sigma_n, u_n]` of the concentrating sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupTrace {
    pub domain: String,
    pub mu: f64,
    pub dimension: usize,
    pub ns: Vec<usize>,
    pub quotients: Vec<f64>,
    /// `int |grad u_n|^2`.
    pub gradient_terms: Vec<f64>,
    /// `int sigma_n u_n^2` over the boundary.
    pub boundary_terms: Vec<f64>,
    /// `int u_n^2`.
    pub mass_terms: Vec<f64>,
    /// Some `n` were skipped because the ball of radius `1/n` around the
    /// anchor point meets another part of the boundary.
    pub truncated: bool,
}

/// Boundary point `s0` with the local geometry needed for radial integrals.
enum Anchor {
    /// `s0` on a circle of radius `radius`, bounding the domain from outside,
    /// valid for balls of radius up to `reach`.
    Circle { radius: f64, reach: f64 },
    /// `s0` the midpoint of a straight edge, valid up to `reach`.
    Edge { reach: f64 },
}

impl Anchor {
    fn for_domain(d: &Domain<f64>) -> Result<Self> {
        match *d {
            Domain::Disk { radius } => Ok(Anchor::Circle { radius, reach: 2.0 * radius }),
            Domain::Annulus { outer, inner } => Ok(Anchor::Circle { radius: outer, reach: outer - inner }),
            _ => {
                let v = d.polygon_vertices().ok_or_else(|| Error::Unsupported("no boundary anchor".into()))?;
                let n = v.len();
                let k = (0..n)
                    .max_by(|&a, &b| seg_len(v[a], v[(a + 1) % n]).total_cmp(&seg_len(v[b], v[(b + 1) % n])))
                    .expect("polygon has edges");
                let (p, q) = (v[k], v[(k + 1) % n]);
                let mid = [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
                let mut reach = seg_len(p, q) / 2.0;
                for j in (0..n).filter(|&j| j != k) {
                    reach = reach.min(point_segment_distance(mid, v[j], v[(j + 1) % n]));
                }
                Ok(Anchor::Edge { reach })
            }
        }
    }

    fn reach(&self) -> f64 {
        match *self {
            Anchor::Circle { reach, .. } | Anchor::Edge { reach } => reach,
        }
    }

    /// Angle of the circle `|x - s0| = rho` that lies inside the domain.
    fn inside_angle(&self, rho: f64) -> f64 {
        match *self {
            Anchor::Circle { radius, .. } => 2.0 * (rho / (2.0 * radius)).min(1.0).acos(),
            Anchor::Edge { .. } => std::f64::consts::PI,
        }
    }

    /// Boundary integral of `g(|x - s0|)` over the part of the boundary
    /// within distance `rho`, and the length of that part.
    fn boundary_integral(&self, rho: f64, g: impl Fn(f64) -> f64, quad: &Quadrature<f64>) -> Result<(f64, f64)> {
        match *self {
            Anchor::Circle { radius, .. } => {
                let phi = 2.0 * (rho / (2.0 * radius)).asin();
                let v = integrate(|p: f64| g(2.0 * radius * (p / 2.0).sin()), 0.0, phi, quad)?;
                Ok((2.0 * radius * v, 2.0 * radius * phi))
            }
            Anchor::Edge { .. } => Ok((2.0 * integrate(&g, 0.0, rho, quad)?, 2.0 * rho)),
        }
    }
}

fn seg_len(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    seg_len(p, [a[0] + t * dx, a[1] + t * dy])
}

/// Evaluates `Q[sigma_n, u_n] = (int |grad u_n|^2 + int sigma_n u_n^2) / int u_n^2`
/// for `n = 4..=n_max`, where `u_n = log log(1/rho) / log log n` inside the
/// ball `rho = |x - s0| < 1/n` and `1` outside, and `sigma_n` is the
/// constant `a_n` on the boundary within distance `2^-n` of `s0`, with
/// `int sigma_n = mu`.
///
/// Radial integrals are done by adaptive quadrature; the gradient term uses
/// `t = 1 / log(1/rho)`, which turns it into `int theta(rho(t)) dt`.
pub fn run_blowup_demo(domain: &Domain<f64>, mu: f64, n_max: usize) -> Result<BlowupTrace> {
    if !(mu < 0.0) || !mu.is_finite() {
        return Err(Error::InvalidInput(format!("blow-up demo needs mu < 0, got {mu}")));
    }
    if n_max < 4 {
        return Err(Error::InvalidInput(format!("n_max must be at least 4, got {n_max}")));
    }
    if n_max > 1000 {
        return Err(Error::InvalidInput(format!("n_max above 1000 underflows the support 2^-n, got {n_max}")));
    }
    let area = domain.metrics()?.volume;
    let anchor = Anchor::for_domain(domain)?;
    let quad = Quadrature::new(1e-13, 1e-11, 4000)?;
    let mut trace = BlowupTrace {
        domain: domain_label(domain),
        mu,
        dimension: 2,
        ns: Vec::new(),
        quotients: Vec::new(),
        gradient_terms: Vec::new(),
        boundary_terms: Vec::new(),
        mass_terms: Vec::new(),
        truncated: false,
    };
    for n in 4..=n_max {
        let nf = n as f64;
        let ball = 1.0 / nf;
        if ball > anchor.reach() {
            log::warn!("skipping n = {n}: the ball of radius 1/n leaves the anchor neighbourhood");
            trace.truncated = true;
            continue;
        }
        let ll = nf.ln().ln();
        let u = |rho: f64| if rho < ball { (1.0 / rho).ln().ln() / ll } else { 1.0 };
        let grad = integrate(|t: f64| anchor.inside_angle((-1.0 / t).exp()), 0.0, 1.0 / nf.ln(), &quad)? / (ll * ll);
        let ball_area = integrate(|r: f64| anchor.inside_angle(r) * r, 0.0, ball, &quad)?;
        let ball_mass = integrate(|r: f64| u(r).powi(2) * anchor.inside_angle(r) * r, 0.0, ball, &quad)?;
        let mass = area - ball_area + ball_mass;
        let support = 0.5f64.powi(n as i32);
        let (bint, len) = anchor.boundary_integral(support, |r| u(r).powi(2), &quad)?;
        let boundary = mu / len * bint;
        trace.ns.push(n);
        trace.gradient_terms.push(grad);
        trace.boundary_terms.push(boundary);
        trace.mass_terms.push(mass);
        trace.quotients.push((grad + boundary) / mass);
    }
    Ok(trace)
}

/// Monotonicity checks on a trace: the quotient decreases from its maximum
/// on (one exceptional step tolerated), the gradient term decreases, and the
/// boundary term grows in magnitude past its smallest value.
pub fn blowup_report(trace: &BlowupTrace) -> SuiteReport {
    let q = &trace.quotients;
    let argmax = (0..q.len()).max_by(|&a, &b| q[a].total_cmp(&q[b])).unwrap_or(0);
    let rises = q[argmax..].windows(2).filter(|w| w[1] >= w[0]).count();
    let grad_rises = trace.gradient_terms.windows(2).filter(|w| w[1] >= w[0]).count();
    let mags: Vec<f64> = trace.boundary_terms.iter().map(|b| b.abs()).collect();
    let min_mag = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    let growth = mags.last().copied().unwrap_or(f64::NAN) - min_mag;
    let last = trace.ns.last().copied().unwrap_or(0);
    let cases = vec![
        Case::at_most(
            format!("non-decreasing steps of Q after its maximum, n = 4..{last}"),
            rises as f64,
            0.0,
            1.0,
        ),
        Case::absolute("non-decreasing steps of the gradient term", grad_rises as f64, 0.0, 0.0),
        Case::with_flag(
            "growth of |boundary term| past its minimum",
            growth,
            0.0,
            0.0,
            growth > 0.0,
        ),
        Case::with_flag(
            format!("final quotient Q at n = {last}"),
            q.last().copied().unwrap_or(f64::NAN),
            q.first().copied().unwrap_or(f64::NAN),
            0.0,
            q.len() > 1 && q.last() < q.first(),
        ),
    ];
    SuiteReport::new(format!("blowup:{}:mu={}", trace.domain, trace.mu), cases)
}
