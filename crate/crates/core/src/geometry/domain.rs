use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Planar domain from the built-in catalogue.
///
/// Lengths are dimensionless. Polygonal kinds are stored implicitly and
/// expanded to a counterclockwise vertex list by [`Domain::polygon_vertices`].
#[derive(Clone, Debug, PartialEq)]
pub enum Domain<T> {
    Disk { radius: T },
    Annulus { outer: T, inner: T },
    /// Axis-aligned `[0, width] x [0, height]`.
    Rectangle { width: T, height: T },
    /// Centered at the origin, first vertex at angle `pi / sides`.
    RegularPolygon { sides: usize, circumradius: T },
    /// `[0, 2a]^2` with the square `[a, 2a]^2` removed.
    LShape { arm: T },
    /// Simple polygon given counterclockwise.
    Polygon { vertices: Vec<[T; 2]> },
}

/// Exact geometric invariants of a [`Domain`].
#[derive(Clone, Debug, PartialEq)]
pub struct DomainMetrics<T> {
    /// `|Omega|`.
    pub volume: T,
    /// `|dOmega|`.
    pub perimeter: T,
    /// Signed boundary integral of the curvature, taken with respect to the
    /// outward normal. Straight edges contribute zero.
    pub curvature_integral: T,
    /// Interior angles at the vertices, empty for smooth domains.
    pub corner_angles: Vec<T>,
}

impl<T: Real> DomainMetrics<T> {
    pub fn is_smooth(&self) -> bool {
        self.corner_angles.is_empty()
    }
}

impl<T: Real> Domain<T> {
    pub fn disk(radius: T) -> Self {
        Domain::Disk { radius }
    }

    pub fn unit_square() -> Self {
        Domain::Rectangle {
            width: T::one(),
            height: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| -> Result<()> {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(Error::Geometry(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            Domain::Disk { radius } => positive("disk radius", *radius),
            Domain::Annulus { outer, inner } => {
                positive("annulus outer radius", *outer)?;
                positive("annulus inner radius", *inner)?;
                if inner >= outer {
                    return Err(Error::Geometry(format!(
                        "annulus requires inner < outer, got inner = {inner}, outer = {outer}"
                    )));
                }
                Ok(())
            }
            Domain::Rectangle { width, height } => {
                positive("rectangle width", *width)?;
                positive("rectangle height", *height)
            }
            Domain::RegularPolygon { sides, circumradius } => {
                if *sides < 3 {
                    return Err(Error::Geometry(format!(
                        "regular polygon needs at least 3 sides, got {sides}"
                    )));
                }
                positive("polygon circumradius", *circumradius)
            }
            Domain::LShape { arm } => positive("L-shape arm length", *arm),
            Domain::Polygon { vertices } => validate_simple_polygon(vertices),
        }
    }

    /// Counterclockwise vertex list for polygonal kinds, `None` for curved ones.
    pub fn polygon_vertices(&self) -> Option<Vec<[T; 2]>> {
        let z = T::zero();
        match self {
            Domain::Disk { .. } | Domain::Annulus { .. } => None,
            Domain::Rectangle { width, height } => {
                Some(vec![[z, z], [*width, z], [*width, *height], [z, *height]])
            }
            Domain::RegularPolygon { sides, circumradius } => {
                let n = T::from_usize_lossy(*sides);
                let offset = T::PI() / n;
                Some(
                    (0..*sides)
                        .map(|k| {
                            let a = offset + T::lit(2.0) * T::PI() * T::from_usize_lossy(k) / n;
                            [*circumradius * a.cos(), *circumradius * a.sin()]
                        })
                        .collect(),
                )
            }
            Domain::LShape { arm } => {
                let a = *arm;
                let b = a + a;
                Some(vec![[z, z], [b, z], [b, a], [a, a], [a, b], [z, b]])
            }
            Domain::Polygon { vertices } => Some(vertices.clone()),
        }
    }

    pub fn metrics(&self) -> Result<DomainMetrics<T>> {
        self.validate()?;
        let two_pi = T::lit(2.0) * T::PI();
        let m = match self {
            Domain::Disk { radius } => DomainMetrics {
                volume: T::PI() * *radius * *radius,
                perimeter: two_pi * *radius,
                curvature_integral: two_pi,
                corner_angles: Vec::new(),
            },
            Domain::Annulus { outer, inner } => DomainMetrics {
                volume: T::PI() * (*outer * *outer - *inner * *inner),
                perimeter: two_pi * (*outer + *inner),
                // +2pi from the outer circle, -2pi from the inner one.
                curvature_integral: T::zero(),
                corner_angles: Vec::new(),
            },
            _ => {
                let v = self.polygon_vertices().expect("polygonal kind");
                DomainMetrics {
                    volume: shoelace_area(&v),
                    perimeter: polygon_perimeter(&v),
                    curvature_integral: T::zero(),
                    corner_angles: interior_angles(&v),
                }
            }
        };
        Ok(m)
    }

    /// Curvature integral with every boundary circle counted positively.
    ///
    /// This is the reading under which the annulus second term comes out as
    /// `2pi + 2pi`; it differs from [`DomainMetrics::curvature_integral`]
    /// only for domains with holes.
    pub fn unsigned_curvature_integral(&self) -> Result<T> {
        let two_pi = T::lit(2.0) * T::PI();
        Ok(match self {
            Domain::Annulus { .. } => {
                self.validate()?;
                two_pi + two_pi
            }
            _ => self.metrics()?.curvature_integral,
        })
    }

    /// Largest distance between two points of the closure.
    pub fn diameter(&self) -> T {
        let two = T::lit(2.0);
        match self {
            Domain::Disk { radius } => two * *radius,
            Domain::Annulus { outer, .. } => two * *outer,
            _ => {
                let v = self.polygon_vertices().expect("polygonal kind");
                let mut d = T::zero();
                for a in &v {
                    for b in &v {
                        d = d.max(dist(*a, *b));
                    }
                }
                d
            }
        }
    }

    /// Whether `p` lies in the open domain.
    pub fn contains(&self, p: [T; 2]) -> bool {
        match self {
            Domain::Disk { radius } => p[0] * p[0] + p[1] * p[1] < *radius * *radius,
            Domain::Annulus { outer, inner } => {
                let r2 = p[0] * p[0] + p[1] * p[1];
                r2 < *outer * *outer && r2 > *inner * *inner
            }
            _ => point_in_polygon(&self.polygon_vertices().expect("polygonal kind"), p),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Domain::Disk { .. } => "disk",
            Domain::Annulus { .. } => "annulus",
            Domain::Rectangle { .. } => "rect",
            Domain::RegularPolygon { .. } => "ngon",
            Domain::LShape { .. } => "lshape",
            Domain::Polygon { .. } => "polygon",
        }
    }
}

impl<T: Real> fmt::Display for Domain<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Disk { radius } => write!(f, "disk:{radius}"),
            Domain::Annulus { outer, inner } => write!(f, "annulus:{outer},{inner}"),
            Domain::Rectangle { width, height } => write!(f, "rect:{width},{height}"),
            Domain::RegularPolygon { sides, circumradius } => {
                write!(f, "ngon:{sides},{circumradius}")
            }
            Domain::LShape { arm } => write!(f, "lshape:{arm}"),
            Domain::Polygon { vertices } => {
                write!(f, "{}:", self.kind_name())?;
                for (i, v) in vertices.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{},{}", v[0], v[1])?;
                }
                Ok(())
            }
        }
    }
}

/// Parses the domain mini-grammar: `disk:R`, `annulus:R,r`, `rect:a,b`,
/// `ngon:n,R`, `lshape[:a]`, `polygon:x,y;x,y;...`, plus the aliases `disk`
/// and `square`. (`mesh:PATH` is resolved by callers that read files.)
impl<T: Real> FromStr for Domain<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, args) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), a.trim()),
            None => (s, ""),
        };
        let nums = |a: &str| -> Result<Vec<T>> {
            if a.is_empty() {
                return Ok(Vec::new());
            }
            a.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map(T::lit)
                        .map_err(|_| Error::InvalidInput(format!("bad number {t:?} in domain {s:?}")))
                })
                .collect()
        };
        let expect = |v: Vec<T>, n: usize| -> Result<Vec<T>> {
            if v.len() == n {
                Ok(v)
            } else {
                Err(Error::InvalidInput(format!(
                    "domain {s:?} expects {n} parameter(s), got {}",
                    v.len()
                )))
            }
        };
        let d = match kind {
            "disk" if args.is_empty() => Domain::Disk { radius: T::one() },
            "disk" => Domain::Disk {
                radius: expect(nums(args)?, 1)?[0],
            },
            "annulus" => {
                let v = expect(nums(args)?, 2)?;
                Domain::Annulus {
                    outer: v[0],
                    inner: v[1],
                }
            }
            "square" if args.is_empty() => Domain::unit_square(),
            "rect" | "rectangle" => {
                let v = expect(nums(args)?, 2)?;
                Domain::Rectangle {
                    width: v[0],
                    height: v[1],
                }
            }
            "ngon" => {
                let v = expect(nums(args)?, 2)?;
                let n = v[0].to_f64_lossy();
                if n.fract() != 0.0 || n < 0.0 {
                    return Err(Error::InvalidInput(format!("ngon side count must be an integer, got {n}")));
                }
                Domain::RegularPolygon {
                    sides: n as usize,
                    circumradius: v[1],
                }
            }
            "lshape" if args.is_empty() => Domain::LShape { arm: T::one() },
            "lshape" => Domain::LShape {
                arm: expect(nums(args)?, 1)?[0],
            },
            "polygon" => {
                let vertices = args
                    .split(';')
                    .map(|p| {
                        let v = expect(nums(p)?, 2)?;
                        Ok([v[0], v[1]])
                    })
                    .collect::<Result<Vec<_>>>()?;
                Domain::Polygon { vertices }
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown domain {s:?}; expected disk:R, annulus:R,r, rect:a,b, ngon:n,R, lshape, square or polygon:..."
                )))
            }
        };
        d.validate()?;
        Ok(d)
    }
}

pub(crate) fn dist<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub(crate) fn cross<T: Real>(o: [T; 2], a: [T; 2], b: [T; 2]) -> T {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

pub fn shoelace_area<T: Real>(v: &[[T; 2]]) -> T {
    let n = v.len();
    let mut s = T::zero();
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        s += a[0] * b[1] - a[1] * b[0];
    }
    s / T::lit(2.0)
}

pub fn polygon_perimeter<T: Real>(v: &[[T; 2]]) -> T {
    let n = v.len();
    (0..n).map(|i| dist(v[i], v[(i + 1) % n])).sum()
}

/// Interior angles of a counterclockwise polygon, each in `(0, 2pi)`.
pub fn interior_angles<T: Real>(v: &[[T; 2]]) -> Vec<T> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let p = v[(i + n - 1) % n];
            let c = v[i];
            let q = v[(i + 1) % n];
            let e1 = [c[0] - p[0], c[1] - p[1]];
            let e2 = [q[0] - c[0], q[1] - c[1]];
            let turn = (e1[0] * e2[1] - e1[1] * e2[0]).atan2(e1[0] * e2[0] + e1[1] * e2[1]);
            T::PI() - turn
        })
        .collect()
}

fn segments_intersect<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2], d: [T; 2]) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > T::zero()) != (d2 > T::zero()))
        && ((d3 > T::zero()) != (d4 > T::zero()))
        && d1 != T::zero()
        && d2 != T::zero()
        && d3 != T::zero()
        && d4 != T::zero()
}

fn validate_simple_polygon<T: Real>(v: &[[T; 2]]) -> Result<()> {
    let n = v.len();
    if n < 3 {
        return Err(Error::Geometry(format!("polygon needs at least 3 vertices, got {n}")));
    }
    if v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::Geometry("polygon vertex is not finite".into()));
    }
    for i in 0..n {
        if dist(v[i], v[(i + 1) % n]) <= T::zero() {
            return Err(Error::Geometry(format!("polygon has a repeated vertex at index {i}")));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            // adjacent edges share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::Geometry(format!("polygon edges {i} and {j} intersect")));
            }
        }
    }
    if shoelace_area(v) <= T::zero() {
        return Err(Error::Geometry(
            "polygon must be given counterclockwise (positive signed area)".into(),
        ));
    }
    Ok(())
}

pub(crate) fn point_in_polygon<T: Real>(v: &[[T; 2]], p: [T; 2]) -> bool {
    let n = v.len();
    let mut inside = false;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_metrics() {
        let m = Domain::disk(1.0).metrics().unwrap();
        assert_eq!(m.volume, PI);
        assert_eq!(m.perimeter, 2.0 * PI);
        assert_eq!(m.curvature_integral, 2.0 * PI);
        assert!(m.corner_angles.is_empty());
    }

    #[test]
    fn unit_square_metrics() {
        let m = Domain::<f64>::unit_square().metrics().unwrap();
        assert_eq!(m.volume, 1.0);
        assert_eq!(m.perimeter, 4.0);
        assert_eq!(m.curvature_integral, 0.0);
        assert_eq!(m.corner_angles.len(), 4);
        for a in &m.corner_angles {
            assert!((a - PI / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn annulus_metrics_per_circle() {
        let d = Domain::Annulus { outer: 2.0, inner: 1.0 };
        let m = d.metrics().unwrap();
        assert!((m.volume - 3.0 * PI).abs() < 1e-14);
        assert!((m.perimeter - 6.0 * PI).abs() < 1e-14);
        // oracle: each circle contributes 2*pi*radius * (1/radius) = 2*pi in
        // magnitude; the inner circle is concave seen from the domain.
        let outer = 2.0 * PI * 2.0 * (1.0 / 2.0);
        let inner = 2.0 * PI * 1.0 * (1.0 / 1.0);
        assert!((m.curvature_integral - (outer - inner)).abs() < 1e-14);
        assert!((d.unsigned_curvature_integral().unwrap() - (outer + inner)).abs() < 1e-14);
    }

    #[test]
    fn lshape_angles() {
        let m = Domain::LShape { arm: 1.0 }.metrics().unwrap();
        assert_eq!(m.volume, 3.0);
        assert_eq!(m.perimeter, 8.0);
        let reflex = m.corner_angles.iter().filter(|a| **a > PI).count();
        assert_eq!(reflex, 1);
        // exterior angles of a simple polygon sum to 2*pi
        let ext: f64 = m.corner_angles.iter().map(|a| PI - a).sum();
        assert!((ext - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn convex_polygon_angles_sum() {
        for n in 3..12 {
            let m = Domain::RegularPolygon { sides: n, circumradius: 1.3 }
                .metrics()
                .unwrap();
            let ext: f64 = m.corner_angles.iter().map(|a| PI - a).sum();
            assert!((ext - 2.0 * PI).abs() < 1e-12);
            assert!(m.corner_angles.iter().all(|a| *a > 0.0 && *a < PI));
        }
    }

    #[test]
    fn square_as_ngon_matches_shoelace() {
        let d = Domain::RegularPolygon { sides: 4, circumradius: 0.5f64.sqrt() };
        let v = d.polygon_vertices().unwrap();
        // independent shoelace over explicit corners of [-1/2, 1/2]^2
        let corners = [[0.5, 0.5], [-0.5, 0.5], [-0.5, -0.5], [0.5, -0.5]];
        for (a, b) in v.iter().zip(corners.iter()) {
            assert!(dist(*a, *b) < 1e-15);
        }
        assert!((d.metrics().unwrap().volume - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        assert!(Domain::Annulus { outer: 1.0, inner: 1.0 }.metrics().is_err());
        assert!(Domain::Rectangle { width: 0.0, height: 1.0 }.metrics().is_err());
        assert!(Domain::RegularPolygon { sides: 2, circumradius: 1.0 }.metrics().is_err());
        let bowtie = Domain::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert!(bowtie.validate().is_err());
        let clockwise = Domain::Polygon {
            vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]],
        };
        assert!(clockwise.validate().is_err());
    }

    #[test]
    fn metrics_are_bit_identical() {
        let d: Domain<f64> = "ngon:7,1.1".parse().unwrap();
        assert_eq!(d.metrics().unwrap(), d.metrics().unwrap());
    }

    #[test]
    fn parse_grammar() {
        assert_eq!("disk:2".parse::<Domain<f64>>().unwrap(), Domain::disk(2.0));
        assert_eq!("square".parse::<Domain<f64>>().unwrap(), Domain::unit_square());
        assert_eq!(
            "annulus:2,1".parse::<Domain<f64>>().unwrap(),
            Domain::Annulus { outer: 2.0, inner: 1.0 }
        );
        assert_eq!("lshape".parse::<Domain<f64>>().unwrap(), Domain::LShape { arm: 1.0 });
        assert!("blob:3".parse::<Domain<f64>>().is_err());
        assert!("rect:1".parse::<Domain<f64>>().is_err());
        let p: Domain<f64> = "polygon:0,0;2,0;0,1".parse().unwrap();
        assert_eq!(p.metrics().unwrap().volume, 1.0);
    }

    #[test]
    fn containment() {
        let d = Domain::LShape { arm: 1.0 };
        assert!(d.contains([0.5, 1.5]));
        assert!(!d.contains([1.5, 1.5]));
        assert!(Domain::Annulus { outer: 2.0, inner: 1.0 }.contains([1.5, 0.0]));
        assert!(!Domain::Annulus { outer: 2.0, inner: 1.0 }.contains([0.5, 0.0]));
    }
}
