//! Domain strings: `disk:R`, `annulus:R,r`, `rect:a,b`, `square`,
//! `ngon:n,R`, `lshape[:a]`, `mesh:PATH`.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use robinopt::geometry::{Domain, Mesh};

#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    Analytic(Domain<f64>),
    MeshFile(PathBuf),
}

impl DomainSpec {
    pub fn read_mesh(path: &PathBuf) -> Result<Mesh<f64>> {
        let f = File::open(path).with_context(|| format!("cannot open mesh file {}", path.display()))?;
        Ok(Mesh::read_text(BufReader::new(f))?)
    }
}

fn numbers(body: &str, count: usize, kind: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = body
        .split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad number '{t}' in {kind} domain")))
        .collect::<Result<_>>()?;
    if vals.len() != count {
        bail!("{kind} domain takes {count} parameter(s), got {}", vals.len());
    }
    Ok(vals)
}

pub fn parse_domain(s: &str) -> Result<DomainSpec> {
    let (kind, body) = s.split_once(':').unwrap_or((s, ""));
    let d = match kind {
        "disk" => Domain::Disk { radius: numbers(body, 1, kind)?[0] },
        "annulus" => {
            let v = numbers(body, 2, kind)?;
            Domain::Annulus { outer: v[0], inner: v[1] }
        }
        "rect" => {
            let v = numbers(body, 2, kind)?;
            Domain::Rectangle { width: v[0], height: v[1] }
        }
        "square" if body.is_empty() => Domain::unit_square(),
        "ngon" => {
            let v = numbers(body, 2, kind)?;
            if v[0].fract() != 0.0 || v[0] < 3.0 {
                bail!("ngon needs an integer number of sides >= 3, got {}", v[0]);
            }
            Domain::RegularPolygon { sides: v[0] as usize, circumradius: v[1] }
        }
        "lshape" => Domain::LShape { arm: if body.is_empty() { 1.0 } else { numbers(body, 1, kind)?[0] } },
        "mesh" if !body.is_empty() => return Ok(DomainSpec::MeshFile(PathBuf::from(body))),
        _ => bail!(
            "unknown domain '{s}' (expected disk:R, annulus:R,r, rect:a,b, square, ngon:n,R, lshape[:a] or mesh:PATH)"
        ),
    };
    d.validate()?;
    Ok(DomainSpec::Analytic(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        assert_eq!(parse_domain("disk:1").unwrap(), DomainSpec::Analytic(Domain::disk(1.0)));
        assert_eq!(
            parse_domain("annulus:2,1").unwrap(),
            DomainSpec::Analytic(Domain::Annulus { outer: 2.0, inner: 1.0 })
        );
        assert_eq!(parse_domain("square").unwrap(), parse_domain("rect:1,1").unwrap());
        assert_eq!(parse_domain("lshape").unwrap(), DomainSpec::Analytic(Domain::LShape { arm: 1.0 }));
        assert!(matches!(parse_domain("ngon:6,1").unwrap(), DomainSpec::Analytic(Domain::RegularPolygon { sides: 6, .. })));
        assert_eq!(parse_domain("mesh:a/b.txt").unwrap(), DomainSpec::MeshFile("a/b.txt".into()));
        for bad in ["disk", "disk:x", "disk:-1", "annulus:1,2", "ngon:2.5,1", "blob:1", "mesh:", "rect:1"] {
            assert!(parse_domain(bad).is_err(), "{bad}");
        }
    }
}
