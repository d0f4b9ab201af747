use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::geometry::domain::{cross, dist, interior_angles, polygon_perimeter, shoelace_area};
use crate::geometry::DomainMetrics;
use crate::scalar::Real;

/// Process-unique identity of a mesh, used to catch mixing fields from
/// different meshes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MeshId(u64);

impl MeshId {
    fn fresh() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        MeshId(NEXT.fetch_add(1, Ordering::Relaxed))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge<T> {
    /// Oriented so the domain lies to the left.
    pub nodes: [usize; 2],
    pub length: T,
}

/// P1 triangulation with tagged boundary.
#[derive(Clone, Debug)]
pub struct Mesh<T> {
    id: MeshId,
    nodes: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge<T>>,
    boundary_nodes: Vec<usize>,
    is_boundary: Vec<bool>,
    h_interior: T,
    h_boundary: T,
}

impl<T: Real> Mesh<T> {
    /// Builds a mesh from nodes and counterclockwise triangles; boundary edges
    /// are the edges owned by exactly one triangle.
    pub fn from_triangles(nodes: Vec<[T; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *owner.entry(key).or_insert(0) += 1;
                if owner[&key] > 2 {
                    return Err(Error::Geometry(format!(
                        "edge ({a}, {b}) of triangle {ti} is shared by more than two triangles"
                    )));
                }
            }
        }
        let mut edges = Vec::new();
        for t in &triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if owner[&(a.min(b), a.max(b))] == 1 {
                    edges.push([a, b]);
                }
            }
        }
        Self::new(nodes, triangles, edges)
    }

    /// Builds and validates a mesh with explicit boundary edges.
    pub fn new(
        nodes: Vec<[T; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<[usize; 2]>,
    ) -> Result<Self> {
        let n = nodes.len();
        if triangles.is_empty() {
            return Err(Error::Geometry("mesh has no triangles".into()));
        }
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n) {
                return Err(Error::Geometry(format!("triangle {i} references a missing node")));
            }
            let area = cross(nodes[t[0]], nodes[t[1]], nodes[t[2]]) / T::lit(2.0);
            if !(area > T::zero()) {
                return Err(Error::DegenerateTriangle {
                    index: i,
                    area: area.to_f64_lossy(),
                });
            }
        }
        // boundary edge -> owning triangle
        let mut edge_tri: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edge_tri.entry((a.min(b), a.max(b))).or_default().push(ti);
            }
        }
        let mut is_boundary = vec![false; n];
        let mut degree = vec![0usize; n];
        let mut h_boundary = T::zero();
        let mut edges = Vec::with_capacity(boundary_edges.len());
        for (ei, e) in boundary_edges.iter().enumerate() {
            let [a, b] = *e;
            if a >= n || b >= n || a == b {
                return Err(Error::Geometry(format!("boundary edge {ei} is invalid")));
            }
            let owners = edge_tri.get(&(a.min(b), a.max(b))).map(|v| v.as_slice()).unwrap_or(&[]);
            if owners.len() != 1 {
                return Err(Error::Geometry(format!(
                    "boundary edge {ei} ({a}, {b}) belongs to {} triangles, expected exactly one",
                    owners.len()
                )));
            }
            let t = triangles[owners[0]];
            let length = dist(nodes[a], nodes[b]);
            let height = T::lit(2.0) * (cross(nodes[t[0]], nodes[t[1]], nodes[t[2]]) / T::lit(2.0)) / length;
            h_boundary = h_boundary.max(height);
            // orient with the owning triangle (domain on the left)
            let oriented = (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b);
            let nodes_ab = if oriented { [a, b] } else { [b, a] };
            edges.push(BoundaryEdge { nodes: nodes_ab, length });
            is_boundary[a] = true;
            is_boundary[b] = true;
            degree[a] += 1;
            degree[b] += 1;
        }
        if edges.is_empty() {
            return Err(Error::Geometry("mesh has no boundary edges".into()));
        }
        if let Some(v) = (0..n).find(|&v| is_boundary[v] && degree[v] != 2) {
            return Err(Error::Geometry(format!(
                "boundary does not form closed loops: node {v} has {} boundary edges",
                degree[v]
            )));
        }
        // every edge with a single owner must be tagged
        let tagged = edges.len();
        let open = edge_tri.values().filter(|v| v.len() == 1).count();
        if open != tagged {
            return Err(Error::Geometry(format!(
                "{open} edges have a single triangle but {tagged} boundary edges were given"
            )));
        }
        let mut h_interior = T::zero();
        for t in &triangles {
            for k in 0..3 {
                h_interior = h_interior.max(dist(nodes[t[k]], nodes[t[(k + 1) % 3]]));
            }
        }
        let boundary_nodes = (0..n).filter(|&v| is_boundary[v]).collect();
        Ok(Mesh {
            id: MeshId::fresh(),
            nodes,
            triangles,
            boundary_edges: edges,
            boundary_nodes,
            is_boundary,
            h_interior,
            h_boundary,
        })
    }

    pub fn id(&self) -> MeshId {
        self.id
    }

    pub fn nodes(&self) -> &[[T; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge<T>] {
        &self.boundary_edges
    }

    /// Sorted indices of the boundary nodes.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.is_boundary[node]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Longest edge in the mesh.
    pub fn h_interior(&self) -> T {
        self.h_interior
    }

    /// Largest height of a boundary triangle measured from its boundary edge,
    /// i.e. the element size normal to the boundary.
    pub fn h_boundary(&self) -> T {
        self.h_boundary
    }

    pub fn triangle_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        cross(self.nodes[a], self.nodes[b], self.nodes[c]) / T::lit(2.0)
    }

    pub fn area(&self) -> T {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn perimeter(&self) -> T {
        self.boundary_edges.iter().map(|e| e.length).sum()
    }

    /// Lumped (trapezoidal) boundary weight of every node; zero off the boundary.
    pub fn boundary_weights(&self) -> Vec<T> {
        let mut w = vec![T::zero(); self.nodes.len()];
        let half = T::lit(0.5);
        for e in &self.boundary_edges {
            w[e.nodes[0]] += half * e.length;
            w[e.nodes[1]] += half * e.length;
        }
        w
    }

    /// Boundary loops as ordered node lists, each traversed with the domain on
    /// the left. The first loop starts at the lowest boundary node index.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        let mut next = HashMap::new();
        for e in &self.boundary_edges {
            next.insert(e.nodes[0], e.nodes[1]);
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut loops = Vec::new();
        for &start in &self.boundary_nodes {
            if seen[start] {
                continue;
            }
            let mut lp = vec![start];
            seen[start] = true;
            let mut cur = next[&start];
            while cur != start {
                seen[cur] = true;
                lp.push(cur);
                cur = next[&cur];
            }
            loops.push(lp);
        }
        loops
    }

    /// Polygonal metrics of the discrete boundary. Vertices where the boundary
    /// turns by more than `corner_tol` radians count as corners; smaller turns
    /// are accumulated into the curvature integral.
    pub fn polygon_metrics(&self, corner_tol: T) -> DomainMetrics<T> {
        let mut corner_angles = Vec::new();
        let mut curvature = T::zero();
        for lp in self.boundary_loops() {
            let pts: Vec<[T; 2]> = lp.iter().map(|&i| self.nodes[i]).collect();
            for a in interior_angles(&pts) {
                let turn = T::PI() - a;
                if turn.abs() > corner_tol {
                    corner_angles.push(a);
                } else {
                    curvature += turn;
                }
            }
        }
        let loops = self.boundary_loops();
        let volume = if loops.len() == 1 {
            shoelace_area(&loops[0].iter().map(|&i| self.nodes[i]).collect::<Vec<_>>())
        } else {
            self.area()
        };
        DomainMetrics {
            volume,
            perimeter: loops
                .iter()
                .map(|lp| polygon_perimeter(&lp.iter().map(|&i| self.nodes[i]).collect::<Vec<_>>()))
                .sum(),
            curvature_integral: curvature,
            corner_angles,
        }
    }

    /// Writes the plain-text format: a header `N T B`, then `N` lines `x y`,
    /// `T` lines `i j k` and `B` lines `i j`, all indices 0-based.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{} {} {}",
            self.nodes.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        )?;
        for p in &self.nodes {
            writeln!(w, "{:e} {:e}", p[0].to_f64_lossy(), p[1].to_f64_lossy())?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        for e in &self.boundary_edges {
            writeln!(w, "{} {}", e.nodes[0], e.nodes[1])?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let mut next_fields = |what: &str, count: usize| -> Result<(usize, Vec<String>)> {
            let (ln, line) = lines.next().ok_or_else(|| Error::MeshFormat {
                line: 0,
                message: format!("unexpected end of file while reading {what}"),
            })?;
            let line = line?;
            let fields: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if fields.len() != count {
                return Err(Error::MeshFormat {
                    line: ln,
                    message: format!("{what}: expected {count} fields, found {}", fields.len()),
                });
            }
            Ok((ln, fields))
        };
        fn parse<V: std::str::FromStr>(ln: usize, s: &str) -> Result<V> {
            s.parse().map_err(|_| Error::MeshFormat {
                line: ln,
                message: format!("cannot parse {s:?}"),
            })
        }
        let (ln, head) = next_fields("header", 3)?;
        let nn: usize = parse(ln, &head[0])?;
        let nt: usize = parse(ln, &head[1])?;
        let nb: usize = parse(ln, &head[2])?;
        let mut nodes = Vec::with_capacity(nn);
        for _ in 0..nn {
            let (ln, f) = next_fields("node", 2)?;
            nodes.push([T::lit(parse(ln, &f[0])?), T::lit(parse(ln, &f[1])?)]);
        }
        let mut tris = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, f) = next_fields("triangle", 3)?;
            tris.push([parse(ln, &f[0])?, parse(ln, &f[1])?, parse(ln, &f[2])?]);
        }
        let mut edges = Vec::with_capacity(nb);
        for _ in 0..nb {
            let (ln, f) = next_fields("boundary edge", 2)?;
            edges.push([parse(ln, &f[0])?, parse(ln, &f[1])?]);
        }
        Mesh::new(nodes, tris, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> Mesh<f64> {
        Mesh::from_triangles(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn unit_square_from_two_triangles() {
        let m = two_triangles();
        assert_eq!(m.area(), 1.0);
        assert_eq!(m.perimeter(), 4.0);
        assert_eq!(m.boundary_nodes(), &[0, 1, 2, 3]);
        assert_eq!(m.boundary_loops(), vec![vec![0, 1, 2, 3]]);
        let w = m.boundary_weights();
        assert_eq!(w.iter().sum::<f64>(), 4.0);
    }

    #[test]
    fn clockwise_triangle_rejected() {
        let r = Mesh::from_triangles(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 2, 1]]);
        assert!(matches!(r, Err(Error::DegenerateTriangle { index: 0, .. })));
    }

    #[test]
    fn missing_boundary_edge_rejected() {
        let r = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![[0, 1], [1, 2]],
        );
        assert!(r.is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = two_triangles();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("4 2 4\n"));
        let back = Mesh::<f64>::read_text(&buf[..]).unwrap();
        assert_eq!(back.nodes(), m.nodes());
        assert_eq!(back.triangles(), m.triangles());
        assert_ne!(back.id(), m.id());
    }

    #[test]
    fn malformed_file_reports_line() {
        let text = "3 1 3\n0 0\n1 0\n0 1\n0 1\n";
        match Mesh::<f64>::read_text(text.as_bytes()) {
            Err(Error::MeshFormat { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn polygon_metrics_of_square_mesh() {
        let m = two_triangles().polygon_metrics(1e-6);
        assert_eq!(m.corner_angles.len(), 4);
        assert_eq!(m.volume, 1.0);
    }
}
