//! Structured mesh generation for the domain catalogue.
//!
//! Disks, annuli and regular polygons are meshed by nested rings (concentric
//! circles, or homothetic copies of the polygon) stitched together; rectangles
//! and the L-shape by tensor grids. Boundary grading refines the element size
//! normal to the boundary by a factor 2 per layer.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::domain::{cross, dist, Domain};
use crate::geometry::mesh::Mesh;
use crate::scalar::Real;

/// Maximum number of geometric grading layers.
pub const MAX_LAYERS: u32 = 12;

/// Default node budget of [`generate_mesh`].
pub const DEFAULT_NODE_CAP: usize = 400_000;

#[derive(Clone, Copy, Debug)]
pub struct MeshOptions<T> {
    pub target_h: T,
    /// Width of the graded region; zero disables grading.
    pub boundary_layer_width: T,
    pub node_cap: usize,
}

impl<T: Real> MeshOptions<T> {
    pub fn uniform(target_h: T) -> Self {
        MeshOptions {
            target_h,
            boundary_layer_width: T::zero(),
            node_cap: DEFAULT_NODE_CAP,
        }
    }

    pub fn graded(target_h: T, boundary_layer_width: T) -> Self {
        MeshOptions {
            target_h,
            boundary_layer_width,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

/// Number of halvings needed so that `h / 2^L <= w / 4`.
pub fn grading_layers<T: Real>(h: T, w: T) -> u32 {
    if w <= T::zero() || h <= w / T::lit(4.0) {
        return 0;
    }
    let l = (T::lit(4.0) * h / w).log2().ceil().to_f64_lossy();
    (l.max(0.0) as u32).min(MAX_LAYERS)
}

/// Meshes `domain` with element size `target_h` and optional boundary grading.
pub fn generate_mesh<T: Real>(
    domain: &Domain<T>,
    target_h: T,
    boundary_layer_width: T,
) -> Result<Mesh<T>> {
    generate_mesh_with(
        domain,
        &MeshOptions {
            target_h,
            boundary_layer_width,
            node_cap: DEFAULT_NODE_CAP,
        },
    )
}

pub fn generate_mesh_with<T: Real>(domain: &Domain<T>, opts: &MeshOptions<T>) -> Result<Mesh<T>> {
    domain.validate()?;
    if !(opts.target_h > T::zero()) || !opts.target_h.is_finite() {
        return Err(Error::InvalidInput(format!("target_h must be positive, got {}", opts.target_h)));
    }
    if opts.boundary_layer_width < T::zero() || !opts.boundary_layer_width.is_finite() {
        return Err(Error::InvalidInput(format!(
            "boundary_layer_width must be non-negative, got {}",
            opts.boundary_layer_width
        )));
    }
    let grading = Grading::new(opts.target_h, opts.boundary_layer_width);
    if grading.layers == MAX_LAYERS
        && grading.h / T::lit(2f64.powi(MAX_LAYERS as i32)) > opts.boundary_layer_width / T::lit(4.0)
    {
        log::warn!(
            "boundary grading capped at {MAX_LAYERS} layers; h_boundary exceeds boundary_layer_width / 4"
        );
    }
    let (nodes, tris) = match domain {
        Domain::Disk { radius } => ring_mesh(&CircleRings { outer: *radius, inner: None }, &grading, opts.node_cap)?,
        Domain::Annulus { outer, inner } => ring_mesh(
            &CircleRings {
                outer: *outer,
                inner: Some(*inner),
            },
            &grading,
            opts.node_cap,
        )?,
        Domain::RegularPolygon { .. } => {
            let v = domain.polygon_vertices().expect("polygonal kind");
            ring_mesh(&PolygonRings::new(v), &grading, opts.node_cap)?
        }
        Domain::Rectangle { width, height } => {
            let xs = grading.axis(T::zero(), *width, &[T::zero(), *width], &[]);
            let ys = grading.axis(T::zero(), *height, &[T::zero(), *height], &[]);
            tensor_mesh(&xs, &ys, |_, _| true, opts.node_cap)?
        }
        Domain::LShape { arm } => {
            let a = *arm;
            let b = a + a;
            let walls = [T::zero(), a, b];
            let xs = grading.axis(T::zero(), b, &walls, &[a]);
            let ys = grading.axis(T::zero(), b, &walls, &[a]);
            tensor_mesh(&xs, &ys, |cx, cy| !(cx > a && cy > a), opts.node_cap)?
        }
        Domain::Polygon { vertices } => {
            if opts.boundary_layer_width > T::zero() {
                log::warn!("boundary grading is not available for imported polygons; meshing uniformly");
            }
            refined_polygon_mesh(vertices, opts.target_h, opts.node_cap)?
        }
    };
    Mesh::from_triangles(nodes, tris)
}

struct Grading<T> {
    h: T,
    w: T,
    layers: u32,
}

impl<T: Real> Grading<T> {
    fn new(h: T, w: T) -> Self {
        Grading {
            h,
            w,
            layers: grading_layers(h, w),
        }
    }

    /// Element size at distance `d` from the nearest wall.
    fn spacing(&self, d: T) -> T {
        if self.layers == 0 {
            return self.h;
        }
        let mut j = 0;
        let mut edge = self.w;
        while j < self.layers && d >= edge {
            j += 1;
            edge = edge + edge;
        }
        let k = self.layers - j;
        self.h / T::lit(2f64.powi(k as i32))
    }

    /// Thickness of the refined region next to a wall.
    fn extent(&self) -> T {
        if self.layers == 0 {
            T::zero()
        } else {
            self.w * T::lit(2f64.powi(self.layers as i32 - 1))
        }
    }

    /// Graded coordinates on `[lo, hi]` with refinement toward `walls`;
    /// `breaks` are forced nodes.
    fn axis(&self, lo: T, hi: T, walls: &[T], breaks: &[T]) -> Vec<T> {
        let mut cuts = vec![lo, hi];
        cuts.extend_from_slice(breaks);
        if self.layers > 0 {
            for &wall in walls {
                let mut e = self.w;
                for _ in 0..self.layers {
                    cuts.push(wall - e);
                    cuts.push(wall + e);
                    e = e + e;
                }
            }
        }
        cuts.retain(|c| *c >= lo && *c <= hi);
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cut"));
        let tiny = (hi - lo) * T::lit(1e-12);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= tiny);
        let mut out = vec![cuts[0]];
        for win in cuts.windows(2) {
            let (x0, x1) = (win[0], win[1]);
            let mid = (x0 + x1) / T::lit(2.0);
            let d = walls
                .iter()
                .map(|w| (mid - *w).abs())
                .fold(T::infinity(), |a, b| a.min(b));
            let sp = self.spacing(d);
            let n = ((x1 - x0) / sp - T::lit(1e-9)).ceil().to_f64_lossy().max(1.0) as usize;
            for i in 1..n {
                out.push(x0 + (x1 - x0) * T::from_usize_lossy(i) / T::from_usize_lossy(n));
            }
            out.push(x1);
        }
        out
    }
}

/// Family of nested closed rings; ring positions are indexed by the distance
/// `d` from the outer boundary.
trait RingFamily<T: Real> {
    /// Distance from the outer boundary to the innermost ring (or center).
    fn depth(&self) -> T;
    /// Whether the innermost position is a wall (annulus) or the center.
    fn has_inner_wall(&self) -> bool;
    /// Point counts per segment on the ring at depth `d` for element size `h`.
    fn counts(&self, d: T, h: T) -> usize;
    /// Ring points at depth `d` with `count` subdivisions, each with its
    /// parameter in `[0, 1)`.
    fn points(&self, d: T, count: usize) -> Vec<([T; 2], T)>;
}

struct CircleRings<T> {
    outer: T,
    inner: Option<T>,
}

impl<T: Real> RingFamily<T> for CircleRings<T> {
    fn depth(&self) -> T {
        self.outer - self.inner.unwrap_or(T::zero())
    }

    fn has_inner_wall(&self) -> bool {
        self.inner.is_some()
    }

    fn counts(&self, d: T, h: T) -> usize {
        let r = self.outer - d;
        let n = (T::lit(2.0) * T::PI() * r / h).ceil().to_f64_lossy() as usize;
        n.max(8)
    }

    fn points(&self, d: T, count: usize) -> Vec<([T; 2], T)> {
        let r = self.outer - d;
        (0..count)
            .map(|j| {
                let u = T::from_usize_lossy(j) / T::from_usize_lossy(count);
                let a = T::lit(2.0) * T::PI() * u;
                ([r * a.cos(), r * a.sin()], u)
            })
            .collect()
    }
}

struct PolygonRings<T> {
    vertices: Vec<[T; 2]>,
    apothem: T,
}

impl<T: Real> PolygonRings<T> {
    fn new(vertices: Vec<[T; 2]>) -> Self {
        // regular polygon centered at the origin
        let n = vertices.len();
        let mid = [
            (vertices[0][0] + vertices[1 % n][0]) / T::lit(2.0),
            (vertices[0][1] + vertices[1 % n][1]) / T::lit(2.0),
        ];
        let apothem = mid[0].hypot(mid[1]);
        PolygonRings { vertices, apothem }
    }
}

impl<T: Real> RingFamily<T> for PolygonRings<T> {
    fn depth(&self) -> T {
        self.apothem
    }

    fn has_inner_wall(&self) -> bool {
        false
    }

    fn counts(&self, d: T, h: T) -> usize {
        let t = T::one() - d / self.apothem;
        let side = dist(self.vertices[0], self.vertices[1]);
        ((t * side / h).ceil().to_f64_lossy() as usize).max(1)
    }

    fn points(&self, d: T, per_edge: usize) -> Vec<([T; 2], T)> {
        let t = if d == T::zero() {
            T::one()
        } else {
            T::one() - d / self.apothem
        };
        let n = self.vertices.len();
        let total = T::from_usize_lossy(n * per_edge);
        let mut out = Vec::with_capacity(n * per_edge);
        for k in 0..n {
            let a = self.vertices[k];
            let b = self.vertices[(k + 1) % n];
            for i in 0..per_edge {
                let f = T::from_usize_lossy(i) / T::from_usize_lossy(per_edge);
                let p = [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])];
                let u = T::from_usize_lossy(k * per_edge + i) / total;
                out.push(([t * p[0], t * p[1]], u));
            }
        }
        out
    }
}

fn ring_mesh<T: Real, F: RingFamily<T>>(
    family: &F,
    grading: &Grading<T>,
    node_cap: usize,
) -> Result<(Vec<[T; 2]>, Vec<[usize; 3]>)> {
    let depth = family.depth();
    let walls: Vec<T> = if family.has_inner_wall() {
        vec![T::zero(), depth]
    } else {
        vec![T::zero()]
    };
    let ds = grading.axis(T::zero(), depth, &walls, &[]);
    let h = grading.h;
    // rings inside this band keep the boundary count so boundary elements
    // stay aligned with the wall
    let zone = grading.extent().max(h + h);
    let outer_count = family.counts(T::zero(), h);
    let inner_count = if family.has_inner_wall() {
        family.counts(depth, h)
    } else {
        0
    };
    let mut nodes: Vec<[T; 2]> = Vec::new();
    let mut tris: Vec<[usize; 3]> = Vec::new();
    // (first node index, parameters)
    let mut prev: Option<(usize, Vec<T>)> = None;
    let mut prev_count = usize::MAX;
    for (idx, &d) in ds.iter().enumerate() {
        let is_center = !family.has_inner_wall() && idx == ds.len() - 1;
        let start = nodes.len();
        let params: Vec<T> = if is_center {
            nodes.push([T::zero(), T::zero()]);
            Vec::new()
        } else {
            let mut count = if d <= zone {
                outer_count
            } else if family.has_inner_wall() && depth - d <= zone {
                inner_count
            } else {
                family.counts(d, h)
            };
            count = count.min(prev_count);
            prev_count = count;
            let pts = family.points(d, count);
            let params = pts.iter().map(|p| p.1).collect();
            nodes.extend(pts.into_iter().map(|p| p.0));
            params
        };
        if nodes.len() > node_cap {
            return Err(Error::Resource {
                what: "mesh node count".into(),
                cap: node_cap,
            });
        }
        if let Some((pstart, pparams)) = &prev {
            if is_center {
                let no = pparams.len();
                for i in 0..no {
                    tris.push([pstart + i, pstart + (i + 1) % no, start]);
                }
            } else {
                zip_rings(*pstart, pparams, start, &params, &mut tris);
            }
        }
        prev = Some((start, params));
    }
    Ok((nodes, tris))
}

/// Stitches an outer ring to the next inner ring by advancing along whichever
/// ring has the smaller next parameter.
fn zip_rings<T: Real>(
    o_start: usize,
    o: &[T],
    i_start: usize,
    inner: &[T],
    tris: &mut Vec<[usize; 3]>,
) {
    let no = o.len();
    let ni = inner.len();
    let (mut i, mut j) = (0, 0);
    while i < no || j < ni {
        let next_o = if i + 1 < no { o[i + 1] } else { T::one() };
        let next_i = if j + 1 < ni { inner[j + 1] } else { T::one() };
        if i < no && (j == ni || next_o <= next_i) {
            tris.push([o_start + i, o_start + (i + 1) % no, i_start + j % ni]);
            i += 1;
        } else {
            tris.push([o_start + i % no, i_start + (j + 1) % ni, i_start + j]);
            j += 1;
        }
    }
}

fn tensor_mesh<T: Real>(
    xs: &[T],
    ys: &[T],
    keep: impl Fn(T, T) -> bool,
    node_cap: usize,
) -> Result<(Vec<[T; 2]>, Vec<[usize; 3]>)> {
    let nx = xs.len();
    let ny = ys.len();
    if nx * ny > node_cap {
        return Err(Error::Resource {
            what: "mesh node count".into(),
            cap: node_cap,
        });
    }
    let mut index = vec![usize::MAX; nx * ny];
    let mut nodes = Vec::new();
    let mut tris = Vec::new();
    let mut id = |i: usize, j: usize, nodes: &mut Vec<[T; 2]>| -> usize {
        let k = j * nx + i;
        if index[k] == usize::MAX {
            index[k] = nodes.len();
            nodes.push([xs[i], ys[j]]);
        }
        index[k]
    };
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let cx = (xs[i] + xs[i + 1]) / T::lit(2.0);
            let cy = (ys[j] + ys[j + 1]) / T::lit(2.0);
            if !keep(cx, cy) {
                continue;
            }
            let a = id(i, j, &mut nodes);
            let b = id(i + 1, j, &mut nodes);
            let c = id(i + 1, j + 1, &mut nodes);
            let d = id(i, j + 1, &mut nodes);
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    Ok((nodes, tris))
}

/// Ear-clipping triangulation of a simple counterclockwise polygon.
pub fn ear_clip<T: Real>(v: &[[T; 2]]) -> Result<Vec<[usize; 3]>> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut tris = Vec::with_capacity(v.len().saturating_sub(2));
    let mut guard = 0;
    while idx.len() > 3 {
        let n = idx.len();
        let mut clipped = false;
        for k in 0..n {
            let (a, b, c) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            if cross(v[a], v[b], v[c]) <= T::zero() {
                continue;
            }
            let blocked = idx.iter().any(|&p| {
                p != a
                    && p != b
                    && p != c
                    && cross(v[a], v[b], v[p]) >= T::zero()
                    && cross(v[b], v[c], v[p]) >= T::zero()
                    && cross(v[c], v[a], v[p]) >= T::zero()
            });
            if !blocked {
                tris.push([a, b, c]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        guard += 1;
        if !clipped || guard > 10 * v.len() {
            return Err(Error::Geometry("ear clipping failed; polygon is not simple".into()));
        }
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}

/// Splits every triangle into four through edge midpoints.
pub fn refine_uniform<T: Real>(
    nodes: &mut Vec<[T; 2]>,
    tris: &[[usize; 3]],
) -> Vec<[usize; 3]> {
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<[T; 2]>| -> usize {
        *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
            let p = [
                (nodes[a][0] + nodes[b][0]) / T::lit(2.0),
                (nodes[a][1] + nodes[b][1]) / T::lit(2.0),
            ];
            nodes.push(p);
            nodes.len() - 1
        })
    };
    let mut out = Vec::with_capacity(4 * tris.len());
    for &[a, b, c] in tris {
        let ab = midpoint(a, b, nodes);
        let bc = midpoint(b, c, nodes);
        let ca = midpoint(c, a, nodes);
        out.push([a, ab, ca]);
        out.push([ab, b, bc]);
        out.push([ca, bc, c]);
        out.push([ab, bc, ca]);
    }
    out
}

fn refined_polygon_mesh<T: Real>(
    v: &[[T; 2]],
    h: T,
    node_cap: usize,
) -> Result<(Vec<[T; 2]>, Vec<[usize; 3]>)> {
    let mut nodes = v.to_vec();
    let mut tris = ear_clip(v)?;
    loop {
        let longest = tris
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| dist(nodes[a], nodes[b]))
            .fold(T::zero(), |a, b| a.max(b));
        if longest <= h {
            break;
        }
        tris = refine_uniform(&mut nodes, &tris);
        if nodes.len() > node_cap {
            return Err(Error::Resource {
                what: "mesh node count".into(),
                cap: node_cap,
            });
        }
    }
    Ok((nodes, tris))
}
