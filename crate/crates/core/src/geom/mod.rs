//! Mesh and curve containers, analytic shape generators, curvature
//! estimation and stereographic projection.
//!
//! Points are stored as 4-vectors throughout. Meshes and links living in R³
//! keep the fourth coordinate at zero, which lets the chord-based routines
//! (areas, cotangent weights, segment lengths) run unchanged in both ambients.

pub mod curvature;
pub mod io;
pub mod shapes;
pub mod stereo;

use std::collections::HashMap;

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

pub use curvature::{estimate_curvatures, CurvatureField};
pub use shapes::{make_shape, Shape, ShapeKind};
pub use stereo::{stereographic, stereographic_inverse, Frame4};

pub type Point = Vector4<f64>;

/// Unit-norm tolerance for points of S³.
pub const UNIT_TOL: f64 = 1e-12;

/// Ambient space of a surface or link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambient {
    R3,
    S3,
}

impl std::str::FromStr for Ambient {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r3" => Ok(Ambient::R3),
            "s3" => Ok(Ambient::S3),
            other => Err(Error::Parameter(format!("unknown ambient '{other}'"))),
        }
    }
}

/// Triangulated closed surface in R³ or in the unit sphere S³ ⊂ R⁴.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    pub faces: Vec<[usize; 3]>,
    pub ambient: Ambient,
}

#[inline]
pub fn p3(x: f64, y: f64, z: f64) -> Point {
    Point::new(x, y, z, 0.0)
}

/// Area of the (flat) triangle spanned by three points of R⁴.
#[inline]
pub fn triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    let u = b - a;
    let v = c - a;
    let uu = u.norm_squared();
    let vv = v.norm_squared();
    let uv = u.dot(&v);
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}

impl TriMesh {
    /// Builds a mesh and checks index bounds and, on S³, unit norms.
    /// Closedness is checked separately by [`TriMesh::validate_closed`].
    pub fn new(vertices: Vec<Point>, faces: Vec<[usize; 3]>, ambient: Ambient) -> Result<Self> {
        let n = vertices.len();
        for (i, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= n) {
                return Err(Error::Input(format!("face {i} references a missing vertex")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::MeshQuality(format!("face {i} repeats a vertex")));
            }
        }
        match ambient {
            Ambient::S3 => {
                for (i, v) in vertices.iter().enumerate() {
                    if (v.norm() - 1.0).abs() > 1e-9 {
                        return Err(Error::Input(format!("vertex {i} has norm {} but ambient is S3", v.norm())));
                    }
                }
            }
            Ambient::R3 => {
                if vertices.iter().any(|v| v.w != 0.0) {
                    return Err(Error::Input("R3 mesh with nonzero fourth coordinate".into()));
                }
            }
        }
        let mut mesh = Self { vertices, faces, ambient };
        if ambient == Ambient::S3 {
            mesh.project_to_sphere();
        }
        Ok(mesh)
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Renormalizes every vertex onto S³ (no-op for R³ meshes).
    pub fn project_to_sphere(&mut self) {
        if self.ambient == Ambient::S3 {
            for v in &mut self.vertices {
                *v /= v.norm();
            }
        }
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        triangle_area(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    pub fn area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).collect::<CompensatedSum>().value()
    }

    /// Barycentric dual-cell areas: one third of every incident face.
    pub fn vertex_areas(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.vertices.len()];
        for (i, f) in self.faces.iter().enumerate() {
            let a = self.face_area(i) / 3.0;
            for &v in f {
                w[v] += a;
            }
        }
        w
    }

    /// Incident faces per vertex.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut vf = vec![Vec::new(); self.vertices.len()];
        for (i, f) in self.faces.iter().enumerate() {
            for &v in f {
                vf[v].push(i);
            }
        }
        vf
    }

    /// Sorted, deduplicated one-ring neighbours per vertex.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.vertices.len()];
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                nb[a].push(b);
                nb[b].push(a);
            }
        }
        for n in &mut nb {
            n.sort_unstable();
            n.dedup();
        }
        nb
    }

    /// Undirected edges with their incident face count.
    pub fn edge_face_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut edges = HashMap::with_capacity(self.faces.len() * 3 / 2);
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    pub fn n_edges(&self) -> usize {
        self.edge_face_counts().len()
    }

    /// Checks that every edge has exactly two incident faces, traversed in
    /// opposite directions (closed, consistently oriented).
    pub fn validate_closed(&self) -> Result<()> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                *directed.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (&(a, b), &n) in &directed {
            if n != 1 {
                return Err(Error::NonManifold(format!("directed edge ({a},{b}) used {n} times")));
            }
            if !directed.contains_key(&(b, a)) {
                return Err(Error::NonManifold(format!("edge ({a},{b}) is a boundary edge")));
            }
        }
        Ok(())
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.n_edges() as i64 + self.faces.len() as i64
    }

    /// Connectivity by union-find over faces.
    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for f in &self.faces {
            for k in 1..3 {
                let (ra, rb) = (find(&mut parent, f[0]), find(&mut parent, f[k]));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        let mut used = vec![false; n];
        for f in &self.faces {
            for &v in f {
                used[v] = true;
            }
        }
        let root = find(&mut parent, self.faces.first().map_or(0, |f| f[0]));
        (0..n).filter(|&v| used[v]).all(|v| find(&mut parent, v) == root)
    }

    pub fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.edge_face_counts()
            .into_keys()
            .map(move |(a, b)| (self.vertices[a] - self.vertices[b]).norm())
            .collect::<Vec<_>>()
            .into_iter()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let (s, n) = self.edge_lengths().fold((0.0, 0usize), |(s, n), l| (s + l, n + 1));
        s / n.max(1) as f64
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edge_lengths().fold(0.0, f64::max)
    }

    pub fn bounding_diameter(&self) -> f64 {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (hi - lo).norm()
    }

    /// Applies a pointwise map to every vertex.
    pub fn map_vertices<F: Fn(&Point) -> Point>(&self, f: F) -> Self {
        let mut m = self.clone();
        for v in &mut m.vertices {
            *v = f(v);
        }
        m.project_to_sphere();
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { vertices: self.vertices.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    /// One step of 1→4 midpoint subdivision; on S³ new vertices are projected
    /// back onto the sphere.
    pub fn subdivide(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vs: &mut Vec<Point>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let mut m = 0.5 * (vs[a] + vs[b]);
                if self.ambient == Ambient::S3 {
                    m /= m.norm();
                }
                vs.push(m);
                vs.len() - 1
            })
        };
        let mut faces = Vec::with_capacity(self.faces.len() * 4);
        for &[a, b, c] in &self.faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            faces.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        Self { vertices, faces, ambient: self.ambient }
    }

    /// Subdivides until the longest edge is at most `max_edge` (or `max_steps`
    /// subdivisions have been applied).
    pub fn refine_to(&self, max_edge: f64, max_steps: usize) -> Self {
        let mut m = self.clone();
        for _ in 0..max_steps {
            if m.max_edge_length() <= max_edge {
                break;
            }
            m = m.subdivide();
        }
        m
    }
}

/// Genus of a closed connected orientable mesh from its Euler characteristic.
pub fn euler_genus(mesh: &TriMesh) -> Result<u32> {
    mesh.validate_closed()?;
    if !mesh.is_connected() {
        return Err(Error::NonManifold("mesh is not connected".into()));
    }
    let twice = 2 - mesh.euler_characteristic();
    if twice < 0 || twice % 2 != 0 {
        return Err(Error::NonManifold(format!(
            "Euler characteristic {} gives a non-integer genus",
            mesh.euler_characteristic()
        )));
    }
    Ok((twice / 2) as u32)
}

/// Pair of disjoint closed polylines. Each component is an ordered vertex
/// list; the closing segment from the last vertex back to the first is
/// implied.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyLink {
    pub gamma1: Vec<Point>,
    pub gamma2: Vec<Point>,
    /// 3 for links in R³ (fourth coordinate zero), 4 for links in R⁴.
    pub dim: usize,
}

/// Midpoints and edge vectors of a closed polyline.
pub fn segments(curve: &[Point]) -> Vec<(Point, Point)> {
    let n = curve.len();
    (0..n)
        .map(|i| {
            let a = curve[i];
            let b = curve[(i + 1) % n];
            (0.5 * (a + b), b - a)
        })
        .collect()
}

/// Minimum distance between two segments of R⁴.
pub fn segment_distance(p0: &Point, p1: &Point, q0: &Point, q1: &Point) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (mut s, mut t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            s = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
        }
    }
    ((p0 + d1 * s) - (q0 + d2 * t)).norm()
}

impl PolyLink {
    pub fn new(gamma1: Vec<Point>, gamma2: Vec<Point>, dim: usize) -> Result<Self> {
        if dim != 3 && dim != 4 {
            return Err(Error::Input(format!("link dimension must be 3 or 4, got {dim}")));
        }
        if gamma1.len() < 3 || gamma2.len() < 3 {
            return Err(Error::Input("each component needs at least 3 vertices".into()));
        }
        if dim == 3 && gamma1.iter().chain(gamma2.iter()).any(|p| p.w != 0.0) {
            return Err(Error::Input("R3 link with nonzero fourth coordinate".into()));
        }
        let link = Self { gamma1, gamma2, dim };
        if link.min_distance() <= 0.0 {
            return Err(Error::Input("link components intersect".into()));
        }
        Ok(link)
    }

    /// Minimum distance between the two polylines (segment to segment).
    pub fn min_distance(&self) -> f64 {
        let n1 = self.gamma1.len();
        let n2 = self.gamma2.len();
        let mut best = f64::INFINITY;
        for i in 0..n1 {
            let (a0, a1) = (&self.gamma1[i], &self.gamma1[(i + 1) % n1]);
            for j in 0..n2 {
                let d = segment_distance(a0, a1, &self.gamma2[j], &self.gamma2[(j + 1) % n2]);
                best = best.min(d);
            }
        }
        best
    }

    pub fn max_segment_length(&self) -> f64 {
        segments(&self.gamma1).iter().chain(segments(&self.gamma2).iter()).map(|(_, d)| d.norm()).fold(0.0, f64::max)
    }

    pub fn length(&self) -> f64 {
        segments(&self.gamma1).iter().chain(segments(&self.gamma2).iter()).map(|(_, d)| d.norm()).sum()
    }

    pub fn diameter(&self) -> f64 {
        let pts: Vec<&Point> = self.gamma1.iter().chain(self.gamma2.iter()).collect();
        let mut best: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                best = best.max((*a - *b).norm());
            }
        }
        best
    }

    pub fn map_points<F: Fn(&Point) -> Point>(&self, f: F, dim: usize) -> Self {
        Self { gamma1: self.gamma1.iter().map(&f).collect(), gamma2: self.gamma2.iter().map(&f).collect(), dim }
    }

    /// Keeps every `step`-th vertex of both components.
    pub fn decimated(&self, step: usize) -> Self {
        let pick = |c: &[Point]| c.iter().step_by(step.max(1)).copied().collect::<Vec<_>>();
        Self { gamma1: pick(&self.gamma1), gamma2: pick(&self.gamma2), dim: self.dim }
    }

    pub fn on_unit_sphere(&self, tol: f64) -> bool {
        self.gamma1.iter().chain(self.gamma2.iter()).all(|p| (p.norm() - 1.0).abs() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subdivision_keeps_topology() {
        let m = make_shape(&ShapeKind::Sphere { r: 1.0 }, 8).unwrap().into_mesh().unwrap();
        let s = m.subdivide();
        s.validate_closed().unwrap();
        assert_eq!(euler_genus(&s).unwrap(), 0);
        assert_eq!(s.faces.len(), 4 * m.faces.len());
    }

    #[test]
    fn open_mesh_is_rejected() {
        let mut m = make_shape(&ShapeKind::Sphere { r: 1.0 }, 8).unwrap().into_mesh().unwrap();
        m.faces.pop();
        assert!(matches!(m.validate_closed(), Err(Error::NonManifold(_))));
    }

    #[test]
    fn segment_distance_matches_parallel_offset() {
        let d = segment_distance(&p3(0., 0., 0.), &p3(1., 0., 0.), &p3(0.5, 2., 0.), &p3(0.5, 2., 1.));
        assert!((d - 2.0).abs() < 1e-14);
    }

    #[test]
    fn s3_mesh_requires_unit_vertices() {
        let v = vec![Point::new(2.0, 0.0, 0.0, 0.0); 3];
        assert!(TriMesh::new(v, vec![[0, 1, 2]], Ambient::S3).is_err());
    }
}
