//! Analytic test shapes: spheres, tori, geodesic spheres of S³, and the
//! link fixtures (Hopf link, coaxial circles, torus links).

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stereo::{unproject_with, Frame4};
use super::{p3, Ambient, Point, PolyLink, TriMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    Sphere { r: f64 },
    TubeTorus { big_r: f64, r: f64 },
    CliffordTorus,
    GeodesicSphere { center: [f64; 4], radius: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    HopfLink,
    CoaxialCircles { sep: f64 },
    TorusLink { p: u32, q: u32 },
}

#[derive(Debug, Clone)]
pub enum Shape {
    Mesh(TriMesh),
    Link(PolyLink),
}

impl Shape {
    pub fn into_mesh(self) -> Result<TriMesh> {
        match self {
            Shape::Mesh(m) => Ok(m),
            Shape::Link(_) => Err(Error::Input("expected a mesh, got a link".into())),
        }
    }

    pub fn into_link(self) -> Result<PolyLink> {
        match self {
            Shape::Link(l) => Ok(l),
            Shape::Mesh(_) => Err(Error::Input("expected a link, got a mesh".into())),
        }
    }
}

/// Minimum grid resolution accepted by the generators.
pub const MIN_RESOLUTION: usize = 8;

/// Generates a shape. For meshes `resolution` is the number of samples
/// around a great circle (spheres) or along each generating circle (tori);
/// for links it is the number of vertices per component.
pub fn make_shape(kind: &ShapeKind, resolution: usize) -> Result<Shape> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::Parameter(format!("resolution {resolution} below minimum {MIN_RESOLUTION}")));
    }
    let pos = |name: &str, x: f64| -> Result<()> {
        if x.is_finite() && x > 0.0 {
            Ok(())
        } else {
            Err(Error::Parameter(format!("{name} must be positive, got {x}")))
        }
    };
    match kind {
        ShapeKind::Sphere { r } => {
            pos("r", *r)?;
            Ok(Shape::Mesh(icosphere(*r, resolution)))
        }
        ShapeKind::Ellipsoid { a, b, c } => {
            pos("a", *a)?;
            pos("b", *b)?;
            pos("c", *c)?;
            Ok(Shape::Mesh(ellipsoid(*a, *b, *c, resolution)))
        }
        ShapeKind::TubeTorus { big_r, r } => {
            pos("r", *r)?;
            if !(r < big_r) {
                return Err(Error::Parameter(format!("tube radius {r} must be below R = {big_r}")));
            }
            Ok(Shape::Mesh(tube_torus(*big_r, *r, resolution)))
        }
        ShapeKind::CliffordTorus => Ok(Shape::Mesh(clifford_torus(resolution))),
        ShapeKind::GeodesicSphere { center, radius } => {
            if !(*radius > 0.0 && *radius < PI) {
                return Err(Error::Parameter(format!("geodesic radius {radius} not in (0, π)")));
            }
            let c = Point::from(*center);
            if c.norm() < 1e-12 {
                return Err(Error::Parameter("geodesic sphere center must be nonzero".into()));
            }
            Ok(Shape::Mesh(geodesic_sphere(&(c / c.norm()), *radius, resolution)))
        }
        ShapeKind::HopfLink => Ok(Shape::Link(hopf_link(resolution))),
        ShapeKind::CoaxialCircles { sep } => {
            pos("sep", *sep)?;
            Ok(Shape::Link(coaxial_circles(*sep, resolution)))
        }
        ShapeKind::TorusLink { p, q } => Ok(Shape::Link(torus_link(*p, *q, resolution)?)),
    }
}

/// How grid quads are split into triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadSplit {
    /// Always along the (i,j)–(i+1,j+1) diagonal.
    Fixed,
    /// Along the shorter of the two diagonals.
    Shorter,
}

/// Doubly periodic grid triangulated as a torus. Vertex `(i, j)` has index
/// `i * n2 + j`; faces are oriented along `∂i × ∂j`.
pub fn grid_torus(n1: usize, n2: usize, points: Vec<Point>, ambient: Ambient, split: QuadSplit) -> TriMesh {
    debug_assert_eq!(points.len(), n1 * n2);
    let id = |i: usize, j: usize| (i % n1) * n2 + (j % n2);
    let mut faces = Vec::with_capacity(2 * n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let main = (points[a] - points[c]).norm_squared();
            let anti = (points[b] - points[d]).norm_squared();
            if split == QuadSplit::Shorter && anti < main {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            } else {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
    }
    TriMesh { vertices: points, faces, ambient }
}

/// Cube-sphere on the unit sphere of R³ (equal-angle warp), as tangent
/// directions plus outward-oriented faces. `n` is the grid size per cube face.
fn cube_sphere(n: usize) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    let half = n as i64;
    let warp = |k: i64| ((k as f64 / half as f64) * PI / 4.0).tan();
    for axis in 0..3 {
        for sign in [-1i64, 1] {
            let mut ids = vec![0usize; (n + 1) * (n + 1)];
            for i in 0..=n {
                for j in 0..=n {
                    let u = 2 * i as i64 - half;
                    let v = 2 * j as i64 - half;
                    let mut key = [0i64; 3];
                    key[axis] = sign * half;
                    key[(axis + 1) % 3] = u;
                    key[(axis + 2) % 3] = v;
                    let id = *index.entry(key).or_insert_with(|| {
                        let mut p = Vector3::zeros();
                        for k in 0..3 {
                            p[k] = if key[k].abs() == half { key[k].signum() as f64 } else { warp(key[k]) };
                        }
                        verts.push(p / p.norm());
                        verts.len() - 1
                    });
                    ids[i * (n + 1) + j] = id;
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let a = ids[i * (n + 1) + j];
                    let b = ids[(i + 1) * (n + 1) + j];
                    let c = ids[(i + 1) * (n + 1) + j + 1];
                    let d = ids[i * (n + 1) + j + 1];
                    // alternate diagonals so every interior vertex star is centrally symmetric
                    let (t1, t2) = if (i + j) % 2 == 0 { ([a, b, c], [a, c, d]) } else { ([a, b, d], [b, c, d]) };
                    if sign > 0 {
                        faces.push(t1);
                        faces.push(t2);
                    } else {
                        faces.push([t1[0], t1[2], t1[1]]);
                        faces.push([t2[0], t2[2], t2[1]]);
                    }
                }
            }
        }
    }
    (verts, faces)
}

fn cube_face_size(resolution: usize) -> usize {
    resolution.div_ceil(4).max(2)
}

/// Round sphere of radius `r` from a subdivided icosahedron: each face is
/// split into `n²` triangles with `n = ⌈resolution / 5⌉`, so a great circle
/// carries about `resolution` edges.
pub fn icosphere(r: f64, resolution: usize) -> TriMesh {
    let n = resolution.div_ceil(5).max(1);
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let corners: Vec<Vector3<f64>> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|c| Vector3::new(c[0], c[1], c[2]))
    .collect();
    const FACES: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut verts: Vec<Vector3<f64>> = corners.iter().map(|c| c / c.norm()).collect();
    // shared points are keyed by their lattice coordinates on the icosahedron edge
    let mut edge_points: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut faces = Vec::with_capacity(20 * n * n);
    for [a, b, c] in FACES {
        let mut interior: HashMap<(usize, usize), usize> = HashMap::new();
        let mut point = |i: usize, j: usize| -> usize {
            // barycentric weights (n - i - j, i, j) on (a, b, c)
            let k = n - i - j;
            let on_edge = |p: usize, q: usize, steps: usize| -> (usize, usize, usize) {
                if p < q {
                    (p, q, steps)
                } else {
                    (q, p, n - steps)
                }
            };
            let key = match (k, i, j) {
                (_, 0, 0) => return a,
                (0, _, 0) => return b,
                (0, 0, _) => return c,
                (_, _, 0) => Some(on_edge(a, b, i)),
                (_, 0, _) => Some(on_edge(a, c, j)),
                (0, _, _) => Some(on_edge(b, c, j)),
                _ => None,
            };
            let pos = || {
                let p = corners[a] * k as f64 + corners[b] * i as f64 + corners[c] * j as f64;
                p / p.norm()
            };
            match key {
                Some(e) => *edge_points.entry(e).or_insert_with(|| {
                    verts.push(pos());
                    verts.len() - 1
                }),
                None => *interior.entry((i, j)).or_insert_with(|| {
                    verts.push(pos());
                    verts.len() - 1
                }),
            }
        };
        for i in 0..n {
            for j in 0..n - i {
                let (p, q, s) = (point(i, j), point(i + 1, j), point(i, j + 1));
                faces.push([p, q, s]);
                if i + j + 1 < n {
                    let u = point(i + 1, j + 1);
                    faces.push([q, u, s]);
                }
            }
        }
    }
    let vertices = verts.iter().map(|d| p3(r * d.x, r * d.y, r * d.z)).collect();
    TriMesh { vertices, faces, ambient: Ambient::R3 }
}

/// Axis-aligned ellipsoid with semi-axes `a, b, c` (a round sphere when equal).
pub fn ellipsoid(a: f64, b: f64, c: f64, resolution: usize) -> TriMesh {
    let (dirs, faces) = cube_sphere(cube_face_size(resolution));
    let vertices = dirs.iter().map(|d| p3(a * d.x, b * d.y, c * d.z)).collect();
    TriMesh { vertices, faces, ambient: Ambient::R3 }
}

/// Torus of revolution about the z-axis: tube radius `r`, center circle
/// radius `big_r`. Grid index `i` runs around the axis, `j` around the tube
/// (tube angle `u = 2πj/res`, with `u = 0` on the outer equator).
pub fn tube_torus(big_r: f64, r: f64, resolution: usize) -> TriMesh {
    let n = resolution;
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        let v = TAU * i as f64 / n as f64;
        for j in 0..n {
            let u = TAU * j as f64 / n as f64;
            let rho = big_r + r * u.cos();
            pts.push(p3(rho * v.cos(), rho * v.sin(), r * u.sin()));
        }
    }
    grid_torus(n, n, pts, Ambient::R3, QuadSplit::Fixed)
}

/// Clifford torus S¹(1/√2) × S¹(1/√2) ⊂ S³.
pub fn clifford_torus(resolution: usize) -> TriMesh {
    let n = resolution;
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        let a = TAU * i as f64 / n as f64;
        for j in 0..n {
            let b = TAU * j as f64 / n as f64;
            pts.push(Point::new(a.cos(), a.sin(), b.cos(), b.sin()) * FRAC_1_SQRT_2);
        }
    }
    grid_torus(n, n, pts, Ambient::S3, QuadSplit::Fixed)
}

/// Geodesic sphere of S³ with the given unit center and radius in (0, π).
pub fn geodesic_sphere(center: &Point, radius: f64, resolution: usize) -> TriMesh {
    let frame = Frame4::new(center);
    let (dirs, faces) = cube_sphere(cube_face_size(resolution));
    let (c, s) = (radius.cos(), radius.sin());
    let vertices = dirs
        .iter()
        .map(|d| {
            let x = frame.axis * c + frame.from_tangent(d) * s;
            x / x.norm()
        })
        .collect();
    TriMesh { vertices, faces, ambient: Ambient::S3 }
}

/// Inverse stereographic image (pole `(0,0,0,1)`) of an R³ ellipsoid: an
/// embedded, non-umbilic sphere in S³.
pub fn s3_ellipsoid(a: f64, b: f64, c: f64, resolution: usize) -> TriMesh {
    let frame = Frame4::new(&Point::new(0.0, 0.0, 0.0, 1.0));
    let e = ellipsoid(a, b, c, resolution);
    let vertices = e.vertices.iter().map(|y| unproject_with(&frame, y)).collect();
    TriMesh { vertices, faces: e.faces, ambient: Ambient::S3 }
}

/// Genus-two surface: two tube tori joined by a square tube.
pub fn genus_two(resolution: usize) -> TriMesh {
    let n = resolution;
    let t1 = tube_torus(2.0, 0.7, n);
    let offset = p3(6.0, 0.0, 0.0);
    let nv = t1.vertices.len();
    let mut vertices = t1.vertices.clone();
    vertices.extend(t1.vertices.iter().map(|p| p + offset));

    // Quad (i, j) of the first torus faces +x at i = 0, j = 0; on the copy the
    // quad at i = n/2 faces -x.
    let quad = |i: usize, j: usize| -> [usize; 4] {
        let id = |i: usize, j: usize| (i % n) * n + (j % n);
        [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]
    };
    let q1 = quad(0, n - 1);
    let q2 = quad(n / 2 - 1, n - 1).map(|v| v + nv);
    let drop1 = [2 * (q1[0]), 2 * q1[0] + 1];
    let drop2 = [2 * (q2[0] - nv) + t1.faces.len(), 2 * (q2[0] - nv) + 1 + t1.faces.len()];

    let mut faces: Vec<[usize; 3]> = t1.faces.clone();
    faces.extend(t1.faces.iter().map(|f| f.map(|v| v + nv)));
    let mut drop = [drop1[0], drop1[1], drop2[0], drop2[1]];
    drop.sort_unstable();
    for &d in drop.iter().rev() {
        faces.remove(d);
    }
    // hole boundaries: q1 is traversed a->b->c->d by the removed faces, so the
    // remaining surface runs it backwards; same for q2. Pair q1[k] with the
    // mirrored corner of q2.
    let ring1 = [q1[0], q1[1], q1[2], q1[3]];
    let ring2 = [q2[1], q2[0], q2[3], q2[2]];
    for k in 0..4 {
        let (a, b) = (ring1[k], ring1[(k + 1) % 4]);
        let (c, d) = (ring2[k], ring2[(k + 1) % 4]);
        faces.push([a, b, d]);
        faces.push([a, d, c]);
    }
    TriMesh { vertices, faces, ambient: Ambient::R3 }
}

/// Standard Hopf link in S³ ⊂ R⁴.
pub fn hopf_link(resolution: usize) -> PolyLink {
    let n = resolution;
    let g1 = (0..n).map(|k| {
        let s = TAU * k as f64 / n as f64;
        Point::new(s.cos(), s.sin(), 0.0, 0.0)
    });
    let g2 = (0..n).map(|k| {
        let t = TAU * k as f64 / n as f64;
        Point::new(0.0, 0.0, t.cos(), t.sin())
    });
    PolyLink { gamma1: g1.collect(), gamma2: g2.collect(), dim: 4 }
}

/// Two unit circles about the z-axis in the planes z = 0 and z = sep.
pub fn coaxial_circles(sep: f64, resolution: usize) -> PolyLink {
    let n = resolution;
    let circle = |z: f64| {
        (0..n)
            .map(|k| {
                let s = TAU * k as f64 / n as f64;
                p3(s.cos(), s.sin(), z)
            })
            .collect::<Vec<_>>()
    };
    PolyLink { gamma1: circle(0.0), gamma2: circle(sep), dim: 3 }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Two-component (p, q) torus link on the torus with radii 2 and 1: `p`
/// meridional and `q` longitudinal windings in total. Requires gcd(p, q) = 2.
pub fn torus_link(p: u32, q: u32, resolution: usize) -> Result<PolyLink> {
    if p == 0 || q == 0 || gcd(p, q) != 2 {
        return Err(Error::Parameter(format!("torus_link({p},{q}) does not have two components")));
    }
    let (pp, qq) = ((p / 2) as f64, (q / 2) as f64);
    let comp = |k: usize| {
        (0..resolution)
            .map(|m| {
                let s = TAU * m as f64 / resolution as f64;
                let alpha = pp * s + TAU * k as f64 / q as f64;
                let beta = qq * s;
                let rho = 2.0 + alpha.cos();
                p3(rho * beta.cos(), rho * beta.sin(), alpha.sin())
            })
            .collect::<Vec<_>>()
    };
    Ok(PolyLink { gamma1: comp(0), gamma2: comp(1), dim: 3 })
}

/// Smooth random vector field `x ↦ Σ_k a_k sin(ω_k · x + φ_k)` with
/// `Σ |a_k| = 1` and low frequencies, seeded.
struct SmoothField {
    terms: Vec<(Point, Point, f64)>,
}

impl SmoothField {
    /// Wavelengths down to half of `size`.
    fn new(dim: usize, size: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vec = |scale: f64| {
            let mut v = Point::zeros();
            for k in 0..dim {
                v[k] = rng.random_range(-scale..scale);
            }
            v
        };
        let terms = (0..4)
            .map(|k| {
                let amp = vec(1.0 / (k as f64 + 1.0)) / 2.0;
                let freq = vec(4.0 * PI / size);
                (amp, freq, 0.0)
            })
            .collect::<Vec<_>>();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf00d);
        let total: f64 = terms.iter().map(|(a, _, _)| a.norm()).sum();
        let terms = terms.into_iter().map(|(a, w, _)| (a / total, w, rng.random_range(0.0..TAU))).collect();
        Self { terms }
    }

    fn at(&self, x: &Point) -> Point {
        self.terms.iter().map(|(a, w, phi)| a * (w.dot(x) + phi).sin()).sum()
    }
}

/// Moves every vertex by `amplitude` times a smooth seeded vector field of
/// magnitude at most one; S³ meshes are projected back to the sphere.
pub fn perturbed_mesh(mesh: &TriMesh, amplitude: f64, seed: u64) -> TriMesh {
    let dim = if mesh.ambient == Ambient::S3 { 4 } else { 3 };
    let field = SmoothField::new(dim, mesh.bounding_diameter(), seed);
    let mut out = mesh.map_vertices(|x| x + field.at(x) * amplitude);
    if mesh.ambient == Ambient::S3 {
        out.project_to_sphere();
    }
    out
}

/// Smooth seeded perturbation of both components of a link by at most
/// `amplitude`. Links on the unit sphere are projected back onto it.
pub fn perturbed_link(link: &PolyLink, amplitude: f64, seed: u64) -> Result<PolyLink> {
    let field = SmoothField::new(link.dim, link.diameter(), seed);
    let spherical = link.dim == 4 && link.on_unit_sphere(1e-9);
    let mv = |c: &[Point]| -> Vec<Point> {
        c.iter()
            .map(|x| {
                let y = x + field.at(x) * amplitude;
                if spherical {
                    y / y.norm()
                } else {
                    y
                }
            })
            .collect()
    };
    PolyLink::new(mv(&link.gamma1), mv(&link.gamma2), link.dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::euler_genus;

    #[test]
    fn generators_are_closed() {
        for kind in [
            ShapeKind::Sphere { r: 1.0 },
            ShapeKind::TubeTorus { big_r: 2f64.sqrt(), r: 1.0 },
            ShapeKind::CliffordTorus,
            ShapeKind::GeodesicSphere { center: [0., 0., 0., 1.], radius: 1.0 },
            ShapeKind::Ellipsoid { a: 1.0, b: 0.5, c: 0.3 },
        ] {
            let m = make_shape(&kind, 16).unwrap().into_mesh().unwrap();
            m.validate_closed().unwrap();
        }
    }

    #[test]
    fn genus_counts() {
        let s = make_shape(&ShapeKind::Sphere { r: 1.0 }, 16).unwrap().into_mesh().unwrap();
        assert_eq!(euler_genus(&s).unwrap(), 0);
        let t = make_shape(&ShapeKind::TubeTorus { big_r: 2f64.sqrt(), r: 1.0 }, 16).unwrap();
        assert_eq!(euler_genus(&t.into_mesh().unwrap()).unwrap(), 1);
        let g2 = genus_two(12);
        assert_eq!(euler_genus(&g2).unwrap(), 2);
        assert_eq!(euler_genus(&s3_ellipsoid(1.0, 0.7, 0.5, 16)).unwrap(), 0);
    }

    #[test]
    fn sphere_area() {
        let m = make_shape(&ShapeKind::Sphere { r: 1.0 }, 64).unwrap().into_mesh().unwrap();
        assert!((m.area() / (4.0 * PI) - 1.0).abs() < 0.005);
        let g = make_shape(&ShapeKind::GeodesicSphere { center: [1., 0., 0., 0.], radius: PI / 2.0 }, 64)
            .unwrap()
            .into_mesh()
            .unwrap();
        assert!((g.area() / (4.0 * PI) - 1.0).abs() < 0.005);
    }

    #[test]
    fn icosphere_counts_and_orientation() {
        let m = icosphere(2.0, 40);
        assert_eq!(m.n_vertices(), 10 * 64 + 2);
        assert_eq!(m.faces.len(), 20 * 64);
        m.validate_closed().unwrap();
        // outward orientation: positive enclosed volume
        let vol: f64 = m
            .faces
            .iter()
            .map(|&[a, b, c]| {
                let (p, q, r) = (m.vertices[a].xyz(), m.vertices[b].xyz(), m.vertices[c].xyz());
                p.dot(&q.cross(&r)) / 6.0
            })
            .sum();
        assert!((vol / (4.0 / 3.0 * PI * 8.0) - 1.0).abs() < 0.02, "{vol}");
        assert!(m.vertices.iter().all(|v| (v.norm() - 2.0).abs() < 1e-14));
    }

    #[test]
    fn clifford_vertices_split_evenly() {
        let m = clifford_torus(32);
        for v in &m.vertices {
            assert!((v.x * v.x + v.y * v.y - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(make_shape(&ShapeKind::TubeTorus { big_r: 1.0, r: 1.0 }, 16).is_err());
        assert!(make_shape(&ShapeKind::GeodesicSphere { center: [1., 0., 0., 0.], radius: PI }, 16).is_err());
        assert!(make_shape(&ShapeKind::Sphere { r: 1.0 }, 4).is_err());
        assert!(make_shape(&ShapeKind::TorusLink { p: 2, q: 3 }, 16).is_err());
    }

    #[test]
    fn perturbations_are_bounded_and_seeded() {
        let l = hopf_link(64);
        let a = perturbed_link(&l, 0.2, 3).unwrap();
        let b = perturbed_link(&l, 0.2, 3).unwrap();
        assert_eq!(a.gamma1, b.gamma1);
        assert!(a.on_unit_sphere(1e-12));
        let m = tube_torus(1.8, 1.0, 16);
        let p = perturbed_mesh(&m, 0.05, 1);
        let worst = p.vertices.iter().zip(&m.vertices).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(worst > 0.01 && worst <= 0.05 + 1e-15);
    }
}
