//! Conformal dilations of S³, inversions of R⁴, the inverted-and-dilated
//! Gauss-map family of a link, and the radial blow-up limit of a surface.

use serde::Serialize;

use crate::energies::gauss_map_torus;
use crate::error::{Error, Result};
use crate::geom::stereo::{project_with, unproject_with, Frame4, POLE_TOL};
use crate::geom::{Ambient, CurvatureField, Point, PolyLink, TriMesh};

/// Above this |v| images are refined before evaluation.
pub const REFINE_ABOVE: f64 = 0.9;

/// Conformal dilation of S³ centred at `v/|v|`, parametrised by `v` in the
/// open unit 4-ball.
///
/// `F_v = π⁻¹ ∘ (λ ·) ∘ π` with `π` the stereographic projection from
/// `-v/|v|` (so `v/|v|` goes to the origin) and `λ = (1 + |v|) / (1 - |v|)`.
/// `F_0` is the identity.
#[derive(Debug, Clone, Copy)]
pub struct ConformalDilation {
    v: Point,
    frame: Option<Frame4>,
    factor: f64,
}

impl ConformalDilation {
    pub fn new(v: Point) -> Result<Self> {
        let r = v.norm();
        if !(r < 1.0) {
            return Err(Error::Parameter(format!("dilation parameter |v| = {r} must be < 1")));
        }
        let frame = (r > 0.0).then(|| Frame4::new(&(-v)));
        Ok(Self { v, frame, factor: (1.0 + r) / (1.0 - r) })
    }

    pub fn v(&self) -> Point {
        self.v
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        let Some(frame) = &self.frame else {
            return Ok(*x);
        };
        // the projection pole -v/|v| is a fixed point of the extension
        if (x - frame.axis).norm() < POLE_TOL {
            return Ok(frame.axis);
        }
        let y = project_with(frame, x)?;
        Ok(unproject_with(frame, &(y * self.factor)))
    }

    /// Image of a mesh on S³. For |v| above [`REFINE_ABOVE`] the source is
    /// subdivided until the image's longest edge is at most that of the
    /// source (at most three subdivisions).
    pub fn apply_mesh(&self, mesh: &TriMesh) -> Result<TriMesh> {
        if mesh.ambient != Ambient::S3 {
            return Err(Error::Input("conformal dilations act on S3 meshes".into()));
        }
        let map = |m: &TriMesh| -> Result<TriMesh> {
            let vertices = m.vertices.iter().map(|x| self.apply(x)).collect::<Result<Vec<_>>>()?;
            Ok(TriMesh { vertices, faces: m.faces.clone(), ambient: Ambient::S3 })
        };
        let mut image = map(mesh)?;
        if self.v.norm() > REFINE_ABOVE {
            let target = mesh.max_edge_length();
            let mut src = mesh.clone();
            for _ in 0..3 {
                if image.max_edge_length() <= target {
                    break;
                }
                src = src.subdivide();
                image = map(&src)?;
            }
        }
        Ok(image)
    }
}

/// Inversion of R⁴ centred at `v`: `x ↦ (x - v) / |x - v|²`. It sends the
/// unit sphere to the sphere of radius `1/(1 - |v|²)` centred at
/// `c(v) = v / (1 - |v|²)`.
#[derive(Debug, Clone, Copy)]
pub struct InversionR4 {
    v: Point,
}

impl InversionR4 {
    pub fn new(v: Point) -> Result<Self> {
        if !(v.norm() < 1.0) {
            return Err(Error::Parameter(format!("inversion center |v| = {} must be < 1", v.norm())));
        }
        Ok(Self { v })
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        let d = x - self.v;
        let n2 = d.norm_squared();
        if n2.sqrt() < 1e-12 {
            return Err(Error::Singularity(format!("point within {:.1e} of the inversion center", n2.sqrt())));
        }
        Ok(d / n2)
    }

    /// Inverse map `y ↦ v + y / |y|²`.
    pub fn apply_inverse(&self, y: &Point) -> Result<Point> {
        let n2 = y.norm_squared();
        if n2 < 1e-300 {
            return Err(Error::Singularity("cannot invert the origin".into()));
        }
        Ok(self.v + y / n2)
    }

    /// Center `v / (1 - |v|²)` of the image of S³.
    pub fn image_center(&self) -> Point {
        self.v / (1.0 - self.v.norm_squared())
    }

    pub fn image_radius(&self) -> f64 {
        1.0 / (1.0 - self.v.norm_squared())
    }
}

/// Member `(v, λ)` of the Gauss-map family of a link on S³, with the
/// measured sphere-containment residual.
#[derive(Debug, Clone)]
pub struct GFamilyMember {
    pub torus: TriMesh,
    /// Largest relative deviation of either transformed curve from a sphere
    /// centred at c(v).
    pub centering_residual: f64,
}

/// Largest tolerated relative deviation from the c(v)-centred spheres.
pub const CENTERING_TOL: f64 = 1e-9;

/// Gauss-map torus of `(F_v ∘ γ1, λ (F_v ∘ γ2 - c(v)) + c(v))` where `F_v`
/// is the inversion of R⁴ centred at `v`.
pub fn g_family(link: &PolyLink, v: &Point, lambda: f64) -> Result<GFamilyMember> {
    if link.dim != 4 || !link.on_unit_sphere(1e-9) {
        return Err(Error::Input("g_family needs a link on S3".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("dilation factor {lambda} must be positive")));
    }
    let inv = InversionR4::new(*v)?;
    let c = inv.image_center();
    // F_0 fixes S³ pointwise; skipping it keeps g(0, 1) bitwise equal to the
    // plain Gauss map.
    let apply = |x: &Point| if v.norm() == 0.0 { Ok(*x) } else { inv.apply(x) };
    let g1 = link.gamma1.iter().map(apply).collect::<Result<Vec<_>>>()?;
    let g2 = link.gamma2.iter().map(|x| apply(x).map(|y| (y - c) * lambda + c)).collect::<Result<Vec<_>>>()?;
    let residual = |pts: &[Point]| {
        let radii: Vec<f64> = pts.iter().map(|p| (p - c).norm()).collect();
        let mean = radii.iter().sum::<f64>() / radii.len() as f64;
        radii.iter().map(|r| (r - mean).abs() / mean).fold(0.0, f64::max)
    };
    let centering_residual = residual(&g1).max(residual(&g2));
    if centering_residual > CENTERING_TOL {
        return Err(Error::Numeric(format!(
            "transformed curves leave the c(v)-centred spheres (residual {centering_residual:.2e})"
        )));
    }
    let moved = PolyLink { gamma1: g1, gamma2: g2, dim: 4 };
    let torus = gauss_map_torus(&moved).map_err(|e| match e {
        Error::Input(msg) => Error::DegenerateParameter(msg),
        other => other,
    })?;
    Ok(GFamilyMember { torus, centering_residual })
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialLimitReport {
    pub vertex: usize,
    pub s_values: Vec<f64>,
    /// Largest spherical distance from a vertex of `F_{s p}(mesh)` to the
    /// great sphere tangent to the mesh at `p`.
    pub distances: Vec<f64>,
    pub decreasing: bool,
}

/// Spherical distance from `x` to the great sphere with unit normal `n`.
#[inline]
pub fn distance_to_great_sphere(x: &Point, n: &Point) -> f64 {
    x.dot(n).abs().min(1.0).asin()
}

/// Tracks `F_{s p}(mesh)` as `s → 1` for a vertex `p` of the mesh and
/// measures its distance to the tangent great sphere at `p`.
pub fn radial_limit_check(
    mesh: &TriMesh,
    field: &CurvatureField,
    vertex: usize,
    s_values: &[f64],
) -> Result<RadialLimitReport> {
    if mesh.ambient != Ambient::S3 {
        return Err(Error::Input("radial limit needs an S3 mesh".into()));
    }
    let normal = field
        .normals
        .get(vertex)
        .filter(|_| field.len() == mesh.n_vertices())
        .ok_or_else(|| Error::Input("normal at the base point is unavailable; compute curvatures first".into()))?;
    let p = mesh.vertices[vertex];
    let mut distances = Vec::with_capacity(s_values.len());
    for &s in s_values {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("s = {s} not in (0, 1)")));
        }
        let f = ConformalDilation::new(p * s)?;
        let mut worst: f64 = 0.0;
        for (i, x) in mesh.vertices.iter().enumerate() {
            // the base point is fixed by F_{sp}
            let y = if i == vertex { p } else { f.apply(x)? };
            worst = worst.max(distance_to_great_sphere(&y, normal));
        }
        distances.push(worst);
    }
    let decreasing = distances.windows(2).all(|w| w[1] < w[0]);
    Ok(RadialLimitReport { vertex, s_values: s_values.to_vec(), distances, decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energies::gauss_map_torus;
    use crate::geom::shapes::{clifford_torus, hopf_link};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> Point {
        let p = Point::from_fn(|_, _| rng.random_range(-1.0..1.0));
        p / p.norm()
    }

    #[test]
    fn zero_dilation_is_identity() {
        let f = ConformalDilation::new(Point::zeros()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_unit(&mut rng);
        assert_eq!(f.apply(&x).unwrap(), x);
    }

    #[test]
    fn dilation_fixes_its_poles_and_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_unit(&mut rng);
        let f = ConformalDilation::new(p * 0.6).unwrap();
        assert!((f.apply(&p).unwrap() - p).norm() < 1e-12);
        assert_eq!(f.apply(&(-p)).unwrap(), -p);
        for _ in 0..100 {
            let y = f.apply(&random_unit(&mut rng)).unwrap();
            assert!((y.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dilation_rejects_unit_parameter() {
        assert!(ConformalDilation::new(Point::new(1.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn inversion_sends_s3_to_the_c_sphere() {
        let v = Point::new(0.3, -0.2, 0.1, 0.3) * (0.5 / 0.5196152422706632);
        let inv = InversionR4::new(v).unwrap();
        let c = inv.image_center();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let y = inv.apply(&random_unit(&mut rng)).unwrap();
            assert!(((y - c).norm() - inv.image_radius()).abs() < 1e-10);
        }
    }

    #[test]
    fn inversion_roundtrip() {
        let inv = InversionR4::new(Point::new(0.2, 0.1, 0.0, -0.4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let x = random_unit(&mut rng) * rng.random_range(0.5..2.0);
            let back = inv.apply_inverse(&inv.apply(&x).unwrap()).unwrap();
            assert!((back - x).norm() < 1e-10);
        }
        assert!(matches!(inv.apply(&Point::new(0.2, 0.1, 0.0, -0.4)), Err(Error::Singularity(_))));
    }

    #[test]
    fn g_family_at_origin_is_the_gauss_map() {
        let link = hopf_link(32);
        let g = g_family(&link, &Point::zeros(), 1.0).unwrap();
        let direct = gauss_map_torus(&link).unwrap();
        assert_eq!(g.torus.faces, direct.faces);
        for (a, b) in g.torus.vertices.iter().zip(&direct.vertices) {
            assert!((a - b).norm() == 0.0);
        }
    }

    #[test]
    fn g_family_centering_residual() {
        let v = Point::new(0.4, 0.0, 0.0, 0.0);
        let g = g_family(&hopf_link(64), &v, 1.7).unwrap();
        assert!(g.centering_residual < 1e-9);
    }

    #[test]
    fn refinement_kicks_in_near_the_boundary() {
        let m = clifford_torus(16);
        let f = ConformalDilation::new(m.vertices[0] * 0.95).unwrap();
        let img = f.apply_mesh(&m).unwrap();
        assert!(img.faces.len() > m.faces.len());
    }
}
