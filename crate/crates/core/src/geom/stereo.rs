//! Stereographic projection S³ \ {pole} → R³ and its inverse, plus the
//! oriented orthonormal frames both rely on.

use nalgebra::Vector3;

use super::Point;
use crate::error::{Error, Result};

/// Distance to the pole below which projection is refused.
pub const POLE_TOL: f64 = 1e-9;

/// Orthonormal frame `(b1, b2, b3, axis)` of R⁴ built from a unit axis by a
/// Householder reflection. The orientation is fixed so that
/// `det[b1 b2 b3 axis] = -1` for every axis; for `axis = (0,0,0,-1)` this is
/// the standard basis.
#[derive(Debug, Clone, Copy)]
pub struct Frame4 {
    pub axis: Point,
    pub basis: [Point; 3],
}

impl Frame4 {
    pub fn new(axis: &Point) -> Self {
        let a = axis / axis.norm();
        let e4 = Point::new(0.0, 0.0, 0.0, 1.0);
        let (w, flip) = if a.w <= 0.0 { (a - e4, false) } else { (a + e4, true) };
        let ww = w.norm_squared();
        let reflect = |e: Point| e - w * (2.0 * w.dot(&e) / ww);
        let mut basis = [
            reflect(Point::new(1.0, 0.0, 0.0, 0.0)),
            reflect(Point::new(0.0, 1.0, 0.0, 0.0)),
            reflect(Point::new(0.0, 0.0, 1.0, 0.0)),
        ];
        if flip {
            basis[2] = -basis[2];
        }
        Self { axis: a, basis }
    }

    /// Coordinates of the component orthogonal to the axis.
    #[inline]
    pub fn tangent_coords(&self, x: &Point) -> Vector3<f64> {
        Vector3::new(self.basis[0].dot(x), self.basis[1].dot(x), self.basis[2].dot(x))
    }

    #[inline]
    pub fn from_tangent(&self, y: &Vector3<f64>) -> Point {
        self.basis[0] * y.x + self.basis[1] * y.y + self.basis[2] * y.z
    }

    /// Riemannian logarithm of S³ at `axis` (assumed a unit vector), in
    /// tangent coordinates.
    pub fn sphere_log(&self, q: &Point) -> Vector3<f64> {
        let c = self.axis.dot(q);
        let tang = q - self.axis * c;
        let s = tang.norm();
        let theta = s.atan2(c);
        let scale = if s > 1e-300 { theta / s } else { 1.0 };
        self.tangent_coords(&tang) * scale
    }
}

/// Stereographic projection from `pole`: the antipode of the pole goes to
/// the origin and the great sphere orthogonal to the pole goes to the unit
/// sphere of R³. The result is returned with zero fourth coordinate.
pub fn stereographic(x: &Point, pole: &Point) -> Result<Point> {
    let frame = Frame4::new(pole);
    project_with(&frame, x)
}

pub(crate) fn project_with(frame: &Frame4, x: &Point) -> Result<Point> {
    let dist = (x - frame.axis).norm();
    if dist < POLE_TOL {
        return Err(Error::NearPole { distance: dist });
    }
    let h = frame.axis.dot(x);
    let y = frame.tangent_coords(x) / (1.0 - h);
    Ok(Point::new(y.x, y.y, y.z, 0.0))
}

/// Inverse stereographic projection R³ → S³ \ {pole}.
pub fn stereographic_inverse(y: &Point, pole: &Point) -> Point {
    let frame = Frame4::new(pole);
    unproject_with(&frame, y)
}

pub(crate) fn unproject_with(frame: &Frame4, y: &Point) -> Point {
    let t = Vector3::new(y.x, y.y, y.z);
    let r2 = t.norm_squared();
    let x = (frame.from_tangent(&t) * 2.0 + frame.axis * (r2 - 1.0)) / (r2 + 1.0);
    x / x.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> Point {
        loop {
            let p = Point::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let n = p.norm();
            if n > 0.1 && n < 1.0 {
                return p / n;
            }
        }
    }

    #[test]
    fn frames_are_orthonormal_with_fixed_orientation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..200 {
            let a = if k == 0 { Point::new(0., 0., 0., 1.) } else { random_unit(&mut rng) };
            let f = Frame4::new(&a);
            let m = Matrix4::from_columns(&[f.basis[0], f.basis[1], f.basis[2], f.axis]);
            assert!((m.transpose() * m - Matrix4::identity()).norm() < 1e-13);
            assert!((m.determinant() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn antipode_goes_to_origin_and_equator_to_unit_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pole = random_unit(&mut rng);
        let y = stereographic(&(-pole), &pole).unwrap();
        assert!(y.norm() < 1e-15);
        let frame = Frame4::new(&pole);
        for _ in 0..50 {
            let t = frame.from_tangent(&Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0)));
            let e = t / t.norm();
            assert!((stereographic(&e, &pole).unwrap().norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn roundtrip_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pole = Point::new(0., 0., 0., -1.);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let x = random_unit(&mut rng);
            if (x - pole).norm() < 1e-3 {
                continue;
            }
            let back = stereographic_inverse(&stereographic(&x, &pole).unwrap(), &pole);
            worst = worst.max((back - x).norm());
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn near_pole_is_rejected() {
        let pole = Point::new(0., 1., 0., 0.);
        let x = Point::new(1e-11, 1.0, 0., 0.);
        assert!(matches!(stereographic(&(x / x.norm()), &pole), Err(Error::NearPole { .. })));
    }

    #[test]
    fn sphere_log_preserves_geodesic_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = random_unit(&mut rng);
            let q = random_unit(&mut rng);
            let f = Frame4::new(&p);
            let d = p.dot(&q).clamp(-1.0, 1.0).acos();
            assert!((f.sphere_log(&q).norm() - d).abs() < 1e-12);
        }
    }
}
