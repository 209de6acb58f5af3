//! Parallel surfaces in S³ and the canonical family `Σ_(v,t) = (F_v(Σ))_t`.
//!
//! The parallel surface at signed distance `t` moves each point along
//! `cos t · x - sin t · N`, i.e. towards the side the surface bends to for
//! positive curvature. Its area element is
//! `(cos t - k1 sin t)(cos t - k2 sin t)` up to the first focal point along
//! the normal geodesic; past it the point no longer bounds the parallel set
//! and contributes nothing. The mass used here is therefore
//! `Σ_v max(0, cos t - k1 sin t) · max(0, cos t - k2 sin t) · w_v`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::conformal::ConformalDilation;
use crate::energies::willmore_energy;
use crate::error::{Error, Result};
use crate::geom::{estimate_curvatures, Ambient, CurvatureField, Point, TriMesh};
use crate::numeric::CompensatedSum;

/// Largest |v| accepted by [`hk_verify`].
pub const HK_VMAX: f64 = 0.7;

/// Normal-exponential Jacobian at signed distance `t`, truncated at the
/// first focal point.
#[inline]
pub fn parallel_jacobian(k1: f64, k2: f64, t: f64) -> f64 {
    let (s, c) = t.sin_cos();
    (c - k1 * s).max(0.0) * (c - k2 * s).max(0.0)
}

fn check_t(t: f64) -> Result<()> {
    if !(t.abs() <= PI) {
        return Err(Error::Domain(format!("|t| = {} exceeds π", t.abs())));
    }
    Ok(())
}

/// Mass of the parallel surface at distance `t`.
pub fn parallel_area(field: &CurvatureField, t: f64) -> Result<f64> {
    check_t(t)?;
    if field.ambient != Ambient::S3 {
        return Err(Error::Input("parallel surfaces are taken in S3".into()));
    }
    Ok((0..field.len())
        .map(|v| parallel_jacobian(field.k1[v], field.k2[v], t) * field.weights[v])
        .collect::<CompensatedSum>()
        .value())
}

/// Area curve `t ↦ area(S_t)` sampled on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct ParallelAreaCurve {
    pub v: Option<[f64; 4]>,
    pub t: Vec<f64>,
    pub area: Vec<f64>,
}

pub fn parallel_area_curve(field: &CurvatureField, t_grid: &[f64]) -> Result<ParallelAreaCurve> {
    let area = t_grid.iter().map(|&t| parallel_area(field, t)).collect::<Result<Vec<_>>>()?;
    Ok(ParallelAreaCurve { v: None, t: t_grid.to_vec(), area })
}

/// `n` equally spaced values covering `[-π, π]`.
pub fn t_grid(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0];
    }
    (0..n).map(|k| -PI + 2.0 * PI * k as f64 / (n - 1) as f64).collect()
}

/// The conformal image `F_v(Σ)` with re-estimated curvatures; evaluating
/// several `t` on one slice avoids repeating the fit.
#[derive(Debug, Clone)]
pub struct CanonicalSlice {
    pub v: Point,
    pub image: TriMesh,
    pub field: CurvatureField,
}

impl CanonicalSlice {
    pub fn new(mesh: &TriMesh, v: &Point) -> Result<Self> {
        if mesh.ambient != Ambient::S3 {
            return Err(Error::Input("canonical family needs an S3 mesh".into()));
        }
        let image = ConformalDilation::new(*v)?.apply_mesh(mesh)?;
        let field = estimate_curvatures(&image)?;
        Ok(Self { v: *v, image, field })
    }

    pub fn area(&self, t: f64) -> Result<f64> {
        parallel_area(&self.field, t)
    }
}

/// `area(Σ_(v,t))`.
pub fn canonical_family_area(mesh: &TriMesh, v: &Point, t: f64) -> Result<f64> {
    check_t(t)?;
    CanonicalSlice::new(mesh, v)?.area(t)
}

/// Pointwise form of the Heintze–Karcher inequality at one vertex:
/// returns `(rhs - lhs, certificate)` where `lhs` is the unclamped Jacobian,
/// `rhs = 1 + H²` and the certificate
/// `(sin t + H cos t)² + ((k1 - k2)/2)² sin² t` equals `rhs - lhs` exactly in
/// real arithmetic.
pub fn jacobian_bound_gap(k1: f64, k2: f64, t: f64) -> (f64, f64, f64) {
    let (s, c) = t.sin_cos();
    let h = 0.5 * (k1 + k2);
    let lhs = (c - k1 * s) * (c - k2 * s);
    let rhs = 1.0 + h * h;
    let cert = (s + h * c).powi(2) + (0.5 * (k1 - k2) * s).powi(2);
    (lhs, rhs, cert)
}

/// Counts vertices/times where the pointwise bound fails beyond floating
/// point rounding of its two sides (4 ulp of the right-hand side).
pub fn pointwise_bound_violations(field: &CurvatureField, t_grid: &[f64]) -> usize {
    let mut bad = 0;
    for v in 0..field.len() {
        for &t in t_grid {
            let (lhs, rhs, cert) = jacobian_bound_gap(field.k1[v], field.k2[v], t);
            if lhs > rhs * (1.0 + 4.0 * f64::EPSILON) || cert < 0.0 {
                bad += 1;
            }
        }
    }
    bad
}

/// Directions used to build v-grids: coordinate axes and two diagonals.
pub fn v_directions() -> [Point; 5] {
    let s = 0.5;
    [
        Point::new(1.0, 0.0, 0.0, 0.0),
        Point::new(0.0, 0.0, 1.0, 0.0),
        Point::new(s, s, s, s),
        Point::new(s, -s, s, -s),
        Point::new(0.0, 0.6, 0.0, 0.8),
    ]
}

/// `steps` magnitudes from 0 to `vmax` along each direction of
/// [`v_directions`]; the origin appears once.
pub fn v_grid(vmax: f64, steps: usize) -> Vec<Point> {
    let mut out = vec![Point::zeros()];
    if steps < 2 {
        return out;
    }
    for k in 1..steps {
        let r = vmax * k as f64 / (steps - 1) as f64;
        out.extend(v_directions().iter().map(|d| d * r));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct HkSample {
    pub v: [f64; 4],
    pub t: f64,
    pub area: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HkReport {
    pub willmore: f64,
    pub willmore_error: f64,
    pub max_area: f64,
    pub argmax_v: [f64; 4],
    pub argmax_t: f64,
    pub ratio: f64,
    /// Vertices × times at which the pointwise bound fails (expected 0).
    pub pointwise_violations: usize,
    #[serde(skip)]
    pub samples: Vec<HkSample>,
}

/// Relative tolerance on `max area / W`.
pub const HK_TOL: f64 = 0.02;

impl HkReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.ratio <= 1.0 + tol && self.pointwise_violations == 0
    }
}

/// Maximum of `area(Σ_(v,t))` over a grid, against `W(Σ)`.
pub fn hk_verify(mesh: &TriMesh, v_grid: &[Point], t_grid: &[f64]) -> Result<HkReport> {
    if let Some(v) = v_grid.iter().find(|v| v.norm() > HK_VMAX + 1e-12) {
        return Err(Error::Parameter(format!("|v| = {} above the automated cap {HK_VMAX}", v.norm())));
    }
    for &t in t_grid {
        check_t(t)?;
    }
    let base = estimate_curvatures(mesh)?;
    let w = willmore_energy(mesh, &base)?;
    let slices: Vec<(Vec<HkSample>, usize)> = v_grid
        .par_iter()
        .map(|v| {
            let slice = CanonicalSlice::new(mesh, v)?;
            let samples = t_grid
                .iter()
                .map(|&t| Ok(HkSample { v: (*v).into(), t, area: slice.area(t)? }))
                .collect::<Result<Vec<_>>>()?;
            Ok((samples, pointwise_bound_violations(&slice.field, t_grid)))
        })
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(v_grid.len() * t_grid.len());
    let mut violations = 0;
    for (s, bad) in slices {
        samples.extend(s);
        violations += bad;
    }
    let best = samples
        .iter()
        .fold(None::<&HkSample>, |acc, s| match acc {
            Some(b) if b.area >= s.area => Some(b),
            _ => Some(s),
        })
        .ok_or_else(|| Error::Parameter("empty (v, t) grid".into()))?;
    Ok(HkReport {
        willmore: w.value,
        willmore_error: w.error,
        max_area: best.area,
        argmax_v: best.v,
        argmax_t: best.t,
        ratio: best.area / w.value,
        pointwise_violations: violations,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::shapes::{clifford_torus, geodesic_sphere};

    #[test]
    fn identity_at_zero() {
        let m = clifford_torus(32);
        let f = estimate_curvatures(&m).unwrap();
        assert!((parallel_area(&f, 0.0).unwrap() - m.area()).abs() < 1e-12 * m.area());
    }

    #[test]
    fn equator_parallel_area() {
        let m = geodesic_sphere(&Point::new(0.0, 0.0, 0.0, 1.0), PI / 2.0, 96);
        let f = estimate_curvatures(&m).unwrap();
        for k in 0..=16 {
            let t = -PI / 2.0 + PI * k as f64 / 16.0;
            let want = 4.0 * PI * t.cos().powi(2);
            let got = parallel_area(&f, t).unwrap();
            assert!((got - want).abs() <= 0.01 * 4.0 * PI, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn clifford_parallel_area() {
        let m = clifford_torus(96);
        let f = estimate_curvatures(&m).unwrap();
        let a = 2.0 * PI * PI;
        for k in 0..=24 {
            let t = -0.75 * PI + 1.5 * PI * k as f64 / 24.0;
            let want = a * (2.0 * t).cos().max(0.0);
            let got = parallel_area(&f, t).unwrap();
            assert!((got - want).abs() <= 0.01 * a, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn antipodal_focusing() {
        let m = geodesic_sphere(&Point::new(1.0, 0.0, 0.0, 0.0), 1.0, 32);
        let f = estimate_curvatures(&m).unwrap();
        assert!(parallel_area(&f, PI).unwrap() <= 0.01 * m.area());
        assert!(parallel_area(&f, -PI).unwrap() <= 0.01 * m.area());
        assert!(matches!(parallel_area(&f, 3.2), Err(Error::Domain(_))));
    }

    #[test]
    fn sum_of_squares_certificate_matches_gap() {
        for &(k1, k2) in &[(1.0, -1.0), (2.5, 0.3), (0.0, 0.0), (-0.4, -3.0)] {
            for k in 0..50 {
                let t = -PI + 2.0 * PI * k as f64 / 49.0;
                let (lhs, rhs, cert) = jacobian_bound_gap(k1, k2, t);
                assert!(((rhs - lhs) - cert).abs() < 1e-12 * rhs.max(1.0));
                assert!(parallel_jacobian(k1, k2, t) <= rhs);
            }
        }
    }

    #[test]
    fn refuses_large_v() {
        let m = clifford_torus(16);
        let v = [Point::new(0.8, 0.0, 0.0, 0.0)];
        assert!(matches!(hk_verify(&m, &v, &[0.0]), Err(Error::Parameter(_))));
    }
}
