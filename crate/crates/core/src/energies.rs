//! Willmore energy, Möbius cross energy, Gauss linking number and the Gauss
//! map of a two-component link.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::shapes::{grid_torus, QuadSplit};
use crate::geom::stereo::{project_with, Frame4};
use crate::geom::{segments, triangle_area, Ambient, CurvatureField, Point, PolyLink, TriMesh};
use crate::numeric::{compensated_sum, CompensatedSum};

/// Energy value with its quadrature resolution and an error estimate.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct EnergyReport {
    pub value: f64,
    /// Error estimate (absolute, same units as `value`).
    pub error: f64,
    /// Vertex count of the mesh, or segments per component of the link.
    pub resolution: usize,
    /// Set when the link components are closer than ten segment lengths.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub resolution_warning: bool,
}

fn check_field(mesh: &TriMesh, field: &CurvatureField) -> Result<()> {
    if field.ambient != mesh.ambient {
        return Err(Error::Input(format!(
            "curvature field computed for {:?}, mesh ambient is {:?}",
            field.ambient, mesh.ambient
        )));
    }
    if field.len() != mesh.n_vertices() {
        return Err(Error::Input("curvature field does not match the mesh".into()));
    }
    Ok(())
}

/// Willmore integrand at a vertex: H² in R³, 1 + H² in S³.
#[inline]
pub(crate) fn willmore_density(ambient: Ambient, h: f64) -> f64 {
    match ambient {
        Ambient::R3 => h * h,
        Ambient::S3 => 1.0 + h * h,
    }
}

/// Per-vertex Willmore contributions `density(H_v) · w_v`.
pub fn willmore_terms(field: &CurvatureField) -> Vec<f64> {
    (0..field.len()).map(|v| willmore_density(field.ambient, field.mean(v)) * field.weights[v]).collect()
}

/// Relative area by which the surface over face `f` exceeds the flat face.
///
/// The face is split 1-to-4 with edge midpoints lifted onto the surface by
/// the sagitta `(n_b - n_a)·(b - a) / 8` along the mean normal (and onto S³
/// first when the ambient is S³). The flat area of an inscribed mesh is short
/// by `O(h²)`, so the gain from this refinement, times 4/3, estimates the
/// total shortfall.
pub(crate) fn face_area_excess(mesh: &TriMesh, field: &CurvatureField, f: usize) -> f64 {
    let [a, b, c] = mesh.faces[f];
    let x = &mesh.vertices;
    let n = &field.normals;
    let lift = |i: usize, j: usize| {
        let mut m = (x[i] + x[j]) * 0.5;
        if mesh.ambient == Ambient::S3 {
            m /= m.norm();
        }
        let mut nm = n[i] + n[j];
        if mesh.ambient == Ambient::S3 {
            nm -= m * nm.dot(&m);
        }
        let len = nm.norm();
        if len > 0.0 {
            m += nm * ((n[j] - n[i]).dot(&(x[j] - x[i])) / (8.0 * len));
        }
        if mesh.ambient == Ambient::S3 {
            m /= m.norm();
        }
        m
    };
    let (ab, bc, ca) = (lift(a, b), lift(b, c), lift(c, a));
    let flat = triangle_area(&x[a], &x[b], &x[c]);
    if flat == 0.0 {
        return 0.0;
    }
    let fine = triangle_area(&x[a], &ab, &ca)
        + triangle_area(&ab, &x[b], &bc)
        + triangle_area(&ca, &bc, &x[c])
        + triangle_area(&ab, &bc, &ca);
    (fine / flat - 1.0).max(0.0) * 4.0 / 3.0
}

/// Discrete Willmore energy `Σ_v (H_v²) w_v` in R³ or `Σ_v (1 + H_v²) w_v`
/// in S³. The error estimate is the gap to a face-based quadrature of the
/// same mean-curvature samples plus the area the flat faces miss (see
/// [`face_area_excess`]).
pub fn willmore_energy(mesh: &TriMesh, field: &CurvatureField) -> Result<EnergyReport> {
    check_field(mesh, field)?;
    let value = compensated_sum(&willmore_terms(field));
    let face_rule: CompensatedSum = mesh
        .faces
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let h = f.iter().map(|&v| field.mean(v)).sum::<f64>() / 3.0;
            willmore_density(mesh.ambient, h) * mesh.face_area(i)
        })
        .collect();
    let missing: CompensatedSum = (0..mesh.faces.len())
        .map(|i| {
            let h = mesh.faces[i].iter().map(|&v| field.mean(v)).sum::<f64>() / 3.0;
            willmore_density(mesh.ambient, h) * mesh.face_area(i) * face_area_excess(mesh, field, i)
        })
        .collect();
    Ok(EnergyReport {
        value,
        error: (value - face_rule.value()).abs() + missing.value(),
        resolution: mesh.n_vertices(),
        resolution_warning: false,
    })
}

/// Combines a fine and a coarse (half-resolution) evaluation of a
/// second-order quadrature: the fine value with the Richardson error
/// `|fine - coarse| / 3`.
pub fn richardson(fine: &EnergyReport, coarse: &EnergyReport) -> EnergyReport {
    EnergyReport { error: (fine.value - coarse.value).abs() / 3.0, ..*fine }
}

/// Midpoint double sum of `|γ1'||γ2'| / |γ1 - γ2|²` without error control.
pub fn mobius_sum(link: &PolyLink) -> f64 {
    let s1 = segments(&link.gamma1);
    let s2 = segments(&link.gamma2);
    let rows: Vec<f64> = s1
        .par_iter()
        .map(|(m1, d1)| {
            let l1 = d1.norm();
            s2.iter().map(|(m2, d2)| l1 * d2.norm() / (m1 - m2).norm_squared()).collect::<CompensatedSum>().value()
        })
        .collect();
    compensated_sum(&rows)
}

/// Möbius cross energy by the midpoint rule, with a Richardson error from
/// the half-resolution link.
pub fn mobius_energy(link: &PolyLink) -> Result<EnergyReport> {
    let dmin = link.min_distance();
    if !(dmin > 0.0) {
        return Err(Error::Input("link components intersect".into()));
    }
    let value = mobius_sum(link);
    let error = if link.gamma1.len() >= 6 && link.gamma2.len() >= 6 {
        (value - mobius_sum(&link.decimated(2))).abs() / 3.0
    } else {
        f64::NAN
    };
    Ok(EnergyReport {
        value,
        error,
        resolution: link.gamma1.len().max(link.gamma2.len()),
        resolution_warning: dmin < 10.0 * link.max_segment_length(),
    })
}

/// Rounded Gauss linking integral and its pre-rounding residual.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct LinkingNumber {
    pub value: i64,
    pub integral: f64,
    pub residual: f64,
}

/// Largest accepted distance of the Gauss integral from an integer.
pub const LINKING_RESIDUAL_MAX: f64 = 0.1;

/// Gauss linking integral `(1/4π) ∬ det(γ1', γ2', γ1 - γ2) / |γ1 - γ2|³`
/// by the midpoint rule, rounded to the nearest integer.
pub fn linking_number(link: &PolyLink) -> Result<LinkingNumber> {
    if link.dim != 3 {
        return Err(Error::Input("linking number needs a link in R3".into()));
    }
    if !(link.min_distance() > 0.0) {
        return Err(Error::Input("link components intersect".into()));
    }
    let s1 = segments(&link.gamma1);
    let s2 = segments(&link.gamma2);
    let rows: Vec<f64> = s1
        .par_iter()
        .map(|(m1, d1)| {
            let a = d1.xyz();
            s2.iter()
                .map(|(m2, d2)| {
                    let r = (m1 - m2).xyz();
                    a.cross(&d2.xyz()).dot(&r) / r.norm().powi(3)
                })
                .collect::<CompensatedSum>()
                .value()
        })
        .collect();
    let integral = compensated_sum(&rows) / (4.0 * PI);
    let value = integral.round();
    let residual = (integral - value).abs();
    if residual > LINKING_RESIDUAL_MAX {
        return Err(Error::Resolution(format!("Gauss integral {integral:.4} is {residual:.3} away from an integer")));
    }
    Ok(LinkingNumber { value: value as i64, integral, residual })
}

/// Projects a link on S³ to R³ from a pole far from both components
/// (links already in R³ are returned unchanged).
pub fn link_to_r3(link: &PolyLink) -> Result<PolyLink> {
    if link.dim == 3 {
        return Ok(link.clone());
    }
    if !link.on_unit_sphere(1e-9) {
        return Err(Error::Input("4D link must lie on S3 to be projected".into()));
    }
    let candidates = [
        Point::new(0.5, 0.5, 0.5, 0.5),
        Point::new(0.5, -0.5, 0.5, -0.5),
        Point::new(-0.5, 0.5, 0.5, 0.5),
        Point::new(0.0, 0.0, 0.0, 1.0),
        Point::new(1.0, 0.0, 0.0, 0.0),
        Point::new(0.6, 0.0, 0.8, 0.0),
    ];
    let clearance =
        |p: &Point| link.gamma1.iter().chain(link.gamma2.iter()).map(|x| (x - p).norm()).fold(f64::INFINITY, f64::min);
    let pole = candidates
        .iter()
        .max_by(|a, b| clearance(a).total_cmp(&clearance(b)))
        .copied()
        .expect("non-empty candidate list");
    let frame = Frame4::new(&pole);
    let proj = |c: &[Point]| c.iter().map(|x| project_with(&frame, x)).collect::<Result<Vec<_>>>();
    PolyLink::new(proj(&link.gamma1)?, proj(&link.gamma2)?, 3)
}

/// Result of comparing the Möbius energy with `4π |lk|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinkingBound {
    pub energy: f64,
    pub error: f64,
    pub linking_number: i64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Evaluates `E - 4π|lk|`; the bound holds when the margin is no worse than
/// minus the discretization error. Links on S³ are projected to R³ first
/// (the energy is conformally invariant).
pub fn energy_linking_bound_check(link: &PolyLink) -> Result<LinkingBound> {
    let r3 = link_to_r3(link)?;
    let e = mobius_energy(&r3)?;
    let lk = linking_number(&r3)?;
    let bound = 4.0 * PI * lk.value.abs() as f64;
    let margin = e.value - bound;
    Ok(LinkingBound {
        energy: e.value,
        error: e.error,
        linking_number: lk.value,
        bound,
        margin,
        holds: margin >= -e.error.abs(),
    })
}

/// Gauss map `(s, t) ↦ (γ1(s) - γ2(t)) / |γ1(s) - γ2(t)|` on the parameter
/// grid of the two polylines, triangulated as a torus in S³ (quads split
/// along the shorter diagonal).
pub fn gauss_map_torus(link: &PolyLink) -> Result<TriMesh> {
    let (n1, n2) = (link.gamma1.len(), link.gamma2.len());
    let mut pts = Vec::with_capacity(n1 * n2);
    for a in &link.gamma1 {
        for b in &link.gamma2 {
            let d = a - b;
            let n = d.norm();
            if !(n > 1e-14) {
                return Err(Error::Input("link components share a point".into()));
            }
            pts.push(d / n);
        }
    }
    Ok(grid_torus(n1, n2, pts, Ambient::S3, QuadSplit::Shorter))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GaussAreaReport {
    pub area: f64,
    pub energy: f64,
    pub energy_error: f64,
    pub ratio: f64,
}

/// Area of the Gauss-map torus against the Möbius energy of the link.
pub fn gauss_area_energy_check(link: &PolyLink) -> Result<GaussAreaReport> {
    let torus = gauss_map_torus(link)?;
    let e = mobius_energy(link)?;
    let area = torus.area();
    Ok(GaussAreaReport { area, energy: e.value, energy_error: e.error, ratio: area / e.value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::shapes::{coaxial_circles, ellipsoid, hopf_link, tube_torus};
    use crate::geom::{estimate_curvatures, euler_genus, p3};

    const TWO_PI_SQ: f64 = 2.0 * PI * PI;

    #[test]
    fn hopf_energy_at_256() {
        let e = mobius_energy(&hopf_link(256)).unwrap();
        assert!((e.value / TWO_PI_SQ - 1.0).abs() < 0.01);
        // the closed form for the inscribed polygon: 2N² tan²(π/N)
        let n = 256.0f64;
        assert!((e.value - 2.0 * n * n * (PI / n).tan().powi(2)).abs() < 1e-9);
        assert!(e.error < 1e-2);
    }

    #[test]
    fn coaxial_energy_decays_with_separation() {
        let vals: Vec<f64> =
            [10.0, 20.0, 40.0].iter().map(|&s| mobius_energy(&coaxial_circles(s, 128)).unwrap().value).collect();
        assert!(vals[0] < 0.5);
        assert!(vals[0] > vals[1] && vals[1] > vals[2]);
    }

    #[test]
    fn split_link_has_zero_linking_number() {
        assert_eq!(linking_number(&coaxial_circles(10.0, 128)).unwrap().value, 0);
        let b = energy_linking_bound_check(&coaxial_circles(10.0, 128)).unwrap();
        assert_eq!(b.margin, b.energy);
        assert!(b.holds);
    }

    #[test]
    fn intersecting_link_is_rejected() {
        let l = PolyLink {
            gamma1: vec![p3(-1., 0., 0.), p3(1., 0., 0.), p3(0., 1., 0.)],
            gamma2: vec![p3(0., 0., -1.), p3(0., 0., 1.), p3(0., 1., 1.)],
            dim: 3,
        };
        assert!(mobius_energy(&l).is_err());
    }

    #[test]
    fn scale_invariance_of_willmore() {
        let m = tube_torus(2.0, 1.0, 32);
        let w0 = willmore_energy(&m, &estimate_curvatures(&m).unwrap()).unwrap().value;
        for s in [0.5, 2.0, 10.0] {
            let ms = m.scaled(s);
            let w = willmore_energy(&ms, &estimate_curvatures(&ms).unwrap()).unwrap().value;
            assert!((w / w0 - 1.0).abs() < 1e-10, "scale {s}: {w} vs {w0}");
        }
    }

    #[test]
    fn sphere_willmore() {
        let m = ellipsoid(1.0, 1.0, 1.0, 96);
        let w = willmore_energy(&m, &estimate_curvatures(&m).unwrap()).unwrap();
        assert!((w.value / (4.0 * PI) - 1.0).abs() < 0.01, "{}", w.value);
    }

    #[test]
    fn field_mismatch_is_an_input_error() {
        let m = ellipsoid(1.0, 1.0, 1.0, 16);
        let mut f = estimate_curvatures(&m).unwrap();
        f.ambient = Ambient::S3;
        assert!(matches!(willmore_energy(&m, &f), Err(Error::Input(_))));
    }

    #[test]
    fn gauss_map_of_hopf_is_clifford() {
        let g = gauss_map_torus(&hopf_link(64)).unwrap();
        for v in &g.vertices {
            assert!((v.x * v.x + v.y * v.y - 0.5).abs() < 1e-12);
        }
        assert_eq!(euler_genus(&g).unwrap(), 1);
    }
}
