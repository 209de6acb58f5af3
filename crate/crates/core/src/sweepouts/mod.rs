//! One-dimensional cycles on triangulated surfaces and explicit sweepout
//! families: sublevel boundaries of a function, polynomial sweepouts, nodal
//! sets of spherical harmonics and of Laplace eigenfunctions.
//!
//! Level sets are extracted by marching triangles. A vertex whose value
//! equals the level is classified with the vertices above it, which is the
//! limit of an index-ordered infinitesimal perturbation and keeps every
//! extracted set a union of closed loops.
//!
//! Width estimates are suprema of cycle length over sampled members of a
//! family, so they bound the true width from above only in the limit of
//! exhaustive sampling of that family; they are upper estimates for the
//! family-restricted min-max value.

mod families;
mod harmonics;

pub use families::*;
pub use harmonics::{harmonic_basis, harmonic_basis_size, harmonic_degree_for, real_spherical_harmonics, HarmonicSpan};

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Point, TriMesh};
use crate::numeric::{poly_eval, sign_change_roots, CompensatedSum};

/// A closed polyline on a mesh. Segment `i` joins `points[i]` to
/// `points[(i + 1) % n]` and lies in face `faces[i]`.
#[derive(Debug, Clone)]
pub struct CycleLoop {
    pub points: Vec<Point>,
    pub faces: Vec<usize>,
}

impl CycleLoop {
    pub fn length(&self) -> f64 {
        let n = self.points.len();
        (0..n).map(|i| (self.points[(i + 1) % n] - self.points[i]).norm()).sum()
    }
}

/// A mod-2 one-cycle: a union of closed polylines.
#[derive(Debug, Clone, Default)]
pub struct CycleSet {
    pub loops: Vec<CycleLoop>,
    pub length: f64,
}

impl CycleSet {
    pub fn is_empty(&self) -> bool {
        self.loops.is_empty()
    }

    pub fn n_segments(&self) -> usize {
        self.loops.iter().map(|l| l.points.len()).sum()
    }

    /// Distance from `x` to the nearest segment; infinite for the empty set.
    pub fn distance_to(&self, x: &Point) -> f64 {
        let mut best = f64::INFINITY;
        for l in &self.loops {
            let n = l.points.len();
            for i in 0..n {
                best = best.min(point_segment_distance(x, &l.points[i], &l.points[(i + 1) % n]));
            }
        }
        best
    }

    fn extend(&mut self, other: CycleSet) {
        self.loops.extend(other.loops);
        self.length += other.length;
    }
}

fn point_segment_distance(x: &Point, a: &Point, b: &Point) -> f64 {
    let d = b - a;
    let l2 = d.norm_squared();
    let t = if l2 > 0.0 { ((x - a).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (x - (a + d * t)).norm()
}

#[inline]
fn above(v: f64, c: f64) -> bool {
    v >= c
}

/// Crossing point on edge `(a, b)`, always interpolated from the smaller
/// vertex index so both incident faces compute the identical point.
#[inline]
fn crossing(mesh: &TriMesh, values: &[f64], a: usize, b: usize, c: f64) -> Point {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    let (fa, fb) = (values[a], values[b]);
    let t = ((c - fa) / (fb - fa)).clamp(0.0, 1.0);
    mesh.vertices[a] + (mesh.vertices[b] - mesh.vertices[a]) * t
}

/// The two crossed edges of face `f`, if any.
#[inline]
fn face_crossing(mesh: &TriMesh, values: &[f64], f: usize, c: f64) -> Option<[(usize, usize); 2]> {
    let face = mesh.faces[f];
    let s = face.map(|v| above(values[v], c));
    if s[0] == s[1] && s[1] == s[2] {
        return None;
    }
    let mut e = [(0, 0); 2];
    let mut k = 0;
    for i in 0..3 {
        let (a, b) = (face[i], face[(i + 1) % 3]);
        if s[i] != s[(i + 1) % 3] {
            e[k] = (a.min(b), a.max(b));
            k += 1;
        }
    }
    Some(e)
}

#[inline]
fn face_segment_length(mesh: &TriMesh, values: &[f64], f: usize, c: f64) -> f64 {
    match face_crossing(mesh, values, f, c) {
        Some([(a, b), (p, q)]) => (crossing(mesh, values, a, b, c) - crossing(mesh, values, p, q, c)).norm(),
        None => 0.0,
    }
}

/// Length of the level set `{g = c}`, without building loops.
pub fn level_length(mesh: &TriMesh, values: &[f64], c: f64) -> f64 {
    (0..mesh.faces.len()).map(|f| face_segment_length(mesh, values, f, c)).collect::<CompensatedSum>().value()
}

/// Level set `{g = c}` as closed loops, with linear interpolation along
/// edges. Levels outside the range of `g` give the empty cycle.
pub fn level_set(mesh: &TriMesh, values: &[f64], c: f64) -> Result<CycleSet> {
    if values.len() != mesh.n_vertices() {
        return Err(Error::Input(format!("field has {} values for {} vertices", values.len(), mesh.n_vertices())));
    }
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut points: Vec<Point> = Vec::new();
    // per crossing: up to two (face, other crossing) links
    let mut adj: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut length = CompensatedSum::new();
    for f in 0..mesh.faces.len() {
        let Some(edges) = face_crossing(mesh, values, f, c) else {
            length.add(0.0);
            continue;
        };
        let mut id = [0usize; 2];
        for (k, &(a, b)) in edges.iter().enumerate() {
            id[k] = *ids.entry((a, b)).or_insert_with(|| {
                points.push(crossing(mesh, values, a, b, c));
                adj.push(Vec::with_capacity(2));
                points.len() - 1
            });
        }
        adj[id[0]].push((f, id[1]));
        adj[id[1]].push((f, id[0]));
        length.add((points[id[0]] - points[id[1]]).norm());
    }
    if let Some(bad) = adj.iter().position(|a| a.len() != 2) {
        return Err(Error::NonManifold(format!("level-set crossing {bad} has {} incident segments", adj[bad].len())));
    }
    let mut used = vec![false; points.len()];
    let mut loops = Vec::new();
    for start in 0..points.len() {
        if used[start] {
            continue;
        }
        let mut lp = CycleLoop { points: Vec::new(), faces: Vec::new() };
        let mut prev_face = usize::MAX;
        let mut cur = start;
        loop {
            used[cur] = true;
            lp.points.push(points[cur]);
            let &(face, next) =
                adj[cur].iter().find(|&&(face, _)| face != prev_face).expect("two distinct incident faces");
            lp.faces.push(face);
            prev_face = face;
            cur = next;
            if cur == start {
                break;
            }
        }
        loops.push(lp);
    }
    Ok(CycleSet { loops, length: length.value() })
}

/// Scalar field on the vertices of a mesh.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: &TriMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(Error::Input(format!("field has {} values for {} vertices", values.len(), mesh.n_vertices())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("field has non-finite values".into()));
        }
        Ok(Self { values })
    }

    /// The coordinate function `x_axis` (0-based).
    pub fn coordinate(mesh: &TriMesh, axis: usize) -> Self {
        Self { values: mesh.vertices.iter().map(|p| p[axis]).collect() }
    }

    pub fn range(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// `∂{x : f(x) < c}`.
pub fn sublevel_boundary(mesh: &TriMesh, f: &ScalarField, c: f64) -> Result<CycleSet> {
    level_set(mesh, &f.values, c)
}

/// Face lists bucketed by value range, for repeated level queries on one
/// fixed field.
#[derive(Debug, Clone)]
pub struct LevelIndex {
    lo: f64,
    hi: f64,
    buckets: Vec<Vec<u32>>,
}

impl LevelIndex {
    pub fn new(mesh: &TriMesh, f: &ScalarField) -> Self {
        let (lo, hi) = f.range();
        let nb = ((mesh.faces.len() as f64).sqrt() as usize).clamp(1, 4096);
        let mut buckets = vec![Vec::new(); nb];
        let width = (hi - lo).max(f64::MIN_POSITIVE);
        let bucket = |v: f64| ((((v - lo) / width) * nb as f64) as usize).min(nb - 1);
        for (i, face) in mesh.faces.iter().enumerate() {
            let vals = face.map(|v| f.values[v]);
            let a = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let b = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for k in bucket(a)..=bucket(b) {
                buckets[k].push(i as u32);
            }
        }
        Self { lo, hi, buckets }
    }

    /// Same value as [`level_length`] on the indexed field.
    pub fn length(&self, mesh: &TriMesh, f: &ScalarField, c: f64) -> f64 {
        if c < self.lo || c > self.hi {
            return 0.0;
        }
        let nb = self.buckets.len();
        let width = (self.hi - self.lo).max(f64::MIN_POSITIVE);
        let k = ((((c - self.lo) / width) * nb as f64) as usize).min(nb - 1);
        // Faces crossing level c have a value range containing c, so they
        // are all in bucket k; the zeros skipped here do not change a
        // compensated sum.
        self.buckets[k]
            .iter()
            .map(|&face| face_segment_length(mesh, &f.values, face as usize, c))
            .collect::<CompensatedSum>()
            .value()
    }
}

fn check_coeffs(coeffs: &[f64]) -> Result<()> {
    if coeffs.len() < 2 {
        return Err(Error::Parameter("a polynomial sweepout needs p ≥ 1 (at least two coefficients)".into()));
    }
    if coeffs.iter().all(|&a| a == 0.0) {
        return Err(Error::Parameter("all coefficients are zero".into()));
    }
    if coeffs.iter().any(|a| !a.is_finite()) {
        return Err(Error::Parameter("non-finite coefficient".into()));
    }
    Ok(())
}

/// Levels of `f` bounding `{a₀ + a₁ f + … + a_p f^p < 0}`: the sign-changing
/// real roots of the polynomial inside the range of `f`.
pub fn sweepout_levels(f: &ScalarField, coeffs: &[f64]) -> Result<Vec<f64>> {
    check_coeffs(coeffs)?;
    let (lo, hi) = f.range();
    // Endpoint roots matter too: widen by a hair and keep what lands inside.
    let pad = 1e-12 * (hi - lo).abs().max(1.0);
    Ok(sign_change_roots(coeffs, lo - pad, hi + pad).into_iter().filter(|r| *r >= lo && *r <= hi).collect())
}

/// `∂{x : a₀ + a₁ f(x) + … + a_p f(x)^p < 0}` as the union of the level sets
/// of `f` at the sign-changing roots.
pub fn poly_sweepout_cycle(mesh: &TriMesh, f: &ScalarField, coeffs: &[f64]) -> Result<CycleSet> {
    let mut out = CycleSet::default();
    for r in sweepout_levels(f, coeffs)? {
        out.extend(level_set(mesh, &f.values, r)?);
    }
    Ok(out)
}

/// Upper estimate of a p-width obtained from one explicit family.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct WidthEstimate {
    pub p: usize,
    pub estimate: f64,
    pub family: String,
    /// Parameter samples evaluated at the top degree.
    pub samples: usize,
    pub direction: &'static str,
}

impl WidthEstimate {
    pub fn upper(p: usize, estimate: f64, family: &str, samples: usize) -> Self {
        Self { p, estimate, family: family.to_string(), samples, direction: "upper" }
    }
}

/// Least-squares slope of `log(estimate)` against `log(p)`.
pub fn scaling_fit(estimates: &[WidthEstimate]) -> Result<f64> {
    if estimates.len() < 10 {
        return Err(Error::InsufficientData { needed: 10, got: estimates.len() });
    }
    if estimates.iter().any(|e| e.family != estimates[0].family) {
        return Err(Error::Input("estimates come from different families".into()));
    }
    if estimates.iter().any(|e| !(e.estimate > 0.0) || e.p == 0) {
        return Err(Error::Input("log-log fit needs positive p and estimates".into()));
    }
    let xs: Vec<f64> = estimates.iter().map(|e| (e.p as f64).ln()).collect();
    let ys: Vec<f64> = estimates.iter().map(|e| e.estimate.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Input("all estimates share one p".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Outcome of covering `p` points by one member of the polynomial family.
#[derive(Debug, Clone, Serialize)]
pub struct PointCover {
    pub coeffs: Vec<f64>,
    /// Distance from each point to the extracted cycle.
    pub distances: Vec<f64>,
    /// Whether coincident f-values had to be separated.
    pub perturbed: bool,
    pub covered: bool,
}

/// Relative offset used to separate coincident f-values. Much smaller
/// offsets produce near-double roots that rounding hides.
pub const COVER_PERTURBATION: f64 = 1e-6;

/// Finds the member of the degree-`p` polynomial family whose cycle passes
/// through the given `p` vertices: the polynomial vanishing at their
/// f-values. Coincident f-values are separated by index-ordered offsets of
/// [`COVER_PERTURBATION`] times the range of `f`.
pub fn point_cover_test(mesh: &TriMesh, f: &ScalarField, points: &[usize], tolerance: f64) -> Result<PointCover> {
    if points.is_empty() {
        return Err(Error::Parameter("need at least one point".into()));
    }
    if let Some(&bad) = points.iter().find(|&&v| v >= mesh.n_vertices()) {
        return Err(Error::Input(format!("vertex {bad} out of range")));
    }
    let (lo, hi) = f.range();
    let eps = COVER_PERTURBATION * (hi - lo).max(f64::MIN_POSITIVE);
    let mut roots: Vec<f64> = points.iter().map(|&v| f.values[v]).collect();
    let mut perturbed = false;
    for i in 0..roots.len() {
        for j in 0..i {
            if points[i] == points[j] {
                return Err(Error::Input(format!("point {} is listed twice", points[i])));
            }
        }
        let mut k = 1.0;
        while roots[..i].iter().any(|r| (r - roots[i]).abs() < 0.5 * eps) {
            let dir = if roots[i] + k * eps <= hi { 1.0 } else { -1.0 };
            roots[i] = f.values[points[i]] + dir * k * eps;
            perturbed = true;
            k += 1.0;
            if k > points.len() as f64 + 2.0 {
                return Err(Error::Input("coincident f-values survive perturbation".into()));
            }
        }
    }
    let coeffs = crate::numeric::poly_from_roots(&roots);
    let cycle = poly_sweepout_cycle(mesh, f, &coeffs)?;
    let distances: Vec<f64> = points.iter().map(|&v| cycle.distance_to(&mesh.vertices[v])).collect();
    let covered = distances.iter().all(|&d| d <= tolerance);
    Ok(PointCover { coeffs, distances, perturbed, covered })
}

/// Value of the composed polynomial at every vertex.
pub fn compose(f: &ScalarField, coeffs: &[f64]) -> Vec<f64> {
    f.values.iter().map(|&x| poly_eval(coeffs, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::shapes::{ellipsoid, tube_torus};
    use std::f64::consts::TAU;

    fn sphere() -> TriMesh {
        ellipsoid(1.0, 1.0, 1.0, 64)
    }

    #[test]
    fn equator_level() {
        let m = sphere();
        let f = ScalarField::coordinate(&m, 2);
        let c = sublevel_boundary(&m, &f, 0.0).unwrap();
        assert!((c.length - TAU).abs() < 0.01 * TAU, "{}", c.length);
        assert_eq!(c.loops.len(), 1);
        assert!((c.loops[0].length() - c.length).abs() < 1e-12);
    }

    #[test]
    fn latitude_levels() {
        // flat faces sit inside the sphere, which biases small circles
        let m = ellipsoid(1.0, 1.0, 1.0, 192);
        let f = ScalarField::coordinate(&m, 2);
        for c in [-0.99, -0.5, 0.3, 0.99] {
            let want = TAU * (1.0f64 - c * c).sqrt();
            let got = sublevel_boundary(&m, &f, c).unwrap().length;
            assert!((got - want).abs() < 0.02 * want, "c={c}: {got} vs {want}");
        }
    }

    #[test]
    fn outside_range_is_empty() {
        let m = sphere();
        let f = ScalarField::coordinate(&m, 2);
        let c = sublevel_boundary(&m, &f, -2.0).unwrap();
        assert!(c.is_empty() && c.length == 0.0);
    }

    #[test]
    fn level_index_matches_full_scan() {
        let m = tube_torus(2.0, 0.7, 24);
        let f = ScalarField::coordinate(&m, 0);
        let idx = LevelIndex::new(&m, &f);
        for k in 0..40 {
            let c = -2.7 + 5.4 * k as f64 / 39.0;
            assert_eq!(idx.length(&m, &f, c), level_length(&m, &f.values, c));
        }
    }

    #[test]
    fn torus_level_has_two_loops() {
        let m = tube_torus(2.0, 0.7, 32);
        let f = ScalarField::coordinate(&m, 0);
        let c = sublevel_boundary(&m, &f, 0.0).unwrap();
        assert_eq!(c.loops.len(), 2);
    }

    #[test]
    fn linear_polynomial_is_the_sublevel_boundary() {
        let m = sphere();
        let f = ScalarField::coordinate(&m, 2);
        let a = poly_sweepout_cycle(&m, &f, &[-0.25, 1.0]).unwrap();
        let b = sublevel_boundary(&m, &f, 0.25).unwrap();
        assert_eq!(a.length, b.length);
        assert_eq!(a.loops[0].points, b.loops[0].points);
    }

    #[test]
    fn cubic_gives_three_levels() {
        let m = sphere();
        let f = ScalarField::coordinate(&m, 2);
        let roots = [-0.6, 0.1, 0.5];
        let coeffs = crate::numeric::poly_from_roots(&roots);
        let c = poly_sweepout_cycle(&m, &f, &coeffs).unwrap();
        assert_eq!(c.loops.len(), 3);
        let want: f64 = roots.iter().map(|r| level_length(&m, &f.values, *r)).sum();
        assert!((c.length - want).abs() < 1e-9);
    }

    #[test]
    fn scaling_coefficients_keeps_the_cycle() {
        let m = sphere();
        let f = ScalarField::coordinate(&m, 2);
        let coeffs = [0.05, -0.4, 0.2, 1.0];
        let a = poly_sweepout_cycle(&m, &f, &coeffs).unwrap();
        let scaled: Vec<f64> = coeffs.iter().map(|x| -7.0 * x).collect();
        let b = poly_sweepout_cycle(&m, &f, &scaled).unwrap();
        assert_eq!(a.loops.len(), b.loops.len());
        for (la, lb) in a.loops.iter().zip(&b.loops) {
            for (p, q) in la.points.iter().zip(&lb.points) {
                assert!((p - q).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_coefficients_are_rejected() {
        let m = sphere();
        let f = ScalarField::coordinate(&m, 2);
        assert!(matches!(poly_sweepout_cycle(&m, &f, &[0.0, 0.0]), Err(Error::Parameter(_))));
    }

    #[test]
    fn scaling_fit_on_fake_data() {
        let mk = |g: &dyn Fn(f64) -> f64| -> Vec<WidthEstimate> {
            (1..=12).map(|p| WidthEstimate::upper(p, g(p as f64), "fake", 0)).collect()
        };
        assert!(scaling_fit(&mk(&|_| 3.0)).unwrap().abs() < 1e-12);
        assert!((scaling_fit(&mk(&|p| p)).unwrap() - 1.0).abs() < 1e-12);
        let few: Vec<_> = mk(&|p| p).into_iter().take(9).collect();
        assert!(matches!(scaling_fit(&few), Err(Error::InsufficientData { needed: 10, got: 9 })));
    }

    #[test]
    fn single_point_cover() {
        let m = sphere();
        let f = ScalarField::coordinate(&m, 2);
        let r = point_cover_test(&m, &f, &[17], m.mean_edge_length()).unwrap();
        assert!(r.covered && !r.perturbed);
        assert!(r.distances[0] < m.mean_edge_length());
    }

    #[test]
    fn coincident_values_are_perturbed() {
        let m = sphere();
        let f = ScalarField::coordinate(&m, 2);
        let z0 = f.values[5];
        let twin = (0..m.n_vertices()).find(|&v| v != 5 && f.values[v] == z0).expect("symmetric mesh has twins");
        let r = point_cover_test(&m, &f, &[5, twin], 2.0 * m.mean_edge_length()).unwrap();
        assert!(r.perturbed);
        assert!(r.covered);
        assert!(point_cover_test(&m, &f, &[5, 5], 1.0).is_err());
    }
}
