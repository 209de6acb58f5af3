//! Energy experiments: the Willmore energy of the tube-torus family, and
//! descent runs for the Willmore and Möbius energies.
//!
//! Descent gradients are central finite differences of the discrete energy
//! itself, with step `1e-5` times the bounding diameter. Only the terms that
//! a moved vertex influences are re-evaluated. Willmore descent moves
//! vertices along their normals (tangential motion only reparametrises the
//! surface); Möbius descent moves link vertices freely. Steps are accepted
//! only if the energy does not increase, with up to 40 halvings.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::energies::{link_to_r3, linking_number, mobius_energy, mobius_sum, willmore_energy};
use crate::error::{Error, Result};
use crate::geom::curvature::{check_faces, stencils, vertex_curvature_at, Stencil};
use crate::geom::shapes::tube_torus;
use crate::geom::{estimate_curvatures, euler_genus, segments, triangle_area, Ambient, Point, PolyLink, TriMesh};
use crate::numeric::CompensatedSum;
use crate::spectral::{cotan_laplacian, smallest_eigenpairs, EigenOptions};

/// Energies of the tube tori with center radius `c` and tube radius one.
#[derive(Debug, Clone, Serialize)]
pub struct TubeSweep {
    pub ratios: Vec<f64>,
    /// Extrapolated energies.
    pub energies: Vec<f64>,
    /// Raw energies at the coarse and fine resolutions.
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub resolution: usize,
    pub argmin: f64,
    pub min: f64,
}

/// Closed-form energy `π² c² / √(c² - 1)` of the tube torus with ratio `c`.
pub fn tube_energy_exact(c: f64) -> f64 {
    PI * PI * c * c / (c * c - 1.0).sqrt()
}

/// Discrete Willmore energy of one tube torus.
pub fn tube_energy(ratio: f64, resolution: usize) -> Result<f64> {
    if !(ratio > 1.0) {
        return Err(Error::Parameter(format!("ratio R/r = {ratio} must exceed 1")));
    }
    let m = tube_torus(ratio, 1.0, resolution);
    let f = estimate_curvatures(&m)?;
    Ok(willmore_energy(&m, &f)?.value)
}

/// Willmore energy over a grid of ratios `R/r`. Each ratio is evaluated at
/// `resolution` and `3/2` of it, and the two are combined assuming an
/// `h²` error (the curvature fits are second-order accurate).
pub fn tube_family_sweep(ratios: &[f64], resolution: usize) -> Result<TubeSweep> {
    if ratios.is_empty() {
        return Err(Error::Parameter("empty ratio grid".into()));
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 1.0)) {
        return Err(Error::Parameter(format!("ratio R/r = {r} must exceed 1")));
    }
    let fine_res = resolution * 3 / 2;
    let s2 = (fine_res as f64 / resolution as f64).powi(2);
    let pairs: Vec<(f64, f64)> = ratios
        .par_iter()
        .map(|&c| Ok((tube_energy(c, resolution)?, tube_energy(c, fine_res)?)))
        .collect::<Result<_>>()?;
    let coarse: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let fine: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let energies: Vec<f64> = pairs.iter().map(|(c, f)| (s2 * f - c) / (s2 - 1.0)).collect();
    let k = (0..energies.len()).fold(0, |b, i| if energies[i] < energies[b] { i } else { b });
    Ok(TubeSweep { ratios: ratios.to_vec(), argmin: ratios[k], min: energies[k], energies, coarse, fine, resolution })
}

/// Number of sign changes in the forward differences of `values`.
pub fn difference_sign_changes(values: &[f64]) -> usize {
    let signs: Vec<bool> = values.windows(2).map(|w| w[1] - w[0] >= 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// One descent iteration.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    /// Error estimate of the energy at this iterate.
    pub error: f64,
    pub grad_norm: f64,
    /// Step size used to reach the next iterate (0 if none was accepted).
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxSteps,
    Stagnation,
    Collision,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentTrace {
    pub rows: Vec<TraceRow>,
    pub termination: Termination,
    /// Lower bound checked along the run (2π² for genus-one surfaces and
    /// links with |lk| = 1).
    pub lower_bound: Option<f64>,
    /// Iterates with `energy < bound · (1 - error/energy)`.
    pub bound_violations: usize,
    /// FNV-1a hash of the final coordinates, as 16 hex digits.
    pub terminal_id: String,
}

fn configuration_id<'a>(points: impl Iterator<Item = &'a Point>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in points {
        for x in p.iter() {
            for b in x.to_bits().to_le_bytes() {
                h = (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    format!("{h:016x}")
}

impl DescentTrace {
    pub fn initial_energy(&self) -> f64 {
        self.rows.first().map_or(f64::NAN, |r| r.energy)
    }

    pub fn final_energy(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.energy)
    }

    pub fn final_grad_norm(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.grad_norm)
    }

    /// Energies never increase between recorded iterates.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].energy <= w[0].energy)
    }

    /// CSV with header `iter,energy,error,grad_norm,step`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,energy,error,grad_norm,step\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:.12e},{:.6e},{:.6e},{:.6e}\n", r.iter, r.energy, r.error, r.grad_norm, r.step));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DescentOptions {
    pub steps: usize,
    /// Largest initial vertex displacement as a fraction of the mean edge
    /// (meshes) or segment length (links).
    pub step_size: f64,
    /// Stop once the relative gradient norm drops below this.
    pub grad_tol: f64,
    /// Möbius only: resample to uniform speed every this many steps.
    pub resample_every: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { steps: 100, step_size: 0.1, grad_tol: 0.0, resample_every: 50 }
    }
}

/// Relative finite-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Maximum step halvings in the line search.
pub const MAX_HALVINGS: usize = 40;

fn bound_holds(energy: f64, error: f64, bound: Option<f64>) -> bool {
    bound.is_none_or(|b| energy >= b * (1.0 - error / energy))
}

// ---------------------------------------------------------------- Willmore

struct WillmoreLocal<'a> {
    faces: &'a [[usize; 3]],
    ambient: Ambient,
    stencils: Vec<Stencil>,
    vertex_faces: Vec<Vec<usize>>,
}

impl WillmoreLocal<'_> {
    fn term(&self, verts: &[Point], u: usize) -> Result<f64> {
        let (k1, k2, _) = vertex_curvature_at(verts, self.faces, self.ambient, u, &self.stencils[u])?;
        let h = 0.5 * (k1 + k2);
        let w: f64 = self.vertex_faces[u]
            .iter()
            .map(|&f| {
                let [a, b, c] = self.faces[f];
                triangle_area(&verts[a], &verts[b], &verts[c])
            })
            .sum::<f64>()
            / 3.0;
        let density = match self.ambient {
            Ambient::R3 => h * h,
            Ambient::S3 => 1.0 + h * h,
        };
        Ok(density * w)
    }

    /// Sum of the terms that depend on the position of `v`.
    fn local(&self, verts: &[Point], v: usize) -> Result<f64> {
        let mut s = self.term(verts, v)?;
        for &u in &self.stencils[v].two_ring {
            s += self.term(verts, u)?;
        }
        Ok(s)
    }
}

fn displace(x: &Point, n: &Point, t: f64, ambient: Ambient) -> Point {
    let y = x + n * t;
    match ambient {
        Ambient::S3 => y / y.norm(),
        Ambient::R3 => y,
    }
}

/// Normal-direction gradient of the discrete Willmore energy: entry `v` is
/// the derivative of the energy when vertex `v` moves along `normals[v]`.
pub fn willmore_normal_gradient(mesh: &TriMesh, normals: &[Point]) -> Result<Vec<f64>> {
    let h = FD_STEP * mesh.bounding_diameter();
    let ctx = WillmoreLocal {
        faces: &mesh.faces,
        ambient: mesh.ambient,
        stencils: stencils(mesh),
        vertex_faces: mesh.vertex_faces(),
    };
    (0..mesh.n_vertices())
        .into_par_iter()
        .map_init(
            || mesh.vertices.clone(),
            |verts, v| {
                let x = verts[v];
                verts[v] = displace(&x, &normals[v], h, mesh.ambient);
                let plus = ctx.local(verts, v);
                verts[v] = displace(&x, &normals[v], -h, mesh.ambient);
                let minus = ctx.local(verts, v);
                verts[v] = x;
                Ok((plus? - minus?) / (2.0 * h))
            },
        )
        .collect()
}

/// `√(Σ g_v² / w_v) · A / W`: the L² norm of the gradient density made
/// dimensionless.
pub fn relative_gradient_norm(grad: &[f64], weights: &[f64], energy: f64) -> f64 {
    let area: f64 = weights.iter().sum();
    let s: f64 = grad.iter().zip(weights).map(|(g, w)| g * g / w).sum();
    s.sqrt() * area / energy
}

/// Number of Laplace modes spanning the resolved normal variations.
pub const DESCENT_MODES: usize = 48;
/// Ritz residual tolerance for those modes.
pub const MODE_TOL: f64 = 1e-4;

/// Smooth normal variations of a mesh: the lowest Laplace eigenfunctions,
/// re-orthonormalised against the current vertex weights.
///
/// The curvature fits make the discrete energy rough at the grid scale: its
/// gradient carries an oscillating component whose density grows as the mesh
/// is refined, while its pairing with any fixed smooth variation converges.
/// Descent and stationarity are therefore measured on the span of these
/// modes.
pub struct ResolvedModes {
    modes: Vec<Vec<f64>>,
}

impl ResolvedModes {
    pub fn new(mesh: &TriMesh) -> Result<Self> {
        let k = DESCENT_MODES.min(mesh.n_vertices() / 10).max(1);
        let (stiff, mass) = cotan_laplacian(mesh);
        // Only the span matters, and it is smooth well before the Ritz
        // vectors converge.
        let opts = EigenOptions { tol: MODE_TOL, guard: k, ..EigenOptions::default() };
        let shift = -4.0 * PI / mesh.area();
        Ok(Self { modes: smallest_eigenpairs(&stiff, &mass, k, shift, &opts)?.vectors })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Weighted-orthonormal basis for the given vertex weights.
    fn basis(&self, weights: &[f64]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.modes.len());
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(weights).map(|((x, y), w)| x * y * w).sum::<f64>();
        for m in &self.modes {
            let mut v = m.clone();
            for _ in 0..2 {
                for q in &out {
                    let c = dot(&v, q);
                    v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let n = dot(&v, &v).sqrt();
            if n > 1e-12 {
                v.iter_mut().for_each(|x| *x /= n);
                out.push(v);
            }
        }
        out
    }

    /// Projects a gradient (vertex derivatives `g_v`) onto the modes and
    /// returns the projected gradient density and its weighted L² norm.
    pub fn project(&self, grad: &[f64], weights: &[f64]) -> (Vec<f64>, f64) {
        let mut density = vec![0.0; grad.len()];
        let mut norm2 = 0.0;
        for q in self.basis(weights) {
            let c: f64 = q.iter().zip(grad).map(|(a, b)| a * b).sum();
            norm2 += c * c;
            density.iter_mut().zip(&q).for_each(|(d, y)| *d += c * y);
        }
        (density, norm2.sqrt())
    }
}

struct WillmoreState {
    energy: f64,
    error: f64,
    direction: Vec<f64>,
    grad_norm: f64,
    normals: Vec<Point>,
}

fn willmore_state(mesh: &TriMesh, modes: &ResolvedModes) -> Result<WillmoreState> {
    let field = estimate_curvatures(mesh)?;
    let e = willmore_energy(mesh, &field)?;
    let grad = willmore_normal_gradient(mesh, &field.normals)?;
    let (direction, norm) = modes.project(&grad, &field.weights);
    let area: f64 = field.weights.iter().sum();
    Ok(WillmoreState {
        energy: e.value,
        error: e.error,
        direction,
        grad_norm: norm * area / e.value,
        normals: field.normals,
    })
}

fn willmore_value(mesh: &TriMesh) -> Result<f64> {
    check_faces(mesh)?;
    let field = estimate_curvatures(mesh)?;
    Ok(willmore_energy(mesh, &field)?.value)
}

/// Gradient descent on the discrete Willmore energy along the resolved
/// normal variations ([`ResolvedModes`]). The reported gradient norm is that
/// of the projected gradient density, `‖P g‖ · A / W`. Returns the trace and
/// the final mesh.
pub fn willmore_descent(mesh: &TriMesh, opts: &DescentOptions) -> Result<(DescentTrace, TriMesh)> {
    mesh.validate_closed()?;
    let lower_bound = (euler_genus(mesh)? == 1).then_some(2.0 * PI * PI);
    let modes = ResolvedModes::new(mesh)?;
    let mut cur = mesh.clone();
    let mut st = willmore_state(&cur, &modes)?;
    let peak = st.direction.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut tau = if peak > 0.0 { opts.step_size * cur.mean_edge_length() / peak } else { 0.0 };
    let mut rows = Vec::new();
    let mut violations = 0;
    let mut termination = Termination::MaxSteps;
    for iter in 0..=opts.steps {
        if !bound_holds(st.energy, st.error, lower_bound) {
            violations += 1;
        }
        rows.push(TraceRow { iter, energy: st.energy, error: st.error, grad_norm: st.grad_norm, step: 0.0 });
        if !st.grad_norm.is_finite() {
            return Err(Error::Numeric("non-finite gradient".into()));
        }
        if st.grad_norm < opts.grad_tol {
            termination = Termination::Converged;
            break;
        }
        if iter == opts.steps {
            break;
        }
        let mut accepted = None;
        let mut t = tau;
        for _ in 0..=MAX_HALVINGS {
            let cand = TriMesh {
                vertices: cur
                    .vertices
                    .iter()
                    .zip(&st.normals)
                    .zip(&st.direction)
                    .map(|((x, n), d)| displace(x, n, -t * d, cur.ambient))
                    .collect(),
                faces: cur.faces.clone(),
                ambient: cur.ambient,
            };
            if let Ok(e) = willmore_value(&cand) {
                if e <= st.energy {
                    accepted = Some(cand);
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => {
                rows.last_mut().expect("row pushed").step = t;
                cur = next;
                st = willmore_state(&cur, &modes)?;
                tau = t * 2.0;
            }
            None => {
                termination = Termination::Stagnation;
                break;
            }
        }
    }
    let terminal_id = configuration_id(cur.vertices.iter());
    Ok((DescentTrace { rows, termination, lower_bound, bound_violations: violations, terminal_id }, cur))
}

// ------------------------------------------------------------------ Möbius

/// Contribution of the segments incident to vertex `i` of `curve` against
/// all segments of `other`.
fn mobius_local(curve: &[Point], i: usize, other: &[(Point, Point)]) -> f64 {
    let n = curve.len();
    let mut s = CompensatedSum::new();
    for (a, b) in [((i + n - 1) % n, i), (i, (i + 1) % n)] {
        let m1 = (curve[a] + curve[b]) * 0.5;
        let l1 = (curve[b] - curve[a]).norm();
        for (m2, d2) in other {
            s.add(l1 * d2.norm() / (m1 - m2).norm_squared());
        }
    }
    s.value()
}

/// Finite-difference gradient of [`mobius_sum`] with respect to every vertex
/// coordinate, for both components.
pub fn mobius_gradient(link: &PolyLink) -> (Vec<Point>, Vec<Point>) {
    let h = FD_STEP * link.diameter();
    let grad = |curve: &[Point], other: &[Point]| -> Vec<Point> {
        let segs = segments(other);
        (0..curve.len())
            .into_par_iter()
            .map_init(
                || curve.to_vec(),
                |c, i| {
                    let mut g = Point::zeros();
                    let x = c[i];
                    for k in 0..link.dim {
                        c[i][k] = x[k] + h;
                        let plus = mobius_local(c, i, &segs);
                        c[i][k] = x[k] - h;
                        let minus = mobius_local(c, i, &segs);
                        c[i][k] = x[k];
                        g[k] = (plus - minus) / (2.0 * h);
                    }
                    g
                },
            )
            .collect()
    };
    (grad(&link.gamma1, &link.gamma2), grad(&link.gamma2, &link.gamma1))
}

fn dual_lengths(curve: &[Point]) -> Vec<f64> {
    let n = curve.len();
    (0..n)
        .map(|i| 0.5 * ((curve[i] - curve[(i + n - 1) % n]).norm() + (curve[(i + 1) % n] - curve[i]).norm()))
        .collect()
}

/// `√(Σ |g_i|² / ℓ_i) · L / E` with `ℓ_i` the dual lengths and `L` the total
/// length.
pub fn link_relative_gradient_norm(link: &PolyLink, grad: &(Vec<Point>, Vec<Point>), energy: f64) -> f64 {
    let mut s = 0.0;
    let mut len = 0.0;
    for (curve, g) in [(&link.gamma1, &grad.0), (&link.gamma2, &grad.1)] {
        let dl = dual_lengths(curve);
        len += dl.iter().sum::<f64>();
        s += g.iter().zip(&dl).map(|(g, l)| g.norm_squared() / l).sum::<f64>();
    }
    s.sqrt() * len / energy
}

/// Resamples a closed polyline to `n` points equally spaced in arclength,
/// starting at its first vertex.
pub fn resample_uniform(curve: &[Point], n: usize) -> Vec<Point> {
    let m = curve.len();
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for i in 0..m {
        cum.push(cum[i] + (curve[(i + 1) % m] - curve[i]).norm());
    }
    let total = cum[m];
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        let s = total * k as f64 / n as f64;
        while seg + 1 < m && cum[seg + 1] <= s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        out.push(curve[seg] + (curve[(seg + 1) % m] - curve[seg]) * t);
    }
    out
}

fn link_linking(link: &PolyLink) -> Result<i64> {
    Ok(linking_number(&link_to_r3(link)?)?.value)
}

/// Gradient descent on the Möbius cross energy of a link in R³. Links on S³
/// are first projected stereographically (the energy is unchanged); in R⁴
/// the components could simply be pulled apart. Returns the trace and the
/// final link.
pub fn mobius_descent(link: &PolyLink, opts: &DescentOptions) -> Result<(DescentTrace, PolyLink)> {
    let mut cur = link_to_r3(link)?;
    let lk = link_linking(&cur)?;
    let lower_bound = (lk.abs() == 1).then_some(2.0 * PI * PI);
    let collide = |l: &PolyLink| l.min_distance() < 1e-3 * l.diameter();
    let report = mobius_energy(&cur)?;
    let (mut energy, mut error) = (report.value, report.error);
    let mut grad = mobius_gradient(&cur);
    let seg_len = cur.length() / (cur.gamma1.len() + cur.gamma2.len()) as f64;
    let mut tau = {
        let peak = [(&cur.gamma1, &grad.0), (&cur.gamma2, &grad.1)]
            .iter()
            .flat_map(|(c, g)| dual_lengths(c).into_iter().zip(g.iter()).map(|(l, g)| g.norm() / l).collect::<Vec<_>>())
            .fold(0.0, f64::max);
        if peak > 0.0 {
            opts.step_size * seg_len / peak
        } else {
            0.0
        }
    };
    let mut rows = Vec::new();
    let mut violations = 0;
    let mut termination = Termination::MaxSteps;
    for iter in 0..=opts.steps {
        let gnorm = link_relative_gradient_norm(&cur, &grad, energy);
        if !bound_holds(energy, error, lower_bound) {
            violations += 1;
        }
        rows.push(TraceRow { iter, energy, error, grad_norm: gnorm, step: 0.0 });
        if gnorm < opts.grad_tol {
            termination = Termination::Converged;
            break;
        }
        if iter == opts.steps {
            break;
        }
        let step_curve = |c: &[Point], g: &[Point], t: f64| -> Vec<Point> {
            let dl = dual_lengths(c);
            c.iter().zip(g).zip(&dl).map(|((x, g), l)| x - g * (t / l)).collect()
        };
        let mut accepted = None;
        let mut t = tau;
        for _ in 0..=MAX_HALVINGS {
            let cand = PolyLink {
                gamma1: step_curve(&cur.gamma1, &grad.0, t),
                gamma2: step_curve(&cur.gamma2, &grad.1, t),
                dim: cur.dim,
            };
            if cand.min_distance() > 0.0 {
                let e = mobius_sum(&cand);
                if e <= energy {
                    accepted = Some((cand, e));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((mut next, mut e)) = accepted else {
            termination = Termination::Stagnation;
            break;
        };
        rows.last_mut().expect("row pushed").step = t;
        tau = t * 2.0;
        if opts.resample_every > 0 && (iter + 1) % opts.resample_every == 0 {
            let re = PolyLink {
                gamma1: resample_uniform(&next.gamma1, next.gamma1.len()),
                gamma2: resample_uniform(&next.gamma2, next.gamma2.len()),
                dim: next.dim,
            };
            if re.min_distance() > 0.0 {
                let er = mobius_sum(&re);
                if er <= e {
                    next = re;
                    e = er;
                }
            }
        }
        cur = next;
        if collide(&cur) {
            let r = mobius_energy(&cur)?;
            rows.push(TraceRow { iter: iter + 1, energy: e, error: r.error, grad_norm: f64::NAN, step: 0.0 });
            termination = Termination::Collision;
            break;
        }
        energy = e;
        error = mobius_energy(&cur)?.error;
        grad = mobius_gradient(&cur);
    }
    let terminal_id = configuration_id(cur.gamma1.iter().chain(&cur.gamma2));
    Ok((DescentTrace { rows, termination, lower_bound, bound_violations: violations, terminal_id }, cur))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::shapes::{
        clifford_torus, coaxial_circles, ellipsoid, hopf_link, icosphere, perturbed_link, perturbed_mesh,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tube_energy_rejects_bad_ratio() {
        assert!(matches!(tube_energy(1.0, 16), Err(Error::Parameter(_))));
        assert!(tube_family_sweep(&[1.5, 0.9], 16).is_err());
    }

    #[test]
    fn exact_tube_curve_minimum() {
        let e = tube_energy_exact(std::f64::consts::SQRT_2);
        assert!((e - 2.0 * PI * PI).abs() < 1e-12);
        assert!(tube_energy_exact(1.41) > e && tube_energy_exact(1.42) > e);
    }

    #[test]
    fn sign_changes() {
        assert_eq!(difference_sign_changes(&[3.0, 2.0, 1.0, 2.0, 4.0]), 1);
        assert_eq!(difference_sign_changes(&[1.0, 2.0, 1.0, 2.0]), 2);
    }

    #[test]
    fn willmore_gradient_matches_directional_difference() {
        let m = ellipsoid(1.0, 0.8, 0.6, 16);
        let f = estimate_curvatures(&m).unwrap();
        let g = willmore_normal_gradient(&m, &f.normals).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dir: Vec<f64> = (0..m.n_vertices()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let eps = 1e-5;
        let shift = |s: f64| {
            let v = m.vertices.iter().zip(&f.normals).zip(&dir).map(|((x, n), d)| x + n * (s * d)).collect();
            willmore_value(&TriMesh { vertices: v, faces: m.faces.clone(), ambient: m.ambient }).unwrap()
        };
        let fd = (shift(eps) - shift(-eps)) / (2.0 * eps);
        let lin: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        assert!((fd - lin).abs() < 1e-4 * fd.abs().max(1e-3), "{fd} vs {lin}");
    }

    #[test]
    fn mobius_gradient_matches_directional_difference() {
        let l = perturbed_link(&coaxial_circles(1.0, 24), 0.1, 5).unwrap();
        let g = mobius_gradient(&l);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d1: Vec<Point> = (0..24).map(|_| Point::new(rng.random(), rng.random(), rng.random(), 0.0)).collect();
        let d2: Vec<Point> = (0..24).map(|_| Point::new(rng.random(), rng.random(), rng.random(), 0.0)).collect();
        let eps = 1e-6;
        let shift = |s: f64| {
            let a = l.gamma1.iter().zip(&d1).map(|(x, d)| x + d * s).collect();
            let b = l.gamma2.iter().zip(&d2).map(|(x, d)| x + d * s).collect();
            mobius_sum(&PolyLink { gamma1: a, gamma2: b, dim: 3 })
        };
        let fd = (shift(eps) - shift(-eps)) / (2.0 * eps);
        let lin: f64 = g.0.iter().zip(&d1).chain(g.1.iter().zip(&d2)).map(|(a, b)| a.dot(b)).sum();
        assert!((fd - lin).abs() < 1e-6 * fd.abs().max(1.0), "{fd} vs {lin}");
    }

    #[test]
    fn resampling_preserves_count_and_closure() {
        let l = perturbed_link(&hopf_link(32), 0.1, 1).unwrap();
        let r = resample_uniform(&l.gamma1, 32);
        assert_eq!(r.len(), 32);
        assert_eq!(r[0], l.gamma1[0]);
        let lens: Vec<f64> = (0..32).map(|i| (r[(i + 1) % 32] - r[i]).norm()).collect();
        let (lo, hi) = lens.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo < 1.2);
    }

    #[test]
    fn clifford_descent_is_monotone() {
        let m = clifford_torus(16);
        let (trace, _) = willmore_descent(&m, &DescentOptions { steps: 3, ..Default::default() }).unwrap();
        assert!(trace.is_monotone());
        assert_eq!(trace.lower_bound, Some(2.0 * PI * PI));
        assert_eq!(trace.bound_violations, 0);
    }

    #[test]
    fn perturbed_tube_descends_above_the_bound() {
        let m = perturbed_mesh(&tube_torus(1.8, 1.0, 24), 0.05, 7);
        let (trace, out) = willmore_descent(&m, &DescentOptions { steps: 4, ..Default::default() }).unwrap();
        assert!(trace.is_monotone());
        assert!(trace.final_energy() < trace.initial_energy());
        assert!(trace.final_energy() >= 2.0 * PI * PI * 0.99);
        assert_eq!(trace.bound_violations, 0);
        assert_eq!(out.faces, m.faces);
        assert_eq!(trace.terminal_id.len(), 16);
    }

    #[test]
    fn round_sphere_is_stationary() {
        let (trace, _) =
            willmore_descent(&icosphere(1.0, 40), &DescentOptions { steps: 0, ..Default::default() }).unwrap();
        assert!(trace.final_grad_norm() < 1e-3, "{}", trace.final_grad_norm());
        assert_eq!(trace.lower_bound, None);
    }

    #[test]
    fn stereographic_hopf_is_stationary() {
        let l = link_to_r3(&hopf_link(512)).unwrap();
        let (trace, _) = mobius_descent(&l, &DescentOptions { steps: 0, ..Default::default() }).unwrap();
        assert!(trace.final_grad_norm() < 1e-3);
        assert!((trace.final_energy() / (2.0 * PI * PI) - 1.0).abs() < 0.01);
    }

    #[test]
    fn split_link_energy_decreases() {
        let l = coaxial_circles(1.5, 24);
        let (trace, out) = mobius_descent(&l, &DescentOptions { steps: 20, ..Default::default() }).unwrap();
        assert!(trace.is_monotone());
        assert!(trace.final_energy() < trace.initial_energy());
        assert_eq!(link_linking(&out).unwrap(), 0);
        assert_eq!(trace.lower_bound, None);
    }
}
