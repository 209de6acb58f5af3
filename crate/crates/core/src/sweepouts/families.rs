//! Width estimates from sampled families: polynomial sweepouts of a fixed
//! function, spherical-harmonic nodal sets on the round sphere and nodal
//! sets of discrete Laplace eigenfunctions.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::harmonics::{harmonic_basis, harmonic_degree_for, HarmonicSpan};
use super::{level_length, sweepout_levels, LevelIndex, ScalarField, WidthEstimate};
use crate::error::{Error, Result};
use crate::geom::{Ambient, TriMesh};
use crate::spectral::laplace_eigenpairs;

/// Sampling plan for the supremum over a projective coefficient space.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SupSearch {
    /// Directions drawn uniformly from the unit sphere of coefficients.
    pub samples: usize,
    /// Hill-climbing rounds per restart; each round tries [`REFINE_BATCH`]
    /// perturbations and keeps the longest.
    pub refine_steps: usize,
    /// Number of best samples used as hill-climbing starts.
    pub restarts: usize,
    pub seed: u64,
}

impl SupSearch {
    /// `max(500, 100 p)` samples and a short refinement.
    pub fn default_for(p: usize, seed: u64) -> Self {
        Self { samples: (100 * p).max(500), refine_steps: DEFAULT_REFINE, restarts: DEFAULT_RESTARTS, seed }
    }
}

pub const REFINE_BATCH: usize = 8;
pub const DEFAULT_REFINE: usize = 60;
pub const DEFAULT_RESTARTS: usize = 4;

/// Outcome of a supremum search.
#[derive(Debug, Clone)]
pub struct SupResult {
    pub best: f64,
    pub coeffs: Vec<f64>,
    /// Every evaluated length, samples first, then refinement candidates.
    pub lengths: Vec<f64>,
}

fn unit_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Samples `dim`-dimensional unit coefficient vectors, evaluates them in
/// parallel and hill-climbs from the best few. Deterministic for a fixed seed: all
/// random draws are made sequentially and ties resolve to the lowest index.
pub fn sup_search<F>(dim: usize, plan: &SupSearch, eval: F) -> Result<SupResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if dim == 0 || plan.samples == 0 {
        return Err(Error::Parameter("empty coefficient space or no samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let draws: Vec<Vec<f64>> = (0..plan.samples).map(|_| unit_gaussian(&mut rng, dim)).collect();
    let mut lengths: Vec<f64> = draws.par_iter().map(|a| eval(a)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by(|&i, &j| lengths[j].total_cmp(&lengths[i]).then(i.cmp(&j)));
    let (mut best, mut coeffs) = (lengths[order[0]], draws[order[0]].clone());
    for &start in order.iter().take(plan.restarts.max(1)) {
        let (mut cur, mut at) = (lengths[start], draws[start].clone());
        let mut sigma = 0.25;
        let mut fails = 0;
        for _ in 0..plan.refine_steps {
            let cands: Vec<Vec<f64>> = (0..REFINE_BATCH)
                .map(|_| {
                    let step = unit_gaussian(&mut rng, dim);
                    let v: Vec<f64> = at.iter().zip(&step).map(|(a, s)| a + sigma * s).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / n).collect()
                })
                .collect();
            let vals: Vec<f64> = cands.par_iter().map(|a| eval(a)).collect::<Result<_>>()?;
            let j = argmax(&vals);
            lengths.extend_from_slice(&vals);
            if vals[j] > cur {
                cur = vals[j];
                at = cands[j].clone();
                fails = 0;
            } else {
                fails += 1;
                if fails >= 3 {
                    sigma *= 0.5;
                    fails = 0;
                }
            }
        }
        if cur > best {
            best = cur;
            coeffs = at;
        }
    }
    Ok(SupResult { best, coeffs, lengths })
}

/// Seed for degree `q` derived from a base seed.
fn sub_seed(seed: u64, q: usize) -> u64 {
    seed ^ (q as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Sup of cycle length over the polynomial sweepout of `f` of degree `p`.
///
/// The family of degree `p` contains those of lower degree (append zero
/// coefficients), so the estimate for `p` is the maximum of the searches at
/// every degree `q ≤ p`, each with `samples` draws seeded from `(seed, q)`.
/// This makes estimates non-decreasing in `p` for a fixed seed.
pub fn sweepout_sup_length(
    mesh: &TriMesh,
    f: &ScalarField,
    p: usize,
    samples: usize,
    seed: u64,
) -> Result<WidthEstimate> {
    Ok(sweepout_sup_lengths(mesh, f, p, samples, seed)?.pop().expect("p ≥ 1"))
}

/// Estimates for every degree `1..=p_max`.
pub fn sweepout_sup_lengths(
    mesh: &TriMesh,
    f: &ScalarField,
    p_max: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<WidthEstimate>> {
    if p_max == 0 {
        return Err(Error::Parameter("p must be at least 1".into()));
    }
    if samples < 100 * p_max {
        return Err(Error::Parameter(format!("need at least {} samples for p = {p_max}", 100 * p_max)));
    }
    let index = LevelIndex::new(mesh, f);
    let eval =
        |a: &[f64]| -> Result<f64> { Ok(sweepout_levels(f, a)?.iter().map(|&r| index.length(mesh, f, r)).sum()) };
    let mut out = Vec::with_capacity(p_max);
    let mut running = 0.0f64;
    for q in 1..=p_max {
        let plan =
            SupSearch { samples, refine_steps: DEFAULT_REFINE, restarts: DEFAULT_RESTARTS, seed: sub_seed(seed, q) };
        running = running.max(sup_search(q + 1, &plan, eval)?.best);
        out.push(WidthEstimate::upper(q, running, "poly", samples));
    }
    Ok(out)
}

/// Relative slack allowed on the Crofton bound for mesh discretization.
pub const CROFTON_TOL: f64 = 0.02;

#[derive(Debug, Clone, Serialize)]
pub struct HarmonicReport {
    pub estimate: WidthEstimate,
    pub degree: usize,
    /// `2π d`.
    pub crofton_bound: f64,
    pub max_ratio: f64,
    /// Samples longer than `2π d (1 + tol)`.
    pub violations: usize,
    pub evaluated: usize,
}

/// Checks that the mesh is the round unit sphere in R³.
pub fn check_round_sphere(mesh: &TriMesh) -> Result<()> {
    if mesh.ambient != Ambient::R3 {
        return Err(Error::Fixture("harmonic sweepouts need the round sphere in R3".into()));
    }
    let worst = mesh.vertices.iter().map(|p| (p.norm() - 1.0).abs()).fold(0.0, f64::max);
    if worst > 1e-9 {
        return Err(Error::Fixture(format!("mesh is not the unit sphere (radius deviation {worst:.2e})")));
    }
    Ok(())
}

fn combine(basis: &[Vec<f64>], a: &[f64]) -> Vec<f64> {
    let n = basis[0].len();
    let mut g = vec![0.0; n];
    for (col, &c) in basis.iter().zip(a) {
        for v in 0..n {
            g[v] += c * col[v];
        }
    }
    g
}

/// Nodal-set sweepout by spherical harmonics spanning `span`, with the
/// Crofton bound checked on every evaluated member.
pub fn harmonic_sweepout(mesh: &TriMesh, span: HarmonicSpan, plan: &SupSearch, tol: f64) -> Result<HarmonicReport> {
    check_round_sphere(mesh)?;
    let degree = span.degree();
    if degree > 8 {
        return Err(Error::Parameter(format!("degree {degree} above 8")));
    }
    let basis = harmonic_basis(mesh, span);
    if basis.len() < 2 {
        return Err(Error::Parameter("harmonic family needs at least two basis functions".into()));
    }
    let res = sup_search(basis.len(), plan, |a| Ok(level_length(mesh, &combine(&basis, a), 0.0)))?;
    let bound = TAU * degree as f64;
    let max_len = res.lengths.iter().copied().fold(0.0, f64::max);
    let violations = res.lengths.iter().filter(|&&l| l > bound * (1.0 + tol)).count();
    Ok(HarmonicReport {
        estimate: WidthEstimate::upper(basis.len() - 1, res.best, "harmonic", plan.samples),
        degree,
        crofton_bound: bound,
        max_ratio: max_len / bound,
        violations,
        evaluated: res.lengths.len(),
    })
}

/// Harmonic sweepout of all degrees up to `d` on the round sphere.
pub fn harmonic_sweepout_s2(mesh: &TriMesh, d: usize, plan: &SupSearch) -> Result<HarmonicReport> {
    if d == 0 {
        return Err(Error::Parameter("degree must be at least 1".into()));
    }
    harmonic_sweepout(mesh, HarmonicSpan::UpTo(d), plan, CROFTON_TOL)
}

/// Width estimates from the first `p + 1` harmonics for each requested `p`,
/// made monotone by taking running maxima over the sorted `p` list (the
/// families are nested).
pub fn harmonic_family_widths(mesh: &TriMesh, ps: &[usize], samples: usize, seed: u64) -> Result<Vec<WidthEstimate>> {
    let mut ps = ps.to_vec();
    ps.sort_unstable();
    ps.dedup();
    if ps.first() == Some(&0) {
        return Err(Error::Parameter("p must be at least 1".into()));
    }
    if let Some(&p) = ps.last() {
        if harmonic_degree_for(p) > 8 {
            return Err(Error::Parameter(format!("p = {p} needs degree above 8")));
        }
    }
    let mut running = 0.0f64;
    let mut out = Vec::with_capacity(ps.len());
    for p in ps {
        let plan =
            SupSearch { samples, refine_steps: DEFAULT_REFINE, restarts: DEFAULT_RESTARTS, seed: sub_seed(seed, p) };
        let r = harmonic_sweepout(mesh, HarmonicSpan::First(p + 1), &plan, CROFTON_TOL)?;
        running = running.max(r.estimate.estimate);
        out.push(WidthEstimate::upper(p, running, "harmonic", samples));
    }
    Ok(out)
}

/// Sup nodal length over combinations of the first `p + 1` discrete Laplace
/// eigenfunctions.
pub fn eigenfunction_sweepout(mesh: &TriMesh, p: usize, plan: &SupSearch) -> Result<WidthEstimate> {
    let pairs = laplace_eigenpairs(mesh, p + 1)?;
    eigen_family_estimate(mesh, &pairs.vectors, p, plan)
}

fn eigen_family_estimate(mesh: &TriMesh, vectors: &[Vec<f64>], p: usize, plan: &SupSearch) -> Result<WidthEstimate> {
    if p == 0 {
        return Err(Error::Parameter("p must be at least 1".into()));
    }
    let basis = &vectors[..p + 1];
    let res = sup_search(p + 1, plan, |a| Ok(level_length(mesh, &combine(basis, a), 0.0)))?;
    Ok(WidthEstimate::upper(p, res.best, "eigen", plan.samples))
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub p: usize,
    pub eigen: f64,
    pub harmonic: f64,
    pub ratio: f64,
}

/// `ω̄_p` from eigenfunctions against the harmonic-family estimate for
/// `p = 1..=p_max`, on the round sphere. Recorded only; no relation is
/// asserted.
pub fn eigen_harmonic_ratios(mesh: &TriMesh, p_max: usize, samples: usize, seed: u64) -> Result<Vec<RatioRow>> {
    let pairs = laplace_eigenpairs(mesh, p_max + 1)?;
    let ps: Vec<usize> = (1..=p_max).collect();
    let harm = harmonic_family_widths(mesh, &ps, samples, seed)?;
    let mut running = 0.0f64;
    ps.iter()
        .zip(harm)
        .map(|(&p, h)| {
            let plan = SupSearch {
                samples,
                refine_steps: DEFAULT_REFINE,
                restarts: DEFAULT_RESTARTS,
                seed: sub_seed(seed ^ 0xe16e, p),
            };
            running = running.max(eigen_family_estimate(mesh, &pairs.vectors, p, &plan)?.estimate);
            Ok(RatioRow { p, eigen: running, harmonic: h.estimate, ratio: running / h.estimate })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::shapes::ellipsoid;

    fn sphere(res: usize) -> TriMesh {
        ellipsoid(1.0, 1.0, 1.0, res)
    }

    #[test]
    fn sup_search_is_deterministic() {
        let plan = SupSearch { samples: 64, refine_steps: 10, restarts: 2, seed: 3 };
        let f = |a: &[f64]| Ok(a[0] * a[0] + 0.5 * a[1]);
        let a = sup_search(3, &plan, f).unwrap();
        let b = sup_search(3, &plan, f).unwrap();
        assert_eq!(a.lengths, b.lengths);
        // max of 1 - a1² + a1/2 on the circle is 17/16
        assert!(a.best <= 1.0625 + 1e-12 && a.best > 1.05);
    }

    #[test]
    fn linear_sweepout_of_height() {
        let m = sphere(64);
        let f = ScalarField::coordinate(&m, 2);
        let w = sweepout_sup_length(&m, &f, 1, 500, 7).unwrap();
        assert!((w.estimate - TAU).abs() < 0.02 * TAU, "{}", w.estimate);
        assert_eq!(w.direction, "upper");
    }

    #[test]
    fn poly_estimates_are_monotone() {
        let m = sphere(32);
        let f = ScalarField::coordinate(&m, 2);
        let ws = sweepout_sup_lengths(&m, &f, 8, 800, 1).unwrap();
        assert!(ws.windows(2).all(|w| w[1].estimate >= w[0].estimate));
        assert!(sweepout_sup_lengths(&m, &f, 8, 799, 1).is_err());
    }

    #[test]
    fn degree_one_nodal_sets_are_great_circles() {
        let m = sphere(64);
        let plan = SupSearch { samples: 100, refine_steps: 0, restarts: 0, seed: 2 };
        let r = harmonic_sweepout(&m, HarmonicSpan::Exactly(1), &plan, CROFTON_TOL).unwrap();
        let basis = harmonic_basis(&m, HarmonicSpan::Exactly(1));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = unit_gaussian(&mut rng, 3);
            let l = level_length(&m, &combine(&basis, &a), 0.0);
            assert!((l - TAU).abs() < 0.01 * TAU, "{l}");
        }
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn crofton_degree_four() {
        let m = sphere(64);
        let plan = SupSearch { samples: 200, refine_steps: 0, restarts: 0, seed: 11 };
        let r = harmonic_sweepout_s2(&m, 4, &plan).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.estimate.estimate <= 8.0 * std::f64::consts::PI * 1.02);
        assert_eq!(r.estimate.p, 24);
    }

    #[test]
    fn non_round_mesh_is_rejected() {
        let m = ellipsoid(1.0, 1.0, 0.9, 16);
        let plan = SupSearch { samples: 10, refine_steps: 0, restarts: 0, seed: 0 };
        assert!(matches!(harmonic_sweepout_s2(&m, 2, &plan), Err(Error::Fixture(_))));
    }

    #[test]
    fn eigen_family_low_p_is_great_circles() {
        let m = sphere(48);
        for p in [1, 3] {
            let w = eigenfunction_sweepout(&m, p, &SupSearch::default_for(p, 4)).unwrap();
            assert!((w.estimate - TAU).abs() < 0.03 * TAU, "p={p}: {}", w.estimate);
        }
    }
}
