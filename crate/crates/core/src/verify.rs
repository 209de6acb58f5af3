//! The acceptance suite: thirteen end-to-end checks of closed-form values,
//! inequalities and reproducibility, shared by `cel verify-all` and the
//! `acceptance` test target.
//!
//! Every check is deterministic. Reports carry only PASS/FAIL and fixed
//! precision numbers; wall-clock times are kept separately so that the
//! rendered table is byte-identical between runs.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::canonical::{hk_verify, t_grid, v_directions, v_grid, HK_TOL, HK_VMAX};
use crate::conformal::{radial_limit_check, ConformalDilation};
use crate::energies::{
    energy_linking_bound_check, gauss_area_energy_check, gauss_map_torus, link_to_r3, mobius_energy, willmore_energy,
};
use crate::error::{Error, Result};
use crate::geom::shapes::{
    clifford_torus, ellipsoid, geodesic_sphere, hopf_link, icosphere, perturbed_link, perturbed_mesh, s3_ellipsoid,
    torus_link, tube_torus,
};
use crate::geom::{estimate_curvatures, Point, PolyLink, TriMesh};
use crate::optimize::{mobius_descent, tube_family_sweep, willmore_descent, DescentOptions, DescentTrace};
use crate::spectra::{jacobi_index_analytic, jacobi_index_numeric, IndexSurface};
use crate::spectral::laplace_minmax;
use crate::sweepouts::{harmonic_family_widths, harmonic_sweepout, scaling_fit, HarmonicSpan, SupSearch, CROFTON_TOL};

const TWO_PI_SQ: f64 = 2.0 * PI * PI;
const FOUR_PI: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Fast,
    Full,
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Self::Fast),
            "full" => Ok(Self::Full),
            other => Err(Error::Parameter(format!("unknown profile {other:?} (expected fast or full)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyConfig {
    pub profile: Profile,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { profile: Profile::Fast, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// Measured values behind the verdict.
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

pub const CRITERIA: [&str; 13] = [
    "willmore closed forms",
    "tube family minimum",
    "mobius closed forms and 4pi|lk|",
    "conformal invariance",
    "gauss map of links",
    "heintze-karcher",
    "radial limit",
    "jacobi indices",
    "crofton bound",
    "width scaling",
    "laplace spectrum",
    "descent properties",
    "reproducibility",
];

/// Collects sub-check outcomes into one verdict and a detail line.
#[derive(Default)]
struct Checks {
    ok: bool,
    parts: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self { ok: true, parts: Vec::new() }
    }

    fn check(&mut self, pass: bool, what: String) {
        self.ok &= pass;
        self.parts.push(if pass { what } else { format!("FAILED {what}") });
    }

    fn fail(&mut self, e: Error) {
        self.ok = false;
        self.parts.push(format!("error: {e}"));
    }

    fn done(self) -> (bool, String) {
        (self.ok, self.parts.join("; "))
    }
}

fn rel(value: f64, exact: f64) -> f64 {
    (value - exact).abs() / exact
}

fn willmore(mesh: &TriMesh) -> Result<f64> {
    Ok(willmore_energy(mesh, &estimate_curvatures(mesh)?)?.value)
}

fn within_budget(c: &mut Checks, start: Instant, budget: Duration, what: &str) {
    let ok = start.elapsed() <= budget;
    c.check(ok, format!("{what} within {}s", budget.as_secs()));
}

type Fixture = (&'static str, Box<dyn Fn() -> TriMesh>, f64);

fn c1_willmore(_: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let pole = Point::new(0.0, 0.0, 0.0, 1.0);
    let cases: Vec<Fixture> = vec![
        ("sphere", Box::new(|| icosphere(1.0, 96)), FOUR_PI),
        ("tube sqrt2:1", Box::new(|| tube_torus(SQRT_2, 1.0, 96)), TWO_PI_SQ),
        ("clifford", Box::new(|| clifford_torus(96)), TWO_PI_SQ),
        ("geodesic pi/6", Box::new(move || geodesic_sphere(&pole, PI / 6.0, 96)), FOUR_PI),
        ("geodesic pi/3", Box::new(move || geodesic_sphere(&pole, PI / 3.0, 96)), FOUR_PI),
        ("geodesic pi/2", Box::new(move || geodesic_sphere(&pole, PI / 2.0, 96)), FOUR_PI),
    ];
    for (name, make, exact) in cases {
        let start = Instant::now();
        let w = willmore(&make())?;
        c.check(rel(w, exact) <= 0.01, format!("{name} W/exact = {:.5}", w / exact));
        within_budget(&mut c, start, Duration::from_secs(10), name);
    }
    Ok(c)
}

fn c2_tube(_: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let start = Instant::now();
    let grid: Vec<f64> = (0..100).map(|k| 1.1 + 1.9 * k as f64 / 99.0).collect();
    let s = tube_family_sweep(&grid, 64)?;
    c.check((s.argmin - SQRT_2).abs() <= 0.02, format!("argmin = {:.4}", s.argmin));
    c.check(rel(s.min, TWO_PI_SQ) <= 0.01, format!("min/2pi^2 = {:.5}", s.min / TWO_PI_SQ));
    let changes = crate::optimize::difference_sign_changes(&s.energies);
    c.check(changes == 1, format!("difference sign changes = {changes}"));
    let last = *s.energies.last().expect("nonempty grid");
    c.check(last > TWO_PI_SQ, format!("W(3)/2pi^2 = {:.4}", last / TWO_PI_SQ));
    within_budget(&mut c, start, Duration::from_secs(60), "sweep");
    Ok(c)
}

fn c3_mobius(cfg: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let start = Instant::now();
    let e = mobius_energy(&hopf_link(256))?;
    c.check(rel(e.value, TWO_PI_SQ) <= 0.01, format!("E(hopf 256)/2pi^2 = {:.5}", e.value / TWO_PI_SQ));
    let hopf = hopf_link(128);
    let t24 = torus_link(2, 4, 128)?;
    let mut links = vec![("hopf".to_string(), hopf.clone()), ("torus(2,4)".to_string(), t24.clone())];
    for k in 0..20u64 {
        let base = if k % 2 == 0 { &hopf } else { &t24 };
        links.push((format!("perturbed #{k}"), perturbed_link(base, 0.1, cfg.seed.wrapping_add(k))?));
    }
    let mut worst = f64::INFINITY;
    let mut failed = Vec::new();
    for (name, l) in &links {
        let b = energy_linking_bound_check(l)?;
        worst = worst.min(b.margin + b.error);
        if !b.holds {
            failed.push(name.clone());
        }
    }
    c.check(failed.is_empty(), format!("E >= 4pi|lk| on {} links, min margin+err = {worst:.4}", links.len()));
    if !failed.is_empty() {
        c.check(false, format!("violations: {}", failed.join(",")));
    }
    within_budget(&mut c, start, Duration::from_secs(30), "bounds");
    Ok(c)
}

fn c4_conformal(cfg: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let (mres, lres) = match cfg.profile {
        Profile::Fast => (32, 64),
        Profile::Full => (48, 128),
    };
    let dir = v_directions()[2];
    let radii = [0.1, 0.3, 0.5];
    let mesh_dev = |res: usize| -> Result<f64> {
        let m = clifford_torus(res);
        let w0 = willmore(&m)?;
        let mut worst: f64 = 0.0;
        for r in radii {
            let f = ConformalDilation::new(dir * r)?;
            worst = worst.max(rel(willmore(&f.apply_mesh(&m)?)?, w0));
        }
        Ok(worst)
    };
    let link_dev = |n: usize| -> Result<f64> {
        let l = perturbed_link(&hopf_link(n), 0.15, cfg.seed)?;
        let e0 = mobius_energy(&l)?.value;
        let mut worst: f64 = 0.0;
        for r in radii {
            let f = ConformalDilation::new(dir * r)?;
            let g1 = l.gamma1.iter().map(|x| f.apply(x)).collect::<Result<Vec<_>>>()?;
            let g2 = l.gamma2.iter().map(|x| f.apply(x)).collect::<Result<Vec<_>>>()?;
            let moved = link_to_r3(&PolyLink::new(g1, g2, 4)?)?;
            worst = worst.max(rel(mobius_energy(&moved)?.value, e0));
        }
        Ok(worst)
    };
    for (name, coarse, fine) in
        [("willmore", mesh_dev(mres)?, mesh_dev(2 * mres)?), ("mobius", link_dev(lres)?, link_dev(2 * lres)?)]
    {
        c.check(coarse <= 0.02, format!("{name} max deviation {coarse:.2e}"));
        c.check(fine <= 0.01, format!("{name} at doubled resolution {fine:.2e}"));
        c.check(fine <= coarse + 1e-9, format!("{name} deviation does not grow"));
    }
    Ok(c)
}

fn c5_gauss(cfg: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let hopf = hopf_link(128);
    let t = gauss_map_torus(&hopf)?;
    let worst = t.vertices.iter().map(|x| (x[0] * x[0] + x[1] * x[1] - 0.5).abs()).fold(0.0, f64::max);
    c.check(worst <= 1e-12, format!("hopf gauss map |x1^2+x2^2-1/2| <= {worst:.1e}"));
    let r = gauss_area_energy_check(&hopf)?;
    c.check((r.ratio - 1.0).abs() <= 0.01, format!("hopf area/E = {:.5}", r.ratio));
    let mut max_ratio: f64 = 0.0;
    for k in 0..10u64 {
        let l = perturbed_link(&hopf, 0.2, cfg.seed.wrapping_add(100 + k))?;
        max_ratio = max_ratio.max(gauss_area_energy_check(&l)?.ratio);
    }
    c.check(max_ratio <= 1.01, format!("10 random links max area/E = {max_ratio:.5}"));
    Ok(c)
}

fn c6_hk(cfg: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let res = match cfg.profile {
        Profile::Fast => 96,
        Profile::Full => 128,
    };
    let vs = v_grid(HK_VMAX, 5);
    let ts = t_grid(33);
    let pole = Point::new(0.0, 0.0, 0.0, 1.0);
    for (name, mesh) in [
        ("clifford", clifford_torus(res)),
        ("geodesic pi/3", geodesic_sphere(&pole, PI / 3.0, res)),
        ("s3 ellipsoid", s3_ellipsoid(1.0, 0.7, 0.5, res)),
    ] {
        let r = hk_verify(&mesh, &vs, &ts)?;
        c.check(r.ratio <= 1.0 + HK_TOL, format!("{name} max area/W = {:.5}", r.ratio));
        c.check(r.pointwise_violations == 0, format!("{name} pointwise violations = {}", r.pointwise_violations));
    }
    Ok(c)
}

fn c7_radial(cfg: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let res = match cfg.profile {
        Profile::Fast => 32,
        Profile::Full => 64,
    };
    let s = [0.9, 0.99, 0.999];
    for (name, mesh) in [("clifford", clifford_torus(res)), ("s3 ellipsoid", s3_ellipsoid(1.0, 0.7, 0.5, res))] {
        let field = estimate_curvatures(&mesh)?;
        let r = radial_limit_check(&mesh, &field, 0, &s)?;
        let d: Vec<String> = r.distances.iter().map(|d| format!("{d:.3e}")).collect();
        c.check(r.decreasing, format!("{name} distances [{}]", d.join(", ")));
    }
    Ok(c)
}

fn c8_index(cfg: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let start = Instant::now();
    let a_s = jacobi_index_analytic(IndexSurface::GreatSphere);
    let a_c = jacobi_index_analytic(IndexSurface::CliffordTorus);
    c.check(a_s.index == 1, format!("analytic great sphere index {}", a_s.index));
    c.check(a_c.index == 5, format!("analytic clifford index {}", a_c.index));
    let resolutions: &[usize] = match cfg.profile {
        Profile::Fast => &[64],
        Profile::Full => &[64, 128],
    };
    let pole = Point::new(0.0, 0.0, 0.0, 1.0);
    for &res in resolutions {
        for (name, mesh, want) in [
            ("great sphere", geodesic_sphere(&pole, PI / 2.0, res), a_s.index),
            ("clifford", clifford_torus(res), a_c.index),
        ] {
            let field = estimate_curvatures(&mesh)?;
            let r = jacobi_index_numeric(&mesh, &field, name)?;
            c.check(r.index == want, format!("numeric {name} res {res} index {}", r.index));
        }
    }
    if cfg.profile == Profile::Fast {
        within_budget(&mut c, start, Duration::from_secs(60), "indices");
    }
    Ok(c)
}

fn c9_crofton(cfg: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let mesh = ellipsoid(1.0, 1.0, 1.0, 64);
    let mut worst: f64 = 0.0;
    for d in 1..=6 {
        let plan = SupSearch { samples: 200, refine_steps: 0, restarts: 1, seed: cfg.seed.wrapping_add(d as u64) };
        let r = harmonic_sweepout(&mesh, HarmonicSpan::UpTo(d), &plan, CROFTON_TOL)?;
        worst = worst.max(r.max_ratio);
        c.check(r.violations == 0, format!("d={d}: {} nodal sets, max length/2pi d = {:.4}", r.evaluated, r.max_ratio));
    }
    c.check(worst <= 1.0 + CROFTON_TOL, format!("overall max {worst:.4}"));
    Ok(c)
}

/// Harmonic-family width estimates for `p = 1..=80` and their log-log slope.
pub fn width_scaling(profile: Profile, seed: u64) -> Result<(Vec<crate::sweepouts::WidthEstimate>, f64)> {
    let res = match profile {
        Profile::Fast => 64,
        Profile::Full => 96,
    };
    let mesh = ellipsoid(1.0, 1.0, 1.0, res);
    let ps: Vec<usize> = (1..=80).collect();
    let est = harmonic_family_widths(&mesh, &ps, 200, seed)?;
    let slope = scaling_fit(&est)?;
    Ok((est, slope))
}

fn c10_scaling(cfg: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let start = Instant::now();
    let (est, slope) = width_scaling(cfg.profile, cfg.seed)?;
    c.check((slope - 0.5).abs() <= 0.15, format!("slope = {slope:.4} over p = 1..{}", est.len()));
    let monotone = est.windows(2).all(|w| w[1].estimate >= w[0].estimate);
    c.check(monotone, "estimates non-decreasing in p".to_string());
    within_budget(&mut c, start, Duration::from_secs(300), "widths");
    Ok(c)
}

fn c11_spectrum(cfg: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let res = match cfg.profile {
        Profile::Fast => 64,
        Profile::Full => 96,
    };
    let close =
        |got: &[f64], want: &[f64]| got.iter().zip(want).map(|(g, w)| (g - w).abs() / w.max(1.0)).fold(0.0, f64::max);
    let sphere = laplace_minmax(&icosphere(1.0, res), 9)?;
    let want_s = [0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0];
    let e = close(&sphere, &want_s);
    c.check(e <= 0.05, format!("round sphere max rel error {e:.4}"));
    let torus = laplace_minmax(&clifford_torus(res / 2), 9)?;
    let want_t = [0.0, 2.0, 2.0, 2.0, 2.0, 4.0, 4.0, 4.0, 4.0];
    let e = close(&torus, &want_t);
    c.check(e <= 0.05, format!("flat torus max rel error {e:.4}"));
    Ok(c)
}

fn trace_summary(name: &str, t: &DescentTrace) -> String {
    format!(
        "{name}: {} rows, E {:.5} -> {:.5} (x 1/2pi^2), |g| {:.2e}, {:?}",
        t.rows.len(),
        t.initial_energy() / TWO_PI_SQ,
        t.final_energy() / TWO_PI_SQ,
        t.final_grad_norm(),
        t.termination
    )
}

fn descent_invariants(c: &mut Checks, name: &str, t: &DescentTrace) {
    c.check(t.is_monotone(), format!("{name} monotone"));
    c.check(t.bound_violations == 0, format!("{name} bound violations = {}", t.bound_violations));
    c.check(
        t.rows.iter().all(|r| r.grad_norm.is_finite() || r.iter + 1 == t.rows.len()),
        format!("{name} finite gradients"),
    );
}

/// The perturbed-Hopf Möbius descent used by the descent and
/// reproducibility checks.
pub fn hopf_descent(seed: u64) -> Result<DescentTrace> {
    let l = perturbed_link(&hopf_link(64), 0.15, seed)?;
    Ok(mobius_descent(&l, &DescentOptions { steps: 2000, ..Default::default() })?.0)
}

fn c12_descent(cfg: &VerifyConfig) -> Result<Checks> {
    let mut c = Checks::new();
    let start_only = DescentOptions { steps: 0, ..Default::default() };

    let (t, _) = willmore_descent(&clifford_torus(32), &DescentOptions { steps: 3, ..Default::default() })?;
    c.check(t.rows[0].grad_norm < 1e-3, trace_summary("clifford", &t));
    c.check(rel(t.final_energy(), TWO_PI_SQ) <= 0.01, "clifford energy stays 2pi^2 +- 1%".into());
    descent_invariants(&mut c, "clifford", &t);

    let (t, _) = willmore_descent(&icosphere(1.0, 96), &start_only)?;
    c.check(t.rows[0].grad_norm < 1e-3, format!("sphere |g| {:.2e}", t.rows[0].grad_norm));
    c.check(rel(t.initial_energy(), FOUR_PI) <= 0.01, format!("sphere E/4pi {:.5}", t.initial_energy() / FOUR_PI));

    let (t, _) = mobius_descent(&hopf_link(512), &start_only)?;
    c.check(t.rows[0].grad_norm < 1e-3, format!("hopf |g| {:.2e}", t.rows[0].grad_norm));
    c.check(rel(t.initial_energy(), TWO_PI_SQ) <= 0.01, format!("hopf E/2pi^2 {:.5}", t.initial_energy() / TWO_PI_SQ));

    let (res, steps) = match cfg.profile {
        Profile::Fast => (24, 4),
        Profile::Full => (48, 20),
    };
    let tube = perturbed_mesh(&tube_torus(1.8, 1.0, res), 0.05, cfg.seed);
    let (t, _) = willmore_descent(&tube, &DescentOptions { steps, ..Default::default() })?;
    c.check(
        t.final_energy() <= t.initial_energy() && t.final_energy() >= 0.99 * TWO_PI_SQ,
        trace_summary("perturbed tube", &t),
    );
    descent_invariants(&mut c, "perturbed tube", &t);

    let t = hopf_descent(cfg.seed)?;
    c.check(
        t.final_energy() <= t.initial_energy() && t.final_energy() >= 0.99 * TWO_PI_SQ,
        trace_summary("perturbed hopf", &t),
    );
    descent_invariants(&mut c, "perturbed hopf", &t);
    Ok(c)
}

/// Bytes of the reproducibility probe: width CSV, descent CSV and the
/// 4π|lk| margins, all from `seed`.
pub fn reproducibility_probe(seed: u64) -> Result<String> {
    let mut out = String::from("p,estimate,samples\n");
    let mesh = ellipsoid(1.0, 1.0, 1.0, 32);
    for e in harmonic_family_widths(&mesh, &[1, 2, 3, 4, 5, 6], 100, seed)? {
        let _ = writeln!(out, "{},{:.12e},{}", e.p, e.estimate, e.samples);
    }
    out.push_str(&hopf_descent(seed)?.to_csv());
    for k in 0..4u64 {
        let b = energy_linking_bound_check(&perturbed_link(&hopf_link(64), 0.1, seed.wrapping_add(k))?)?;
        let _ = writeln!(out, "{k},{:.15e},{:.15e}", b.energy, b.margin);
    }
    Ok(out)
}

fn c13_repro(cfg: &VerifyConfig, suite_time: Duration) -> Result<Checks> {
    let mut c = Checks::new();
    let a = reproducibility_probe(cfg.seed)?;
    let b = reproducibility_probe(cfg.seed)?;
    c.check(a == b, format!("repeated probe identical ({} bytes)", a.len()));
    if cfg.profile == Profile::Fast {
        c.check(suite_time <= Duration::from_secs(15 * 60), "fast profile within 15 minutes".into());
    }
    Ok(c)
}

/// Runs criterion `id` (1-based). `suite_time` is the time spent on the
/// preceding criteria, used by the reproducibility check.
pub fn run_criterion(id: usize, cfg: &VerifyConfig, suite_time: Duration) -> CriterionResult {
    let start = Instant::now();
    let outcome = match id {
        1 => c1_willmore(cfg),
        2 => c2_tube(cfg),
        3 => c3_mobius(cfg),
        4 => c4_conformal(cfg),
        5 => c5_gauss(cfg),
        6 => c6_hk(cfg),
        7 => c7_radial(cfg),
        8 => c8_index(cfg),
        9 => c9_crofton(cfg),
        10 => c10_scaling(cfg),
        11 => c11_spectrum(cfg),
        12 => c12_descent(cfg),
        13 => c13_repro(cfg, suite_time),
        _ => Err(Error::Parameter(format!("no criterion {id}"))),
    };
    let checks = outcome.unwrap_or_else(|e| {
        let mut c = Checks::new();
        c.fail(e);
        c
    });
    let (passed, detail) = checks.done();
    CriterionResult {
        id,
        name: CRITERIA.get(id.wrapping_sub(1)).copied().unwrap_or("unknown"),
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

/// Runs all criteria in order, calling `progress` after each one.
pub fn run_all(cfg: &VerifyConfig, mut progress: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let mut out = Vec::with_capacity(CRITERIA.len());
    let mut spent = Duration::ZERO;
    for id in 1..=CRITERIA.len() {
        let r = run_criterion(id, cfg, spent);
        spent += r.elapsed;
        progress(&r);
        out.push(r);
    }
    out
}

/// One line per criterion: `PASS|FAIL  id  name  detail`.
pub fn summary_table(results: &[CriterionResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = writeln!(s, "{} {:>2}  {:<34} {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.detail);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let _ = writeln!(s, "{passed}/{} criteria passed", results.len());
    s
}
