//! Subcommand implementations.

use std::f64::consts::FRAC_PI_2;
use std::fmt::{self, Write as _};
use std::path::Path;

use cel_core::canonical::{hk_verify, t_grid, v_grid, HK_TOL, HK_VMAX};
use cel_core::conformal::ConformalDilation;
use cel_core::energies::{link_to_r3, linking_number, mobius_energy, willmore_energy, EnergyReport, LinkingNumber};
use cel_core::geom::io::{link_to_json, mesh_to_obj, read_link, read_obj};
use cel_core::geom::shapes::{
    clifford_torus, geodesic_sphere, make_shape, perturbed_link, perturbed_mesh, Shape, ShapeKind,
};
use cel_core::geom::{estimate_curvatures, Ambient, Point, PolyLink, TriMesh};
use cel_core::optimize::{mobius_descent, willmore_descent, DescentOptions, DescentTrace};
use cel_core::spectra::{jacobi_index_analytic, jacobi_index_numeric, IndexSurface};
use cel_core::spectral::laplace_minmax;
use cel_core::sweepouts::{
    eigenfunction_sweepout, harmonic_family_widths, sweepout_sup_lengths, ScalarField, SupSearch, WidthEstimate,
    DEFAULT_REFINE, DEFAULT_RESTARTS,
};
use cel_core::verify::{run_criterion, summary_table, Profile, VerifyConfig, CRITERIA};
use serde::Serialize;

use crate::{AmbientArg, Command, EnergyKind, Family, GenerateArgs, Method, ProfileArg, ShapeArg};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or paths; exit status 2.
    Usage(String),
    /// A check reported by the command did not hold; exit status 1.
    Failed(String),
    Core(cel_core::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "{m}"),
            Self::Failed(m) => write!(f, "check failed: {m}"),
            Self::Core(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<cel_core::Error> for CliError {
    fn from(e: cel_core::Error) -> Self {
        match e {
            cel_core::Error::Parameter(m) => Self::Usage(m),
            e => Self::Core(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn existing(path: &Path) -> Result<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::Usage(format!("input file not found: {}", path.display())))
    }
}

fn is_link_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn load_mesh(path: &Path) -> Result<TriMesh> {
    if is_link_path(existing(path)?) {
        return Err(CliError::Usage(format!("{} is a link file; this command takes an OBJ mesh", path.display())));
    }
    Ok(read_obj(path)?)
}

fn load_shape(path: &Path) -> Result<Shape> {
    if is_link_path(existing(path)?) {
        Ok(Shape::Link(read_link(path)?))
    } else {
        Ok(Shape::Mesh(read_obj(path)?))
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn parse_vector(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad {what} component {t:?} in {s:?}"))))
        .collect()
}

fn parse_point4(s: &str, what: &str) -> Result<Point> {
    match parse_vector(s, what)?.as_slice() {
        [a, b, c, d] => Ok(Point::new(*a, *b, *c, *d)),
        v => Err(CliError::Usage(format!("{what} needs 4 components, got {}", v.len()))),
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Generate(a) => generate(&a),
        Command::Energy { input, ambient } => energy(&input, ambient),
        Command::LinkEnergy { input } => link_energy(&input),
        Command::ConformalTest { input, v, tol } => conformal_test(&input, &v, tol),
        Command::HkTest { input, vmax, vsteps, tsteps, out } => hk_test(&input, vmax, vsteps, tsteps, out.as_deref()),
        Command::Widths { input, family, p, samples, seed, out } => {
            widths(&input, family, p, samples.unwrap_or((100 * p).max(500)), seed, out.as_deref())
        }
        Command::Laplace { input, k } => laplace(&input, k),
        Command::Index { surface, method, res } => index(&surface, method, res),
        Command::Optimize { input, energy, steps, step_size, out, out_shape } => {
            optimize(&input, energy, steps, step_size, out.as_deref(), out_shape.as_deref())
        }
        Command::VerifyAll { profile, seed, only } => verify_all(profile, seed, &only),
    }
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let kind = match a.shape {
        ShapeArg::Sphere => ShapeKind::Sphere { r: a.r },
        ShapeArg::Tube => ShapeKind::TubeTorus { big_r: a.big_r, r: a.r },
        ShapeArg::Clifford => ShapeKind::CliffordTorus,
        ShapeArg::Geodesic => {
            let c = parse_point4(&a.center, "center")?;
            ShapeKind::GeodesicSphere { center: [c.x, c.y, c.z, c.w], radius: a.radius }
        }
        ShapeArg::Ellipsoid => match parse_vector(&a.axes, "axes")?.as_slice() {
            [x, y, z] => ShapeKind::Ellipsoid { a: *x, b: *y, c: *z },
            v => return Err(CliError::Usage(format!("axes needs 3 components, got {}", v.len()))),
        },
        ShapeArg::Hopf => ShapeKind::HopfLink,
        ShapeArg::Coaxial => ShapeKind::CoaxialCircles { sep: a.sep },
        ShapeArg::TorusLink => ShapeKind::TorusLink { p: a.p, q: a.q },
    };
    if a.perturb.is_nan() || a.perturb < 0.0 {
        return Err(CliError::Usage(format!("perturbation amplitude must be nonnegative, got {}", a.perturb)));
    }
    let text = match make_shape(&kind, a.res)? {
        Shape::Mesh(m) => {
            let m = if a.perturb > 0.0 { perturbed_mesh(&m, a.perturb, a.seed) } else { m };
            let mut s = mesh_to_obj(&m);
            if a.perturb > 0.0 {
                s.insert_str(0, &format!("# perturbation {} seed {}\n", a.perturb, a.seed));
            }
            s
        }
        Shape::Link(l) => {
            let l = if a.perturb > 0.0 { perturbed_link(&l, a.perturb, a.seed)? } else { l };
            let mut s = link_to_json(&l);
            s.push('\n');
            s
        }
    };
    emit(&text, a.out.as_deref())
}

fn mesh_willmore(mesh: &TriMesh) -> Result<EnergyReport> {
    Ok(willmore_energy(mesh, &estimate_curvatures(mesh)?)?)
}

#[derive(Serialize)]
struct MeshEnergyOut {
    ambient: Ambient,
    #[serde(flatten)]
    report: EnergyReport,
}

fn energy(input: &Path, ambient: Option<AmbientArg>) -> Result<()> {
    let mesh = load_mesh(input)?;
    if let Some(a) = ambient {
        let want = match a {
            AmbientArg::R3 => Ambient::R3,
            AmbientArg::S3 => Ambient::S3,
        };
        if want != mesh.ambient {
            return Err(CliError::Usage(format!("--ambient {want:?} but the mesh is in {:?}", mesh.ambient)));
        }
    }
    emit(&json(&MeshEnergyOut { ambient: mesh.ambient, report: mesh_willmore(&mesh)? }), None)
}

#[derive(Serialize)]
struct LinkEnergyOut {
    #[serde(flatten)]
    report: EnergyReport,
    linking_number: LinkingNumber,
}

fn link_energy(input: &Path) -> Result<()> {
    let link = match load_shape(input)? {
        Shape::Link(l) => l,
        Shape::Mesh(_) => return Err(CliError::Usage("link-energy takes a JSON link".into())),
    };
    let report = mobius_energy(&link)?;
    let lk = linking_number(&link_to_r3(&link)?)?;
    emit(&json(&LinkEnergyOut { report, linking_number: lk }), None)
}

#[derive(Serialize)]
struct ConformalOut {
    v: [f64; 4],
    factor: f64,
    before: EnergyReport,
    after: EnergyReport,
    relative_change: f64,
    tolerance: f64,
    invariant: bool,
}

fn map_link(f: &ConformalDilation, l: &PolyLink) -> Result<PolyLink> {
    let map = |c: &[Point]| c.iter().map(|x| f.apply(x)).collect::<cel_core::Result<Vec<_>>>();
    Ok(PolyLink::new(map(&l.gamma1)?, map(&l.gamma2)?, 4)?)
}

fn conformal_test(input: &Path, v: &str, tol: f64) -> Result<()> {
    let v = parse_point4(v, "v")?;
    let f = ConformalDilation::new(v)?;
    let (before, after) = match load_shape(input)? {
        Shape::Mesh(m) => {
            if m.ambient != Ambient::S3 {
                return Err(CliError::Usage("conformal-test needs a mesh on S3".into()));
            }
            (mesh_willmore(&m)?, mesh_willmore(&f.apply_mesh(&m)?)?)
        }
        Shape::Link(l) => {
            if l.dim != 4 || !l.on_unit_sphere(1e-9) {
                return Err(CliError::Usage("conformal-test needs a link on S3".into()));
            }
            (mobius_energy(&l)?, mobius_energy(&map_link(&f, &l)?)?)
        }
    };
    let relative_change = (after.value - before.value).abs() / before.value;
    let out = ConformalOut {
        v: [v.x, v.y, v.z, v.w],
        factor: f.factor(),
        before,
        after,
        relative_change,
        tolerance: tol,
        invariant: relative_change <= tol,
    };
    emit(&json(&out), None)?;
    if out.invariant {
        Ok(())
    } else {
        Err(CliError::Failed(format!("relative change {relative_change:.3e} above {tol}")))
    }
}

fn hk_test(input: &Path, vmax: f64, vsteps: usize, tsteps: usize, out: Option<&Path>) -> Result<()> {
    if !(0.0..=HK_VMAX).contains(&vmax) {
        return Err(CliError::Usage(format!("--vmax must be in [0, {HK_VMAX}]")));
    }
    let mesh = load_mesh(input)?;
    let report = hk_verify(&mesh, &v_grid(vmax, vsteps), &t_grid(tsteps))?;
    let mut csv = String::from("v1,v2,v3,v4,t,area\n");
    for s in &report.samples {
        let _ = writeln!(csv, "{},{},{},{},{:.12e},{:.12e}", s.v[0], s.v[1], s.v[2], s.v[3], s.t, s.area);
    }
    emit(&csv, out)?;
    eprintln!(
        "W = {:.6}, max area = {:.6}, ratio = {:.5}, pointwise violations = {}",
        report.willmore, report.max_area, report.ratio, report.pointwise_violations
    );
    if report.holds(HK_TOL) {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "max area/W = {:.5} (tolerance {HK_TOL}), {} pointwise violations",
            report.ratio, report.pointwise_violations
        )))
    }
}

fn widths(input: &Path, family: Family, p: usize, samples: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    if p == 0 {
        return Err(CliError::Usage("--p must be at least 1".into()));
    }
    let mesh = load_mesh(input)?;
    let est: Vec<WidthEstimate> = match family {
        Family::Poly => sweepout_sup_lengths(&mesh, &ScalarField::coordinate(&mesh, 2), p, samples, seed)?,
        Family::Harmonic => harmonic_family_widths(&mesh, &(1..=p).collect::<Vec<_>>(), samples, seed)?,
        Family::Eigen => {
            // nested families: report running maxima
            let mut running = 0.0f64;
            let mut rows = Vec::with_capacity(p);
            for q in 1..=p {
                let plan = SupSearch {
                    samples,
                    refine_steps: DEFAULT_REFINE,
                    restarts: DEFAULT_RESTARTS,
                    seed: seed.wrapping_add(q as u64),
                };
                let mut e = eigenfunction_sweepout(&mesh, q, &plan)?;
                running = running.max(e.estimate);
                e.estimate = running;
                rows.push(e);
            }
            rows
        }
    };
    let mut csv = String::from("p,estimate,samples,family,seed\n");
    for e in &est {
        let _ = writeln!(csv, "{},{:.12e},{},{},{seed}", e.p, e.estimate, e.samples, e.family);
    }
    emit(&csv, out)
}

#[derive(Serialize)]
struct LaplaceOut {
    vertices: usize,
    eigenvalues: Vec<f64>,
}

fn laplace(input: &Path, k: usize) -> Result<()> {
    let mesh = load_mesh(input)?;
    let eigenvalues = laplace_minmax(&mesh, k)?;
    emit(&json(&LaplaceOut { vertices: mesh.n_vertices(), eigenvalues }), None)
}

fn index(surface: &str, method: Method, res: usize) -> Result<()> {
    let s: IndexSurface = surface.parse().map_err(|e: cel_core::Error| CliError::Usage(e.to_string()))?;
    let mut reports = Vec::new();
    if method != Method::Numeric {
        reports.push(jacobi_index_analytic(s));
    }
    if method != Method::Analytic {
        let mesh = match s {
            IndexSurface::GreatSphere => geodesic_sphere(&Point::new(0.0, 0.0, 0.0, 1.0), FRAC_PI_2, res),
            IndexSurface::CliffordTorus => clifford_torus(res),
        };
        reports.push(jacobi_index_numeric(&mesh, &estimate_curvatures(&mesh)?, &s.to_string())?);
    }
    emit(&json(&reports), None)?;
    match reports.as_slice() {
        [a, n] if a.index != n.index => {
            Err(CliError::Failed(format!("analytic index {} but numeric index {}", a.index, n.index)))
        }
        _ => Ok(()),
    }
}

fn optimize(
    input: &Path,
    energy: EnergyKind,
    steps: usize,
    step_size: f64,
    out: Option<&Path>,
    out_shape: Option<&Path>,
) -> Result<()> {
    let opts = DescentOptions { steps, step_size, ..Default::default() };
    let (trace, shape): (DescentTrace, String) = match (energy, load_shape(input)?) {
        (EnergyKind::Willmore, Shape::Mesh(m)) => {
            let (t, m) = willmore_descent(&m, &opts)?;
            (t, mesh_to_obj(&m))
        }
        (EnergyKind::Mobius, Shape::Link(l)) => {
            let (t, l) = mobius_descent(&l, &opts)?;
            (t, link_to_json(&l) + "\n")
        }
        (EnergyKind::Willmore, Shape::Link(_)) => {
            return Err(CliError::Usage("--energy willmore needs an OBJ mesh".into()))
        }
        (EnergyKind::Mobius, Shape::Mesh(_)) => {
            return Err(CliError::Usage("--energy mobius needs a JSON link".into()))
        }
    };
    emit(&trace.to_csv(), out)?;
    if let Some(p) = out_shape {
        std::fs::write(p, shape)?;
    }
    eprintln!(
        "{:?} after {} rows: energy {:.8} -> {:.8}, terminal id {}",
        trace.termination,
        trace.rows.len(),
        trace.initial_energy(),
        trace.final_energy(),
        trace.terminal_id
    );
    if !trace.is_monotone() {
        return Err(CliError::Failed("energy increased along accepted steps".into()));
    }
    if trace.bound_violations > 0 {
        return Err(CliError::Failed(format!("{} iterates below the lower bound", trace.bound_violations)));
    }
    Ok(())
}

fn verify_all(profile: ProfileArg, seed: u64, only: &[usize]) -> Result<()> {
    let profile = match profile {
        ProfileArg::Fast => Profile::Fast,
        ProfileArg::Full => Profile::Full,
    };
    let ids: Vec<usize> = if only.is_empty() { (1..=CRITERIA.len()).collect() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA.len()) {
        return Err(CliError::Usage(format!("no criterion {bad}; valid ids are 1..={}", CRITERIA.len())));
    }
    let cfg = VerifyConfig { profile, seed };
    let mut results = Vec::with_capacity(ids.len());
    let mut spent = std::time::Duration::ZERO;
    for id in ids {
        let r = run_criterion(id, &cfg, spent);
        spent += r.elapsed;
        eprintln!(
            "{} {:>2} {} ({:.1}s)",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.elapsed.as_secs_f64()
        );
        results.push(r);
    }
    print!("profile {:?}, seed {seed}\n{}", profile, summary_table(&results));
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("criteria {} failed", failed.join(", "))))
    }
}
