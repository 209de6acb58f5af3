//! `cel`: one subcommand per library module, JSON for scalar reports and
//! CSV for curves and grids.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser, Debug)]
#[command(name = "cel", version, about = "Conformal energies, canonical families and sweepout widths")]
pub struct Cli {
    /// Worker threads (the CEL_THREADS environment variable takes precedence).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a fixture mesh (OBJ) or link (JSON).
    Generate(GenerateArgs),
    /// Willmore energy of an OBJ mesh.
    Energy {
        #[arg(long = "in")]
        input: PathBuf,
        /// Expected ambient; must match the file.
        #[arg(long)]
        ambient: Option<AmbientArg>,
    },
    /// Möbius cross energy and linking number of a JSON link.
    LinkEnergy {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Energy before and after the conformal dilation F_v.
    ConformalTest {
        /// OBJ mesh on S³ or JSON link.
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated point of the open unit ball in R⁴.
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        /// Relative deviation counted as invariant.
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
    },
    /// Areas of the canonical family over a (v, t) grid, as CSV.
    HkTest {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        vmax: f64,
        #[arg(long, default_value_t = 5)]
        vsteps: usize,
        #[arg(long, default_value_t = 33)]
        tsteps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Upper estimates of the p-widths from an explicit family, as CSV.
    Widths {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Family::Harmonic)]
        family: Family,
        #[arg(long, default_value_t = 8)]
        p: usize,
        /// Defaults to max(500, 100 p).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest Laplace–Beltrami eigenvalues.
    Laplace {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 16)]
        k: usize,
    },
    /// Jacobi index of the great sphere or the Clifford torus.
    Index {
        #[arg(long)]
        surface: String,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        #[arg(long, default_value_t = 64)]
        res: usize,
    },
    /// Descent on the Willmore or Möbius energy; writes the trace as CSV.
    Optimize {
        /// OBJ mesh or JSON link.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        energy: EnergyKind,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Initial displacement as a fraction of the mean edge length.
        #[arg(long, default_value_t = 0.1)]
        step_size: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the final shape.
        #[arg(long)]
        out_shape: Option<PathBuf>,
    },
    /// Run the acceptance suite and print the summary table.
    VerifyAll {
        #[arg(long, value_enum, default_value_t = ProfileArg::Fast)]
        profile: ProfileArg,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Only these criteria (1..=13).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub shape: ShapeArg,
    #[arg(long, default_value_t = 64)]
    pub res: usize,
    /// Sphere radius or tube radius.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Tube torus center-circle radius.
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub big_r: f64,
    /// Geodesic sphere radius in (0, π).
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub radius: f64,
    /// Geodesic sphere center, comma-separated.
    #[arg(long, default_value = "0,0,0,1", allow_hyphen_values = true)]
    pub center: String,
    /// Ellipsoid semi-axes, comma-separated.
    #[arg(long, default_value = "1,0.8,0.6")]
    pub axes: String,
    /// Coaxial circle separation.
    #[arg(long, default_value_t = 1.0)]
    pub sep: f64,
    /// Torus link winding numbers.
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    #[arg(long, default_value_t = 4)]
    pub q: u32,
    /// Amplitude of a smooth random perturbation, relative to the shape size.
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ShapeArg {
    Sphere,
    Tube,
    Clifford,
    Geodesic,
    Ellipsoid,
    Hopf,
    Coaxial,
    TorusLink,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum AmbientArg {
    R3,
    S3,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Family {
    Poly,
    Harmonic,
    Eigen,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Analytic,
    Numeric,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum EnergyKind {
    Willmore,
    Mobius,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ProfileArg {
    Fast,
    Full,
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, String> {
    match std::env::var("CEL_THREADS") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| format!("CEL_THREADS must be a positive integer, got {s:?}")),
        Err(_) => Ok(flag),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match thread_count(cli.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = threads.filter(|&n| n > 0) {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
