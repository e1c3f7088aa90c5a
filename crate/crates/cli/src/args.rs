use std::path::PathBuf;

use annulus_gas::{Complex64, RadialProfile};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "annulus", version, about = "Coulomb gases on annuli at beta = 2: kernels, limits, checks, samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One-point density K(z, z) on a point list or a polar grid.
    Density(DensityArgs),
    /// Kernel values K(z1, z2) on point pairs.
    Kernel(KernelArgs),
    /// k-point correlation at the given points.
    Correlate(CorrelateArgs),
    /// Evaluate a limit kernel, or export the catalog.
    Limits(LimitsArgs),
    /// Finite-N against limit kernel along a ladder of N.
    Converge(ConvergeArgs),
    /// Self-checks of an ensemble.
    Check(CheckArgs),
    /// Draw configurations.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct Io {
    /// Ensemble JSON.
    #[arg(long)]
    pub spec: PathBuf,
    /// CSV output; a manifest is written to `<out>.manifest.json`. Standard
    /// output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub io: Io,
    /// Points as "re,im;re,im;...".
    #[arg(long, allow_hyphen_values = true, value_parser = parse_points, conflicts_with = "grid")]
    pub points: Option<Points>,
    /// Polar grid "NR,NT" of cell midpoints over the annulus.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    /// Largest radius of the grid for an unbounded annulus (default 2R).
    #[arg(long)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub io: Io,
    /// First points. Without `--points2`, every ordered pair of these.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_points)]
    pub points: Points,
    /// Second points, paired with `--points` one to one.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_points)]
    pub points2: Option<Points>,
    /// Also write the two parts of a class II kernel.
    #[arg(long)]
    pub split: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Determinantal at beta = 2, quadrature for N <= 3, Monte Carlo otherwise.
    Auto,
    Determinantal,
    BruteForce,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance of brute-force quadrature.
    #[arg(long, default_value_t = 1e-10)]
    pub quad_tol: f64,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_points)]
    pub points: Points,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Args)]
pub struct FrameArgs {
    /// Frame kind; defaults to the first frame the formula accepts.
    #[arg(long)]
    pub frame: Option<String>,
    #[arg(long = "N", default_value_t = 1)]
    pub n: usize,
    /// Edge radius (inner radius R for the exterior edge).
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    /// Charge rate Γ/N.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Charge rate M/N for large-M regimes.
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    /// Number of negative charges for fixed-M regimes.
    #[arg(long, default_value_t = 0)]
    pub m: u32,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub psi: f64,
    /// Scaled width T.
    #[arg(long = "T", default_value_t = 1.0)]
    pub t_width: f64,
    /// Scaled offset u of the near-circle frames (default 2 outside, −1 inside).
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    /// Formula name, e.g. sine or disc_edge_kappa.
    #[arg(long, required_unless_present = "catalog")]
    pub id: Option<String>,
    /// Write the formula catalog as JSON instead.
    #[arg(long)]
    pub catalog: bool,
    #[command(flatten)]
    pub frame: FrameArgs,
    /// Common scaled depth of both points.
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// Scaled angle of the first point (the second sits at 0).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi2: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub id: String,
    #[command(flatten)]
    pub frame: FrameArgs,
    /// Ladder of N, comma separated.
    #[arg(long, value_parser = parse_ladder, default_value = "100,200,400")]
    pub ns: Ladder,
    /// Radial profile: flat or power:ALPHA.
    #[arg(long, value_parser = parse_profile, conflicts_with = "spec")]
    pub profile: Option<RadialProfile>,
    /// Take the radial profile from an ensemble JSON.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Compare two profiles instead of finite against limit.
    #[arg(long, value_parser = parse_profile)]
    pub against: Option<RadialProfile>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Orthogonality,
    Mass,
    Reproducing,
    Duality,
    Split,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long, value_enum)]
    pub kind: CheckKind,
    /// Acceptance tolerance (kind-specific default).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Evaluation points for the pointwise checks.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_points)]
    pub points: Option<Points>,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleMode {
    /// Independent draws of the radial moduli (class I, beta = 2).
    Radial,
    /// Metropolis chain at the ensemble's beta.
    Mcmc,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long, value_enum, default_value_t = SampleMode::Mcmc)]
    pub mode: SampleMode,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    /// Sweeps between stored chain states (default N).
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Points(pub Vec<Complex64>);

#[derive(Debug, Clone, PartialEq)]
pub struct Ladder(pub Vec<usize>);

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("not a number: {s:?}"))
}

pub fn parse_points(s: &str) -> Result<Points, String> {
    let v = s
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| match p.split(',').collect::<Vec<_>>().as_slice() {
            [re, im] => Ok(Complex64::new(parse_f64(re)?, parse_f64(im)?)),
            _ => Err(format!("expected \"re,im\", got {p:?}")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("empty point list".into());
    }
    Ok(Points(v))
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    match parse_usizes(s)?.as_slice() {
        [a, b] if *a > 0 && *b > 0 => Ok((*a, *b)),
        _ => Err(format!("expected \"NR,NT\" with positive counts, got {s:?}")),
    }
}

fn parse_usizes(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| format!("not a count: {x:?}")))
        .collect()
}

fn parse_ladder(s: &str) -> Result<Ladder, String> {
    let ns = parse_usizes(s)?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(format!("expected positive counts, got {s:?}"));
    }
    Ok(Ladder(ns))
}

fn parse_profile(s: &str) -> Result<RadialProfile, String> {
    match s.split_once(':') {
        None if s == "flat" => Ok(RadialProfile::Flat),
        Some(("power", a)) => Ok(RadialProfile::Power { alpha: parse_f64(a)? }),
        _ => Err(format!("expected flat or power:ALPHA, got {s:?}")),
    }
}
