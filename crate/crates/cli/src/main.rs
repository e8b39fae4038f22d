//! `ldg`: convergence-study driver.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use ldg_core::analysis::{render_markdown, write_csv, SweepAxis, TableLayout};
use ldg_core::study::{
    doubling, eps_decades, run_sweep, table_preset, CaseConfig, PresetOptions, ProblemKind, StepSize,
    TimeScheme,
};
use ldg_core::{LdgError, MeshKind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProblemArg {
    Paper2d,
    Paper1d,
    Poly,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Theta,
    Dgr,
}

/// `auto` or a positive number.
#[derive(Debug, Clone, Copy)]
enum AutoOr {
    Auto,
    Value(f64),
}

impl FromStr for AutoOr {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(AutoOr::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(AutoOr::Value(v)),
            _ => Err(format!("expected `auto` or a positive number, got `{s}`")),
        }
    }
}

/// `A:B` range.
#[derive(Debug, Clone, Copy)]
struct Range<T>(T, T);

impl<T: FromStr> FromStr for Range<T> {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, got `{s}`"))?;
        let parse = |v: &str| v.parse::<T>().map_err(|_| format!("bad bound `{v}` in `{s}`"));
        Ok(Range(parse(a)?, parse(b)?))
    }
}

#[derive(Debug, Parser)]
#[command(name = "ldg", version, about = "LDG convergence studies on layer-adapted meshes")]
struct Args {
    /// Spatial dimension.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    dim: u8,
    /// Mesh kind; all three when omitted.
    #[arg(long)]
    mesh: Option<MeshKind>,
    /// Polynomial degree in space.
    #[arg(long)]
    k: Option<usize>,
    /// Cells per direction.
    #[arg(long, conflicts_with = "n_sweep")]
    n: Option<usize>,
    /// Doubling sweep of N, e.g. 4:128.
    #[arg(long)]
    n_sweep: Option<Range<usize>>,
    /// Largest N of a table preset.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, conflicts_with = "eps_sweep")]
    eps: Option<f64>,
    /// Decade sweep of eps, e.g. 1e-4:1e-11.
    #[arg(long)]
    eps_sweep: Option<Range<f64>>,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Time step: `auto` is 1/N for k = 1 and N^-1.5 for k = 2.
    #[arg(long, default_value = "auto")]
    dt: AutoOr,
    #[arg(long, default_value_t = 1.0)]
    t_final: f64,
    /// Mesh parameter sigma: `auto` is k + 2.
    #[arg(long, default_value = "auto")]
    sigma: AutoOr,
    #[arg(long, value_enum, default_value = "paper2d")]
    problem: ProblemArg,
    #[arg(long, value_enum, default_value = "theta")]
    time_scheme: SchemeArg,
    /// Degree of the DG-in-time scheme.
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Table preset (2 to 6).
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=6))]
    table: Option<u32>,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Markdown table output.
    #[arg(long)]
    md: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(LdgError),
}

impl From<LdgError> for Failure {
    fn from(e: LdgError) -> Self {
        match e {
            LdgError::Config(_) | LdgError::InvalidMesh(_) | LdgError::Domain { .. } => Failure::Usage(e.to_string()),
            other => Failure::Run(other),
        }
    }
}

fn build(args: &Args) -> Result<(Vec<CaseConfig>, SweepAxis, Vec<TableLayout>), Failure> {
    let meshes = args.mesh.map(|m| vec![m]);
    if let Some(table) = args.table {
        let opts = PresetOptions {
            meshes,
            k: args.k,
            n_max: args.n_max.or(args.n_sweep.map(|r| r.1)),
            n: args.n,
            eps_list: match args.eps_sweep {
                Some(Range(a, b)) => Some(eps_decades(a, b)?),
                None => args.eps.map(|e| vec![e]),
            },
        };
        let p = table_preset(table, &opts)?;
        return Ok((p.cases, p.axis, p.layouts));
    }
    let k = args.k.unwrap_or(1);
    let ns = match (args.n, args.n_sweep) {
        (Some(n), _) => vec![n],
        (None, Some(Range(a, b))) => doubling(a, args.n_max.map_or(b, |m| m.min(b))),
        (None, None) => vec![16],
    };
    if ns.is_empty() {
        return Err(Failure::Usage("the N sweep is empty".into()));
    }
    let eps_list = match (args.eps, args.eps_sweep) {
        (Some(e), _) => vec![e],
        (None, Some(Range(a, b))) => eps_decades(a, b)?,
        (None, None) => vec![1e-8],
    };
    let problem = match args.problem {
        ProblemArg::Paper2d => ProblemKind::Layer2D,
        ProblemArg::Paper1d => ProblemKind::Layer1D,
        ProblemArg::Poly => ProblemKind::Polynomial,
    };
    let dim = match (args.problem, args.dim) {
        (ProblemArg::Paper1d, _) => 1,
        (_, d) => d as usize,
    };
    let scheme = match args.time_scheme {
        SchemeArg::Theta => TimeScheme::Theta(args.theta),
        SchemeArg::Dgr => TimeScheme::Dg(args.r),
    };
    let mut cases = Vec::new();
    for mesh in meshes.unwrap_or_else(|| MeshKind::ALL.to_vec()) {
        for &eps in &eps_list {
            for &n in &ns {
                let mut c = CaseConfig::new(mesh, k, n, eps);
                c.dim = dim;
                c.problem = problem;
                c.scheme = scheme;
                c.t_final = args.t_final;
                c.dt = match args.dt {
                    AutoOr::Auto => StepSize::Auto,
                    AutoOr::Value(v) => StepSize::Fixed(v),
                };
                c.sigma = match args.sigma {
                    AutoOr::Auto => None,
                    AutoOr::Value(v) => Some(v),
                };
                cases.push(c);
            }
        }
    }
    let axis = if eps_list.len() > 1 { SweepAxis::Eps } else { SweepAxis::Space };
    let layouts = if axis == SweepAxis::Eps {
        vec![TableLayout::Eps]
    } else {
        vec![TableLayout::SpaceL2, TableLayout::SpaceEnergy]
    };
    Ok((cases, axis, layouts))
}

fn run(args: &Args) -> Result<(), Failure> {
    let (cases, axis, layouts) = build(args)?;
    let records = run_sweep(&cases, axis, &mut |r| {
        eprintln!(
            "{:>5} k={} N={:<4} eps={:.0e} dt={:.4e}  L2={:.3e}  energy={:.3e}",
            r.mesh, r.k, r.n, r.eps, r.dt, r.l2_error, r.energy_error
        );
    })?;
    let io = |e: std::io::Error| Failure::Run(LdgError::Io(e));
    match &args.out {
        Some(path) => write_csv(&records, BufWriter::new(File::create(path).map_err(io)?))?,
        None => write_csv(&records, std::io::stdout().lock())?,
    }
    if let Some(path) = &args.md {
        let mut f = BufWriter::new(File::create(path).map_err(io)?);
        for layout in layouts {
            writeln!(f, "{}", render_markdown(&records, layout)).map_err(io)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
