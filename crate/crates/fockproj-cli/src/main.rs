//! `fockproj`: construct phase-space projectors in a truncated number basis
//! and emit eigenvalue profiles, Wigner/Husimi grids, evolution checks, and
//! decoherence reports as CSV/JSON.
//!
//! Exit codes: 0 success; 1 negative verification outcome (non-decoherent
//! history, failed evolution check, failed invariant); 2 invalid input;
//! 3 working dimension below the truncation bound.

mod commands;
mod config;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fockproj::projector::RegionSpec;
use fockproj::PhasePoint;

use commands::{execute, CmdError, Format, GridBounds, GridKind, Job, Resolved};

#[derive(Parser)]
#[command(
    name = "fockproj",
    version,
    about = "Phase-space projectors from number-basis eigenstates",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    /// JSON file describing one command (alternative to a subcommand).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Projection weights of the lowest number states on a disc of radius R.
    Lambda(LambdaArgs),
    /// Construct a region projector and report its defects (JSON).
    Projector(ProjectorArgs),
    /// Wigner function of a region projector on a phase-space grid.
    Wigner(GridArgs),
    /// Husimi function of a region projector on a phase-space grid.
    Husimi(GridArgs),
    /// Evolve a displaced projector and compare against the flowed center.
    Evolve(EvolveArgs),
    /// Decoherence functional of a phase-space history spec.
    Histories(HistoriesArgs),
    /// Run the built-in invariant suite and emit a JSON summary.
    Verify(VerifyArgs),
}

fn parse_phase_point(s: &str) -> Result<PhasePoint, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected \"p,q\", got {s:?}"));
    }
    let p: f64 = parts[0].trim().parse().map_err(|e| format!("bad p: {e}"))?;
    let q: f64 = parts[1].trim().parse().map_err(|e| format!("bad q: {e}"))?;
    Ok(PhasePoint::new(p, q))
}

fn parse_region(s: &str) -> Result<RegionSpec, String> {
    serde_json::from_str(s).map_err(|e| format!("bad region JSON: {e}"))
}

#[derive(Args)]
struct LambdaArgs {
    /// Disc radius in coherent-label units.
    #[arg(long = "R", allow_negative_numbers = true)]
    radius: f64,
    /// Number of weights to emit (indices 0..count).
    #[arg(long)]
    count: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectorArgs {
    /// Truncation dimension of the number basis.
    #[arg(long)]
    dim: usize,
    /// Region JSON, e.g. '{"circle":{"R":3.0,"center":[0.0,0.0]}}'.
    #[arg(long, value_parser = parse_region)]
    region: RegionSpec,
    /// Omit the dense matrix from the report.
    #[arg(long)]
    no_matrix: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    dim: usize,
    /// Region JSON, e.g. '{"circle":{"R":3.0,"center":[0.0,0.0]}}'.
    #[arg(long, value_parser = parse_region)]
    region: RegionSpec,
    /// Grid bounds; both ends of an axis or neither. Defaults cover the
    /// region plus a Gaussian margin (general regions need explicit bounds).
    #[arg(long, allow_negative_numbers = true)]
    p_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q_max: Option<f64>,
    /// Points per axis.
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    dim: usize,
    /// Highest retained number state; the projector rank is n_max + 1.
    #[arg(long)]
    n_max: usize,
    /// Initial region center as "p,q".
    #[arg(long, value_parser = parse_phase_point)]
    center: PhasePoint,
    #[arg(long, allow_negative_numbers = true)]
    time: f64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct HistoriesArgs {
    /// History descriptor JSON file.
    #[arg(long)]
    spec: PathBuf,
    /// Override the decoherence tolerance from the spec file.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Inject one failing check (test hook for exit-code plumbing).
    #[arg(long, hide = true)]
    force_fail: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn resolve(command: Command) -> Result<Resolved, CmdError> {
    Ok(match command {
        Command::Lambda(a) => Resolved {
            job: Job::Lambda { radius: a.radius, count: a.count, format: a.format },
            output: a.output,
        },
        Command::Projector(a) => Resolved {
            job: Job::Projector { dim: a.dim, region: a.region, include_matrix: !a.no_matrix },
            output: a.output,
        },
        Command::Wigner(a) => grid_job(GridKind::Wigner, a),
        Command::Husimi(a) => grid_job(GridKind::Husimi, a),
        Command::Evolve(a) => Resolved {
            job: Job::Evolve {
                dim: a.dim,
                n_max: a.n_max,
                center: a.center,
                time: a.time,
                tolerance: a.tolerance,
            },
            output: a.output,
        },
        Command::Histories(a) => Resolved {
            job: Job::Histories {
                descriptor: config::SpecSource::Path(a.spec).load()?,
                tolerance: a.tolerance,
            },
            output: a.output,
        },
        Command::Verify(a) => Resolved {
            job: Job::Verify { force_fail: a.force_fail },
            output: a.output,
        },
    })
}

fn grid_job(kind: GridKind, a: GridArgs) -> Resolved {
    Resolved {
        job: Job::Grid {
            kind,
            dim: a.dim,
            region: a.region,
            bounds: GridBounds { p_min: a.p_min, p_max: a.p_max, q_min: a.q_min, q_max: a.q_max },
            resolution: a.resolution,
            format: a.format,
        },
        output: a.output,
    }
}

/// FOCKPROJ_THREADS caps the worker pool; 0 or unset means automatic.
fn init_threads() {
    let Ok(raw) = std::env::var("FOCKPROJ_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(0) => {}
        Ok(n) => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Err(_) => {
            eprintln!("warning: ignoring unparseable FOCKPROJ_THREADS={raw:?}");
        }
    }
}

fn run(cli: Cli) -> Result<bool, CmdError> {
    let resolved = match (cli.config, cli.command) {
        (Some(path), None) => config::load(&path)?.resolve()?,
        (None, Some(command)) => resolve(command)?,
        (None, None) => {
            return Err(CmdError::invalid(
                "nothing to do: pass a subcommand or --config FILE (see --help)",
            ));
        }
        (Some(_), Some(_)) => {
            return Err(CmdError::invalid("--config conflicts with a subcommand"));
        }
    };
    let outcome = execute(resolved.job)?;
    match resolved.output {
        Some(path) => std::fs::write(&path, &outcome.text).map_err(|e| {
            CmdError::invalid(format!("cannot write {}: {e}", path.display()))
        })?,
        None => print!("{}", outcome.text),
    }
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
