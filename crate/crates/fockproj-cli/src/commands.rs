//! Command execution: each job is a pure function of its parameters, so a
//! fixed configuration always produces byte-identical output.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use fockproj::dynamics::{classical_flow, evolve_projector};
use fockproj::histories::{
    decoherence_functional_with_tolerance, HistoryDescriptor, DEFAULT_DECOHERENCE_TOL,
};
use fockproj::phase_space::{husimi_grid, linspace, wigner_grid, PhaseGrid};
use fockproj::projector::{
    displaced_projector, lambda_profile, rank_for_radius, region_projector, RegionSpec,
};
use fockproj::{Error, FockDim, FockOperator, PhasePoint};

/// Working dimension accepted by every command.
pub const DIM_RANGE: std::ops::RangeInclusive<usize> = 1..=1024;
/// Grid resolution accepted per axis.
pub const RESOLUTION_RANGE: std::ops::RangeInclusive<usize> = 3..=2001;

/// Error carrying the process exit code: 2 for invalid input, 3 when the
/// working dimension is below the truncation bound.
#[derive(Debug)]
pub struct CmdError {
    pub code: u8,
    pub message: String,
}

impl CmdError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CmdError { code: 2, message: message.into() }
    }

    pub fn truncation(message: impl Into<String>) -> Self {
        CmdError { code: 3, message: message.into() }
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DimensionTooSmall { .. } => 3,
            _ => 2,
        };
        CmdError { code, message: e.to_string() }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum GridKind {
    Wigner,
    Husimi,
}

impl GridKind {
    fn name(self) -> &'static str {
        match self {
            GridKind::Wigner => "wigner",
            GridKind::Husimi => "husimi",
        }
    }

    fn normalization(self) -> &'static str {
        match self {
            GridKind::Wigner => {
                "trapezoid integral over the (p,q) plane equals the projector trace"
            }
            GridKind::Husimi => "pointwise coherent-state expectation; values lie in [0,1]",
        }
    }
}

/// Explicit or region-derived grid bounds.
#[derive(Copy, Clone, Debug)]
pub struct GridBounds {
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub q_min: Option<f64>,
    pub q_max: Option<f64>,
}

/// One resolved unit of work.
pub enum Job {
    Lambda { radius: f64, count: usize, format: Format },
    Projector { dim: usize, region: RegionSpec, include_matrix: bool },
    Grid { kind: GridKind, dim: usize, region: RegionSpec, bounds: GridBounds, resolution: usize, format: Format },
    Evolve { dim: usize, n_max: usize, center: PhasePoint, time: f64, tolerance: f64 },
    Histories { descriptor: HistoryDescriptor, tolerance: Option<f64> },
    Verify { force_fail: bool },
}

pub struct Resolved {
    pub job: Job,
    pub output: Option<PathBuf>,
}

/// Text to emit plus whether the run counts as a success (exit 0) or a
/// negative verification outcome (exit 1).
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

pub fn execute(job: Job) -> Result<Outcome, CmdError> {
    match job {
        Job::Lambda { radius, count, format } => run_lambda(radius, count, format),
        Job::Projector { dim, region, include_matrix } => run_projector(dim, region, include_matrix),
        Job::Grid { kind, dim, region, bounds, resolution, format } => {
            run_grid(kind, dim, region, bounds, resolution, format)
        }
        Job::Evolve { dim, n_max, center, time, tolerance } => {
            run_evolve(dim, n_max, center, time, tolerance)
        }
        Job::Histories { descriptor, tolerance } => run_histories(descriptor, tolerance),
        Job::Verify { force_fail } => Ok(crate::verify::run_all(force_fail)),
    }
}

pub fn check_dim(dim: usize) -> Result<FockDim, CmdError> {
    if !DIM_RANGE.contains(&dim) {
        return Err(CmdError::invalid(format!(
            "dim must lie in [{}, {}], got {dim}",
            DIM_RANGE.start(),
            DIM_RANGE.end()
        )));
    }
    Ok(FockDim::new(dim)?)
}

fn check_resolution(resolution: usize) -> Result<(), CmdError> {
    if !RESOLUTION_RANGE.contains(&resolution) {
        return Err(CmdError::invalid(format!(
            "resolution must lie in [{}, {}], got {resolution}",
            RESOLUTION_RANGE.start(),
            RESOLUTION_RANGE.end()
        )));
    }
    Ok(())
}

fn check_tolerance(tolerance: f64) -> Result<(), CmdError> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(CmdError::invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    Ok(())
}

/// Displaced projectors of rank N+1 at label z need d >= N + max(4|z|^2, 25)
/// to keep truncation artifacts below report tolerances.
pub fn truncation_gate(dim: usize, n_max: usize, center: PhasePoint) -> Result<(), CmdError> {
    let needed = n_max as f64 + (4.0 * center.label().norm_sqr()).max(25.0);
    if (dim as f64) < needed {
        return Err(CmdError::truncation(format!(
            "dim {dim} is below the truncation bound {} (need d >= N + max(4|z|^2, 25) \
             for rank N+1 at label z)",
            needed.ceil()
        )));
    }
    Ok(())
}

/// Truncation gate for whole regions; general regions are gated inside the
/// library by the levels <= d/2 rule instead.
pub fn gate_region(dim: usize, region: &RegionSpec) -> Result<(), CmdError> {
    region.validate()?;
    match region {
        RegionSpec::Circle { radius, center } => {
            truncation_gate(dim, rank_for_radius(*radius) - 1, *center)
        }
        RegionSpec::Ellipse { center, rank, .. } => truncation_gate(dim, rank - 1, *center),
        RegionSpec::General { .. } => Ok(()),
    }
}

/// Region-derived half-width for grid axes: region extent plus a four-unit
/// Gaussian margin. General regions have no closed extent; bounds must be
/// explicit there.
fn auto_half_width(region: &RegionSpec) -> Option<f64> {
    match region {
        RegionSpec::Circle { radius, center } => {
            Some(center.label().0.norm() * 2f64.sqrt() + 2f64.sqrt() * radius + 4.0)
        }
        RegionSpec::Ellipse { center, squeeze, rank, .. } => {
            let base = (2.0 * (*rank as f64)).sqrt();
            Some(center.label().0.norm() * 2f64.sqrt() + base * squeeze.norm().exp() + 4.0)
        }
        RegionSpec::General { .. } => None,
    }
}

fn resolve_axis(
    lo: Option<f64>,
    hi: Option<f64>,
    auto: Option<f64>,
    name: &str,
) -> Result<(f64, f64), CmdError> {
    let (lo, hi) = match (lo, hi, auto) {
        (Some(lo), Some(hi), _) => (lo, hi),
        (None, None, Some(half)) => (-half, half),
        (None, None, None) => {
            return Err(CmdError::invalid(format!(
                "{name} bounds are required for general regions (no closed region extent)"
            )));
        }
        _ => {
            return Err(CmdError::invalid(format!(
                "{name} bounds must be given as a pair or omitted together"
            )));
        }
    };
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CmdError::invalid(format!("{name} bounds must be finite with min < max")));
    }
    Ok((lo, hi))
}

fn float_cell(v: f64) -> String {
    format!("{v:.16e}")
}

fn run_lambda(radius: f64, count: usize, format: Format) -> Result<Outcome, CmdError> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(CmdError::invalid(format!("R must be non-negative, got {radius}")));
    }
    if count == 0 {
        return Err(CmdError::invalid("count must be at least 1"));
    }
    let profile = lambda_profile(radius, count)?;
    let text = match format {
        Format::Csv => {
            let mut out = String::from("n,lambda\n");
            for (n, v) in profile.values().iter().enumerate() {
                let _ = writeln!(out, "{n},{}", float_cell(*v));
            }
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct LambdaReport {
                radius: f64,
                count: usize,
                lambda: Vec<f64>,
            }
            to_pretty_json(&LambdaReport { radius, count, lambda: profile.into_vec() })?
        }
    };
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct ProjectorReport<'a> {
    dim: usize,
    region: &'a RegionSpec,
    rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary_energy: Option<f64>,
    trace: f64,
    hermiticity_defect: f64,
    idempotency_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    operator: Option<&'a FockOperator>,
}

fn run_projector(dim: usize, region: RegionSpec, include_matrix: bool) -> Result<Outcome, CmdError> {
    let fdim = check_dim(dim)?;
    gate_region(dim, &region)?;
    let built = region_projector(&region, fdim)?;
    let report = ProjectorReport {
        dim,
        region: &region,
        rank: built.rank,
        boundary_energy: built.boundary_energy,
        trace: built.operator.trace().re,
        hermiticity_defect: built.operator.hermiticity_defect(),
        idempotency_defect: built.operator.idempotency_defect(),
        operator: include_matrix.then_some(&built.operator),
    };
    Ok(Outcome::ok(to_pretty_json(&report)?))
}

#[derive(Serialize)]
struct GridReport<'a> {
    kind: &'static str,
    dim: usize,
    region: &'a RegionSpec,
    rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary_energy: Option<f64>,
    normalization: &'static str,
    grid: &'a PhaseGrid,
}

fn run_grid(
    kind: GridKind,
    dim: usize,
    region: RegionSpec,
    bounds: GridBounds,
    resolution: usize,
    format: Format,
) -> Result<Outcome, CmdError> {
    let fdim = check_dim(dim)?;
    check_resolution(resolution)?;
    gate_region(dim, &region)?;
    let auto = auto_half_width(&region);
    let (p_min, p_max) = resolve_axis(bounds.p_min, bounds.p_max, auto, "p")?;
    let (q_min, q_max) = resolve_axis(bounds.q_min, bounds.q_max, auto, "q")?;
    let built = region_projector(&region, fdim)?;
    let p_axis = linspace(p_min, p_max, resolution)?;
    let q_axis = linspace(q_min, q_max, resolution)?;
    // Grid accuracy is the caller's responsibility; flag corners the basis
    // cannot resolve (coherent tail above d) without touching the output.
    let corner = p_min.abs().max(p_max.abs()).hypot(q_min.abs().max(q_max.abs()));
    let reach = corner * corner / 2.0;
    if (built.rank as f64 - 1.0) + reach + 7.0 * reach.sqrt() > dim as f64 {
        eprintln!(
            "warning: grid corners reach |z|^2 = {reach:.1}; values far from the region \
             are truncation-limited at dim {dim}"
        );
    }
    let grid = match kind {
        GridKind::Wigner => wigner_grid(&built.operator, &p_axis, &q_axis)?,
        GridKind::Husimi => husimi_grid(&built.operator, &p_axis, &q_axis)?,
    };
    let text = match format {
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# kind: {}", kind.name());
            let _ = writeln!(out, "# dim: {dim}");
            let _ = writeln!(out, "# region: {}", to_compact_json(&region)?);
            let _ = writeln!(out, "# rank: {}", built.rank);
            if let Some(k) = built.boundary_energy {
                let _ = writeln!(out, "# boundary_energy: {}", float_cell(k));
            }
            let _ = writeln!(out, "# normalization: {}", kind.normalization());
            let mut body = Vec::new();
            grid.to_csv(&mut body)
                .map_err(|e| CmdError::invalid(format!("grid formatting failed: {e}")))?;
            out.push_str(&String::from_utf8(body).expect("CSV is ASCII"));
            out
        }
        Format::Json => to_pretty_json(&GridReport {
            kind: kind.name(),
            dim,
            region: &region,
            rank: built.rank,
            boundary_energy: built.boundary_energy,
            normalization: kind.normalization(),
            grid: &grid,
        })?,
    };
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct EvolveReport {
    dim: usize,
    n_max: usize,
    center: PhasePoint,
    time: f64,
    flowed_center: PhasePoint,
    defect: f64,
    tolerance: f64,
    pass: bool,
}

/// Heisenberg evolution of a displaced projector against reconstruction at
/// the backward-flowed center; the two agree up to truncation round-off.
fn run_evolve(
    dim: usize,
    n_max: usize,
    center: PhasePoint,
    time: f64,
    tolerance: f64,
) -> Result<Outcome, CmdError> {
    let fdim = check_dim(dim)?;
    check_tolerance(tolerance)?;
    if !time.is_finite() {
        return Err(CmdError::invalid(format!("time must be finite, got {time}")));
    }
    truncation_gate(dim, n_max, center)?;
    let e = displaced_projector(n_max, center, fdim)?;
    let evolved = evolve_projector(&e, time)?;
    let flowed = classical_flow(center, -time);
    let reconstructed = displaced_projector(n_max, flowed, fdim)?;
    let defect = evolved.max_abs_diff(&reconstructed);
    let pass = defect <= tolerance;
    let report = EvolveReport {
        dim,
        n_max,
        center,
        time,
        flowed_center: flowed,
        defect,
        tolerance,
        pass,
    };
    Ok(Outcome { text: to_pretty_json(&report)?, ok: pass })
}

fn run_histories(
    descriptor: HistoryDescriptor,
    tolerance_override: Option<f64>,
) -> Result<Outcome, CmdError> {
    check_dim(descriptor.dim)?;
    for step in &descriptor.steps {
        gate_region(descriptor.dim, &step.region)?;
    }
    let tolerance = tolerance_override
        .or(descriptor.tolerance)
        .unwrap_or(DEFAULT_DECOHERENCE_TOL);
    check_tolerance(tolerance)?;
    let spec = descriptor.build()?;
    let report = decoherence_functional_with_tolerance(&spec, tolerance)?;
    let decoherent = report.decoherent;
    Ok(Outcome { text: to_pretty_json(&report)?, ok: decoherent })
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String, CmdError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CmdError::invalid(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn to_compact_json<T: Serialize>(value: &T) -> Result<String, CmdError> {
    serde_json::to_string(value).map_err(|e| CmdError::invalid(format!("serialization failed: {e}")))
}
