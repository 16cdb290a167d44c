//! JSON run configuration: one file describes one command, as an
//! alternative to command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use fockproj::histories::HistoryDescriptor;
use fockproj::projector::RegionSpec;
use fockproj::PhasePoint;

use crate::commands::{CmdError, Format, GridBounds, GridKind, Job, Resolved};

fn default_resolution() -> usize {
    101
}

fn default_true() -> bool {
    true
}

fn default_tolerance() -> f64 {
    1e-9
}

/// History input: a path to a descriptor file or the descriptor inline.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpecSource {
    Path(PathBuf),
    Inline(HistoryDescriptor),
}

impl SpecSource {
    pub fn load(self) -> Result<HistoryDescriptor, CmdError> {
        match self {
            SpecSource::Inline(descriptor) => Ok(descriptor),
            SpecSource::Path(path) => {
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CmdError::invalid(format!("cannot read history spec {}: {e}", path.display()))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    CmdError::invalid(format!("malformed history spec {}: {e}", path.display()))
                })
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum FileConfig {
    Lambda {
        #[serde(rename = "R")]
        radius: f64,
        count: usize,
        #[serde(default)]
        format: Format,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Projector {
        dim: usize,
        region: RegionSpec,
        #[serde(default = "default_true")]
        include_matrix: bool,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Wigner {
        dim: usize,
        region: RegionSpec,
        #[serde(default)]
        p_min: Option<f64>,
        #[serde(default)]
        p_max: Option<f64>,
        #[serde(default)]
        q_min: Option<f64>,
        #[serde(default)]
        q_max: Option<f64>,
        #[serde(default = "default_resolution")]
        resolution: usize,
        #[serde(default)]
        format: Format,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Husimi {
        dim: usize,
        region: RegionSpec,
        #[serde(default)]
        p_min: Option<f64>,
        #[serde(default)]
        p_max: Option<f64>,
        #[serde(default)]
        q_min: Option<f64>,
        #[serde(default)]
        q_max: Option<f64>,
        #[serde(default = "default_resolution")]
        resolution: usize,
        #[serde(default)]
        format: Format,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Evolve {
        dim: usize,
        n_max: usize,
        center: PhasePoint,
        time: f64,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Histories {
        spec: SpecSource,
        #[serde(default)]
        tolerance: Option<f64>,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Verify {
        #[serde(default)]
        force_fail: bool,
        #[serde(default)]
        output: Option<PathBuf>,
    },
}

pub fn load(path: &Path) -> Result<FileConfig, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::invalid(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CmdError::invalid(format!("malformed config {}: {e}", path.display())))
}

impl FileConfig {
    pub fn resolve(self) -> Result<Resolved, CmdError> {
        Ok(match self {
            FileConfig::Lambda { radius, count, format, output } => Resolved {
                job: Job::Lambda { radius, count, format },
                output,
            },
            FileConfig::Projector { dim, region, include_matrix, output } => Resolved {
                job: Job::Projector { dim, region, include_matrix },
                output,
            },
            FileConfig::Wigner {
                dim, region, p_min, p_max, q_min, q_max, resolution, format, output,
            } => Resolved {
                job: Job::Grid {
                    kind: GridKind::Wigner,
                    dim,
                    region,
                    bounds: GridBounds { p_min, p_max, q_min, q_max },
                    resolution,
                    format,
                },
                output,
            },
            FileConfig::Husimi {
                dim, region, p_min, p_max, q_min, q_max, resolution, format, output,
            } => Resolved {
                job: Job::Grid {
                    kind: GridKind::Husimi,
                    dim,
                    region,
                    bounds: GridBounds { p_min, p_max, q_min, q_max },
                    resolution,
                    format,
                },
                output,
            },
            FileConfig::Evolve { dim, n_max, center, time, tolerance, output } => Resolved {
                job: Job::Evolve { dim, n_max, center, time, tolerance },
                output,
            },
            FileConfig::Histories { spec, tolerance, output } => Resolved {
                job: Job::Histories { descriptor: spec.load()?, tolerance },
                output,
            },
            FileConfig::Verify { force_fail, output } => Resolved {
                job: Job::Verify { force_fail },
                output,
            },
        })
    }
}
