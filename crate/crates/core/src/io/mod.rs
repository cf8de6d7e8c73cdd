//! Configuration files, trace files, plots and manifests.

pub mod config;
pub mod csv;
pub mod manifest;
pub mod svg;

use std::fs::File;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};

use twofloat::TwoFloat;

use crate::engine::{run, EngineError};
use crate::invariants::{capture_margins, check_all};
use crate::scalar::Scalar;
use crate::trace::{CaptureEvent, Trace};
use crate::verdict::Verdict;
use config::{ConfigError, Precision, RunConfig};
use csv::TraceReadError;
use manifest::RunManifest;
use svg::SvgOptions;

/// A trace in the precision its configuration asks for.
#[derive(Clone, Debug)]
pub enum AnyTrace {
    Standard(Trace<f64>),
    Extended(Trace<TwoFloat>),
}

macro_rules! each {
    ($self:expr, $t:ident => $body:expr) => {
        match $self {
            AnyTrace::Standard($t) => $body,
            AnyTrace::Extended($t) => $body,
        }
    };
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Path of the hex sidecar belonging to `csv_path`.
pub fn hex_sidecar(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".hex");
    PathBuf::from(name)
}

impl AnyTrace {
    /// Runs the game described by `config`.
    pub fn simulate(config: &RunConfig) -> Result<Self, RunError> {
        Ok(match config.precision {
            Precision::Standard => AnyTrace::Standard(run(&config.game::<f64>()?)?),
            Precision::Extended => AnyTrace::Extended(run(&config.game::<TwoFloat>()?)?),
        })
    }

    /// Reads `path`, preferring its hex sidecar for extended configurations.
    pub fn read(path: &Path, config: &RunConfig) -> Result<Self, TraceReadError> {
        let open = |p: &Path| File::open(p).map(|f| BufReader::with_capacity(1 << 16, f));
        let csv_file = open(path)?;
        Ok(match config.precision {
            Precision::Standard => {
                AnyTrace::Standard(csv::read_trace(csv_file, None::<File>, config)?)
            }
            Precision::Extended => {
                let hex = hex_sidecar(path);
                let sidecar = if hex.exists() {
                    Some(open(&hex)?)
                } else {
                    None
                };
                AnyTrace::Extended(csv::read_trace(csv_file, sidecar, config)?)
            }
        })
    }

    /// Writes the CSV, plus the hex sidecar for extended traces.
    pub fn write(&self, path: &Path) -> io::Result<u64> {
        let bytes = each!(self, t => csv::write_trace_csv(t, File::create(path)?)?);
        if let AnyTrace::Extended(t) = self {
            csv::write_trace_hex(t, File::create(hex_sidecar(path))?)?;
        }
        Ok(bytes)
    }

    pub fn len(&self) -> usize {
        each!(self, t => t.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capture(&self) -> Option<&CaptureEvent> {
        each!(self, t => t.capture.as_ref())
    }

    pub fn check_all(&self) -> Vec<Verdict> {
        each!(self, t => check_all(t))
    }

    pub fn capture_margins(&self) -> Vec<(usize, f64, f64)> {
        each!(self, t => capture_margins(t))
    }

    pub fn render_svg(&self, options: &SvgOptions) -> String {
        each!(self, t => svg::render_svg(t, options))
    }

    pub fn manifest(&self, config: &RunConfig) -> RunManifest {
        each!(self, t => RunManifest::new(config, t))
    }

    pub fn end_time(&self) -> f64 {
        each!(self, t => t.times.last().map_or(0.0, |v| v.as_f64()))
    }
}
