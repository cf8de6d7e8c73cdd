//! Run manifest written next to a trace.

use serde::{Deserialize, Serialize};

use crate::io::config::{Precision, RunConfig};
use crate::params::{ParameterRecord, PrecisionDiagnostic};
use crate::scalar::Scalar;
use crate::trace::{CaptureEvent, Trace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub cascade_echo: Vec<ParameterRecord>,
    pub tool_version: String,
    pub config_digest: String,
    pub precision: Precision,
    pub samples: usize,
    pub end_time: f64,
    pub capture: Option<CaptureEvent>,
    pub diagnostics: Vec<PrecisionDiagnostic>,
}

impl RunManifest {
    pub fn new<S: Scalar>(config: &RunConfig, trace: &Trace<S>) -> Self {
        Self {
            config: config.clone(),
            cascade_echo: trace.cascade.records(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: config.digest(),
            precision: config.precision,
            samples: trace.len(),
            end_time: trace.times.last().map_or(0.0, |t| t.as_f64()),
            capture: trace.capture.clone(),
            diagnostics: trace.cascade.diagnostics.clone(),
        }
    }

    /// The digest recomputed from the embedded configuration matches.
    pub fn digest_matches(&self) -> bool {
        self.config.digest() == self.config_digest
    }
}
