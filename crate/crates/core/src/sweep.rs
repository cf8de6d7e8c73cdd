//! Batch runs over a directory of configurations.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::config::RunConfig;
use crate::io::AnyTrace;
use crate::trace::CaptureEvent;
use crate::verdict::Verdict;

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "ESCAPE_SIM_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub name: String,
    pub config_digest: Option<String>,
    pub samples: usize,
    pub end_time: f64,
    pub capture: Option<CaptureEvent>,
    pub pass: bool,
    pub verdicts: Vec<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub all_pass: bool,
}

/// Worker count: `requested`, else the environment cap, else all cores.
pub fn worker_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| {
            std::env::var(THREADS_ENV)
                .ok()
                .and_then(|v| v.trim().parse().ok())
        })
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// `*.json` files directly inside `dir`, sorted by file name.
pub fn config_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

fn run_one(path: &Path) -> SweepEntry {
    let name = path
        .file_name()
        .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let failed = |digest, error: String| SweepEntry {
        name: name.clone(),
        config_digest: digest,
        samples: 0,
        end_time: 0.0,
        capture: None,
        pass: false,
        verdicts: Vec::new(),
        error: Some(error),
    };
    let config = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => return failed(None, e.to_string()),
    };
    let trace = match AnyTrace::simulate(&config) {
        Ok(t) => t,
        Err(e) => return failed(Some(config.digest()), e.to_string()),
    };
    let verdicts = trace.check_all();
    SweepEntry {
        name,
        config_digest: Some(config.digest()),
        samples: trace.len(),
        end_time: trace.end_time(),
        capture: trace.capture().cloned(),
        pass: verdicts.iter().all(|v| v.pass),
        verdicts,
        error: None,
    }
}

/// Runs every file in `files` on `threads` workers; entries keep input order.
pub fn sweep(
    files: &[PathBuf],
    threads: usize,
) -> Result<SweepReport, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()?;
    let entries: Vec<SweepEntry> = pool.install(|| files.par_iter().map(|p| run_one(p)).collect());
    let all_pass = entries.iter().all(|e| e.pass);
    Ok(SweepReport { entries, all_pass })
}
