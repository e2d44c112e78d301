//! Batch experiments and the file formats around them.

mod batch;
mod config;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use batch::{
    load_traces, plan_episodes, run_batch, run_episodes, trace_file_name, write_batch, BatchOutput, EpisodeSpec,
};
pub use config::ExperimentConfig;

use crate::agents::AgentError;
use crate::env::{load_map, EnvError, GridMap};
use crate::metrics::MetricsError;
use crate::task::{parse_bins, Bin, TaskError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("episode {ordinal}: {source}")]
    Episode { ordinal: usize, source: AgentError },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: invalid trace: {message}")]
    BadTrace { path: PathBuf, message: String },
}

pub(crate) fn read_text(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.to_path_buf(), message: e.to_string() })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::Io { path: dir.to_path_buf(), message: e.to_string() })?;
    }
    fs::write(path, text).map_err(|e| HarnessError::Io { path: path.to_path_buf(), message: e.to_string() })
}

/// `<dir>/<stem>.bins.json` for a map at `<dir>/<stem>.map`.
pub fn default_bins_path(map: &Path) -> PathBuf {
    let stem = map.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    map.with_file_name(format!("{stem}.bins.json"))
}

/// Map name used in scenarios: the file stem.
pub fn map_name(map: &Path) -> String {
    map.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "map".into())
}

pub fn load_map_file(path: &Path) -> Result<GridMap, HarnessError> {
    Ok(load_map(&read_text(path)?)?)
}

pub fn load_bins_file(path: &Path) -> Result<Vec<Bin>, HarnessError> {
    Ok(parse_bins(&read_text(path)?)?)
}

pub fn write_trace(path: &Path, trace: &crate::session::EpisodeTrace) -> Result<(), HarnessError> {
    write_text(path, &trace.to_json())
}
