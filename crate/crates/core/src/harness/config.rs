use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agents::AgentPolicy;
use crate::planner::{SolverPolicy, DEFAULT_BUDGET};
use crate::session::AssistanceFidelity;
use crate::task::STANDARD_DIFFICULTIES;

/// A batch experiment over difficulties × fidelities × policies × seeds.
///
/// Relative paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: PathBuf,
    /// Bin placements; defaults to `<map stem>.bins.json` next to the map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<PathBuf>,
    pub difficulties: Vec<usize>,
    pub fidelities: Vec<AssistanceFidelity>,
    pub policies: Vec<AgentPolicy>,
    pub seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub solver_policy: SolverPolicy,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = super::read_text(path)?;
        let mut config = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.map = base.join(&config.map);
        config.bins = config.bins.map(|b| base.join(b));
        config.out_dir = config.out_dir.map(|o| base.join(o));
        Ok(config)
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        if self.difficulties.is_empty() || self.fidelities.is_empty() || self.policies.is_empty() {
            return bad("difficulties, fidelities and policies must be nonempty".into());
        }
        if let Some(n) = self.difficulties.iter().find(|n| !STANDARD_DIFFICULTIES.contains(n)) {
            return bad(format!("difficulty {n} is not one of {STANDARD_DIFFICULTIES:?}"));
        }
        for p in &self.policies {
            p.validate().map_err(HarnessError::Config)?;
        }
        Ok(())
    }

    pub fn episode_count(&self) -> usize {
        self.seeds * self.difficulties.len() * self.fidelities.len() * self.policies.len()
    }

    pub fn bins_path(&self) -> PathBuf {
        self.bins.clone().unwrap_or_else(|| super::default_bins_path(&self.map))
    }
}
