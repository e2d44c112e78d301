use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{load_bins_file, load_map_file, map_name, read_text, write_text, ExperimentConfig, HarnessError};
use crate::agents::{run_episode, AgentPolicy};
use crate::env::GridMap;
use crate::metrics::{count_deviations, evaluate, summarize, write_summary_csv, SummaryRow};
use crate::session::{AssistanceFidelity, EpisodeTrace, SessionConfig};
use crate::task::{Bin, Scenario, SceneGenerator, TaskError};

/// One cell of the experiment grid for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSpec {
    pub ordinal: usize,
    pub seed_index: usize,
    pub scenario_seed: u64,
    pub difficulty: usize,
    pub fidelity: AssistanceFidelity,
    pub policy: AgentPolicy,
}

/// Episodes in ordinal order: seed, then difficulty, fidelity, policy.
pub fn plan_episodes(config: &ExperimentConfig) -> Vec<EpisodeSpec> {
    let mut out = Vec::with_capacity(config.episode_count());
    for seed_index in 0..config.seeds {
        for &difficulty in &config.difficulties {
            for &fidelity in &config.fidelities {
                for &policy in &config.policies {
                    out.push(EpisodeSpec {
                        ordinal: out.len(),
                        seed_index,
                        scenario_seed: config.master_seed.wrapping_add(seed_index as u64),
                        difficulty,
                        fidelity,
                        policy,
                    });
                }
            }
        }
    }
    out
}

/// Run every episode of the grid. Output is in ordinal order regardless of scheduling.
pub fn run_episodes(
    map: Arc<GridMap>,
    map_name: &str,
    bins: &[Bin],
    config: &ExperimentConfig,
) -> Result<Vec<EpisodeTrace>, HarnessError> {
    config.check()?;
    // one pool per seed, shared by all difficulties so scenes nest
    let scenarios: Vec<BTreeMap<usize, Scenario>> = (0..config.seeds)
        .into_par_iter()
        .map(|seed_index| {
            let generator = SceneGenerator {
                map: &map,
                map_name: map_name.to_string(),
                bins: bins.to_vec(),
                seed: config.master_seed.wrapping_add(seed_index as u64),
            };
            let pool = generator.pool()?;
            config
                .difficulties
                .iter()
                .map(|&n| Ok((n, generator.scenario(&pool, n)?)))
                .collect::<Result<BTreeMap<_, _>, TaskError>>()
        })
        .collect::<Result<_, _>>()?;

    let specs = plan_episodes(config);
    let results: Vec<Result<EpisodeTrace, HarnessError>> = specs
        .par_iter()
        .map(|spec| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
            rng.set_stream(spec.ordinal as u64);
            let session_config = SessionConfig {
                solver_policy: config.solver_policy,
                budget: config.budget,
                rng_seed: spec.scenario_seed,
                ..SessionConfig::new(spec.fidelity)
            };
            let scenario = scenarios[spec.seed_index][&spec.difficulty].clone();
            log::debug!("episode {} ({} n={} {})", spec.ordinal, spec.fidelity, spec.difficulty, spec.policy);
            run_episode(map.clone(), scenario, session_config, &spec.policy, &mut rng)
                .map_err(|source| HarnessError::Episode { ordinal: spec.ordinal, source })
        })
        .collect();
    results.into_iter().collect()
}

pub struct BatchOutput {
    pub traces: Vec<EpisodeTrace>,
    pub summary: Vec<SummaryRow>,
}

/// Load the config's map and bins, run the grid and summarize.
pub fn run_batch(config: &ExperimentConfig) -> Result<BatchOutput, HarnessError> {
    let map = Arc::new(load_map_file(&config.map)?);
    let bins = load_bins_file(&config.bins_path())?;
    let traces = run_episodes(map, &map_name(&config.map), &bins, config)?;
    let summary = summarize(&traces)?;
    Ok(BatchOutput { traces, summary })
}

pub fn trace_file_name(ordinal: usize, trace: &EpisodeTrace) -> String {
    let policy = trace.policy.replace(':', "-");
    format!(
        "{ordinal:05}-{}-n{}-{policy}-s{}.json",
        trace.fidelity, trace.scenario.difficulty, trace.scenario.seed
    )
}

/// Write `traces/*.json` and `summary.csv` under `out_dir`, in ordinal order.
pub fn write_batch(output: &BatchOutput, out_dir: &Path) -> Result<(), HarnessError> {
    let trace_dir = out_dir.join("traces");
    for (ordinal, trace) in output.traces.iter().enumerate() {
        write_text(&trace_dir.join(trace_file_name(ordinal, trace)), &trace.to_json())?;
    }
    let mut csv = Vec::new();
    write_summary_csv(&output.summary, &mut csv)?;
    write_text(&out_dir.join("summary.csv"), &String::from_utf8(csv).expect("csv is utf-8"))
}

/// Read every `*.json` trace in `dir` (sorted by name) and re-validate it.
///
/// With a map, metrics are recomputed from scratch and must match the stored block.
pub fn load_traces(dir: &Path, map: Option<&GridMap>) -> Result<Vec<(PathBuf, EpisodeTrace)>, HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io { path: dir.to_path_buf(), message: e.to_string() };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .map(|entry| entry.map(|e| e.path()).map_err(io))
        .collect::<Result<Vec<_>, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let bad = |message: String| HarnessError::BadTrace { path: path.clone(), message };
            let trace = EpisodeTrace::from_json(&read_text(&path)?).map_err(bad)?;
            if let Some(v) = trace.violations().first() {
                return Err(bad(v.to_string()));
            }
            let recount = count_deviations(&trace);
            if recount != trace.replans {
                return Err(bad(format!("{} replans recorded, {recount} deviations replayed", trace.replans)));
            }
            if let Some(map) = map {
                let index = crate::task::index_locations(&trace.scenario);
                let dist = index.distances(map)?;
                if trace.metrics.as_ref() != Some(&evaluate(&trace, &dist)) {
                    return Err(bad("stored metrics differ from recomputed ones".into()));
                }
            }
            Ok((path, trace))
        })
        .collect()
}
