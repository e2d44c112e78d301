//! Objective episode metrics and grouped summaries.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::DistanceMatrix;
use crate::planner::path_cost;
use crate::session::{AssistanceFidelity, EpisodeTrace, Event};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("trace is incomplete")]
    IncompleteTrace,
    #[error("no distance traveled")]
    ZeroTravel,
    #[error("nothing to summarize")]
    EmptyGroup,
    #[error("trace has no metrics block")]
    MissingMetrics,
    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub normalized_deviations: f64,
    pub ipl: f64,
    pub task_distance: f64,
    pub completion_steps: u64,
    pub replans: usize,
    /// Set when the episode was abandoned before completion.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub partial: bool,
}

/// Replans over the `2n` pick/place visits.
pub fn normalized_deviations(trace: &EpisodeTrace) -> Result<f64, MetricsError> {
    if !trace.complete {
        return Err(MetricsError::IncompleteTrace);
    }
    Ok(deviation_ratio(trace.replans, trace.n()))
}

fn deviation_ratio(replans: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        replans as f64 / (2 * n) as f64
    }
}

/// Geodesic length of the visit sequence over the distance actually walked.
pub fn ipl(trace: &EpisodeTrace, dist: &DistanceMatrix) -> Result<f64, MetricsError> {
    if trace.traveled <= 0.0 {
        return Err(MetricsError::ZeroTravel);
    }
    Ok(path_cost(&trace.visits, dist) / trace.traveled)
}

pub fn task_distance(trace: &EpisodeTrace) -> f64 {
    trace.traveled
}

/// All metrics at once. Abandoned episodes are scored on what happened so far
/// and flagged `partial`; an episode with no movement has IPL 1.
pub fn evaluate(trace: &EpisodeTrace, dist: &DistanceMatrix) -> EpisodeMetrics {
    EpisodeMetrics {
        normalized_deviations: deviation_ratio(trace.replans, trace.n()),
        ipl: ipl(trace, dist).unwrap_or(1.0),
        task_distance: task_distance(trace),
        completion_steps: trace.steps,
        replans: trace.replans,
        partial: !trace.complete,
    }
}

/// Count deviations by replaying the visits against the plans stored in the trace.
pub fn count_deviations(trace: &EpisodeTrace) -> usize {
    let mut plans = trace.events.iter().filter_map(|r| match &r.event {
        Event::Replan { route, .. } => Some(route),
        _ => None,
    });
    let mut current = &trace.initial_plan;
    let mut count = 0;
    for (step, &visit) in trace.visits.iter().enumerate().skip(1) {
        if current.0.get(step) != Some(&visit) {
            count += 1;
            current = plans.next().expect("every deviation stores its replan");
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub fidelity: AssistanceFidelity,
    pub difficulty: usize,
    pub policy: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub sd: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Result<Self, MetricsError> {
        if values.is_empty() {
            return Err(MetricsError::EmptyGroup);
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count < 2 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (count - 1) as f64).sqrt()
        };
        Ok(Self { mean, sd, count })
    }
}

pub const METRIC_NAMES: [&str; 5] = ["normalized_deviations", "ipl", "task_distance", "completion_steps", "replans"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub key: GroupKey,
    /// In `METRIC_NAMES` order.
    pub stats: Vec<Stat>,
}

impl SummaryRow {
    pub fn stat(&self, metric: &str) -> Option<Stat> {
        METRIC_NAMES.iter().position(|&m| m == metric).map(|i| self.stats[i])
    }
}

fn metric_values(m: &EpisodeMetrics) -> [f64; 5] {
    [m.normalized_deviations, m.ipl, m.task_distance, m.completion_steps as f64, m.replans as f64]
}

/// Group by (fidelity, difficulty, policy), sorted by key.
pub fn summarize(traces: &[EpisodeTrace]) -> Result<Vec<SummaryRow>, MetricsError> {
    if traces.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    let mut groups: BTreeMap<GroupKey, Vec<[f64; 5]>> = BTreeMap::new();
    for t in traces {
        let m = t.metrics.as_ref().ok_or(MetricsError::MissingMetrics)?;
        let key = GroupKey { fidelity: t.fidelity, difficulty: t.scenario.difficulty, policy: t.policy.clone() };
        groups.entry(key).or_default().push(metric_values(m));
    }
    groups
        .into_iter()
        .map(|(key, rows)| {
            let stats = (0..METRIC_NAMES.len())
                .map(|i| Stat::of(&rows.iter().map(|r| r[i]).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SummaryRow { key, stats })
        })
        .collect()
}

/// `fidelity,difficulty,policy` then `<metric>_mean,<metric>_sd,<metric>_count` per metric.
pub fn summary_header() -> Vec<String> {
    let mut header: Vec<String> = ["fidelity", "difficulty", "policy"].map(String::from).to_vec();
    for m in METRIC_NAMES {
        for suffix in ["mean", "sd", "count"] {
            header.push(format!("{m}_{suffix}"));
        }
    }
    header
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<(), MetricsError> {
    let csv_err = |e: csv::Error| MetricsError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(summary_header()).map_err(csv_err)?;
    for row in rows {
        let mut record = vec![row.key.fidelity.to_string(), row.key.difficulty.to_string(), row.key.policy.clone()];
        for s in &row.stats {
            record.extend([s.mean.to_string(), s.sd.to_string(), s.count.to_string()]);
        }
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| MetricsError::Csv(e.to_string()))
}
