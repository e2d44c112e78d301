use serde::{Deserialize, Serialize};

use super::{AssistanceFidelity, EventRecord, Session};
use crate::metrics::EpisodeMetrics;
use crate::planner::{validate, Pairing, Prefix, Route, SolverPolicy, Violation};
use crate::task::Scenario;

pub const TRACE_VERSION: u32 = 1;

/// Full record of one episode; everything the metrics need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub v: u32,
    pub scenario: Scenario,
    pub policy: String,
    pub fidelity: AssistanceFidelity,
    pub solver_policy: SolverPolicy,
    pub capacity: usize,
    pub initial_plan: Route,
    pub initial_cost: f64,
    /// Executed visit sequence, depot first.
    pub visits: Vec<usize>,
    pub traveled: f64,
    pub steps: u64,
    pub replans: usize,
    pub complete: bool,
    pub events: Vec<EventRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<EpisodeMetrics>,
}

impl EpisodeTrace {
    pub fn n(&self) -> usize {
        self.scenario.objects.len()
    }

    /// Check the visit sequence against the routing constraints.
    pub fn violations(&self) -> Vec<Violation> {
        let pairing = Pairing::standard(self.n());
        let prefix = Prefix(self.visits.clone());
        if self.complete {
            validate(&Route(self.visits.clone()), &pairing, self.capacity, &prefix)
        } else {
            match crate::planner::check_prefix(&prefix, &pairing, self.capacity) {
                Ok(()) => Vec::new(),
                Err(e) => vec![Violation {
                    family: crate::planner::ConstraintFamily::Prefix,
                    step: 0,
                    detail: e.to_string(),
                }],
            }
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("trace serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let trace: EpisodeTrace = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if trace.v != TRACE_VERSION {
            return Err(format!("unsupported trace version {}", trace.v));
        }
        Ok(trace)
    }
}

impl Session {
    /// Export the episode so far; `metrics` is filled in when it can be computed.
    pub fn trace(&self, policy: &str) -> EpisodeTrace {
        let mut trace = EpisodeTrace {
            v: TRACE_VERSION,
            scenario: self.scenario().clone(),
            policy: policy.to_string(),
            fidelity: self.fidelity(),
            solver_policy: self.config().solver_policy,
            capacity: self.capacity(),
            initial_plan: self.initial_plan().route.clone(),
            initial_cost: self.initial_plan().cost,
            visits: self.prefix().0.clone(),
            traveled: self.traveled(),
            steps: self.steps(),
            replans: self.replans(),
            complete: self.is_done(),
            events: self.events().to_vec(),
            metrics: None,
        };
        trace.metrics = Some(crate::metrics::evaluate(&trace, self.distances()));
        trace
    }
}
