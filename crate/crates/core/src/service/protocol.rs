use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::env::Point;
use crate::metrics::EpisodeMetrics;
use crate::planner::{Prefix, Route, SolverPolicy};
use crate::session::{
    AssistanceFidelity, AssistancePayload, EpisodeTrace, EventRecord, ObjectState, SessionSnapshot,
};
use crate::task::{ObjectId, Scenario};

pub const PROTOCOL_VERSION: u32 = 1;

/// Envelope shared by every message in both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub v: u32,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    pub seq: u64,
    #[serde(default)]
    pub body: Value,
}

impl Frame {
    pub fn new(kind: &str, session_id: Option<String>, seq: u64, body: impl Serialize) -> Self {
        Self {
            v: PROTOCOL_VERSION,
            kind: kind.to_string(),
            session_id,
            seq,
            body: serde_json::to_value(body).expect("protocol bodies serialize"),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("frames serialize")
    }
}

/// Where the scenario for a new session comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSource {
    /// A full scenario document; its `map_name` must be known to the server.
    Inline(Box<Scenario>),
    /// Generate on the server from a known map.
    Generate { map: String, seed: u64, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartBody {
    pub scenario: ScenarioSource,
    pub fidelity: AssistanceFidelity,
    #[serde(default)]
    pub solver_policy: SolverPolicy,
    #[serde(default)]
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapView {
    pub name: String,
    pub width: usize,
    pub height: usize,
    /// The map document, including its room section.
    pub text: String,
}

/// Reply to `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartedBody {
    pub protocol_version: u32,
    pub map: MapView,
    pub scenario: Scenario,
    pub snapshot: SessionSnapshot,
    pub assist: AssistancePayload,
    pub state_hash: String,
}

/// Changed snapshot fields; absent means unchanged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StateDelta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knapsack: Option<Vec<ObjectId>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objects: Vec<(ObjectId, ObjectState)>,
    /// Visits appended to the history.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub visits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Route>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traveled: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replans: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub done: Option<bool>,
    /// Always present: the message bar after this action.
    pub message: Option<String>,
    /// Events appended to the log.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventRecord>,
}

impl StateDelta {
    pub fn between(before: &SessionSnapshot, after: &SessionSnapshot, new_events: &[EventRecord]) -> Self {
        fn changed<T: PartialEq + Clone>(a: &T, b: &T) -> Option<T> {
            (a != b).then(|| b.clone())
        }
        Self {
            position: changed(&before.position, &after.position),
            knapsack: changed(&before.knapsack, &after.knapsack),
            objects: after.objects.iter().filter(|o| !before.objects.contains(o)).cloned().collect(),
            visits: after.prefix.0[before.prefix.len()..].to_vec(),
            plan: changed(&before.plan, &after.plan),
            plan_cost: changed(&before.plan_cost, &after.plan_cost),
            traveled: changed(&before.traveled, &after.traveled),
            steps: changed(&before.steps, &after.steps),
            replans: changed(&before.replans, &after.replans),
            done: changed(&before.done, &after.done),
            message: after.message.clone(),
            events: new_events.to_vec(),
        }
    }

    pub fn apply(&self, snapshot: &mut SessionSnapshot) {
        let StateDelta {
            position,
            knapsack,
            objects,
            visits,
            plan,
            plan_cost,
            traveled,
            steps,
            replans,
            done,
            message,
            events,
        } = self.clone();
        if let Some(p) = position {
            snapshot.position = p;
        }
        if let Some(k) = knapsack {
            snapshot.knapsack = k;
        }
        for (id, state) in objects {
            if let Some(slot) = snapshot.objects.iter_mut().find(|(o, _)| *o == id) {
                slot.1 = state;
            }
        }
        snapshot.prefix = Prefix([snapshot.prefix.0.clone(), visits].concat());
        if let Some(p) = plan {
            snapshot.plan = p;
        }
        if let Some(c) = plan_cost {
            snapshot.plan_cost = c;
        }
        if let Some(t) = traveled {
            snapshot.traveled = t;
        }
        if let Some(s) = steps {
            snapshot.steps = s;
        }
        if let Some(r) = replans {
            snapshot.replans = r;
        }
        if let Some(d) = done {
            snapshot.done = d;
        }
        snapshot.message = message;
        snapshot.events += events.len();
    }
}

/// Reply to `action`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActedBody {
    pub accepted: bool,
    pub replanned: bool,
    pub delta: StateDelta,
    pub assist: AssistancePayload,
    pub message: Option<String>,
    pub state_hash: String,
}

/// Reply to an `assist` query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssistBody {
    pub assist: AssistancePayload,
    pub state_hash: String,
}

/// Reply to `finish`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBody {
    pub metrics: EpisodeMetrics,
    pub partial: bool,
    pub trace: EpisodeTrace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_file: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadFrame,
    UnsupportedVersion,
    UnknownType,
    UnknownSession,
    BadScenario,
    SessionComplete,
    UnknownObject,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: ErrorCode,
    pub message: String,
}

/// Hex SHA-256 of the snapshot's JSON.
pub fn state_hash(snapshot: &SessionSnapshot) -> String {
    let bytes = serde_json::to_vec(snapshot).expect("snapshot serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Label recorded in traces of interactive sessions.
pub const HUMAN_POLICY: &str = "human";
