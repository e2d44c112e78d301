//! Live task state: movement, pick/place with the knapsack and reach rules,
//! deviation detection and replanning, and assistance rendering.

mod assist;
mod event;
mod state;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assist::{AssistancePayload, Checklist, ChecklistItem, Highlight};
pub use event::{Action, Event, EventRecord, Outcome, RejectReason};
pub use state::{ObjectState, Session, SessionConfig, SessionSnapshot, DEFAULT_INTERACT_RADIUS};
pub use trace::{EpisodeTrace, TRACE_VERSION};

use crate::env::EnvError;
use crate::planner::PlanError;
use crate::task::{ObjectId, TaskError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssistanceFidelity {
    /// Checklist only.
    None,
    /// Flags over unresolved objects, room names in the checklist.
    Highlight,
    /// Breadcrumbs to the next planned location and a numbered plan.
    Optimal,
}

impl AssistanceFidelity {
    pub const ALL: [AssistanceFidelity; 3] =
        [AssistanceFidelity::None, AssistanceFidelity::Highlight, AssistanceFidelity::Optimal];

    pub fn as_str(self) -> &'static str {
        match self {
            AssistanceFidelity::None => "none",
            AssistanceFidelity::Highlight => "highlight",
            AssistanceFidelity::Optimal => "optimal",
        }
    }
}

impl fmt::Display for AssistanceFidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AssistanceFidelity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown fidelity '{s}' (expected none, highlight or optimal)"))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
    #[error("session complete")]
    Complete,
    #[error("visit to location {index} is not feasible: {detail}")]
    InfeasibleVisit { index: usize, detail: String },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Env(#[from] EnvError),
}
