use serde::{Deserialize, Serialize};

use crate::env::{Direction, Point};
use crate::planner::{Route, SolverKind};
use crate::task::ObjectId;

/// A user input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Move { dir: Direction },
    Pick { object: ObjectId },
    Place { object: ObjectId },
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Move { .. } => "move",
            Action::Pick { .. } => "pick",
            Action::Place { .. } => "place",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Blocked,
    TooFar,
    KnapsackFull,
    AlreadyPicked,
    NotHeld,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Move {
        dir: Direction,
        to: Point,
    },
    Pick {
        object: ObjectId,
        location: usize,
        deviated: bool,
    },
    Place {
        object: ObjectId,
        location: usize,
        deviated: bool,
    },
    /// New plan after a deviating visit; `expected` was the old plan's next location.
    Replan {
        expected: usize,
        visited: usize,
        route: Route,
        cost: f64,
        solver: SolverKind,
    },
    Reject {
        action: Action,
        reason: RejectReason,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    /// Position in the log; strictly increasing.
    pub step: u64,
    #[serde(flatten)]
    pub event: Event,
}

/// What one action did, for the caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub accepted: bool,
    pub replanned: bool,
    pub done: bool,
    pub message: Option<String>,
}
