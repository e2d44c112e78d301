//! Scripted players that stand in for people in batch experiments.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{distances_from, shortest_path, EnvError, GridMap};
use crate::planner::Role;
use crate::session::{Action, EpisodeTrace, Session, SessionConfig, SessionError};
use crate::task::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentPolicy {
    /// Always the plan's next location.
    Compliant,
    /// Closest feasible location from the current cell.
    GreedyNearest,
    /// Uniform over feasible locations.
    RandomFeasible,
    /// The plan's next location, except with probability `p_deviate` some other feasible one.
    NoisyCompliant { p_deviate: f64 },
}

impl AgentPolicy {
    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            AgentPolicy::NoisyCompliant { p_deviate } if !(0.0..=1.0).contains(&p_deviate) => {
                Err(format!("p_deviate {p_deviate} outside [0, 1]"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AgentPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentPolicy::Compliant => f.write_str("compliant"),
            AgentPolicy::GreedyNearest => f.write_str("greedy_nearest"),
            AgentPolicy::RandomFeasible => f.write_str("random_feasible"),
            AgentPolicy::NoisyCompliant { p_deviate } => write!(f, "noisy_compliant:{p_deviate}"),
        }
    }
}

/// `compliant`, `greedy_nearest`, `random_feasible` or `noisy_compliant:<p>`.
impl FromStr for AgentPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let policy = match s.split_once(':') {
            None => match s {
                "compliant" => AgentPolicy::Compliant,
                "greedy_nearest" | "greedy" => AgentPolicy::GreedyNearest,
                "random_feasible" | "random" => AgentPolicy::RandomFeasible,
                "noisy_compliant" => return Err("noisy_compliant needs a probability, e.g. noisy_compliant:0.3".into()),
                other => return Err(format!("unknown policy '{other}'")),
            },
            Some(("noisy_compliant" | "noisy", p)) => AgentPolicy::NoisyCompliant {
                p_deviate: p.parse().map_err(|_| format!("bad probability '{p}'"))?,
            },
            Some((other, _)) => return Err(format!("policy '{other}' takes no parameter")),
        };
        policy.validate()?;
        Ok(policy)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("scripted {action} was rejected: {message}")]
    Rejected { action: &'static str, message: String },
}

/// Pick the next location to visit. The session must not be done.
pub fn choose_next<R: Rng + ?Sized>(policy: &AgentPolicy, session: &Session, rng: &mut R) -> Result<usize, AgentError> {
    let options = session.feasible_next();
    let planned = session.next_planned().ok_or(SessionError::Complete)?;
    Ok(match *policy {
        AgentPolicy::Compliant => planned,
        AgentPolicy::GreedyNearest => {
            let points: Vec<_> = options.iter().map(|&i| session.index().points[i]).collect();
            let d = distances_from(session.map(), session.position(), &points)?;
            let mut best = (f64::INFINITY, usize::MAX);
            for (&loc, dist) in options.iter().zip(d) {
                let dist = dist.expect("task locations are mutually reachable");
                // options ascend, so strict improvement keeps the lowest index on ties
                if dist < best.0 {
                    best = (dist, loc);
                }
            }
            best.1
        }
        AgentPolicy::RandomFeasible => *options.choose(rng).expect("a live session has a feasible move"),
        AgentPolicy::NoisyCompliant { p_deviate } => {
            let deviate = rng.gen::<f64>() < p_deviate;
            let others: Vec<usize> = options.iter().copied().filter(|&o| o != planned).collect();
            if deviate && !others.is_empty() {
                *others.choose(rng).expect("nonempty")
            } else {
                planned
            }
        }
    })
}

/// Walk to location `target` along a shortest path, then pick or place there.
pub fn visit(session: &mut Session, target: usize) -> Result<(), AgentError> {
    let point = session.index().points[target];
    let path = shortest_path(session.map(), session.position(), point)?;
    for dir in path.directions() {
        let out = session.apply_move(dir)?;
        if !out.accepted {
            return Err(AgentError::Rejected { action: "move", message: out.message.unwrap_or_default() });
        }
    }
    let object = session.index().object_at(target).expect("target is a pickup or dropoff");
    let action = match session.index().pairing.role(target) {
        Role::Pickup(_) => Action::Pick { object },
        _ => Action::Place { object },
    };
    let out = session.apply(action)?;
    if !out.accepted {
        return Err(AgentError::Rejected { action: action.name(), message: out.message.unwrap_or_default() });
    }
    Ok(())
}

/// Play a whole episode with a scripted policy.
pub fn run_episode<R: Rng + ?Sized>(
    map: Arc<GridMap>,
    scenario: Scenario,
    config: SessionConfig,
    policy: &AgentPolicy,
    rng: &mut R,
) -> Result<EpisodeTrace, AgentError> {
    let mut session = Session::start(map, scenario, config)?;
    while !session.is_done() {
        let target = choose_next(policy, &session, rng)?;
        visit(&mut session, target)?;
    }
    Ok(session.trace(&policy.label()))
}
