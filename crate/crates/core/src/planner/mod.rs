//! Capacitated single-vehicle pickup-and-delivery: validation, exact and
//! heuristic solvers, and prefix-constrained re-solving.

mod exact;
mod heuristic;
mod instance;
mod pairing;
mod route;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exact::{solve_exact, MAX_EXACT_LOCATIONS};
pub use heuristic::{solve_heuristic, DEFAULT_BUDGET};
pub use instance::{Instance, INSTANCE_VERSION};
pub use pairing::{Pairing, Role};
pub use route::{
    check_prefix, feasible_next, path_cost, route_cost, validate, ConstraintFamily, Prefix, Route, Violation,
};

use crate::env::DistanceMatrix;

/// Knapsack capacity of the standard task.
pub const DEFAULT_CAPACITY: usize = 2;

/// `Auto` uses the exact solver up to this many non-depot locations.
pub const AUTO_EXACT_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("instance has {locations} locations, exact solver limit is {limit}")]
    TooLarge { locations: usize, limit: usize },
    #[error("infeasible history: {0}")]
    InfeasiblePrefix(String),
    #[error("infeasible instance: {0}")]
    Infeasible(String),
    #[error("route has {route} entries but the matrix is {matrix}x{matrix}")]
    DimensionMismatch { route: usize, matrix: usize },
    #[error("bad instance: {0}")]
    BadInstance(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Exact,
    Heuristic,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Exact => "exact",
            SolverKind::Heuristic => "heuristic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPolicy {
    Exact,
    Heuristic,
    #[default]
    Auto,
}

impl SolverPolicy {
    pub fn resolve(self, locations: usize) -> SolverKind {
        match self {
            SolverPolicy::Exact => SolverKind::Exact,
            SolverPolicy::Heuristic => SolverKind::Heuristic,
            SolverPolicy::Auto if locations <= AUTO_EXACT_LIMIT => SolverKind::Exact,
            SolverPolicy::Auto => SolverKind::Heuristic,
        }
    }
}

impl fmt::Display for SolverPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverPolicy::Exact => "exact",
            SolverPolicy::Heuristic => "heuristic",
            SolverPolicy::Auto => "auto",
        })
    }
}

impl FromStr for SolverPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(SolverPolicy::Exact),
            "heuristic" => Ok(SolverPolicy::Heuristic),
            "auto" => Ok(SolverPolicy::Auto),
            other => Err(format!("unknown solver policy '{other}' (expected exact, heuristic or auto)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub route: Route,
    pub cost: f64,
    pub solver: SolverKind,
    pub nodes_expanded: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// The unique completion of `prefix` if every remaining step has a single option.
pub fn forced_completion(pairing: &Pairing, prefix: &Prefix, capacity: usize) -> Result<Option<Route>, PlanError> {
    let mut visits = prefix.visits().to_vec();
    while visits.len() < pairing.size() {
        let next = feasible_next(pairing, &Prefix(visits.clone()), capacity)?;
        match next.as_slice() {
            [only] => visits.push(*only),
            _ => return Ok(None),
        }
    }
    Ok(Some(Route(visits)))
}

/// Solve with the given policy. Forced completions skip the solver.
pub fn solve(
    pairing: &Pairing,
    dist: &DistanceMatrix,
    capacity: usize,
    prefix: &Prefix,
    policy: SolverPolicy,
    budget: usize,
) -> Result<PlanResult, PlanError> {
    let kind = policy.resolve(pairing.size() - 1);
    if dist.dim() != pairing.size() {
        return Err(PlanError::DimensionMismatch { route: pairing.size(), matrix: dist.dim() });
    }
    let started = std::time::Instant::now();
    if let Some(route) = forced_completion(pairing, prefix, capacity)? {
        let cost = path_cost(route.visits(), dist);
        return Ok(PlanResult { route, cost, solver: kind, nodes_expanded: 0, elapsed: started.elapsed() });
    }
    match kind {
        SolverKind::Exact => solve_exact(pairing, dist, capacity, prefix),
        SolverKind::Heuristic => solve_heuristic(pairing, dist, capacity, prefix, budget),
    }
}
