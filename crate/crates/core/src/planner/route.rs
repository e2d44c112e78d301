use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Pairing, PlanError, Role};
use crate::env::DistanceMatrix;

/// Full visit order `x(0..=2n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Route(pub Vec<usize>);

/// Executed visit history `x̄(0..=m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prefix(pub Vec<usize>);

impl Route {
    pub fn visits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Prefix {
    /// Nothing executed yet: the agent stands at the depot.
    pub fn depot() -> Self {
        Prefix(vec![0])
    }

    pub fn visits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> usize {
        *self.0.last().expect("prefix holds at least the depot")
    }
}

impl Default for Prefix {
    fn default() -> Self {
        Self::depot()
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    /// Each location visited exactly once, starting at the depot.
    Permutation,
    /// Running load never exceeds the capacity.
    Capacity,
    /// Every pickup precedes its dropoff.
    Precedence,
    /// The route agrees with the executed history.
    Prefix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub step: usize,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at step {}: {}", self.family, self.step, self.detail)
    }
}

/// Check a route against every constraint family; empty means feasible.
pub fn validate(route: &Route, pairing: &Pairing, capacity: usize, prefix: &Prefix) -> Vec<Violation> {
    let size = pairing.size();
    let visits = route.visits();
    let mut out = Vec::new();
    let mut push = |family, step, detail: String| out.push(Violation { family, step, detail });

    if visits.first() != Some(&0) {
        push(ConstraintFamily::Permutation, 0, "route must start at the depot".into());
    }
    let mut position: Vec<Option<usize>> = vec![None; size];
    for (step, &loc) in visits.iter().enumerate() {
        if loc >= size {
            push(ConstraintFamily::Permutation, step, format!("location {loc} out of range"));
        } else if let Some(first) = position[loc] {
            push(ConstraintFamily::Permutation, step, format!("location {loc} already visited at step {first}"));
        } else {
            position[loc] = Some(step);
        }
    }
    if visits.len() != size {
        push(
            ConstraintFamily::Permutation,
            visits.len().min(size),
            format!("route has {} visits, expected {size}", visits.len()),
        );
    }

    let mut load: i64 = 0;
    for (step, &loc) in visits.iter().enumerate().skip(1) {
        match pairing.roles_get(loc) {
            Some(Role::Pickup(_)) => load += 1,
            Some(Role::Dropoff(_)) => load -= 1,
            _ => {}
        }
        if load > capacity as i64 {
            push(ConstraintFamily::Capacity, step, format!("load {load} exceeds capacity {capacity}"));
        }
    }

    for (&p, &d) in pairing.pickups().iter().zip(pairing.dropoffs()) {
        if let Some(dstep) = position[d] {
            match position[p] {
                Some(pstep) if pstep < dstep => {}
                Some(pstep) => push(
                    ConstraintFamily::Precedence,
                    dstep,
                    format!("dropoff {d} before its pickup {p} (step {pstep})"),
                ),
                None => push(ConstraintFamily::Precedence, dstep, format!("dropoff {d} without pickup {p}")),
            }
        }
    }

    for (step, &loc) in prefix.visits().iter().enumerate() {
        if visits.get(step) != Some(&loc) {
            push(ConstraintFamily::Prefix, step, format!("history has {loc} at this step"));
        }
    }
    out
}

impl Pairing {
    fn roles_get(&self, loc: usize) -> Option<Role> {
        (loc < self.size()).then(|| self.role(loc))
    }
}

/// Running state after executing a prefix.
#[derive(Debug, Clone)]
pub(crate) struct PrefixState {
    pub visited: Vec<bool>,
    pub load: usize,
}

impl PrefixState {
    pub fn new(prefix: &Prefix, pairing: &Pairing, capacity: usize) -> Result<Self, PlanError> {
        let size = pairing.size();
        let bad = |msg: String| Err(PlanError::InfeasiblePrefix(msg));
        if prefix.visits().first() != Some(&0) {
            return bad("history must start at the depot".into());
        }
        if prefix.len() > size {
            return bad(format!("history has {} visits, only {size} locations", prefix.len()));
        }
        let mut visited = vec![false; size];
        let mut load = 0usize;
        for (step, &loc) in prefix.visits().iter().enumerate() {
            if loc >= size {
                return bad(format!("location {loc} at step {step} out of range"));
            }
            if std::mem::replace(&mut visited[loc], true) {
                return bad(format!("location {loc} visited twice"));
            }
            match pairing.role(loc) {
                Role::Depot if step > 0 => return bad("depot revisited".into()),
                Role::Depot => {}
                Role::Pickup(_) => {
                    load += 1;
                    if load > capacity {
                        return bad(format!("load {load} exceeds capacity {capacity} at step {step}"));
                    }
                }
                Role::Dropoff(k) => {
                    if !visited[pairing.pickups()[k]] {
                        return bad(format!("dropoff {loc} at step {step} before its pickup"));
                    }
                    load -= 1;
                }
            }
        }
        Ok(Self { visited, load })
    }
}

pub fn check_prefix(prefix: &Prefix, pairing: &Pairing, capacity: usize) -> Result<(), PlanError> {
    PrefixState::new(prefix, pairing, capacity).map(|_| ())
}

/// Locations that may be visited next after `prefix`, ascending.
pub fn feasible_next(pairing: &Pairing, prefix: &Prefix, capacity: usize) -> Result<Vec<usize>, PlanError> {
    let state = PrefixState::new(prefix, pairing, capacity)?;
    Ok((1..pairing.size())
        .filter(|&loc| !state.visited[loc])
        .filter(|&loc| match pairing.role(loc) {
            Role::Pickup(_) => state.load < capacity,
            Role::Dropoff(k) => state.visited[pairing.pickups()[k]],
            Role::Depot => false,
        })
        .collect())
}

/// Objective value: sum of consecutive distances, accumulated front to back.
pub fn route_cost(route: &Route, dist: &DistanceMatrix) -> Result<f64, PlanError> {
    if route.len() != dist.dim() {
        return Err(PlanError::DimensionMismatch { route: route.len(), matrix: dist.dim() });
    }
    if let Some(&bad) = route.visits().iter().find(|&&loc| loc >= dist.dim()) {
        return Err(PlanError::BadInstance(format!("location {bad} outside the distance matrix")));
    }
    Ok(path_cost(route.visits(), dist))
}

/// Cost of any visit sequence (no length check).
pub fn path_cost(visits: &[usize], dist: &DistanceMatrix) -> f64 {
    visits.windows(2).fold(0.0, |acc, w| acc + dist.get(w[0], w[1]))
}
