//! Insertion + local search for the capacitated pickup-and-delivery route.
//!
//! Construction inserts requests one at a time at their globally cheapest
//! feasible position. Improvement is first-improvement descent over three
//! neighbourhoods, in order: relocate a request (pickup and dropoff together),
//! swap the slots of two requests, move a segment of up to three visits
//! (or-opt). Positions covered by the executed history are never touched.
//!
//! After the first local optimum a fixed number of ruin-and-recreate rounds
//! remove a few requests, reinsert them cheapest-first and descend again,
//! keeping the result only when it is strictly cheaper. The rounds use a fixed
//! seed, so the solver stays deterministic.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::route::{path_cost, PrefixState};
use super::{Pairing, PlanError, PlanResult, Prefix, Role, Route, SolverKind};
use crate::env::DistanceMatrix;

/// Default cap on applied improving moves.
pub const DEFAULT_BUDGET: usize = 10_000;

const IMPROVEMENT_EPS: f64 = 1e-9;
const MAX_SEGMENT: usize = 3;
/// Ruin-and-recreate rounds after the first descent.
pub const PERTURBATION_ROUNDS: usize = 96;
const PERTURBATION_SEED: u64 = 0x6b6f6e646f;

struct Search<'a> {
    pairing: &'a Pairing,
    dist: &'a DistanceMatrix,
    capacity: usize,
    /// Number of leading positions fixed by the history.
    fixed: usize,
    evaluated: u64,
}

#[derive(Clone, Copy)]
struct Insertion {
    delta: f64,
    /// Pickup goes in front of `route[before_pickup]`.
    before_pickup: usize,
    /// Dropoff goes in front of `route[before_dropoff]`; equal to `before_pickup`
    /// when the two are adjacent.
    before_dropoff: usize,
}

impl Search<'_> {
    #[inline]
    fn d(&self, a: usize, b: usize) -> f64 {
        self.dist.get(a, b)
    }

    fn loads(&self, route: &[usize]) -> Vec<usize> {
        let mut load = 0usize;
        route
            .iter()
            .map(|&loc| {
                match self.pairing.role(loc) {
                    Role::Pickup(_) => load += 1,
                    Role::Dropoff(_) => load -= 1,
                    Role::Depot => {}
                }
                load
            })
            .collect()
    }

    fn is_feasible(&self, route: &[usize], picked: &mut [bool]) -> bool {
        picked.fill(false);
        let mut load = 0usize;
        for &loc in route {
            match self.pairing.role(loc) {
                Role::Pickup(k) => {
                    picked[k] = true;
                    load += 1;
                    if load > self.capacity {
                        return false;
                    }
                }
                Role::Dropoff(k) => {
                    if !picked[k] {
                        return false;
                    }
                    load -= 1;
                }
                Role::Depot => {}
            }
        }
        true
    }

    fn best_pair_insertion(&mut self, route: &[usize], loads: &[usize], p: usize, d: usize) -> Option<Insertion> {
        let len = route.len();
        let mut best: Option<Insertion> = None;
        let mut consider = |delta: f64, i: usize, j: usize| {
            if best.is_none_or(|b| delta < b.delta) {
                best = Some(Insertion { delta, before_pickup: i, before_dropoff: j });
            }
        };
        for i in self.fixed.max(1)..=len {
            if loads[i - 1] + 1 > self.capacity {
                continue;
            }
            let a = route[i - 1];
            let next = route.get(i).copied();
            self.evaluated += 1;
            let adjacent = self.d(a, p) + self.d(p, d) + next.map_or(0.0, |b| self.d(d, b) - self.d(a, b));
            consider(adjacent, i, i);
            let Some(b) = next else { continue };
            let pickup_delta = self.d(a, p) + self.d(p, b) - self.d(a, b);
            let mut max_load = 0;
            for j in i + 1..=len {
                max_load = max_load.max(loads[j - 1]);
                if max_load + 1 > self.capacity {
                    break;
                }
                let e = route[j - 1];
                let dropoff_delta = self.d(e, d) + route.get(j).map_or(0.0, |&f| self.d(d, f) - self.d(e, f));
                self.evaluated += 1;
                consider(pickup_delta + dropoff_delta, i, j);
            }
        }
        best
    }

    fn apply_insertion(route: &mut Vec<usize>, ins: Insertion, p: usize, d: usize) {
        if ins.before_dropoff == ins.before_pickup {
            route.insert(ins.before_pickup, d);
            route.insert(ins.before_pickup, p);
        } else {
            route.insert(ins.before_dropoff, d);
            route.insert(ins.before_pickup, p);
        }
    }

    fn construct(&mut self, prefix: &Prefix, state: &PrefixState) -> Vec<usize> {
        let mut route = prefix.visits().to_vec();
        let n = self.pairing.n();
        for k in 0..n {
            let (p, d) = (self.pairing.pickups()[k], self.pairing.dropoffs()[k]);
            if state.visited[p] && !state.visited[d] {
                // a held item: its dropoff only lowers the load, so any free slot works
                let len = route.len();
                let best = (self.fixed..=len)
                    .map(|i| {
                        let a = route[i - 1];
                        let delta = self.d(a, d) + route.get(i).map_or(0.0, |&b| self.d(d, b) - self.d(a, b));
                        (delta, i)
                    })
                    .min_by(|x, y| x.0.total_cmp(&y.0))
                    .expect("at least one slot after the history");
                route.insert(best.1, d);
            }
        }
        let mut pending: Vec<usize> = (0..n).filter(|&k| !state.visited[self.pairing.pickups()[k]]).collect();
        while !pending.is_empty() {
            let loads = self.loads(&route);
            let mut best: Option<(Insertion, usize)> = None;
            for (slot, &k) in pending.iter().enumerate() {
                let (p, d) = (self.pairing.pickups()[k], self.pairing.dropoffs()[k]);
                if let Some(ins) = self.best_pair_insertion(&route, &loads, p, d) {
                    if best.is_none_or(|(b, _)| ins.delta < b.delta) {
                        best = Some((ins, slot));
                    }
                }
            }
            let (ins, slot) = best.expect("appending a request at the end is always feasible");
            let k = pending.remove(slot);
            Self::apply_insertion(&mut route, ins, self.pairing.pickups()[k], self.pairing.dropoffs()[k]);
        }
        route
    }

    fn relocate_pair(&mut self, route: &mut Vec<usize>, cost: f64) -> bool {
        for k in 0..self.pairing.n() {
            let (p, d) = (self.pairing.pickups()[k], self.pairing.dropoffs()[k]);
            let Some(pp) = route.iter().position(|&x| x == p) else { continue };
            if pp < self.fixed {
                continue;
            }
            let reduced: Vec<usize> = route.iter().copied().filter(|&x| x != p && x != d).collect();
            let base = path_cost(&reduced, self.dist);
            let loads = self.loads(&reduced);
            if let Some(ins) = self.best_pair_insertion(&reduced, &loads, p, d) {
                if base + ins.delta < cost - IMPROVEMENT_EPS {
                    let mut candidate = reduced;
                    Self::apply_insertion(&mut candidate, ins, p, d);
                    *route = candidate;
                    return true;
                }
            }
        }
        false
    }

    fn swap_pairs(&mut self, route: &mut [usize], positions: &mut [usize]) -> bool {
        let n = self.pairing.n();
        for (t, &loc) in route.iter().enumerate() {
            positions[loc] = t;
        }
        let len = route.len();
        for k1 in 0..n {
            let (p1, d1) = (self.pairing.pickups()[k1], self.pairing.dropoffs()[k1]);
            if positions[p1] < self.fixed {
                continue;
            }
            for k2 in k1 + 1..n {
                let (p2, d2) = (self.pairing.pickups()[k2], self.pairing.dropoffs()[k2]);
                if positions[p2] < self.fixed {
                    continue;
                }
                self.evaluated += 1;
                // Slot roles are unchanged, so loads and precedence stay valid.
                let changed = [positions[p1], positions[p2], positions[d1], positions[d2]];
                let swapped = |t: usize| match route[t] {
                    x if x == p1 => p2,
                    x if x == p2 => p1,
                    x if x == d1 => d2,
                    x if x == d2 => d1,
                    x => x,
                };
                let mut edges: Vec<usize> = changed
                    .iter()
                    .flat_map(|&t| [t, t + 1])
                    .filter(|&e| e >= 1 && e < len)
                    .collect();
                edges.sort_unstable();
                edges.dedup();
                let delta: f64 = edges
                    .iter()
                    .map(|&e| self.d(swapped(e - 1), swapped(e)) - self.d(route[e - 1], route[e]))
                    .sum();
                if delta < -IMPROVEMENT_EPS {
                    let values = changed.map(swapped);
                    for (t, v) in changed.into_iter().zip(values) {
                        route[t] = v;
                    }
                    return true;
                }
            }
        }
        false
    }

    fn or_opt(&mut self, route: &mut Vec<usize>, picked: &mut [bool]) -> bool {
        let len = route.len();
        for seg in 1..=MAX_SEGMENT {
            for s in self.fixed.max(1)..len.saturating_sub(seg - 1) {
                let first = route[s];
                let last = route[s + seg - 1];
                let a = route[s - 1];
                let b = route.get(s + seg).copied();
                let removal = -self.d(a, first) - b.map_or(0.0, |b| self.d(last, b) - self.d(a, b));
                // positions in the route with the segment cut out
                let reduced_at = |u: usize| if u < s { route[u] } else { route[u + seg] };
                let reduced_len = len - seg;
                for t in self.fixed.max(1)..=reduced_len {
                    if t == s {
                        continue;
                    }
                    self.evaluated += 1;
                    let x = reduced_at(t - 1);
                    let insertion = self.d(x, first)
                        + if t < reduced_len {
                            let y = reduced_at(t);
                            self.d(last, y) - self.d(x, y)
                        } else {
                            0.0
                        };
                    if removal + insertion < -IMPROVEMENT_EPS {
                        let mut candidate: Vec<usize> = Vec::with_capacity(len);
                        candidate.extend((0..t).map(reduced_at));
                        candidate.extend_from_slice(&route[s..s + seg]);
                        candidate.extend((t..reduced_len).map(reduced_at));
                        if self.is_feasible(&candidate, picked) {
                            *route = candidate;
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

struct Scratch {
    picked: Vec<bool>,
    positions: Vec<usize>,
}

impl Search<'_> {
    /// First-improvement descent; returns the final cost.
    fn descend(&mut self, route: &mut Vec<usize>, budget: usize, applied: &mut usize, scratch: &mut Scratch) -> f64 {
        let mut cost = path_cost(route, self.dist);
        while *applied < budget {
            let improved = self.relocate_pair(route, cost)
                || self.swap_pairs(route, &mut scratch.positions)
                || self.or_opt(route, &mut scratch.picked);
            if !improved {
                break;
            }
            *applied += 1;
            cost = path_cost(route, self.dist);
        }
        cost
    }

    /// Pull the given requests out and reinsert them one by one at their cheapest slots.
    fn recreate(&mut self, route: &mut Vec<usize>, requests: &[usize]) {
        let (pickups, dropoffs) = (self.pairing.pickups(), self.pairing.dropoffs());
        route.retain(|&x| !requests.iter().any(|&k| pickups[k] == x || dropoffs[k] == x));
        for &k in requests {
            let loads = self.loads(route);
            let ins = self
                .best_pair_insertion(route, &loads, pickups[k], dropoffs[k])
                .expect("appending a request at the end is always feasible");
            Self::apply_insertion(route, ins, pickups[k], dropoffs[k]);
        }
    }
}

pub fn solve_heuristic(
    pairing: &Pairing,
    dist: &DistanceMatrix,
    capacity: usize,
    prefix: &Prefix,
    budget: usize,
) -> Result<PlanResult, PlanError> {
    let started = Instant::now();
    let size = pairing.size();
    if dist.dim() != size {
        return Err(PlanError::DimensionMismatch { route: size, matrix: dist.dim() });
    }
    let state = PrefixState::new(prefix, pairing, capacity)?;
    let unpicked = pairing.pickups().iter().any(|&p| !state.visited[p]);
    if capacity == 0 && unpicked {
        return Err(PlanError::Infeasible("capacity 0 cannot carry any object".into()));
    }
    let mut search = Search { pairing, dist, capacity, fixed: prefix.len(), evaluated: 0 };
    let mut route = search.construct(prefix, &state);
    let mut scratch = Scratch { picked: vec![false; pairing.n()], positions: vec![0usize; size] };
    let mut applied = 0;
    let mut cost = search.descend(&mut route, budget, &mut applied, &mut scratch);

    let free: Vec<usize> = (0..pairing.n()).filter(|&k| !state.visited[pairing.pickups()[k]]).collect();
    if free.len() >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(PERTURBATION_SEED);
        for _ in 0..PERTURBATION_ROUNDS {
            if applied >= budget {
                break;
            }
            applied += 1;
            let take = rng.gen_range(2..=(free.len() / 2).max(2));
            let removed: Vec<usize> = free.choose_multiple(&mut rng, take).copied().collect();
            let mut candidate = route.clone();
            search.recreate(&mut candidate, &removed);
            let candidate_cost = search.descend(&mut candidate, budget, &mut applied, &mut scratch);
            if candidate_cost < cost - IMPROVEMENT_EPS {
                route = candidate;
                cost = candidate_cost;
            }
        }
    }
    let mut picked = scratch.picked;
    debug_assert!(search.is_feasible(&route, &mut picked));
    Ok(PlanResult {
        route: Route(route),
        cost,
        solver: SolverKind::Heuristic,
        nodes_expanded: search.evaluated,
        elapsed: started.elapsed(),
    })
}
