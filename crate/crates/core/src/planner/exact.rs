//! Exact solver: forward dynamic programming over (request states, last location).
//!
//! Each request is untouched, held or delivered, so a visited set that respects
//! precedence is a base-3 number with one digit per request. States are
//! processed in layers of equal visit count. The value of a state is the cost of
//! the cheapest way to reach it accumulated front to back, which makes the final
//! value bit-identical to `route_cost` of the reconstructed route.
//!
//! Equal-cost alternatives are resolved toward the lexicographically smaller
//! visit sequence.

use std::cmp::Ordering;
use std::time::Instant;

use super::route::{path_cost, PrefixState};
use super::{Pairing, PlanError, PlanResult, Prefix, Role, Route, SolverKind};
use crate::env::DistanceMatrix;

/// Largest `2n` the exact solver accepts.
pub const MAX_EXACT_LOCATIONS: usize = 20;

const NO_PARENT: u8 = u8::MAX;

struct Table<'a> {
    pairing: &'a Pairing,
    size: usize,
    pow3: Vec<u32>,
    start_code: u32,
    cost: Vec<f64>,
    parent: Vec<u8>,
}

impl Table<'_> {
    #[inline]
    fn slot(&self, code: u32, last: usize) -> usize {
        code as usize * self.size + last
    }

    fn request_of(&self, loc: usize) -> usize {
        match self.pairing.role(loc) {
            Role::Pickup(k) | Role::Dropoff(k) => k,
            Role::Depot => unreachable!("depot is never a DP step"),
        }
    }

    /// Locations visited after the start state on the best way to `(code, last)`.
    fn tail(&self, mut code: u32, mut last: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while code != self.start_code {
            out.push(last);
            let prev = self.parent[self.slot(code, last)];
            debug_assert_ne!(prev, NO_PARENT);
            code -= self.pow3[self.request_of(last)];
            last = prev as usize;
        }
        out.reverse();
        out
    }

    fn cmp_tails(&self, a: (u32, usize), b: (u32, usize)) -> Ordering {
        self.tail(a.0, a.1).cmp(&self.tail(b.0, b.1))
    }
}

pub fn solve_exact(
    pairing: &Pairing,
    dist: &DistanceMatrix,
    capacity: usize,
    prefix: &Prefix,
) -> Result<PlanResult, PlanError> {
    let started = Instant::now();
    let size = pairing.size();
    if size - 1 > MAX_EXACT_LOCATIONS {
        return Err(PlanError::TooLarge { locations: size - 1, limit: MAX_EXACT_LOCATIONS });
    }
    if dist.dim() != size {
        return Err(PlanError::DimensionMismatch { route: size, matrix: dist.dim() });
    }
    let state = PrefixState::new(prefix, pairing, capacity)?;
    let n = pairing.n();
    let pow3: Vec<u32> = (0..=n).map(|k| 3u32.pow(k as u32)).collect();
    let codes = pow3[n] as usize;

    let mut start_code = 0u32;
    for k in 0..n {
        let digit = match (state.visited[pairing.pickups()[k]], state.visited[pairing.dropoffs()[k]]) {
            (false, _) => 0,
            (true, false) => 1,
            (true, true) => 2,
        };
        start_code += digit * pow3[k];
    }
    let final_code = (pow3[n] - 1) as u32;

    let mut table = Table {
        pairing,
        size,
        pow3,
        start_code,
        cost: vec![f64::INFINITY; codes * size],
        parent: vec![NO_PARENT; codes * size],
    };
    let start_last = prefix.last();
    let start_slot = table.slot(start_code, start_last);
    table.cost[start_slot] = path_cost(prefix.visits(), dist);

    let mut queued = vec![false; codes];
    let mut layer = vec![start_code];
    let mut nodes_expanded = 0u64;
    let mut digits = vec![0u8; n];
    while !layer.is_empty() && layer[0] != final_code {
        let mut next_layer = Vec::new();
        for &code in &layer {
            let mut c = code;
            let mut load = 0;
            for d in digits.iter_mut() {
                *d = (c % 3) as u8;
                c /= 3;
                load += usize::from(*d == 1);
            }
            for last in 0..size {
                let here = table.cost[table.slot(code, last)];
                if !here.is_finite() {
                    continue;
                }
                nodes_expanded += 1;
                for k in 0..n {
                    let next = match digits[k] {
                        0 if load < capacity => pairing.pickups()[k],
                        1 => pairing.dropoffs()[k],
                        _ => continue,
                    };
                    let next_code = code + table.pow3[k];
                    let candidate = here + dist.get(last, next);
                    let slot = table.slot(next_code, next);
                    let incumbent = table.cost[slot];
                    let better = candidate < incumbent
                        || (candidate == incumbent
                            && table.cmp_tails((code, last), (next_code - table.pow3[k], table.parent[slot] as usize))
                                == Ordering::Less);
                    if better {
                        table.cost[slot] = candidate;
                        table.parent[slot] = last as u8;
                        if !std::mem::replace(&mut queued[next_code as usize], true) {
                            next_layer.push(next_code);
                        }
                    }
                }
            }
        }
        layer = next_layer;
    }

    let mut best: Option<(f64, usize)> = None;
    for last in 0..size {
        let c = table.cost[table.slot(final_code, last)];
        if !c.is_finite() {
            continue;
        }
        best = match best {
            None => Some((c, last)),
            Some((bc, bl)) => match c.partial_cmp(&bc).expect("finite costs") {
                Ordering::Less => Some((c, last)),
                Ordering::Equal if table.cmp_tails((final_code, last), (final_code, bl)) == Ordering::Less => {
                    Some((c, last))
                }
                _ => Some((bc, bl)),
            },
        };
    }
    let Some((cost, last)) = best else {
        return Err(PlanError::Infeasible(format!("no route completes {n} requests with capacity {capacity}")));
    };
    let mut visits = prefix.visits().to_vec();
    visits.extend(table.tail(final_code, last));
    Ok(PlanResult {
        route: Route(visits),
        cost,
        solver: SolverKind::Exact,
        nodes_expanded,
        elapsed: started.elapsed(),
    })
}
