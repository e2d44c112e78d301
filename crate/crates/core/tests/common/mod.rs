#![allow(dead_code)]

use kondo::env::{distance_matrix, DistanceMatrix, GridMap, Point};
use kondo::planner::{Pairing, Prefix};
use rand::seq::SliceRandom;
use rand::Rng;

pub const APARTMENT_MAP: &str = include_str!("../../fixtures/apartment.map");
pub const APARTMENT_BINS: &str = include_str!("../../fixtures/apartment.bins.json");

#[derive(Debug, Clone, Copy)]
pub enum MatrixKind {
    /// Symmetric, entries uniform in [0, 10), no triangle inequality.
    Uniform,
    /// Euclidean distances between random points in a 20x20 square.
    Euclidean,
    /// Geodesic distances on a random obstacle grid, with shared dropoff points.
    Grid,
}

pub const KINDS: [MatrixKind; 3] = [MatrixKind::Uniform, MatrixKind::Euclidean, MatrixKind::Grid];

/// A pairing that is the standard one half the time and a random partition otherwise.
pub fn random_pairing<R: Rng>(rng: &mut R, n: usize) -> Pairing {
    if rng.gen_bool(0.5) {
        return Pairing::standard(n);
    }
    let mut locs: Vec<usize> = (1..=2 * n).collect();
    locs.shuffle(rng);
    Pairing::new((0..n).map(|k| (locs[2 * k], locs[2 * k + 1]))).unwrap()
}

pub fn random_grid<R: Rng>(rng: &mut R, w: usize, h: usize, blocked: f64) -> GridMap {
    let cells = (0..w * h).map(|_| !rng.gen_bool(blocked)).collect();
    GridMap::from_walkable(w, h, cells).unwrap()
}

pub fn random_matrix<R: Rng>(rng: &mut R, kind: MatrixKind, pairing: &Pairing) -> DistanceMatrix {
    let size = pairing.size();
    match kind {
        MatrixKind::Uniform => {
            let mut d = DistanceMatrix::zeros(size);
            for i in 0..size {
                for j in i + 1..size {
                    let v = rng.gen_range(0.0..10.0);
                    d.set(i, j, v);
                    d.set(j, i, v);
                }
            }
            d
        }
        MatrixKind::Euclidean => {
            let pts: Vec<(f64, f64)> = (0..size).map(|_| (rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0))).collect();
            DistanceMatrix::from_fn(size, |i, j| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1))
        }
        MatrixKind::Grid => loop {
            let map = random_grid(rng, 12, 12, 0.2);
            let walkable = map.walkable_points();
            if walkable.is_empty() {
                continue;
            }
            // a few bins shared by several dropoffs, as in the real task
            let bins: Vec<Point> = (0..3).map(|_| *walkable.choose(rng).unwrap()).collect();
            let points: Vec<Point> = (0..size)
                .map(|loc| {
                    if pairing.is_dropoff(loc) {
                        *bins.choose(rng).unwrap()
                    } else {
                        *walkable.choose(rng).unwrap()
                    }
                })
                .collect();
            if let Ok(d) = distance_matrix(&map, &points) {
                return d;
            }
        },
    }
}

/// Minimum over every feasible completion of `prefix`, found by plain enumeration.
///
/// Costs accumulate front to back like the objective. Returns the cost, the
/// lexicographically smallest optimal route and the number of feasible routes.
pub fn brute_force(pairing: &Pairing, dist: &DistanceMatrix, capacity: usize, prefix: &Prefix) -> Option<(f64, Vec<usize>, usize)> {
    let size = pairing.size();
    let mut visits = prefix.0.clone();
    let mut used = vec![false; size];
    let mut load = 0usize;
    let mut cost = 0.0;
    for (i, &loc) in visits.iter().enumerate() {
        used[loc] = true;
        if pairing.is_pickup(loc) {
            load += 1;
        } else if pairing.is_dropoff(loc) {
            load -= 1;
        }
        if i > 0 {
            cost += dist.get(visits[i - 1], loc);
        }
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut count = 0;
    enumerate(pairing, dist, capacity, &mut visits, &mut used, load, cost, &mut best, &mut count);
    best.map(|(c, r)| (c, r, count))
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    pairing: &Pairing,
    dist: &DistanceMatrix,
    capacity: usize,
    visits: &mut Vec<usize>,
    used: &mut Vec<bool>,
    load: usize,
    cost: f64,
    best: &mut Option<(f64, Vec<usize>)>,
    count: &mut usize,
) {
    if visits.len() == pairing.size() {
        *count += 1;
        let better = match best {
            None => true,
            Some((c, r)) => cost < *c || (cost == *c && visits < r),
        };
        if better {
            *best = Some((cost, visits.clone()));
        }
        return;
    }
    let last = *visits.last().unwrap();
    for loc in 1..pairing.size() {
        if used[loc] {
            continue;
        }
        let next_load = if pairing.is_pickup(loc) {
            if load == capacity {
                continue;
            }
            load + 1
        } else {
            if !used[pairing.pickup_of(loc).unwrap()] {
                continue;
            }
            load - 1
        };
        used[loc] = true;
        visits.push(loc);
        enumerate(pairing, dist, capacity, visits, used, next_load, cost + dist.get(last, loc), best, count);
        visits.pop();
        used[loc] = false;
    }
}

/// A random feasible history of length `m` (including the depot), built by random feasible steps.
pub fn random_prefix<R: Rng>(rng: &mut R, pairing: &Pairing, capacity: usize, m: usize) -> Prefix {
    let mut prefix = Prefix::depot();
    while prefix.len() < m {
        let options = kondo::planner::feasible_next(pairing, &prefix, capacity).unwrap();
        match options.choose(rng) {
            Some(&loc) => prefix.0.push(loc),
            None => break,
        }
    }
    prefix
}

pub fn apartment() -> (kondo::env::GridMap, Vec<kondo::task::Bin>) {
    (kondo::env::load_map(APARTMENT_MAP).unwrap(), kondo::task::parse_bins(APARTMENT_BINS).unwrap())
}

pub fn apartment_server() -> kondo::service::SessionServer {
    let (map, bins) = apartment();
    let mut server = kondo::service::SessionServer::new(Default::default());
    server.add_map("apartment", map, bins);
    server
}

/// Geodesic distances from `source` to every cell by repeated edge relaxation
/// (Bellman-Ford sweeps), indexed `y * width + x`; `None` when unreachable.
pub fn relax_distances(map: &GridMap, source: Point) -> Vec<Option<f64>> {
    use kondo::env::Direction;
    let (w, h) = (map.width(), map.height());
    let mut dist = vec![f64::INFINITY; w * h];
    dist[source.y as usize * w + source.x as usize] = 0.0;
    loop {
        let mut changed = false;
        for y in 0..h as i32 {
            for x in 0..w as i32 {
                let from = Point::new(x, y);
                let d = dist[y as usize * w + x as usize];
                if !d.is_finite() {
                    continue;
                }
                for dir in Direction::ALL {
                    if !map.can_step(from, dir) {
                        continue;
                    }
                    let (dx, dy) = dir.delta();
                    let step = if dx != 0 && dy != 0 { 2f64.sqrt() } else { 1.0 };
                    let k = (y + dy) as usize * w + (x + dx) as usize;
                    if d + step < dist[k] - 1e-12 {
                        dist[k] = d + step;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist.into_iter().map(|d| d.is_finite().then_some(d)).collect()
}

pub fn cell(map: &GridMap, p: Point) -> usize {
    p.y as usize * map.width() + p.x as usize
}

/// Load of the knapsack after each pick/place event of a trace, in order.
pub fn load_profile(trace: &kondo::session::EpisodeTrace) -> Vec<i64> {
    use kondo::session::Event;
    let mut load = 0i64;
    let mut out = Vec::new();
    for record in &trace.events {
        match record.event {
            Event::Pick { .. } => load += 1,
            Event::Place { .. } => load -= 1,
            _ => continue,
        }
        out.push(load);
    }
    out
}

/// Every replan route starts with the visits made up to that event.
pub fn replans_extend_history(trace: &kondo::session::EpisodeTrace) -> Result<(), String> {
    use kondo::session::Event;
    let mut history = vec![0usize];
    for record in &trace.events {
        match &record.event {
            Event::Pick { location, .. } | Event::Place { location, .. } => history.push(*location),
            Event::Replan { route, visited, .. } => {
                if history.last() != Some(visited) {
                    return Err(format!("step {}: replan after {visited} but history ends {:?}", record.step, history));
                }
                if route.0.len() != trace.visits.len() || route.0[..history.len()] != history[..] {
                    return Err(format!("step {}: route {:?} does not extend {:?}", record.step, route.0, history));
                }
            }
            _ => {}
        }
    }
    if history != trace.visits {
        return Err(format!("events replay to {history:?}, trace says {:?}", trace.visits));
    }
    Ok(())
}

/// The first `k` objects of a generated six-object scene on the apartment.
pub fn small_scenario(seed: u64, k: usize) -> kondo::task::Scenario {
    let (map, bins) = apartment();
    let generator = kondo::task::SceneGenerator { map: &map, map_name: "apartment".into(), bins, seed };
    let mut scenario = generator.generate(6).unwrap();
    scenario.objects.truncate(k);
    scenario.difficulty = k;
    scenario
}

/// Pairs of pool points (or a pool point and a bin) closer than one geodesic unit, by relaxation.
pub fn pool_separation_violations(map: &GridMap, bins: &[kondo::task::Bin], pool: &[Point]) -> Vec<(Point, Point)> {
    let mut bad = Vec::new();
    for (i, &p) in pool.iter().enumerate() {
        let d = relax_distances(map, p);
        let others = bins.iter().map(|b| b.location).chain(pool[..i].iter().copied());
        for q in others {
            if d[cell(map, q)].is_none_or(|d| d < 1.0) {
                bad.push((p, q));
            }
        }
    }
    bad
}

/// Whether the `small` scene is the start of the `large` one: same bins, same pickups in order.
pub fn nests_in(small: &kondo::task::Scenario, large: &kondo::task::Scenario) -> bool {
    small.bins == large.bins
        && small.objects.len() <= large.objects.len()
        && small.objects.iter().zip(&large.objects).all(|(a, b)| a.id == b.id && a.pickup == b.pickup && a.category == b.category)
}
