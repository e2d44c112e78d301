//! Shared inputs for the criterion benchmarks in `benches/`.

use kondo::env::{load_map, DistanceMatrix, GridMap};
use kondo::planner::Pairing;
use kondo::task::{index_locations, parse_bins, SceneGenerator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const APARTMENT_MAP: &str = include_str!("../../core/fixtures/apartment.map");
pub const APARTMENT_BINS: &str = include_str!("../../core/fixtures/apartment.bins.json");

pub fn apartment() -> GridMap {
    load_map(APARTMENT_MAP).expect("fixture map parses")
}

/// Euclidean distances between random points in a 40x20 box, standard pairing.
pub fn euclidean_instance(n: usize, seed: u64) -> (Pairing, DistanceMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairing = Pairing::standard(n);
    let pts: Vec<(f64, f64)> =
        (0..pairing.size()).map(|_| (rng.gen_range(0.0..40.0), rng.gen_range(0.0..20.0))).collect();
    let dist = DistanceMatrix::from_fn(pairing.size(), |i, j| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1));
    (pairing, dist)
}

/// The routing instance of a generated apartment scene.
pub fn apartment_instance(n: usize, seed: u64) -> (Pairing, DistanceMatrix) {
    let map = apartment();
    let bins = parse_bins(APARTMENT_BINS).expect("fixture bins parse");
    let scenario = SceneGenerator { map: &map, map_name: "apartment".into(), bins, seed }
        .generate(n)
        .expect("fixture scene generates");
    let index = index_locations(&scenario);
    let dist = index.distances(&map).expect("fixture locations connect");
    (index.pairing, dist)
}
