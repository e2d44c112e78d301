use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Bin, Category, ObjectId, ObjectInstance, Scenario, TaskError, SCENARIO_VERSION};
use crate::env::{EnvError, GridMap, Point, Sampler, SearchTree, DEFAULT_SAMPLE_ATTEMPTS};

pub const POOL_SIZE: usize = 40;
pub const POOL_SEPARATION: f64 = 1.0;

const START_RADIUS: i32 = 3;
const START_RADIUS_GROWTH: i32 = 2;
const START_ATTEMPTS_PER_RADIUS: usize = 1_000;

/// Candidate object locations shared by every difficulty of one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPool {
    pub points: Vec<Point>,
    pub categories: Vec<Category>,
}

impl PointPool {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sample [`POOL_SIZE`] points, each at least one geodesic unit from every
/// earlier point and every bin. Categories go round-robin in [`Category::ALL`]
/// order so any prefix whose length is a multiple of six is balanced.
pub fn build_point_pool<R: Rng + ?Sized>(map: &GridMap, bins: &[Bin], rng: &mut R) -> Result<PointPool, TaskError> {
    build_point_pool_with(map, bins, rng, POOL_SIZE, Sampler::default())
}

pub fn build_point_pool_with<R: Rng + ?Sized>(
    map: &GridMap,
    bins: &[Bin],
    rng: &mut R,
    size: usize,
    sampler: Sampler,
) -> Result<PointPool, TaskError> {
    for bin in bins {
        if !map.is_walkable(bin.location) {
            return Err(EnvError::NotWalkable(bin.location).into());
        }
    }
    let mut taken: Vec<Point> = bins.iter().map(|b| b.location).collect();
    let mut points = Vec::with_capacity(size);
    for _ in 0..size {
        let p = sampler.sample(map, rng, POOL_SEPARATION, &taken)?;
        taken.push(p);
        points.push(p);
    }
    let categories = (0..size).map(|i| Category::ALL[i % Category::COUNT]).collect();
    Ok(PointPool { points, categories })
}

/// Place `n` objects on the first `n` pool points.
pub fn generate_scenario<R: Rng + ?Sized>(
    map: &GridMap,
    map_name: &str,
    seed: u64,
    bins: &[Bin],
    pool: &PointPool,
    n: usize,
    rng: &mut R,
) -> Result<Scenario, TaskError> {
    if n == 0 || n % Category::COUNT != 0 || n > pool.len() {
        return Err(TaskError::BadDifficulty { n, pool: pool.len() });
    }
    let objects: Vec<ObjectInstance> = pool.points[..n]
        .iter()
        .zip(&pool.categories)
        .enumerate()
        .map(|(i, (&pickup, &category))| ObjectInstance {
            id: ObjectId(i as u32),
            category,
            pickup,
            display_name: category
                .models()
                .choose(rng)
                .expect("every category has models")
                .to_string(),
        })
        .collect();
    let start = start_location(map, &objects, rng)?;
    let scenario = Scenario {
        v: SCENARIO_VERSION,
        map_name: map_name.to_string(),
        seed,
        difficulty: n,
        bins: bins.to_vec(),
        objects,
        start,
        interact_radius: None,
    };
    scenario.validate(map)?;
    Ok(scenario)
}

/// Centroid of the object cells if walkable, otherwise a nearby walkable cell.
///
/// Fallback samples uniformly in a disc around the centroid, starting at radius 3
/// and growing by 2 after each 1,000 rejected draws. Candidates must be connected
/// to the objects.
pub fn start_location<R: Rng + ?Sized>(map: &GridMap, objects: &[ObjectInstance], rng: &mut R) -> Result<Point, TaskError> {
    let Some(first) = objects.first() else {
        return Err(TaskError::BadScenario("cannot place a start without objects".into()));
    };
    let tree = SearchTree::from_source(map, first.pickup)?;
    let reachable = |p: Point| map.is_walkable(p) && tree.cost_to(map, p).is_some();
    let centroid = centroid(objects.iter().map(|o| o.pickup));
    if reachable(centroid) {
        return Ok(centroid);
    }
    let mut radius = START_RADIUS;
    for attempt in 1..=DEFAULT_SAMPLE_ATTEMPTS {
        let dx = rng.gen_range(-radius..=radius);
        let dy = rng.gen_range(-radius..=radius);
        let p = centroid.offset(dx, dy);
        if dx * dx + dy * dy <= radius * radius && reachable(p) {
            return Ok(p);
        }
        if attempt % START_ATTEMPTS_PER_RADIUS == 0 {
            radius += START_RADIUS_GROWTH;
        }
    }
    Err(EnvError::SamplingExhausted { attempts: DEFAULT_SAMPLE_ATTEMPTS }.into())
}

fn centroid(points: impl Iterator<Item = Point>) -> Point {
    let (mut sx, mut sy, mut count) = (0i64, 0i64, 0i64);
    for p in points {
        sx += i64::from(p.x);
        sy += i64::from(p.y);
        count += 1;
    }
    let mean = |s: i64| (s as f64 / count as f64).round() as i32;
    Point::new(mean(sx), mean(sy))
}

/// Seeded scene generation: the pool depends only on `seed`; object models
/// and the start fallback use a per-difficulty stream of the same seed.
pub struct SceneGenerator<'a> {
    pub map: &'a GridMap,
    pub map_name: String,
    pub bins: Vec<Bin>,
    pub seed: u64,
}

impl SceneGenerator<'_> {
    pub fn pool(&self) -> Result<PointPool, TaskError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        build_point_pool(self.map, &self.bins, &mut rng)
    }

    pub fn scenario(&self, pool: &PointPool, n: usize) -> Result<Scenario, TaskError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(n as u64 + 1);
        generate_scenario(self.map, &self.map_name, self.seed, &self.bins, pool, n, &mut rng)
    }

    pub fn generate(&self, n: usize) -> Result<Scenario, TaskError> {
        self.scenario(&self.pool()?, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(i: u32, x: i32, y: i32) -> ObjectInstance {
        ObjectInstance {
            id: ObjectId(i),
            category: Category::Dishes,
            pickup: Point::new(x, y),
            display_name: "mug".into(),
        }
    }

    #[test]
    fn walkable_centroid_is_used() {
        let map = GridMap::open(5, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let start = start_location(&map, &[obj(0, 0, 0), obj(1, 4, 0)], &mut rng).unwrap();
        assert_eq!(start, Point::new(2, 0));
    }

    #[test]
    fn single_object_starts_on_itself() {
        let map = GridMap::open(5, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(start_location(&map, &[obj(0, 3, 1)], &mut rng).unwrap(), Point::new(3, 1));
    }

    #[test]
    fn blocked_centroid_falls_back_nearby() {
        let mut map = GridMap::open(9, 9);
        for y in 3..6 {
            for x in 3..6 {
                map.set_walkable(Point::new(x, y), false);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let objects = [obj(0, 0, 0), obj(1, 8, 8)];
        let start = start_location(&map, &objects, &mut rng).unwrap();
        assert!(map.is_walkable(start));
        assert!(start.euclidean(Point::new(4, 4)) <= f64::from(START_RADIUS));
    }

    #[test]
    fn bad_difficulties() {
        let map = GridMap::open(20, 20);
        let pool = PointPool {
            points: (0..12).map(|i| Point::new(i, 0)).collect(),
            categories: (0..12).map(|i| Category::ALL[i % 6]).collect(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for n in [0, 7, 13, 18] {
            let err = generate_scenario(&map, "m", 0, &[], &pool, n, &mut rng).unwrap_err();
            assert!(matches!(err, TaskError::BadDifficulty { .. }), "n={n}");
        }
    }

    #[test]
    fn small_map_cannot_hold_a_pool() {
        let map = GridMap::open(6, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sampler = Sampler { attempts: 500 };
        let err = build_point_pool_with(&map, &[], &mut rng, POOL_SIZE, sampler).unwrap_err();
        assert!(matches!(err, TaskError::Env(EnvError::SamplingExhausted { .. })));
    }
}
