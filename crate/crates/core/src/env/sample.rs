use rand::Rng;

use super::path::SearchTree;
use super::{EnvError, GridMap, Point};

pub const DEFAULT_SAMPLE_ATTEMPTS: usize = 10_000;

/// Rejection sampler for walkable cells.
#[derive(Debug, Clone, Copy)]
pub struct Sampler {
    pub attempts: usize,
}

impl Default for Sampler {
    fn default() -> Self {
        Self { attempts: DEFAULT_SAMPLE_ATTEMPTS }
    }
}

impl Sampler {
    /// Draw a walkable point at geodesic distance `>= min_separation` from every point
    /// in `existing`. A candidate that cannot reach some existing point is rejected.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        map: &GridMap,
        rng: &mut R,
        min_separation: f64,
        existing: &[Point],
    ) -> Result<Point, EnvError> {
        let walkable = map.walkable_points();
        if walkable.is_empty() {
            return Err(EnvError::SamplingExhausted { attempts: 0 });
        }
        for _ in 0..self.attempts {
            let candidate = walkable[rng.gen_range(0..walkable.len())];
            if existing.is_empty() {
                return Ok(candidate);
            }
            if min_separation > 0.0 && existing.contains(&candidate) {
                continue;
            }
            let tree = SearchTree::from_source(map, candidate)?;
            let separated = existing
                .iter()
                .all(|&p| tree.distance_to(map, p).is_some_and(|d| d >= min_separation));
            if separated {
                return Ok(candidate);
            }
        }
        Err(EnvError::SamplingExhausted { attempts: self.attempts })
    }
}

pub fn sample_navigable<R: Rng + ?Sized>(
    map: &GridMap,
    rng: &mut R,
    min_separation: f64,
    existing: &[Point],
) -> Result<Point, EnvError> {
    Sampler::default().sample(map, rng, min_separation, existing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::distance_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_existing_gives_any_walkable_point() {
        let map = GridMap::open(6, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = sample_navigable(&map, &mut rng, 3.0, &[]).unwrap();
        assert!(map.is_walkable(p));
    }

    #[test]
    fn fully_blocked_map_is_exhausted() {
        let map = GridMap::from_walkable(3, 3, vec![false; 9]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_navigable(&map, &mut rng, 0.0, &[]),
            Err(EnvError::SamplingExhausted { .. })
        ));
    }

    #[test]
    fn separation_holds_for_forty_points() {
        let map = crate::env::load_map(include_str!("../../fixtures/apartment.map")).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pts = Vec::new();
        for _ in 0..40 {
            let p = sample_navigable(&map, &mut rng, 1.0, &pts).unwrap();
            pts.push(p);
        }
        let m = distance_matrix(&map, &pts).unwrap();
        for i in 0..pts.len() {
            for j in 0..i {
                assert!(m.get(i, j) >= 1.0, "{} {} too close", pts[i], pts[j]);
            }
        }
    }

    #[test]
    fn tight_budget_exhausts() {
        let map = GridMap::open(2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let taken = [Point::new(0, 0), Point::new(1, 0)];
        let err = Sampler { attempts: 50 }.sample(&map, &mut rng, 1.0, &taken).unwrap_err();
        assert_eq!(err, EnvError::SamplingExhausted { attempts: 50 });
    }
}
