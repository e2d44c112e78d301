use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::{Direction, DistanceMatrix, EnvError, GridMap, Point};

/// Path cost as a count of orthogonal and diagonal steps.
///
/// Ordering is exact: `a + b*sqrt(2)` is compared with integer arithmetic, so
/// equal-length paths compare equal and always report bit-identical lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct OctileCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl OctileCost {
    pub fn length(self) -> f64 {
        f64::from(self.straight) + f64::from(self.diagonal) * SQRT_2
    }

    fn step(self, dir: Direction) -> Self {
        if dir.is_diagonal() {
            Self { diagonal: self.diagonal + 1, ..self }
        } else {
            Self { straight: self.straight + 1, ..self }
        }
    }
}

impl Ord for OctileCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of ds + dd*sqrt(2)
        let ds = i64::from(self.straight) - i64::from(other.straight);
        let dd = i64::from(self.diagonal) - i64::from(other.diagonal);
        match (ds.signum(), dd.signum()) {
            (0, s) | (s, 0) => s.cmp(&0),
            (1, 1) => Ordering::Greater,
            (-1, -1) => Ordering::Less,
            // opposite signs: compare ds^2 with 2*dd^2
            (1, _) => (ds * ds).cmp(&(2 * dd * dd)),
            _ => (2 * dd * dd).cmp(&(ds * ds)),
        }
    }
}

impl PartialOrd for OctileCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A concrete 8-connected path between two cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub points: Vec<Point>,
    pub length: f64,
}

impl GeodesicPath {
    pub fn directions(&self) -> Vec<Direction> {
        self.points
            .windows(2)
            .map(|w| Direction::between(w[0], w[1]).expect("path steps are 8-neighbours"))
            .collect()
    }
}

const NO_PARENT: u32 = u32::MAX;

/// Single-source shortest-path tree over the walkable cells of a map.
pub struct SearchTree {
    cost: Vec<Option<OctileCost>>,
    parent: Vec<u32>,
}

impl SearchTree {
    /// Dijkstra from `source`; stops early once `target` is settled.
    fn grow(map: &GridMap, source: Point, target: Option<Point>) -> Self {
        let cells = map.cell_count();
        let mut cost: Vec<Option<OctileCost>> = vec![None; cells];
        let mut parent = vec![NO_PARENT; cells];
        let mut settled = vec![false; cells];
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        let src = map.cell(source);
        let target = target.map(|t| map.cell(t));
        cost[src] = Some(OctileCost::default());
        heap.push(Reverse((OctileCost::default(), seq, src)));
        while let Some(Reverse((c, _, cell))) = heap.pop() {
            if settled[cell] {
                continue;
            }
            settled[cell] = true;
            if Some(cell) == target {
                break;
            }
            let here = map.point(cell);
            for dir in Direction::ALL {
                if !map.can_step(here, dir) {
                    continue;
                }
                let (dx, dy) = dir.delta();
                let next = map.cell(here.offset(dx, dy));
                if settled[next] {
                    continue;
                }
                let candidate = c.step(dir);
                if cost[next].is_none_or(|old| candidate < old) {
                    cost[next] = Some(candidate);
                    parent[next] = cell as u32;
                    seq += 1;
                    heap.push(Reverse((candidate, seq, next)));
                }
            }
        }
        Self { cost, parent }
    }

    pub fn from_source(map: &GridMap, source: Point) -> Result<Self, EnvError> {
        if !map.is_walkable(source) {
            return Err(EnvError::NotWalkable(source));
        }
        Ok(Self::grow(map, source, None))
    }

    pub fn cost_to(&self, map: &GridMap, p: Point) -> Option<OctileCost> {
        if !map.in_bounds(p) {
            return None;
        }
        self.cost[map.cell(p)]
    }

    pub fn distance_to(&self, map: &GridMap, p: Point) -> Option<f64> {
        self.cost_to(map, p).map(OctileCost::length)
    }

    fn path_to(&self, map: &GridMap, target: Point) -> Option<GeodesicPath> {
        let c = self.cost_to(map, target)?;
        let mut cell = map.cell(target);
        let mut points = vec![target];
        while self.parent[cell] != NO_PARENT {
            cell = self.parent[cell] as usize;
            points.push(map.point(cell));
        }
        points.reverse();
        Some(GeodesicPath { points, length: c.length() })
    }
}

/// Minimum-cost 8-connected path from `a` to `b` without corner cutting.
pub fn shortest_path(map: &GridMap, a: Point, b: Point) -> Result<GeodesicPath, EnvError> {
    for p in [a, b] {
        if !map.is_walkable(p) {
            return Err(EnvError::NotWalkable(p));
        }
    }
    SearchTree::grow(map, a, Some(b))
        .path_to(map, b)
        .ok_or(EnvError::Unreachable { from: a, to: b })
}

pub fn geodesic_distance(map: &GridMap, a: Point, b: Point) -> Result<f64, EnvError> {
    shortest_path(map, a, b).map(|p| p.length)
}

/// Geodesic distances from `source` to each of `targets` (`None` when unreachable).
pub fn distances_from(map: &GridMap, source: Point, targets: &[Point]) -> Result<Vec<Option<f64>>, EnvError> {
    let tree = SearchTree::from_source(map, source)?;
    Ok(targets.iter().map(|&t| tree.distance_to(map, t)).collect())
}

/// Pairwise geodesic distances between `locations`. One search per distinct point.
pub fn distance_matrix(map: &GridMap, locations: &[Point]) -> Result<DistanceMatrix, EnvError> {
    let mut trees: HashMap<Point, SearchTree> = HashMap::new();
    for &p in locations {
        if !trees.contains_key(&p) {
            trees.insert(p, SearchTree::from_source(map, p)?);
        }
    }
    let mut out = DistanceMatrix::zeros(locations.len());
    for (i, &a) in locations.iter().enumerate() {
        let tree = &trees[&a];
        for (j, &b) in locations.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = tree
                .distance_to(map, b)
                .ok_or(EnvError::Unreachable { from: a, to: b })?;
            out.set(i, j, d);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cost(straight: u32, diagonal: u32) -> OctileCost {
        OctileCost { straight, diagonal }
    }

    #[test]
    fn octile_ordering_is_exact() {
        assert!(cost(3, 0) > cost(0, 2)); // 3 > 2.83
        assert!(cost(1, 1) < cost(3, 0)); // 2.41 < 3
        assert!(cost(0, 5) > cost(7, 0)); // 7.07 > 7
        assert!(cost(2, 3) == cost(2, 3));
        assert!(cost(10, 0) < cost(0, 8)); // 10 < 11.31
    }

    #[test]
    fn same_point_is_a_single_point_path() {
        let map = GridMap::open(3, 3);
        let p = shortest_path(&map, Point::new(1, 1), Point::new(1, 1)).unwrap();
        assert_eq!(p.points, vec![Point::new(1, 1)]);
        assert_eq!(p.length, 0.0);
    }

    #[test]
    fn open_diagonal() {
        let map = GridMap::open(5, 5);
        let p = shortest_path(&map, Point::new(0, 0), Point::new(4, 4)).unwrap();
        assert_eq!(p.length, 4.0 * SQRT_2);
        assert_eq!(p.points.len(), 5);
    }

    #[test]
    fn blocked_endpoint() {
        let mut map = GridMap::open(3, 3);
        map.set_walkable(Point::new(2, 2), false);
        assert_eq!(
            shortest_path(&map, Point::new(0, 0), Point::new(2, 2)),
            Err(EnvError::NotWalkable(Point::new(2, 2)))
        );
    }

    #[test]
    fn neighbour_order_breaks_ties() {
        // (0,1) -> (2,1) on an open 3x3: straight east wins over detours of equal cost.
        let map = GridMap::open(3, 3);
        let p = shortest_path(&map, Point::new(0, 1), Point::new(2, 1)).unwrap();
        assert_eq!(p.points, vec![Point::new(0, 1), Point::new(1, 1), Point::new(2, 1)]);
        // Centre blocked: two equal detours, the choice must be stable.
        let mut map = GridMap::open(3, 3);
        map.set_walkable(Point::new(1, 1), false);
        let p = shortest_path(&map, Point::new(0, 2), Point::new(2, 0)).unwrap();
        assert_eq!(p.length, 4.0);
        let again = shortest_path(&map, Point::new(0, 2), Point::new(2, 0)).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn coinciding_locations_have_zero_distance() {
        let map = GridMap::open(4, 4);
        let p = Point::new(2, 2);
        let m = distance_matrix(&map, &[p, p]).unwrap();
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(1, 0), 0.0);
        let single = distance_matrix(&map, &[p]).unwrap();
        assert_eq!(single.as_row_major(), &[0.0]);
    }

    #[test]
    fn disconnected_matrix_errors() {
        let map = crate::env::load_map(".#.").unwrap();
        let err = distance_matrix(&map, &[Point::new(0, 0), Point::new(2, 0)]).unwrap_err();
        assert!(matches!(err, EnvError::Unreachable { .. }));
    }
}
