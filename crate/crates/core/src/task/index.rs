use super::{ObjectId, Scenario};
use crate::env::{distance_matrix, DistanceMatrix, EnvError, GridMap, Point};
use crate::planner::Pairing;

/// Enumeration of the task's locations of interest.
///
/// Index 0 is the depot (start), `1..=n` are pickups in object-id order and
/// `n+1..=2n` the matching dropoffs, so `delivery(i) = i + n`. Objects sharing a
/// bin get distinct dropoff indices at the same point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationIndex {
    pub points: Vec<Point>,
    pub objects: Vec<ObjectId>,
    pub pairing: Pairing,
}

impl LocationIndex {
    pub fn n(&self) -> usize {
        self.objects.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn pickup_index(&self, id: ObjectId) -> Option<usize> {
        self.objects.iter().position(|&o| o == id).map(|i| i + 1)
    }

    pub fn dropoff_index(&self, id: ObjectId) -> Option<usize> {
        self.pickup_index(id).map(|p| p + self.n())
    }

    /// Object whose pickup or dropoff sits at location `index`.
    pub fn object_at(&self, index: usize) -> Option<ObjectId> {
        let n = self.n();
        match index {
            0 => None,
            i if i <= n => Some(self.objects[i - 1]),
            i if i <= 2 * n => Some(self.objects[i - n - 1]),
            _ => None,
        }
    }

    pub fn distances(&self, map: &GridMap) -> Result<DistanceMatrix, EnvError> {
        distance_matrix(map, &self.points)
    }
}

/// Scenario (validated by its caller) to location enumeration.
pub fn index_locations(scenario: &Scenario) -> LocationIndex {
    let mut objects: Vec<_> = scenario.objects.iter().collect();
    objects.sort_by_key(|o| o.id);
    let mut points = Vec::with_capacity(2 * objects.len() + 1);
    points.push(scenario.start);
    points.extend(objects.iter().map(|o| o.pickup));
    points.extend(objects.iter().map(|o| {
        scenario
            .bin_for(o.category)
            .map(|b| b.location)
            .expect("validated scenario has a bin for every object category")
    }));
    LocationIndex {
        points,
        objects: objects.iter().map(|o| o.id).collect(),
        pairing: Pairing::standard(objects.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{Bin, Category, ObjectInstance};

    fn scenario(objects: &[(u32, Category, i32)]) -> Scenario {
        Scenario {
            v: 1,
            map_name: "strip".into(),
            seed: 0,
            difficulty: objects.len(),
            bins: vec![
                Bin { id: "shelf".into(), category: Category::Books, location: Point::new(9, 0), label: "bookshelf".into() },
                Bin { id: "box".into(), category: Category::Toys, location: Point::new(7, 0), label: "toy box".into() },
            ],
            objects: objects
                .iter()
                .map(|&(id, category, x)| ObjectInstance {
                    id: ObjectId(id),
                    category,
                    pickup: Point::new(x, 0),
                    display_name: "thing".into(),
                })
                .collect(),
            start: Point::new(0, 0),
            interact_radius: None,
        }
    }

    #[test]
    fn single_object() {
        let idx = index_locations(&scenario(&[(0, Category::Toys, 3)]));
        assert_eq!(idx.points, vec![Point::new(0, 0), Point::new(3, 0), Point::new(7, 0)]);
        assert_eq!(idx.pairing.pickups(), &[1]);
        assert_eq!(idx.pairing.dropoffs(), &[2]);
        assert_eq!(idx.pairing.delivery_of(1), Some(2));
    }

    #[test]
    fn shared_bin_gives_distinct_coinciding_dropoffs() {
        let s = scenario(&[(1, Category::Books, 5), (0, Category::Books, 2)]);
        let idx = index_locations(&s);
        // pickups follow object id order
        assert_eq!(idx.objects, vec![ObjectId(0), ObjectId(1)]);
        assert_eq!(idx.points[1], Point::new(2, 0));
        assert_eq!(idx.points[3], idx.points[4]);
        let map = GridMap::open(10, 1);
        let d = idx.distances(&map).unwrap();
        assert_eq!(d.get(3, 4), 0.0);
        assert_eq!(idx.object_at(4), Some(ObjectId(1)));
        assert_eq!(idx.dropoff_index(ObjectId(0)), Some(3));
    }
}
