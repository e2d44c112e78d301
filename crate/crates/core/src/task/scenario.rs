use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Category, TaskError};
use crate::env::{GridMap, Point};

pub const SCENARIO_VERSION: u32 = 1;

/// Object counts used by the four difficulty levels (1:1 through 4:1 objects per bin).
pub const STANDARD_DIFFICULTIES: [usize; 4] = [6, 12, 18, 24];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub id: String,
    pub category: Category,
    #[serde(flatten)]
    pub location: Point,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: ObjectId,
    pub category: Category,
    #[serde(flatten)]
    pub pickup: Point,
    pub display_name: String,
}

/// One concrete task: where the bins are, which objects are misplaced, where the agent starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub v: u32,
    pub map_name: String,
    pub seed: u64,
    pub difficulty: usize,
    pub bins: Vec<Bin>,
    pub objects: Vec<ObjectInstance>,
    pub start: Point,
    /// Pick/place reach in cells; sessions fall back to their default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interact_radius: Option<f64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, TaskError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| TaskError::BadScenario(e.to_string()))?;
        if scenario.v != SCENARIO_VERSION {
            return Err(TaskError::BadScenario(format!("unsupported scenario version {}", scenario.v)));
        }
        Ok(scenario)
    }

    /// Canonical pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn bin_for(&self, category: Category) -> Option<&Bin> {
        self.bins.iter().find(|b| b.category == category)
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Structural checks against the map the scenario is played on.
    pub fn validate(&self, map: &GridMap) -> Result<(), TaskError> {
        let bad = |msg: String| Err(TaskError::BadScenario(msg));
        if self.difficulty != self.objects.len() {
            return bad(format!(
                "difficulty {} but {} objects",
                self.difficulty,
                self.objects.len()
            ));
        }
        if !map.is_walkable(self.start) {
            return bad(format!("start {} is not walkable", self.start));
        }
        let mut categories = BTreeSet::new();
        for bin in &self.bins {
            if !categories.insert(bin.category) {
                return bad(format!("two bins for category {}", bin.category));
            }
            if !map.is_walkable(bin.location) {
                return bad(format!("bin {} at {} is not walkable", bin.id, bin.location));
            }
        }
        let mut ids = BTreeSet::new();
        for obj in &self.objects {
            if !ids.insert(obj.id) {
                return bad(format!("duplicate object id {}", obj.id));
            }
            if !map.is_walkable(obj.pickup) {
                return bad(format!("object {} at {} is not walkable", obj.id, obj.pickup));
            }
            if self.bin_for(obj.category).is_none() {
                return bad(format!("no bin for category {}", obj.category));
            }
        }
        if let Some(r) = self.interact_radius {
            if !(r.is_finite() && r >= 0.0) {
                return bad(format!("interact_radius {r} must be a nonnegative number"));
            }
        }
        Ok(())
    }

    /// Whether every category has the same number of objects.
    pub fn is_category_balanced(&self) -> bool {
        let count = |c: Category| self.objects.iter().filter(|o| o.category == c).count();
        let first = count(Category::ALL[0]);
        Category::ALL.iter().all(|&c| count(c) == first)
    }
}

/// Bin placements stored next to a map (`<map>.bins.json`).
pub fn parse_bins(text: &str) -> Result<Vec<Bin>, TaskError> {
    serde_json::from_str(text).map_err(|e| TaskError::BadScenario(format!("bins: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_field_order_is_canonical() {
        let s = Scenario {
            v: 1,
            map_name: "tiny".into(),
            seed: 3,
            difficulty: 1,
            bins: vec![Bin {
                id: "dish_bin".into(),
                category: Category::Dishes,
                location: Point::new(2, 0),
                label: "dish bin".into(),
            }],
            objects: vec![ObjectInstance {
                id: ObjectId(0),
                category: Category::Dishes,
                pickup: Point::new(1, 0),
                display_name: "mug".into(),
            }],
            start: Point::new(0, 0),
            interact_radius: None,
        };
        let compact = serde_json::to_string(&s).unwrap();
        assert_eq!(
            compact,
            r#"{"v":1,"map_name":"tiny","seed":3,"difficulty":1,"bins":[{"id":"dish_bin","category":"dishes","x":2,"y":0,"label":"dish bin"}],"objects":[{"id":0,"category":"dishes","x":1,"y":0,"display_name":"mug"}],"start":{"x":0,"y":0}}"#
        );
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn wrong_version_rejected() {
        let text = r#"{"v":2,"map_name":"m","seed":0,"difficulty":0,"bins":[],"objects":[],"start":{"x":0,"y":0}}"#;
        assert!(matches!(Scenario::from_json(text), Err(TaskError::BadScenario(_))));
    }
}
