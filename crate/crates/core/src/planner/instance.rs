use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Pairing, PlanError, Prefix, DEFAULT_CAPACITY};
use crate::env::DistanceMatrix;

pub const INSTANCE_VERSION: u32 = 1;

fn default_capacity() -> usize {
    DEFAULT_CAPACITY
}

/// A standalone routing instance, independent of any map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub v: u32,
    pub n: usize,
    #[serde(default = "default_capacity")]
    pub capacity: usize,
    /// Row-major `(2n+1)²` distances.
    pub dist: Vec<f64>,
    /// Pickup index to dropoff index.
    pub delivery: BTreeMap<usize, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<Vec<usize>>,
}

impl Instance {
    pub fn new(pairing: &Pairing, dist: &DistanceMatrix, capacity: usize, prefix: Option<&Prefix>) -> Self {
        Self {
            v: INSTANCE_VERSION,
            n: pairing.n(),
            capacity,
            dist: dist.as_row_major().to_vec(),
            delivery: pairing.delivery_map(),
            prefix: prefix.map(|p| p.0.clone()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        let inst: Instance = serde_json::from_str(text).map_err(|e| PlanError::BadInstance(e.to_string()))?;
        if inst.v != INSTANCE_VERSION {
            return Err(PlanError::BadInstance(format!("unsupported instance version {}", inst.v)));
        }
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    /// Check and unpack into solver inputs.
    pub fn parts(&self) -> Result<(Pairing, DistanceMatrix, Prefix), PlanError> {
        if self.delivery.len() != self.n {
            return Err(PlanError::BadInstance(format!(
                "delivery map has {} entries, expected n = {}",
                self.delivery.len(),
                self.n
            )));
        }
        let pairing = Pairing::from_delivery_map(&self.delivery)?;
        let dist = DistanceMatrix::from_row_major(self.dist.clone()).ok_or_else(|| {
            PlanError::BadInstance(format!("dist has {} entries, not a square matrix", self.dist.len()))
        })?;
        if dist.dim() != pairing.size() {
            return Err(PlanError::DimensionMismatch { route: pairing.size(), matrix: dist.dim() });
        }
        if let Some(bad) = self.dist.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(PlanError::BadInstance(format!("distance {bad} is not a finite nonnegative number")));
        }
        let prefix = Prefix(self.prefix.clone().unwrap_or_else(|| vec![0]));
        Ok((pairing, dist, prefix))
    }
}
