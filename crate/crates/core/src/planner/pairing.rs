use std::collections::BTreeMap;

use super::PlanError;

/// What a location index means for the routing problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Depot,
    /// Pickup of request `k`.
    Pickup(usize),
    /// Dropoff of request `k`.
    Dropoff(usize),
}

/// Partition of `1..=2n` into pickups and dropoffs plus the delivery bijection.
///
/// Requests are numbered `0..n` in increasing pickup-index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    roles: Vec<Role>,
    pickups: Vec<usize>,
    dropoffs: Vec<usize>,
}

impl Pairing {
    /// Pickups `1..=n`, dropoffs `n+1..=2n`, `delivery(i) = i + n`.
    pub fn standard(n: usize) -> Self {
        Self::new((1..=n).map(|p| (p, p + n))).expect("standard pairing is a valid partition")
    }

    /// Build from `(pickup, dropoff)` pairs; they must partition `1..=2n`.
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, PlanError> {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        let size = 2 * pairs.len() + 1;
        let mut roles = vec![None; size];
        roles[0] = Some(Role::Depot);
        for (k, &(p, d)) in pairs.iter().enumerate() {
            for (loc, role) in [(p, Role::Pickup(k)), (d, Role::Dropoff(k))] {
                if loc == 0 || loc >= size {
                    return Err(PlanError::BadInstance(format!("location {loc} outside 1..={}", size - 1)));
                }
                if roles[loc].replace(role).is_some() {
                    return Err(PlanError::BadInstance(format!("location {loc} appears twice in the delivery map")));
                }
            }
        }
        let roles: Vec<Role> = roles.into_iter().map(|r| r.expect("every slot filled")).collect();
        Ok(Self {
            roles,
            pickups: pairs.iter().map(|&(p, _)| p).collect(),
            dropoffs: pairs.iter().map(|&(_, d)| d).collect(),
        })
    }

    pub fn from_delivery_map(map: &BTreeMap<usize, usize>) -> Result<Self, PlanError> {
        Self::new(map.iter().map(|(&p, &d)| (p, d)))
    }

    /// Number of requests `n`.
    pub fn n(&self) -> usize {
        self.pickups.len()
    }

    /// Number of locations `2n + 1`.
    pub fn size(&self) -> usize {
        self.roles.len()
    }

    #[inline]
    pub fn role(&self, loc: usize) -> Role {
        self.roles[loc]
    }

    pub fn is_pickup(&self, loc: usize) -> bool {
        matches!(self.roles.get(loc), Some(Role::Pickup(_)))
    }

    pub fn is_dropoff(&self, loc: usize) -> bool {
        matches!(self.roles.get(loc), Some(Role::Dropoff(_)))
    }

    /// Pickup indices, ascending; `pickups()[k]` is the pickup of request `k`.
    pub fn pickups(&self) -> &[usize] {
        &self.pickups
    }

    /// `dropoffs()[k]` is the dropoff of request `k` (not necessarily sorted).
    pub fn dropoffs(&self) -> &[usize] {
        &self.dropoffs
    }

    pub fn delivery_of(&self, pickup: usize) -> Option<usize> {
        match self.roles.get(pickup) {
            Some(&Role::Pickup(k)) => Some(self.dropoffs[k]),
            _ => None,
        }
    }

    pub fn pickup_of(&self, dropoff: usize) -> Option<usize> {
        match self.roles.get(dropoff) {
            Some(&Role::Dropoff(k)) => Some(self.pickups[k]),
            _ => None,
        }
    }

    pub fn delivery_map(&self) -> BTreeMap<usize, usize> {
        self.pickups.iter().copied().zip(self.dropoffs.iter().copied()).collect()
    }
}
