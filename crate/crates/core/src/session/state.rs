use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Action, AssistanceFidelity, Event, EventRecord, Outcome, RejectReason, SessionError};
use crate::env::{geodesic_distance, Direction, DistanceMatrix, GridMap, Point};
use crate::planner::{
    feasible_next, solve, PlanResult, Prefix, Role, Route, SolverPolicy, DEFAULT_BUDGET, DEFAULT_CAPACITY,
};
use crate::task::{index_locations, LocationIndex, ObjectId, Scenario};

/// Pick/place reach in cells when neither the scenario nor the config sets one.
pub const DEFAULT_INTERACT_RADIUS: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub fidelity: AssistanceFidelity,
    #[serde(default)]
    pub solver_policy: SolverPolicy,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_capacity")]
    pub capacity: usize,
    /// Overrides the scenario's reach.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interact_radius: Option<f64>,
    /// Seeds the checklist shuffle.
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn default_capacity() -> usize {
    DEFAULT_CAPACITY
}

impl SessionConfig {
    pub fn new(fidelity: AssistanceFidelity) -> Self {
        Self {
            fidelity,
            solver_policy: SolverPolicy::Auto,
            budget: DEFAULT_BUDGET,
            capacity: DEFAULT_CAPACITY,
            interact_radius: None,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectState {
    AtPickup,
    Held,
    Delivered,
}

/// Everything a client needs to draw the task, minus the static map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub position: Point,
    pub knapsack: Vec<ObjectId>,
    pub objects: Vec<(ObjectId, ObjectState)>,
    pub prefix: Prefix,
    pub plan: Route,
    pub plan_cost: f64,
    pub traveled: f64,
    pub steps: u64,
    pub replans: usize,
    pub done: bool,
    pub message: Option<String>,
    pub events: usize,
}

#[derive(Debug, Clone)]
pub struct Session {
    map: Arc<GridMap>,
    scenario: Scenario,
    index: LocationIndex,
    dist: DistanceMatrix,
    config: SessionConfig,
    interact_radius: f64,
    position: Point,
    knapsack: Vec<ObjectId>,
    prefix: Prefix,
    plan: PlanResult,
    initial_plan: PlanResult,
    straight_moves: u64,
    diagonal_moves: u64,
    steps: u64,
    replans: usize,
    log: Vec<EventRecord>,
    message: Option<String>,
    checklist_order: Vec<ObjectId>,
}

impl Session {
    pub fn start(map: Arc<GridMap>, scenario: Scenario, config: SessionConfig) -> Result<Self, SessionError> {
        scenario.validate(&map)?;
        let index = index_locations(&scenario);
        let dist = index.distances(&map)?;
        let prefix = Prefix::depot();
        let plan = solve(&index.pairing, &dist, config.capacity, &prefix, config.solver_policy, config.budget)?;
        let interact_radius = config
            .interact_radius
            .or(scenario.interact_radius)
            .unwrap_or(DEFAULT_INTERACT_RADIUS);
        let mut checklist_order = index.objects.clone();
        checklist_order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.rng_seed));
        let mut session = Self {
            position: scenario.start,
            map,
            index,
            dist,
            interact_radius,
            knapsack: Vec::new(),
            prefix,
            initial_plan: plan.clone(),
            plan,
            straight_moves: 0,
            diagonal_moves: 0,
            steps: 0,
            replans: 0,
            log: Vec::new(),
            message: None,
            checklist_order,
            config,
            scenario,
        };
        if session.is_done() {
            session.message = Some(COMPLETE_MESSAGE.into());
        }
        Ok(session)
    }

    pub fn apply(&mut self, action: Action) -> Result<Outcome, SessionError> {
        match action {
            Action::Move { dir } => self.apply_move(dir),
            Action::Pick { object } => self.apply_pick(object),
            Action::Place { object } => self.apply_place(object),
        }
    }

    pub fn apply_move(&mut self, dir: Direction) -> Result<Outcome, SessionError> {
        self.guard_live()?;
        self.steps += 1;
        if !self.map.can_step(self.position, dir) {
            return Ok(self.reject(Action::Move { dir }, RejectReason::Blocked, "You can't move there.".into()));
        }
        let (dx, dy) = dir.delta();
        self.position = self.position.offset(dx, dy);
        if dir.is_diagonal() {
            self.diagonal_moves += 1;
        } else {
            self.straight_moves += 1;
        }
        self.message = None;
        self.push(Event::Move { dir, to: self.position });
        Ok(self.outcome(true, false))
    }

    pub fn apply_pick(&mut self, object: ObjectId) -> Result<Outcome, SessionError> {
        self.guard_live()?;
        let (pickup, name) = {
            let obj = self.scenario.object(object).ok_or(SessionError::UnknownObject(object))?;
            (obj.pickup, obj.display_name.clone())
        };
        let index = self.index.pickup_index(object).ok_or(SessionError::UnknownObject(object))?;
        self.steps += 1;
        let action = Action::Pick { object };
        if self.prefix.0.contains(&index) {
            return Ok(self.reject(action, RejectReason::AlreadyPicked, format!("You already picked up the {name}.")));
        }
        if !self.within_reach(pickup) {
            return Ok(self.reject(action, RejectReason::TooFar, format!("The {name} is too far away to pick up.")));
        }
        if self.knapsack.len() >= self.config.capacity {
            return Ok(self.reject(action, RejectReason::KnapsackFull, "Your knapsack is full.".into()));
        }
        self.knapsack.push(object);
        self.message = Some(format!("Picked up the {name}."));
        let replanned = self.on_visit(index, object)?;
        Ok(self.outcome(true, replanned))
    }

    pub fn apply_place(&mut self, object: ObjectId) -> Result<Outcome, SessionError> {
        self.guard_live()?;
        let (category, name) = {
            let obj = self.scenario.object(object).ok_or(SessionError::UnknownObject(object))?;
            (obj.category, obj.display_name.clone())
        };
        let index = self.index.dropoff_index(object).ok_or(SessionError::UnknownObject(object))?;
        self.steps += 1;
        let action = Action::Place { object };
        let Some(slot) = self.knapsack.iter().position(|&o| o == object) else {
            return Ok(self.reject(action, RejectReason::NotHeld, format!("You are not carrying the {name}.")));
        };
        let bin = self.scenario.bin_for(category).expect("validated scenario has every bin");
        let (bin_point, bin_label) = (bin.location, bin.label.clone());
        if !self.within_reach(bin_point) {
            return Ok(self.reject(action, RejectReason::TooFar, format!("The {bin_label} is too far away.")));
        }
        self.knapsack.remove(slot);
        self.message = Some(format!("Placed the {name} in the {bin_label}."));
        let replanned = self.on_visit(index, object)?;
        if self.is_done() {
            self.message = Some(COMPLETE_MESSAGE.into());
        }
        Ok(self.outcome(true, replanned))
    }

    /// Record a location visit; replan if it was not the planned one. Returns whether a replan happened.
    fn on_visit(&mut self, index: usize, object: ObjectId) -> Result<bool, SessionError> {
        let options = feasible_next(&self.index.pairing, &self.prefix, self.config.capacity)?;
        if !options.contains(&index) {
            return Err(SessionError::InfeasibleVisit { index, detail: format!("feasible set is {options:?}") });
        }
        let expected = self.plan.route.0[self.prefix.len()];
        let deviated = index != expected;
        self.prefix.0.push(index);
        let event = match self.index.pairing.role(index) {
            Role::Pickup(_) => Event::Pick { object, location: index, deviated },
            Role::Dropoff(_) => Event::Place { object, location: index, deviated },
            Role::Depot => unreachable!("the depot is never revisited"),
        };
        self.push(event);
        if deviated {
            self.replans += 1;
            self.plan = solve(
                &self.index.pairing,
                &self.dist,
                self.config.capacity,
                &self.prefix,
                self.config.solver_policy,
                self.config.budget,
            )?;
            self.push(Event::Replan {
                expected,
                visited: index,
                route: self.plan.route.clone(),
                cost: self.plan.cost,
                solver: self.plan.solver,
            });
        }
        Ok(deviated)
    }

    fn within_reach(&self, target: Point) -> bool {
        // octile length never undercuts the straight line
        if self.position.euclidean(target) > self.interact_radius {
            return false;
        }
        geodesic_distance(&self.map, self.position, target).is_ok_and(|d| d <= self.interact_radius)
    }

    fn guard_live(&self) -> Result<(), SessionError> {
        if self.is_done() {
            Err(SessionError::Complete)
        } else {
            Ok(())
        }
    }

    fn reject(&mut self, action: Action, reason: RejectReason, message: String) -> Outcome {
        self.message = Some(message.clone());
        self.push(Event::Reject { action, reason, message });
        self.outcome(false, false)
    }

    fn outcome(&self, accepted: bool, replanned: bool) -> Outcome {
        Outcome { accepted, replanned, done: self.is_done(), message: self.message.clone() }
    }

    fn push(&mut self, event: Event) {
        let step = self.log.len() as u64;
        self.log.push(EventRecord { step, event });
    }

    pub fn is_done(&self) -> bool {
        self.prefix.len() == self.index.len()
    }

    pub fn map(&self) -> &Arc<GridMap> {
        &self.map
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn index(&self) -> &LocationIndex {
        &self.index
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.dist
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn fidelity(&self) -> AssistanceFidelity {
        self.config.fidelity
    }

    pub fn capacity(&self) -> usize {
        self.config.capacity
    }

    pub fn interact_radius(&self) -> f64 {
        self.interact_radius
    }

    pub fn position(&self) -> Point {
        self.position
    }

    pub fn knapsack(&self) -> &[ObjectId] {
        &self.knapsack
    }

    pub fn prefix(&self) -> &Prefix {
        &self.prefix
    }

    pub fn plan(&self) -> &PlanResult {
        &self.plan
    }

    pub fn initial_plan(&self) -> &PlanResult {
        &self.initial_plan
    }

    /// The plan's next location, or `None` when done.
    pub fn next_planned(&self) -> Option<usize> {
        self.plan.route.0.get(self.prefix.len()).copied()
    }

    pub fn feasible_next(&self) -> Vec<usize> {
        feasible_next(&self.index.pairing, &self.prefix, self.config.capacity).expect("session prefix stays feasible")
    }

    /// Distance walked, in cell units.
    pub fn traveled(&self) -> f64 {
        self.straight_moves as f64 + self.diagonal_moves as f64 * std::f64::consts::SQRT_2
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn replans(&self) -> usize {
        self.replans
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.log
    }

    pub fn message(&self) -> Option<&str> {
        self.message.as_deref()
    }

    pub(crate) fn checklist_order(&self) -> &[ObjectId] {
        &self.checklist_order
    }

    pub fn object_state(&self, object: ObjectId) -> Option<ObjectState> {
        let pickup = self.index.pickup_index(object)?;
        let dropoff = pickup + self.index.n();
        Some(if self.prefix.0.contains(&dropoff) {
            ObjectState::Delivered
        } else if self.prefix.0.contains(&pickup) {
            ObjectState::Held
        } else {
            ObjectState::AtPickup
        })
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            position: self.position,
            knapsack: self.knapsack.clone(),
            objects: self
                .index
                .objects
                .iter()
                .map(|&o| (o, self.object_state(o).expect("indexed object")))
                .collect(),
            prefix: self.prefix.clone(),
            plan: self.plan.route.clone(),
            plan_cost: self.plan.cost,
            traveled: self.traveled(),
            steps: self.steps,
            replans: self.replans,
            done: self.is_done(),
            message: self.message.clone(),
            events: self.log.len(),
        }
    }
}

const COMPLETE_MESSAGE: &str = "All items are put away!";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{Bin, Category, ObjectInstance, SCENARIO_VERSION};

    /// 7x3 open room: two dishes on the top row, dish bin at the right end.
    fn tiny() -> (Arc<GridMap>, Scenario) {
        let map = Arc::new(GridMap::open(7, 3));
        let obj = |i: u32, x: i32| ObjectInstance {
            id: ObjectId(i),
            category: Category::Dishes,
            pickup: Point::new(x, 0),
            display_name: format!("cup{i}"),
        };
        let scenario = Scenario {
            v: SCENARIO_VERSION,
            map_name: "tiny".into(),
            seed: 0,
            difficulty: 2,
            bins: vec![Bin {
                id: "dish_bin".into(),
                category: Category::Dishes,
                location: Point::new(6, 2),
                label: "dish bin".into(),
            }],
            objects: vec![obj(0, 1), obj(1, 4)],
            start: Point::new(0, 0),
            interact_radius: None,
        };
        (map, scenario)
    }

    fn walk(s: &mut Session, dir: Direction, times: usize) {
        for _ in 0..times {
            assert!(s.apply_move(dir).unwrap().accepted);
        }
    }

    #[test]
    fn compliant_play_never_replans() {
        let (map, scenario) = tiny();
        let mut s = Session::start(map, scenario, SessionConfig::new(AssistanceFidelity::Optimal)).unwrap();
        assert_eq!(s.plan().route.0, vec![0, 1, 2, 3, 4]);
        walk(&mut s, Direction::E, 1);
        s.apply_pick(ObjectId(0)).unwrap();
        walk(&mut s, Direction::E, 3);
        s.apply_pick(ObjectId(1)).unwrap();
        walk(&mut s, Direction::SE, 2);
        assert!(s.apply_place(ObjectId(0)).unwrap().accepted);
        let out = s.apply_place(ObjectId(1)).unwrap();
        assert!(out.done);
        assert_eq!(s.replans(), 0);
        assert_eq!(s.prefix().0, s.initial_plan().route.0);
        assert_eq!(s.traveled(), 4.0 + 2.0 * std::f64::consts::SQRT_2);
        assert_eq!(s.apply_move(Direction::W), Err(SessionError::Complete));
    }

    #[test]
    fn rejections_leave_state_alone() {
        let (map, scenario) = tiny();
        let mut s = Session::start(map, scenario, SessionConfig::new(AssistanceFidelity::None)).unwrap();
        let before = s.snapshot();
        let out = s.apply_move(Direction::N).unwrap();
        assert!(!out.accepted);
        assert_eq!(s.position(), before.position);
        assert_eq!(s.message(), Some("You can't move there."));
        let out = s.apply_pick(ObjectId(1)).unwrap();
        assert!(out.message.unwrap().contains("too far"));
        let out = s.apply_place(ObjectId(0)).unwrap();
        assert!(!out.accepted);
        assert_eq!(s.prefix(), &before.prefix);
        assert_eq!(s.steps(), 3);
        assert_eq!(s.traveled(), 0.0);
        assert!(matches!(s.apply_pick(ObjectId(9)), Err(SessionError::UnknownObject(_))));
    }

    #[test]
    fn deviating_pick_replans_from_history() {
        let (map, scenario) = tiny();
        let mut s = Session::start(map, scenario, SessionConfig::new(AssistanceFidelity::Optimal)).unwrap();
        walk(&mut s, Direction::E, 4);
        let out = s.apply_pick(ObjectId(1)).unwrap();
        assert!(out.replanned);
        assert_eq!(s.replans(), 1);
        assert_eq!(&s.plan().route.0[..2], &[0, 2]);
        assert!(matches!(s.events().last().unwrap().event, Event::Replan { expected: 1, visited: 2, .. }));
    }

    #[test]
    fn knapsack_full_and_wrong_bin() {
        let (map, mut scenario) = tiny();
        scenario.bins.push(Bin {
            id: "toy_box".into(),
            category: Category::Toys,
            location: Point::new(0, 2),
            label: "toy box".into(),
        });
        for (i, x) in [(2u32, 2), (3, 3)] {
            scenario.objects.push(ObjectInstance {
                id: ObjectId(i),
                category: Category::Toys,
                pickup: Point::new(x, 1),
                display_name: "ball".into(),
            });
        }
        scenario.difficulty = 4;
        let mut s = Session::start(map, scenario, SessionConfig::new(AssistanceFidelity::None)).unwrap();
        walk(&mut s, Direction::E, 2);
        s.apply_pick(ObjectId(0)).unwrap();
        s.apply_pick(ObjectId(2)).unwrap();
        walk(&mut s, Direction::E, 1);
        let out = s.apply_pick(ObjectId(3)).unwrap();
        assert_eq!(out.message.as_deref(), Some("Your knapsack is full."));
        assert_eq!(s.knapsack().len(), 2);
        // at the dish bin holding a toy: the toy's own bin is far away
        walk(&mut s, Direction::SE, 1);
        walk(&mut s, Direction::E, 2);
        assert!(!s.apply_place(ObjectId(2)).unwrap().accepted);
        assert!(s.apply_place(ObjectId(0)).unwrap().accepted);
    }

    #[test]
    fn empty_scenario_is_done_at_start() {
        let (map, mut scenario) = tiny();
        scenario.objects.clear();
        scenario.difficulty = 0;
        let s = Session::start(map, scenario, SessionConfig::new(AssistanceFidelity::Optimal)).unwrap();
        assert!(s.is_done());
        assert_eq!(s.plan().route.0, vec![0]);
    }
}
