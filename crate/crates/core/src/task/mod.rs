//! Rearrangement tasks: categories, bins, objects, scenario generation and the
//! location enumeration the planner works on.

mod category;
mod generate;
mod index;
mod scenario;

use thiserror::Error;

pub use category::Category;
pub use generate::{
    build_point_pool, build_point_pool_with, generate_scenario, start_location, PointPool, SceneGenerator, POOL_SEPARATION,
    POOL_SIZE,
};
pub use index::{index_locations, LocationIndex};
pub use scenario::{parse_bins, Bin, ObjectId, ObjectInstance, Scenario, SCENARIO_VERSION, STANDARD_DIFFICULTIES};

use crate::env::EnvError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaskError {
    #[error("difficulty {n} is not a positive multiple of 6 within the {pool}-point pool")]
    BadDifficulty { n: usize, pool: usize },
    #[error("bad scenario: {0}")]
    BadScenario(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}
