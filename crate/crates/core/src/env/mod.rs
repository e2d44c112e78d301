//! Grid world: occupancy map, geodesic paths and distances, point sampling.

mod grid;
mod map_format;
mod matrix;
mod path;
mod sample;

use thiserror::Error;

pub use grid::{Direction, GridMap, Point};
pub use map_format::{load_map, render_map};
pub use matrix::DistanceMatrix;
pub use path::{
    distance_matrix, distances_from, geodesic_distance, shortest_path, GeodesicPath, OctileCost, SearchTree,
};
pub use sample::{sample_navigable, Sampler, DEFAULT_SAMPLE_ATTEMPTS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("malformed map: {0}")]
    MalformedMap(String),
    #[error("no path from {from} to {to}")]
    Unreachable { from: Point, to: Point },
    #[error("{0} is not walkable")]
    NotWalkable(Point),
    #[error("rejection sampling gave up after {attempts} attempts")]
    SamplingExhausted { attempts: usize },
}
