//! Planning engine for object-rearrangement assistance.

pub mod agents;
pub mod env;
pub mod harness;
pub mod metrics;
pub mod planner;
pub mod service;
pub mod session;
pub mod task;
