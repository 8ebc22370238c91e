//! Route planning, stop scheduling and path tracking for a low-speed
//! automated shuttle, with a deterministic closed-loop simulator.
//!
//! The pipeline runs map → global route → Bézier-blended local trajectory →
//! velocity profile → stop buffer → lateral/longitudinal control → plant.
//! [`harness::run`] wires it together.

pub mod controller;
pub mod geometry;
pub mod global_planner;
pub mod harness;
pub mod local_planner;
pub mod map_model;
pub mod scenarios;
pub mod stop_scheduler;
pub mod vehicle_sim;

pub use geometry::Point2;
