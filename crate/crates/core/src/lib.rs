//! Core library: elastoplastic MPM simulation, rigid-gripper colliders,
//! topology tracking, surface extraction, synthetic observations, metrics,
//! and a sampling-based manipulation planner.

pub mod collider;
pub mod math;
pub mod meshing;
pub mod mpm;
pub mod scenegen;
pub mod spatial;
pub mod topo;
