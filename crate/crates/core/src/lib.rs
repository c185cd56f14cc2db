//! Exploration planning over voxel maps with an active perception roadmap.
//!
//! The crate is organised bottom-up: [`map`] holds the occupancy grid and ground truth,
//! [`sensing`] the sensor model, [`frontier`] frontier tracking, [`apn`] the roadmap graph,
//! [`dfr`] the per-cycle roadmap update, [`planner`] hierarchical tour planning and [`sim`]
//! the closed-loop exploration harness.

pub mod apn;
pub mod dfr;
pub mod error;
pub mod frontier;
pub mod geometry;
pub mod map;
pub mod planner;
pub mod sensing;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{Aabb, Obb, Pose, Vec3};
