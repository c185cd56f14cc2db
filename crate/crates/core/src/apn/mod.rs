//! Active perception roadmap: viewpose nodes, traversal edges with cached collision state,
//! cluster hyperedges and shortest-path queries.

mod export;
mod graph;
mod path;
mod spatial;

pub use export::{Roadmap, RoadmapCluster, RoadmapEdge, RoadmapNode};
pub use graph::{ApnEdge, ApnGraph, ApnNode, Cluster, ClusterId, EdgeKey, NodeClass, NodeId, NodeOrigin};
pub use path::PathTree;
pub use spatial::SpatialHash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Robot translation and yaw-rate limits used for traversal costs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionLimits {
    pub v_max: f64,
    pub yawrate_max: f64,
}

impl MotionLimits {
    pub fn new(v_max: f64, yawrate_max: f64) -> Result<Self> {
        if !(v_max > 0.0 && yawrate_max > 0.0) {
            return Err(Error::InvalidLimits { v_max, yawrate_max });
        }
        Ok(Self { v_max, yawrate_max })
    }

    pub fn cost(&self, d_pos: f64, d_yaw: f64) -> f64 {
        (d_pos / self.v_max).max(d_yaw / self.yawrate_max)
    }
}

/// Traversal time of an edge: translation and rotation run concurrently, so the slower one dominates.
pub fn edge_cost(d_pos: f64, d_yaw: f64, v_max: f64, yawrate_max: f64) -> Result<f64> {
    Ok(MotionLimits::new(v_max, yawrate_max)?.cost(d_pos, d_yaw))
}
