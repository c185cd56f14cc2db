use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ApnGraph, ClusterId, NodeClass, NodeId};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::map::Collision;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadmapNode {
    pub uid: NodeId,
    pub position: Vec3,
    pub yaw: f64,
    pub gain: usize,
    pub open: bool,
    pub class: NodeClass,
    pub cluster: Option<ClusterId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadmapEdge {
    pub u: NodeId,
    pub w: NodeId,
    #[serde(rename = "L")]
    pub cost: f64,
    pub state: Collision,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadmapCluster {
    pub id: ClusterId,
    pub members: Vec<NodeId>,
    pub centroid: Vec3,
}

/// Serializable roadmap snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Roadmap {
    pub nodes: Vec<RoadmapNode>,
    pub edges: Vec<RoadmapEdge>,
    pub clusters: Vec<RoadmapCluster>,
}

impl Roadmap {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

impl ApnGraph {
    pub fn roadmap(&self) -> Roadmap {
        Roadmap {
            nodes: self
                .nodes()
                .map(|n| RoadmapNode {
                    uid: n.uid,
                    position: n.pose.position,
                    yaw: n.pose.yaw,
                    gain: n.gain,
                    open: n.open,
                    class: n.class(),
                    cluster: n.cluster,
                })
                .collect(),
            edges: self
                .edges()
                .map(|e| RoadmapEdge {
                    u: e.key.0,
                    w: e.key.1,
                    cost: e.cost,
                    state: e.state,
                })
                .collect(),
            clusters: self
                .clusters()
                .iter()
                .map(|c| RoadmapCluster {
                    id: c.id,
                    members: c.members.iter().copied().collect(),
                    centroid: c.centroid,
                })
                .collect(),
        }
    }
}
