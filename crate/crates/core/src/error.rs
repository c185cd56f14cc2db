use std::path::PathBuf;

use crate::apn::NodeId;
use crate::map::VoxelIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("voxel index {0:?} is outside the map")]
    VoxelOutOfRange(VoxelIndex),

    #[error("voxel coordinate {0:?} is outside map dims {1:?}")]
    CoordOutOfRange([usize; 3], [usize; 3]),

    #[error("scan origin ({x:.3}, {y:.3}, {z:.3}) lies outside the map bounds")]
    OriginOutsideMap { x: f64, y: f64, z: f64 },

    #[error("view origin lies inside an obstacle")]
    OriginInObstacle,

    #[error("invalid sensor model: {0}")]
    InvalidSensor(String),

    #[error("invalid world: {0}")]
    InvalidWorld(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("motion limits must be positive (v_max = {v_max}, yawrate_max = {yawrate_max})")]
    InvalidLimits { v_max: f64, yawrate_max: f64 },

    #[error("node {0} does not exist")]
    UnknownNode(NodeId),

    #[error("node {0} is the agent or home node and cannot be removed")]
    ProtectedNode(NodeId),

    #[error("self-loop edge on node {0}")]
    SelfLoop(NodeId),

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
