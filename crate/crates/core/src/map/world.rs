use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GridSpec, OccState, VoxelIndex, VoxelMap};
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Pose, Vec3};

/// Ground-truth environment: a bounded box populated with axis-aligned obstacle boxes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthWorld {
    pub bounds: Aabb,
    pub obstacles: Vec<Aabb>,
    pub start: Pose,
}

impl GroundTruthWorld {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world serializes")
    }

    /// Checks the structural invariants for a robot with safety radius `d_safe`.
    pub fn validate(&self, d_safe: f64) -> Result<()> {
        if !self.bounds.is_valid() || self.bounds.volume() <= 0.0 {
            return Err(Error::InvalidWorld("bounds are empty or inverted".into()));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !o.is_valid() {
                return Err(Error::InvalidWorld(format!("obstacle {i} is inverted")));
            }
            if !self.bounds.contains_box(o) {
                return Err(Error::InvalidWorld(format!("obstacle {i} leaves the world bounds")));
            }
        }
        let p = self.start.position;
        if !self.bounds.contains(&p) {
            return Err(Error::InvalidWorld("start position is outside the bounds".into()));
        }
        if self.clearance(&p) <= d_safe {
            return Err(Error::InvalidWorld(format!(
                "start position is within the safety distance {d_safe} m of an obstacle"
            )));
        }
        Ok(())
    }

    /// Distance from `p` to the nearest obstacle.
    pub fn clearance(&self, p: &Vec3) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_inside_obstacle(&self, p: &Vec3) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    /// Nearest obstacle entry distance along the unit direction `dir`, within `max_range`.
    pub fn raycast(&self, origin: &Vec3, dir: &Vec3, max_range: f64) -> Option<f64> {
        self.raycast_among(self.obstacles.iter(), origin, dir, max_range)
    }

    pub(crate) fn raycast_among<'a>(
        &self,
        boxes: impl Iterator<Item = &'a Aabb>,
        origin: &Vec3,
        dir: &Vec3,
        max_range: f64,
    ) -> Option<f64> {
        let mut best: Option<f64> = None;
        for b in boxes {
            let limit = best.unwrap_or(max_range);
            if let Some(t) = b.ray_entry(origin, dir, limit) {
                if best.is_none_or(|bt| t < bt) {
                    best = Some(t);
                }
            }
        }
        best
    }

    /// A voxel is occupied when its cube shares volume with any obstacle.
    pub fn voxel_occupied(&self, spec: &GridSpec, idx: VoxelIndex) -> bool {
        let vb = spec.voxel_box(idx);
        let eps = 1e-6 * spec.resolution;
        self.obstacles.iter().any(|o| o.overlaps_interior(&vb, eps))
    }

    /// Fully known occupancy map of the world at the given grid.
    pub fn rasterize(&self, spec: &GridSpec) -> VoxelMap {
        let mut map = VoxelMap::with_spec(*spec);
        for i in 0..spec.len() {
            map.set(VoxelIndex(i), OccState::Free);
        }
        let eps = 1e-6 * spec.resolution;
        for o in &self.obstacles {
            let shrunk = Aabb::new(o.min.add_scalar(eps), o.max.add_scalar(-eps));
            if !shrunk.is_valid() {
                continue;
            }
            let Some((lo, hi)) = spec.cell_range(&shrunk) else { continue };
            for z in lo[2]..=hi[2] {
                for y in lo[1]..=hi[1] {
                    for x in lo[0]..=hi[0] {
                        let idx = spec.index([x, y, z]).unwrap();
                        map.set(idx, OccState::Occupied);
                    }
                }
            }
        }
        map
    }
}
