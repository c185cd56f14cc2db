//! Dense tri-state voxel occupancy map, scan integration and the change journal.

mod changes;
mod grid;
mod snapshot;
mod walk;
mod world;

pub use changes::{ChangeSet, VoxelChange};
pub use grid::{GridSpec, VoxelIndex};
pub use snapshot::MapSnapshot;
pub use walk::VoxelWalk;
pub use world::GroundTruthWorld;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Obb, Vec3};
use crate::sensing::DepthScan;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum OccState {
    #[default]
    Unknown = 0,
    Free = 1,
    Occupied = 2,
}

impl OccState {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(OccState::Unknown),
            1 => Some(OccState::Free),
            2 => Some(OccState::Occupied),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateCounts {
    pub unknown: usize,
    pub free: usize,
    pub occupied: usize,
}

impl StateCounts {
    fn bump(&mut self, s: OccState, delta: isize) {
        let slot = match s {
            OccState::Unknown => &mut self.unknown,
            OccState::Free => &mut self.free,
            OccState::Occupied => &mut self.occupied,
        };
        *slot = (*slot as isize + delta) as usize;
    }
}

/// Collision verdict for a swept volume against the map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Collision {
    Free,
    Unknown,
    Occupied,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClearanceCheck {
    pub state: Collision,
    /// Unknown voxels inside the volume (empty unless `state` is `Unknown`).
    pub unknown: Vec<VoxelIndex>,
}

#[derive(Clone, Debug)]
pub struct VoxelMap {
    spec: GridSpec,
    states: Vec<OccState>,
    counts: StateCounts,
    scratch: Vec<u8>,
}

impl VoxelMap {
    /// All-unknown map covering `bounds`.
    pub fn new(bounds: &Aabb, resolution: f64) -> Result<Self> {
        Ok(Self::with_spec(GridSpec::new(bounds, resolution)?))
    }

    pub fn with_spec(spec: GridSpec) -> Self {
        let n = spec.len();
        Self {
            spec,
            states: vec![OccState::Unknown; n],
            counts: StateCounts {
                unknown: n,
                free: 0,
                occupied: 0,
            },
            scratch: Vec::new(),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn resolution(&self) -> f64 {
        self.spec.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.spec.dims
    }

    pub fn bounds(&self) -> Aabb {
        self.spec.bounds()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn counts(&self) -> StateCounts {
        self.counts
    }

    pub fn states(&self) -> &[OccState] {
        &self.states
    }

    /// Tallies from a full rescan; equals [`counts`](Self::counts) whenever the map is consistent.
    pub fn recount(&self) -> StateCounts {
        let mut c = StateCounts::default();
        for s in &self.states {
            c.bump(*s, 1);
        }
        c
    }

    pub fn state(&self, idx: VoxelIndex) -> OccState {
        self.states[idx.0]
    }

    pub fn get(&self, idx: VoxelIndex) -> Result<OccState> {
        self.states
            .get(idx.0)
            .copied()
            .ok_or(Error::VoxelOutOfRange(idx))
    }

    pub fn query_state(&self, coord: [usize; 3]) -> Result<OccState> {
        let idx = self
            .spec
            .index(coord)
            .ok_or(Error::CoordOutOfRange(coord, self.spec.dims))?;
        Ok(self.states[idx.0])
    }

    pub fn state_at(&self, p: &Vec3) -> Option<OccState> {
        self.spec.index_at(p).map(|i| self.states[i.0])
    }

    /// Writes one voxel and returns its previous state.
    pub fn set(&mut self, idx: VoxelIndex, state: OccState) -> OccState {
        let old = self.states[idx.0];
        if old != state {
            self.counts.bump(old, -1);
            self.counts.bump(state, 1);
            self.states[idx.0] = state;
        }
        old
    }

    /// Writes one voxel, journaling the transition into `changes`.
    pub fn set_logged(&mut self, idx: VoxelIndex, state: OccState, changes: &mut ChangeSet) {
        let old = self.set(idx, state);
        if old != state {
            changes.record(&self.spec, idx, old, state);
        }
    }

    /// Replays a change journal by writing each voxel's final state.
    pub fn apply(&mut self, changes: &ChangeSet) {
        for (idx, ch) in changes.iter() {
            self.set(idx, ch.new);
        }
    }

    /// Integrates a depth scan: voxels before each hit become free, hit voxels become occupied.
    /// Within one scan an occupied mark wins over a free mark for the same voxel.
    pub fn integrate_scan(&mut self, scan: &DepthScan) -> Result<ChangeSet> {
        let origin = scan.origin.position;
        if !self.spec.contains_point(&origin) {
            return Err(Error::OriginOutsideMap {
                x: origin.x,
                y: origin.y,
                z: origin.z,
            });
        }
        const MARK_FREE: u8 = 1;
        const MARK_OCC: u8 = 2;
        let mut scratch = std::mem::take(&mut self.scratch);
        scratch.clear();
        scratch.resize(self.states.len(), 0);
        let mut touched: Vec<usize> = Vec::new();
        let nudge = 1e-4 * self.spec.resolution;

        for ray in &scan.rays {
            let (end, hit_idx) = match ray.hit {
                Some(d) => {
                    let end = origin + ray.direction * d;
                    (end, self.spec.index_at(&(end + ray.direction * nudge)))
                }
                None => (origin + ray.direction * scan.max_range, None),
            };
            for cell in VoxelWalk::new(&self.spec, &origin, &end) {
                let Some(idx) = self.spec.index_i(cell) else { break };
                if Some(idx) == hit_idx {
                    break;
                }
                if scratch[idx.0] == 0 {
                    scratch[idx.0] = MARK_FREE;
                    touched.push(idx.0);
                }
            }
            if let Some(h) = hit_idx {
                if scratch[h.0] == 0 {
                    touched.push(h.0);
                }
                scratch[h.0] = MARK_OCC;
            }
        }

        touched.sort_unstable();
        let mut changes = ChangeSet::new();
        for i in touched {
            let new = if scratch[i] == MARK_OCC {
                OccState::Occupied
            } else {
                OccState::Free
            };
            self.set_logged(VoxelIndex(i), new, &mut changes);
        }
        self.scratch = scratch;
        Ok(changes)
    }

    /// Marks as free every voxel within `radius` of `center` for which `keep` holds.
    pub fn clear_sphere(
        &mut self,
        center: &Vec3,
        radius: f64,
        mut keep: impl FnMut(VoxelIndex) -> bool,
    ) -> ChangeSet {
        let mut changes = ChangeSet::new();
        let Some((lo, hi)) = self.spec.cell_range(&Aabb::from_center(*center, radius)) else {
            return changes;
        };
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    let idx = self.spec.index([x, y, z]).unwrap();
                    if self.spec.voxel_box(idx).distance_to(center) <= radius && keep(idx) {
                        self.set_logged(idx, OccState::Free, &mut changes);
                    }
                }
            }
        }
        changes
    }

    /// Tests the volume swept by a sphere of `radius` moving from `a` to `b`. Any voxel whose
    /// cube comes within `radius` of the segment is considered; occupied voxels short-circuit.
    /// Volumes that leave the map are reported as occupied.
    pub fn sweep_check(&self, a: &Vec3, b: &Vec3, radius: f64) -> ClearanceCheck {
        let occupied = ClearanceCheck {
            state: Collision::Occupied,
            unknown: Vec::new(),
        };
        let mut tight = Aabb::from_point(*a);
        tight.extend(b);
        if !self.bounds().contains_box(&tight.inflate(radius)) {
            return occupied;
        }
        let hd = self.spec.half_diagonal();
        let obb = Obb::around_segment(a, b, radius).inflate(hd);
        let Some((lo, hi)) = self.spec.cell_range(&obb.aabb()) else {
            return occupied;
        };
        let res = self.spec.resolution;
        let ox = self.spec.origin.x;
        let mut unknown = Vec::new();
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                let c = self.spec.center_of_cell([0, y as i64, z as i64]);
                let Some((x0, x1)) = obb.row_interval(c.y, c.z) else { continue };
                let i0 = ((x0 - ox) / res - 0.5).ceil().max(lo[0] as f64) as usize;
                let i1f = ((x1 - ox) / res - 0.5).floor();
                if i1f < lo[0] as f64 {
                    continue;
                }
                let i1 = (i1f as usize).min(hi[0]);
                for x in i0..=i1 {
                    let idx = self.spec.index([x, y, z]).unwrap();
                    let s = self.states[idx.0];
                    if s == OccState::Free {
                        continue;
                    }
                    if !self.spec.in_sweep(idx, a, b, radius) {
                        continue;
                    }
                    if s == OccState::Occupied {
                        return occupied;
                    }
                    unknown.push(idx);
                }
            }
        }
        unknown.sort_unstable();
        let state = if unknown.is_empty() {
            Collision::Free
        } else {
            Collision::Unknown
        };
        ClearanceCheck { state, unknown }
    }

    /// Same as [`sweep_check`](Self::sweep_check) for a stationary sphere.
    pub fn sphere_check(&self, center: &Vec3, radius: f64) -> ClearanceCheck {
        self.sweep_check(center, center, radius)
    }

    /// Reference implementation of [`sweep_check`](Self::sweep_check): visits every voxel.
    pub fn sweep_check_brute(&self, a: &Vec3, b: &Vec3, radius: f64) -> Collision {
        let mut tight = Aabb::from_point(*a);
        tight.extend(b);
        if !self.bounds().contains_box(&tight.inflate(radius)) {
            return Collision::Occupied;
        }
        let mut state = Collision::Free;
        for i in 0..self.states.len() {
            let idx = VoxelIndex(i);
            let s = self.states[i];
            if s == OccState::Free {
                continue;
            }
            if self.spec.in_sweep(idx, a, b, radius) {
                if s == OccState::Occupied {
                    return Collision::Occupied;
                }
                state = Collision::Unknown;
            }
        }
        state
    }

    pub fn snapshot(&self) -> MapSnapshot {
        MapSnapshot::from_map(self)
    }
}
