use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Vec3};

/// Linear index of a voxel inside a [`GridSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VoxelIndex(pub usize);

/// Geometry of a dense voxel grid: lower corner, edge length and voxel counts per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec3,
    pub resolution: f64,
    pub dims: [usize; 3],
}

impl GridSpec {
    pub fn new(bounds: &Aabb, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "map resolution must be positive, got {resolution}"
            )));
        }
        if !bounds.is_valid() {
            return Err(Error::InvalidConfig("map bounds are inverted".into()));
        }
        let ext = bounds.extent();
        let mut dims = [0usize; 3];
        for i in 0..3 {
            // tolerate bounds that are an exact multiple up to rounding noise
            dims[i] = ((ext[i] / resolution) - 1e-9).ceil().max(1.0) as usize;
        }
        Ok(Self {
            origin: bounds.min,
            resolution,
            dims,
        })
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounds(&self) -> Aabb {
        let ext = Vec3::new(
            self.dims[0] as f64,
            self.dims[1] as f64,
            self.dims[2] as f64,
        ) * self.resolution;
        Aabb::new(self.origin, self.origin + ext)
    }

    pub fn in_dims(&self, c: [i64; 3]) -> bool {
        (0..3).all(|i| c[i] >= 0 && (c[i] as usize) < self.dims[i])
    }

    pub fn index(&self, c: [usize; 3]) -> Option<VoxelIndex> {
        if (0..3).all(|i| c[i] < self.dims[i]) {
            Some(VoxelIndex(c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])))
        } else {
            None
        }
    }

    pub fn index_i(&self, c: [i64; 3]) -> Option<VoxelIndex> {
        if self.in_dims(c) {
            self.index([c[0] as usize, c[1] as usize, c[2] as usize])
        } else {
            None
        }
    }

    pub fn coord(&self, idx: VoxelIndex) -> [usize; 3] {
        let i = idx.0;
        let x = i % self.dims[0];
        let y = (i / self.dims[0]) % self.dims[1];
        let z = i / (self.dims[0] * self.dims[1]);
        [x, y, z]
    }

    /// Unclamped integer cell containing `p`.
    pub fn cell_of(&self, p: &Vec3) -> [i64; 3] {
        let g = (p - self.origin) / self.resolution;
        [g.x.floor() as i64, g.y.floor() as i64, g.z.floor() as i64]
    }

    pub fn index_at(&self, p: &Vec3) -> Option<VoxelIndex> {
        self.index_i(self.cell_of(p))
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        self.index_at(p).is_some()
    }

    pub fn center_of_cell(&self, c: [i64; 3]) -> Vec3 {
        self.origin
            + Vec3::new(
                c[0] as f64 + 0.5,
                c[1] as f64 + 0.5,
                c[2] as f64 + 0.5,
            ) * self.resolution
    }

    pub fn center(&self, idx: VoxelIndex) -> Vec3 {
        let c = self.coord(idx);
        self.center_of_cell([c[0] as i64, c[1] as i64, c[2] as i64])
    }

    pub fn voxel_box(&self, idx: VoxelIndex) -> Aabb {
        let c = self.center(idx);
        Aabb::from_center(c, 0.5 * self.resolution)
    }

    /// In-bounds face neighbours.
    pub fn neighbors6(&self, idx: VoxelIndex) -> impl Iterator<Item = VoxelIndex> + '_ {
        let c = self.coord(idx);
        const OFFSETS: [[i64; 3]; 6] = [
            [-1, 0, 0],
            [1, 0, 0],
            [0, -1, 0],
            [0, 1, 0],
            [0, 0, -1],
            [0, 0, 1],
        ];
        OFFSETS.iter().filter_map(move |o| {
            self.index_i([
                c[0] as i64 + o[0],
                c[1] as i64 + o[1],
                c[2] as i64 + o[2],
            ])
        })
    }

    /// Voxels on the outermost layer of the grid.
    pub fn is_boundary(&self, idx: VoxelIndex) -> bool {
        let c = self.coord(idx);
        (0..3).any(|i| c[i] == 0 || c[i] + 1 == self.dims[i])
    }

    /// Inclusive cell range covering `b`, clamped to the grid. `None` when disjoint.
    pub fn cell_range(&self, b: &Aabb) -> Option<([usize; 3], [usize; 3])> {
        let lo = self.cell_of(&b.min);
        let hi = self.cell_of(&b.max);
        let mut out_lo = [0usize; 3];
        let mut out_hi = [0usize; 3];
        for i in 0..3 {
            let l = lo[i].max(0);
            let h = hi[i].min(self.dims[i] as i64 - 1);
            if l > h {
                return None;
            }
            out_lo[i] = l as usize;
            out_hi[i] = h as usize;
        }
        Some((out_lo, out_hi))
    }

    /// Whether the voxel cube comes within `radius` of the segment `a..b`.
    pub fn in_sweep(&self, idx: VoxelIndex, a: &Vec3, b: &Vec3, radius: f64) -> bool {
        let dc = crate::geometry::point_segment_distance(&self.center(idx), a, b);
        if dc <= radius {
            true
        } else if dc > radius + self.half_diagonal() {
            false
        } else {
            self.voxel_box(idx).segment_distance(a, b) <= radius
        }
    }

    /// Half of a voxel's space diagonal.
    pub fn half_diagonal(&self) -> f64 {
        0.5 * self.resolution * 3f64.sqrt()
    }
}
