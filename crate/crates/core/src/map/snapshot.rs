use serde::{Deserialize, Serialize};

use super::{GridSpec, OccState, VoxelIndex, VoxelMap};
use crate::geometry::Vec3;

/// Run-length encoded dump of a map's state array (x fastest, then y, then z).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSnapshot {
    pub dims: [usize; 3],
    pub resolution: f64,
    pub origin: Vec3,
    /// `(state, run length)` pairs with states encoded 0 = unknown, 1 = free, 2 = occupied.
    pub runs: Vec<(u8, u32)>,
}

impl MapSnapshot {
    pub fn from_map(map: &VoxelMap) -> Self {
        let mut runs: Vec<(u8, u32)> = Vec::new();
        for s in map.states() {
            let code = *s as u8;
            match runs.last_mut() {
                Some((c, n)) if *c == code => *n += 1,
                _ => runs.push((code, 1)),
            }
        }
        let spec = map.spec();
        Self {
            dims: spec.dims,
            resolution: spec.resolution,
            origin: spec.origin,
            runs,
        }
    }

    pub fn to_map(&self) -> Option<VoxelMap> {
        let spec = GridSpec {
            origin: self.origin,
            resolution: self.resolution,
            dims: self.dims,
        };
        let mut map = VoxelMap::with_spec(spec);
        let mut i = 0usize;
        for &(code, n) in &self.runs {
            let s = OccState::from_u8(code)?;
            for _ in 0..n {
                if i >= map.len() {
                    return None;
                }
                map.set(VoxelIndex(i), s);
                i += 1;
            }
        }
        (i == map.len()).then_some(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aabb;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn snapshot_round_trip(cells in proptest::collection::vec(0u8..3, 60)) {
            let mut m = VoxelMap::new(&Aabb::new(Vec3::zeros(), Vec3::new(1.0, 0.6, 0.8)), 0.2).unwrap();
            prop_assert_eq!(m.len(), 60);
            for (i, c) in cells.iter().enumerate() {
                m.set(VoxelIndex(i), OccState::from_u8(*c).unwrap());
            }
            let snap = m.snapshot();
            let json = serde_json::to_string(&snap).unwrap();
            let back: MapSnapshot = serde_json::from_str(&json).unwrap();
            let m2 = back.to_map().unwrap();
            prop_assert_eq!(m2.states(), m.states());
            prop_assert_eq!(m2.counts(), m.counts());
        }
    }
}
