//! Frontier detection: unknown voxels bordering known free space, updated from change sets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Vec3};
use crate::map::{ChangeSet, GridSpec, OccState, VoxelIndex, VoxelMap};

/// Side length of a spatial bucket, in voxels.
const BUCKET: i64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontierKind {
    /// Also borders an occupied voxel.
    Surface,
    Void,
}

/// Frontier label of one voxel under the current map, `None` when it is not a frontier.
/// Voxels on the outer grid layer are never frontiers.
pub fn classify(map: &VoxelMap, idx: VoxelIndex) -> Option<FrontierKind> {
    if map.state(idx) != OccState::Unknown || map.spec().is_boundary(idx) {
        return None;
    }
    let mut free = false;
    let mut occ = false;
    for n in map.spec().neighbors6(idx) {
        match map.state(n) {
            OccState::Free => free = true,
            OccState::Occupied => occ = true,
            OccState::Unknown => {}
        }
    }
    match (free, occ) {
        (false, _) => None,
        (true, true) => Some(FrontierKind::Surface),
        (true, false) => Some(FrontierKind::Void),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrontierDelta {
    pub added: Vec<(VoxelIndex, FrontierKind)>,
    pub removed: Vec<VoxelIndex>,
    pub relabeled: Vec<(VoxelIndex, FrontierKind)>,
}

impl FrontierDelta {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.relabeled.is_empty()
    }

    /// Net effect of `self` followed by `later`, given the labels in force before `self`.
    pub fn merge(&mut self, later: FrontierDelta, before: impl Fn(VoxelIndex) -> Option<FrontierKind>) {
        let mut fin: BTreeMap<VoxelIndex, Option<FrontierKind>> = BTreeMap::new();
        for (i, k) in self.added.drain(..).chain(self.relabeled.drain(..)) {
            fin.insert(i, Some(k));
        }
        for i in self.removed.drain(..) {
            fin.insert(i, None);
        }
        for (i, k) in later.added.into_iter().chain(later.relabeled) {
            fin.insert(i, Some(k));
        }
        for i in later.removed {
            fin.insert(i, None);
        }
        for (i, now) in fin {
            match (before(i), now) {
                (None, Some(k)) => self.added.push((i, k)),
                (Some(_), None) => self.removed.push(i),
                (Some(a), Some(b)) if a != b => self.relabeled.push((i, b)),
                _ => {}
            }
        }
    }
}

/// Current frontier voxels with their labels and a coarse spatial index.
#[derive(Clone, Debug)]
pub struct FrontierSet {
    spec: GridSpec,
    labels: BTreeMap<VoxelIndex, FrontierKind>,
    buckets: HashMap<[i64; 3], BTreeSet<VoxelIndex>>,
}

impl FrontierSet {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            spec,
            labels: BTreeMap::new(),
            buckets: HashMap::new(),
        }
    }

    /// Batch computation over the whole map.
    pub fn compute_all(map: &VoxelMap) -> Self {
        let mut set = Self::new(*map.spec());
        for i in 0..map.len() {
            let idx = VoxelIndex(i);
            if let Some(k) = classify(map, idx) {
                set.insert(idx, k);
            }
        }
        set
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, idx: VoxelIndex) -> Option<FrontierKind> {
        self.labels.get(&idx).copied()
    }

    pub fn contains(&self, idx: VoxelIndex) -> bool {
        self.labels.contains_key(&idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VoxelIndex, FrontierKind)> + '_ {
        self.labels.iter().map(|(i, k)| (*i, *k))
    }

    pub fn labels(&self) -> &BTreeMap<VoxelIndex, FrontierKind> {
        &self.labels
    }

    pub fn count(&self, kind: FrontierKind) -> usize {
        self.labels.values().filter(|k| **k == kind).count()
    }

    fn bucket_of(&self, idx: VoxelIndex) -> [i64; 3] {
        let c = self.spec.coord(idx);
        [
            c[0] as i64 / BUCKET,
            c[1] as i64 / BUCKET,
            c[2] as i64 / BUCKET,
        ]
    }

    fn insert(&mut self, idx: VoxelIndex, kind: FrontierKind) {
        if self.labels.insert(idx, kind).is_none() {
            let b = self.bucket_of(idx);
            self.buckets.entry(b).or_default().insert(idx);
        }
    }

    fn remove(&mut self, idx: VoxelIndex) {
        if self.labels.remove(&idx).is_some() {
            let b = self.bucket_of(idx);
            if let Some(set) = self.buckets.get_mut(&b) {
                set.remove(&idx);
                if set.is_empty() {
                    self.buckets.remove(&b);
                }
            }
        }
    }

    /// Re-examines only the changed voxels and their face neighbours.
    pub fn update(&mut self, map: &VoxelMap, changes: &ChangeSet) -> FrontierDelta {
        let mut delta = FrontierDelta::default();
        let mut examine = BTreeSet::new();
        for idx in changes.indices() {
            examine.insert(idx);
            examine.extend(map.spec().neighbors6(idx));
        }
        for idx in examine {
            let now = classify(map, idx);
            match (self.get(idx), now) {
                (None, Some(k)) => {
                    self.insert(idx, k);
                    delta.added.push((idx, k));
                }
                (Some(_), None) => {
                    self.remove(idx);
                    delta.removed.push(idx);
                }
                (Some(a), Some(b)) if a != b => {
                    self.labels.insert(idx, b);
                    delta.relabeled.push((idx, b));
                }
                _ => {}
            }
        }
        delta
    }

    /// Applies a delta computed elsewhere, keeping a mirror in sync.
    pub fn apply(&mut self, delta: &FrontierDelta) {
        for i in &delta.removed {
            self.remove(*i);
        }
        for (i, k) in delta.added.iter().chain(&delta.relabeled) {
            if self.labels.contains_key(i) {
                self.labels.insert(*i, *k);
            } else {
                self.insert(*i, *k);
            }
        }
    }

    /// Frontiers whose voxel center lies inside `b`, ascending.
    pub fn in_box(&self, b: &Aabb) -> Vec<VoxelIndex> {
        let Some((lo, hi)) = self.spec.cell_range(b) else { return Vec::new() };
        let mut out = Vec::new();
        for bz in lo[2] as i64 / BUCKET..=hi[2] as i64 / BUCKET {
            for by in lo[1] as i64 / BUCKET..=hi[1] as i64 / BUCKET {
                for bx in lo[0] as i64 / BUCKET..=hi[0] as i64 / BUCKET {
                    if let Some(set) = self.buckets.get(&[bx, by, bz]) {
                        out.extend(set.iter().copied().filter(|i| b.contains(&self.spec.center(*i))));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Frontiers whose voxel center is within `radius` of `p`, ascending.
    pub fn within(&self, p: &Vec3, radius: f64) -> Vec<VoxelIndex> {
        let mut v = self.in_box(&Aabb::from_center(*p, radius));
        v.retain(|i| (self.spec.center(*i) - p).norm() <= radius);
        v
    }
}

impl PartialEq for FrontierSet {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map() -> VoxelMap {
        VoxelMap::new(&Aabb::new(Vec3::zeros(), Vec3::new(2.0, 2.0, 2.0)), 0.2).unwrap()
    }

    /// Oracle: enumerates the frontier definition over every voxel.
    fn brute(m: &VoxelMap) -> BTreeMap<VoxelIndex, FrontierKind> {
        let spec = m.spec();
        let mut out = BTreeMap::new();
        for i in 0..m.len() {
            let idx = VoxelIndex(i);
            let c = spec.coord(idx);
            let interior = (0..3).all(|a| c[a] > 0 && c[a] + 1 < spec.dims[a]);
            if m.state(idx) != OccState::Unknown || !interior {
                continue;
            }
            let mut free = false;
            let mut occ = false;
            for a in 0..3 {
                for s in [-1i64, 1] {
                    let mut n = [c[0] as i64, c[1] as i64, c[2] as i64];
                    n[a] += s;
                    match m.state(spec.index_i(n).unwrap()) {
                        OccState::Free => free = true,
                        OccState::Occupied => occ = true,
                        _ => {}
                    }
                }
            }
            if free {
                out.insert(idx, if occ { FrontierKind::Surface } else { FrontierKind::Void });
            }
        }
        out
    }

    fn set_and_update(m: &mut VoxelMap, fs: &mut FrontierSet, idx: VoxelIndex, s: OccState) -> FrontierDelta {
        let mut ch = ChangeSet::new();
        m.set_logged(idx, s, &mut ch);
        fs.update(m, &ch)
    }

    #[test]
    fn single_free_voxel_spawns_void_frontiers() {
        let mut m = map();
        let mut fs = FrontierSet::new(*m.spec());
        let idx = m.spec().index([4, 4, 4]).unwrap();
        let d = set_and_update(&mut m, &mut fs, idx, OccState::Free);
        assert_eq!(d.added.len(), 6);
        assert!(d.added.iter().all(|(_, k)| *k == FrontierKind::Void));
        assert_eq!(*fs.labels(), brute(&m));
    }

    #[test]
    fn observed_frontier_is_removed() {
        let mut m = map();
        let mut fs = FrontierSet::new(*m.spec());
        let a = m.spec().index([4, 4, 4]).unwrap();
        set_and_update(&mut m, &mut fs, a, OccState::Free);
        let f = m.spec().index([5, 4, 4]).unwrap();
        assert!(fs.contains(f));
        let d = set_and_update(&mut m, &mut fs, f, OccState::Free);
        assert!(d.removed.contains(&f));
        assert!(d.added.iter().any(|(i, _)| *i == m.spec().index([6, 4, 4]).unwrap()));
        assert_eq!(*fs.labels(), brute(&m));
    }

    #[test]
    fn empty_changes_empty_delta() {
        let m = map();
        let mut fs = FrontierSet::new(*m.spec());
        assert!(fs.update(&m, &ChangeSet::new()).is_empty());
    }

    #[test]
    fn boundary_voxels_are_suppressed() {
        let mut m = map();
        let mut fs = FrontierSet::new(*m.spec());
        let idx = m.spec().index([1, 4, 4]).unwrap();
        set_and_update(&mut m, &mut fs, idx, OccState::Free);
        assert!(!fs.contains(m.spec().index([0, 4, 4]).unwrap()));
        assert_eq!(fs.len(), 5);
    }

    #[test]
    fn spatial_queries_match_scan() {
        let mut m = map();
        for i in (0..m.len()).step_by(3) {
            m.set(VoxelIndex(i), OccState::Free);
        }
        let fs = FrontierSet::compute_all(&m);
        let p = Vec3::new(0.7, 1.1, 0.9);
        let expected: Vec<_> = fs
            .iter()
            .map(|(i, _)| i)
            .filter(|i| (m.spec().center(*i) - p).norm() <= 0.65)
            .collect();
        assert_eq!(fs.within(&p, 0.65), expected);
    }

    proptest! {
        #[test]
        fn incremental_equals_batch(ops in proptest::collection::vec((0usize..1000, 0u8..3), 1..120)) {
            let mut m = map();
            let mut fs = FrontierSet::new(*m.spec());
            for (i, s) in ops {
                let idx = VoxelIndex(i % m.len());
                let d = set_and_update(&mut m, &mut fs, idx, OccState::from_u8(s).unwrap());
                // locality: every delta entry is the changed voxel or one of its neighbours
                for j in d.removed.iter().chain(d.added.iter().map(|(j, _)| j)) {
                    prop_assert!(*j == idx || m.spec().neighbors6(idx).any(|n| n == *j));
                }
            }
            prop_assert_eq!(fs.labels().clone(), brute(&m));
            prop_assert_eq!(&fs, &FrontierSet::compute_all(&m));
        }

        #[test]
        fn merged_deltas_replay(ops in proptest::collection::vec((0usize..1000, 0u8..3), 1..60)) {
            let mut m = map();
            let mut fs = FrontierSet::new(*m.spec());
            let mut mirror = fs.clone();
            let mut acc = FrontierDelta::default();
            for (i, s) in ops {
                let idx = VoxelIndex(i % m.len());
                let d = set_and_update(&mut m, &mut fs, idx, OccState::from_u8(s).unwrap());
                acc.merge(d, |j| mirror.get(j));
            }
            mirror.apply(&acc);
            prop_assert_eq!(&mirror, &fs);
        }
    }
}
