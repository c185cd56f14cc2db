use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GridSpec, OccState, VoxelIndex};
use crate::geometry::Aabb;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoxelChange {
    pub old: OccState,
    pub new: OccState,
}

/// State-changed voxels accumulated between consumers, plus the box enclosing their centers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChangeSet {
    changed: BTreeMap<VoxelIndex, VoxelChange>,
    bounds: Option<Aabb>,
}

impl ChangeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.changed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.changed.is_empty()
    }

    /// Box enclosing every changed voxel center; `None` for an empty set.
    pub fn bounds(&self) -> Option<&Aabb> {
        self.bounds.as_ref()
    }

    pub fn get(&self, idx: VoxelIndex) -> Option<&VoxelChange> {
        self.changed.get(&idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VoxelIndex, &VoxelChange)> {
        self.changed.iter().map(|(k, v)| (*k, v))
    }

    pub fn indices(&self) -> impl Iterator<Item = VoxelIndex> + '_ {
        self.changed.keys().copied()
    }

    /// Records one transition; a voxel already present keeps its original `old` state.
    pub fn record(&mut self, spec: &GridSpec, idx: VoxelIndex, old: OccState, new: OccState) {
        let c = spec.center(idx);
        match &mut self.bounds {
            Some(b) => b.extend(&c),
            None => self.bounds = Some(Aabb::from_point(c)),
        }
        self.changed
            .entry(idx)
            .and_modify(|e| e.new = new)
            .or_insert(VoxelChange { old, new });
    }

    /// Merges `incoming` (which happened later) into `self`.
    pub fn accumulate(mut self, incoming: ChangeSet) -> ChangeSet {
        self.merge(incoming);
        self
    }

    pub fn merge(&mut self, incoming: ChangeSet) {
        for (idx, ch) in incoming.changed {
            self.changed
                .entry(idx)
                .and_modify(|e| e.new = ch.new)
                .or_insert(ch);
        }
        self.bounds = match (self.bounds, incoming.bounds) {
            (Some(a), Some(b)) => Some(a.union(&b)),
            (a, b) => a.or(b),
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn spec() -> GridSpec {
        GridSpec::new(&Aabb::new(Vec3::zeros(), Vec3::new(2.0, 2.0, 2.0)), 0.2).unwrap()
    }

    #[test]
    fn disjoint_union_and_hull() {
        let s = spec();
        let a_idx = s.index([0, 0, 0]).unwrap();
        let b_idx = s.index([5, 3, 2]).unwrap();
        let mut a = ChangeSet::new();
        a.record(&s, a_idx, OccState::Unknown, OccState::Free);
        let mut b = ChangeSet::new();
        b.record(&s, b_idx, OccState::Unknown, OccState::Occupied);
        let bb = *b.bounds().unwrap();
        let ab = *a.bounds().unwrap();
        let u = a.accumulate(b);
        assert_eq!(u.len(), 2);
        assert_eq!(*u.bounds().unwrap(), ab.union(&bb));
    }

    #[test]
    fn composition_keeps_earliest_old() {
        let s = spec();
        let i = s.index([1, 1, 1]).unwrap();
        let mut a = ChangeSet::new();
        a.record(&s, i, OccState::Unknown, OccState::Free);
        let mut b = ChangeSet::new();
        b.record(&s, i, OccState::Free, OccState::Occupied);
        let u = a.accumulate(b);
        assert_eq!(u.len(), 1);
        assert_eq!(
            u.get(i),
            Some(&VoxelChange {
                old: OccState::Unknown,
                new: OccState::Occupied
            })
        );
    }

    #[test]
    fn empty_is_identity() {
        let s = spec();
        let mut a = ChangeSet::new();
        a.record(&s, s.index([2, 2, 2]).unwrap(), OccState::Unknown, OccState::Free);
        let u = a.clone().accumulate(ChangeSet::new());
        assert_eq!(u, a);
        let v = ChangeSet::new().accumulate(a.clone());
        assert_eq!(v, a);
    }
}
