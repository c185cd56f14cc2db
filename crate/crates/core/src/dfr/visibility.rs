use std::collections::{BTreeMap, BTreeSet};

use crate::apn::NodeId;
use crate::frontier::FrontierSet;
use crate::map::{VoxelIndex, VoxelMap};
use crate::sensing::ViewPose;

/// Bidirectional view/frontier visibility: Γ maps a view to the frontiers it sees, Υ the reverse.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VisibilityIndex {
    gamma: BTreeMap<NodeId, BTreeSet<VoxelIndex>>,
    upsilon: BTreeMap<VoxelIndex, BTreeSet<NodeId>>,
}

impl VisibilityIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn gamma(&self, v: NodeId) -> Option<&BTreeSet<VoxelIndex>> {
        self.gamma.get(&v)
    }

    pub fn upsilon(&self, f: VoxelIndex) -> Option<&BTreeSet<NodeId>> {
        self.upsilon.get(&f)
    }

    pub fn views(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.gamma.keys().copied()
    }

    /// Replaces Γ(v) and keeps Υ consistent.
    pub fn set_view(&mut self, v: NodeId, frontiers: BTreeSet<VoxelIndex>) {
        self.remove_view(v);
        for f in &frontiers {
            self.upsilon.entry(*f).or_default().insert(v);
        }
        if !frontiers.is_empty() {
            self.gamma.insert(v, frontiers);
        }
    }

    pub fn remove_view(&mut self, v: NodeId) -> BTreeSet<VoxelIndex> {
        let fs = self.gamma.remove(&v).unwrap_or_default();
        for f in &fs {
            if let Some(set) = self.upsilon.get_mut(f) {
                set.remove(&v);
                if set.is_empty() {
                    self.upsilon.remove(f);
                }
            }
        }
        fs
    }

    /// Drops a frontier everywhere and returns the views that saw it.
    pub fn remove_frontier(&mut self, f: VoxelIndex) -> BTreeSet<NodeId> {
        let vs = self.upsilon.remove(&f).unwrap_or_default();
        for v in &vs {
            if let Some(set) = self.gamma.get_mut(v) {
                set.remove(&f);
                if set.is_empty() {
                    self.gamma.remove(v);
                }
            }
        }
        vs
    }

    /// K(v) = |Γ(v)|.
    pub fn gain_individual(&self, v: NodeId) -> usize {
        self.gamma.get(&v).map_or(0, |s| s.len())
    }

    /// J(S) = |∪ Γ(v)|.
    pub fn gain_joint(&self, views: impl IntoIterator<Item = NodeId>) -> usize {
        let mut all = BTreeSet::new();
        for v in views {
            if let Some(s) = self.gamma.get(&v) {
                all.extend(s.iter().copied());
            }
        }
        all.len()
    }

    /// I(v): frontiers of Γ(v) seen by no other view.
    pub fn gain_exclusive(&self, v: NodeId) -> usize {
        self.gamma.get(&v).map_or(0, |s| {
            s.iter()
                .filter(|f| self.upsilon.get(f).is_some_and(|u| u.len() == 1))
                .count()
        })
    }

    pub fn is_covered(&self, f: VoxelIndex) -> bool {
        self.upsilon.contains_key(&f)
    }

    /// Number of frontiers seen by at least one view; equals the joint gain of all views.
    pub fn covered_count(&self) -> usize {
        self.upsilon.len()
    }

    pub fn check_consistency(&self) -> Result<(), String> {
        for (v, fs) in &self.gamma {
            if fs.is_empty() {
                return Err(format!("empty Γ entry for {v}"));
            }
            for f in fs {
                if !self.upsilon.get(f).is_some_and(|u| u.contains(v)) {
                    return Err(format!("{f:?} ∈ Γ({v}) but {v} ∉ Υ({f:?})"));
                }
            }
        }
        for (f, vs) in &self.upsilon {
            if vs.is_empty() {
                return Err(format!("empty Υ entry for {f:?}"));
            }
            for v in vs {
                if !self.gamma.get(v).is_some_and(|g| g.contains(f)) {
                    return Err(format!("{v} ∈ Υ({f:?}) but {f:?} ∉ Γ({v})"));
                }
            }
        }
        Ok(())
    }
}

/// Frontiers visible from `view`, found through the frontier spatial index.
pub fn visible_frontiers(map: &VoxelMap, frontiers: &FrontierSet, view: &ViewPose<'_>) -> BTreeSet<VoxelIndex> {
    frontiers
        .within(&view.pose.position, view.sensor.max_range)
        .into_iter()
        .filter(|f| view.is_visible(map, *f))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(i: usize) -> VoxelIndex {
        VoxelIndex(i)
    }

    fn index() -> VisibilityIndex {
        let mut vi = VisibilityIndex::new();
        vi.set_view(NodeId(1), [idx(1), idx(2)].into());
        vi.set_view(NodeId(2), [idx(2), idx(3)].into());
        vi
    }

    #[test]
    fn gains() {
        let vi = index();
        assert_eq!(vi.gain_individual(NodeId(1)), 2);
        assert_eq!(vi.gain_individual(NodeId(9)), 0);
        assert_eq!(vi.gain_joint([NodeId(1), NodeId(2)]), 3);
        assert_eq!(vi.gain_joint([]), 0);
        assert_eq!(vi.gain_exclusive(NodeId(1)), 1);
        assert!(vi.check_consistency().is_ok());
    }

    #[test]
    fn disjoint_views_add_up() {
        let mut vi = VisibilityIndex::new();
        vi.set_view(NodeId(1), [idx(1), idx(2)].into());
        vi.set_view(NodeId(2), [idx(3)].into());
        assert_eq!(vi.gain_joint([NodeId(1), NodeId(2)]), 3);
        assert_eq!(vi.gain_exclusive(NodeId(1)), vi.gain_individual(NodeId(1)));
    }

    #[test]
    fn frontier_removal() {
        let mut vi = index();
        let seen_by = vi.remove_frontier(idx(1));
        assert_eq!(seen_by, [NodeId(1)].into());
        assert_eq!(vi.gain_individual(NodeId(1)), 1);
        // f2 is shared, so v1 has no exclusive gain left
        assert_eq!(vi.gain_exclusive(NodeId(1)), 0);
        vi.remove_view(NodeId(2));
        assert_eq!(vi.gain_exclusive(NodeId(1)), 1);
        assert!(vi.check_consistency().is_ok());
    }
}
