use std::collections::{BTreeSet, VecDeque};

use super::Dfr;
use crate::apn::{ApnGraph, NodeId};
use crate::map::ChangeSet;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PruneReport {
    pub removed: Vec<NodeId>,
    /// Redundant views kept as waypoints because they hold the free-edge graph together.
    pub demoted: Vec<NodeId>,
    pub joint_before: usize,
    pub joint_after: usize,
    /// Smallest exclusive gain among surviving NBVs, `None` when there are none.
    pub min_nbv_exclusive: Option<usize>,
}

/// Whether removing `v` splits its free-edge neighbours into more than one component.
pub fn is_cut_vertex(graph: &ApnGraph, v: NodeId) -> bool {
    let nbrs: Vec<NodeId> = graph.neighbors(v, true).collect();
    if nbrs.len() < 2 {
        return false;
    }
    let targets: BTreeSet<NodeId> = nbrs.iter().copied().collect();
    let mut seen = BTreeSet::from([v, nbrs[0]]);
    let mut found = 1;
    let mut queue = VecDeque::from([nbrs[0]]);
    while let Some(n) = queue.pop_front() {
        for m in graph.neighbors(n, true) {
            if seen.insert(m) {
                if targets.contains(&m) {
                    found += 1;
                    if found == targets.len() {
                        return false;
                    }
                }
                queue.push_back(m);
            }
        }
    }
    true
}

impl Dfr {
    /// Removes open views whose individual or exclusive gain is negligible, largest uid first.
    pub fn prune_views(&mut self, changes: &ChangeSet) -> PruneReport {
        let mut report = PruneReport {
            joint_before: self.vis.covered_count(),
            ..PruneReport::default()
        };
        let mut candidates: BTreeSet<NodeId> = self
            .graph
            .open_views()
            .filter(|v| self.near_changes(changes, &self.graph.node(*v).unwrap().position()))
            .collect();
        // new views can take exclusivity away from distant views sharing their frontiers
        for d in &self.dirty {
            candidates.insert(*d);
            if let Some(fs) = self.vis.gamma(*d) {
                for f in fs {
                    candidates.extend(self.vis.upsilon(*f).into_iter().flatten().copied());
                }
            }
        }
        let thr = self.cfg.prune_threshold;
        for v in candidates.into_iter().rev() {
            let Some(node) = self.graph.node(v) else { continue };
            if !node.open {
                continue;
            }
            let k = self.vis.gain_individual(v);
            let i = self.vis.gain_exclusive(v);
            if k > thr && i > thr {
                continue;
            }
            self.vis.remove_view(v);
            if is_cut_vertex(&self.graph, v) {
                self.graph.demote(v).expect("node exists");
                report.demoted.push(v);
            } else {
                self.graph.remove_node(v).expect("views are removable");
                report.removed.push(v);
            }
        }
        report.joint_after = self.vis.covered_count();
        report.min_nbv_exclusive = self
            .graph
            .nbvs()
            .collect::<Vec<_>>()
            .into_iter()
            .map(|v| self.vis.gain_exclusive(v))
            .min();
        report
    }
}
