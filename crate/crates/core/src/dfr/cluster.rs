use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::DfrConfig;
use crate::apn::{ApnGraph, Cluster, ClusterId, NodeId};

/// Density clustering over the free-edge graph. A node is a core when at least `rho_c` of its
/// free-edge neighbours lie within `d_c`; clusters grow from cores in uid order, border nodes keep
/// the first (lowest) cluster that reaches them and the rest become singletons.
pub fn density_clusters(graph: &ApnGraph, rho_c: usize, d_c: f64) -> Vec<BTreeSet<NodeId>> {
    let close: BTreeMap<NodeId, Vec<NodeId>> = graph
        .node_ids()
        .map(|n| {
            let p = graph.node(n).unwrap().position();
            let ns = graph
                .neighbors(n, true)
                .filter(|m| (graph.node(*m).unwrap().position() - p).norm() <= d_c)
                .collect();
            (n, ns)
        })
        .collect();
    let core = |n: &NodeId| close[n].len() >= rho_c;
    let mut label: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut clusters: Vec<BTreeSet<NodeId>> = Vec::new();
    for n in graph.node_ids() {
        if label.contains_key(&n) || !core(&n) {
            continue;
        }
        let id = clusters.len();
        let mut members = BTreeSet::from([n]);
        label.insert(n, id);
        let mut queue = VecDeque::from([n]);
        while let Some(p) = queue.pop_front() {
            for q in &close[&p] {
                if label.contains_key(q) {
                    continue;
                }
                label.insert(*q, id);
                members.insert(*q);
                if core(q) {
                    queue.push_back(*q);
                }
            }
        }
        clusters.push(members);
    }
    for n in graph.node_ids() {
        if let std::collections::btree_map::Entry::Vacant(e) = label.entry(n) {
            e.insert(clusters.len());
            clusters.push(BTreeSet::from([n]));
        }
    }
    clusters
}

/// Recomputes the cluster hyperedges of `graph`.
pub fn recluster(graph: &mut ApnGraph, cfg: &DfrConfig) -> usize {
    let groups = density_clusters(graph, cfg.rho_c, cfg.d_c);
    let clusters: Vec<Cluster> = groups
        .into_iter()
        .enumerate()
        .map(|(i, m)| Cluster::from_members(ClusterId(i as u32), m, graph))
        .collect();
    let n = clusters.len();
    graph.set_clusters(clusters);
    n
}
