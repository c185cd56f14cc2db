use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::{ApnGraph, NodeId};

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, then uid
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest-path tree over traversal cost.
#[derive(Clone, Debug)]
pub struct PathTree {
    pub source: NodeId,
    dist: HashMap<NodeId, f64>,
    pred: HashMap<NodeId, NodeId>,
}

impl PathTree {
    pub fn cost(&self, n: NodeId) -> Option<f64> {
        self.dist.get(&n).copied()
    }

    pub fn reachable(&self, n: NodeId) -> bool {
        self.dist.contains_key(&n)
    }

    pub fn reached(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.dist.iter().map(|(n, d)| (*n, *d))
    }

    pub fn path_to(&self, n: NodeId) -> Option<Vec<NodeId>> {
        if !self.dist.contains_key(&n) {
            return None;
        }
        let mut out = vec![n];
        let mut cur = n;
        while let Some(p) = self.pred.get(&cur) {
            out.push(*p);
            cur = *p;
        }
        out.reverse();
        Some(out)
    }
}

impl ApnGraph {
    /// Dijkstra from `source`, stopping early once `target` is settled. Among equal-cost paths the
    /// lexicographically smaller uid sequence wins.
    fn dijkstra(&self, source: NodeId, target: Option<NodeId>, traversable_only: bool) -> PathTree {
        let mut tree = PathTree {
            source,
            dist: HashMap::new(),
            pred: HashMap::new(),
        };
        if !self.contains(source) {
            return tree;
        }
        let mut settled: HashMap<NodeId, ()> = HashMap::new();
        let mut heap = BinaryHeap::new();
        tree.dist.insert(source, 0.0);
        heap.push(Entry { cost: 0.0, node: source });
        while let Some(Entry { cost, node }) = heap.pop() {
            if settled.contains_key(&node) || cost > tree.dist[&node] {
                continue;
            }
            settled.insert(node, ());
            if Some(node) == target {
                break;
            }
            for next in self.neighbors(node, traversable_only) {
                if settled.contains_key(&next) {
                    continue;
                }
                let e = self.edge(node, next).expect("adjacent");
                let nd = cost + e.cost;
                let better = match tree.dist.get(&next) {
                    None => true,
                    Some(&d) if nd < d => true,
                    Some(&d) if nd == d => {
                        let mut via = tree.path_to(node).unwrap();
                        via.push(next);
                        via < tree.path_to(next).unwrap()
                    }
                    _ => false,
                };
                if better {
                    tree.dist.insert(next, nd);
                    tree.pred.insert(next, node);
                    heap.push(Entry { cost: nd, node: next });
                }
            }
        }
        if let Some(t) = target {
            if !settled.contains_key(&t) {
                tree.dist.remove(&t);
            }
        }
        tree
    }

    pub fn shortest_tree(&self, source: NodeId, traversable_only: bool) -> PathTree {
        self.dijkstra(source, None, traversable_only)
    }

    /// Minimum-cost path from `u` to `w`, or `None` when unreachable.
    pub fn shortest_path(&self, u: NodeId, w: NodeId, traversable_only: bool) -> Option<(Vec<NodeId>, f64)> {
        let tree = self.dijkstra(u, Some(w), traversable_only);
        Some((tree.path_to(w)?, tree.cost(w)?))
    }
}
