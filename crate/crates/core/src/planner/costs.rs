use serde::{Deserialize, Serialize};

use crate::apn::{ApnGraph, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostSource {
    /// Shortest paths between cluster centroid views.
    ClusterCentroids,
    /// Shortest paths between individual views.
    Views,
    /// Supplied directly.
    Explicit,
}

/// Dense symmetric cost matrix (s) over a labelled index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    pub labels: Vec<NodeId>,
    data: Vec<f64>,
    pub source: CostSource,
}

impl CostMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let c = f(i, j);
                data[i * n + j] = c;
                data[j * n + i] = c;
            }
        }
        Self {
            labels: (0..n as u64).map(NodeId).collect(),
            data,
            source: CostSource::Explicit,
        }
    }

    /// Shortest free-edge path costs between the given nodes; unreachable pairs are infinite.
    pub fn shortest_paths(graph: &ApnGraph, nodes: &[NodeId], source: CostSource) -> Self {
        let n = nodes.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            let tree = graph.shortest_tree(nodes[i], true);
            for j in 0..n {
                if i != j {
                    data[i * n + j] = tree.cost(nodes[j]).unwrap_or(f64::INFINITY);
                }
            }
        }
        // equal up to summation order; keep the matrix exactly symmetric
        for i in 0..n {
            for j in i + 1..n {
                let c = data[i * n + j].min(data[j * n + i]);
                data[i * n + j] = c;
                data[j * n + i] = c;
            }
        }
        Self {
            labels: nodes.to_vec(),
            data,
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.labels.len() + j]
    }

    pub fn index_of(&self, label: NodeId) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }

    /// Sum of consecutive pair costs.
    pub fn path_cost(&self, order: &[usize]) -> f64 {
        order.windows(2).map(|w| self.get(w[0], w[1])).sum()
    }
}
