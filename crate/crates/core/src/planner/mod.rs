//! Hierarchical tour planning: a cluster-level tour from the agent to home, then a view-level tour
//! inside the first cluster that still holds next-best views.

mod costs;
mod ga;

pub use costs::{CostMatrix, CostSource};
pub use ga::{nearest_neighbor_tour, pmx, polish_tour, solve_feotsp, warm_start_sequence, GaConfig, Tour};

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::apn::{ApnGraph, ClusterId, NodeId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// A new goal replaces the previous one only when its plan costs less than this fraction.
    pub hysteresis: f64,
    pub ga: GaConfig,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            hysteresis: 0.85,
            ga: GaConfig::default(),
        }
    }
}

/// Orders kept from the previous cycle for warm starts. Clusters are remembered by their
/// centroid views since cluster ids are reassigned every cycle.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanCache {
    pub cluster_views: Vec<NodeId>,
    pub views: Vec<NodeId>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExplorationPlan {
    pub cluster_seq: Vec<ClusterId>,
    /// Agent first, then the NBVs of the target cluster.
    pub view_seq: Vec<NodeId>,
    pub cluster_cost: f64,
    pub view_cost: f64,
    pub cluster_generations: usize,
    pub view_generations: usize,
    pub target_cluster: Option<ClusterId>,
    /// View-level cost matrix, labels in `view_seq` order of the solve.
    #[serde(skip)]
    pub view_costs: Option<CostMatrix>,
}

impl ExplorationPlan {
    pub fn is_empty(&self) -> bool {
        self.view_seq.len() < 2
    }

    pub fn first_view(&self) -> Option<NodeId> {
        self.view_seq.get(1).copied()
    }
}

/// Member of a cluster closest to its centroid among `allowed`; ties to the smaller uid.
fn centroid_view(graph: &ApnGraph, id: ClusterId, allowed: impl Fn(NodeId) -> bool) -> Option<NodeId> {
    let c = graph.cluster(id)?;
    c.members
        .iter()
        .copied()
        .filter(|m| allowed(*m))
        .map(|m| (m, (graph.node(m).unwrap().position() - c.centroid).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(m, _)| m)
}

fn map_warm(prev: &[NodeId], labels: &[NodeId]) -> Vec<usize> {
    prev.iter().filter_map(|p| labels.iter().position(|l| l == p)).collect()
}

/// Two-stage plan from the agent's current node. Returns an empty plan when no NBV is reachable.
pub fn plan_cycle(graph: &ApnGraph, cache: &PlanCache, cfg: &PlannerConfig, rng: &mut impl Rng) -> (ExplorationPlan, PlanCache) {
    let agent = graph.agent();
    let reach = graph.shortest_tree(agent, true);
    let nbvs: Vec<NodeId> = graph.nbvs().filter(|v| reach.reachable(*v)).collect();
    let mut by_cluster: BTreeMap<ClusterId, Vec<NodeId>> = BTreeMap::new();
    for v in &nbvs {
        if let Some(c) = graph.cluster_of(*v) {
            by_cluster.entry(c).or_default().push(*v);
        }
    }
    let (Some(agent_cluster), false) = (graph.cluster_of(agent), by_cluster.is_empty()) else {
        return (ExplorationPlan::default(), PlanCache::default());
    };

    // stage 1: clusters
    let mut included: BTreeSet<ClusterId> = by_cluster.keys().copied().collect();
    included.insert(agent_cluster);
    let home_cluster = graph.cluster_of(graph.home()).filter(|_| reach.reachable(graph.home()));
    included.extend(home_cluster);
    let mut ids = Vec::new();
    let mut reps = Vec::new();
    for c in &included {
        let rep = if *c == agent_cluster {
            Some(agent)
        } else {
            centroid_view(graph, *c, |m| reach.reachable(m))
        };
        match rep {
            Some(r) => {
                ids.push(*c);
                reps.push(r);
            }
            None => log::warn!("cluster {:?} has no reachable member; left out of the tour", c),
        }
    }
    let cm = CostMatrix::shortest_paths(graph, &reps, CostSource::ClusterCentroids);
    let start = ids.iter().position(|c| *c == agent_cluster).unwrap();
    let end = home_cluster
        .filter(|h| *h != agent_cluster)
        .and_then(|h| ids.iter().position(|c| *c == h));
    let all: Vec<usize> = (0..ids.len()).collect();
    let warm = warm_start_sequence(&map_warm(&cache.cluster_views, &reps), &all, &cm, Some(start), end);
    let mut warm_full = vec![start];
    warm_full.extend(&warm);
    warm_full.extend(end);
    let ct = solve_feotsp(&cm, start, end, Some(&warm_full), &cfg.ga, rng);
    let cluster_seq: Vec<ClusterId> = ct.order.iter().map(|i| ids[*i]).collect();
    let Some(target) = cluster_seq.iter().copied().find(|c| by_cluster.contains_key(c)) else {
        return (ExplorationPlan::default(), PlanCache::default());
    };

    // stage 2: views of the target cluster
    let mut labels = vec![agent];
    labels.extend(&by_cluster[&target]);
    let vm = CostMatrix::shortest_paths(graph, &labels, CostSource::Views);
    let vall: Vec<usize> = (0..labels.len()).collect();
    let vwarm = warm_start_sequence(&map_warm(&cache.views, &labels), &vall, &vm, Some(0), None);
    let mut vwarm_full = vec![0];
    vwarm_full.extend(&vwarm);
    let vt = solve_feotsp(&vm, 0, None, Some(&vwarm_full), &cfg.ga, rng);
    let view_seq: Vec<NodeId> = vt.order.iter().map(|i| labels[*i]).collect();

    let new_cache = PlanCache {
        cluster_views: ct.order.iter().map(|i| reps[*i]).collect(),
        views: view_seq.clone(),
    };
    let plan = ExplorationPlan {
        cluster_seq,
        view_seq,
        cluster_cost: ct.cost,
        view_cost: vt.cost,
        cluster_generations: ct.generations,
        view_generations: vt.generations,
        target_cluster: Some(target),
        view_costs: Some(vm),
    };
    (plan, new_cache)
}

/// Cost of visiting `seq` in order from the agent, computing missing pair costs on the graph.
fn sequence_cost(graph: &ApnGraph, plan: &ExplorationPlan, seq: &[NodeId]) -> f64 {
    let m = plan.view_costs.as_ref();
    seq.windows(2)
        .map(|w| {
            match m.and_then(|m| Some(m.get(m.index_of(w[0])?, m.index_of(w[1])?))) {
                Some(c) => c,
                None => graph.shortest_path(w[0], w[1], true).map_or(f64::INFINITY, |p| p.1),
            }
        })
        .sum()
}

/// Picks the navigation goal, keeping the previous goal unless the new plan is clearly cheaper.
pub fn select_goal(plan: &ExplorationPlan, prev_goal: Option<NodeId>, graph: &ApnGraph, hysteresis: f64) -> Option<NodeId> {
    let candidate = plan.first_view()?;
    let Some(prev) = prev_goal.filter(|p| *p != candidate) else {
        return Some(candidate);
    };
    let valid = graph.node(prev).is_some_and(|n| n.is_nbv())
        && graph.shortest_path(graph.agent(), prev, true).is_some();
    if !valid {
        return Some(candidate);
    }
    let via_candidate = sequence_cost(graph, plan, &plan.view_seq);
    let rest: Vec<NodeId> = plan.view_seq[1..].iter().copied().filter(|v| *v != prev).collect();
    let mut via_prev = vec![plan.view_seq[0], prev];
    via_prev.extend(&rest);
    let mut via_prev = sequence_cost(graph, plan, &via_prev);
    // best tour that starts with the previous goal, so a plan that merely reverses the
    // previous one does not win against it
    let idx = |v: NodeId| plan.view_costs.as_ref().and_then(|m| m.index_of(v));
    if let (Some(m), Some(a), Some(p)) = (plan.view_costs.as_ref(), idx(plan.view_seq[0]), idx(prev)) {
        if let Some(mid) = rest.iter().map(|v| idx(*v)).collect::<Option<Vec<usize>>>() {
            via_prev = via_prev.min(m.get(a, p) + polish_tour(m, p, None, mid).cost);
        }
    }
    if via_candidate < hysteresis * via_prev {
        Some(candidate)
    } else {
        Some(prev)
    }
}

/// Hysteresis rule on plain costs.
pub fn keep_previous(candidate_cost: f64, previous_cost: f64, hysteresis: f64) -> bool {
    candidate_cost >= hysteresis * previous_cost
}
