//! Per-cycle roadmap update driven by map changes: visibility reconditioning, frontier-guided
//! view sampling, pruning, reachability expansion and clustering.

mod cluster;
mod prune;
mod reach;
mod sampling;
mod visibility;

pub use cluster::{density_clusters, recluster};
pub use prune::{is_cut_vertex, PruneReport};
pub use reach::{edge_recheck, invalidate_edges, observe_edge};
pub use sampling::sample_shell;
pub use visibility::{visible_frontiers, VisibilityIndex};

use std::collections::BTreeSet;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::apn::{ApnGraph, MotionLimits, NodeId, NodeOrigin};
use crate::error::{Error, Result};
use crate::frontier::{FrontierDelta, FrontierSet};
use crate::geometry::{Aabb, Pose, Vec3};
use crate::map::{ChangeSet, VoxelMap};
use crate::sensing::SensorModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DfrConfig {
    /// Admission probability for non-covered frontiers inside the change volume.
    pub p_local: f64,
    /// Admission probability for non-covered frontiers elsewhere.
    pub p_global: f64,
    /// Sampling attempts per frontier target.
    pub n_attempt: usize,
    /// Accepted traversal samples per cycle.
    pub n_traversal_samples: usize,
    /// Traversal sampling attempts per cycle.
    pub n_traversal_attempts: usize,
    /// Minimum separation of a traversal sample from existing nodes (m).
    pub d_sep: f64,
    /// Admission probability of a candidate edge for (re)evaluation.
    pub p_edge_update: f64,
    /// Maximum edge length (m).
    pub d_edge_max: f64,
    /// Edge-neighbour count that makes a node a density core.
    pub rho_c: usize,
    /// Clustering distance (m).
    pub d_c: f64,
    /// Trail length between keyframes (m).
    pub keyframe_dist: f64,
    /// Views with individual or exclusive gain at or below this are pruning candidates.
    pub prune_threshold: usize,
    /// Closest candidate partners considered per node when proposing edges.
    pub max_edge_neighbors: usize,
    /// Closest nodes the agent tries to link to each cycle.
    pub agent_links: usize,
    /// Waypoint trials per cycle for joining disconnected views to the agent component.
    pub n_bridge_attempts: usize,
    /// Closest reachable nodes tried as the far end of a bridge.
    pub bridge_partners: usize,
    /// Half-extent of the box around a disconnected view where bridge waypoints are drawn (m).
    pub bridge_radius: f64,
    /// Lattice expansions allowed for the clearance search run when no view is reachable.
    pub bridge_search_expansions: usize,
}

impl Default for DfrConfig {
    fn default() -> Self {
        Self {
            p_local: 0.8,
            p_global: 0.1,
            n_attempt: 30,
            n_traversal_samples: 3,
            n_traversal_attempts: 50,
            d_sep: 2.0,
            p_edge_update: 0.7,
            d_edge_max: 10.5,
            rho_c: 4,
            d_c: 7.0,
            keyframe_dist: 2.0,
            prune_threshold: 0,
            max_edge_neighbors: 12,
            agent_links: 8,
            n_bridge_attempts: 60,
            bridge_partners: 6,
            bridge_radius: 4.0,
            bridge_search_expansions: 20_000,
        }
    }
}

impl DfrConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        let unit = |p: f64| p > 0.0 && p <= 1.0;
        if !unit(self.p_local) || !unit(self.p_global) {
            return bad("p_local and p_global must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.p_edge_update) {
            return bad("p_edge_update must lie in [0, 1)");
        }
        if !(self.d_sep > 0.0 && self.d_edge_max > 0.0 && self.d_c > 0.0 && self.keyframe_dist > 0.0) {
            return bad("distances must be positive");
        }
        if self.n_attempt == 0 {
            return bad("n_attempt must be positive");
        }
        Ok(())
    }
}

/// Robot state reported to a cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentUpdate {
    pub pose: Pose,
    /// Positions where the robot changed direction since the previous cycle, in order.
    pub turns: Vec<Vec3>,
    /// Path vertices adjacent to the robot's current segment.
    pub anchors: Vec<NodeId>,
    /// View the robot arrived at since the previous cycle.
    pub reached: Option<NodeId>,
}

impl AgentUpdate {
    pub fn at(pose: Pose) -> Self {
        Self {
            pose,
            turns: Vec::new(),
            anchors: Vec::new(),
            reached: None,
        }
    }
}

/// Stage wall-clock times of one cycle (ms).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub recondition: f64,
    pub sample: f64,
    pub prune: f64,
    pub reach: f64,
    pub cluster: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.recondition + self.sample + self.prune + self.reach + self.cluster
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CycleReport {
    pub added_views: Vec<NodeId>,
    pub prune: PruneReport,
    pub added_waypoints: Vec<NodeId>,
    pub edges_evaluated: usize,
    pub timings: StageTimings,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Roadmap, visibility index and the bookkeeping carried between cycles.
#[derive(Clone, Debug)]
pub struct Dfr {
    pub cfg: DfrConfig,
    pub sensor: SensorModel,
    pub d_safe: f64,
    pub resolution: f64,
    pub graph: ApnGraph,
    pub vis: VisibilityIndex,
    /// Views created in the current cycle.
    dirty: BTreeSet<NodeId>,
    last_keyframe: NodeId,
    trail: Vec<Vec3>,
    global_only: bool,
}

impl Dfr {
    pub fn new(
        start: Pose,
        sensor: SensorModel,
        limits: MotionLimits,
        d_safe: f64,
        resolution: f64,
        cfg: DfrConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        sensor.validate_for_resolution(resolution)?;
        let graph = ApnGraph::new(start, limits, d_safe);
        let home = graph.home();
        Ok(Self {
            cfg,
            sensor,
            d_safe,
            resolution,
            graph,
            vis: VisibilityIndex::new(),
            dirty: BTreeSet::new(),
            last_keyframe: home,
            trail: Vec::new(),
            global_only: false,
        })
    }

    /// Global-only sampling applies `p_global` to every non-covered frontier.
    pub fn set_global_only(&mut self, on: bool) {
        self.global_only = on;
    }

    pub fn global_only(&self) -> bool {
        self.global_only
    }

    /// Views whose visibility may have changed: within sensing range of the change volume, with
    /// enough slack to cover voxel extents.
    pub(crate) fn near_changes(&self, changes: &ChangeSet, p: &Vec3) -> bool {
        changes
            .bounds()
            .is_some_and(|b| b.distance_to(p) <= self.sensor.max_range + 1.5 * self.resolution)
    }

    fn sync_gain(&mut self, v: NodeId) {
        if self.graph.node(v).is_some_and(|n| n.open) {
            let k = self.vis.gain_individual(v);
            self.graph.set_gain(v, k).expect("node exists");
        }
    }

    /// Full recomputation of Γ(v) against the current map and frontiers.
    pub fn refresh_view(&mut self, v: NodeId, map: &VoxelMap, frontiers: &FrontierSet) {
        let Some(node) = self.graph.node(v) else { return };
        let view = self.sensor.view(node.pose);
        let fs = visible_frontiers(map, frontiers, &view);
        self.vis.set_view(v, fs);
        self.sync_gain(v);
    }

    /// Agent pose, trail keyframes, visited views and Γ maintenance around the change volume.
    pub fn recondition(
        &mut self,
        map: &VoxelMap,
        frontiers: &FrontierSet,
        changes: &ChangeSet,
        delta: &FrontierDelta,
        agent: &AgentUpdate,
    ) {
        let a = self.graph.agent();
        self.graph.set_pose(a, agent.pose).expect("agent exists");
        if let Some(g) = agent.reached {
            if self.graph.node(g).is_some_and(|n| n.open) {
                self.vis.remove_view(g);
                self.graph.close(g).expect("node exists");
            }
        }
        self.update_keyframes(agent);

        let mut touched = BTreeSet::new();
        for f in &delta.removed {
            touched.extend(self.vis.remove_frontier(*f));
        }
        let near: Vec<NodeId> = self
            .graph
            .open_views()
            .filter(|v| self.near_changes(changes, &self.graph.node(*v).unwrap().position()))
            .collect();
        for v in &near {
            self.refresh_view(*v, map, frontiers);
            touched.remove(v);
        }
        for v in touched {
            self.sync_gain(v);
        }
    }

    fn update_keyframes(&mut self, agent: &AgentUpdate) {
        self.trail.extend(agent.turns.iter().copied());
        let start = self.graph.node(self.last_keyframe).unwrap().position();
        let mut len = 0.0;
        let mut prev = start;
        for p in self.trail.iter().chain(std::iter::once(&agent.pose.position)) {
            len += (p - prev).norm();
            prev = *p;
        }
        if len < self.cfg.keyframe_dist {
            return;
        }
        let mut prev_id = self.last_keyframe;
        let mut prev_pos = start;
        let points: Vec<Vec3> = self.trail.drain(..).chain(std::iter::once(agent.pose.position)).collect();
        for p in points {
            if (p - prev_pos).norm() < 1e-6 {
                continue;
            }
            let k = self.graph.add_node(Pose::facing(p, &(2.0 * p - prev_pos)), NodeOrigin::Keyframe);
            self.graph.add_pinned_edge(prev_id, k).expect("both exist");
            prev_id = k;
            prev_pos = p;
        }
        self.last_keyframe = prev_id;
    }

    /// One full cycle; the caller supplies the change set and frontier delta accumulated since the
    /// previous cycle.
    pub fn cycle(
        &mut self,
        map: &VoxelMap,
        frontiers: &FrontierSet,
        changes: &ChangeSet,
        delta: &FrontierDelta,
        agent: &AgentUpdate,
        rng: &mut impl Rng,
    ) -> CycleReport {
        let mut report = CycleReport::default();
        self.dirty.clear();

        let t = Instant::now();
        invalidate_edges(&mut self.graph, map, changes);
        self.recondition(map, frontiers, changes, delta, agent);
        report.timings.recondition = ms_since(t);

        let t = Instant::now();
        report.added_views = self.sample_coverage_views(map, frontiers, changes, rng);
        report.timings.sample = ms_since(t);

        let t = Instant::now();
        report.prune = self.prune_views(changes);
        report.timings.prune = ms_since(t);

        let t = Instant::now();
        // the agent moved during reconditioning and lost its edges; expansion needs its component
        self.link_agent(map, &agent.anchors);
        let (wps, evaluated) = self.expand_reachability(map, changes, rng);
        report.added_waypoints = wps;
        report.edges_evaluated = evaluated;
        self.link_agent(map, &agent.anchors);
        report.timings.reach = ms_since(t);

        let t = Instant::now();
        recluster(&mut self.graph, &self.cfg);
        report.timings.cluster = ms_since(t);
        report
    }

    /// Consistency of the roadmap and the visibility index.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        self.graph.check_invariants()?;
        self.vis.check_consistency()?;
        for v in self.vis.views() {
            let n = self.graph.node(v).ok_or(format!("Γ holds removed node {v}"))?;
            if !n.open {
                return Err(format!("closed node {v} still has visible frontiers"));
            }
        }
        for n in self.graph.nodes().filter(|n| n.open) {
            if n.gain != self.vis.gain_individual(n.uid) {
                return Err(format!("node {} gain is stale", n.uid));
            }
        }
        Ok(())
    }

    /// Box in which this cycle's local operations run.
    pub(crate) fn local_box(&self, changes: &ChangeSet, inflate: f64) -> Option<Aabb> {
        changes.bounds().map(|b| b.inflate(inflate))
    }
}
