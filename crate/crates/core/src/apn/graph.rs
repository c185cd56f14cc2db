use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{MotionLimits, SpatialHash};
use crate::error::{Error, Result};
use crate::geometry::{yaw_distance, Aabb, Obb, Pose, Vec3};
use crate::map::{Collision, VoxelIndex};

/// Stable node identifier; never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub u32);

/// Planning class of a node, derived from its origin and view state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeClass {
    Agent,
    Home,
    Keyframe,
    Nbv,
    Traversal,
}

/// How a node came to exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeOrigin {
    Agent,
    Home,
    Keyframe,
    /// Coverage viewpose sampled for a frontier.
    View,
    /// Reachability sample, or a demoted view.
    Waypoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApnNode {
    pub uid: NodeId,
    pub pose: Pose,
    /// Number of frontiers visible from this viewpose.
    pub gain: usize,
    /// Not yet visited by the robot.
    pub open: bool,
    pub origin: NodeOrigin,
    pub cluster: Option<ClusterId>,
}

impl ApnNode {
    pub fn class(&self) -> NodeClass {
        match self.origin {
            NodeOrigin::Agent => NodeClass::Agent,
            NodeOrigin::Home => NodeClass::Home,
            NodeOrigin::Keyframe => NodeClass::Keyframe,
            _ if self.open && self.gain > 0 => NodeClass::Nbv,
            _ => NodeClass::Traversal,
        }
    }

    pub fn is_nbv(&self) -> bool {
        self.class() == NodeClass::Nbv
    }

    pub fn position(&self) -> Vec3 {
        self.pose.position
    }
}

/// Unordered node pair, stored smaller uid first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey(pub NodeId, pub NodeId);

impl EdgeKey {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }

    pub fn other(&self, n: NodeId) -> NodeId {
        if self.0 == n {
            self.1
        } else {
            self.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApnEdge {
    pub key: EdgeKey,
    pub d_pos: f64,
    pub d_yaw: f64,
    /// Traversal time (s).
    pub cost: f64,
    pub obb: Obb,
    pub state: Collision,
    /// Voxels that were unknown inside the traversal volume at the last check.
    pub obs: Vec<VoxelIndex>,
    /// Edge along the robot's own trail; its state is not re-derived from the map.
    pub pinned: bool,
}

impl ApnEdge {
    pub fn is_free(&self) -> bool {
        self.state == Collision::Free
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.key.0, self.key.1)
    }
}

/// Cluster hyperedge: a disjoint group of nodes with their centroid and bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: ClusterId,
    pub members: BTreeSet<NodeId>,
    pub centroid: Vec3,
    pub bounds: Aabb,
}

impl Cluster {
    pub fn from_members(id: ClusterId, members: BTreeSet<NodeId>, graph: &ApnGraph) -> Self {
        let mut c = Cluster {
            id,
            members,
            centroid: Vec3::zeros(),
            bounds: Aabb::from_point(Vec3::zeros()),
        };
        c.refresh(graph);
        c
    }

    fn refresh(&mut self, graph: &ApnGraph) {
        let mut sum = Vec3::zeros();
        let mut bounds: Option<Aabb> = None;
        for m in &self.members {
            let p = graph.nodes[m].position();
            sum += p;
            match &mut bounds {
                Some(b) => b.extend(&p),
                None => bounds = Some(Aabb::from_point(p)),
            }
        }
        if !self.members.is_empty() {
            self.centroid = sum / self.members.len() as f64;
        }
        if let Some(b) = bounds {
            self.bounds = b;
        }
    }
}

/// The roadmap hypergraph.
#[derive(Clone, Debug)]
pub struct ApnGraph {
    limits: MotionLimits,
    half_width: f64,
    pub(super) nodes: BTreeMap<NodeId, ApnNode>,
    pub(super) edges: BTreeMap<EdgeKey, ApnEdge>,
    pub(super) adj: BTreeMap<NodeId, BTreeSet<NodeId>>,
    blacklist: BTreeSet<EdgeKey>,
    clusters: Vec<Cluster>,
    spatial: SpatialHash,
    next_uid: u64,
    home: NodeId,
    agent: NodeId,
    keyframes: Vec<NodeId>,
}

impl ApnGraph {
    /// Graph holding the home node and the agent node, both at `start`.
    /// `half_width` is the lateral clearance of every edge volume.
    pub fn new(start: Pose, limits: MotionLimits, half_width: f64) -> Self {
        let mut g = Self {
            limits,
            half_width,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            adj: BTreeMap::new(),
            blacklist: BTreeSet::new(),
            clusters: Vec::new(),
            spatial: SpatialHash::new(2.0),
            next_uid: 0,
            home: NodeId(0),
            agent: NodeId(0),
            keyframes: Vec::new(),
        };
        g.home = g.add_node(start, NodeOrigin::Home);
        g.agent = g.add_node(start, NodeOrigin::Agent);
        g
    }

    pub fn limits(&self) -> MotionLimits {
        self.limits
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn home(&self) -> NodeId {
        self.home
    }

    pub fn agent(&self) -> NodeId {
        self.agent
    }

    pub fn keyframes(&self) -> &[NodeId] {
        &self.keyframes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn free_edge_count(&self) -> usize {
        self.edges.values().filter(|e| e.is_free()).count()
    }

    pub fn node(&self, id: NodeId) -> Option<&ApnNode> {
        self.nodes.get(&id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    fn node_mut(&mut self, id: NodeId) -> Result<&mut ApnNode> {
        self.nodes.get_mut(&id).ok_or(Error::UnknownNode(id))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ApnNode> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = &ApnEdge> {
        self.edges.values()
    }

    pub fn edge(&self, a: NodeId, b: NodeId) -> Option<&ApnEdge> {
        self.edges.get(&EdgeKey::new(a, b))
    }

    /// Open view nodes with positive gain.
    pub fn nbvs(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.values().filter(|n| n.is_nbv()).map(|n| n.uid)
    }

    /// Unvisited coverage views, whatever their gain.
    pub fn open_views(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .values()
            .filter(|n| n.open && n.origin == NodeOrigin::View)
            .map(|n| n.uid)
    }

    pub fn add_node(&mut self, pose: Pose, origin: NodeOrigin) -> NodeId {
        let uid = NodeId(self.next_uid);
        self.next_uid += 1;
        self.nodes.insert(
            uid,
            ApnNode {
                uid,
                pose,
                gain: 0,
                open: origin == NodeOrigin::View,
                origin,
                cluster: None,
            },
        );
        self.adj.insert(uid, BTreeSet::new());
        self.spatial.insert(uid, pose.position);
        if origin == NodeOrigin::Keyframe {
            self.keyframes.push(uid);
        }
        uid
    }

    /// Moves a node; incident edges are dropped since their geometry no longer holds.
    pub fn set_pose(&mut self, id: NodeId, pose: Pose) -> Result<()> {
        if id == self.home {
            return Err(Error::ProtectedNode(id));
        }
        let old = self.node_mut(id)?.pose;
        self.node_mut(id)?.pose = pose;
        self.spatial.remove(id, &old.position);
        self.spatial.insert(id, pose.position);
        let incident: Vec<NodeId> = self.adj[&id].iter().copied().collect();
        for n in incident {
            self.remove_edge(id, n);
        }
        Ok(())
    }

    pub fn set_gain(&mut self, id: NodeId, gain: usize) -> Result<()> {
        self.node_mut(id)?.gain = gain;
        Ok(())
    }

    /// Marks a view as visited; it stays in the graph as a traversal node.
    pub fn close(&mut self, id: NodeId) -> Result<()> {
        let n = self.node_mut(id)?;
        n.open = false;
        n.gain = 0;
        Ok(())
    }

    /// Turns a view into a plain waypoint.
    pub fn demote(&mut self, id: NodeId) -> Result<()> {
        let n = self.node_mut(id)?;
        if n.origin == NodeOrigin::View {
            n.origin = NodeOrigin::Waypoint;
        }
        n.open = false;
        n.gain = 0;
        Ok(())
    }

    pub fn remove_node(&mut self, id: NodeId) -> Result<ApnNode> {
        if id == self.home || id == self.agent {
            return Err(Error::ProtectedNode(id));
        }
        if !self.nodes.contains_key(&id) {
            return Err(Error::UnknownNode(id));
        }
        let incident: Vec<NodeId> = self.adj[&id].iter().copied().collect();
        for n in incident {
            self.remove_edge(id, n);
        }
        self.adj.remove(&id);
        let node = self.nodes.remove(&id).expect("checked above");
        self.spatial.remove(id, &node.pose.position);
        self.keyframes.retain(|k| *k != id);
        if let Some(cid) = node.cluster {
            if let Some(pos) = self.clusters.iter().position(|c| c.id == cid) {
                let mut c = self.clusters[pos].clone();
                c.members.remove(&id);
                c.refresh(self);
                self.clusters[pos] = c;
            }
        }
        Ok(node)
    }

    fn make_edge(&self, key: EdgeKey, state: Collision, obs: Vec<VoxelIndex>) -> ApnEdge {
        let a = &self.nodes[&key.0].pose;
        let b = &self.nodes[&key.1].pose;
        let d_pos = (a.position - b.position).norm();
        let d_yaw = yaw_distance(a.yaw, b.yaw);
        ApnEdge {
            key,
            d_pos,
            d_yaw,
            cost: self.limits.cost(d_pos, d_yaw),
            obb: Obb::around_segment(&a.position, &b.position, self.half_width),
            state,
            obs,
            pinned: false,
        }
    }

    fn check_pair(&self, a: NodeId, b: NodeId) -> Result<EdgeKey> {
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        for n in [a, b] {
            if !self.nodes.contains_key(&n) {
                return Err(Error::UnknownNode(n));
            }
        }
        Ok(EdgeKey::new(a, b))
    }

    /// Adds a free edge; an existing edge for the pair is returned unchanged.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> Result<&ApnEdge> {
        let key = self.check_pair(a, b)?;
        if !self.edges.contains_key(&key) {
            let e = self.make_edge(key, Collision::Free, Vec::new());
            self.insert(e);
        }
        Ok(&self.edges[&key])
    }

    /// Inserts or overwrites the edge for a pair with the given collision state.
    pub fn upsert_edge(&mut self, a: NodeId, b: NodeId, state: Collision, obs: Vec<VoxelIndex>) -> Result<&ApnEdge> {
        let key = self.check_pair(a, b)?;
        let e = self.make_edge(key, state, obs);
        self.insert(e);
        Ok(&self.edges[&key])
    }

    /// Free edge along the robot's own trail.
    pub fn add_pinned_edge(&mut self, a: NodeId, b: NodeId) -> Result<&ApnEdge> {
        let key = self.check_pair(a, b)?;
        let mut e = self.make_edge(key, Collision::Free, Vec::new());
        e.pinned = true;
        self.insert(e);
        Ok(&self.edges[&key])
    }

    fn insert(&mut self, e: ApnEdge) {
        let EdgeKey(a, b) = e.key;
        self.adj.get_mut(&a).unwrap().insert(b);
        self.adj.get_mut(&b).unwrap().insert(a);
        self.edges.insert(e.key, e);
    }

    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) -> Option<ApnEdge> {
        let key = EdgeKey::new(a, b);
        let e = self.edges.remove(&key)?;
        if let Some(s) = self.adj.get_mut(&a) {
            s.remove(&b);
        }
        if let Some(s) = self.adj.get_mut(&b) {
            s.remove(&a);
        }
        Some(e)
    }

    /// Updates the collision state of an existing edge in place.
    pub fn set_edge_state(&mut self, key: EdgeKey, state: Collision, obs: Vec<VoxelIndex>) {
        if let Some(e) = self.edges.get_mut(&key) {
            e.state = state;
            e.obs = obs;
        }
    }

    pub fn blacklist(&mut self, a: NodeId, b: NodeId) {
        self.remove_edge(a, b);
        self.blacklist.insert(EdgeKey::new(a, b));
    }

    pub fn is_blacklisted(&self, a: NodeId, b: NodeId) -> bool {
        self.blacklist.contains(&EdgeKey::new(a, b))
    }

    pub fn blacklist_len(&self) -> usize {
        self.blacklist.len()
    }

    /// Neighbours over stored edges; with `traversable_only`, over free edges only.
    pub fn neighbors(&self, id: NodeId, traversable_only: bool) -> impl Iterator<Item = NodeId> + '_ {
        self.adj
            .get(&id)
            .into_iter()
            .flatten()
            .copied()
            .filter(move |n| !traversable_only || self.edges[&EdgeKey::new(id, *n)].is_free())
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adj.get(&id).map_or(0, |s| s.len())
    }

    pub fn nearest_node(&self, p: &Vec3) -> Result<NodeId> {
        self.spatial.nearest(p).map(|(id, _)| id).ok_or(Error::EmptyGraph)
    }

    pub fn nearest_distance(&self, p: &Vec3) -> Option<f64> {
        self.spatial.nearest(p).map(|(_, d)| d)
    }

    /// Nodes within `r` of `p`, ascending uid, with distances.
    pub fn within(&self, p: &Vec3, r: f64) -> Vec<(NodeId, f64)> {
        self.spatial.within(p, r)
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.id == id)
    }

    pub fn cluster_of(&self, n: NodeId) -> Option<ClusterId> {
        self.nodes.get(&n).and_then(|x| x.cluster)
    }

    /// Replaces the cluster set and records membership on each node.
    pub fn set_clusters(&mut self, clusters: Vec<Cluster>) {
        for n in self.nodes.values_mut() {
            n.cluster = None;
        }
        for c in &clusters {
            for m in &c.members {
                if let Some(n) = self.nodes.get_mut(m) {
                    n.cluster = Some(c.id);
                }
            }
        }
        self.clusters = clusters;
    }

    /// Edge density |E| / C(|V|, 2).
    pub fn edge_density(&self) -> f64 {
        let n = self.nodes.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        self.free_edge_count() as f64 / (0.5 * n * (n - 1.0))
    }

    /// Structural invariants; returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (k, e) in &self.edges {
            if !self.nodes.contains_key(&k.0) || !self.nodes.contains_key(&k.1) {
                return Err(format!("edge {k:?} has a dangling endpoint"));
            }
            let fresh = self.make_edge(*k, e.state, Vec::new());
            if fresh.d_pos != e.d_pos || fresh.d_yaw != e.d_yaw || fresh.cost != e.cost {
                return Err(format!("edge {k:?} geometry is stale"));
            }
            if !self.adj[&k.0].contains(&k.1) || !self.adj[&k.1].contains(&k.0) {
                return Err(format!("edge {k:?} missing from adjacency"));
            }
        }
        let adj_total: usize = self.adj.values().map(|s| s.len()).sum();
        if adj_total != 2 * self.edges.len() {
            return Err("adjacency has extra entries".into());
        }
        let count = |o| self.nodes.values().filter(|n| n.origin == o).count();
        if count(NodeOrigin::Agent) != 1 || count(NodeOrigin::Home) != 1 {
            return Err("expected exactly one agent and one home node".into());
        }
        for n in self.nodes.values() {
            let nbv = n.class() == NodeClass::Nbv;
            let is_view = matches!(n.origin, NodeOrigin::View | NodeOrigin::Waypoint);
            if is_view && nbv != (n.open && n.gain > 0) {
                return Err(format!("node {} violates the nbv classification", n.uid));
            }
        }
        if !self.clusters.is_empty() {
            let mut seen = BTreeSet::new();
            for c in &self.clusters {
                for m in &c.members {
                    if !seen.insert(*m) {
                        return Err(format!("node {m} belongs to two clusters"));
                    }
                    if self.nodes[m].cluster != Some(c.id) {
                        return Err(format!("node {m} cluster label mismatch"));
                    }
                }
            }
        }
        // keyframe chain reaches home over pinned edges
        for k in &self.keyframes {
            let mut stack = vec![*k];
            let mut visited = BTreeSet::new();
            let mut found = false;
            while let Some(n) = stack.pop() {
                if n == self.home {
                    found = true;
                    break;
                }
                if !visited.insert(n) {
                    continue;
                }
                for m in self.neighbors(n, false) {
                    if self.edges[&EdgeKey::new(n, m)].pinned
                        && (m == self.home || self.nodes[&m].origin == NodeOrigin::Keyframe)
                    {
                        stack.push(m);
                    }
                }
            }
            if !found {
                return Err(format!("keyframe {k} is not chained to home"));
            }
        }
        Ok(())
    }
}
