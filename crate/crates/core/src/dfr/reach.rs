use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rand::Rng;

use super::Dfr;
use crate::apn::{ApnEdge, ApnGraph, EdgeKey, NodeId, NodeOrigin};
use crate::geometry::{Aabb, Pose, Vec3};
use crate::map::{ChangeSet, Collision, OccState, VoxelIndex, VoxelMap};

/// Fresh collision state of the traversal volume between two positions.
pub fn edge_recheck(map: &VoxelMap, a: &Vec3, b: &Vec3, half_width: f64) -> Collision {
    map.sweep_check(a, b, half_width).state
}

/// Lazily derived state of a stored edge: the cached unknown voxels are re-read, the rest of the
/// volume is known free since the last full check.
pub fn observe_edge(map: &VoxelMap, edge: &ApnEdge) -> (Collision, Vec<VoxelIndex>) {
    if edge.state != Collision::Unknown {
        return (edge.state, Vec::new());
    }
    let mut still = Vec::new();
    for v in &edge.obs {
        match map.state(*v) {
            OccState::Occupied => return (Collision::Occupied, Vec::new()),
            OccState::Unknown => still.push(*v),
            OccState::Free => {}
        }
    }
    if still.is_empty() {
        (Collision::Free, still)
    } else {
        (Collision::Unknown, still)
    }
}

/// Resets every non-pinned edge whose volume contains a voxel that went from free to occupied.
/// Other transitions are caught by the lazy re-read of cached unknown voxels.
pub fn invalidate_edges(graph: &mut ApnGraph, map: &VoxelMap, changes: &ChangeSet) -> usize {
    let spec = map.spec();
    let hits: Vec<VoxelIndex> = changes
        .iter()
        .filter(|(_, c)| c.old == OccState::Free && c.new == OccState::Occupied)
        .map(|(i, _)| i)
        .collect();
    if hits.is_empty() {
        return 0;
    }
    let mut hull = Aabb::from_point(spec.center(hits[0]));
    for h in &hits {
        hull.extend(&spec.center(*h));
    }
    let hull = hull.inflate(spec.resolution);
    let hw = graph.half_width();
    let mut stale = Vec::new();
    for e in graph.edges() {
        if e.pinned || !e.obb.aabb().intersects(&hull) {
            continue;
        }
        let a = graph.node(e.key.0).unwrap().position();
        let b = graph.node(e.key.1).unwrap().position();
        if hits.iter().any(|h| spec.in_sweep(*h, &a, &b, hw)) {
            stale.push(e.key);
        }
    }
    for k in &stale {
        graph.remove_edge(k.0, k.1);
    }
    stale.len()
}

impl Dfr {
    /// Evaluates one pair: lazy re-read for cached unknown edges, full sweep otherwise.
    /// Occupied pairs are blacklisted for good.
    pub fn evaluate_pair(&mut self, map: &VoxelMap, key: EdgeKey) -> Collision {
        if self.graph.is_blacklisted(key.0, key.1) {
            return Collision::Occupied;
        }
        let (state, obs) = match self.graph.edge(key.0, key.1) {
            Some(e) if e.state == Collision::Unknown => observe_edge(map, e),
            Some(e) => return e.state,
            None => {
                let a = self.graph.node(key.0).unwrap().position();
                let b = self.graph.node(key.1).unwrap().position();
                let c = map.sweep_check(&a, &b, self.d_safe);
                (c.state, c.unknown)
            }
        };
        match state {
            Collision::Occupied => self.graph.blacklist(key.0, key.1),
            Collision::Free => match self.graph.edge(key.0, key.1) {
                Some(_) => self.graph.set_edge_state(key, Collision::Free, Vec::new()),
                None => {
                    self.graph.upsert_edge(key.0, key.1, Collision::Free, Vec::new()).unwrap();
                }
            },
            Collision::Unknown => match self.graph.edge(key.0, key.1) {
                Some(_) => self.graph.set_edge_state(key, Collision::Unknown, obs),
                None => {
                    self.graph.upsert_edge(key.0, key.1, Collision::Unknown, obs).unwrap();
                }
            },
        }
        state
    }

    fn nodes_outside_agent_component(&self) -> BTreeSet<NodeId> {
        let tree = self.graph.shortest_tree(self.graph.agent(), true);
        self.graph.node_ids().filter(|n| !tree.reachable(*n)).collect()
    }

    /// Closest partners of `n` within the maximum edge length.
    fn partners(&self, n: NodeId) -> Vec<NodeId> {
        let p = self.graph.node(n).unwrap().position();
        let mut near: Vec<(NodeId, f64)> = self
            .graph
            .within(&p, self.cfg.d_edge_max)
            .into_iter()
            .filter(|(m, _)| *m != n && *m != self.graph.agent())
            .filter(|(m, _)| !self.graph.is_blacklisted(n, *m) && !self.graph.edge(n, *m).is_some_and(|e| e.is_free()))
            .collect();
        near.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        near.truncate(self.cfg.max_edge_neighbors);
        near.into_iter().map(|(m, _)| m).collect()
    }

    /// Traversal sampling around the change volume, then candidate edge (re)evaluation.
    /// Returns the added waypoints and the number of evaluated pairs.
    pub fn expand_reachability(&mut self, map: &VoxelMap, changes: &ChangeSet, rng: &mut impl Rng) -> (Vec<NodeId>, usize) {
        let mut added = Vec::new();
        let region = self
            .local_box(changes, self.cfg.d_sep)
            .and_then(|b| b.intersection(&map.bounds()));
        if let Some(b) = region {
            let mut attempts = 0;
            while attempts < self.cfg.n_traversal_attempts && added.len() < self.cfg.n_traversal_samples {
                attempts += 1;
                let p = Vec3::new(
                    rng.gen_range(b.min.x..=b.max.x),
                    rng.gen_range(b.min.y..=b.max.y),
                    rng.gen_range(b.min.z..=b.max.z),
                );
                if self.graph.nearest_distance(&p).is_some_and(|d| d <= self.cfg.d_sep) {
                    continue;
                }
                if map.sphere_check(&p, self.d_safe).state != Collision::Free {
                    continue;
                }
                added.push(self.graph.add_node(Pose::new(p, 0.0), NodeOrigin::Waypoint));
            }
        }

        let agent = self.graph.agent();
        let mut seeds: BTreeSet<NodeId> = self.dirty.iter().copied().collect();
        seeds.extend(added.iter().copied());
        if let Some(b) = region {
            seeds.extend(self.graph.nodes().filter(|n| b.contains(&n.position())).map(|n| n.uid));
        }
        let outside = self.nodes_outside_agent_component();
        seeds.extend(outside.iter().copied());
        seeds.remove(&agent);

        let mut pairs: BTreeSet<EdgeKey> = BTreeSet::new();
        for s in &seeds {
            if !self.graph.contains(*s) {
                continue;
            }
            for m in self.partners(*s) {
                if self.graph.is_blacklisted(*s, m) || self.graph.edge(*s, m).is_some_and(|e| e.is_free()) {
                    continue;
                }
                pairs.insert(EdgeKey::new(*s, m));
            }
        }
        if let Some(b) = changes.bounds() {
            let zone = b.inflate(self.resolution);
            pairs.extend(
                self.graph
                    .edges()
                    .filter(|e| e.state == Collision::Unknown && e.obb.aabb().intersects(&zone))
                    .map(|e| e.key),
            );
        }
        let mut evaluated = 0;
        for key in pairs {
            if key.0 == agent || key.1 == agent {
                continue;
            }
            if !rng.gen_bool(self.cfg.p_edge_update) {
                continue;
            }
            self.evaluate_pair(map, key);
            evaluated += 1;
        }
        added.extend(self.bridge(map, &outside, rng));
        if self.global_only() {
            added.extend(self.search_bridge(map));
        }
        (added, evaluated)
    }

    /// Joins disconnected views to the agent component through a single waypoint that sees the
    /// view and some reachable node. Bridge waypoints ignore the traversal separation.
    fn bridge(&mut self, map: &VoxelMap, outside: &BTreeSet<NodeId>, rng: &mut impl Rng) -> Vec<NodeId> {
        let agent = self.graph.agent();
        let views: Vec<NodeId> = outside
            .iter()
            .copied()
            .filter(|n| self.graph.node(*n).is_some_and(|n| n.origin == NodeOrigin::View))
            .collect();
        if views.is_empty() {
            return Vec::new();
        }
        let tree = self.graph.shortest_tree(agent, true);
        let mut joined: BTreeSet<NodeId> = BTreeSet::new();
        let mut added = Vec::new();
        for _ in 0..self.cfg.n_bridge_attempts {
            let v = views[rng.gen_range(0..views.len())];
            if joined.contains(&v) {
                continue;
            }
            let p = self.graph.node(v).unwrap().position();
            let Some(b) = Aabb::from_point(p).inflate(self.cfg.bridge_radius).intersection(&map.bounds()) else {
                continue;
            };
            let c = Vec3::new(
                rng.gen_range(b.min.x..=b.max.x),
                rng.gen_range(b.min.y..=b.max.y),
                rng.gen_range(b.min.z..=b.max.z),
            );
            if map.sphere_check(&c, self.d_safe).state != Collision::Free
                || map.sweep_check(&c, &p, self.d_safe).state != Collision::Free
            {
                continue;
            }
            let mut near: Vec<(NodeId, f64)> = self
                .graph
                .within(&c, self.cfg.d_edge_max)
                .into_iter()
                .filter(|(m, _)| *m != agent && tree.reachable(*m))
                .collect();
            near.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            let link = near.into_iter().take(self.cfg.bridge_partners).map(|(m, _)| m).find(|m| {
                let q = self.graph.node(*m).unwrap().position();
                map.sweep_check(&c, &q, self.d_safe).state == Collision::Free
            });
            if let Some(w) = link {
                let id = self.graph.add_node(Pose::new(c, 0.0), NodeOrigin::Waypoint);
                self.graph.upsert_edge(id, v, Collision::Free, Vec::new()).unwrap();
                self.graph.upsert_edge(id, w, Collision::Free, Vec::new()).unwrap();
                added.push(id);
                // views already tied to v ride along
                let comp = self.graph.shortest_tree(v, true);
                joined.extend(views.iter().copied().filter(|u| comp.reachable(*u)));
            }
        }
        added
    }

    /// Dijkstra over a lattice of known-free positions with full clearance, from the agent
    /// component to the nearest disconnected open view. The path is shortcut into waypoints
    /// joined by free edges.
    fn search_bridge(&mut self, map: &VoxelMap) -> Vec<NodeId> {
        let agent = self.graph.agent();
        let tree = self.graph.shortest_tree(agent, true);
        let targets: Vec<(NodeId, Vec3)> = self
            .graph
            .open_views()
            .filter(|v| !tree.reachable(*v))
            .map(|v| (v, self.graph.node(v).unwrap().position()))
            .collect();
        if targets.is_empty() {
            return Vec::new();
        }
        let spec = *map.spec();
        let step = 2.0 * spec.resolution;
        let lattice = |p: &Vec3| {
            let c = spec.cell_of(p);
            [c[0].div_euclid(2), c[1].div_euclid(2), c[2].div_euclid(2)]
        };
        let at = |l: [i64; 3]| spec.center_of_cell([2 * l[0], 2 * l[1], 2 * l[2]]);
        let mut clear: BTreeMap<[i64; 3], bool> = BTreeMap::new();
        let mut ok = |l: [i64; 3]| {
            *clear
                .entry(l)
                .or_insert_with(|| map.sphere_check(&at(l), self.d_safe).state == Collision::Free)
        };
        let free = |a: &Vec3, b: &Vec3| map.sweep_check(a, b, self.d_safe).state == Collision::Free;
        let around = |l: [i64; 3]| {
            (0..27).map(move |k: i64| [l[0] + k % 3 - 1, l[1] + (k / 3) % 3 - 1, l[2] + k / 9 - 1])
        };

        // sources: lattice points next to reachable nodes, tagged with that node
        let mut dist: BTreeMap<[i64; 3], u32> = BTreeMap::new();
        let mut prev: BTreeMap<[i64; 3], Result<[i64; 3], NodeId>> = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        for n in self.graph.nodes().filter(|n| n.uid != agent && tree.reachable(n.uid)) {
            let p = n.position();
            let base = lattice(&p);
            for m in around(base) {
                if dist.contains_key(&m) || !ok(m) || !free(&p, &at(m)) {
                    continue;
                }
                dist.insert(m, 0);
                prev.insert(m, Err(n.uid));
                heap.push(Reverse((0u32, m)));
            }
        }
        let mut found = None;
        let mut expanded = 0;
        while let Some(Reverse((d, l))) = heap.pop() {
            if dist.get(&l).is_some_and(|best| *best < d) {
                continue;
            }
            let here = at(l);
            if let Some((v, _)) = targets
                .iter()
                .find(|(_, q)| (q - here).norm() <= step * 2.0 && free(&here, q))
            {
                found = Some((l, *v));
                break;
            }
            expanded += 1;
            if expanded > self.cfg.bridge_search_expansions {
                break;
            }
            for dz in -1..=1i64 {
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        let k = dx.abs() + dy.abs() + dz.abs();
                        if k == 0 {
                            continue;
                        }
                        let m = [l[0] + dx, l[1] + dy, l[2] + dz];
                        let nd = d + [0, 10, 14, 17][k as usize];
                        if dist.get(&m).is_some_and(|best| *best <= nd) || !ok(m) || !free(&here, &at(m)) {
                            continue;
                        }
                        dist.insert(m, nd);
                        prev.insert(m, Ok(l));
                        heap.push(Reverse((nd, m)));
                    }
                }
            }
        }
        let Some((end, view)) = found else { return Vec::new() };

        let mut cells = vec![end];
        let root = loop {
            match prev[cells.last().unwrap()] {
                Ok(l) => cells.push(l),
                Err(n) => break n,
            }
        };
        cells.reverse();
        let mut chain: Vec<Vec3> = vec![self.graph.node(root).unwrap().position()];
        chain.extend(cells.iter().map(|l| at(*l)));
        chain.push(self.graph.node(view).unwrap().position());

        // greedy shortcutting; consecutive chain points are always joined by free sweeps
        let mut added = Vec::new();
        let mut from_id = root;
        let mut i = 0;
        let last = chain.len() - 1;
        while i < last {
            let mut j = i + 1;
            for k in (i + 2..=last).rev() {
                if (chain[k] - chain[i]).norm() <= self.cfg.d_edge_max && free(&chain[i], &chain[k]) {
                    j = k;
                    break;
                }
            }
            let to_id = if j == last {
                view
            } else {
                let id = self.graph.add_node(Pose::new(chain[j], 0.0), NodeOrigin::Waypoint);
                added.push(id);
                id
            };
            self.graph.upsert_edge(from_id, to_id, Collision::Free, Vec::new()).unwrap();
            from_id = to_id;
            i = j;
        }
        log::debug!("search bridge to view {view}: {} waypoints after {expanded} expansions", added.len());
        added
    }

    /// Reconnects the agent to its path anchors and closest nodes through free edges.
    pub fn link_agent(&mut self, map: &VoxelMap, anchors: &[NodeId]) {
        let agent = self.graph.agent();
        let p = self.graph.node(agent).unwrap().position();
        let mut near: Vec<(NodeId, f64)> = self
            .graph
            .within(&p, self.cfg.d_edge_max)
            .into_iter()
            .filter(|(m, _)| *m != agent)
            .collect();
        near.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let mut targets: Vec<NodeId> = anchors.iter().copied().filter(|a| self.graph.contains(*a) && *a != agent).collect();
        let cap = targets.len() + self.cfg.agent_links;
        for (m, _) in &near {
            if targets.len() >= cap {
                break;
            }
            if !targets.contains(m) {
                targets.push(*m);
            }
        }
        // open views get their own quota so a crowd of trail keyframes cannot hide them
        let cap = targets.len() + self.cfg.agent_links;
        for (m, _) in &near {
            if targets.len() >= cap {
                break;
            }
            if !targets.contains(m) && self.graph.node(*m).is_some_and(|n| n.open) {
                targets.push(*m);
            }
        }
        for t in targets {
            let q = self.graph.node(t).unwrap().position();
            if map.sweep_check(&p, &q, self.d_safe).state == Collision::Free {
                self.graph.upsert_edge(agent, t, Collision::Free, Vec::new()).unwrap();
            }
        }
    }
}
