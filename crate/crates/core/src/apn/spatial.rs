use std::collections::HashMap;

use super::NodeId;
use crate::geometry::Vec3;

/// Uniform hash grid over node positions.
#[derive(Clone, Debug)]
pub struct SpatialHash {
    cell: f64,
    cells: HashMap<[i64; 3], Vec<(NodeId, Vec3)>>,
    len: usize,
}

impl SpatialHash {
    pub fn new(cell: f64) -> Self {
        Self {
            cell,
            cells: HashMap::new(),
            len: 0,
        }
    }

    fn key(&self, p: &Vec3) -> [i64; 3] {
        [
            (p.x / self.cell).floor() as i64,
            (p.y / self.cell).floor() as i64,
            (p.z / self.cell).floor() as i64,
        ]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, id: NodeId, p: Vec3) {
        let k = self.key(&p);
        self.cells.entry(k).or_default().push((id, p));
        self.len += 1;
    }

    pub fn remove(&mut self, id: NodeId, p: &Vec3) {
        let k = self.key(p);
        if let Some(v) = self.cells.get_mut(&k) {
            if let Some(i) = v.iter().position(|(n, _)| *n == id) {
                v.swap_remove(i);
                self.len -= 1;
            }
            if v.is_empty() {
                self.cells.remove(&k);
            }
        }
    }

    /// Nodes within `r` of `p` with their distances, sorted by uid.
    pub fn within(&self, p: &Vec3, r: f64) -> Vec<(NodeId, f64)> {
        let lo = self.key(&p.add_scalar(-r));
        let hi = self.key(&p.add_scalar(r));
        let mut out = Vec::new();
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    if let Some(v) = self.cells.get(&[x, y, z]) {
                        for (id, q) in v {
                            let d = (q - p).norm();
                            if d <= r {
                                out.push((*id, d));
                            }
                        }
                    }
                }
            }
        }
        out.sort_by_key(|(id, _)| *id);
        out
    }

    /// Closest node; ties go to the smaller uid.
    pub fn nearest(&self, p: &Vec3) -> Option<(NodeId, f64)> {
        if self.len == 0 {
            return None;
        }
        let pick = |v: Vec<(NodeId, f64)>| {
            v.into_iter()
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        };
        let mut r = self.cell;
        for _ in 0..8 {
            let found = self.within(p, r);
            if !found.is_empty() {
                return pick(found);
            }
            r *= 2.0;
        }
        pick(
            self.cells
                .values()
                .flatten()
                .map(|(id, q)| (*id, (q - p).norm()))
                .collect(),
        )
    }
}
