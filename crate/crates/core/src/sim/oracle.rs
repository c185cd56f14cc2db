use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{Pose, Vec3};
use crate::map::{GridSpec, GroundTruthWorld, OccState, VoxelIndex, VoxelMap};
use crate::sensing::{line_of_sight, yaw_headings, SensorModel};

use super::RunConfig;

pub const ORACLE_HEADINGS: usize = 16;

/// Surface voxels of the ground truth that some admissible, reachable pose can see.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageOracle {
    pub spec: GridSpec,
    pub voxels: BTreeSet<VoxelIndex>,
    /// Number of admissible reachable positions swept.
    pub positions: usize,
}

impl CoverageOracle {
    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    /// Fraction of the oracle set that is occupied in `map`.
    pub fn coverage(&self, map: &VoxelMap) -> f64 {
        if self.voxels.is_empty() {
            return 1.0;
        }
        let hit = self
            .voxels
            .iter()
            .filter(|v| map.state(**v) == OccState::Occupied)
            .count();
        hit as f64 / self.voxels.len() as f64
    }

    pub fn missed(&self, map: &VoxelMap) -> Vec<VoxelIndex> {
        self.voxels
            .iter()
            .copied()
            .filter(|v| map.state(*v) != OccState::Occupied)
            .collect()
    }
}

/// Positions on a lattice of spacing `2·r` whose clearance is at least `d_safe`, restricted to the
/// component connected to the start through admissible lattice steps.
pub fn admissible_positions(world: &GroundTruthWorld, spec: &GridSpec, d_safe: f64) -> Vec<Vec3> {
    let step = 2;
    let dims: Vec<usize> = spec.dims.iter().map(|d| d.div_ceil(step)).collect();
    let at = |c: [usize; 3]| spec.center_of_cell([(c[0] * step) as i64, (c[1] * step) as i64, (c[2] * step) as i64]);
    let ok = |p: &Vec3| world.clearance(p) >= d_safe;
    let flat = |c: [usize; 3]| (c[2] * dims[1] + c[1]) * dims[0] + c[0];
    let mut admissible = vec![false; dims[0] * dims[1] * dims[2]];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                admissible[flat([x, y, z])] = ok(&at([x, y, z]));
            }
        }
    }
    let start = world.start.position;
    let seed = (0..admissible.len())
        .filter(|i| admissible[*i])
        .map(|i| {
            let c = [i % dims[0], (i / dims[0]) % dims[1], i / (dims[0] * dims[1])];
            (c, (at(c) - start).norm())
        })
        .filter(|(c, d)| *d <= 2.0 * spec.resolution * 3f64.sqrt() && ok(&(0.5 * (at(*c) + start))))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let Some((seed, _)) = seed else {
        return Vec::new();
    };
    let mut seen = vec![false; admissible.len()];
    let mut queue = VecDeque::from([seed]);
    seen[flat(seed)] = true;
    let mut out = Vec::new();
    while let Some(c) = queue.pop_front() {
        let p = at(c);
        out.push(p);
        for (axis, delta) in [(0, -1i64), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1)] {
            let v = c[axis] as i64 + delta;
            if v < 0 || v >= dims[axis] as i64 {
                continue;
            }
            let mut n = c;
            n[axis] = v as usize;
            let i = flat(n);
            if seen[i] || !admissible[i] || !ok(&(0.5 * (p + at(n)))) {
                continue;
            }
            seen[i] = true;
            queue.push_back(n);
        }
    }
    out
}

/// Exhaustive visibility sweep over admissible positions and 16 yaw headings.
pub fn compute_ground_truth_coverage(world: &GroundTruthWorld, cfg: &RunConfig) -> Result<CoverageOracle> {
    let spec = GridSpec::new(&world.bounds, cfg.resolution)?;
    let gt = world.rasterize(&spec);
    let positions = admissible_positions(world, &spec, cfg.robot.d_safe);
    let voxels = sweep(&gt, &positions, &cfg.sensor);
    Ok(CoverageOracle {
        spec,
        voxels,
        positions: positions.len(),
    })
}

fn bucket_of(p: &Vec3, size: f64) -> [i64; 3] {
    [
        (p.x / size).floor() as i64,
        (p.y / size).floor() as i64,
        (p.z / size).floor() as i64,
    ]
}

fn sweep(gt: &VoxelMap, positions: &[Vec3], sensor: &SensorModel) -> BTreeSet<VoxelIndex> {
    let spec = gt.spec();
    const BUCKET: f64 = 1.0;
    // only occupied voxels with a free face neighbour can end a voxel walk from free space
    let mut buckets: BTreeMap<[i64; 3], Vec<VoxelIndex>> = BTreeMap::new();
    for i in 0..spec.len() {
        let idx = VoxelIndex(i);
        if gt.state(idx) == OccState::Occupied && spec.neighbors6(idx).any(|n| gt.state(n) == OccState::Free) {
            buckets.entry(bucket_of(&spec.center(idx), BUCKET)).or_default().push(idx);
        }
    }
    let headings: Vec<Pose> = yaw_headings(ORACLE_HEADINGS)
        .into_iter()
        .map(|yaw| Pose::new(Vec3::zeros(), yaw))
        .collect();
    let range = sensor.max_range;
    let mut visible = BTreeSet::new();
    for p in positions {
        let lo = bucket_of(&p.add_scalar(-range), BUCKET);
        let hi = bucket_of(&p.add_scalar(range), BUCKET);
        let views: Vec<_> = headings
            .iter()
            .map(|h| sensor.view(Pose::new(*p, h.yaw)))
            .collect();
        for (key, list) in buckets.range_mut(lo..=hi) {
            if key[1] < lo[1] || key[1] > hi[1] || key[2] < lo[2] || key[2] > hi[2] {
                continue;
            }
            list.retain(|v| {
                let c = spec.center(*v);
                let seen = views.iter().any(|view| view.contains(&c)) && line_of_sight(gt, p, *v);
                if seen {
                    visible.insert(*v);
                }
                !seen
            });
        }
    }
    visible
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aabb;
    use crate::sim::{generate_world, WorldKind, WorldParams};

    fn cfg() -> RunConfig {
        RunConfig::default()
    }

    fn room(size: f64) -> GroundTruthWorld {
        let p = WorldParams {
            rooms: [1, 1],
            furniture: 0,
            size: [size, size],
            ..WorldParams::default()
        };
        generate_world(WorldKind::Rooms, &p, 0).unwrap()
    }

    #[test]
    fn convex_room_sees_all_wall_faces() {
        let w = room(6.0);
        let o = compute_ground_truth_coverage(&w, &cfg()).unwrap();
        let spec = o.spec;
        let gt = w.rasterize(&spec);
        let free = |c: [i64; 3]| spec.index_i(c).is_some_and(|i| gt.state(i) == OccState::Free);
        let walls: BTreeSet<VoxelIndex> = (0..spec.len())
            .map(VoxelIndex)
            .filter(|i| {
                let [x, y, z] = spec.coord(*i).map(|v| v as i64);
                gt.state(*i) == OccState::Occupied
                    && [[x - 1, y, z], [x + 1, y, z], [x, y - 1, z], [x, y + 1, z]].into_iter().any(free)
            })
            .collect();
        assert!(!walls.is_empty());
        let missing = walls.difference(&o.voxels).count();
        assert_eq!(missing, 0);
        // voxel walks to floor centres at under 30 degrees of depression cross the neighbouring
        // floor voxels, so only wall faces qualify
        assert_eq!(o.voxels, walls);
        assert!(o.positions > 0);
    }

    #[test]
    fn sealed_cavity_excluded() {
        let mut w = room(8.0);
        // hollow box: 6 slabs around an empty interior of 2.4 m
        let lo = Vec3::new(4.4, 4.4, 0.4);
        let t = 0.4;
        let s = 3.2;
        let b = |a: Vec3, c: Vec3| Aabb::new(a, c);
        let hi = lo + Vec3::new(s, s, s);
        w.obstacles.extend([
            b(lo, Vec3::new(hi.x, hi.y, lo.z + t)),
            b(Vec3::new(lo.x, lo.y, hi.z - t), hi),
            b(lo, Vec3::new(lo.x + t, hi.y, hi.z)),
            b(Vec3::new(hi.x - t, lo.y, lo.z), hi),
            b(lo, Vec3::new(hi.x, lo.y + t, hi.z)),
            b(Vec3::new(lo.x, hi.y - t, lo.z), hi),
        ]);
        w.start = Pose::new(Vec3::new(2.1, 2.1, 1.7), 0.0);
        let o = compute_ground_truth_coverage(&w, &cfg()).unwrap();
        let inner_face = o.spec.index_at(&Vec3::new(lo.x + t - 0.1, lo.y + 1.5, lo.z + 1.5)).unwrap();
        let outer_face = o.spec.index_at(&Vec3::new(lo.x + 0.1, lo.y + 1.5, lo.z + 1.5)).unwrap();
        assert!(!o.voxels.contains(&inner_face));
        assert!(o.voxels.contains(&outer_face));
    }

    #[test]
    fn deterministic() {
        let w = room(5.0);
        let a = compute_ground_truth_coverage(&w, &cfg()).unwrap();
        let b = compute_ground_truth_coverage(&w, &cfg()).unwrap();
        assert_eq!(a, b);
    }
}
