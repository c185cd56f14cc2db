use std::f64::consts::PI;

use rand::Rng;

use super::{visible_frontiers, Dfr};
use crate::apn::{NodeId, NodeOrigin};
use crate::frontier::FrontierSet;
use crate::geometry::{Pose, Vec3};
use crate::map::{ChangeSet, Collision, VoxelIndex, VoxelMap};
use crate::sensing::{direction, SensorModel};

/// Draws a viewpose from the spherical shell around `target` whose elevation keeps the target
/// inside the vertical field of view; the pose yaw faces the target.
pub fn sample_shell(target: &Vec3, sensor: &SensorModel, r_min: f64, r_max: f64, rng: &mut impl Rng) -> Pose {
    let r = rng.gen_range(r_min..=r_max);
    let az = rng.gen_range(-PI..PI);
    // the view looks back at the target, so its elevation is the negated offset elevation
    let half = 0.49 * sensor.v_fov;
    let lo = (-sensor.pitch - half).max(-0.5 * PI);
    let hi = (-sensor.pitch + half).min(0.5 * PI);
    let el = rng.gen_range(lo..=hi);
    let p = target + direction(az, el) * r;
    Pose::facing(p, target)
}

impl Dfr {
    /// Frontier-guided coverage sampling over the non-covered frontiers.
    pub fn sample_coverage_views(
        &mut self,
        map: &VoxelMap,
        frontiers: &FrontierSet,
        changes: &ChangeSet,
        rng: &mut impl Rng,
    ) -> Vec<NodeId> {
        let spec = *map.spec();
        let local = self.local_box(changes, self.resolution);
        let mut queue: Vec<VoxelIndex> = Vec::new();
        for (f, _) in frontiers.iter() {
            if self.vis.is_covered(f) {
                continue;
            }
            let inside = !self.global_only && local.is_some_and(|b| b.contains(&spec.center(f)));
            let p = if inside { self.cfg.p_local } else { self.cfg.p_global };
            if rng.gen::<f64>() < p {
                queue.push(f);
            }
        }

        let bounds = map.bounds();
        let r_min = 2.0 * self.resolution;
        let r_max = 0.9 * self.sensor.max_range;
        let mut added = Vec::new();
        for f in queue {
            if self.vis.is_covered(f) {
                continue;
            }
            let target = spec.center(f);
            for _ in 0..self.cfg.n_attempt {
                let pose = sample_shell(&target, &self.sensor, r_min, r_max, rng);
                if !bounds.contains(&pose.position) {
                    continue;
                }
                if map.sphere_check(&pose.position, self.d_safe).state != Collision::Free {
                    continue;
                }
                let view = self.sensor.view(pose);
                if !view.is_visible(map, f) {
                    continue;
                }
                let seen = visible_frontiers(map, frontiers, &view);
                let v = self.graph.add_node(pose, NodeOrigin::View);
                self.vis.set_view(v, seen);
                self.sync_gain(v);
                self.dirty.insert(v);
                added.push(v);
                break;
            }
        }
        added
    }
}
