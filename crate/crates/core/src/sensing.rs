//! Viewpose projection model, voxel visibility queries and simulated depth scans.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Aabb, Pose, Vec3};
use crate::map::{GroundTruthWorld, OccState, VoxelIndex, VoxelMap, VoxelWalk};

/// Depth sensor: angular field of view, ray counts and maximum range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorModel {
    /// Horizontal field of view (rad).
    pub h_fov: f64,
    /// Vertical field of view (rad).
    pub v_fov: f64,
    pub h_rays: usize,
    pub v_rays: usize,
    /// Maximum sensing range (m).
    pub max_range: f64,
    /// Fixed sensor pitch (rad); positive looks up.
    pub pitch: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            h_fov: 90f64.to_radians(),
            v_fov: 60f64.to_radians(),
            h_rays: 120,
            v_rays: 80,
            max_range: 5.0,
            pitch: 0.0,
        }
    }
}

impl SensorModel {
    pub fn new(h_fov: f64, v_fov: f64, h_rays: usize, v_rays: usize, max_range: f64) -> Result<Self> {
        let s = Self {
            h_fov,
            v_fov,
            h_rays,
            v_rays,
            max_range,
            pitch: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_pitch(mut self, pitch: f64) -> Self {
        self.pitch = pitch;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("horizontal", self.h_fov), ("vertical", self.v_fov)] {
            if !(a > 0.0 && a <= TAU) {
                return Err(Error::InvalidSensor(format!(
                    "{name} field of view must lie in (0, 2pi], got {a}"
                )));
            }
        }
        if self.h_rays < 2 || self.v_rays < 2 {
            return Err(Error::InvalidSensor("at least 2 rays per axis are required".into()));
        }
        if !(self.max_range > 0.0) {
            return Err(Error::InvalidSensor("range must be positive".into()));
        }
        if self.pitch.abs() > FRAC_PI_2 {
            return Err(Error::InvalidSensor("pitch must lie in [-pi/2, pi/2]".into()));
        }
        Ok(())
    }

    /// Range must exceed the voxel size for the sensor to observe anything.
    pub fn validate_for_resolution(&self, resolution: f64) -> Result<()> {
        self.validate()?;
        if self.max_range <= resolution {
            return Err(Error::InvalidSensor(format!(
                "range {} m must exceed the map resolution {resolution} m",
                self.max_range
            )));
        }
        Ok(())
    }

    pub fn view(&self, pose: Pose) -> ViewPose<'_> {
        ViewPose { pose, sensor: self }
    }
}

/// A pose paired with a sensor model; its view volume is the range-limited FoV cone.
#[derive(Clone, Copy, Debug)]
pub struct ViewPose<'a> {
    pub pose: Pose,
    pub sensor: &'a SensorModel,
}

impl ViewPose<'_> {
    /// Range and angular containment of `p`.
    pub fn contains(&self, p: &Vec3) -> bool {
        let d = p - self.pose.position;
        let dist = d.norm();
        if dist > self.sensor.max_range || dist < 1e-9 {
            return false;
        }
        let s = self.sensor;
        if s.h_fov < TAU {
            let az = d.y.atan2(d.x);
            if wrap_angle(az - self.pose.yaw).abs() > 0.5 * s.h_fov + 1e-12 {
                return false;
            }
        }
        let el = d.z.atan2(d.x.hypot(d.y));
        (el - s.pitch).abs() <= 0.5 * s.v_fov + 1e-12
    }

    /// Whether the center of `target` is inside the view volume with no occupied voxel on the
    /// traversal from the view origin to it. Unknown voxels do not occlude.
    pub fn is_visible(&self, map: &VoxelMap, target: VoxelIndex) -> bool {
        let c = map.spec().center(target);
        if !self.contains(&c) {
            return false;
        }
        line_of_sight(map, &self.pose.position, target)
    }
}

/// True when no occupied voxel lies on the walk from `origin` to the center of `target`,
/// excluding the target itself.
pub fn line_of_sight(map: &VoxelMap, origin: &Vec3, target: VoxelIndex) -> bool {
    let spec = map.spec();
    let c = spec.center(target);
    for cell in VoxelWalk::new(spec, origin, &c) {
        let Some(idx) = spec.index_i(cell) else { return true };
        if idx == target {
            return true;
        }
        if map.state(idx) == OccState::Occupied {
            return false;
        }
    }
    true
}

pub fn is_visible(map: &VoxelMap, view: &ViewPose<'_>, target: VoxelIndex) -> bool {
    view.is_visible(map, target)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRay {
    /// Unit direction.
    pub direction: Vec3,
    /// Distance to the first surface, `None` when nothing lies within range.
    pub hit: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthScan {
    pub origin: Pose,
    pub max_range: f64,
    pub rays: Vec<ScanRay>,
}

impl DepthScan {
    pub fn hits(&self) -> usize {
        self.rays.iter().filter(|r| r.hit.is_some()).count()
    }
}

/// Unit direction for an azimuth/elevation pair.
pub fn direction(azimuth: f64, elevation: f64) -> Vec3 {
    Vec3::new(
        elevation.cos() * azimuth.cos(),
        elevation.cos() * azimuth.sin(),
        elevation.sin(),
    )
}

/// Casts the sensor's ray grid from `view` against the ground-truth obstacles.
pub fn simulate_scan(world: &GroundTruthWorld, view: &ViewPose<'_>) -> Result<DepthScan> {
    let o = view.pose.position;
    if world.is_inside_obstacle(&o) {
        return Err(Error::OriginInObstacle);
    }
    let s = view.sensor;
    let range = s.max_range;
    let reach = Aabb::from_center(o, range);
    let nearby: Vec<Aabb> = world
        .obstacles
        .iter()
        .filter(|b| b.intersects(&reach) && b.distance_to(&o) <= range)
        .copied()
        .collect();
    let mut rays = Vec::with_capacity(s.h_rays * s.v_rays);
    for i in 0..s.h_rays {
        let az = view.pose.yaw - 0.5 * s.h_fov + s.h_fov * i as f64 / (s.h_rays - 1) as f64;
        for j in 0..s.v_rays {
            let el = s.pitch - 0.5 * s.v_fov + s.v_fov * j as f64 / (s.v_rays - 1) as f64;
            let el = el.clamp(-FRAC_PI_2, FRAC_PI_2);
            let dir = direction(az, el);
            let hit = world.raycast_among(nearby.iter(), &o, &dir, range);
            rays.push(ScanRay { direction: dir, hit });
        }
    }
    Ok(DepthScan {
        origin: view.pose,
        max_range: range,
        rays,
    })
}

/// `n` evenly spaced headings starting at zero.
pub fn yaw_headings(n: usize) -> Vec<f64> {
    (0..n).map(|k| wrap_angle(TAU * k as f64 / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sensor() -> SensorModel {
        SensorModel::new(90f64.to_radians(), 60f64.to_radians(), 9, 7, 5.0).unwrap()
    }

    #[test]
    fn degenerate_sensor_rejected() {
        assert!(SensorModel::new(0.0, 0.0, 10, 10, 5.0).is_err());
        assert!(SensorModel::new(1.0, 1.0, 1, 10, 5.0).is_err());
        assert!(SensorModel::new(7.0, 1.0, 10, 10, 5.0).is_err());
        assert!(sensor().validate_for_resolution(5.0).is_err());
    }

    #[test]
    fn wall_ahead_all_rays_hit() {
        // wall 2 m ahead, large enough to fill the whole FoV within range
        let world = GroundTruthWorld {
            bounds: Aabb::new(Vec3::new(-10.0, -10.0, -10.0), Vec3::new(10.0, 10.0, 10.0)),
            obstacles: vec![Aabb::new(Vec3::new(2.0, -9.0, -9.0), Vec3::new(2.4, 9.0, 9.0))],
            start: Pose::new(Vec3::zeros(), 0.0),
        };
        let s = sensor();
        let scan = simulate_scan(&world, &s.view(Pose::new(Vec3::zeros(), 0.0))).unwrap();
        assert_eq!(scan.rays.len(), 63);
        for r in &scan.rays {
            // analytic oracle: plane x = 2 along direction d is hit at 2 / d.x
            let expected = 2.0 / r.direction.x;
            assert!((r.hit.unwrap() - expected).abs() < 1e-9);
        }
        let central = &scan.rays[4 * 7 + 3];
        assert!((central.hit.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_world_all_miss() {
        let world = GroundTruthWorld {
            bounds: Aabb::new(Vec3::new(-10.0, -10.0, -10.0), Vec3::new(10.0, 10.0, 10.0)),
            obstacles: vec![],
            start: Pose::new(Vec3::zeros(), 0.0),
        };
        let s = sensor();
        let scan = simulate_scan(&world, &s.view(Pose::new(Vec3::zeros(), 1.0))).unwrap();
        assert_eq!(scan.hits(), 0);
    }

    #[test]
    fn origin_inside_obstacle_rejected() {
        let world = GroundTruthWorld {
            bounds: Aabb::new(Vec3::new(-10.0, -10.0, -10.0), Vec3::new(10.0, 10.0, 10.0)),
            obstacles: vec![Aabb::new(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0))],
            start: Pose::new(Vec3::new(5.0, 5.0, 5.0), 0.0),
        };
        let s = sensor();
        assert!(matches!(
            simulate_scan(&world, &s.view(Pose::new(Vec3::zeros(), 0.0))),
            Err(Error::OriginInObstacle)
        ));
    }

    fn corridor_map() -> VoxelMap {
        let mut m = VoxelMap::new(&Aabb::new(Vec3::zeros(), Vec3::new(6.0, 2.0, 2.0)), 0.2).unwrap();
        for i in 0..m.len() {
            m.set(VoxelIndex(i), OccState::Free);
        }
        m
    }

    #[test]
    fn visibility_cases() {
        let mut m = corridor_map();
        let s = sensor();
        let origin = m.spec().center(m.spec().index([2, 5, 5]).unwrap());
        let view = s.view(Pose::new(origin, 0.0));
        // 0.5 * d_max ahead: 2.5 m => 12.5 voxels; pick the voxel 12 cells ahead
        let ahead = m.spec().index([14, 5, 5]).unwrap();
        assert!(view.is_visible(&m, ahead));
        let behind = m.spec().index([0, 5, 5]).unwrap();
        assert!(!view.is_visible(&m, behind));
        // oracle: the blocking voxel sits on the sampled segment
        let mid = m.spec().index([8, 5, 5]).unwrap();
        let c = m.spec().center(ahead);
        let on_segment = (0..1000).any(|k| {
            m.spec().index_at(&(origin + (c - origin) * (k as f64 / 1000.0))) == Some(mid)
        });
        assert!(on_segment);
        m.set(mid, OccState::Occupied);
        assert!(!view.is_visible(&m, ahead));
        // unknown does not occlude
        m.set(mid, OccState::Unknown);
        assert!(view.is_visible(&m, ahead));
    }

    #[test]
    fn wider_fov_preserves_visibility() {
        let m = corridor_map();
        let narrow = SensorModel::new(0.6, 0.4, 4, 4, 5.0).unwrap();
        let wide = SensorModel::new(1.6, 1.2, 4, 4, 5.0).unwrap();
        let origin = Vec3::new(1.1, 1.1, 1.1);
        for i in (0..m.len()).step_by(7) {
            let idx = VoxelIndex(i);
            for yaw in [-2.0, -0.3, 0.0, 0.7] {
                let p = Pose::new(origin, yaw);
                if narrow.view(p).is_visible(&m, idx) {
                    assert!(wide.view(p).is_visible(&m, idx));
                }
            }
        }
    }
}
