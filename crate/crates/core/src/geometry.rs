//! Small geometric vocabulary shared by every module: poses, boxes and angle helpers.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

/// Absolute wrapped yaw difference in `[0, pi]`.
pub fn yaw_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Yaw-only robot or view pose. Roll and pitch are fixed to zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub yaw: f64,
}

impl Pose {
    pub fn new(position: Vec3, yaw: f64) -> Self {
        Self {
            position,
            yaw: wrap_angle(yaw),
        }
    }

    /// Pose at `position` whose yaw faces `target`.
    pub fn facing(position: Vec3, target: &Vec3) -> Self {
        let d = target - position;
        Self::new(position, d.y.atan2(d.x))
    }
}

/// Axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn from_point(p: Vec3) -> Self {
        Self { min: p, max: p }
    }

    pub fn from_center(center: Vec3, half: f64) -> Self {
        let h = Vec3::repeat(half);
        Self {
            min: center - h,
            max: center + h,
        }
    }

    pub fn is_valid(&self) -> bool {
        (0..3).all(|i| self.min[i] <= self.max[i])
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x * e.y * e.z
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.contains(&other.min) && self.contains(&other.max)
    }

    pub fn extend(&mut self, p: &Vec3) {
        for i in 0..3 {
            self.min[i] = self.min[i].min(p[i]);
            self.max[i] = self.max[i].max(p[i]);
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut out = *self;
        out.extend(&other.min);
        out.extend(&other.max);
        out
    }

    pub fn inflate(&self, d: f64) -> Aabb {
        let v = Vec3::repeat(d);
        Aabb {
            min: self.min - v,
            max: self.max + v,
        }
    }

    pub fn intersection(&self, other: &Aabb) -> Option<Aabb> {
        let out = Aabb {
            min: self.min.sup(&other.min),
            max: self.max.inf(&other.max),
        };
        out.is_valid().then_some(out)
    }

    /// True when the boxes share interior volume; touching faces do not count.
    pub fn overlaps_interior(&self, other: &Aabb, eps: f64) -> bool {
        (0..3).all(|i| self.min[i] + eps < other.max[i] && other.min[i] + eps < self.max[i])
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= other.max[i] && other.min[i] <= self.max[i])
    }

    /// Euclidean distance from `p` to the box (zero inside).
    pub fn distance_to(&self, p: &Vec3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            let d = (self.min[i] - p[i]).max(p[i] - self.max[i]).max(0.0);
            s += d * d;
        }
        s.sqrt()
    }

    /// Slab test. Returns the entry distance along `dir` (unit) if the ray hits within `max_t`.
    pub fn ray_entry(&self, origin: &Vec3, dir: &Vec3, max_t: f64) -> Option<f64> {
        let mut t0 = 0.0_f64;
        let mut t1 = max_t;
        for i in 0..3 {
            if dir[i].abs() < 1e-12 {
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[i];
            let mut near = (self.min[i] - origin[i]) * inv;
            let mut far = (self.max[i] - origin[i]) * inv;
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }

    /// Distance between the segment `a..b` and the box.
    pub fn segment_distance(&self, a: &Vec3, b: &Vec3) -> f64 {
        // point-to-box distance along a segment is convex in the parameter
        let f = |t: f64| self.distance_to(&(a + (b - a) * t));
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..60 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) <= f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0))
    }
}

/// Distance from `p` to the segment `a..b`.
pub fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= f64::EPSILON {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Segment-aligned box with a square cross-section, used as an edge's traversal volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obb {
    pub center: Vec3,
    /// Orthonormal axes; `axes[0]` runs along the segment.
    pub axes: [Vec3; 3],
    pub half_extents: Vec3,
}

impl Obb {
    /// Box enclosing the segment `a..b` swept by a sphere of radius `half_width`.
    pub fn around_segment(a: &Vec3, b: &Vec3, half_width: f64) -> Self {
        let d = b - a;
        let len = d.norm();
        let x = if len > 1e-12 { d / len } else { Vec3::x() };
        let helper = if x.z.abs() < 0.9 { Vec3::z() } else { Vec3::x() };
        let y = helper.cross(&x).normalize();
        let z = x.cross(&y);
        Self {
            center: (a + b) * 0.5,
            axes: [x, y, z],
            half_extents: Vec3::new(0.5 * len + half_width, half_width, half_width),
        }
    }

    pub fn inflate(&self, d: f64) -> Obb {
        Obb {
            half_extents: self.half_extents.add_scalar(d),
            ..*self
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        let r = p - self.center;
        (0..3).all(|i| r.dot(&self.axes[i]).abs() <= self.half_extents[i])
    }

    pub fn aabb(&self) -> Aabb {
        let mut ext = Vec3::zeros();
        for i in 0..3 {
            for k in 0..3 {
                ext[i] += self.axes[k][i].abs() * self.half_extents[k];
            }
        }
        Aabb::new(self.center - ext, self.center + ext)
    }

    /// Interval of `x` for which `(x, y, z)` lies inside the box, if any.
    pub fn row_interval(&self, y: f64, z: f64) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..3 {
            let a = self.axes[i];
            let h = self.half_extents[i];
            let rest = (y - self.center.y) * a.y + (z - self.center.z) * a.z;
            if a.x.abs() < 1e-12 {
                if rest.abs() > h {
                    return None;
                }
                continue;
            }
            let mut t0 = (-h - rest) / a.x + self.center.x;
            let mut t1 = (h - rest) / a.x + self.center.x;
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            lo = lo.max(t0);
            hi = hi.min(t1);
        }
        (lo <= hi).then_some((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5) - 0.5).abs() < 1e-12);
        assert!((yaw_distance(PI - 0.1, -PI + 0.1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn ray_box_entry() {
        let b = Aabb::new(Vec3::new(2.0, -1.0, -1.0), Vec3::new(3.0, 1.0, 1.0));
        let t = b.ray_entry(&Vec3::zeros(), &Vec3::x(), 10.0).unwrap();
        assert!((t - 2.0).abs() < 1e-12);
        assert!(b.ray_entry(&Vec3::zeros(), &-Vec3::x(), 10.0).is_none());
        assert!(b.ray_entry(&Vec3::zeros(), &Vec3::x(), 1.5).is_none());
    }

    #[test]
    fn segment_box_distance_matches_sampling() {
        let b = Aabb::new(Vec3::new(1.0, 1.0, 0.0), Vec3::new(2.0, 2.0, 1.0));
        let a = Vec3::new(0.0, 0.0, 0.5);
        let c = Vec3::new(3.0, 0.0, 0.5);
        let brute = (0..=3000)
            .map(|i| b.distance_to(&(a + (c - a) * (i as f64 / 3000.0))))
            .fold(f64::INFINITY, f64::min);
        assert!((b.segment_distance(&a, &c) - brute).abs() < 1e-6);
    }

    #[test]
    fn obb_row_interval_agrees_with_contains() {
        let obb = Obb::around_segment(&Vec3::new(0.3, 0.2, 0.1), &Vec3::new(2.1, 1.7, 0.9), 0.5);
        for (y, z) in [(0.5, 0.4), (1.0, 0.5), (2.2, 1.0), (-0.5, 0.0)] {
            let iv = obb.row_interval(y, z);
            for i in 0..400 {
                let x = -1.0 + i as f64 * 0.01;
                let inside = obb.contains(&Vec3::new(x, y, z));
                let in_iv = iv.map_or(false, |(lo, hi)| x >= lo - 1e-9 && x <= hi + 1e-9);
                assert_eq!(inside, in_iv, "x={x} y={y} z={z}");
            }
        }
    }
}
