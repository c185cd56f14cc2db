use std::collections::VecDeque;

use crate::apn::{MotionLimits, NodeId};
use crate::geometry::{wrap_angle, Pose, Vec3};

const EPS: f64 = 1e-9;

/// Kinematic waypoint follower. Translation runs at `v_max` while yaw slews toward the travel
/// heading; at the final vertex the robot turns in place to the goal yaw.
#[derive(Clone, Debug)]
pub struct Robot {
    pub pose: Pose,
    pub limits: MotionLimits,
    path: VecDeque<(NodeId, Pose)>,
    goal: Option<NodeId>,
    last_vertex: Option<NodeId>,
    turns: Vec<Vec3>,
    spin_left: f64,
    distance: f64,
}

/// What happened during one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepEvent {
    pub reached: Option<NodeId>,
}

fn slew(from: f64, to: f64, max: f64) -> f64 {
    let d = wrap_angle(to - from);
    if d.abs() <= max {
        to
    } else {
        wrap_angle(from + max * d.signum())
    }
}

impl Robot {
    pub fn new(pose: Pose, limits: MotionLimits) -> Self {
        Self {
            pose,
            limits,
            path: VecDeque::new(),
            goal: None,
            last_vertex: None,
            turns: Vec::new(),
            spin_left: 0.0,
            distance: 0.0,
        }
    }

    /// Queues a turn in place by `angle` radians (counter-clockwise).
    pub fn spin(&mut self, angle: f64) {
        self.spin_left += angle;
    }

    pub fn spinning(&self) -> bool {
        self.spin_left > EPS
    }

    pub fn goal(&self) -> Option<NodeId> {
        self.goal
    }

    pub fn idle(&self) -> bool {
        self.goal.is_none() && !self.spinning()
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    /// Replaces the current path. `vertices` excludes the robot's own position and ends at `goal`.
    pub fn set_path(&mut self, vertices: Vec<(NodeId, Pose)>, goal: NodeId) {
        self.turns.push(self.pose.position);
        self.path = vertices.into();
        self.goal = Some(goal);
    }

    pub fn clear_path(&mut self) {
        self.path.clear();
        self.goal = None;
    }

    /// Path vertices around the current segment.
    pub fn anchors(&self) -> Vec<NodeId> {
        self.last_vertex
            .into_iter()
            .chain(self.path.front().map(|v| v.0))
            .collect()
    }

    pub fn take_turns(&mut self) -> Vec<Vec3> {
        std::mem::take(&mut self.turns)
    }

    pub fn clear_turns(&mut self) {
        self.turns.clear();
    }

    pub fn step(&mut self, dt: f64) -> StepEvent {
        let turn = self.limits.yawrate_max * dt;
        if self.spinning() {
            let d = self.spin_left.min(turn);
            self.pose.yaw = wrap_angle(self.pose.yaw + d);
            self.spin_left -= d;
            return StepEvent::default();
        }
        let Some(goal) = self.goal else {
            return StepEvent::default();
        };
        let Some(&(id, target)) = self.path.front() else {
            return StepEvent::default();
        };
        let offset = target.position - self.pose.position;
        let dist = offset.norm();
        if dist > EPS {
            let step = dist.min(self.limits.v_max * dt);
            let heading = offset.y.atan2(offset.x);
            if offset.xy().norm() > EPS {
                self.pose.yaw = slew(self.pose.yaw, heading, turn);
            }
            if step >= dist - EPS {
                self.pose.position = target.position;
            } else {
                self.pose.position += offset * (step / dist);
            }
            self.distance += step;
            if (target.position - self.pose.position).norm() > EPS {
                return StepEvent::default();
            }
        }
        if self.path.len() > 1 {
            self.path.pop_front();
            self.last_vertex = Some(id);
            self.turns.push(self.pose.position);
            return StepEvent::default();
        }
        // final vertex: align with the goal yaw
        if wrap_angle(target.yaw - self.pose.yaw).abs() > EPS {
            if dist > EPS {
                return StepEvent::default();
            }
            self.pose.yaw = slew(self.pose.yaw, target.yaw, turn);
            if wrap_angle(target.yaw - self.pose.yaw).abs() > EPS {
                return StepEvent::default();
            }
        }
        self.path.clear();
        self.last_vertex = Some(id);
        self.goal = None;
        StepEvent { reached: Some(goal) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn robot() -> Robot {
        Robot::new(Pose::new(Vec3::zeros(), 0.0), MotionLimits::new(1.0, 0.75).unwrap())
    }

    fn run(r: &mut Robot, steps: usize) -> Option<NodeId> {
        (0..steps).find_map(|_| r.step(0.05).reached)
    }

    #[test]
    fn reaches_goal_with_speed_limits() {
        let mut r = robot();
        let g = NodeId(5);
        r.set_path(vec![(g, Pose::new(Vec3::new(2.0, 0.0, 0.0), FRAC_PI_2))], g);
        let mut steps = 0;
        let mut prev = r.pose;
        loop {
            steps += 1;
            let ev = r.step(0.05);
            assert!((r.pose.position - prev.position).norm() <= 0.05 + 1e-9);
            assert!(wrap_angle(r.pose.yaw - prev.yaw).abs() <= 0.75 * 0.05 + 1e-9);
            prev = r.pose;
            if ev.reached == Some(g) {
                break;
            }
            assert!(steps < 1000);
        }
        // 2 m at 1 m/s then a quarter turn at 0.75 rad/s
        let expect = 40 + (FRAC_PI_2 / (0.75 * 0.05)).ceil() as usize;
        assert!((steps as i64 - expect as i64).abs() <= 1, "{steps} vs {expect}");
        assert!((r.distance() - 2.0).abs() < 1e-9);
        assert!(r.idle());
    }

    #[test]
    fn records_turn_points_and_anchors() {
        let mut r = robot();
        let a = NodeId(3);
        let g = NodeId(4);
        r.set_path(
            vec![
                (a, Pose::new(Vec3::new(1.0, 0.0, 0.0), 0.0)),
                (g, Pose::new(Vec3::new(1.0, 1.0, 0.0), 0.0)),
            ],
            g,
        );
        assert_eq!(r.anchors(), vec![a]);
        for _ in 0..21 {
            r.step(0.05);
        }
        assert_eq!(r.anchors(), vec![a, g]);
        let turns = r.take_turns();
        assert_eq!(turns.len(), 2);
        assert!((turns[1] - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-9);
        assert_eq!(run(&mut r, 400), Some(g));
    }

    #[test]
    fn spin_completes_full_turn() {
        let mut r = robot();
        r.spin(2.0 * PI);
        let n = (0..1000).take_while(|_| {
            r.step(0.05);
            r.spinning()
        });
        let steps = n.count() + 1;
        assert_eq!(steps, (2.0 * PI / (0.75 * 0.05)).ceil() as usize);
        assert!(wrap_angle(r.pose.yaw).abs() < 1e-9);
    }
}
