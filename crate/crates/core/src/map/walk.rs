//! Incremental grid traversal of a line segment.

use super::grid::GridSpec;
use crate::geometry::Vec3;

/// Iterates the cells a segment passes through, in order, starting at the cell that holds
/// the start point. Stops at the cell holding the end point or when the segment leaves the
/// grid. On exact ties between boundary crossings the x axis steps first, then y, then z.
pub struct VoxelWalk {
    cell: [i64; 3],
    end: [i64; 3],
    step: [i64; 3],
    t_max: [f64; 3],
    t_delta: [f64; 3],
    dims: [i64; 3],
    done: bool,
}

impl VoxelWalk {
    pub fn new(spec: &GridSpec, from: &Vec3, to: &Vec3) -> Self {
        let res = spec.resolution;
        let ga = (from - spec.origin) / res;
        let gb = (to - spec.origin) / res;
        let d = gb - ga;
        let cell = [ga.x.floor() as i64, ga.y.floor() as i64, ga.z.floor() as i64];
        let end = [gb.x.floor() as i64, gb.y.floor() as i64, gb.z.floor() as i64];
        let mut step = [0i64; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for i in 0..3 {
            if d[i] > 0.0 {
                step[i] = 1;
                t_delta[i] = 1.0 / d[i];
                t_max[i] = ((cell[i] + 1) as f64 - ga[i]) / d[i];
            } else if d[i] < 0.0 {
                step[i] = -1;
                t_delta[i] = -1.0 / d[i];
                t_max[i] = (cell[i] as f64 - ga[i]) / d[i];
            }
        }
        let dims = [spec.dims[0] as i64, spec.dims[1] as i64, spec.dims[2] as i64];
        let inside = (0..3).all(|i| cell[i] >= 0 && cell[i] < dims[i]);
        Self {
            cell,
            end,
            step,
            t_max,
            t_delta,
            dims,
            done: !inside,
        }
    }
}

impl Iterator for VoxelWalk {
    type Item = [i64; 3];

    fn next(&mut self) -> Option<[i64; 3]> {
        if self.done {
            return None;
        }
        let current = self.cell;
        if current == self.end {
            self.done = true;
            return Some(current);
        }
        let mut axis = 0;
        for i in 1..3 {
            if self.t_max[i] < self.t_max[axis] {
                axis = i;
            }
        }
        if self.t_max[axis] > 1.0 {
            // end cell missed through rounding; the segment is exhausted
            self.done = true;
            return Some(current);
        }
        self.cell[axis] += self.step[axis];
        self.t_max[axis] += self.t_delta[axis];
        if self.cell[axis] < 0 || self.cell[axis] >= self.dims[axis] {
            self.done = true;
        }
        Some(current)
    }
}
