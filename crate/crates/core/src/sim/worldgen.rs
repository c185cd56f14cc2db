use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Pose, Vec3};
use crate::map::GroundTruthWorld;

/// Everything is laid out on this lattice so obstacle faces coincide with voxel faces.
const QUANTUM: f64 = 0.2;
/// Floor, ceiling and outer wall thickness. Two voxels, so the inner face never sits on the
/// map boundary.
const SHELL: f64 = 0.4;

fn q(v: f64) -> f64 {
    (v / QUANTUM).round() * QUANTUM
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorldKind {
    Rooms,
    Maze,
    Pillars,
}

impl FromStr for WorldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rooms" => Ok(Self::Rooms),
            "maze" => Ok(Self::Maze),
            "pillars" => Ok(Self::Pillars),
            _ => Err(Error::InvalidConfig(format!("unknown world kind {s:?}"))),
        }
    }
}

impl fmt::Display for WorldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rooms => "rooms",
            Self::Maze => "maze",
            Self::Pillars => "pillars",
        })
    }
}

/// Generator parameters. Sizes are interior clear dimensions; the shell is added outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldParams {
    /// Rooms and pillars: interior extent (x, y).
    pub size: [f64; 2],
    pub height: f64,
    /// Rooms: grid of rooms along x and y.
    pub rooms: [usize; 2],
    pub door_width: f64,
    pub partition: f64,
    /// Rooms: furniture boxes per room.
    pub furniture: usize,
    /// Maze: cells along x and y.
    pub cells: [usize; 2],
    pub corridor: f64,
    pub wall: f64,
    /// Pillars: number of pillars.
    pub pillars: usize,
    pub d_safe: f64,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            size: [20.0, 10.0],
            height: 3.0,
            rooms: [4, 2],
            door_width: 2.4,
            partition: 0.2,
            furniture: 1,
            cells: [8, 8],
            corridor: 2.0,
            wall: 0.4,
            pillars: 12,
            d_safe: 0.75,
        }
    }
}

impl WorldParams {
    /// Defaults sized for each kind: rooms ~20×10×3 m, maze ~20×20×2.5 m, pillars 16×16×3 m.
    pub fn for_kind(kind: WorldKind) -> Self {
        let base = Self::default();
        match kind {
            WorldKind::Rooms => base,
            WorldKind::Maze => Self { height: 2.5, ..base },
            WorldKind::Pillars => Self {
                size: [16.0, 16.0],
                ..base
            },
        }
    }
}

pub fn generate_world(kind: WorldKind, params: &WorldParams, seed: u64) -> Result<GroundTruthWorld> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = params;
    let bad = |m: String| Err(Error::InvalidWorld(m));
    if !(p.d_safe > 0.0) {
        return bad("d_safe must be positive".into());
    }
    if p.height < 2.0 * p.d_safe + QUANTUM {
        return bad(format!("height {} leaves no room for d_safe {}", p.height, p.d_safe));
    }
    let world = match kind {
        WorldKind::Rooms => rooms(p, &mut rng)?,
        WorldKind::Maze => maze(p, &mut rng)?,
        WorldKind::Pillars => pillars(p, &mut rng)?,
    };
    world.validate(p.d_safe)?;
    Ok(world)
}

/// Bounds and shell slabs around an interior box starting at the shell corner.
fn shell(ix: f64, iy: f64, h: f64) -> (Aabb, Vec<Aabb>) {
    let (x1, y1, z1) = (ix + 2.0 * SHELL, iy + 2.0 * SHELL, h + 2.0 * SHELL);
    let bounds = Aabb::new(Vec3::zeros(), Vec3::new(x1, y1, z1));
    let b = |a: [f64; 3], c: [f64; 3]| Aabb::new(Vec3::from(a), Vec3::from(c));
    let slabs = vec![
        b([0.0, 0.0, 0.0], [x1, y1, SHELL]),
        b([0.0, 0.0, z1 - SHELL], [x1, y1, z1]),
        b([0.0, 0.0, SHELL], [SHELL, y1, z1 - SHELL]),
        b([x1 - SHELL, 0.0, SHELL], [x1, y1, z1 - SHELL]),
        b([SHELL, 0.0, SHELL], [x1 - SHELL, SHELL, z1 - SHELL]),
        b([SHELL, y1 - SHELL, SHELL], [x1 - SHELL, y1, z1 - SHELL]),
    ];
    (bounds, slabs)
}

fn mid_height(h: f64) -> f64 {
    q(SHELL + h / 2.0) + QUANTUM / 2.0
}

fn rooms(p: &WorldParams, rng: &mut ChaCha8Rng) -> Result<GroundTruthWorld> {
    let [nx, ny] = p.rooms;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidWorld("at least one room is needed".into()));
    }
    let (sx, sy, h) = (q(p.size[0]), q(p.size[1]), q(p.height));
    let t = q(p.partition).max(QUANTUM);
    let (cw, ch) = (q(sx / nx as f64), q(sy / ny as f64));
    if p.door_width < 2.0 * p.d_safe {
        return Err(Error::InvalidWorld(format!(
            "door width {} is below 2·d_safe = {}",
            p.door_width,
            2.0 * p.d_safe
        )));
    }
    if cw.min(ch) < p.door_width + 2.0 * t || cw.min(ch) < 2.0 * p.d_safe + t {
        return Err(Error::InvalidWorld("rooms are too small for their doors".into()));
    }
    let sx = cw * nx as f64;
    let sy = ch * ny as f64;
    let (bounds, mut obstacles) = shell(sx, sy, h);
    let (z0, z1) = (SHELL, SHELL + h);
    let door = q(p.door_width);

    // partition walls along x = const, split by one door per room boundary
    for i in 1..nx {
        let x = SHELL + i as f64 * cw;
        for j in 0..ny {
            let (ya, yb) = (SHELL + j as f64 * ch, SHELL + (j + 1) as f64 * ch);
            push_wall_with_door(&mut obstacles, rng, door, t, ya, yb, |a, b| {
                Aabb::new(Vec3::new(x, a, z0), Vec3::new(x + t, b, z1))
            });
        }
    }
    for j in 1..ny {
        let y = SHELL + j as f64 * ch;
        for i in 0..nx {
            let (xa, xb) = (SHELL + i as f64 * cw, SHELL + (i + 1) as f64 * cw);
            push_wall_with_door(&mut obstacles, rng, door, t, xa, xb, |a, b| {
                Aabb::new(Vec3::new(a, y, z0), Vec3::new(b, y + t, z1))
            });
        }
    }

    // furniture: low boxes away from walls so every room stays connected
    let margin = 2.0 * p.d_safe + t + QUANTUM;
    for i in 0..nx {
        for j in 0..ny {
            for _ in 0..p.furniture {
                let (ax, ay) = (SHELL + i as f64 * cw + margin, SHELL + j as f64 * ch + margin);
                let (bx, by) = (SHELL + (i + 1) as f64 * cw - margin, SHELL + (j + 1) as f64 * ch - margin);
                let (fw, fd) = (q(rng.gen_range(0.6..1.4)), q(rng.gen_range(0.6..1.4)));
                if bx - ax < fw || by - ay < fd {
                    continue;
                }
                let x = q(rng.gen_range(ax..=bx - fw));
                let y = q(rng.gen_range(ay..=by - fd));
                let fh = q(rng.gen_range(0.6..1.2));
                obstacles.push(Aabb::new(Vec3::new(x, y, z0), Vec3::new(x + fw, y + fd, z0 + fh)));
            }
        }
    }

    let start = Vec3::new(
        q(SHELL + cw / 2.0) + QUANTUM / 2.0,
        q(SHELL + ch / 2.0) + QUANTUM / 2.0,
        mid_height(h),
    );
    let mut world = GroundTruthWorld {
        bounds,
        obstacles,
        start: Pose::new(start, 0.0),
    };
    // a piece of furniture may sit under the start
    world
        .obstacles
        .retain(|o| o.distance_to(&start) > p.d_safe + QUANTUM || o.max.z >= z1);
    Ok(world)
}

/// Splits the wall between `a` and `b` around a randomly placed door.
fn push_wall_with_door(
    out: &mut Vec<Aabb>,
    rng: &mut ChaCha8Rng,
    door: f64,
    t: f64,
    a: f64,
    b: f64,
    make: impl Fn(f64, f64) -> Aabb,
) {
    let lo = a + t;
    let hi = b - t - door;
    let d0 = if hi > lo { q(rng.gen_range(lo..=hi)) } else { q((a + b - door) / 2.0) };
    if d0 > a {
        out.push(make(a, d0));
    }
    if d0 + door < b {
        out.push(make(d0 + door, b));
    }
}

fn maze(p: &WorldParams, rng: &mut ChaCha8Rng) -> Result<GroundTruthWorld> {
    if p.corridor < 2.0 * p.d_safe {
        return Err(Error::InvalidWorld(format!(
            "corridor width {} is below 2·d_safe = {}",
            p.corridor,
            2.0 * p.d_safe
        )));
    }
    let [nx, ny] = p.cells;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidWorld("maze needs at least one cell".into()));
    }
    let (c, w, h) = (q(p.corridor), q(p.wall).max(QUANTUM), q(p.height));
    let pitch = c + w;
    // interior spans from the inside of the outer shell; inner walls have thickness w
    let ix = nx as f64 * pitch - w;
    let iy = ny as f64 * pitch - w;
    let (bounds, mut obstacles) = shell(ix, iy, h);
    let (z0, z1) = (SHELL, SHELL + h);

    // randomized depth-first carve; open[x][y] = (east, north)
    let mut open = vec![vec![(false, false); ny]; nx];
    let mut seen = vec![vec![false; ny]; nx];
    let mut stack = vec![(0usize, 0usize)];
    seen[0][0] = true;
    while let Some(&(x, y)) = stack.last() {
        let mut next: Vec<(usize, usize)> = Vec::new();
        if x > 0 && !seen[x - 1][y] {
            next.push((x - 1, y));
        }
        if x + 1 < nx && !seen[x + 1][y] {
            next.push((x + 1, y));
        }
        if y > 0 && !seen[x][y - 1] {
            next.push((x, y - 1));
        }
        if y + 1 < ny && !seen[x][y + 1] {
            next.push((x, y + 1));
        }
        let Some(&(a, b)) = next.choose(rng) else {
            stack.pop();
            continue;
        };
        match (a.cmp(&x), b.cmp(&y)) {
            (std::cmp::Ordering::Greater, _) => open[x][y].0 = true,
            (std::cmp::Ordering::Less, _) => open[a][b].0 = true,
            (_, std::cmp::Ordering::Greater) => open[x][y].1 = true,
            _ => open[a][b].1 = true,
        }
        seen[a][b] = true;
        stack.push((a, b));
    }

    let cell_lo = |i: usize| SHELL + i as f64 * pitch;
    for i in 0..nx {
        for j in 0..ny {
            let (x0, y0) = (cell_lo(i), cell_lo(j));
            let (x1, y1) = (x0 + c, y0 + c);
            if i + 1 < nx && !open[i][j].0 {
                obstacles.push(Aabb::new(Vec3::new(x1, y0, z0), Vec3::new(x1 + w, y1, z1)));
            }
            if j + 1 < ny && !open[i][j].1 {
                obstacles.push(Aabb::new(Vec3::new(x0, y1, z0), Vec3::new(x1, y1 + w, z1)));
            }
            if i + 1 < nx && j + 1 < ny {
                obstacles.push(Aabb::new(Vec3::new(x1, y1, z0), Vec3::new(x1 + w, y1 + w, z1)));
            }
        }
    }
    let start = Vec3::new(SHELL + q(c / 2.0) + QUANTUM / 2.0, SHELL + q(c / 2.0) + QUANTUM / 2.0, mid_height(h));
    Ok(GroundTruthWorld {
        bounds,
        obstacles,
        start: Pose::new(start, 0.0),
    })
}

fn pillars(p: &WorldParams, rng: &mut ChaCha8Rng) -> Result<GroundTruthWorld> {
    let (sx, sy, h) = (q(p.size[0]), q(p.size[1]), q(p.height));
    let (bounds, mut obstacles) = shell(sx, sy, h);
    let (z0, z1) = (SHELL, SHELL + h);
    let start = Vec3::new(SHELL + 1.5 + QUANTUM / 2.0, SHELL + 1.5 + QUANTUM / 2.0, mid_height(h));
    let gap = 2.0 * p.d_safe + 2.0 * QUANTUM;
    let mut placed: Vec<Aabb> = Vec::new();
    for _ in 0..p.pillars * 20 {
        if placed.len() == p.pillars {
            break;
        }
        let (w, d) = (q(rng.gen_range(0.4..1.2)), q(rng.gen_range(0.4..1.2)));
        let x = q(rng.gen_range(SHELL + gap..SHELL + sx - gap - w));
        let y = q(rng.gen_range(SHELL + gap..SHELL + sy - gap - d));
        let b = Aabb::new(Vec3::new(x, y, z0), Vec3::new(x + w, y + d, z1));
        if b.distance_to(&start) <= p.d_safe + gap || placed.iter().any(|o| o.inflate(gap).intersects(&b)) {
            continue;
        }
        placed.push(b);
    }
    obstacles.extend(placed);
    Ok(GroundTruthWorld {
        bounds,
        obstacles,
        start: Pose::new(start, 0.0),
    })
}
