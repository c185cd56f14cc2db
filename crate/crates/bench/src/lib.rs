//! Shared fixtures for the benchmarks: a generated world explored part way by a few scans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use apn_core::frontier::FrontierSet;
use apn_core::map::{GroundTruthWorld, VoxelMap};
use apn_core::sensing::{simulate_scan, DepthScan, SensorModel};
use apn_core::sim::{generate_world, WorldKind, WorldParams};
use apn_core::{Pose, Vec3};

pub struct Scene {
    pub world: GroundTruthWorld,
    pub sensor: SensorModel,
    pub map: VoxelMap,
    pub frontiers: FrontierSet,
    /// Poses the map was built from; all have full clearance.
    pub poses: Vec<Pose>,
}

impl Scene {
    pub fn new(kind: WorldKind, seed: u64, scans: usize) -> Self {
        let world = generate_world(kind, &WorldParams::for_kind(kind), seed).expect("default params are feasible");
        let sensor = SensorModel::default();
        let mut map = VoxelMap::new(&world.bounds, 0.2).expect("valid bounds");
        let mut frontiers = FrontierSet::new(*map.spec());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut poses = vec![world.start];
        while poses.len() < scans {
            let b = world.bounds;
            let p = Vec3::new(
                rng.gen_range(b.min.x..b.max.x),
                rng.gen_range(b.min.y..b.max.y),
                rng.gen_range(b.min.z..b.max.z),
            );
            if world.clearance(&p) >= 0.75 {
                poses.push(Pose::new(p, rng.gen_range(-3.0..3.0)));
            }
        }
        for pose in &poses {
            let scan = simulate_scan(&world, &sensor.view(*pose)).expect("pose inside the world");
            let changes = map.integrate_scan(&scan).expect("scan fits the map");
            frontiers.update(&map, &changes);
        }
        Self {
            world,
            sensor,
            map,
            frontiers,
            poses,
        }
    }

    pub fn scan(&self, pose: Pose) -> DepthScan {
        simulate_scan(&self.world, &self.sensor.view(pose)).expect("pose inside the world")
    }
}
