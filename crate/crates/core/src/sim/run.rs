use std::path::{Path, PathBuf};
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::apn::NodeId;
use crate::dfr::{AgentUpdate, Dfr};
use crate::error::{Error, Result};
use crate::frontier::{FrontierDelta, FrontierSet};
use crate::geometry::Pose;
use crate::map::{ChangeSet, GroundTruthWorld, VoxelMap};
use crate::planner::{plan_cycle, select_goal, PlanCache, PlannerConfig};
use crate::sensing::simulate_scan;

use super::metrics::{self, CycleDiagnostics, CycleRecord, PlanTrace, RunResult, StopReason, Summary};
use super::oracle::compute_ground_truth_coverage;
use super::robot::Robot;
use super::RunConfig;

/// Tolerance on the ground-truth clearance before a step counts as a safety violation.
const SAFETY_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub summary: Summary,
    pub records: Vec<CycleRecord>,
    pub diagnostics: Vec<CycleDiagnostics>,
    pub traces: Vec<PlanTrace>,
    pub map: VoxelMap,
    pub frontiers: FrontierSet,
    /// Final roadmap state, as seen by the roadmap loop.
    pub dfr: Dfr,
}

struct Request {
    cycle: usize,
    changes: ChangeSet,
    delta: FrontierDelta,
    agent: AgentUpdate,
}

/// What the robot should do with its current path.
#[derive(Clone, Debug)]
enum PathCommand {
    Keep,
    Follow(Vec<(NodeId, Pose)>, NodeId),
    Stop,
}

struct Response {
    record: CycleRecord,
    diag: CycleDiagnostics,
    trace: PlanTrace,
    path: PathCommand,
    /// No NBV was reachable this cycle.
    no_plan: bool,
}

/// Roadmap side of the pipeline: owns the roadmap, the visibility index and a mirror of the
/// frontier set kept in step through deltas.
struct Brain {
    dfr: Dfr,
    mirror: FrontierSet,
    cache: PlanCache,
    planner: PlannerConfig,
    goal: Option<NodeId>,
    /// Path handed to the robot for `goal`, starting at the agent node.
    route: Vec<NodeId>,
    rng: ChaCha8Rng,
    debug_checks: bool,
}

impl Brain {
    fn think(&mut self, map: &VoxelMap, req: Request) -> Response {
        self.mirror.apply(&req.delta);
        let t0 = Instant::now();
        let report = self
            .dfr
            .cycle(map, &self.mirror, &req.changes, &req.delta, &req.agent, &mut self.rng);
        let t_dfr = t0.elapsed().as_secs_f64() * 1e3;
        if req.agent.reached.is_some() && req.agent.reached == self.goal {
            self.goal = None;
        }

        let t1 = Instant::now();
        let graph = &self.dfr.graph;
        let (plan, cache) = plan_cycle(graph, &self.cache, &self.planner, &mut self.rng);
        self.cache = cache;
        let prev_goal = self.goal;
        self.goal = select_goal(&plan, self.goal, graph, self.planner.hysteresis);
        let route_ok = self.route.windows(2).skip(1).all(|w| graph.edge(w[0], w[1]).is_some_and(|e| e.is_free()));
        let path = match self.goal {
            Some(g) if prev_goal == Some(g) && route_ok && self.route.len() > 1 => PathCommand::Keep,
            Some(g) => match graph.shortest_path(graph.agent(), g, true) {
                Some((nodes, _)) if nodes.len() > 1 => {
                    let verts = nodes[1..]
                        .iter()
                        .map(|n| (*n, graph.node(*n).unwrap().pose))
                        .collect();
                    self.route = nodes;
                    PathCommand::Follow(verts, g)
                }
                _ => {
                    self.goal = None;
                    self.route.clear();
                    PathCommand::Stop
                }
            },
            None => {
                self.route.clear();
                PathCommand::Stop
            }
        };
        let t_plan = t1.elapsed().as_secs_f64() * 1e3;

        let invariant_error = if self.debug_checks {
            self.dfr.check_invariants().err()
        } else {
            None
        };

        let free_m3 = map.counts().free as f64 * map.resolution().powi(3);
        let nodes = graph.len();
        let record = CycleRecord {
            cycle: req.cycle,
            frontiers: self.mirror.len(),
            covered_frontiers: self.dfr.vis.covered_count(),
            nbv_count: graph.nbvs().count(),
            node_count: nodes,
            edge_count: graph.free_edge_count(),
            cluster_count: graph.clusters().len(),
            t_dfr_ms: t_dfr,
            t_plan_ms: t_plan,
            ..Default::default()
        };
        let diag = CycleDiagnostics {
            prune: report.prune,
            stages: report.timings,
            theta_n: if free_m3 > 0.0 { nodes as f64 / (free_m3 / 100.0) } else { 0.0 },
            theta_e: graph.edge_density(),
            invariant_error,
        };
        let trace = PlanTrace {
            cycle: req.cycle,
            cluster_seq: plan.cluster_seq.clone(),
            view_seq: plan.view_seq.clone(),
            costs: [plan.cluster_cost, plan.view_cost],
            generations: [plan.cluster_generations, plan.view_generations],
            goal: self.goal,
        };
        self.dfr.set_global_only(plan.is_empty());
        Response {
            record,
            diag,
            trace,
            path,
            no_plan: plan.is_empty(),
        }
    }
}

/// Mapping side state: ground truth, map, frontiers and what has accumulated since the last
/// hand-off to the roadmap loop.
struct Mapper<'w> {
    world: &'w GroundTruthWorld,
    cfg: &'w RunConfig,
    map: VoxelMap,
    frontiers: FrontierSet,
    /// Frontier labels as of the last hand-off.
    base: FrontierSet,
    changes: ChangeSet,
    delta: FrontierDelta,
}

impl Mapper<'_> {
    fn integrate(&mut self, changes: ChangeSet) {
        let d = self.frontiers.update(&self.map, &changes);
        let base = &self.base;
        self.delta.merge(d, |i| base.get(i));
        self.changes.merge(changes);
    }

    fn scan(&mut self, pose: Pose) -> Result<()> {
        let scan = simulate_scan(self.world, &self.cfg.sensor.view(pose))?;
        let changes = self.map.integrate_scan(&scan)?;
        self.integrate(changes);
        Ok(())
    }

    fn take(&mut self) -> (ChangeSet, FrontierDelta) {
        let delta = std::mem::take(&mut self.delta);
        self.base.apply(&delta);
        (std::mem::take(&mut self.changes), delta)
    }
}

/// Completion test for an exhausted roadmap. The first idle cycle without a reachable view
/// switches sampling to global-only; `limit` more such cycles end the run.
struct StallCounter {
    streak: usize,
    limit: usize,
}

impl StallCounter {
    fn new(limit: usize) -> Self {
        Self { streak: 0, limit }
    }

    fn observe(&mut self, no_plan: bool, idle: bool) -> bool {
        if no_plan && idle {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        self.streak > self.limit
    }
}

fn steps_per(period: f64, dt: f64) -> usize {
    ((period / dt).round() as usize).max(1)
}

/// Loads the world named in the configuration.
pub fn load_world(cfg: &RunConfig) -> Result<GroundTruthWorld> {
    let path = cfg
        .world
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("no world file given".into()))?;
    GroundTruthWorld::load(path)
}

/// Runs exploration on `world` and writes artifacts when `cfg.output` is set.
pub fn run_exploration(world: &GroundTruthWorld, cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let d_safe = cfg.robot.d_safe;
    world.validate(d_safe)?;
    let limits = cfg.robot.limits()?;

    let map = VoxelMap::new(&world.bounds, cfg.resolution)?;
    let spec = *map.spec();
    let mut mapper = Mapper {
        world,
        cfg,
        map,
        frontiers: FrontierSet::new(spec),
        base: FrontierSet::new(spec),
        changes: ChangeSet::new(),
        delta: FrontierDelta::default(),
    };
    // the start volume is known to be free
    let start = world.start.position;
    let cleared = mapper
        .map
        .clear_sphere(&start, cfg.start_clear_radius, |i| !world.voxel_occupied(&spec, i));
    mapper.integrate(cleared);

    let dfr = Dfr::new(world.start, cfg.sensor, limits, d_safe, cfg.resolution, cfg.dfr.clone())?;
    let mut brain = Brain {
        dfr,
        mirror: FrontierSet::new(spec),
        cache: PlanCache::default(),
        planner: cfg.planner.clone(),
        goal: None,
        route: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        debug_checks: cfg.debug_checks,
    };
    let mut robot = Robot::new(world.start, limits);
    if cfg.initial_spin {
        robot.spin(std::f64::consts::TAU);
    }

    let scan_every = steps_per(1.0 / cfg.scan_rate_hz, cfg.dt);
    let cycle_every = steps_per(cfg.dfr_period_s, cfg.dt);
    let mut log = RunLog::default();
    let mut violations = 0usize;
    let mut k = 0usize;
    let mut reached: Option<NodeId> = None;
    let mut stall = StallCounter::new(cfg.stall_cycles);

    let stop = if cfg.deterministic {
        loop {
            let t = k as f64 * cfg.dt;
            let forced = reached.is_some();
            if k.is_multiple_of(scan_every) || forced {
                mapper.scan(robot.pose)?;
            }
            if mapper.frontiers.is_empty() {
                break StopReason::NoFrontiers;
            }
            if k.is_multiple_of(cycle_every) || forced {
                let agent = AgentUpdate {
                    pose: robot.pose,
                    turns: robot.take_turns(),
                    anchors: robot.anchors(),
                    reached: reached.take(),
                };
                let (changes, delta) = mapper.take();
                let req = Request {
                    cycle: log.records.len(),
                    changes,
                    delta,
                    agent,
                };
                let resp = brain.think(&mapper.map, req);
                let no_plan = resp.no_plan;
                apply_path(&mut robot, resp.path.clone());
                let stalled = stall.observe(no_plan, robot.idle());
                log.push(resp, &mapper, &robot, t);
                if stalled {
                    break StopReason::NoReachableViews;
                }
            }
            if t >= cfg.t_max {
                break StopReason::Timeout;
            }
            reached = robot.step(cfg.dt).reached;
            violations += safety_check(world, &robot, d_safe);
            k += 1;
        }
    } else {
        let (brain_out, stop) = run_pipelined(world, cfg, &mut mapper, brain, &mut robot, &mut log, &mut violations, scan_every, cycle_every, &mut k)?;
        brain = brain_out;
        stop
    };

    let t_total = k as f64 * cfg.dt;
    let coverage = if cfg.compute_coverage {
        Some(compute_ground_truth_coverage(world, cfg)?.coverage(&mapper.map))
    } else {
        None
    };
    let summary = log.summary(&mapper.map, t_total, coverage, stop, robot.distance(), violations, cfg.seed);
    let outcome = RunOutcome {
        summary,
        records: log.records,
        diagnostics: log.diagnostics,
        traces: log.traces,
        map: mapper.map,
        frontiers: mapper.frontiers,
        dfr: brain.dfr,
    };
    if let Some(dir) = &cfg.output {
        write_artifacts(dir, &outcome, cfg)?;
    }
    Ok(outcome)
}

fn apply_path(robot: &mut Robot, path: PathCommand) {
    match path {
        PathCommand::Keep => {}
        PathCommand::Follow(verts, goal) => robot.set_path(verts, goal),
        PathCommand::Stop => robot.clear_path(),
    }
}

fn safety_check(world: &GroundTruthWorld, robot: &Robot, d_safe: f64) -> usize {
    let c = world.clearance(&robot.pose.position);
    if c < d_safe - SAFETY_TOL {
        log::warn!("safety violation: clearance {c:.3} m at {:?}", robot.pose.position);
        1
    } else {
        0
    }
}

#[derive(Default)]
struct RunLog {
    records: Vec<CycleRecord>,
    diagnostics: Vec<CycleDiagnostics>,
    traces: Vec<PlanTrace>,
}

impl RunLog {
    fn push(&mut self, resp: Response, mapper: &Mapper<'_>, robot: &Robot, t: f64) {
        let counts = mapper.map.counts();
        let mut r = resp.record;
        r.sim_time_s = t;
        r.voxels_occ = counts.occupied;
        r.voxels_free = counts.free;
        r.distance_m = robot.distance();
        if r.cycle.is_multiple_of(50) {
            log::info!(
                "cycle {} t={:.1}s frontiers={} nbv={} nodes={} t_dfr={:.1}ms",
                r.cycle,
                t,
                r.frontiers,
                r.nbv_count,
                r.node_count,
                r.t_dfr_ms
            );
        }
        self.records.push(r);
        self.diagnostics.push(resp.diag);
        self.traces.push(resp.trace);
    }

    #[allow(clippy::too_many_arguments)]
    fn summary(
        &self,
        map: &VoxelMap,
        t_total: f64,
        coverage: Option<f64>,
        stop: StopReason,
        distance: f64,
        violations: usize,
        seed: u64,
    ) -> Summary {
        let counts = map.counts();
        let vox = map.resolution().powi(3);
        let rate = |n: usize| if t_total > 0.0 { n as f64 * vox / t_total } else { 0.0 };
        let n = self.records.len().max(1) as f64;
        let mean = |f: &dyn Fn(usize) -> f64| (0..self.records.len()).map(f).sum::<f64>() / n;
        Summary {
            t_total_s: t_total,
            coverage_ratio: coverage,
            eta_occ: rate(counts.occupied),
            eta_total: rate(counts.occupied + counts.free),
            theta_n: mean(&|i| self.diagnostics[i].theta_n),
            theta_e: mean(&|i| self.diagnostics[i].theta_e),
            result: if stop == StopReason::Timeout { RunResult::Timeout } else { RunResult::Completed },
            stop_reason: stop,
            cycles: self.records.len(),
            distance_m: distance,
            safety_violations: violations,
            t_dfr_mean_ms: mean(&|i| self.records[i].t_dfr_ms),
            t_plan_mean_ms: mean(&|i| self.records[i].t_plan_ms),
            seed,
        }
    }
}

/// Two-thread mode. Each request carries the robot state predicted one period ahead, so the plan
/// that comes back applies exactly when the robot gets there.
#[allow(clippy::too_many_arguments)]
fn run_pipelined(
    world: &GroundTruthWorld,
    cfg: &RunConfig,
    mapper: &mut Mapper<'_>,
    brain: Brain,
    robot: &mut Robot,
    log: &mut RunLog,
    violations: &mut usize,
    scan_every: usize,
    cycle_every: usize,
    k: &mut usize,
) -> Result<(Brain, StopReason)> {
    let (tx, rx): (SyncSender<(Request, Arc<VoxelMap>)>, Receiver<_>) = sync_channel(1);
    let (reply_tx, reply_rx) = sync_channel::<Response>(1);
    let worker = std::thread::spawn(move || {
        let mut brain = brain;
        for (req, map) in rx {
            if reply_tx.send(brain.think(&map, req)).is_err() {
                break;
            }
        }
        brain
    });

    let d_safe = cfg.robot.d_safe;
    let mut stall = StallCounter::new(cfg.stall_cycles);
    let mut in_flight: Option<f64> = None;
    let mut result: Result<StopReason> = Ok(StopReason::Timeout);
    loop {
        let t = *k as f64 * cfg.dt;
        if k.is_multiple_of(scan_every) {
            if let Err(e) = mapper.scan(robot.pose) {
                result = Err(e);
                break;
            }
        }
        if mapper.frontiers.is_empty() {
            result = Ok(StopReason::NoFrontiers);
            break;
        }
        if k.is_multiple_of(cycle_every) {
            if let Some(t_req) = in_flight.take() {
                let resp = reply_rx.recv().expect("roadmap loop alive");
                let no_plan = resp.no_plan;
                robot.clear_turns();
                apply_path(robot, resp.path.clone());
                let stalled = stall.observe(no_plan, robot.idle());
                log.push(resp, mapper, robot, t_req);
                if stalled {
                    result = Ok(StopReason::NoReachableViews);
                    break;
                }
            }
            let mut ghost = robot.clone();
            ghost.clear_turns();
            let mut turns = robot.take_turns();
            let mut reached = None;
            for _ in 0..cycle_every {
                if let Some(g) = ghost.step(cfg.dt).reached {
                    reached = Some(g);
                }
            }
            turns.extend(ghost.take_turns());
            let agent = AgentUpdate {
                pose: ghost.pose,
                turns,
                anchors: ghost.anchors(),
                reached,
            };
            let (changes, delta) = mapper.take();
            let req = Request {
                cycle: log.records.len(),
                changes,
                delta,
                agent,
            };
            if tx.send((req, Arc::new(mapper.map.clone()))).is_err() {
                break;
            }
            in_flight = Some(t);
        }
        if t >= cfg.t_max {
            result = Ok(StopReason::Timeout);
            break;
        }
        robot.step(cfg.dt);
        *violations += safety_check(world, robot, d_safe);
        *k += 1;
    }
    if in_flight.is_some() {
        if let Ok(resp) = reply_rx.recv() {
            log.push(resp, mapper, robot, *k as f64 * cfg.dt);
        }
    }
    drop(tx);
    let brain = worker.join().expect("roadmap loop panicked");
    Ok((brain, result?))
}

fn write_artifacts(dir: &Path, out: &RunOutcome, cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let p = |name: &str| -> PathBuf { dir.join(name) };
    metrics::write(&p("metrics.csv"), &metrics::metrics_csv(&out.records, !cfg.deterministic))?;
    metrics::write(&p("timings.csv"), &metrics::timings_csv(&out.records, &out.diagnostics))?;
    let mut trace = String::new();
    for t in &out.traces {
        trace.push_str(&serde_json::to_string(t).expect("trace serializes"));
        trace.push('\n');
    }
    metrics::write(&p("plan_trace.jsonl"), &trace)?;
    metrics::write_json(&p("summary.json"), &out.summary)?;
    metrics::write_json(&p("map_snapshot.json"), &out.map.snapshot())?;
    out.dfr.graph.roadmap().save(p("roadmap.json"))?;
    Ok(())
}
