use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::apn::MotionLimits;
use crate::dfr::DfrConfig;
use crate::error::{Error, Result};
use crate::planner::PlannerConfig;
use crate::sensing::SensorModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotConfig {
    pub v_max: f64,
    pub yawrate_max: f64,
    pub d_safe: f64,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self {
            v_max: 1.0,
            yawrate_max: 0.75,
            d_safe: 0.75,
        }
    }
}

impl RobotConfig {
    pub fn limits(&self) -> Result<MotionLimits> {
        MotionLimits::new(self.v_max, self.yawrate_max)
    }
}

/// Everything a closed-loop run needs besides the world itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// World file, resolved relative to the working directory.
    pub world: Option<PathBuf>,
    pub resolution: f64,
    pub sensor: SensorModel,
    pub robot: RobotConfig,
    pub dfr: DfrConfig,
    pub planner: PlannerConfig,
    pub scan_rate_hz: f64,
    pub dt: f64,
    pub dfr_period_s: f64,
    pub t_max: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Single-threaded interleaving; otherwise mapping and roadmap loops run on two threads.
    pub deterministic: bool,
    /// Cycles without a reachable view, under global-only sampling, before declaring completion.
    pub stall_cycles: usize,
    /// Radius around the start whose ground-truth free voxels are known free before the first scan.
    /// The sensor never sees straight up or down, so without this no edge can leave the start.
    pub start_clear_radius: f64,
    /// Full turn in place before the first plan is followed.
    pub initial_spin: bool,
    /// Evaluate ground-truth coverage at the end of the run.
    pub compute_coverage: bool,
    /// Roadmap and visibility invariants are checked after every cycle.
    pub debug_checks: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            world: None,
            resolution: 0.2,
            sensor: SensorModel::default(),
            robot: RobotConfig::default(),
            dfr: DfrConfig::default(),
            planner: PlannerConfig::default(),
            scan_rate_hz: 5.0,
            dt: 0.05,
            dfr_period_s: 0.5,
            t_max: 840.0,
            seed: 0,
            output: None,
            deterministic: true,
            stall_cycles: 5,
            start_clear_radius: 2.0,
            initial_spin: true,
            compute_coverage: true,
            debug_checks: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.resolution > 0.0) {
            return bad("resolution must be positive");
        }
        if !(self.t_max > 0.0) {
            return bad("t_max must be positive");
        }
        if !(self.dt > 0.0 && self.scan_rate_hz > 0.0 && self.dfr_period_s > 0.0) {
            return bad("dt, scan_rate_hz and dfr_period_s must be positive");
        }
        if !(self.robot.d_safe > 0.0) {
            return bad("robot.d_safe must be positive");
        }
        if self.start_clear_radius < self.robot.d_safe {
            return bad("start_clear_radius must be at least robot.d_safe");
        }
        if self.stall_cycles == 0 {
            return bad("stall_cycles must be at least 1");
        }
        self.robot.limits()?;
        self.sensor.validate_for_resolution(self.resolution)?;
        self.dfr.validate()?;
        self.planner.ga.validate()?;
        Ok(())
    }
}
