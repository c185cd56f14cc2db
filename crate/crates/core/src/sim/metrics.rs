use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::apn::{ClusterId, NodeId};
use crate::dfr::{PruneReport, StageTimings};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "cycle,sim_time_s,voxels_occ,voxels_free,frontiers,covered_frontiers,nbv_count,node_count,edge_count,cluster_count,t_dfr_ms,t_plan_ms,distance_m";

/// One row of the metrics CSV.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub sim_time_s: f64,
    pub voxels_occ: usize,
    pub voxels_free: usize,
    pub frontiers: usize,
    pub covered_frontiers: usize,
    pub nbv_count: usize,
    pub node_count: usize,
    pub edge_count: usize,
    pub cluster_count: usize,
    pub t_dfr_ms: f64,
    pub t_plan_ms: f64,
    pub distance_m: f64,
}

impl CycleRecord {
    /// Timing columns are written as zero when `timings` is false, keeping the file reproducible.
    pub fn csv_row(&self, timings: bool) -> String {
        let (d, p) = if timings { (self.t_dfr_ms, self.t_plan_ms) } else { (0.0, 0.0) };
        format!(
            "{},{:.2},{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3}",
            self.cycle,
            self.sim_time_s,
            self.voxels_occ,
            self.voxels_free,
            self.frontiers,
            self.covered_frontiers,
            self.nbv_count,
            self.node_count,
            self.edge_count,
            self.cluster_count,
            d,
            p,
            self.distance_m
        )
    }
}

pub fn metrics_csv(records: &[CycleRecord], timings: bool) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row(timings));
        out.push('\n');
    }
    out
}

/// Per-cycle data kept in memory only.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CycleDiagnostics {
    pub prune: PruneReport,
    pub stages: StageTimings,
    /// θ_N: nodes per 100 m³ of mapped free space.
    pub theta_n: f64,
    /// θ_E: free edges over all node pairs.
    pub theta_e: f64,
    pub invariant_error: Option<String>,
}

pub fn timings_csv(records: &[CycleRecord], diag: &[CycleDiagnostics]) -> String {
    let mut out = String::from("cycle,t_recondition_ms,t_sample_ms,t_prune_ms,t_reach_ms,t_cluster_ms,t_dfr_ms,t_plan_ms\n");
    for (r, d) in records.iter().zip(diag) {
        let s = &d.stages;
        let _ = writeln!(
            out,
            "{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}",
            r.cycle, s.recondition, s.sample, s.prune, s.reach, s.cluster, r.t_dfr_ms, r.t_plan_ms
        );
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunResult {
    Completed,
    Timeout,
}

/// Why a completed run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    NoFrontiers,
    NoReachableViews,
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(rename = "T_total_s")]
    pub t_total_s: f64,
    pub coverage_ratio: Option<f64>,
    pub eta_occ: f64,
    pub eta_total: f64,
    #[serde(rename = "theta_N")]
    pub theta_n: f64,
    #[serde(rename = "theta_E")]
    pub theta_e: f64,
    pub result: RunResult,
    pub stop_reason: StopReason,
    pub cycles: usize,
    pub distance_m: f64,
    pub safety_violations: usize,
    pub t_dfr_mean_ms: f64,
    pub t_plan_mean_ms: f64,
    pub seed: u64,
}

/// One line of the plan trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanTrace {
    pub cycle: usize,
    pub cluster_seq: Vec<ClusterId>,
    pub view_seq: Vec<NodeId>,
    pub costs: [f64; 2],
    pub generations: [usize; 2],
    pub goal: Option<NodeId>,
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    write(path, &text)
}
