use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use apn_core::map::GroundTruthWorld;
use apn_core::sim::{
    compute_ground_truth_coverage, generate_world, run_exploration, RunConfig, RunResult, WorldKind, WorldParams,
};

#[derive(Parser)]
#[command(name = "apn", version, about = "Roadmap-based exploration in simulated voxel worlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop exploration and write its artifacts.
    Explore {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the world file named in the config.
        #[arg(long)]
        world: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for metrics, plan trace and snapshots.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Force the single-threaded reproducible mode.
        #[arg(long)]
        deterministic: bool,
    },
    /// Generate a ground-truth world file.
    Genworld {
        #[arg(long, value_parser = parse_kind)]
        kind: WorldKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// JSON file with generator parameters; missing fields take the per-kind defaults.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Compute the set of surface voxels visible from admissible poses.
    OracleCoverage {
        #[arg(long)]
        world: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the voxel list here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_kind(s: &str) -> Result<WorldKind, String> {
    s.parse().map_err(|e: apn_core::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Explore {
            config,
            world,
            seed,
            out,
            deterministic,
        } => {
            let mut cfg = RunConfig::load(&config).with_context(|| format!("loading config {}", config.display()))?;
            if world.is_some() {
                cfg.world = world;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if out.is_some() {
                cfg.output = out;
            }
            if deterministic {
                cfg.deterministic = true;
            }
            let path = cfg.world.clone().context("no world given in the config or with --world")?;
            let world = GroundTruthWorld::load(&path).with_context(|| format!("loading world {}", path.display()))?;
            let outcome = run_exploration(&world, &cfg)?;
            println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
            Ok(match outcome.summary.result {
                RunResult::Completed => ExitCode::SUCCESS,
                RunResult::Timeout => ExitCode::from(2),
            })
        }
        Command::Genworld {
            kind,
            seed,
            out,
            params,
        } => {
            let params = match params {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    let mut v = serde_json::to_value(WorldParams::for_kind(kind))?;
                    let overrides: serde_json::Value = serde_json::from_str(&text)?;
                    if let (Some(base), Some(o)) = (v.as_object_mut(), overrides.as_object()) {
                        base.extend(o.clone());
                    }
                    serde_json::from_value(v)?
                }
                None => WorldParams::for_kind(kind),
            };
            let world = generate_world(kind, &params, seed)?;
            world.save(&out)?;
            log::info!("{kind} world with {} obstacles written to {}", world.obstacles.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleCoverage { world, config, out } => {
            let cfg = match config {
                Some(c) => RunConfig::load(&c).with_context(|| format!("loading config {}", c.display()))?,
                None => RunConfig::default(),
            };
            let world = GroundTruthWorld::load(&world).with_context(|| format!("loading world {}", world.display()))?;
            let oracle = compute_ground_truth_coverage(&world, &cfg)?;
            let voxels: Vec<[usize; 3]> = oracle.voxels.iter().map(|v| oracle.spec.coord(*v)).collect();
            let doc = serde_json::json!({
                "resolution": oracle.spec.resolution,
                "origin": oracle.spec.origin,
                "dims": oracle.spec.dims,
                "positions": oracle.positions,
                "count": voxels.len(),
                "voxels": voxels,
            });
            let text = serde_json::to_string(&doc)?;
            match out {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => println!("{text}"),
            }
            log::info!("{} visible surface voxels from {} positions", oracle.len(), oracle.positions);
            Ok(ExitCode::SUCCESS)
        }
    }
}
