//! `lccal calibrate`: Chamfer-distance pose refinement, either one shared
//! pose across a frame sequence (default) or one pose per frame with
//! self-supervised scores for later fusion.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Args;

use lccal_core::fusion::score_self_supervised;
use lccal_core::geometry::RigidTransform;
use lccal_core::io::config::Config;
use lccal_core::io::{cloud, pose};
use lccal_core::optimize::{
    refine_pose, refine_pose_shared, OptimizeError, OptimizerConfig, TerminationStatus,
};
use lccal_core::projection::PointCloud;

use crate::common::{ensure_dir, load_config, resolve_seed, CliError, CliResult};

#[derive(Args)]
pub struct CalibrateArgs {
    /// Single-pair mode: LiDAR cloud file (.bin or .xyz).
    #[arg(long, conflicts_with = "frames")]
    pub lidar: Option<PathBuf>,
    /// Single-pair mode: camera depth cloud file.
    #[arg(long, conflicts_with = "frames", requires = "lidar")]
    pub camcloud: Option<PathBuf>,
    /// Sequence mode: directory of frame subdirectories, each holding
    /// lidar.bin and camcloud.bin.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Initial pose guess file.
    #[arg(long)]
    pub init: PathBuf,
    /// Output pose file, or output directory in per-frame mode.
    #[arg(long)]
    pub out: PathBuf,
    /// Optimizer config file (max_iters, tol, damping_init, alpha, beta,
    /// subsample_cap, seed, anchor_translation).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Refine each frame independently and write poses plus scores.txt.
    #[arg(long)]
    pub per_frame: bool,
    /// Parallel workers in per-frame mode.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn optimizer_from_config(config: &Config, seed: u64) -> Result<OptimizerConfig, CliError> {
    let defaults = OptimizerConfig::default();
    Ok(OptimizerConfig {
        max_iters: config.get_usize("max_iters", defaults.max_iters)?,
        tol: config.get_f64("tol", defaults.tol)?,
        damping_init: config.get_f64("damping_init", defaults.damping_init)?,
        alpha: config.get_f64("alpha", defaults.alpha)?,
        beta: config.get_f64("beta", defaults.beta)?,
        subsample_cap: config.get_usize("subsample_cap", defaults.subsample_cap)?,
        seed,
        anchor_translation: config.get_bool("anchor_translation", defaults.anchor_translation)?,
    })
}

type FramePair = (PointCloud<f64>, PointCloud<f64>);

fn load_frames(dir: &Path) -> Result<Vec<FramePair>, CliError> {
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join("lidar.bin").exists())
        .collect();
    subdirs.sort();
    if subdirs.is_empty() {
        return Err(anyhow!(
            "{} holds no frame directories with lidar.bin",
            dir.display()
        )
        .into());
    }
    subdirs
        .iter()
        .map(|d| {
            let lidar = cloud::read_bin::<f64>(&d.join("lidar.bin"))?;
            let cam = cloud::read_bin::<f64>(&d.join("camcloud.bin"))?;
            Ok((lidar, cam))
        })
        .collect()
}

fn describe(status: TerminationStatus) -> &'static str {
    match status {
        TerminationStatus::Converged => "converged",
        TerminationStatus::Stalled => "stalled (best-so-far returned)",
        TerminationStatus::MaxIterations => "stopped at max iterations",
    }
}

/// Bad inputs are validation errors; a solver that cannot make progress at
/// any damping level is a convergence failure (exit code 3).
fn optimize_error(context: String, e: OptimizeError) -> CliError {
    match e {
        OptimizeError::DampingExhausted => CliError::Convergence(anyhow!("{context}: {e}")),
        other => CliError::Validation(anyhow!("{context}: {other}")),
    }
}

pub fn run(args: CalibrateArgs) -> CliResult {
    let config = load_config(&args.config)?;
    let seed = resolve_seed(args.seed, &config)?;
    let optimizer = optimizer_from_config(&config, seed)?;
    let init: RigidTransform<f64> = pose::read_single_pose(&args.init)?;

    let frames = match (&args.lidar, &args.camcloud, &args.frames) {
        (Some(lidar), Some(cam), None) => vec![(
            cloud::read_point_cloud::<f64>(lidar)?,
            cloud::read_point_cloud::<f64>(cam)?,
        )],
        (None, None, Some(dir)) => load_frames(dir)?,
        _ => return Err(anyhow!("give either --lidar with --camcloud, or --frames DIR").into()),
    };

    if args.per_frame {
        ensure_dir(&args.out)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs.max(1))
            .build()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
        let results: Vec<_> = pool.install(|| {
            use rayon::prelude::*;
            frames
                .par_iter()
                .map(|(lidar, cam)| refine_pose(lidar, cam, &init, &optimizer))
                .collect()
        });
        let mut scores = String::new();
        for (i, result) in results.into_iter().enumerate() {
            let outcome = result.map_err(|e| optimize_error(format!("frame {i}"), e))?;
            let (lidar, cam) = &frames[i];
            let score = score_self_supervised(&outcome.pose, lidar, cam)
                .map_err(|e| anyhow!("scoring frame {i}: {e}"))?;
            pose::write_pose_file(&args.out.join(format!("{i:03}.txt")), &[outcome.pose])?;
            scores.push_str(&format!("{i} {score}\n"));
            println!(
                "frame {i}: {} after {} iterations, chamfer {:.6e}, score {:.6}",
                describe(outcome.status),
                outcome.iterations,
                outcome.losses.l_cd,
                score
            );
        }
        std::fs::write(args.out.join("scores.txt"), scores)?;
    } else {
        let outcome = refine_pose_shared(&frames, &init, &optimizer)
            .map_err(|e| optimize_error("shared refinement".to_string(), e))?;
        pose::write_pose_file(&args.out, &[outcome.pose])?;
        println!(
            "{} after {} iterations over {} frame(s), chamfer {:.6e}",
            describe(outcome.status),
            outcome.iterations,
            frames.len(),
            outcome.losses.l_cd
        );
    }
    Ok(())
}
