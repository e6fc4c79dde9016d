//! `lccal fuse`: combine per-frame pose files and a scores manifest into a
//! single extrinsic estimate.

use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;

use lccal_core::fusion::{fuse, ScoredPoseSet, Weighting};
use lccal_core::geometry::RigidTransform;
use lccal_core::io::pose;

use crate::common::{CliError, CliResult};

#[derive(Args)]
pub struct FuseArgs {
    /// Directory of per-frame pose files (NNN.txt, as written by
    /// `calibrate --per-frame`).
    #[arg(long)]
    pub poses: PathBuf,
    /// Scores manifest: `index score` per line.
    #[arg(long)]
    pub scores: PathBuf,
    /// Output pose file.
    #[arg(long)]
    pub out: PathBuf,
    /// Fraction of top-scoring poses to keep.
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    /// Average with uniform weights instead of score-proportional ones.
    #[arg(long)]
    pub uniform: bool,
}

pub fn run(args: FuseArgs) -> CliResult {
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.poses)
        .with_context(|| format!("reading {}", args.poses.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().map(|e| e == "txt").unwrap_or(false)
                && p.file_stem()
                    .and_then(|s| s.to_str())
                    .map(|s| s.chars().all(|c| c.is_ascii_digit()))
                    .unwrap_or(false)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(anyhow!("no numbered pose files in {}", args.poses.display()).into());
    }
    let poses: Vec<RigidTransform<f64>> = files
        .iter()
        .map(|f| pose::read_single_pose(f))
        .collect::<Result<_, _>>()?;

    let text = std::fs::read_to_string(&args.scores)
        .with_context(|| format!("reading {}", args.scores.display()))?;
    let mut scores = vec![None; poses.len()];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse_err = || anyhow!("scores line {}: expected `index score`", lineno + 1);
        let index: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(parse_err)?;
        let score: f64 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(parse_err)?;
        if index >= poses.len() {
            return Err(anyhow!("scores line {}: index {index} out of range", lineno + 1).into());
        }
        scores[index] = Some(score);
    }
    let entries: Vec<(RigidTransform<f64>, f64)> = poses
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let s = scores[i].ok_or_else(|| anyhow!("no score for pose index {i}"))?;
            Ok::<_, CliError>((p, s))
        })
        .collect::<Result<_, _>>()?;

    let set = ScoredPoseSet::new(entries, args.ratio)
        .map_err(|e| anyhow!("invalid scored set: {e}"))?
        .with_weighting(if args.uniform {
            Weighting::Uniform
        } else {
            Weighting::ScoreProportional
        });
    let fused = fuse(&set).map_err(|e| anyhow!("fusion: {e}"))?;
    pose::write_pose_file(&args.out, &[fused])?;
    println!(
        "fused {} of {} poses into {}",
        set.selection_count(),
        set.entries.len(),
        args.out.display()
    );
    Ok(())
}
