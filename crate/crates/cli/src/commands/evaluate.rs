//! `lccal evaluate`: pose error against ground truth, plus depth-quality
//! metrics when depth maps are given.

use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;

use lccal_core::depth_refine::depth_metrics;
use lccal_core::geometry::pose_error;
use lccal_core::io::{pgm, pose};
use lccal_core::projection::CameraIntrinsics;

use crate::common::CliResult;

#[derive(Args)]
pub struct EvaluateArgs {
    /// Estimated pose file.
    #[arg(long)]
    pub estimate: PathBuf,
    /// Ground-truth pose file.
    #[arg(long)]
    pub truth: PathBuf,
    /// Optional predicted metric depth PGM.
    #[arg(long, requires = "gt_depth")]
    pub pred_depth: Option<PathBuf>,
    /// Optional ground-truth metric depth PGM.
    #[arg(long, requires = "pred_depth")]
    pub gt_depth: Option<PathBuf>,
}

pub fn run(args: EvaluateArgs) -> CliResult {
    let estimate = pose::read_single_pose::<f64>(&args.estimate)?;
    let truth = pose::read_single_pose::<f64>(&args.truth)?;
    let (e_r, e_t) = pose_error(&estimate, &truth).map_err(|e| anyhow!("pose error: {e}"))?;
    println!("e_r_deg = {e_r}");
    println!("e_t_m = {e_t}");

    if let (Some(pred), Some(gt)) = (&args.pred_depth, &args.gt_depth) {
        let (width, height, _) = pgm::read_pgm16(pred)?;
        let intr = CameraIntrinsics::new(
            600.0,
            600.0,
            width as f64 / 2.0,
            height as f64 / 2.0,
            width,
            height,
        )
        .map_err(|e| anyhow!("bad depth image size: {e}"))?;
        let pred = pgm::read_depth_pgm(pred, intr.clone())?;
        let gt = pgm::read_depth_pgm(gt, intr)?;
        let m = depth_metrics(&pred, &gt).map_err(|e| anyhow!("depth metrics: {e}"))?;
        println!("depth_mae_m = {}", m.mae);
        println!("depth_rmse_m = {}", m.rmse);
        println!("depth_abs_rel = {}", m.abs_rel);
        println!("depth_sq_rel = {}", m.sq_rel);
        println!("depth_delta1 = {}", m.delta1);
        println!("depth_delta2 = {}", m.delta2);
        println!("depth_delta3 = {}", m.delta3);
        println!("depth_valid_pixels = {}", m.count);
    }
    Ok(())
}
