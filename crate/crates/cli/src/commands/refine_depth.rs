//! `lccal refine-depth`: run depth anchor refinement on an LDP plus a
//! normalized CDP and write the metric result.

use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;

use lccal_core::depth_refine::refine;
use lccal_core::io::pgm;
use lccal_core::projection::CameraIntrinsics;

use crate::common::{load_config, CliResult};

#[derive(Args)]
pub struct RefineDepthArgs {
    /// LiDAR depth projection (16-bit millimeter PGM).
    #[arg(long)]
    pub ldp: PathBuf,
    /// Normalized camera depth (16-bit PGM, 65535 = 1.0).
    #[arg(long)]
    pub cdp: PathBuf,
    /// Output metric depth (16-bit millimeter PGM).
    #[arg(long)]
    pub out: PathBuf,
    /// Target anchor count.
    #[arg(long, default_value_t = 32)]
    pub anchors: usize,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run(args: RefineDepthArgs) -> CliResult {
    let config = load_config(&args.config)?;
    // The remap itself only needs pixel values; intrinsics just tag the
    // image, so take the size from the file and focal values from config.
    let (width, height, _) = pgm::read_pgm16(&args.ldp)?;
    let intrinsics = CameraIntrinsics::new(
        config.get_f64("fx", 600.0)?,
        config.get_f64("fy", 600.0)?,
        config.get_f64("cx", width as f64 / 2.0)?,
        config.get_f64("cy", height as f64 / 2.0)?,
        width,
        height,
    )
    .map_err(|e| anyhow!("invalid intrinsics: {e}"))?;

    let ldp = pgm::read_depth_pgm(&args.ldp, intrinsics.clone())?;
    let cdp = pgm::read_normalized_pgm(&args.cdp, intrinsics)?;
    let refined = refine(&ldp, &cdp, args.anchors).map_err(|e| anyhow!("depth refinement: {e}"))?;
    pgm::write_depth_pgm(&args.out, &refined)?;
    println!(
        "refined depth written to {} ({} valid pixels)",
        args.out.display(),
        refined.valid_count()
    );
    Ok(())
}
