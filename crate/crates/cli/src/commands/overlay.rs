//! `lccal overlay`: colormapped LiDAR depth over a gray camera depth
//! rendering, written as binary PPM.

use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;

use lccal_core::io::{pgm, ppm};
use lccal_core::projection::CameraIntrinsics;

use crate::common::CliResult;

#[derive(Args)]
pub struct OverlayArgs {
    /// LiDAR depth projection (16-bit millimeter PGM).
    #[arg(long)]
    pub ldp: PathBuf,
    /// Camera depth image used as the background (16-bit millimeter PGM).
    #[arg(long)]
    pub cdp: PathBuf,
    /// Output PPM path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: OverlayArgs) -> CliResult {
    let (width, height, _) = pgm::read_pgm16(&args.ldp)?;
    let intr = CameraIntrinsics::new(
        600.0,
        600.0,
        width as f64 / 2.0,
        height as f64 / 2.0,
        width,
        height,
    )
    .map_err(|e| anyhow!("bad image size: {e}"))?;
    let ldp = pgm::read_depth_pgm(&args.ldp, intr.clone())?;
    let cdp = pgm::read_depth_pgm(&args.cdp, intr)?;
    ppm::render_overlay(&ldp, &cdp, &args.out).map_err(|e| anyhow!("overlay: {e}"))?;
    println!("overlay written to {}", args.out.display());
    Ok(())
}
