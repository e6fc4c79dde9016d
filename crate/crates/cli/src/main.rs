//! `lccal`: synthetic scenes, mis-calibration augmentation, depth
//! refinement, Chamfer pose calibration, multi-frame fusion, evaluation,
//! and overlay rendering, wired together over plain files.
//!
//! Exit codes: 0 on success, 2 on validation errors (bad flags, bad config,
//! unreadable files), 3 on convergence failures.

mod commands;
mod common;

use clap::{Parser, Subcommand};

use common::CliError;

#[derive(Parser)]
#[command(
    name = "lccal",
    version,
    about = "Target-free LiDAR-camera extrinsic calibration toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scene bundle with known ground truth.
    Synth(commands::synth::SynthArgs),
    /// Render augmented (LDP, CDP, pose) sample bundles from a scene.
    Augment(commands::augment::AugmentArgs),
    /// Refine a normalized camera depth map against a LiDAR projection.
    RefineDepth(commands::refine_depth::RefineDepthArgs),
    /// Estimate the extrinsic pose from cloud pairs.
    Calibrate(commands::calibrate::CalibrateArgs),
    /// Fuse per-frame poses into one extrinsic estimate.
    Fuse(commands::fuse::FuseArgs),
    /// Report pose and depth errors against ground truth.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Render a colormapped LiDAR-over-camera depth overlay.
    Overlay(commands::overlay::OverlayArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => commands::synth::run(args),
        Command::Augment(args) => commands::augment::run(args),
        Command::RefineDepth(args) => commands::refine_depth::run(args),
        Command::Calibrate(args) => commands::calibrate::run(args),
        Command::Fuse(args) => commands::fuse::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Overlay(args) => commands::overlay::run(args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Validation(e)) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
        Err(CliError::Convergence(e)) => {
            eprintln!("convergence failure: {e:#}");
            std::process::exit(3);
        }
    }
}
