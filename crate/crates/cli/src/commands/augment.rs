//! `lccal augment`: render single- or double-sided mis-calibration sample
//! bundles from a synthesized scene directory.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::Args;

use lccal_core::augment::{generate_sample, generate_single_sided, AugmentedSample};
use lccal_core::geometry::MiscalibrationRange;
use lccal_core::io::config::Config;
use lccal_core::io::{cloud, pgm, pose};
use lccal_core::projection::CameraIntrinsics;

use crate::common::{ensure_dir, load_config, resolve_seed, CliError, CliResult};

#[derive(Args)]
pub struct AugmentArgs {
    /// Scene directory produced by `lccal synth`.
    #[arg(long)]
    pub scene_dir: PathBuf,
    /// Output directory; one `sample_NNN` bundle per seed.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of samples (seeds seed..seed+count).
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rotation bound in degrees for both sides.
    #[arg(long)]
    pub rot_bound: Option<f64>,
    /// Translation bound in meters for both sides.
    #[arg(long)]
    pub trans_bound: Option<f64>,
    /// Perturb only the LiDAR side (the classical many-to-one baseline).
    #[arg(long)]
    pub single_sided: bool,
}

fn intrinsics_from_meta(meta: &Config) -> Result<CameraIntrinsics<f64>, CliError> {
    let width = meta.get_usize("width", 512)?;
    let height = meta.get_usize("height", 256)?;
    Ok(CameraIntrinsics::new(
        meta.get_f64("fx", 600.0)?,
        meta.get_f64("fy", 600.0)?,
        meta.get_f64("cx", width as f64 / 2.0)?,
        meta.get_f64("cy", height as f64 / 2.0)?,
        width,
        height,
    )
    .map_err(|e| anyhow!("invalid intrinsics in meta.txt: {e}"))?)
}

fn write_bundle(
    dir: &Path,
    sample: &AugmentedSample<f64>,
    seed: u64,
    range: &MiscalibrationRange<f64>,
    single_sided: bool,
    intrinsics: &CameraIntrinsics<f64>,
) -> CliResult {
    ensure_dir(dir)?;
    pgm::write_depth_pgm(&dir.join("ldp.pgm"), &sample.ldp)?;
    pgm::write_depth_pgm(&dir.join("cdp.pgm"), &sample.cdp)?;
    pose::write_pose_file(&dir.join("t_cam.txt"), std::slice::from_ref(&sample.t_cam))?;
    pose::write_pose_file(
        &dir.join("t_lidar.txt"),
        std::slice::from_ref(&sample.t_lidar),
    )?;
    pose::write_pose_file(&dir.join("t_gt.txt"), std::slice::from_ref(&sample.t_gt))?;
    let mut meta = Config::default();
    meta.set("seed", seed);
    meta.set("rot_bound_deg", range.rot_bound_deg);
    meta.set("trans_bound_m", range.trans_bound_m);
    meta.set(
        "axis_weights",
        format!(
            "{} {} {}",
            range.axis_weights[0], range.axis_weights[1], range.axis_weights[2]
        ),
    );
    meta.set("single_sided", single_sided);
    meta.set("fx", intrinsics.fx);
    meta.set("fy", intrinsics.fy);
    meta.set("cx", intrinsics.cx);
    meta.set("cy", intrinsics.cy);
    meta.set("width", intrinsics.width);
    meta.set("height", intrinsics.height);
    meta.save(&dir.join("meta.txt"))?;
    Ok(())
}

pub fn run(args: AugmentArgs) -> CliResult {
    let config = load_config(&args.config)?;
    let seed = resolve_seed(args.seed, &config)?;
    let meta = Config::load(&args.scene_dir.join("meta.txt"))
        .with_context(|| format!("reading {}/meta.txt", args.scene_dir.display()))?;
    let intrinsics = intrinsics_from_meta(&meta)?;

    let lidar = cloud::read_bin::<f64>(&args.scene_dir.join("lidar.bin"))?;
    let cam_cloud = cloud::read_bin::<f64>(&args.scene_dir.join("camcloud.bin"))?;
    let truth = pose::read_single_pose::<f64>(&args.scene_dir.join("t_gt.txt"))?;

    let rot_bound = args
        .rot_bound
        .map(Ok)
        .unwrap_or_else(|| config.get_f64("rot_bound_deg", 5.0))?;
    let trans_bound = args
        .trans_bound
        .map(Ok)
        .unwrap_or_else(|| config.get_f64("trans_bound_m", 0.5))?;
    let range = MiscalibrationRange::new(rot_bound, trans_bound)
        .map_err(|e| anyhow!("invalid mis-calibration range: {e}"))?;

    // The camera cloud is stored in the camera frame; augmentation renders
    // both clouds from the base (LiDAR) frame.
    let cam_in_base = cam_cloud.transformed(&truth.inverse());

    ensure_dir(&args.out)?;
    for k in 0..args.count {
        let sample_seed = seed + k as u64;
        let sample = if args.single_sided {
            generate_single_sided(&lidar, &truth, &range, &intrinsics, sample_seed)
        } else {
            generate_sample(
                &lidar,
                &cam_in_base,
                &truth,
                &range,
                &range,
                &intrinsics,
                sample_seed,
            )
        }
        .map_err(|e| anyhow!("sample {k} (seed {sample_seed}): {e}"))?;
        let dir = args.out.join(format!("sample_{k:03}"));
        write_bundle(
            &dir,
            &sample,
            sample_seed,
            &range,
            args.single_sided,
            &intrinsics,
        )?;
    }
    println!(
        "{} sample bundle(s) written to {}",
        args.count,
        args.out.display()
    );
    Ok(())
}
