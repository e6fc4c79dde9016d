//! `lccal synth`: generate a synthetic scene and write the full bundle:
//! clouds, depth images, poses, and metadata.

use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use nalgebra::Vector3;

use lccal_core::geometry::RigidTransform;
use lccal_core::io::config::Config;
use lccal_core::io::{cloud, pgm, pose};
use lccal_core::projection::project;
use lccal_core::scene::{
    corridor_poses, generate_scene, AxisBox, DistortionKind, Primitive, Rect, SceneSpec,
};

use crate::common::{
    ensure_dir, intrinsics_from_config, load_config, resolve_seed, CliError, CliResult,
};

#[derive(Args)]
pub struct SynthArgs {
    /// Output directory for the scene bundle.
    #[arg(long)]
    pub out: PathBuf,
    /// Key=value config file (scene, densities, poses, intrinsics).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// LiDAR noise sigma in meters, overriding the config.
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Depth distortion: identity, affine, or piecewise.
    #[arg(long)]
    pub distortion: Option<String>,
}

fn parse_distortion(name: &str) -> Result<DistortionKind, CliError> {
    match name {
        "identity" => Ok(DistortionKind::Identity),
        "affine" => Ok(DistortionKind::Affine),
        "piecewise" => Ok(DistortionKind::PiecewiseLinear),
        other => Err(anyhow!("unknown distortion {other:?} (identity|affine|piecewise)").into()),
    }
}

fn parse_reals(value: &str, expect: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let fields: Vec<f64> = value
        .split_whitespace()
        .map(|f| f.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| anyhow!("{what}: {value:?} is not a list of reals"))?;
    if fields.len() != expect {
        return Err(anyhow!("{what}: expected {expect} reals, got {}", fields.len()).into());
    }
    Ok(fields)
}

fn pose_from_config(config: &Config, key: &str) -> Result<Option<RigidTransform<f64>>, CliError> {
    match config.get(key) {
        None => Ok(None),
        Some(v) => {
            let r = parse_reals(v, 12, key)?;
            let mut values = [0.0; 12];
            values.copy_from_slice(&r);
            Ok(Some(RigidTransform::from_row_major(&values)))
        }
    }
}

/// Assembles the scene spec from the config: the corridor preset by default,
/// with `rect` / `box` keys appending custom primitives.
fn spec_from_config(config: &Config, seed: u64) -> Result<SceneSpec<f64>, CliError> {
    let preset = config.get("scene").unwrap_or("corridor");
    let mut spec = match preset {
        "corridor" => SceneSpec::corridor(seed),
        "custom" => SceneSpec {
            primitives: Vec::new(),
            ..SceneSpec::corridor(seed)
        },
        other => return Err(anyhow!("unknown scene preset {other:?} (corridor|custom)").into()),
    };
    spec.seed = seed;
    spec.lidar_density = config.get_f64("lidar_density", spec.lidar_density)?;
    spec.cam_density = config.get_f64("cam_density", spec.cam_density)?;
    spec.lidar_fov_deg = (
        config.get_f64("fov_h", spec.lidar_fov_deg.0)?,
        config.get_f64("fov_v", spec.lidar_fov_deg.1)?,
    );
    spec.noise_sigma = config.get_f64("noise_sigma", spec.noise_sigma)?;

    for value in config.get_all("rect") {
        // center(3) u_axis(3) v_axis(3) half_u half_v
        let r = parse_reals(value, 11, "rect")?;
        spec.primitives.push(Primitive::Rect(
            Rect::new(
                Vector3::new(r[0], r[1], r[2]),
                Vector3::new(r[3], r[4], r[5]),
                Vector3::new(r[6], r[7], r[8]),
                r[9],
                r[10],
            )
            .map_err(|e| anyhow!("rect: {e}"))?,
        ));
    }
    for value in config.get_all("box") {
        // center(3) half_extents(3)
        let b = parse_reals(value, 6, "box")?;
        spec.primitives.push(Primitive::Box(
            AxisBox::new(
                Vector3::new(b[0], b[1], b[2]),
                Vector3::new(b[3], b[4], b[5]),
            )
            .map_err(|e| anyhow!("box: {e}"))?,
        ));
    }
    if spec.primitives.is_empty() {
        return Err(anyhow!("scene has no primitives").into());
    }
    Ok(spec)
}

pub fn run(args: SynthArgs) -> CliResult {
    let config = load_config(&args.config)?;
    let seed = resolve_seed(args.seed, &config)?;
    let intrinsics = intrinsics_from_config(&config)?;
    let mut spec = spec_from_config(&config, seed)?;
    if let Some(sigma) = args.noise_sigma {
        spec.noise_sigma = sigma;
    }
    let distortion = match &args.distortion {
        Some(name) => Some(parse_distortion(name)?),
        None => config.get("distortion").map(parse_distortion).transpose()?,
    };
    if let Some(d) = distortion {
        spec.distortion = d;
    }

    let (default_lidar, default_cam) = corridor_poses::<f64>();
    let lidar_pose = pose_from_config(&config, "lidar_pose")?.unwrap_or(default_lidar);
    let cam_pose = pose_from_config(&config, "cam_pose")?.unwrap_or(default_cam);

    let out = generate_scene(&spec, &lidar_pose, &cam_pose, &intrinsics)
        .map_err(|e| anyhow!("scene generation failed: {e}"))?;

    ensure_dir(&args.out)?;
    cloud::write_bin(&args.out.join("lidar.bin"), &out.lidar)?;
    cloud::write_bin(&args.out.join("camcloud.bin"), &out.cam_depth_cloud)?;
    pgm::write_normalized_pgm(&args.out.join("cdp_norm.pgm"), &out.normalized_cdp)?;

    // LDP as seen from the true camera pose, and the true camera depth.
    let ldp = project(&out.lidar, &out.truth, &intrinsics);
    let cdp = project(
        &out.cam_depth_cloud,
        &RigidTransform::identity(),
        &intrinsics,
    );
    pgm::write_depth_pgm(&args.out.join("ldp.pgm"), &ldp)?;
    pgm::write_depth_pgm(&args.out.join("cdp.pgm"), &cdp)?;

    pose::write_pose_file(&args.out.join("t_cam.txt"), std::slice::from_ref(&cam_pose))?;
    pose::write_pose_file(
        &args.out.join("t_lidar.txt"),
        std::slice::from_ref(&lidar_pose),
    )?;
    pose::write_pose_file(&args.out.join("t_gt.txt"), std::slice::from_ref(&out.truth))?;

    let mut meta = Config::default();
    meta.set("seed", seed);
    meta.set("scene", config.get("scene").unwrap_or("corridor"));
    meta.set("lidar_density", spec.lidar_density);
    meta.set("cam_density", spec.cam_density);
    meta.set("fov_h", spec.lidar_fov_deg.0);
    meta.set("fov_v", spec.lidar_fov_deg.1);
    meta.set("noise_sigma", spec.noise_sigma);
    meta.set(
        "distortion",
        match spec.distortion {
            DistortionKind::Identity => "identity",
            DistortionKind::Affine => "affine",
            DistortionKind::PiecewiseLinear => "piecewise",
        },
    );
    meta.set("fx", intrinsics.fx);
    meta.set("fy", intrinsics.fy);
    meta.set("cx", intrinsics.cx);
    meta.set("cy", intrinsics.cy);
    meta.set("width", intrinsics.width);
    meta.set("height", intrinsics.height);
    meta.save(&args.out.join("meta.txt"))?;

    println!(
        "scene written to {}: {} lidar points, {} camera points",
        args.out.display(),
        out.lidar.len(),
        out.cam_depth_cloud.len()
    );
    Ok(())
}
