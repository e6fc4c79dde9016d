//! Shared CLI plumbing: error-to-exit-code mapping, config loading, seed
//! resolution, and intrinsics parsing.

use std::path::Path;

use anyhow::{anyhow, Context};
use lccal_core::io::config::Config;
use lccal_core::projection::CameraIntrinsics;

pub enum CliError {
    /// Bad flags, unreadable files, malformed config: exit code 2.
    Validation(anyhow::Error),
    /// The optimizer could not produce a usable pose: exit code 3.
    Convergence(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Validation(e.into())
    }
}

pub type CliResult = Result<(), CliError>;

pub fn load_config(path: &Option<std::path::PathBuf>) -> Result<Config, CliError> {
    match path {
        None => Ok(Config::default()),
        Some(p) => Ok(Config::load(p).with_context(|| format!("loading config {}", p.display()))?),
    }
}

/// Seed precedence: explicit flag, then LCCAL_SEED, then config, then 0.
pub fn resolve_seed(flag: Option<u64>, config: &Config) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    if let Ok(text) = std::env::var("LCCAL_SEED") {
        return Ok(text
            .parse()
            .map_err(|_| anyhow!("LCCAL_SEED={text:?} is not an unsigned integer"))?);
    }
    Ok(config.get_u64("seed", 0)?)
}

/// Intrinsics from config keys fx/fy/cx/cy/width/height, defaulting to the
/// 512x256 focal-600 virtual camera.
pub fn intrinsics_from_config(config: &Config) -> Result<CameraIntrinsics<f64>, CliError> {
    let width = config.get_usize("width", 512)?;
    let height = config.get_usize("height", 256)?;
    let fx = config.get_f64("fx", 600.0)?;
    let fy = config.get_f64("fy", 600.0)?;
    let cx = config.get_f64("cx", width as f64 / 2.0)?;
    let cy = config.get_f64("cy", height as f64 / 2.0)?;
    Ok(CameraIntrinsics::new(fx, fy, cx, cy, width, height)
        .map_err(|e| anyhow!("invalid intrinsics: {e}"))?)
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .with_context(|| format!("creating directory {}", path.display()))?;
    Ok(())
}
