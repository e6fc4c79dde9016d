//! File formats: binary point clouds, KITTI-style pose files, 16-bit PGM
//! depth images, PPM overlays, and flat key=value config text.

pub mod cloud;
pub mod config;
pub mod pgm;
pub mod pose;
pub mod ppm;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected {expected}")]
    BadMagic { expected: &'static str },
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("malformed point cloud at byte offset {byte_offset}: {reason}")]
    MalformedCloud { byte_offset: u64, reason: String },
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("unsupported file extension {0:?} (expected .bin or .xyz)")]
    UnsupportedExtension(String),
    #[error("image is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    SizeMismatch {
        got_w: usize,
        got_h: usize,
        want_w: usize,
        want_h: usize,
    },
    #[error("config key {0:?} is missing")]
    MissingKey(String),
    #[error("config key {key:?}: {reason}")]
    BadValue { key: String, reason: String },
}
