//! Pose files in the KITTI calibration convention: one transform per line,
//! 12 whitespace-separated reals forming the row-major 3x4 `[R | t]`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::geometry::RigidTransform;
use crate::scalar::{cast, Scalar};

use super::IoError;

pub fn read_pose_file<T: Scalar>(path: &Path) -> Result<Vec<RigidTransform<T>>, IoError> {
    let reader = BufReader::new(File::open(path)?);
    let mut poses = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 12 {
            return Err(IoError::BadLine {
                line: lineno + 1,
                reason: format!("expected 12 fields, got {}", fields.len()),
            });
        }
        let mut values = [T::zero(); 12];
        for (i, f) in fields.iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| IoError::BadLine {
                line: lineno + 1,
                reason: format!("cannot parse {f:?} as a real"),
            })?;
            values[i] = cast(v);
        }
        poses.push(RigidTransform::from_row_major(&values));
    }
    Ok(poses)
}

/// Reads a file expected to contain exactly one pose.
pub fn read_single_pose<T: Scalar>(path: &Path) -> Result<RigidTransform<T>, IoError> {
    let poses = read_pose_file(path)?;
    match poses.len() {
        1 => Ok(poses.into_iter().next().unwrap()),
        n => Err(IoError::BadLine {
            line: 1,
            reason: format!("expected exactly 1 pose, file holds {n}"),
        }),
    }
}

pub fn write_pose_file<T: Scalar>(path: &Path, poses: &[RigidTransform<T>]) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path)?);
    for pose in poses {
        let row = pose.to_row_major();
        let mut line = String::new();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            // Default float formatting round-trips exactly.
            line.push_str(&v.to_f64().unwrap().to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}
