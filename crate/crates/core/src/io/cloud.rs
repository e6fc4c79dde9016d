//! Point cloud files: KITTI-style `.bin` (little-endian f32 x, y, z,
//! intensity quadruples) and whitespace-separated ASCII `.xyz` triples.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::Vector3;

use crate::projection::PointCloud;
use crate::scalar::{cast, Scalar};

use super::IoError;

/// Loads a cloud, dispatching on the file extension.
pub fn read_point_cloud<T: Scalar>(path: &Path) -> Result<PointCloud<T>, IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => read_bin(path),
        Some("xyz") => read_xyz(path),
        other => Err(IoError::UnsupportedExtension(
            other.unwrap_or("").to_string(),
        )),
    }
}

pub fn read_bin<T: Scalar>(path: &Path) -> Result<PointCloud<T>, IoError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() % 16 != 0 {
        return Err(IoError::MalformedCloud {
            byte_offset: (bytes.len() / 16 * 16) as u64,
            reason: format!(
                "byte count {} is not a multiple of 16 (x, y, z, intensity as f32)",
                bytes.len()
            ),
        });
    }
    let n = bytes.len() / 16;
    let mut points = Vec::with_capacity(n);
    let mut intensity = Vec::with_capacity(n);
    for i in 0..n {
        let at = |k: usize| {
            let o = i * 16 + k * 4;
            f32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]])
        };
        let (x, y, z, intens) = (at(0), at(1), at(2), at(3));
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(IoError::MalformedCloud {
                byte_offset: (i * 16) as u64,
                reason: "non-finite coordinate".to_string(),
            });
        }
        points.push(Vector3::new(
            cast::<T>(x as f64),
            cast::<T>(y as f64),
            cast::<T>(z as f64),
        ));
        intensity.push(cast::<T>(intens as f64));
    }
    Ok(PointCloud {
        points,
        intensity: Some(intensity),
    })
}

pub fn write_bin<T: Scalar>(path: &Path, cloud: &PointCloud<T>) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path)?);
    for (i, p) in cloud.points.iter().enumerate() {
        let intensity = cloud
            .intensity
            .as_ref()
            .map(|v| v[i].to_f64().unwrap() as f32)
            .unwrap_or(0.0);
        for value in [
            p[0].to_f64().unwrap() as f32,
            p[1].to_f64().unwrap() as f32,
            p[2].to_f64().unwrap() as f32,
            intensity,
        ] {
            out.write_all(&value.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_xyz<T: Scalar>(path: &Path) -> Result<PointCloud<T>, IoError> {
    let reader = BufReader::new(File::open(path)?);
    let mut points = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(IoError::BadLine {
                line: lineno + 1,
                reason: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let mut coords = [0.0f64; 3];
        for (i, f) in fields.iter().enumerate() {
            coords[i] = f.parse().map_err(|_| IoError::BadLine {
                line: lineno + 1,
                reason: format!("cannot parse {f:?} as a real"),
            })?;
        }
        points.push(Vector3::new(
            cast::<T>(coords[0]),
            cast::<T>(coords[1]),
            cast::<T>(coords[2]),
        ));
    }
    Ok(PointCloud::new(points))
}

pub fn write_xyz<T: Scalar>(path: &Path, cloud: &PointCloud<T>) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path)?);
    for p in &cloud.points {
        writeln!(
            out,
            "{} {} {}",
            p[0].to_f64().unwrap(),
            p[1].to_f64().unwrap(),
            p[2].to_f64().unwrap()
        )?;
    }
    out.flush()?;
    Ok(())
}
