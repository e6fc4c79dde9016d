//! 16-bit binary PGM (P5, maxval 65535, big-endian samples) as the depth
//! image format: metric images store millimeters, normalized images map
//! 65535 to 1.0. Zero is "no data" in both.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::depth_refine::NormalizedDepthImage;
use crate::projection::{CameraIntrinsics, DepthImage};
use crate::scalar::{cast, Scalar};

use super::IoError;

pub const PGM_MAXVAL: u16 = 65535;

/// Reads the header and raw 16-bit samples of a P5 file.
pub fn read_pgm16(path: &Path) -> Result<(usize, usize, Vec<u16>), IoError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let mut cursor = 0usize;

    let mut token = |bytes: &[u8]| -> Result<String, IoError> {
        // Skip whitespace and # comments between tokens.
        loop {
            while cursor < bytes.len() && bytes[cursor].is_ascii_whitespace() {
                cursor += 1;
            }
            if cursor < bytes.len() && bytes[cursor] == b'#' {
                while cursor < bytes.len() && bytes[cursor] != b'\n' {
                    cursor += 1;
                }
                continue;
            }
            break;
        }
        let start = cursor;
        while cursor < bytes.len() && !bytes[cursor].is_ascii_whitespace() {
            cursor += 1;
        }
        if start == cursor {
            return Err(IoError::BadHeader("truncated header".to_string()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..cursor]).to_string())
    };

    if token(&bytes)? != "P5" {
        return Err(IoError::BadMagic { expected: "P5" });
    }
    let width: usize = token(&bytes)?
        .parse()
        .map_err(|_| IoError::BadHeader("bad width".to_string()))?;
    let height: usize = token(&bytes)?
        .parse()
        .map_err(|_| IoError::BadHeader("bad height".to_string()))?;
    let maxval: u32 = token(&bytes)?
        .parse()
        .map_err(|_| IoError::BadHeader("bad maxval".to_string()))?;
    if maxval != PGM_MAXVAL as u32 {
        return Err(IoError::BadHeader(format!(
            "maxval {maxval} unsupported, depth images use {PGM_MAXVAL}"
        )));
    }
    // Exactly one whitespace byte separates the header from the samples.
    cursor += 1;
    let expected = width * height * 2;
    if bytes.len() - cursor < expected {
        return Err(IoError::BadHeader(format!(
            "sample data truncated: need {expected} bytes, have {}",
            bytes.len() - cursor
        )));
    }
    let mut samples = Vec::with_capacity(width * height);
    for i in 0..width * height {
        let o = cursor + 2 * i;
        samples.push(u16::from_be_bytes([bytes[o], bytes[o + 1]]));
    }
    Ok((width, height, samples))
}

pub fn write_pgm16(
    path: &Path,
    width: usize,
    height: usize,
    samples: &[u16],
) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{width} {height}\n{PGM_MAXVAL}\n")?;
    for s in samples {
        out.write_all(&s.to_be_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Quantizes metric depth to millimeters, saturating at the 16-bit limit.
pub fn depth_to_millimeters<T: Scalar>(depth: T) -> u16 {
    let mm = (depth * cast(1000.0)).round().to_f64().unwrap_or(0.0);
    mm.clamp(0.0, PGM_MAXVAL as f64) as u16
}

pub fn write_depth_pgm<T: Scalar>(path: &Path, image: &DepthImage<T>) -> Result<(), IoError> {
    let samples: Vec<u16> = image
        .data()
        .iter()
        .map(|&d| depth_to_millimeters(d))
        .collect();
    write_pgm16(path, image.width(), image.height(), &samples)
}

pub fn read_depth_pgm<T: Scalar>(
    path: &Path,
    intrinsics: CameraIntrinsics<T>,
) -> Result<DepthImage<T>, IoError> {
    let (width, height, samples) = read_pgm16(path)?;
    if width != intrinsics.width || height != intrinsics.height {
        return Err(IoError::SizeMismatch {
            got_w: width,
            got_h: height,
            want_w: intrinsics.width,
            want_h: intrinsics.height,
        });
    }
    let data: Vec<T> = samples
        .iter()
        .map(|&s| cast::<T>(s as f64) / cast(1000.0))
        .collect();
    Ok(DepthImage::from_data(intrinsics, data).expect("millimeter samples are valid depths"))
}

pub fn write_normalized_pgm<T: Scalar>(
    path: &Path,
    image: &NormalizedDepthImage<T>,
) -> Result<(), IoError> {
    let samples: Vec<u16> = image
        .values()
        .iter()
        .map(|&v| {
            let s = (v * cast(PGM_MAXVAL as f64))
                .round()
                .to_f64()
                .unwrap_or(0.0);
            s.clamp(0.0, PGM_MAXVAL as f64) as u16
        })
        .collect();
    write_pgm16(path, image.width(), image.height(), &samples)
}

pub fn read_normalized_pgm<T: Scalar>(
    path: &Path,
    intrinsics: CameraIntrinsics<T>,
) -> Result<NormalizedDepthImage<T>, IoError> {
    let (width, height, samples) = read_pgm16(path)?;
    if width != intrinsics.width || height != intrinsics.height {
        return Err(IoError::SizeMismatch {
            got_w: width,
            got_h: height,
            want_w: intrinsics.width,
            want_h: intrinsics.height,
        });
    }
    let values: Vec<T> = samples
        .iter()
        .map(|&s| cast::<T>(s as f64) / cast(PGM_MAXVAL as f64))
        .collect();
    Ok(NormalizedDepthImage::from_values(intrinsics, values)
        .expect("16-bit samples normalize into [0, 1]"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn intr() -> CameraIntrinsics<f64> {
        CameraIntrinsics::new(100.0, 100.0, 16.0, 8.0, 32, 16).unwrap()
    }

    #[test]
    fn depth_pgm_roundtrip_is_millimeter_exact() {
        let mut rng = StdRng::seed_from_u64(121);
        let mut img = DepthImage::zeros(intr());
        for v in 0..16 {
            for u in 0..32 {
                if rng.random_range(0..4) != 0 {
                    img.set(u, v, rng.random_range(0.001..60.0));
                }
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("depth.pgm");
        write_depth_pgm(&path, &img).unwrap();
        let back = read_depth_pgm(&path, intr()).unwrap();
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= 0.0005 + 1e-12, "{a} vs {b}");
        }
        // Quantized values round-trip bit-exactly at the byte level.
        let path2 = dir.path().join("depth2.pgm");
        write_depth_pgm(&path2, &back).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn normalized_pgm_scales_fullrange_to_one() {
        let values: Vec<f64> = (0..32 * 16).map(|i| (i % 17) as f64 / 16.0).collect();
        let img = NormalizedDepthImage::from_values(intr(), values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("norm.pgm");
        write_normalized_pgm(&path, &img).unwrap();
        let back = read_normalized_pgm(&path, intr()).unwrap();
        for (a, b) in img.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-12);
        }
        let (_, _, samples) = read_pgm16(&path).unwrap();
        assert!(samples.contains(&65535));
    }

    #[test]
    fn header_rejects_wrong_magic_and_maxval() {
        let dir = tempfile::tempdir().unwrap();
        let p6 = dir.path().join("bad.pgm");
        std::fs::write(&p6, b"P6\n2 2\n65535\n").unwrap();
        assert!(matches!(read_pgm16(&p6), Err(IoError::BadMagic { .. })));

        let eight_bit = dir.path().join("8bit.pgm");
        std::fs::write(&eight_bit, b"P5\n1 1\n255\n\0").unwrap();
        assert!(matches!(read_pgm16(&eight_bit), Err(IoError::BadHeader(_))));
    }

    #[test]
    fn header_comments_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("comment.pgm");
        let mut bytes = b"P5\n# made by a test\n2 1\n65535\n".to_vec();
        bytes.extend_from_slice(&1234u16.to_be_bytes());
        bytes.extend_from_slice(&42u16.to_be_bytes());
        std::fs::write(&path, bytes).unwrap();
        let (w, h, samples) = read_pgm16(&path).unwrap();
        assert_eq!((w, h), (2, 1));
        assert_eq!(samples, vec![1234, 42]);
    }

    #[test]
    fn saturation_clamps_at_limit() {
        assert_eq!(depth_to_millimeters(70.0f64), 65535);
        assert_eq!(depth_to_millimeters(0.0f64), 0);
        assert_eq!(depth_to_millimeters(1.2345f64), 1235);
    }
}
