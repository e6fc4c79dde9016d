//! Binary PPM (P6) output for visual inspection: LiDAR depth pixels are
//! colormapped over a gray rendering of the camera depth image.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::projection::DepthImage;
use crate::scalar::Scalar;

use super::IoError;

pub fn write_ppm(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<(), IoError> {
    assert_eq!(rgb.len(), width * height * 3);
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P6\n{width} {height}\n255\n")?;
    out.write_all(rgb)?;
    out.flush()?;
    Ok(())
}

pub fn read_ppm(path: &Path) -> Result<(usize, usize, Vec<u8>), IoError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let header = std::str::from_utf8(&bytes[..bytes.len().min(64)])
        .map_err(|_| IoError::BadHeader("non-ascii header".to_string()))?;
    let mut fields = header.split_ascii_whitespace();
    if fields.next() != Some("P6") {
        return Err(IoError::BadMagic { expected: "P6" });
    }
    let width: usize = fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| IoError::BadHeader("bad width".to_string()))?;
    let height: usize = fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| IoError::BadHeader("bad height".to_string()))?;
    let maxval: usize = fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| IoError::BadHeader("bad maxval".to_string()))?;
    if maxval != 255 {
        return Err(IoError::BadHeader(format!("maxval {maxval} unsupported")));
    }
    // Data starts right after the single whitespace following maxval.
    let mut pos = 0;
    let mut seen = 0;
    while pos < bytes.len() && seen < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        seen += 1;
    }
    pos += 1;
    let expected = width * height * 3;
    if bytes.len() - pos < expected {
        return Err(IoError::BadHeader("pixel data truncated".to_string()));
    }
    Ok((width, height, bytes[pos..pos + expected].to_vec()))
}

/// Depth-to-color ramp (near = red, far = blue) on normalized depth.
fn colormap(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let r = (1.0 - t).powf(0.7);
    let g = 1.0 - (2.0 * t - 1.0).abs();
    let b = t.powf(0.7);
    [(r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8]
}

/// Composes the overlay buffer: gray background from the camera depth,
/// colormapped LiDAR pixels on top.
pub fn compose_overlay<T: Scalar>(ldp: &DepthImage<T>, background: &DepthImage<T>) -> Vec<u8> {
    let (w, h) = (ldp.width(), ldp.height());
    let mut rgb = vec![0u8; w * h * 3];
    let bg_max = background
        .data()
        .iter()
        .fold(0.0f64, |a, &d| a.max(d.to_f64().unwrap()));
    let ldp_max = ldp
        .data()
        .iter()
        .fold(0.0f64, |a, &d| a.max(d.to_f64().unwrap()));
    for i in 0..w * h {
        let bg = background.data()[i].to_f64().unwrap();
        if bg > 0.0 && bg_max > 0.0 {
            let gray = (bg / bg_max * 200.0) as u8 + 30;
            rgb[3 * i] = gray;
            rgb[3 * i + 1] = gray;
            rgb[3 * i + 2] = gray;
        }
        let d = ldp.data()[i].to_f64().unwrap();
        if d > 0.0 && ldp_max > 0.0 {
            let c = colormap(d / ldp_max);
            rgb[3 * i] = c[0];
            rgb[3 * i + 1] = c[1];
            rgb[3 * i + 2] = c[2];
        }
    }
    rgb
}

/// Renders the overlay straight to a PPM file. Sizes must match.
pub fn render_overlay<T: Scalar>(
    ldp: &DepthImage<T>,
    background: &DepthImage<T>,
    out_path: &Path,
) -> Result<(), IoError> {
    if !ldp.same_size(background) {
        return Err(IoError::SizeMismatch {
            got_w: background.width(),
            got_h: background.height(),
            want_w: ldp.width(),
            want_h: ldp.height(),
        });
    }
    let rgb = compose_overlay(ldp, background);
    write_ppm(out_path, ldp.width(), ldp.height(), &rgb)
}
