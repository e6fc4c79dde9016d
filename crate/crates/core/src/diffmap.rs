//! Three-channel LiDAR-camera difference map: the LiDAR depth projection,
//! the large-magnitude depth differences, and the small-magnitude ones.

use thiserror::Error;

use crate::projection::DepthImage;
use crate::scalar::{cast, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum DiffMapError {
    #[error("image sizes differ: {0}x{1} vs {2}x{3}")]
    SizeMismatch(usize, usize, usize, usize),
    #[error("threshold e_tar must be positive")]
    BadThreshold,
}

/// Default magnitude gate in meters, the translation bar for a good result.
pub const DEFAULT_E_TAR: f64 = 0.1;

/// The difference map: channel 1 is the LDP verbatim, channel 2 holds the
/// differences with |delta| > e_tar, channel 3 those with |delta| <= e_tar.
/// Channels 2 and 3 have disjoint supports and sum to the raw difference.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceMap<T: Scalar> {
    pub width: usize,
    pub height: usize,
    pub e_tar: T,
    pub lidar_depth: Vec<T>,
    pub large_diff: Vec<T>,
    pub small_diff: Vec<T>,
}

impl<T: Scalar> DifferenceMap<T> {
    pub fn channel(&self, index: usize) -> &[T] {
        match index {
            0 => &self.lidar_depth,
            1 => &self.large_diff,
            2 => &self.small_diff,
            _ => panic!("difference map has 3 channels"),
        }
    }
}

/// Builds the difference map per-pixel: delta = ldp - cdp, gated by
/// magnitude into the two difference channels.
///
/// Pixels without a LiDAR return still produce delta = -cdp; see
/// [`build_difference_map_masked`] for the variant that zeroes them.
pub fn build_difference_map<T: Scalar>(
    ldp: &DepthImage<T>,
    cdp_metric: &DepthImage<T>,
    e_tar: T,
) -> Result<DifferenceMap<T>, DiffMapError> {
    build_impl(ldp, cdp_metric, e_tar, false)
}

/// Like [`build_difference_map`] but pixels where the LDP has no return are
/// zeroed in all channels.
pub fn build_difference_map_masked<T: Scalar>(
    ldp: &DepthImage<T>,
    cdp_metric: &DepthImage<T>,
    e_tar: T,
) -> Result<DifferenceMap<T>, DiffMapError> {
    build_impl(ldp, cdp_metric, e_tar, true)
}

fn build_impl<T: Scalar>(
    ldp: &DepthImage<T>,
    cdp_metric: &DepthImage<T>,
    e_tar: T,
    mask_no_return: bool,
) -> Result<DifferenceMap<T>, DiffMapError> {
    if !ldp.same_size(cdp_metric) {
        return Err(DiffMapError::SizeMismatch(
            ldp.width(),
            ldp.height(),
            cdp_metric.width(),
            cdp_metric.height(),
        ));
    }
    if e_tar <= T::zero() {
        return Err(DiffMapError::BadThreshold);
    }
    let n = ldp.width() * ldp.height();
    let mut map = DifferenceMap {
        width: ldp.width(),
        height: ldp.height(),
        e_tar,
        lidar_depth: Vec::with_capacity(n),
        large_diff: vec![T::zero(); n],
        small_diff: vec![T::zero(); n],
    };
    map.lidar_depth.extend_from_slice(ldp.data());
    for (i, (&l, &c)) in ldp.data().iter().zip(cdp_metric.data()).enumerate() {
        if mask_no_return && l <= T::zero() {
            map.lidar_depth[i] = T::zero();
            continue;
        }
        let delta = l - c;
        if delta.abs() > e_tar {
            map.large_diff[i] = delta;
        } else {
            map.small_diff[i] = delta;
        }
    }
    Ok(map)
}

/// Offset used when a difference channel is stored as a 16-bit PGM:
/// stored = delta * 1000 + 32768.
pub const PGM_DIFF_OFFSET: f64 = 32768.0;

/// Encodes a difference channel into millimeter-offset 16-bit samples.
pub fn encode_diff_channel<T: Scalar>(channel: &[T]) -> Vec<u16> {
    channel
        .iter()
        .map(|&d| {
            let v = d * cast(1000.0) + cast(PGM_DIFF_OFFSET);
            let v = v.round().to_f64().unwrap_or(0.0);
            v.clamp(0.0, 65535.0) as u16
        })
        .collect()
}

/// Dumps the map as three 16-bit PGMs in `dir`: `diff_lidar.pgm` in plain
/// millimeters, `diff_large.pgm` and `diff_small.pgm` offset-encoded.
pub fn write_difference_map_pgms<T: Scalar>(
    dir: &std::path::Path,
    map: &DifferenceMap<T>,
) -> Result<(), crate::io::IoError> {
    use crate::io::pgm::{depth_to_millimeters, write_pgm16};
    let lidar: Vec<u16> = map
        .lidar_depth
        .iter()
        .map(|&d| depth_to_millimeters(d))
        .collect();
    write_pgm16(&dir.join("diff_lidar.pgm"), map.width, map.height, &lidar)?;
    write_pgm16(
        &dir.join("diff_large.pgm"),
        map.width,
        map.height,
        &encode_diff_channel(&map.large_diff),
    )?;
    write_pgm16(
        &dir.join("diff_small.pgm"),
        map.width,
        map.height,
        &encode_diff_channel(&map.small_diff),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::CameraIntrinsics;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn intr() -> CameraIntrinsics<f64> {
        CameraIntrinsics::new(100.0, 100.0, 8.0, 4.0, 16, 8).unwrap()
    }

    fn random_image(rng: &mut StdRng, sparse: bool) -> DepthImage<f64> {
        let mut img = DepthImage::zeros(intr());
        for v in 0..8 {
            for u in 0..16 {
                if !sparse || rng.random_range(0..3) == 0 {
                    img.set(u, v, rng.random_range(0.5..20.0));
                }
            }
        }
        img
    }

    #[test]
    fn identical_inputs_zero_both_difference_channels() {
        let mut rng = StdRng::seed_from_u64(31);
        let img = random_image(&mut rng, false);
        let map = build_difference_map(&img, &img, 0.1).unwrap();
        assert_eq!(map.lidar_depth, img.data());
        assert!(map.large_diff.iter().all(|&d| d == 0.0));
        assert!(map.small_diff.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn magnitude_gating_routes_single_pixel() {
        let mut ldp = DepthImage::zeros(intr());
        let mut cdp = DepthImage::zeros(intr());
        ldp.set(3, 2, 5.5);
        cdp.set(3, 2, 5.0);
        let map = build_difference_map(&ldp, &cdp, 0.1).unwrap();
        let i = 2 * 16 + 3;
        assert_eq!(map.large_diff[i], 0.5);
        assert_eq!(map.small_diff[i], 0.0);

        cdp.set(3, 2, 5.45);
        let map = build_difference_map(&ldp, &cdp, 0.1).unwrap();
        assert!((map.small_diff[i] - 0.05).abs() < 1e-12);
        assert_eq!(map.large_diff[i], 0.0);
    }

    #[test]
    fn matches_pointwise_formula_oracle() {
        let mut rng = StdRng::seed_from_u64(32);
        for _ in 0..20 {
            let ldp = random_image(&mut rng, true);
            let cdp = random_image(&mut rng, false);
            let e_tar = 0.1;
            let map = build_difference_map(&ldp, &cdp, e_tar).unwrap();
            for i in 0..16 * 8 {
                let delta = ldp.data()[i] - cdp.data()[i];
                let (big, small) = if delta.abs() > e_tar {
                    (delta, 0.0)
                } else {
                    (0.0, delta)
                };
                assert_eq!(map.lidar_depth[i], ldp.data()[i]);
                assert_eq!(map.large_diff[i], big);
                assert_eq!(map.small_diff[i], small);
            }
        }
    }

    #[test]
    fn channels_are_disjoint_and_sum_to_delta() {
        let mut rng = StdRng::seed_from_u64(33);
        for _ in 0..100 {
            let ldp = random_image(&mut rng, true);
            let cdp = random_image(&mut rng, true);
            let map = build_difference_map(&ldp, &cdp, 0.1).unwrap();
            for i in 0..16 * 8 {
                assert_eq!(map.large_diff[i] * map.small_diff[i], 0.0);
                let delta = ldp.data()[i] - cdp.data()[i];
                assert!((map.large_diff[i] + map.small_diff[i] - delta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scaling_inputs_and_threshold_scales_channels() {
        let mut rng = StdRng::seed_from_u64(34);
        let ldp = random_image(&mut rng, true);
        let cdp = random_image(&mut rng, false);
        let s = 2.5;
        let scale = |img: &DepthImage<f64>| {
            let mut out = img.clone();
            for d in out.data_mut() {
                *d *= s;
            }
            out
        };
        let base = build_difference_map(&ldp, &cdp, 0.1).unwrap();
        let scaled = build_difference_map(&scale(&ldp), &scale(&cdp), 0.1 * s).unwrap();
        for i in 0..16 * 8 {
            assert!((scaled.lidar_depth[i] - s * base.lidar_depth[i]).abs() < 1e-9);
            assert!((scaled.large_diff[i] - s * base.large_diff[i]).abs() < 1e-9);
            assert!((scaled.small_diff[i] - s * base.small_diff[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn masked_variant_zeroes_pixels_without_lidar_return() {
        let mut ldp = DepthImage::zeros(intr());
        let mut cdp = DepthImage::zeros(intr());
        ldp.set(1, 1, 4.0);
        cdp.set(1, 1, 4.0);
        cdp.set(2, 2, 6.0);
        let unmasked = build_difference_map(&ldp, &cdp, 0.1).unwrap();
        assert_eq!(unmasked.large_diff[2 * 16 + 2], -6.0);
        let masked = build_difference_map_masked(&ldp, &cdp, 0.1).unwrap();
        assert_eq!(masked.large_diff[2 * 16 + 2], 0.0);
        assert_eq!(masked.small_diff[2 * 16 + 2], 0.0);
    }

    #[test]
    fn rejects_mismatched_sizes_and_bad_threshold() {
        let a = DepthImage::<f64>::zeros(intr());
        let b = DepthImage::zeros(CameraIntrinsics::new(100.0, 100.0, 4.0, 4.0, 8, 8).unwrap());
        assert!(matches!(
            build_difference_map(&a, &b, 0.1),
            Err(DiffMapError::SizeMismatch(..))
        ));
        assert_eq!(
            build_difference_map(&a, &a, 0.0),
            Err(DiffMapError::BadThreshold)
        );
    }

    #[test]
    fn diff_channel_encoding_is_offset_millimeters() {
        let encoded = encode_diff_channel(&[0.0f64, 0.5, -0.5, 40.0]);
        assert_eq!(encoded, vec![32768, 33268, 32268, 65535]);
    }

    #[test]
    fn pgm_dump_writes_three_channels() {
        let mut rng = StdRng::seed_from_u64(35);
        let ldp = random_image(&mut rng, true);
        let cdp = random_image(&mut rng, false);
        let map = build_difference_map(&ldp, &cdp, 0.1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_difference_map_pgms(dir.path(), &map).unwrap();
        for name in ["diff_lidar.pgm", "diff_large.pgm", "diff_small.pgm"] {
            let (w, h, samples) = crate::io::pgm::read_pgm16(&dir.path().join(name)).unwrap();
            assert_eq!((w, h), (16, 8));
            assert_eq!(samples.len(), 16 * 8);
        }
        // Offset decoding restores the large channel to the millimeter grid.
        let (_, _, samples) =
            crate::io::pgm::read_pgm16(&dir.path().join("diff_large.pgm")).unwrap();
        for (s, d) in samples.iter().zip(&map.large_diff) {
            let decoded = (*s as f64 - 32768.0) / 1000.0;
            assert!((decoded - d).abs() <= 0.0005 + 1e-12);
        }
    }
}
