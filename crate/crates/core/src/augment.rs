//! Double-sided mis-calibration augmentation: renders (LDP, CDP, relative
//! pose) triplets from one scene by perturbing virtual sensors on both the
//! camera and the LiDAR side, so projections form a many-to-many mapping.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use crate::geometry::MiscalibrationRange;
use crate::geometry::{relative_pose, sample_perturbation_with, RigidTransform};
use crate::projection::{project, CameraIntrinsics, DepthImage, PointCloud};
use crate::scalar::{cast, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum AugmentError {
    #[error("input cloud is empty")]
    EmptyCloud,
    #[error("no overlap: a rendered depth image came out empty")]
    NoOverlap,
}

/// One augmented training/evaluation sample. The stored poses always satisfy
/// `t_gt = t_cam ∘ t_lidar⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSample<T: Scalar> {
    pub ldp: DepthImage<T>,
    pub cdp: DepthImage<T>,
    pub t_cam: RigidTransform<T>,
    pub t_lidar: RigidTransform<T>,
    pub t_gt: RigidTransform<T>,
}

/// Double-sided sample generation.
///
/// Both clouds must be expressed in the base (LiDAR) frame, the frame
/// `base_extrinsic` maps out of. The virtual camera pose is a perturbation
/// of the base extrinsic; the virtual LiDAR pose chains a second
/// perturbation off the virtual camera. Deterministic per seed.
pub fn generate_sample<T: Scalar>(
    lidar_cloud: &PointCloud<T>,
    cam_depth_cloud: &PointCloud<T>,
    base_extrinsic: &RigidTransform<T>,
    c_cam: &MiscalibrationRange<T>,
    c_lidar: &MiscalibrationRange<T>,
    intrinsics: &CameraIntrinsics<T>,
    seed: u64,
) -> Result<AugmentedSample<T>, AugmentError> {
    if lidar_cloud.is_empty() || cam_depth_cloud.is_empty() {
        return Err(AugmentError::EmptyCloud);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta_cam = sample_perturbation_with(c_cam, &mut rng);
    let delta_lidar = sample_perturbation_with(c_lidar, &mut rng);

    let t_cam = delta_cam.compose(base_extrinsic);
    let t_lidar = delta_lidar.compose(&t_cam);
    let cdp = project(cam_depth_cloud, &t_cam, intrinsics);
    let ldp = project(lidar_cloud, &t_lidar, intrinsics);
    if cdp.valid_count() == 0 || ldp.valid_count() == 0 {
        return Err(AugmentError::NoOverlap);
    }
    let t_gt = relative_pose(&t_cam, &t_lidar);
    Ok(AugmentedSample {
        ldp,
        cdp,
        t_cam,
        t_lidar,
        t_gt,
    })
}

/// Single-sided baseline: only the LiDAR-side pose is perturbed and the
/// camera view stays fixed at the base extrinsic, so every seed produces the
/// same CDP (the many-to-one mapping). The camera-side image is rendered
/// from the LiDAR cloud since no camera cloud enters this variant.
pub fn generate_single_sided<T: Scalar>(
    lidar_cloud: &PointCloud<T>,
    base_extrinsic: &RigidTransform<T>,
    range: &MiscalibrationRange<T>,
    intrinsics: &CameraIntrinsics<T>,
    seed: u64,
) -> Result<AugmentedSample<T>, AugmentError> {
    if lidar_cloud.is_empty() {
        return Err(AugmentError::EmptyCloud);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = sample_perturbation_with(range, &mut rng);
    let t_cam = base_extrinsic.clone();
    let t_lidar = delta.compose(&t_cam);
    let cdp = project(lidar_cloud, &t_cam, intrinsics);
    let ldp = project(lidar_cloud, &t_lidar, intrinsics);
    if cdp.valid_count() == 0 || ldp.valid_count() == 0 {
        return Err(AugmentError::NoOverlap);
    }
    let t_gt = relative_pose(&t_cam, &t_lidar);
    Ok(AugmentedSample {
        ldp,
        cdp,
        t_cam,
        t_lidar,
        t_gt,
    })
}

/// Checks the stored-pose invariant of a sample within tolerance.
pub fn check_pose_invariant<T: Scalar>(sample: &AugmentedSample<T>) -> bool {
    let recomputed = relative_pose(&sample.t_cam, &sample.t_lidar);
    (recomputed.rotation - sample.t_gt.rotation).norm() < cast(1e-9)
        && (recomputed.translation - sample.t_gt.translation).norm() < cast(1e-9)
}
