//! Target-free LiDAR-camera extrinsic calibration toolkit.
//!
//! The crate covers the classical calibration pipeline end to end:
//! pinhole depth projection, LiDAR-guided refinement of normalized monocular
//! depth maps, difference-map construction, double-sided mis-calibration
//! augmentation, Chamfer-distance pose optimization over SE(3), and
//! multi-frame extrinsic fusion. A synthetic scene generator provides ground
//! truth for verification.
//!
//! All numeric code is generic over the scalar type through
//! [`scalar::Scalar`] (f32 or f64); concrete aliases live at the crate root.

pub mod augment;
pub mod depth_refine;
pub mod diffmap;
pub mod fusion;
pub mod geometry;
pub mod io;
pub mod optimize;
pub mod projection;
pub mod scalar;
pub mod scene;

pub use scalar::Scalar;

// Concrete type aliases. File I/O and the CLI work in f64; f32 is available
// for memory-bound uses.
pub type RigidTransform32 = geometry::RigidTransform<f32>;
pub type RigidTransform64 = geometry::RigidTransform<f64>;
pub type EulerAngles32 = geometry::EulerAngles<f32>;
pub type EulerAngles64 = geometry::EulerAngles<f64>;
pub type UnitQuaternion32 = geometry::UnitQuaternion<f32>;
pub type UnitQuaternion64 = geometry::UnitQuaternion<f64>;
pub type MiscalibrationRange32 = geometry::MiscalibrationRange<f32>;
pub type MiscalibrationRange64 = geometry::MiscalibrationRange<f64>;
pub type CameraIntrinsics32 = projection::CameraIntrinsics<f32>;
pub type CameraIntrinsics64 = projection::CameraIntrinsics<f64>;
pub type PointCloud32 = projection::PointCloud<f32>;
pub type PointCloud64 = projection::PointCloud<f64>;
pub type DepthImage32 = projection::DepthImage<f32>;
pub type DepthImage64 = projection::DepthImage<f64>;
pub type NormalizedDepthImage32 = depth_refine::NormalizedDepthImage<f32>;
pub type NormalizedDepthImage64 = depth_refine::NormalizedDepthImage<f64>;
pub type AnchorSet32 = depth_refine::AnchorSet<f32>;
pub type AnchorSet64 = depth_refine::AnchorSet<f64>;
pub type DifferenceMap32 = diffmap::DifferenceMap<f32>;
pub type DifferenceMap64 = diffmap::DifferenceMap<f64>;
pub type AugmentedSample32 = augment::AugmentedSample<f32>;
pub type AugmentedSample64 = augment::AugmentedSample<f64>;
pub type ScoredPoseSet32 = fusion::ScoredPoseSet<f32>;
pub type ScoredPoseSet64 = fusion::ScoredPoseSet<f64>;
pub type SceneSpec32 = scene::SceneSpec<f32>;
pub type SceneSpec64 = scene::SceneSpec<f64>;
pub type ChamferParams32 = optimize::ChamferParams<f32>;
pub type ChamferParams64 = optimize::ChamferParams<f64>;
pub type LossBreakdown32 = optimize::LossBreakdown<f32>;
pub type LossBreakdown64 = optimize::LossBreakdown<f64>;
pub type SpatialIndex32 = optimize::SpatialIndex<f32>;
pub type SpatialIndex64 = optimize::SpatialIndex<f64>;
