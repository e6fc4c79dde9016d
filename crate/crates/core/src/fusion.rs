//! Multi-frame extrinsic fusion: score per-frame poses, keep the top
//! fraction, and average them (translation mean + quaternion eigen-average).

use thiserror::Error;

use crate::geometry::{
    average_quaternions, EulerAngles, GeometryError, RigidTransform, UnitQuaternion,
};
use crate::optimize::{chamfer, ChamferParams, OptimizeError};
use crate::projection::PointCloud;
use crate::scalar::{cast, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum FusionError {
    #[error("scored pose set is empty")]
    EmptySet,
    #[error("scores must be positive")]
    BadScore,
    #[error("selection ratio must lie in (0, 1]")]
    BadRatio,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Chamfer(#[from] OptimizeError),
}

/// How the selected poses are weighted in the average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    ScoreProportional,
    Uniform,
}

/// Per-frame poses with quality scores and the selection ratio `x`; entries
/// keep their frame order until `fuse` ranks them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPoseSet<T: Scalar> {
    pub entries: Vec<(RigidTransform<T>, T)>,
    pub selection_ratio: f64,
    pub weighting: Weighting,
}

impl<T: Scalar> ScoredPoseSet<T> {
    pub fn new(
        entries: Vec<(RigidTransform<T>, T)>,
        selection_ratio: f64,
    ) -> Result<Self, FusionError> {
        if entries.is_empty() {
            return Err(FusionError::EmptySet);
        }
        if entries.iter().any(|(_, s)| *s <= T::zero()) {
            return Err(FusionError::BadScore);
        }
        if !(selection_ratio > 0.0 && selection_ratio <= 1.0) {
            return Err(FusionError::BadRatio);
        }
        Ok(Self {
            entries,
            selection_ratio,
            weighting: Weighting::default(),
        })
    }

    pub fn with_weighting(mut self, weighting: Weighting) -> Self {
        self.weighting = weighting;
        self
    }

    /// Number of poses the ratio selects: `ceil(x * n)`, at least 1.
    pub fn selection_count(&self) -> usize {
        let k = (self.selection_ratio * self.entries.len() as f64).ceil() as usize;
        k.clamp(1, self.entries.len())
    }
}

/// Self-supervised quality score: `exp(-chamfer)` of the lidar cloud
/// transformed by the pose against the camera depth cloud.
pub fn score_self_supervised<T: Scalar>(
    pose: &RigidTransform<T>,
    lidar_cloud: &PointCloud<T>,
    cam_cloud: &PointCloud<T>,
) -> Result<T, FusionError> {
    let transformed = lidar_cloud.transformed(pose);
    let l_cd = chamfer(&transformed, cam_cloud, &ChamferParams::default())?;
    Ok((-l_cd).exp())
}

/// Supervised quality score against a reference pose:
/// `exp(-(0.1 ||e' - e|| + ||t' - t||))` with Euler angles in degrees.
pub fn score_supervised<T: Scalar>(
    pose: &RigidTransform<T>,
    reference: &RigidTransform<T>,
) -> Result<T, FusionError> {
    let e = EulerAngles::from_rotation(&pose.rotation)?;
    let e_ref = EulerAngles::from_rotation(&reference.rotation)?;
    let angle_term = cast::<T>(0.1) * (e_ref.as_vector() - e.as_vector()).norm();
    let trans_term = (reference.translation - pose.translation).norm();
    Ok((-(angle_term + trans_term)).exp())
}

/// Ranks by score (stable, so ties keep frame order), keeps the top
/// `ceil(x*n)`, and averages: weighted translation mean plus weighted
/// quaternion eigen-average for the rotation.
pub fn fuse<T: Scalar>(set: &ScoredPoseSet<T>) -> Result<RigidTransform<T>, FusionError> {
    if set.entries.is_empty() {
        return Err(FusionError::EmptySet);
    }
    let mut order: Vec<usize> = (0..set.entries.len()).collect();
    order.sort_by(|&a, &b| {
        set.entries[b]
            .1
            .partial_cmp(&set.entries[a].1)
            .unwrap()
            .then(a.cmp(&b))
    });
    let k = set.selection_count();
    let selected = &order[..k];

    let weights: Vec<T> = match set.weighting {
        Weighting::ScoreProportional => {
            let sum = selected
                .iter()
                .fold(T::zero(), |a, &i| a + set.entries[i].1);
            selected.iter().map(|&i| set.entries[i].1 / sum).collect()
        }
        Weighting::Uniform => {
            let w = T::one() / cast(k as f64);
            vec![w; k]
        }
    };

    let mut translation = nalgebra::Vector3::zeros();
    for (&i, &w) in selected.iter().zip(&weights) {
        translation += set.entries[i].0.translation * w;
    }
    let quats: Vec<UnitQuaternion<T>> = selected
        .iter()
        .map(|&i| UnitQuaternion::from_rotation(&set.entries[i].0.rotation))
        .collect();
    let mean_q = average_quaternions(&quats, &weights)?;
    Ok(RigidTransform {
        rotation: mean_q.to_rotation(),
        translation,
    })
}
