//! Pinhole rendering of point clouds into depth images and back-projection
//! of depth images into clouds. This is where LDP and CDP frames come from.

use nalgebra::Vector3;
use thiserror::Error;

use crate::geometry::RigidTransform;
use crate::scalar::{cast, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("focal lengths must be positive")]
    BadFocalLength,
    #[error("principal point must lie strictly inside the image")]
    BadPrincipalPoint,
    #[error("image dimensions must be nonzero")]
    BadDimensions,
    #[error("depth values must be finite and nonnegative")]
    BadDepthValue,
    #[error("intensity count {got} does not match point count {expected}")]
    IntensityMismatch { got: usize, expected: usize },
    #[error("image sizes differ: {0}x{1} vs {2}x{3}")]
    SizeMismatch(usize, usize, usize, usize),
}

/// Pinhole camera model: focal lengths and principal point in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraIntrinsics<T: Scalar> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
}

impl<T: Scalar> CameraIntrinsics<T> {
    pub fn new(
        fx: T,
        fy: T,
        cx: T,
        cy: T,
        width: usize,
        height: usize,
    ) -> Result<Self, ProjectionError> {
        if fx <= T::zero() || fy <= T::zero() {
            return Err(ProjectionError::BadFocalLength);
        }
        if width == 0 || height == 0 {
            return Err(ProjectionError::BadDimensions);
        }
        if cx <= T::zero()
            || cx >= cast(width as f64)
            || cy <= T::zero()
            || cy >= cast(height as f64)
        {
            return Err(ProjectionError::BadPrincipalPoint);
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// The default virtual camera: 256x512 pixels, focal length 600,
    /// principal point at the image center.
    pub fn default_virtual() -> Self {
        Self::new(cast(600.0), cast(600.0), cast(256.0), cast(128.0), 512, 256)
            .expect("default virtual camera is valid")
    }
}

/// A list of 3D points in meters, optionally with per-point intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T: Scalar> {
    pub points: Vec<Vector3<T>>,
    pub intensity: Option<Vec<T>>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new(points: Vec<Vector3<T>>) -> Self {
        Self {
            points,
            intensity: None,
        }
    }

    pub fn with_intensity(
        points: Vec<Vector3<T>>,
        intensity: Vec<T>,
    ) -> Result<Self, ProjectionError> {
        if intensity.len() != points.len() {
            return Err(ProjectionError::IntensityMismatch {
                got: intensity.len(),
                expected: points.len(),
            });
        }
        Ok(Self {
            points,
            intensity: Some(intensity),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies a rigid transform to every point, keeping intensities.
    pub fn transformed(&self, pose: &RigidTransform<T>) -> Self {
        Self {
            points: self.points.iter().map(|p| pose.apply(p)).collect(),
            intensity: self.intensity.clone(),
        }
    }
}

/// A depth image: row-major grid of metric depths, 0 meaning no measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage<T: Scalar> {
    pub intrinsics: CameraIntrinsics<T>,
    data: Vec<T>,
}

impl<T: Scalar> DepthImage<T> {
    pub fn zeros(intrinsics: CameraIntrinsics<T>) -> Self {
        let n = intrinsics.width * intrinsics.height;
        Self {
            intrinsics,
            data: vec![T::zero(); n],
        }
    }

    pub fn from_data(
        intrinsics: CameraIntrinsics<T>,
        data: Vec<T>,
    ) -> Result<Self, ProjectionError> {
        if data.len() != intrinsics.width * intrinsics.height {
            return Err(ProjectionError::SizeMismatch(
                intrinsics.width,
                intrinsics.height,
                data.len(),
                1,
            ));
        }
        if data.iter().any(|d| !d.is_finite() || *d < T::zero()) {
            return Err(ProjectionError::BadDepthValue);
        }
        Ok(Self { intrinsics, data })
    }

    pub fn width(&self) -> usize {
        self.intrinsics.width
    }

    pub fn height(&self) -> usize {
        self.intrinsics.height
    }

    /// Depth at column `u`, row `v`.
    pub fn get(&self, u: usize, v: usize) -> T {
        self.data[v * self.intrinsics.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, depth: T) {
        self.data[v * self.intrinsics.width + u] = depth;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn same_size<U: Scalar>(&self, other: &DepthImage<U>) -> bool {
        self.width() == other.width() && self.height() == other.height()
    }

    /// Number of pixels holding a measurement.
    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|d| **d > T::zero()).count()
    }
}

/// Renders a cloud into a depth image. Points are mapped by `pose` into the
/// camera frame; points with z <= 0 are culled; pixel coordinates round to
/// nearest; on collision the smaller depth wins.
pub fn project<T: Scalar>(
    cloud: &PointCloud<T>,
    pose: &RigidTransform<T>,
    intrinsics: &CameraIntrinsics<T>,
) -> DepthImage<T> {
    let mut image = DepthImage::zeros(intrinsics.clone());
    for point in &cloud.points {
        let cam = pose.apply(point);
        let z = cam[2];
        if z <= T::zero() {
            continue;
        }
        let u = (intrinsics.fx * cam[0] / z + intrinsics.cx).round();
        let v = (intrinsics.fy * cam[1] / z + intrinsics.cy).round();
        if u < T::zero() || v < T::zero() {
            continue;
        }
        let (ui, vi) = match (u.to_usize(), v.to_usize()) {
            (Some(ui), Some(vi)) => (ui, vi),
            _ => continue,
        };
        if ui >= intrinsics.width || vi >= intrinsics.height {
            continue;
        }
        let current = image.get(ui, vi);
        if current == T::zero() || z < current {
            image.set(ui, vi, z);
        }
    }
    image
}

/// Lifts every measured pixel back to a 3D point in the camera frame.
pub fn back_project<T: Scalar>(image: &DepthImage<T>) -> PointCloud<T> {
    let intr = &image.intrinsics;
    let mut points = Vec::new();
    for v in 0..intr.height {
        for u in 0..intr.width {
            let d = image.get(u, v);
            if d <= T::zero() {
                continue;
            }
            let x = d * (cast::<T>(u as f64) - intr.cx) / intr.fx;
            let y = d * (cast::<T>(v as f64) - intr.cy) / intr.fy;
            points.push(Vector3::new(x, y, d));
        }
    }
    PointCloud::new(points)
}
