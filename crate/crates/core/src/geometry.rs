//! Rigid-body math for the calibration pipeline: SE(3) transforms, Euler
//! angles, unit quaternions, calibration error metrics, weighted quaternion
//! averaging, and seeded mis-calibration sampling.
//!
//! Conventions used everywhere in this crate:
//! - Transforms map points from a source frame into a target frame:
//!   `p_target = R * p_source + t` (KITTI `Tr_velo_to_cam` style).
//! - Euler angles are intrinsic yaw-pitch-roll in degrees, applied yaw first:
//!   `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.
//! - Quaternions are sign-canonical with `w >= 0`.

use nalgebra::{Matrix3, Matrix4, Rotation3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::{cast, Scalar};

/// Orthonormality / unit-norm tolerance, scaled up for f32.
fn rotation_tolerance<T: Scalar>() -> T {
    let base: T = cast(1e-9);
    let eps_scaled = T::default_epsilon() * cast(100.0);
    if eps_scaled > base {
        eps_scaled
    } else {
        base
    }
}

/// Pitch magnitude (degrees) at or beyond which Euler extraction is
/// considered gimbal-locked.
pub const GIMBAL_LOCK_PITCH_DEG: f64 = 89.0;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("rotation matrix is not special orthogonal (deviation {deviation})")]
    NotARotation { deviation: f64 },
    #[error("rotation is within {GIMBAL_LOCK_PITCH_DEG} degrees of gimbal lock")]
    GimbalLock,
    #[error("quaternion norm is too small to normalize")]
    ZeroQuaternion,
    #[error("quaternion average needs at least one quaternion and matching weights")]
    EmptyAverage,
    #[error("quaternion weights must be nonnegative with a positive sum")]
    InvalidWeights,
    #[error("quaternion average is ambiguous: top eigenvalue gap {gap} below 1e-12")]
    DegenerateAverage { gap: f64 },
    #[error("mis-calibration bounds must be nonnegative")]
    NegativeBound,
    #[error("axis weights must be nonnegative and sum to 1")]
    InvalidAxisWeights,
}

/// A rigid transform: special-orthogonal rotation plus translation in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform<T: Scalar> {
    pub rotation: Matrix3<T>,
    pub translation: Vector3<T>,
}

impl<T: Scalar> RigidTransform<T> {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a transform after checking that `rotation` is special
    /// orthogonal within tolerance.
    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Result<Self, GeometryError> {
        let t = Self {
            rotation,
            translation,
        };
        t.validate()?;
        Ok(t)
    }

    /// Same as [`RigidTransform::new`] but renormalizes the rotation instead
    /// of validating it. Intended for matrices read from text files.
    pub fn from_parts_renormalized(rotation: Matrix3<T>, translation: Vector3<T>) -> Self {
        Self {
            rotation: renormalize_rotation(&rotation),
            translation,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let gram = self.rotation.transpose() * self.rotation;
        let deviation = (gram - Matrix3::identity()).norm();
        let det = self.rotation.determinant();
        let tol = rotation_tolerance::<T>();
        if deviation > tol || (det - T::one()).abs() > tol {
            return Err(GeometryError::NotARotation {
                deviation: deviation.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: renormalize_rotation(&(self.rotation * other.rotation)),
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Self {
        let rot_inv = renormalize_rotation(&self.rotation.transpose());
        Self {
            translation: -(rot_inv * self.translation),
            rotation: rot_inv,
        }
    }

    pub fn apply(&self, point: &Vector3<T>) -> Vector3<T> {
        self.rotation * point + self.translation
    }

    pub fn to_homogeneous(&self) -> Matrix4<T> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Row-major `[R | t]` as 12 values, the pose-file layout.
    pub fn to_row_major(&self) -> [T; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            t[0],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            t[1],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t[2],
        ]
    }

    /// Inverse of [`RigidTransform::to_row_major`]. Values are kept verbatim
    /// so file round trips stay bit-exact; callers wanting a guaranteed
    /// rotation should renormalize or validate.
    pub fn from_row_major(v: &[T; 12]) -> Self {
        Self {
            rotation: Matrix3::new(v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10]),
            translation: Vector3::new(v[3], v[7], v[11]),
        }
    }
}

/// Projects a near-rotation matrix back onto SO(3) through its quaternion.
pub fn renormalize_rotation<T: Scalar>(m: &Matrix3<T>) -> Matrix3<T> {
    let q = nalgebra::UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*m));
    q.to_rotation_matrix().into_inner()
}

/// Cross-product matrix of `v`.
pub fn skew<T: Scalar>(v: &Vector3<T>) -> Matrix3<T> {
    Matrix3::new(
        T::zero(),
        -v[2],
        v[1],
        v[2],
        T::zero(),
        -v[0],
        -v[1],
        v[0],
        T::zero(),
    )
}

/// Rodrigues exponential: axis-angle vector to rotation matrix, with the
/// series expansion near zero angle.
pub fn rotation_exp<T: Scalar>(omega: &Vector3<T>) -> Matrix3<T> {
    let theta2 = omega.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < cast(1e-5) {
        (
            T::one() - theta2 / cast(6.0),
            cast::<T>(0.5) - theta2 / cast(24.0),
        )
    } else {
        ((theta.sin()) / theta, (T::one() - theta.cos()) / theta2)
    };
    let k = skew(omega);
    Matrix3::identity() + k * a + k * k * b
}

/// `cam ∘ lidar⁻¹`: the relative transform mapping the lidar frame into the
/// camera frame when `cam` and `lidar` both map out of a common base frame.
pub fn relative_pose<T: Scalar>(
    cam: &RigidTransform<T>,
    lidar: &RigidTransform<T>,
) -> RigidTransform<T> {
    cam.compose(&lidar.inverse())
}

/// Intrinsic yaw-pitch-roll angles in degrees (`R = Rz(yaw) Ry(pitch) Rx(roll)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles<T: Scalar> {
    pub yaw: T,
    pub pitch: T,
    pub roll: T,
}

impl<T: Scalar> EulerAngles<T> {
    pub fn new(yaw: T, pitch: T, roll: T) -> Self {
        Self { yaw, pitch, roll }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn to_rotation(&self) -> Matrix3<T> {
        let (sy, cy) = deg_to_rad(self.yaw).sin_cos();
        let (sp, cp) = deg_to_rad(self.pitch).sin_cos();
        let (sr, cr) = deg_to_rad(self.roll).sin_cos();
        let rz = Matrix3::new(
            cy,
            -sy,
            T::zero(),
            sy,
            cy,
            T::zero(),
            T::zero(),
            T::zero(),
            T::one(),
        );
        let ry = Matrix3::new(
            cp,
            T::zero(),
            sp,
            T::zero(),
            T::one(),
            T::zero(),
            -sp,
            T::zero(),
            cp,
        );
        let rx = Matrix3::new(
            T::one(),
            T::zero(),
            T::zero(),
            T::zero(),
            cr,
            -sr,
            T::zero(),
            sr,
            cr,
        );
        rz * ry * rx
    }

    /// Extracts angles from a rotation matrix; fails near gimbal lock
    /// (|pitch| >= 89 degrees) where yaw and roll become coupled.
    pub fn from_rotation(rotation: &Matrix3<T>) -> Result<Self, GeometryError> {
        let sin_pitch = (-rotation[(2, 0)]).clamp(-T::one(), T::one());
        let pitch = rad_to_deg(sin_pitch.asin());
        if pitch.abs() >= cast(GIMBAL_LOCK_PITCH_DEG) {
            return Err(GeometryError::GimbalLock);
        }
        let yaw = rad_to_deg(rotation[(1, 0)].atan2(rotation[(0, 0)]));
        let roll = rad_to_deg(rotation[(2, 1)].atan2(rotation[(2, 2)]));
        Ok(Self { yaw, pitch, roll })
    }

    pub fn as_vector(&self) -> Vector3<T> {
        Vector3::new(self.yaw, self.pitch, self.roll)
    }
}

fn deg_to_rad<T: Scalar>(deg: T) -> T {
    deg * T::pi() / cast(180.0)
}

fn rad_to_deg<T: Scalar>(rad: T) -> T {
    rad * cast::<T>(180.0) / T::pi()
}

/// Calibration error per the Euler-difference metric: `e_r` is the 2-norm of
/// the yaw/pitch/roll differences in degrees, `e_t` the translation distance
/// in meters. Fails if either rotation is gimbal-locked.
pub fn pose_error<T: Scalar>(
    estimate: &RigidTransform<T>,
    truth: &RigidTransform<T>,
) -> Result<(T, T), GeometryError> {
    let e_est = EulerAngles::from_rotation(&estimate.rotation)?;
    let e_gt = EulerAngles::from_rotation(&truth.rotation)?;
    let e_r = (e_est.as_vector() - e_gt.as_vector()).norm();
    let e_t = (estimate.translation - truth.translation).norm();
    Ok((e_r, e_t))
}

/// Unit quaternion with `w >= 0`; the rotation-averaging representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion<T: Scalar> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> UnitQuaternion<T> {
    /// Normalizes and sign-canonicalizes the components.
    pub fn new(w: T, x: T, y: T, z: T) -> Result<Self, GeometryError> {
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if norm <= T::default_epsilon() * cast(16.0) {
            return Err(GeometryError::ZeroQuaternion);
        }
        let sign = if w < T::zero() { -T::one() } else { T::one() };
        let s = sign / norm;
        Ok(Self {
            w: w * s,
            x: x * s,
            y: y * s,
            z: z * s,
        })
    }

    pub fn identity() -> Self {
        Self {
            w: T::one(),
            x: T::zero(),
            y: T::zero(),
            z: T::zero(),
        }
    }

    pub fn from_rotation(rotation: &Matrix3<T>) -> Self {
        let q = nalgebra::UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(
            *rotation,
        ));
        let c = q.into_inner().coords; // [x, y, z, w]
        Self::new(c[3], c[0], c[1], c[2]).expect("rotation matrix yields a unit quaternion")
    }

    pub fn to_rotation(&self) -> Matrix3<T> {
        let q = nalgebra::Quaternion::new(self.w, self.x, self.y, self.z);
        nalgebra::UnitQuaternion::from_quaternion(q)
            .to_rotation_matrix()
            .into_inner()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn as_vector(&self) -> nalgebra::Vector4<T> {
        nalgebra::Vector4::new(self.w, self.x, self.y, self.z)
    }
}

/// Weighted quaternion average: the dominant eigenvector of
/// `C = Σ ŵᵢ qᵢ qᵢᵀ` with normalized weights, sign-canonicalized.
///
/// Fails on all-zero weights and when the top eigenvalue gap is below 1e-12
/// (the rotation distribution has no single dominant mode).
pub fn average_quaternions<T: Scalar>(
    quats: &[UnitQuaternion<T>],
    weights: &[T],
) -> Result<UnitQuaternion<T>, GeometryError> {
    if quats.is_empty() || quats.len() != weights.len() {
        return Err(GeometryError::EmptyAverage);
    }
    let mut sum = T::zero();
    for &w in weights {
        if w < T::zero() {
            return Err(GeometryError::InvalidWeights);
        }
        sum += w;
    }
    if sum <= T::zero() {
        return Err(GeometryError::InvalidWeights);
    }
    // n copies of one rotation average to that rotation exactly.
    if quats.iter().all(|q| q == &quats[0]) {
        return Ok(quats[0]);
    }

    let mut covariance = Matrix4::<T>::zeros();
    for (q, &w) in quats.iter().zip(weights) {
        let weighted = q.as_vector() * (w / sum).sqrt();
        covariance += weighted * weighted.transpose();
    }
    let eigen = covariance.symmetric_eigen();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .unwrap()
    });
    let gap = eigen.eigenvalues[order[0]] - eigen.eigenvalues[order[1]];
    if gap < cast(1e-12) {
        return Err(GeometryError::DegenerateAverage {
            gap: gap.to_f64().unwrap_or(f64::NAN),
        });
    }
    let v = eigen.eigenvectors.column(order[0]);
    UnitQuaternion::new(v[0], v[1], v[2], v[3])
}

/// Bound on random pose perturbations, split per axis by weight.
///
/// A range `(rot, trans)` with weights `(0.6, 0.2, 0.2)` perturbs yaw within
/// `±0.6·rot`, pitch and roll within `±0.2·rot`, and the translation axes
/// analogously.
#[derive(Debug, Clone, PartialEq)]
pub struct MiscalibrationRange<T: Scalar> {
    pub rot_bound_deg: T,
    pub trans_bound_m: T,
    pub axis_weights: [T; 3],
}

impl<T: Scalar> MiscalibrationRange<T> {
    pub const DEFAULT_AXIS_WEIGHTS: [f64; 3] = [0.6, 0.2, 0.2];

    pub fn new(rot_bound_deg: T, trans_bound_m: T) -> Result<Self, GeometryError> {
        Self::with_weights(
            rot_bound_deg,
            trans_bound_m,
            Self::DEFAULT_AXIS_WEIGHTS.map(cast),
        )
    }

    pub fn with_weights(
        rot_bound_deg: T,
        trans_bound_m: T,
        axis_weights: [T; 3],
    ) -> Result<Self, GeometryError> {
        if rot_bound_deg < T::zero() || trans_bound_m < T::zero() {
            return Err(GeometryError::NegativeBound);
        }
        let sum = axis_weights[0] + axis_weights[1] + axis_weights[2];
        if axis_weights.iter().any(|&w| w < T::zero()) || (sum - T::one()).abs() > cast(1e-9) {
            return Err(GeometryError::InvalidAxisWeights);
        }
        Ok(Self {
            rot_bound_deg,
            trans_bound_m,
            axis_weights,
        })
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero()).expect("zero range is valid")
    }

    /// Per-axis rotation bounds in degrees (yaw, pitch, roll).
    pub fn rotation_bounds(&self) -> [T; 3] {
        self.axis_weights.map(|w| w * self.rot_bound_deg)
    }

    /// Per-axis translation bounds in meters (x, y, z).
    pub fn translation_bounds(&self) -> [T; 3] {
        self.axis_weights.map(|w| w * self.trans_bound_m)
    }
}

/// Draws a random perturbation transform, uniform per axis within the
/// weighted bounds. Deterministic for a given seed.
pub fn sample_perturbation<T: Scalar>(
    range: &MiscalibrationRange<T>,
    rng_seed: u64,
) -> RigidTransform<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    sample_perturbation_with(range, &mut rng)
}

/// Same as [`sample_perturbation`] but drawing from a caller-owned stream,
/// so several perturbations can share one seed.
pub fn sample_perturbation_with<T: Scalar, R: Rng>(
    range: &MiscalibrationRange<T>,
    rng: &mut R,
) -> RigidTransform<T> {
    // Always draw six uniforms so the stream layout does not depend on the
    // bounds; a zero bound then yields exactly zero.
    let mut draw = |bound: T| -> T {
        let u: f64 = rng.random_range(-1.0..=1.0);
        cast::<T>(u) * bound
    };
    let [by, bp, br] = range.rotation_bounds();
    let euler = EulerAngles::new(draw(by), draw(bp), draw(br));
    let [bx, byy, bz] = range.translation_bounds();
    let translation = Vector3::new(draw(bx), draw(byy), draw(bz));
    RigidTransform {
        rotation: euler.to_rotation(),
        translation,
    }
}
