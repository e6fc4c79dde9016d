//! Synthetic scene generation: paired LiDAR and camera-depth clouds with a
//! known relative pose, the ground-truth oracle for the whole pipeline.
//!
//! Scenes are built from rectangles and axis-aligned boxes. Surfaces are
//! sampled with a stratified jittered grid; both sensors apply a
//! nearest-surface occlusion test along each sample ray. Sensor poses map
//! world coordinates into the sensor frame (z forward, x right, y down).

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::depth_refine::NormalizedDepthImage;
use crate::geometry::{relative_pose, RigidTransform};
use crate::projection::{project, CameraIntrinsics, DepthImage, PointCloud};
use crate::scalar::{cast, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("empty scene: no primitive is visible from a sensor")]
    EmptyScene,
    #[error("sampling density must be positive")]
    BadDensity,
    #[error("field of view must be positive")]
    BadFov,
    #[error("primitive extents must be positive")]
    BadExtent,
    #[error("noise sigma must be nonnegative")]
    BadNoise,
}

/// A finite rectangle given by center, two orthonormal in-plane axes, and
/// half extents along them.
#[derive(Debug, Clone, PartialEq)]
pub struct Rect<T: Scalar> {
    pub center: Vector3<T>,
    pub u_axis: Vector3<T>,
    pub v_axis: Vector3<T>,
    pub half_u: T,
    pub half_v: T,
}

impl<T: Scalar> Rect<T> {
    pub fn new(
        center: Vector3<T>,
        u_axis: Vector3<T>,
        v_axis: Vector3<T>,
        half_u: T,
        half_v: T,
    ) -> Result<Self, SceneError> {
        if half_u <= T::zero() || half_v <= T::zero() {
            return Err(SceneError::BadExtent);
        }
        let u = u_axis.normalize();
        // Re-orthogonalize v against u.
        let v = (v_axis - u * u.dot(&v_axis)).normalize();
        Ok(Self {
            center,
            u_axis: u,
            v_axis: v,
            half_u,
            half_v,
        })
    }

    pub fn normal(&self) -> Vector3<T> {
        self.u_axis.cross(&self.v_axis)
    }
}

/// An axis-aligned box given by center and half extents.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox<T: Scalar> {
    pub center: Vector3<T>,
    pub half_extents: Vector3<T>,
}

impl<T: Scalar> AxisBox<T> {
    pub fn new(center: Vector3<T>, half_extents: Vector3<T>) -> Result<Self, SceneError> {
        if half_extents.iter().any(|&h| h <= T::zero()) {
            return Err(SceneError::BadExtent);
        }
        Ok(Self {
            center,
            half_extents,
        })
    }

    pub fn min(&self) -> Vector3<T> {
        self.center - self.half_extents
    }

    pub fn max(&self) -> Vector3<T> {
        self.center + self.half_extents
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive<T: Scalar> {
    Rect(Rect<T>),
    Box(AxisBox<T>),
}

/// Monotone distortion applied to the true camera depth before min-max
/// normalization, standing in for a monocular depth network's output.
///
/// The piecewise option is concave (decreasing slopes), so the correction
/// curve back to metric depth is convex and representable by the anchor
/// selection constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistortionKind {
    Identity,
    #[default]
    Affine,
    PiecewiseLinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec<T: Scalar> {
    pub primitives: Vec<Primitive<T>>,
    /// LiDAR surface sampling density, points per square meter.
    pub lidar_density: f64,
    /// Camera-side sampling density, points per square meter.
    pub cam_density: f64,
    /// Horizontal / vertical LiDAR field of view in degrees.
    pub lidar_fov_deg: (f64, f64),
    /// Isotropic Gaussian noise added to LiDAR points, meters.
    pub noise_sigma: f64,
    pub seed: u64,
    pub distortion: DistortionKind,
}

impl<T: Scalar> SceneSpec<T> {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.lidar_density <= 0.0 || self.cam_density <= 0.0 {
            return Err(SceneError::BadDensity);
        }
        if self.lidar_fov_deg.0 <= 0.0 || self.lidar_fov_deg.1 <= 0.0 {
            return Err(SceneError::BadFov);
        }
        if self.noise_sigma < 0.0 {
            return Err(SceneError::BadNoise);
        }
        Ok(())
    }

    /// The default "corridor" scene: a 5 m wide, 12 m deep corridor along +z
    /// with a floor at y = +1, side walls at x = ±2.5 (y in [-1.5, 1]), an
    /// end wall at z = 12, and three boxes resting on the floor at z = 4,
    /// 6.5, and 8.5 (half extents 0.3, 0.4, 0.25).
    ///
    /// The default LiDAR field of view (46 x 24 degrees) matches the default
    /// virtual camera frustum, so both clouds cover the same scene region
    /// and their Chamfer distance is informative about the pose. A much
    /// wider LiDAR FOV leaves most LiDAR points without camera counterparts
    /// and biases the alignment.
    pub fn corridor(seed: u64) -> Self {
        let c = |v: f64| cast::<T>(v);
        let vec = |x: f64, y: f64, z: f64| Vector3::new(c(x), c(y), c(z));
        let primitives = vec![
            Primitive::Rect(
                Rect::new(
                    vec(0.0, 1.0, 6.0),
                    vec(1.0, 0.0, 0.0),
                    vec(0.0, 0.0, 1.0),
                    c(2.5),
                    c(6.0),
                )
                .unwrap(),
            ),
            Primitive::Rect(
                Rect::new(
                    vec(-2.5, -0.25, 6.0),
                    vec(0.0, 0.0, 1.0),
                    vec(0.0, 1.0, 0.0),
                    c(6.0),
                    c(1.25),
                )
                .unwrap(),
            ),
            Primitive::Rect(
                Rect::new(
                    vec(2.5, -0.25, 6.0),
                    vec(0.0, 0.0, 1.0),
                    vec(0.0, 1.0, 0.0),
                    c(6.0),
                    c(1.25),
                )
                .unwrap(),
            ),
            Primitive::Rect(
                Rect::new(
                    vec(0.0, -0.25, 12.0),
                    vec(1.0, 0.0, 0.0),
                    vec(0.0, 1.0, 0.0),
                    c(2.5),
                    c(1.25),
                )
                .unwrap(),
            ),
            Primitive::Box(AxisBox::new(vec(-1.0, 0.7, 4.0), vec(0.3, 0.3, 0.3)).unwrap()),
            Primitive::Box(AxisBox::new(vec(0.8, 0.6, 6.5), vec(0.4, 0.4, 0.4)).unwrap()),
            Primitive::Box(AxisBox::new(vec(-0.2, 0.75, 8.5), vec(0.25, 0.25, 0.25)).unwrap()),
        ];
        Self {
            primitives,
            lidar_density: 100.0,
            cam_density: 300.0,
            lidar_fov_deg: (46.0, 24.0),
            noise_sigma: 0.0,
            seed,
            distortion: DistortionKind::Affine,
        }
    }
}

/// Everything a generated scene provides: the LiDAR cloud in the LiDAR
/// frame, the camera depth cloud in the camera frame, the normalized camera
/// depth image, and the true lidar-to-camera transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneOutput<T: Scalar> {
    pub lidar: PointCloud<T>,
    pub cam_depth_cloud: PointCloud<T>,
    pub normalized_cdp: NormalizedDepthImage<T>,
    pub truth: RigidTransform<T>,
}

/// Builds a world-to-sensor pose from a sensor placement (position plus
/// yaw/pitch/roll of the sensor frame in the world).
pub fn sensor_pose<T: Scalar>(
    euler_deg: &crate::geometry::EulerAngles<T>,
    position: &Vector3<T>,
) -> RigidTransform<T> {
    RigidTransform {
        rotation: euler_deg.to_rotation(),
        translation: *position,
    }
    .inverse()
}

/// Default sensor placement for the corridor: LiDAR at the origin looking
/// down +z, camera 8 cm to the right, 5 cm up, yawed by 1 degree.
pub fn corridor_poses<T: Scalar>() -> (RigidTransform<T>, RigidTransform<T>) {
    let lidar = RigidTransform::identity();
    let cam = sensor_pose(
        &crate::geometry::EulerAngles::new(cast(1.0), T::zero(), T::zero()),
        &Vector3::new(cast(0.08), cast(-0.05), T::zero()),
    );
    (lidar, cam)
}

struct Face<T: Scalar> {
    center: Vector3<T>,
    u_axis: Vector3<T>,
    v_axis: Vector3<T>,
    half_u: T,
    half_v: T,
}

fn faces_of<T: Scalar>(primitive: &Primitive<T>) -> Vec<Face<T>> {
    match primitive {
        Primitive::Rect(r) => vec![Face {
            center: r.center,
            u_axis: r.u_axis,
            v_axis: r.v_axis,
            half_u: r.half_u,
            half_v: r.half_v,
        }],
        Primitive::Box(b) => {
            let ex = Vector3::new(T::one(), T::zero(), T::zero());
            let ey = Vector3::new(T::zero(), T::one(), T::zero());
            let ez = Vector3::new(T::zero(), T::zero(), T::one());
            let h = b.half_extents;
            let mut faces = Vec::with_capacity(6);
            for (normal, u, v, hu, hv) in [
                (ex, ey, ez, h[1], h[2]),
                (-ex, ey, ez, h[1], h[2]),
                (ey, ex, ez, h[0], h[2]),
                (-ey, ex, ez, h[0], h[2]),
                (ez, ex, ey, h[0], h[1]),
                (-ez, ex, ey, h[0], h[1]),
            ] {
                faces.push(Face {
                    center: b.center + normal.component_mul(&h),
                    u_axis: u,
                    v_axis: v,
                    half_u: hu,
                    half_v: hv,
                });
            }
            faces
        }
    }
}

/// Stratified jittered sampling of all faces at the given density.
fn sample_surfaces<T: Scalar>(
    primitives: &[Primitive<T>],
    density: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vector3<T>> {
    let mut points = Vec::new();
    for primitive in primitives {
        for face in faces_of(primitive) {
            let w = 2.0 * face.half_u.to_f64().unwrap();
            let h = 2.0 * face.half_v.to_f64().unwrap();
            let nu = (w * density.sqrt()).ceil().max(1.0) as usize;
            let nv = (h * density.sqrt()).ceil().max(1.0) as usize;
            for i in 0..nu {
                for j in 0..nv {
                    let a = -1.0 + 2.0 * (i as f64 + rng.random_range(0.0..1.0)) / nu as f64;
                    let b = -1.0 + 2.0 * (j as f64 + rng.random_range(0.0..1.0)) / nv as f64;
                    let p = face.center
                        + face.u_axis * (face.half_u * cast(a))
                        + face.v_axis * (face.half_v * cast(b));
                    points.push(p);
                }
            }
        }
    }
    points
}

/// Nearest ray-primitive hit parameter, with the ray given by origin and an
/// unnormalized direction so t = 1 lands on the sample point itself.
fn ray_hit<T: Scalar>(
    primitive: &Primitive<T>,
    origin: &Vector3<T>,
    dir: &Vector3<T>,
) -> Option<T> {
    let eps: T = cast(1e-9);
    match primitive {
        Primitive::Rect(r) => {
            let n = r.normal();
            let denom = dir.dot(&n);
            if denom.abs() < eps {
                return None;
            }
            let t = (r.center - origin).dot(&n) / denom;
            if t <= eps {
                return None;
            }
            let hit = origin + dir * t - r.center;
            if hit.dot(&r.u_axis).abs() <= r.half_u && hit.dot(&r.v_axis).abs() <= r.half_v {
                Some(t)
            } else {
                None
            }
        }
        Primitive::Box(b) => {
            let (min, max) = (b.min(), b.max());
            let mut t_enter = T::from_f64(f64::NEG_INFINITY).unwrap();
            let mut t_exit = T::from_f64(f64::INFINITY).unwrap();
            for axis in 0..3 {
                if dir[axis].abs() < eps {
                    if origin[axis] < min[axis] || origin[axis] > max[axis] {
                        return None;
                    }
                    continue;
                }
                let mut t0 = (min[axis] - origin[axis]) / dir[axis];
                let mut t1 = (max[axis] - origin[axis]) / dir[axis];
                if t0 > t1 {
                    std::mem::swap(&mut t0, &mut t1);
                }
                t_enter = t_enter.max(t0);
                t_exit = t_exit.min(t1);
                if t_enter > t_exit {
                    return None;
                }
            }
            if t_enter > eps {
                Some(t_enter)
            } else if t_exit > eps {
                Some(t_exit)
            } else {
                None
            }
        }
    }
}

fn occluded<T: Scalar>(
    primitives: &[Primitive<T>],
    origin: &Vector3<T>,
    sample: &Vector3<T>,
) -> bool {
    let dir = sample - origin;
    let cutoff = T::one() - cast(1e-6);
    primitives
        .iter()
        .filter_map(|p| ray_hit(p, origin, &dir))
        .any(|t| t < cutoff)
}

fn within_lidar_fov<T: Scalar>(point_sensor: &Vector3<T>, fov_deg: (f64, f64)) -> bool {
    let z = point_sensor[2];
    if z <= T::zero() {
        return false;
    }
    let h = point_sensor[0].atan2(z).abs().to_f64().unwrap() * 180.0 / std::f64::consts::PI;
    let v = point_sensor[1].atan2(z).abs().to_f64().unwrap() * 180.0 / std::f64::consts::PI;
    h <= fov_deg.0 / 2.0 && v <= fov_deg.1 / 2.0
}

fn within_frustum<T: Scalar>(point_sensor: &Vector3<T>, intr: &CameraIntrinsics<T>) -> bool {
    let z = point_sensor[2];
    if z <= T::zero() {
        return false;
    }
    let u = (intr.fx * point_sensor[0] / z + intr.cx).round();
    let v = (intr.fy * point_sensor[1] / z + intr.cy).round();
    u >= T::zero()
        && v >= T::zero()
        && u.to_usize().map(|u| u < intr.width).unwrap_or(false)
        && v.to_usize().map(|v| v < intr.height).unwrap_or(false)
}

/// The seeded monotone distortion: returns `g` as a closure over f64 depth.
fn make_distortion(kind: DistortionKind, rng: &mut ChaCha8Rng) -> Box<dyn Fn(f64) -> f64> {
    match kind {
        DistortionKind::Identity => Box::new(|d| d),
        DistortionKind::Affine => {
            let a = rng.random_range(0.05..0.2);
            let b = rng.random_range(0.1..0.5);
            Box::new(move |d| a * d + b)
        }
        DistortionKind::PiecewiseLinear => {
            // Concave increasing: slopes decay across fixed breakpoints so
            // the inverse (the anchor curve) is convex.
            let breaks = [0.0, 5.0, 12.0, 25.0];
            let decay = rng.random_range(0.45..0.7);
            let base = rng.random_range(0.8..1.2);
            let slopes = [
                base,
                base * decay,
                base * decay * decay,
                base * decay * decay * decay,
            ];
            Box::new(move |d| {
                let mut value = 0.1;
                let mut prev = 0.0;
                for (i, &b) in breaks.iter().enumerate() {
                    if d > b {
                        let upper = if i + 1 < breaks.len() {
                            breaks[i + 1].min(d)
                        } else {
                            d
                        };
                        value += slopes[i] * (upper - b.max(prev));
                        prev = b;
                    }
                }
                value
            })
        }
    }
}

/// Generates the paired clouds, the normalized camera depth map, and the
/// ground-truth relative pose for one scene.
pub fn generate_scene<T: Scalar>(
    spec: &SceneSpec<T>,
    lidar_pose: &RigidTransform<T>,
    cam_pose: &RigidTransform<T>,
    intrinsics: &CameraIntrinsics<T>,
) -> Result<SceneOutput<T>, SceneError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lidar_origin = lidar_pose.inverse().translation;
    let cam_origin = cam_pose.inverse().translation;

    // LiDAR side: sample, cull by FOV and occlusion, express in the sensor
    // frame, then perturb.
    let lidar_samples = sample_surfaces(&spec.primitives, spec.lidar_density, &mut rng);
    let mut lidar_points: Vec<Vector3<T>> = lidar_samples
        .iter()
        .filter(|p| !occluded(&spec.primitives, &lidar_origin, p))
        .map(|p| lidar_pose.apply(p))
        .filter(|p| within_lidar_fov(p, spec.lidar_fov_deg))
        .collect();
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).unwrap();
        for p in &mut lidar_points {
            for axis in 0..3 {
                p[axis] += cast(normal.sample(&mut rng));
            }
        }
    }

    // Camera side: dense, noise-free, frustum-culled.
    let cam_samples = sample_surfaces(&spec.primitives, spec.cam_density, &mut rng);
    let cam_points: Vec<Vector3<T>> = cam_samples
        .iter()
        .filter(|p| !occluded(&spec.primitives, &cam_origin, p))
        .map(|p| cam_pose.apply(p))
        .filter(|p| within_frustum(p, intrinsics))
        .collect();

    if lidar_points.is_empty() || cam_points.is_empty() {
        return Err(SceneError::EmptyScene);
    }
    let lidar = PointCloud::new(lidar_points);
    let cam_depth_cloud = PointCloud::new(cam_points);

    // Normalized CDP: render the true camera depth, distort, normalize.
    let true_depth = project(&cam_depth_cloud, &RigidTransform::identity(), intrinsics);
    let g = make_distortion(spec.distortion, &mut rng);
    let mut distorted = DepthImage::zeros(intrinsics.clone());
    for v in 0..intrinsics.height {
        for u in 0..intrinsics.width {
            let d = true_depth.get(u, v);
            if d > T::zero() {
                distorted.set(u, v, cast(g(d.to_f64().unwrap())));
            }
        }
    }
    let normalized_cdp = NormalizedDepthImage::normalize(&distorted);

    Ok(SceneOutput {
        lidar,
        cam_depth_cloud,
        normalized_cdp,
        truth: relative_pose(cam_pose, lidar_pose),
    })
}

/// Distance from a point to the nearest declared surface; used to verify
/// that sampled points actually lie on the scene geometry.
pub fn distance_to_nearest_surface<T: Scalar>(
    primitives: &[Primitive<T>],
    point: &Vector3<T>,
) -> T {
    let mut best = T::from_f64(f64::INFINITY).unwrap();
    for primitive in primitives {
        let d = match primitive {
            Primitive::Rect(r) => {
                let rel = point - r.center;
                let a = rel.dot(&r.u_axis);
                let b = rel.dot(&r.v_axis);
                let h = rel.dot(&r.normal());
                let da = (a.abs() - r.half_u).max(T::zero());
                let db = (b.abs() - r.half_v).max(T::zero());
                (da * da + db * db + h * h).sqrt()
            }
            Primitive::Box(bx) => {
                let (min, max) = (bx.min(), bx.max());
                let mut outside = T::zero();
                let mut inside = T::from_f64(f64::INFINITY).unwrap();
                let mut is_inside = true;
                for axis in 0..3 {
                    let lo = min[axis] - point[axis];
                    let hi = point[axis] - max[axis];
                    let d = lo.max(hi);
                    if d > T::zero() {
                        is_inside = false;
                        outside += d * d;
                    } else {
                        inside = inside.min(-d);
                    }
                }
                if is_inside {
                    inside
                } else {
                    outside.sqrt()
                }
            }
        };
        best = best.min(d);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EulerAngles;

    fn intr() -> CameraIntrinsics<f64> {
        CameraIntrinsics::default_virtual()
    }

    #[test]
    fn truth_is_relative_pose_of_inputs() {
        let spec = SceneSpec::<f64>::corridor(1);
        let (lidar_pose, cam_pose) = corridor_poses();
        let out = generate_scene(&spec, &lidar_pose, &cam_pose, &intr()).unwrap();
        let expected = relative_pose(&cam_pose, &lidar_pose);
        assert!((out.truth.rotation - expected.rotation).norm() < 1e-12);
        assert!((out.truth.translation - expected.translation).norm() < 1e-12);
    }

    #[test]
    fn identical_poses_give_identity_truth_and_overlap() {
        let spec = SceneSpec::<f64>::corridor(2);
        let pose = RigidTransform::identity();
        let out = generate_scene(&spec, &pose, &pose, &intr()).unwrap();
        assert!((out.truth.rotation - nalgebra::Matrix3::identity()).norm() < 1e-12);
        assert!(out.truth.translation.norm() < 1e-12);
        assert!(!out.lidar.is_empty() && !out.cam_depth_cloud.is_empty());
    }

    #[test]
    fn samples_lie_on_surfaces_before_noise() {
        let spec = SceneSpec::<f64>::corridor(3);
        let (lidar_pose, cam_pose) = corridor_poses();
        let out = generate_scene(&spec, &lidar_pose, &cam_pose, &intr()).unwrap();
        let to_world = lidar_pose.inverse();
        for p in &out.lidar.points {
            let world = to_world.apply(p);
            let d = distance_to_nearest_surface(&spec.primitives, &world);
            assert!(d < 1e-9, "off-surface by {d}");
        }
    }

    #[test]
    fn noisy_samples_stay_within_five_sigma() {
        let mut spec = SceneSpec::<f64>::corridor(4);
        spec.noise_sigma = 0.01;
        let (lidar_pose, cam_pose) = corridor_poses();
        let out = generate_scene(&spec, &lidar_pose, &cam_pose, &intr()).unwrap();
        let to_world = lidar_pose.inverse();
        let mut outliers = 0usize;
        for p in &out.lidar.points {
            let world = to_world.apply(p);
            let d = distance_to_nearest_surface(&spec.primitives, &world);
            if d > 5.0 * spec.noise_sigma {
                outliers += 1;
            }
        }
        let ratio = outliers as f64 / out.lidar.len() as f64;
        assert!(
            ratio < 1e-4,
            "{outliers} of {} beyond 5 sigma",
            out.lidar.len()
        );
    }

    #[test]
    fn generation_is_bit_reproducible() {
        let spec = SceneSpec::<f64>::corridor(5);
        let (lidar_pose, cam_pose) = corridor_poses();
        let a = generate_scene(&spec, &lidar_pose, &cam_pose, &intr()).unwrap();
        let b = generate_scene(&spec, &lidar_pose, &cam_pose, &intr()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_distortion_denormalizes_to_projected_depth() {
        let mut spec = SceneSpec::<f64>::corridor(6);
        spec.distortion = DistortionKind::Identity;
        let (lidar_pose, cam_pose) = corridor_poses();
        let out = generate_scene(&spec, &lidar_pose, &cam_pose, &intr()).unwrap();
        let projected = project(&out.cam_depth_cloud, &RigidTransform::identity(), &intr());
        // Empty pixels exist, so min-max normalization divides by the max.
        let max = projected.data().iter().cloned().fold(0.0f64, f64::max);
        for (n, d) in out.normalized_cdp.values().iter().zip(projected.data()) {
            assert!((n * max - d).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_scene_is_an_error() {
        let spec = SceneSpec::<f64> {
            primitives: vec![Primitive::Box(
                AxisBox::new(Vector3::new(0.0, 0.0, -50.0), Vector3::new(1.0, 1.0, 1.0)).unwrap(),
            )],
            ..SceneSpec::corridor(7)
        };
        let pose = RigidTransform::identity();
        assert_eq!(
            generate_scene(&spec, &pose, &pose, &intr()),
            Err(SceneError::EmptyScene)
        );
    }

    #[test]
    fn occlusion_culls_hidden_points() {
        // A wall in front of a far wall: with the camera at the origin the
        // far wall must not contribute any sample along the blocked region.
        let near = Primitive::Rect(
            Rect::new(
                Vector3::new(0.0, 0.0, 3.0),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(0.0, 1.0, 0.0),
                2.0,
                2.0,
            )
            .unwrap(),
        );
        let far = Primitive::Rect(
            Rect::new(
                Vector3::new(0.0, 0.0, 6.0),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(0.0, 1.0, 0.0),
                1.0,
                1.0,
            )
            .unwrap(),
        );
        let spec = SceneSpec::<f64> {
            primitives: vec![near, far],
            lidar_density: 100.0,
            cam_density: 100.0,
            lidar_fov_deg: (120.0, 120.0),
            noise_sigma: 0.0,
            seed: 8,
            distortion: DistortionKind::Identity,
        };
        let pose = RigidTransform::identity();
        let out = generate_scene(&spec, &pose, &pose, &intr()).unwrap();
        for p in &out.lidar.points {
            assert!(p[2] < 5.9, "occluded point survived at {p:?}");
        }
    }

    #[test]
    fn box_back_faces_are_self_occluded() {
        let spec = SceneSpec::<f64> {
            primitives: vec![Primitive::Box(
                AxisBox::new(Vector3::new(0.0, 0.0, 5.0), Vector3::new(0.5, 0.5, 0.5)).unwrap(),
            )],
            lidar_density: 200.0,
            cam_density: 200.0,
            lidar_fov_deg: (90.0, 90.0),
            noise_sigma: 0.0,
            seed: 9,
            distortion: DistortionKind::Identity,
        };
        let pose = RigidTransform::identity();
        let out = generate_scene(&spec, &pose, &pose, &intr()).unwrap();
        // Only the front face (z = 4.5) and silhouette edges are visible.
        for p in &out.lidar.points {
            assert!(
                p[2] <= 4.5 + 1e-6
                    || p[2].abs() > 0.0 && (p[0].abs() >= 0.5 - 1e-9 || p[1].abs() >= 0.5 - 1e-9),
                "back-face point {p:?}"
            );
        }
    }

    #[test]
    fn piecewise_distortion_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = make_distortion(DistortionKind::PiecewiseLinear, &mut rng);
        let mut prev = g(0.2);
        for i in 1..200 {
            let d = 0.2 + i as f64 * 0.2;
            let v = g(d);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn sensor_pose_places_sensor_at_position() {
        let pose = sensor_pose(
            &EulerAngles::new(10.0, 0.0, 0.0),
            &Vector3::new(1.0, 2.0, 3.0),
        );
        // The sensor position in the world is the inverse translation.
        let origin = pose.inverse().translation;
        assert!((origin - Vector3::new(1.0, 2.0, 3.0)).norm() < 1e-12);
    }
}
