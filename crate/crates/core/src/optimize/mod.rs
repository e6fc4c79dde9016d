//! Loss evaluation and Chamfer-distance pose refinement over SE(3).
//!
//! The pose refiner alternates nearest-neighbor association with damped
//! Gauss-Newton steps on a 6-parameter local pose (axis-angle plus
//! translation, right-composed). A step is accepted only if the actual loss
//! decreases, so the trace of accepted losses is nonincreasing.

mod spatial;

pub use spatial::SpatialIndex;

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{rotation_exp, skew, EulerAngles, GeometryError, RigidTransform};
use crate::projection::PointCloud;
use crate::scalar::{cast, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum OptimizeError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("pose refinement needs at least {need} points per cloud, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("normal equations stayed degenerate with damping exhausted")]
    DampingExhausted,
    #[error("chamfer weights must satisfy alpha + beta > 0 and be nonnegative")]
    BadChamferParams,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Weights of the two Chamfer directions; 0.5 each by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChamferParams<T: Scalar> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> Default for ChamferParams<T> {
    fn default() -> Self {
        Self {
            alpha: cast(0.5),
            beta: cast(0.5),
        }
    }
}

impl<T: Scalar> ChamferParams<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self, OptimizeError> {
        if alpha < T::zero() || beta < T::zero() || alpha + beta <= T::zero() {
            return Err(OptimizeError::BadChamferParams);
        }
        Ok(Self { alpha, beta })
    }
}

/// Symmetric Chamfer distance with squared nearest-neighbor distances:
/// `alpha/|P| Σ min ||p-q||² + beta/|Q| Σ min ||q-p||²`.
pub fn chamfer<T: Scalar>(
    p: &PointCloud<T>,
    q: &PointCloud<T>,
    params: &ChamferParams<T>,
) -> Result<T, OptimizeError> {
    if p.is_empty() || q.is_empty() {
        return Err(OptimizeError::EmptyCloud);
    }
    let q_index = SpatialIndex::build(q);
    let p_index = SpatialIndex::build(p);
    let forward = mean_nn_squared(&p.points, &q_index);
    let backward = mean_nn_squared(&q.points, &p_index);
    Ok(params.alpha * forward + params.beta * backward)
}

/// Mean squared nearest-neighbor distance; queries run in parallel but the
/// reduction is sequential so the result is deterministic.
fn mean_nn_squared<T: Scalar>(points: &[Vector3<T>], index: &SpatialIndex<T>) -> T {
    let distances: Vec<T> = points
        .par_iter()
        .map(|p| index.nearest(p).expect("index is non-empty").1)
        .collect();
    let sum = distances.iter().fold(T::zero(), |a, &d| a + d);
    sum / cast(points.len() as f64)
}

/// Every loss term the two supervision pathways can produce. Terms outside
/// the active pathway stay zero; `total` sums the active ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown<T: Scalar> {
    pub l_cd: T,
    pub l_t_ini: T,
    pub l_eva: T,
    pub l_r_gt: T,
    pub l_t_gt: T,
    pub l_cloud: T,
    pub total: T,
}

impl<T: Scalar> LossBreakdown<T> {
    pub fn zero() -> Self {
        Self {
            l_cd: T::zero(),
            l_t_ini: T::zero(),
            l_eva: T::zero(),
            l_r_gt: T::zero(),
            l_t_gt: T::zero(),
            l_cloud: T::zero(),
            total: T::zero(),
        }
    }
}

/// Fully-supervised losses for a predicted (rotation, translation) against
/// the two virtual sensor poses: entrywise-L1 rotation error, additive
/// translation error, and the per-point cloud distance, summed.
pub fn supervised_losses<T: Scalar>(
    pred_rot: &Matrix3<T>,
    pred_trans: &Vector3<T>,
    t_cam: &RigidTransform<T>,
    t_lidar: &RigidTransform<T>,
    cloud: &PointCloud<T>,
) -> LossBreakdown<T> {
    let residual = t_cam.rotation * (pred_rot * t_lidar.rotation).transpose() - Matrix3::identity();
    let l_r_gt = residual.iter().fold(T::zero(), |a, &x| a + x.abs());
    let l_t_gt = (t_cam.translation - (t_lidar.translation + pred_trans)).norm();
    let l_cloud = cloud.points.iter().fold(T::zero(), |acc, p| {
        let lhs = pred_rot * (t_lidar.rotation * p + t_lidar.translation) + pred_trans;
        let rhs = t_cam.rotation * p + t_cam.translation;
        acc + (lhs - rhs).norm()
    });
    let mut out = LossBreakdown::zero();
    out.l_r_gt = l_r_gt;
    out.l_t_gt = l_t_gt;
    out.l_cloud = l_cloud;
    out.total = l_r_gt + l_t_gt + l_cloud;
    out
}

/// Reference pose from an external evaluator, with the rotation/translation
/// balance used when scoring against it (0.1 by default: one degree weighs
/// like a tenth of a meter).
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatorPrior<T: Scalar> {
    pub pose: RigidTransform<T>,
    pub angle_scale: T,
}

impl<T: Scalar> EvaluatorPrior<T> {
    pub fn new(pose: RigidTransform<T>) -> Self {
        Self {
            pose,
            angle_scale: cast(0.1),
        }
    }
}

/// Self-supervised loss of a candidate extrinsic: the Chamfer term, the
/// distance to an optional initial translation guess, and the deviation from
/// an optional evaluator pose.
pub fn self_supervised_loss<T: Scalar>(
    candidate: &RigidTransform<T>,
    lidar_cloud: &PointCloud<T>,
    cam_cloud: &PointCloud<T>,
    init_guess: Option<&RigidTransform<T>>,
    external_eval: Option<&EvaluatorPrior<T>>,
) -> Result<LossBreakdown<T>, OptimizeError> {
    let transformed = lidar_cloud.transformed(candidate);
    let l_cd = chamfer(&transformed, cam_cloud, &ChamferParams::default())?;
    let l_t_ini = match init_guess {
        Some(init) => (init.translation - candidate.translation).norm(),
        None => T::zero(),
    };
    let l_eva = match external_eval {
        Some(prior) => {
            let e_eva = EulerAngles::from_rotation(&prior.pose.rotation)?;
            let e = EulerAngles::from_rotation(&candidate.rotation)?;
            prior.angle_scale * (e_eva.as_vector() - e.as_vector()).norm()
                + (prior.pose.translation - candidate.translation).norm()
        }
        None => T::zero(),
    };
    let mut out = LossBreakdown::zero();
    out.l_cd = l_cd;
    out.l_t_ini = l_t_ini;
    out.l_eva = l_eva;
    out.total = l_cd + l_t_ini + l_eva;
    Ok(out)
}

/// Pose refinement configuration; fields map 1:1 onto the key=value config
/// text. `anchor_translation` adds the initial-guess translation anchor to
/// the objective (off by default so the optimum is the pure Chamfer one).
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub damping_init: f64,
    pub alpha: f64,
    pub beta: f64,
    pub subsample_cap: usize,
    pub seed: u64,
    pub anchor_translation: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-8,
            damping_init: 1e-4,
            alpha: 0.5,
            beta: 0.5,
            subsample_cap: 20_000,
            seed: 0,
            anchor_translation: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationStatus {
    Converged,
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T: Scalar> {
    pub iteration: usize,
    pub total: T,
    pub chamfer: T,
}

#[derive(Debug, Clone)]
pub struct RefineOutcome<T: Scalar> {
    pub pose: RigidTransform<T>,
    pub losses: LossBreakdown<T>,
    /// Accepted-state losses, starting with the initial pose; nonincreasing.
    pub trace: Vec<IterationRecord<T>>,
    pub status: TerminationStatus,
    pub iterations: usize,
}

/// Residuals and Jacobians of the fixed-correspondence objective, exposed so
/// the analytic Jacobian can be checked against finite differences.
///
/// With `pose ∘ Exp(xi)` as the local parameterization, the rows are
/// `w_p (T p_i - q_{c(i)})` for the forward Chamfer direction,
/// `w_q (q_j - T p_{m(j)})` for the backward one, and optionally
/// `(t - t_anchor)` for the translation anchor.
pub struct FixedCorrespondences<T: Scalar> {
    pub lidar_points: Vec<Vector3<T>>,
    pub cam_targets: Vec<Vector3<T>>,
    pub cam_points: Vec<Vector3<T>>,
    pub lidar_sources: Vec<Vector3<T>>,
    pub weight_p: T,
    pub weight_q: T,
    pub anchor: Option<Vector3<T>>,
}

impl<T: Scalar> FixedCorrespondences<T> {
    pub fn row_count(&self) -> usize {
        3 * (self.lidar_points.len() + self.cam_points.len())
            + if self.anchor.is_some() { 3 } else { 0 }
    }

    /// Residual vector at `pose ∘ Exp(xi)`.
    pub fn residuals(&self, pose: &RigidTransform<T>, xi: &Vector6<T>) -> DVector<T> {
        let delta = RigidTransform {
            rotation: rotation_exp(&Vector3::new(xi[0], xi[1], xi[2])),
            translation: Vector3::new(xi[3], xi[4], xi[5]),
        };
        let current = pose.compose(&delta);
        let mut r = DVector::zeros(self.row_count());
        let mut row = 0;
        for (p, q) in self.lidar_points.iter().zip(&self.cam_targets) {
            let e = (current.apply(p) - q) * self.weight_p;
            r.fixed_rows_mut::<3>(row).copy_from(&e);
            row += 3;
        }
        for (q, p) in self.cam_points.iter().zip(&self.lidar_sources) {
            let e = (q - current.apply(p)) * self.weight_q;
            r.fixed_rows_mut::<3>(row).copy_from(&e);
            row += 3;
        }
        if let Some(anchor) = &self.anchor {
            r.fixed_rows_mut::<3>(row)
                .copy_from(&(current.translation - anchor));
        }
        r
    }

    /// Analytic Jacobian at `xi = 0`.
    pub fn jacobian(&self, pose: &RigidTransform<T>) -> DMatrix<T> {
        let mut j = DMatrix::zeros(self.row_count(), 6);
        let r = &pose.rotation;
        let mut row = 0;
        let mut write_block = |row: usize, rot_part: Matrix3<T>, trans_part: Matrix3<T>| {
            for i in 0..3 {
                for c in 0..3 {
                    j[(row + i, c)] = rot_part[(i, c)];
                    j[(row + i, c + 3)] = trans_part[(i, c)];
                }
            }
        };
        for p in &self.lidar_points {
            write_block(row, -(r * skew(p)) * self.weight_p, r * self.weight_p);
            row += 3;
        }
        for p in &self.lidar_sources {
            write_block(row, (r * skew(p)) * self.weight_q, -r * self.weight_q);
            row += 3;
        }
        if self.anchor.is_some() {
            write_block(row, Matrix3::zeros(), *r);
        }
        j
    }

    /// Accumulated normal equations `(JᵀJ, Jᵀr)` at `xi = 0`, built per point
    /// without materializing the full system.
    pub fn normal_equations(&self, pose: &RigidTransform<T>) -> (Matrix6<T>, Vector6<T>) {
        let r = &pose.rotation;
        let accumulate = |points: &[Vector3<T>],
                          targets: &[Vector3<T>],
                          weight: T,
                          flip: bool|
         -> (Matrix6<T>, Vector6<T>) {
            let chunks: Vec<(Matrix6<T>, Vector6<T>)> = points
                .par_chunks(1024)
                .zip(targets.par_chunks(1024))
                .map(|(ps, qs)| {
                    let mut h = Matrix6::zeros();
                    let mut g = Vector6::zeros();
                    for (p, q) in ps.iter().zip(qs) {
                        let mut jr = -(r * skew(p));
                        let mut jt = *r;
                        let mut e = (pose.apply(p) - q) * weight;
                        if flip {
                            jr = -jr;
                            jt = -jt;
                            e = -e;
                        }
                        jr *= weight;
                        jt *= weight;
                        // J = [jr | jt], accumulate JᵀJ and Jᵀe blockwise.
                        let a = jr.transpose() * jr;
                        let b = jr.transpose() * jt;
                        let c = jt.transpose() * jt;
                        for i in 0..3 {
                            for k in 0..3 {
                                h[(i, k)] += a[(i, k)];
                                h[(i, k + 3)] += b[(i, k)];
                                h[(k + 3, i)] += b[(i, k)];
                                h[(i + 3, k + 3)] += c[(i, k)];
                            }
                        }
                        let gr = jr.transpose() * e;
                        let gt = jt.transpose() * e;
                        for i in 0..3 {
                            g[i] += gr[i];
                            g[i + 3] += gt[i];
                        }
                    }
                    (h, g)
                })
                .collect();
            let mut h = Matrix6::zeros();
            let mut g = Vector6::zeros();
            for (ch, cg) in chunks {
                h += ch;
                g += cg;
            }
            (h, g)
        };

        let (mut h, mut g) =
            accumulate(&self.lidar_points, &self.cam_targets, self.weight_p, false);
        let (h2, g2) = accumulate(&self.lidar_sources, &self.cam_points, self.weight_q, true);
        h += h2;
        g += g2;
        if let Some(anchor) = &self.anchor {
            let jt = *r;
            let e = pose.translation - anchor;
            let c = jt.transpose() * jt;
            let gt = jt.transpose() * e;
            for i in 0..3 {
                for k in 0..3 {
                    h[(i + 3, k + 3)] += c[(i, k)];
                }
                g[i + 3] += gt[i];
            }
        }
        (h, g)
    }
}

struct FrameData<T: Scalar> {
    lidar: Vec<Vector3<T>>,
    cam: Vec<Vector3<T>>,
    cam_index: SpatialIndex<T>,
}

struct Association {
    cam_target_of_lidar: Vec<usize>,
    lidar_source_of_cam: Vec<usize>,
}

fn associate<T: Scalar>(frame: &FrameData<T>, pose: &RigidTransform<T>) -> Association {
    let transformed: Vec<Vector3<T>> = frame.lidar.iter().map(|p| pose.apply(p)).collect();
    let cam_target_of_lidar: Vec<usize> = transformed
        .par_iter()
        .map(|p| frame.cam_index.nearest(p).expect("cam cloud non-empty").0)
        .collect();
    let lidar_index = SpatialIndex::from_points(transformed);
    let lidar_source_of_cam: Vec<usize> = frame
        .cam
        .par_iter()
        .map(|q| lidar_index.nearest(q).expect("lidar cloud non-empty").0)
        .collect();
    Association {
        cam_target_of_lidar,
        lidar_source_of_cam,
    }
}

fn chamfer_of_association<T: Scalar>(
    frame: &FrameData<T>,
    pose: &RigidTransform<T>,
    assoc: &Association,
    alpha: T,
    beta: T,
) -> T {
    let mut forward = T::zero();
    for (p, &qi) in frame.lidar.iter().zip(&assoc.cam_target_of_lidar) {
        forward += (pose.apply(p) - frame.cam[qi]).norm_squared();
    }
    let mut backward = T::zero();
    for (q, &pi) in frame.cam.iter().zip(&assoc.lidar_source_of_cam) {
        backward += (q - pose.apply(&frame.lidar[pi])).norm_squared();
    }
    alpha * forward / cast(frame.lidar.len() as f64)
        + beta * backward / cast(frame.cam.len() as f64)
}

fn subsample<T: Scalar>(
    cloud: &PointCloud<T>,
    cap: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vector3<T>> {
    if cloud.len() <= cap || cap == 0 {
        return cloud.points.clone();
    }
    let mut picked = rand::seq::index::sample(rng, cloud.len(), cap).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| cloud.points[i]).collect()
}

/// Refines a single lidar-to-camera pose; see [`refine_pose_shared`] for the
/// multi-frame variant optimizing one pose over several cloud pairs.
pub fn refine_pose<T: Scalar>(
    lidar_cloud: &PointCloud<T>,
    cam_cloud: &PointCloud<T>,
    init: &RigidTransform<T>,
    config: &OptimizerConfig,
) -> Result<RefineOutcome<T>, OptimizeError> {
    refine_pose_shared(
        std::slice::from_ref(&(lidar_cloud.clone(), cam_cloud.clone())),
        init,
        config,
    )
}

/// Optimizes one shared pose over a sequence of (lidar, camera) cloud pairs
/// by minimizing the sum of the per-frame Chamfer losses.
pub fn refine_pose_shared<T: Scalar>(
    frames: &[(PointCloud<T>, PointCloud<T>)],
    init: &RigidTransform<T>,
    config: &OptimizerConfig,
) -> Result<RefineOutcome<T>, OptimizeError> {
    if frames.is_empty() {
        return Err(OptimizeError::EmptyCloud);
    }
    for (lidar, cam) in frames {
        let min = lidar.len().min(cam.len());
        if min < 10 {
            return Err(OptimizeError::TooFewPoints { got: min, need: 10 });
        }
    }
    let alpha: T = cast(config.alpha);
    let beta: T = cast(config.beta);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let frame_data: Vec<FrameData<T>> = frames
        .iter()
        .map(|(lidar, cam)| {
            let lidar = subsample(lidar, config.subsample_cap, &mut rng);
            let cam = subsample(cam, config.subsample_cap, &mut rng);
            let cam_index = SpatialIndex::from_points(cam.clone());
            FrameData {
                lidar,
                cam,
                cam_index,
            }
        })
        .collect();

    let anchor = if config.anchor_translation {
        Some(init.translation)
    } else {
        None
    };
    let evaluate = |pose: &RigidTransform<T>| -> (T, Vec<Association>) {
        let assocs: Vec<Association> = frame_data.iter().map(|f| associate(f, pose)).collect();
        let mut l_cd = T::zero();
        for (f, a) in frame_data.iter().zip(&assocs) {
            l_cd += chamfer_of_association(f, pose, a, alpha, beta);
        }
        (l_cd, assocs)
    };
    let total_of = |pose: &RigidTransform<T>, l_cd: T| -> (T, T) {
        let l_t_ini = match &anchor {
            Some(a) => (pose.translation - a).norm(),
            None => T::zero(),
        };
        (l_cd + l_t_ini, l_t_ini)
    };

    let mut pose = init.clone();
    let (mut l_cd, mut assocs) = evaluate(&pose);
    let (mut total, mut l_t_ini) = total_of(&pose, l_cd);
    let mut trace = vec![IterationRecord {
        iteration: 0,
        total,
        chamfer: l_cd,
    }];
    let mut lambda = config.damping_init;
    let mut stall = 0usize;
    let mut status = TerminationStatus::MaxIterations;
    let mut iterations = 0usize;

    for iter in 1..=config.max_iters {
        iterations = iter;
        // Assemble the normal equations from the current associations.
        let mut h = Matrix6::<T>::zeros();
        let mut g = Vector6::<T>::zeros();
        for (f, a) in frame_data.iter().zip(&assocs) {
            let system = FixedCorrespondences {
                lidar_points: f.lidar.clone(),
                cam_targets: a.cam_target_of_lidar.iter().map(|&i| f.cam[i]).collect(),
                cam_points: f.cam.clone(),
                lidar_sources: a.lidar_source_of_cam.iter().map(|&i| f.lidar[i]).collect(),
                weight_p: (alpha / cast(f.lidar.len() as f64)).sqrt(),
                weight_q: (beta / cast(f.cam.len() as f64)).sqrt(),
                anchor: None,
            };
            let (fh, fg) = system.normal_equations(&pose);
            h += fh;
            g += fg;
        }
        if let Some(a) = &anchor {
            let r = &pose.rotation;
            let c = r.transpose() * r;
            let gt = r.transpose() * (pose.translation - a);
            for i in 0..3 {
                for k in 0..3 {
                    h[(i + 3, k + 3)] += c[(i, k)];
                }
                g[i + 3] += gt[i];
            }
        }

        if g.norm() < cast(1e-14) {
            status = TerminationStatus::Converged;
            break;
        }

        // Damped steps until one reduces the actual loss.
        let mut accepted = false;
        while lambda <= 1e8 {
            let damped = h + Matrix6::identity() * cast::<T>(lambda);
            let eigen = damped.symmetric_eigen();
            let max_e = eigen.eigenvalues.iter().fold(T::zero(), |a, &e| a.max(e));
            let min_e = eigen.eigenvalues.iter().fold(max_e, |a, &e| a.min(e));
            let solvable = min_e > T::zero() && max_e / min_e < cast(1e12);
            let delta = if solvable {
                damped.cholesky().map(|ch| ch.solve(&(-g)))
            } else {
                None
            };
            let Some(delta) = delta else {
                lambda *= 10.0;
                continue;
            };
            let step = RigidTransform {
                rotation: rotation_exp(&Vector3::new(delta[0], delta[1], delta[2])),
                translation: Vector3::new(delta[3], delta[4], delta[5]),
            };
            let candidate = pose.compose(&step);
            let (cand_cd, cand_assocs) = evaluate(&candidate);
            let (cand_total, cand_t_ini) = total_of(&candidate, cand_cd);
            if cand_total < total {
                let relative_drop = ((total - cand_total) / total.max(cast(1e-300)))
                    .to_f64()
                    .unwrap_or(0.0);
                pose = candidate;
                l_cd = cand_cd;
                l_t_ini = cand_t_ini;
                total = cand_total;
                assocs = cand_assocs;
                trace.push(IterationRecord {
                    iteration: iter,
                    total,
                    chamfer: l_cd,
                });
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                stall = 0;
                if relative_drop < config.tol {
                    status = TerminationStatus::Converged;
                }
                break;
            }
            lambda *= 10.0;
        }
        if lambda > 1e8 && !accepted {
            // Could not even solve the damped system: conditioning failure.
            let diag_ok = h.diagonal().iter().all(|d| d.is_finite());
            if !diag_ok {
                return Err(OptimizeError::DampingExhausted);
            }
            stall += 1;
            lambda = config.damping_init;
        } else if !accepted {
            stall += 1;
        }
        if status == TerminationStatus::Converged {
            break;
        }
        if stall >= 5 {
            status = TerminationStatus::Stalled;
            break;
        }
    }

    let mut losses = LossBreakdown::zero();
    losses.l_cd = l_cd;
    losses.l_t_ini = l_t_ini;
    losses.total = total;
    Ok(RefineOutcome {
        pose,
        losses,
        trace,
        status,
        iterations,
    })
}
