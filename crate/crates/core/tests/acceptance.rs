//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use nalgebra::{Matrix4, Vector3, Vector6};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use lccal_core::depth_refine::{longest_monotone_convex_subsequence, refine, NormalizedDepthImage};
use lccal_core::diffmap::build_difference_map;
use lccal_core::fusion::{fuse, ScoredPoseSet};
use lccal_core::geometry::{
    average_quaternions, pose_error, sample_perturbation, EulerAngles, MiscalibrationRange,
    RigidTransform, UnitQuaternion,
};
use lccal_core::io::{cloud, pgm, pose};
use lccal_core::optimize::{
    chamfer, refine_pose, ChamferParams, FixedCorrespondences, OptimizerConfig,
};
use lccal_core::projection::{CameraIntrinsics, DepthImage, PointCloud};
use lccal_core::scene::{corridor_poses, generate_scene, SceneSpec};

fn report(criterion: usize, ok: bool, detail: &str) {
    println!(
        "{} criterion {criterion}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn virtual_intrinsics() -> CameraIntrinsics<f64> {
    CameraIntrinsics::default_virtual()
}

/// Convex piecewise-linear correction curve from normalized depth to
/// metric depth: breakpoints at 0.3, 0.55, 0.75 with slopes 4, 7, 11, 16.
fn convex_pl(c: f64) -> f64 {
    let breaks = [0.0, 0.3, 0.55, 0.75];
    let slopes = [4.0, 7.0, 11.0, 16.0];
    let mut value = 2.0;
    for i in 0..breaks.len() {
        let hi = if i + 1 < breaks.len() {
            breaks[i + 1]
        } else {
            1.0
        };
        if c > breaks[i] {
            value += slopes[i] * (c.min(hi) - breaks[i]);
        }
    }
    value
}

/// (LDP, normalized CDP, true depth, LiDAR-covered pixels).
type StaircaseFrame = (
    DepthImage<f64>,
    NormalizedDepthImage<f64>,
    DepthImage<f64>,
    Vec<(usize, usize)>,
);

/// Staircase frame at full resolution: 28 vertical strips of constant
/// normalized depth; the true depth runs each strip through `convex_pl`.
fn staircase_frame(ldp_rows: &[usize]) -> StaircaseFrame {
    let intr = virtual_intrinsics();
    let strips = 28;
    let values: Vec<f64> = (0..strips)
        .map(|i| 0.05 + 0.9 * i as f64 / (strips - 1) as f64)
        .collect();
    let mut truth = DepthImage::zeros(intr.clone());
    let mut norm = vec![0.0; intr.width * intr.height];
    let strip_width = intr.width / strips;
    for v in 0..intr.height {
        for u in 0..intr.width {
            let c = values[(u / strip_width).min(strips - 1)];
            truth.set(u, v, convex_pl(c));
            norm[v * intr.width + u] = c;
        }
    }
    let mut ldp = DepthImage::zeros(intr.clone());
    let mut lidar_pixels = Vec::new();
    for i in 0..strips {
        let u = i * strip_width + strip_width / 2;
        for &v in ldp_rows {
            ldp.set(u, v, truth.get(u, v));
            lidar_pixels.push((u, v));
        }
    }
    let cdp = NormalizedDepthImage::from_values(intr, norm).unwrap();
    (ldp, cdp, truth, lidar_pixels)
}

#[test]
fn criterion_1_dar_exactness_and_outlier_robustness() {
    // Exact case: anchors land exactly on the convex correction curve.
    let (ldp, cdp, truth, pixels) = staircase_frame(&[50, 128, 200]);
    let start = Instant::now();
    let refined = refine(&ldp, &cdp, 32).unwrap();
    let elapsed = start.elapsed();
    let mut mae = 0.0;
    for &(u, v) in &pixels {
        mae += (refined.get(u, v) - truth.get(u, v)).abs();
    }
    mae /= pixels.len() as f64;
    let exact_ok = mae < 1e-6;

    // Outlier case: corrupt 20% of the LiDAR readings uniformly at random.
    let (mut ldp2, cdp2, truth2, pixels2) = staircase_frame(&[50, 128, 200]);
    let depth_range = convex_pl(0.95) - convex_pl(0.05);
    let mut rng = StdRng::seed_from_u64(1001);
    let n_outliers = pixels2.len() / 5;
    let mut indices: Vec<usize> = (0..pixels2.len()).collect();
    for i in 0..n_outliers {
        let j = rng.random_range(i..indices.len());
        indices.swap(i, j);
    }
    for &k in &indices[..n_outliers] {
        let (u, v) = pixels2[k];
        ldp2.set(u, v, rng.random_range(convex_pl(0.05)..convex_pl(0.95)));
    }
    let refined2 = refine(&ldp2, &cdp2, 32).unwrap();
    let mut mae2 = 0.0;
    for &(u, v) in &pixels2 {
        mae2 += (refined2.get(u, v) - truth2.get(u, v)).abs();
    }
    mae2 /= pixels2.len() as f64;
    let outlier_ok = mae2 < 0.05 * depth_range;

    let runtime_ok = elapsed.as_secs_f64() < 1.0;
    report(
        1,
        exact_ok && outlier_ok && runtime_ok,
        &format!(
            "DAR exact MAE {mae:.3e} m, outlier MAE {mae2:.4} m (bar {:.4}), runtime {:.3} s",
            0.05 * depth_range,
            elapsed.as_secs_f64()
        ),
    );
}

/// Exhaustive subsequence search with the same slope predicate as the DP.
fn brute_force_chain_len(points: &[(f64, f64)]) -> usize {
    let n = points.len();
    let mut best = 0usize;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let mut ok = true;
        for w in idx.windows(2) {
            if points[w[1]].1 < points[w[0]].1 {
                ok = false;
                break;
            }
        }
        if ok {
            for w in idx.windows(3) {
                let s0 = (points[w[1]].1 - points[w[0]].1) / (points[w[1]].0 - points[w[0]].0);
                let s1 = (points[w[2]].1 - points[w[1]].1) / (points[w[2]].0 - points[w[1]].0);
                let tol = 1e-9 * 1.0f64.max(s0.abs()).max(s1.abs());
                if s1 < s0 - tol {
                    ok = false;
                    break;
                }
            }
        }
        if ok && idx.len() > best {
            best = idx.len();
        }
    }
    best
}

#[test]
fn criterion_2_dp_optimality() {
    let mut rng = StdRng::seed_from_u64(1002);
    let mut checked = 0usize;
    for _ in 0..500 {
        let n = rng.random_range(2..=15);
        let mut xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let points: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| (x, rng.random_range(0.0..20.0)))
            .collect();
        let dp = longest_monotone_convex_subsequence(&points).len();
        let brute = brute_force_chain_len(&points);
        assert_eq!(dp, brute, "DP {dp} vs brute force {brute} on {points:?}");
        checked += 1;
    }
    report(
        2,
        checked == 500,
        &format!("DP cardinality equals exhaustive search on {checked}/500 instances"),
    );
}

#[test]
fn criterion_3_pose_recovery_on_corridor_scenes() {
    let intr = virtual_intrinsics();
    let (lidar_pose, cam_pose) = corridor_poses::<f64>();
    let range = MiscalibrationRange::new(5.0, 0.3).unwrap();
    let config = OptimizerConfig::default();
    let trials: u64 = 50;
    let mut successes: u64 = 0;
    let mut max_runtime = 0.0f64;
    let mut worst = (0.0f64, 0.0f64);
    for trial in 0..trials {
        let mut spec = SceneSpec::<f64>::corridor(2000 + trial);
        spec.noise_sigma = 0.01;
        let scene = generate_scene(&spec, &lidar_pose, &cam_pose, &intr).unwrap();
        let init = sample_perturbation(&range, 3000 + trial).compose(&scene.truth);
        let start = Instant::now();
        let outcome = refine_pose(&scene.lidar, &scene.cam_depth_cloud, &init, &config).unwrap();
        max_runtime = max_runtime.max(start.elapsed().as_secs_f64());
        let (e_r, e_t) = pose_error(&outcome.pose, &scene.truth).unwrap();
        if e_r <= 0.5 && e_t <= 0.05 {
            successes += 1;
        }
        worst = (worst.0.max(e_r), worst.1.max(e_t));
    }
    let ok = successes * 10 >= trials * 9 && max_runtime < 5.0;
    report(
        3,
        ok,
        &format!(
            "pose recovery {successes}/{trials} within (0.5 deg, 0.05 m), worst (e_r {:.3} deg, e_t {:.3} m), max runtime {max_runtime:.2} s",
            worst.0, worst.1
        ),
    );
}

#[test]
fn criterion_4_fusion_beats_median_single_pose() {
    let truth = RigidTransform {
        rotation: EulerAngles::new(4.0, -2.0, 1.0).to_rotation(),
        translation: Vector3::new(0.3, -0.2, 0.5),
    };
    let truth_euler = [4.0, -2.0, 1.0];
    let rot_noise = Normal::new(0.0, 1.0).unwrap();
    let trans_noise = Normal::new(0.0, 0.05).unwrap();
    let reps: u64 = 100;
    let mut wins: u64 = 0;
    for rep in 0..reps {
        let mut rng = StdRng::seed_from_u64(4000 + rep);
        let entries: Vec<(RigidTransform<f64>, f64)> = (0..20)
            .map(|_| {
                let pose = RigidTransform {
                    rotation: EulerAngles::new(
                        truth_euler[0] + rot_noise.sample(&mut rng),
                        truth_euler[1] + rot_noise.sample(&mut rng),
                        truth_euler[2] + rot_noise.sample(&mut rng),
                    )
                    .to_rotation(),
                    translation: truth.translation
                        + Vector3::new(
                            trans_noise.sample(&mut rng),
                            trans_noise.sample(&mut rng),
                            trans_noise.sample(&mut rng),
                        ),
                };
                (pose, 1.0)
            })
            .collect();
        let mut e_rs: Vec<f64> = Vec::new();
        let mut e_ts: Vec<f64> = Vec::new();
        for (p, _) in &entries {
            let (e_r, e_t) = pose_error(p, &truth).unwrap();
            e_rs.push(e_r);
            e_ts.push(e_t);
        }
        e_rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e_ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median_r = 0.5 * (e_rs[9] + e_rs[10]);
        let median_t = 0.5 * (e_ts[9] + e_ts[10]);
        let fused = fuse(&ScoredPoseSet::new(entries, 0.5).unwrap()).unwrap();
        let (e_r, e_t) = pose_error(&fused, &truth).unwrap();
        if e_r < median_r && e_t < median_t {
            wins += 1;
        }
    }
    report(
        4,
        wins * 100 >= reps * 95,
        &format!("fused pose beat the median single-pose error in {wins}/{reps} repetitions"),
    );
}

/// Jacobi eigenvalue iteration on a symmetric 4x4, independent of the
/// implementation's eigensolver.
fn jacobi_top_eigenvector(mut a: Matrix4<f64>) -> nalgebra::Vector4<f64> {
    let mut v = Matrix4::<f64>::identity();
    for _ in 0..200 {
        let (mut p, mut q, mut largest) = (0, 1, 0.0f64);
        for i in 0..4 {
            for j in (i + 1)..4 {
                if a[(i, j)].abs() > largest {
                    largest = a[(i, j)].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if largest < 1e-16 {
            break;
        }
        let theta = 0.5 * (2.0 * a[(p, q)]).atan2(a[(p, p)] - a[(q, q)]);
        let (s, c) = theta.sin_cos();
        let mut rot = Matrix4::<f64>::identity();
        rot[(p, p)] = c;
        rot[(q, q)] = c;
        rot[(p, q)] = -s;
        rot[(q, p)] = s;
        a = rot.transpose() * a * rot;
        v *= rot;
    }
    let mut best = 0;
    for i in 1..4 {
        if a[(i, i)] > a[(best, best)] {
            best = i;
        }
    }
    v.column(best).into_owned()
}

fn random_unit_quaternion(rng: &mut StdRng) -> UnitQuaternion<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    loop {
        let q = UnitQuaternion::new(
            normal.sample(rng),
            normal.sample(rng),
            normal.sample(rng),
            normal.sample(rng),
        );
        if let Ok(q) = q {
            return q;
        }
    }
}

#[test]
fn criterion_5_quaternion_averaging_against_eigensolver_oracle() {
    let mut rng = StdRng::seed_from_u64(1005);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=6);
        let quats: Vec<UnitQuaternion<f64>> =
            (0..n).map(|_| random_unit_quaternion(&mut rng)).collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..3.0)).collect();
        let avg = match average_quaternions(&quats, &weights) {
            Ok(q) => q,
            // A tied top eigenvalue is a legitimate rejection; skip it.
            Err(_) => continue,
        };
        let sum: f64 = weights.iter().sum();
        let mut c = Matrix4::<f64>::zeros();
        for (q, &w) in quats.iter().zip(&weights) {
            let wq = q.as_vector() * (w / sum).sqrt();
            c += wq * wq.transpose();
        }
        let mut e = jacobi_top_eigenvector(c);
        e /= e.norm();
        let a = avg.as_vector();
        let diff = (a - e).norm().min((a + e).norm());
        worst = worst.max(diff);
    }
    let oracle_ok = worst < 1e-9;

    // All-equal input returns the input exactly.
    let q = random_unit_quaternion(&mut rng);
    let exact = average_quaternions(&[q, q, q, q], &[0.3, 1.0, 2.0, 0.1]).unwrap();
    let exact_ok = exact == q;
    report(
        5,
        oracle_ok && exact_ok,
        &format!("quaternion average within {worst:.2e} of the eigensolver oracle; all-equal input exact: {exact_ok}"),
    );
}

#[test]
fn criterion_6_chamfer_oracle_and_rigid_invariance() {
    let mut rng = StdRng::seed_from_u64(1006);
    let random_cloud = |rng: &mut StdRng| {
        PointCloud::new(
            (0..200)
                .map(|_| {
                    Vector3::new(
                        rng.random_range(-5.0..5.0),
                        rng.random_range(-5.0..5.0),
                        rng.random_range(-5.0..5.0),
                    )
                })
                .collect(),
        )
    };
    let mut worst_rel = 0.0f64;
    for _ in 0..20 {
        let p = random_cloud(&mut rng);
        let q = random_cloud(&mut rng);
        let params = ChamferParams::default();
        let fast: f64 = chamfer(&p, &q, &params).unwrap();
        let mut forward = 0.0;
        for a in &p.points {
            forward += q
                .points
                .iter()
                .map(|b| (a - b).norm_squared())
                .fold(f64::INFINITY, f64::min);
        }
        let mut backward = 0.0;
        for b in &q.points {
            backward += p
                .points
                .iter()
                .map(|a| (b - a).norm_squared())
                .fold(f64::INFINITY, f64::min);
        }
        let oracle = 0.5 * forward / 200.0 + 0.5 * backward / 200.0;
        worst_rel = worst_rel.max((fast - oracle).abs() / oracle.max(1e-300));
    }
    let oracle_ok = worst_rel <= 1e-12;

    let p = random_cloud(&mut rng);
    let q = random_cloud(&mut rng);
    let base: f64 = chamfer(&p, &q, &ChamferParams::default()).unwrap();
    let motion = RigidTransform {
        rotation: EulerAngles::new(33.0, -21.0, 8.0).to_rotation(),
        translation: Vector3::new(2.0, -1.0, 4.0),
    };
    let moved: f64 = chamfer(
        &p.transformed(&motion),
        &q.transformed(&motion),
        &ChamferParams::default(),
    )
    .unwrap();
    let invariance_rel = (moved - base).abs() / base.max(1e-300);
    let invariance_ok = invariance_rel <= 1e-9;
    report(
        6,
        oracle_ok && invariance_ok,
        &format!("chamfer within {worst_rel:.2e} of the linear-scan oracle, rigid-invariance deviation {invariance_rel:.2e}"),
    );
}

#[test]
fn criterion_7_difference_map_bit_exactness_and_invariants() {
    let intr = CameraIntrinsics::new(100.0, 100.0, 16.0, 8.0, 32, 16).unwrap();
    let mut rng = StdRng::seed_from_u64(1007);
    let random_image = |sparse: bool, rng: &mut StdRng| {
        let mut img = DepthImage::zeros(intr.clone());
        for v in 0..16 {
            for u in 0..32 {
                if !sparse || rng.random_range(0..3) == 0 {
                    img.set(u, v, rng.random_range(0.1..30.0));
                }
            }
        }
        img
    };
    let e_tar = 0.1f64;
    let mut all_ok = true;
    for _ in 0..100 {
        let ldp = random_image(true, &mut rng);
        let cdp = random_image(false, &mut rng);
        let map = build_difference_map(&ldp, &cdp, e_tar).unwrap();
        for i in 0..32 * 16 {
            let delta = ldp.data()[i] - cdp.data()[i];
            let (big, small) = if delta.abs() > e_tar {
                (delta, 0.0)
            } else {
                (0.0, delta)
            };
            // Bit-exact equality with the per-pixel reimplementation.
            all_ok &= map.lidar_depth[i].to_bits() == ldp.data()[i].to_bits();
            all_ok &= map.large_diff[i].to_bits() == big.to_bits();
            all_ok &= map.small_diff[i].to_bits() == small.to_bits();
            // Channel invariants.
            all_ok &= map.large_diff[i] * map.small_diff[i] == 0.0;
            all_ok &= map.large_diff[i] + map.small_diff[i] == delta;
        }
    }
    report(7, all_ok, "difference map bit-exact with the formula oracle; disjointness and sum invariants hold on 100 frames");
}

#[test]
fn criterion_8_gauss_newton_jacobian_matches_finite_differences() {
    let mut rng = StdRng::seed_from_u64(1008);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rand_vec = |rng: &mut StdRng| {
            Vector3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(0.5..6.0),
            )
        };
        let n_p = rng.random_range(2..10);
        let n_q = rng.random_range(2..10);
        let system = FixedCorrespondences {
            lidar_points: (0..n_p).map(|_| rand_vec(&mut rng)).collect(),
            cam_targets: (0..n_p).map(|_| rand_vec(&mut rng)).collect(),
            cam_points: (0..n_q).map(|_| rand_vec(&mut rng)).collect(),
            lidar_sources: (0..n_q).map(|_| rand_vec(&mut rng)).collect(),
            weight_p: (0.5 / n_p as f64).sqrt(),
            weight_q: (0.5 / n_q as f64).sqrt(),
            anchor: if rng.random_range(0..2) == 0 {
                Some(rand_vec(&mut rng))
            } else {
                None
            },
        };
        let pose = RigidTransform {
            rotation: EulerAngles::new(
                rng.random_range(-40.0..40.0),
                rng.random_range(-40.0..40.0),
                rng.random_range(-40.0..40.0),
            )
            .to_rotation(),
            translation: rand_vec(&mut rng),
        };
        let analytic = system.jacobian(&pose);
        let step = 1e-6;
        let mut numeric = nalgebra::DMatrix::zeros(system.row_count(), 6);
        for c in 0..6 {
            let mut plus = Vector6::zeros();
            plus[c] = step;
            let mut minus = Vector6::zeros();
            minus[c] = -step;
            let col =
                (system.residuals(&pose, &plus) - system.residuals(&pose, &minus)) / (2.0 * step);
            numeric.set_column(c, &col);
        }
        let rel = (&analytic - &numeric).norm() / numeric.norm();
        worst = worst.max(rel);
    }
    report(
        8,
        worst < 1e-5,
        &format!(
            "analytic Jacobian within {worst:.2e} relative of central differences on 100 instances"
        ),
    );
}

#[test]
fn criterion_9_augmentation_mapping_properties() {
    use lccal_core::augment::{generate_sample, generate_single_sided};

    let intr = virtual_intrinsics();
    let (lidar_pose, cam_pose) = corridor_poses::<f64>();
    let mut spec = SceneSpec::<f64>::corridor(1009);
    spec.lidar_density = 40.0;
    spec.cam_density = 60.0;
    let scene = generate_scene(&spec, &lidar_pose, &cam_pose, &intr).unwrap();
    let cam_in_base = scene.cam_depth_cloud.transformed(&scene.truth.inverse());
    let range = MiscalibrationRange::new(5.0, 0.5).unwrap();

    let hash_of = |img: &DepthImage<f64>| {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut h = DefaultHasher::new();
        for d in img.data() {
            d.to_bits().hash(&mut h);
        }
        h.finish()
    };

    let mut double_hashes = std::collections::HashSet::new();
    let mut single_hashes = std::collections::HashSet::new();
    for seed in 0..10 {
        let double = generate_sample(
            &scene.lidar,
            &cam_in_base,
            &scene.truth,
            &range,
            &range,
            &intr,
            seed,
        )
        .unwrap();
        double_hashes.insert(hash_of(&double.cdp));
        let single =
            generate_single_sided(&scene.lidar, &scene.truth, &range, &intr, seed).unwrap();
        single_hashes.insert(hash_of(&single.cdp));
    }
    let ok = double_hashes.len() > 1 && single_hashes.len() == 1;
    report(
        9,
        ok,
        &format!(
            "double-sided CDPs: {} distinct over 10 seeds (many-to-many); single-sided: {} (many-to-one)",
            double_hashes.len(),
            single_hashes.len()
        ),
    );
}

#[test]
fn criterion_10_format_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = StdRng::seed_from_u64(1010);

    // Point cloud .bin: bit-exact for f32 payloads.
    let points: Vec<Vector3<f32>> = (0..1000)
        .map(|_| {
            Vector3::new(
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
                rng.random_range(-50.0..50.0),
            )
        })
        .collect();
    let intensity: Vec<f32> = (0..1000).map(|_| rng.random_range(0.0..1.0)).collect();
    let cloud_data = PointCloud::with_intensity(points, intensity).unwrap();
    let bin_a = dir.path().join("a.bin");
    let bin_b = dir.path().join("b.bin");
    cloud::write_bin(&bin_a, &cloud_data).unwrap();
    let cloud_back: PointCloud<f32> = cloud::read_bin(&bin_a).unwrap();
    cloud::write_bin(&bin_b, &cloud_back).unwrap();
    let bin_ok = cloud_back == cloud_data
        && std::fs::read(&bin_a).unwrap() == std::fs::read(&bin_b).unwrap();

    // Pose files: write -> read -> write reproduces the bytes.
    let poses: Vec<RigidTransform<f64>> = (0..6)
        .map(|i| RigidTransform {
            rotation: EulerAngles::new(10.0 * i as f64 - 25.0, 7.0, -3.0).to_rotation(),
            translation: Vector3::new(0.1 * i as f64, -0.4, 1.7),
        })
        .collect();
    let pose_a = dir.path().join("a.txt");
    let pose_b = dir.path().join("b.txt");
    pose::write_pose_file(&pose_a, &poses).unwrap();
    let poses_back: Vec<RigidTransform<f64>> = pose::read_pose_file(&pose_a).unwrap();
    pose::write_pose_file(&pose_b, &poses_back).unwrap();
    let pose_ok = std::fs::read(&pose_a).unwrap() == std::fs::read(&pose_b).unwrap();

    // Millimeter PGM: depth quantized to 1 mm by the format, then stable.
    let intr = CameraIntrinsics::new(100.0, 100.0, 16.0, 8.0, 32, 16).unwrap();
    let mut img = DepthImage::zeros(intr.clone());
    for v in 0..16 {
        for u in 0..32 {
            if rng.random_range(0..3) != 0 {
                img.set(u, v, rng.random_range(0.001f64..60.0));
            }
        }
    }
    let pgm_a = dir.path().join("a.pgm");
    let pgm_b = dir.path().join("b.pgm");
    pgm::write_depth_pgm(&pgm_a, &img).unwrap();
    let img_back = pgm::read_depth_pgm(&pgm_a, intr).unwrap();
    pgm::write_depth_pgm(&pgm_b, &img_back).unwrap();
    let quantization_ok = img
        .data()
        .iter()
        .zip(img_back.data())
        .all(|(a, b)| (a - b).abs() <= 0.0005 + 1e-12);
    let pgm_ok =
        quantization_ok && std::fs::read(&pgm_a).unwrap() == std::fs::read(&pgm_b).unwrap();

    report(
        10,
        bin_ok && pose_ok && pgm_ok,
        &format!("roundtrips bit-exact: cloud .bin {bin_ok}, pose file {pose_ok}, millimeter PGM {pgm_ok}"),
    );
}
