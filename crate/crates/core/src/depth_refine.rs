//! Depth anchor refinement (DAR): correcting a normalized monocular depth
//! map to metric scale using sparse LiDAR guidance.
//!
//! The stages are anchor extraction at coincident pixels, two-stage
//! selection (coverage-aware bin thinning followed by a dynamic program for
//! the largest monotone convex subsequence), and piecewise-linear remapping
//! of the whole image through the selected anchors.

use thiserror::Error;

use crate::projection::{CameraIntrinsics, DepthImage};
use crate::scalar::{cast, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum RefineError {
    #[error("no anchors: the depth images share no measured pixels")]
    NoAnchors,
    #[error("degenerate anchors: fewer than 2 selectable anchor points")]
    DegenerateAnchors,
    #[error("target anchor count must be at least 2")]
    TargetTooSmall,
    #[error("image sizes differ: {0}x{1} vs {2}x{3}")]
    SizeMismatch(usize, usize, usize, usize),
    #[error("anchor set violates {0}")]
    InvalidAnchors(&'static str),
    #[error("normalized depth values must lie in [0, 1]")]
    BadNormalizedValue,
    #[error("no pixels are valid in both images")]
    NoValidPixels,
}

/// A normalized depth map with values in [0, 1]; 0 doubles as "no data".
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedDepthImage<T: Scalar> {
    pub intrinsics: CameraIntrinsics<T>,
    values: Vec<T>,
}

impl<T: Scalar> NormalizedDepthImage<T> {
    pub fn from_values(
        intrinsics: CameraIntrinsics<T>,
        values: Vec<T>,
    ) -> Result<Self, RefineError> {
        if values.len() != intrinsics.width * intrinsics.height {
            return Err(RefineError::SizeMismatch(
                intrinsics.width,
                intrinsics.height,
                values.len(),
                1,
            ));
        }
        if values
            .iter()
            .any(|v| !v.is_finite() || *v < T::zero() || *v > T::one())
        {
            return Err(RefineError::BadNormalizedValue);
        }
        Ok(Self { intrinsics, values })
    }

    pub fn width(&self) -> usize {
        self.intrinsics.width
    }

    pub fn height(&self) -> usize {
        self.intrinsics.height
    }

    pub fn get(&self, u: usize, v: usize) -> T {
        self.values[v * self.intrinsics.width + u]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Min-max normalizes a metric depth image over the whole grid. Empty
    /// pixels count as zero, so with any empty pixel present this divides by
    /// the maximum and 0 keeps meaning "no data".
    pub fn normalize(image: &DepthImage<T>) -> Self {
        let mut lo = T::zero();
        let mut hi = T::zero();
        let mut first = true;
        for &d in image.data() {
            if first {
                lo = d;
                hi = d;
                first = false;
            } else {
                if d < lo {
                    lo = d;
                }
                if d > hi {
                    hi = d;
                }
            }
        }
        let span = hi - lo;
        let values = image
            .data()
            .iter()
            .map(|&d| {
                if span <= T::zero() {
                    T::zero()
                } else {
                    (d - lo) / span
                }
            })
            .collect();
        Self {
            intrinsics: image.intrinsics.clone(),
            values,
        }
    }
}

/// Nondecreasing-slope comparison with a relative tolerance, so exactly
/// collinear anchors still chain together despite rounding noise in the
/// secant slopes. Used identically by the selection DP and the validator.
pub fn slope_nondecreasing<T: Scalar>(prev: T, next: T) -> bool {
    let tol = cast::<T>(1e-9) * T::one().max(prev.abs()).max(next.abs());
    next >= prev - tol
}

/// Ordered (normalized camera depth, metric LiDAR depth) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet<T: Scalar> {
    pub pairs: Vec<(T, T)>,
}

impl<T: Scalar> AnchorSet<T> {
    pub fn new(pairs: Vec<(T, T)>) -> Result<Self, RefineError> {
        let set = Self { pairs };
        set.validate_sorted()?;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Checks the raw-set invariant: strictly increasing camera depth.
    pub fn validate_sorted(&self) -> Result<(), RefineError> {
        for w in self.pairs.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(RefineError::InvalidAnchors("strictly increasing d_c"));
            }
        }
        Ok(())
    }

    /// Checks all three selection constraints: strictly increasing camera
    /// depth, nondecreasing LiDAR depth, nondecreasing secant slopes.
    pub fn validate_selected(&self) -> Result<(), RefineError> {
        self.validate_sorted()?;
        for w in self.pairs.windows(2) {
            if w[1].1 < w[0].1 {
                return Err(RefineError::InvalidAnchors("nondecreasing d_l"));
            }
        }
        for w in self.pairs.windows(3) {
            let s0 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let s1 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            if !slope_nondecreasing(s0, s1) {
                return Err(RefineError::InvalidAnchors("nondecreasing secant slopes"));
            }
        }
        Ok(())
    }

    /// The piecewise-linear correction: clamps below the first and above the
    /// last anchor, interpolates linearly between adjacent anchors.
    pub fn evaluate(&self, d_c: T) -> T {
        let pairs = &self.pairs;
        if d_c <= pairs[0].0 {
            return pairs[0].1;
        }
        let last = pairs[pairs.len() - 1];
        if d_c > last.0 {
            return last.1;
        }
        let i = pairs.partition_point(|p| p.0 < d_c);
        // pairs[i-1].0 < d_c <= pairs[i].0 is guaranteed here.
        let (x0, y0) = pairs[i - 1];
        let (x1, y1) = pairs[i];
        y0 + (y1 - y0) / (x1 - x0) * (d_c - x0)
    }
}

/// Pairs every pixel where the LDP has a return with the normalized camera
/// depth at the same coordinates. Pairs come out sorted by camera depth with
/// exact duplicates collapsed to the pair holding their median LiDAR depth.
pub fn extract_anchors<T: Scalar>(
    ldp: &DepthImage<T>,
    cdp: &NormalizedDepthImage<T>,
) -> Result<AnchorSet<T>, RefineError> {
    if ldp.width() != cdp.width() || ldp.height() != cdp.height() {
        return Err(RefineError::SizeMismatch(
            ldp.width(),
            ldp.height(),
            cdp.width(),
            cdp.height(),
        ));
    }
    let mut pairs: Vec<(T, T)> = Vec::new();
    for v in 0..ldp.height() {
        for u in 0..ldp.width() {
            let d_l = ldp.get(u, v);
            if d_l > T::zero() {
                pairs.push((cdp.get(u, v), d_l));
            }
        }
    }
    if pairs.is_empty() {
        return Err(RefineError::NoAnchors);
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Collapse runs of identical d_c to the element with the (lower) median d_l.
    let mut collapsed: Vec<(T, T)> = Vec::with_capacity(pairs.len());
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 == pairs[start].0 {
            end += 1;
        }
        if end - start == 1 {
            collapsed.push(pairs[start]);
        } else {
            let mut depths: Vec<T> = pairs[start..end].iter().map(|p| p.1).collect();
            depths.sort_by(|a, b| a.partial_cmp(b).unwrap());
            collapsed.push((pairs[start].0, depths[(depths.len() - 1) / 2]));
        }
        start = end;
    }
    Ok(AnchorSet { pairs: collapsed })
}

/// Exact dynamic program for the maximum-cardinality subsequence with
/// strictly increasing x, nondecreasing y, and nondecreasing secant slopes.
/// Input points must be strictly increasing in x. Returns selected indices.
///
/// The state is the chain's last pair of points, which is what the slope
/// constraint depends on; ties go to the chain with the smaller final slope.
#[allow(clippy::needless_range_loop)]
pub fn longest_monotone_convex_subsequence<T: Scalar>(points: &[(T, T)]) -> Vec<usize> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![0];
    }
    let slope = |a: usize, b: usize| (points[b].1 - points[a].1) / (points[b].0 - points[a].0);

    // len[j][i]: longest valid chain ending with (points[j], points[i]).
    let mut len = vec![vec![0usize; n]; n];
    let mut parent = vec![vec![usize::MAX; n]; n];
    for i in 0..n {
        for j in 0..i {
            if points[i].1 < points[j].1 {
                continue;
            }
            let s_ji = slope(j, i);
            let mut best = 2;
            let mut best_k = usize::MAX;
            for k in 0..j {
                if len[k][j] == 0 {
                    continue;
                }
                if slope_nondecreasing(slope(k, j), s_ji) && len[k][j] + 1 > best {
                    best = len[k][j] + 1;
                    best_k = k;
                }
            }
            len[j][i] = best;
            parent[j][i] = best_k;
        }
    }

    let mut best_len = 1;
    let mut best_pair: Option<(usize, usize)> = None;
    let mut best_slope = T::zero();
    for i in 0..n {
        for j in 0..i {
            if len[j][i] == 0 {
                continue;
            }
            let s = slope(j, i);
            let better = len[j][i] > best_len
                || (len[j][i] == best_len && best_pair.is_some() && s < best_slope);
            if better || (len[j][i] >= best_len && best_pair.is_none()) {
                best_len = len[j][i];
                best_pair = Some((j, i));
                best_slope = s;
            }
        }
    }

    match best_pair {
        None => vec![0],
        Some((mut j, mut i)) => {
            let mut chain = vec![i, j];
            while parent[j][i] != usize::MAX {
                let k = parent[j][i];
                chain.push(k);
                i = j;
                j = k;
            }
            chain.reverse();
            chain
        }
    }
}

/// Stage I of the selection: partition the camera-depth domain into `2 * t`
/// equal bins and keep, per nonempty bin, the point closest to the bin's
/// least-squares line (the lone point when a bin has fewer than 2).
fn thin_candidates<T: Scalar>(pairs: &[(T, T)], target_count: usize) -> Vec<(T, T)> {
    let bins = 2 * target_count;
    let lo = pairs[0].0;
    let hi = pairs[pairs.len() - 1].0;
    let span = hi - lo;
    if span <= T::zero() {
        return vec![pairs[0]];
    }
    let bin_of = |x: T| -> usize {
        let b = ((x - lo) / span * cast(bins as f64))
            .floor()
            .to_usize()
            .unwrap_or(0);
        b.min(bins - 1)
    };

    let mut candidates = Vec::new();
    let mut start = 0;
    while start < pairs.len() {
        let b = bin_of(pairs[start].0);
        let mut end = start + 1;
        while end < pairs.len() && bin_of(pairs[end].0) == b {
            end += 1;
        }
        let members = &pairs[start..end];
        if members.len() == 1 {
            candidates.push(members[0]);
        } else {
            let m = cast::<T>(members.len() as f64);
            let mean_x = members.iter().map(|p| p.0).fold(T::zero(), |a, b| a + b) / m;
            let mean_y = members.iter().map(|p| p.1).fold(T::zero(), |a, b| a + b) / m;
            let mut cov = T::zero();
            let mut var = T::zero();
            for p in members {
                cov += (p.0 - mean_x) * (p.1 - mean_y);
                var += (p.0 - mean_x) * (p.0 - mean_x);
            }
            let alpha = if var > T::zero() {
                cov / var
            } else {
                T::zero()
            };
            let beta = mean_y - alpha * mean_x;
            let mut best = members[0];
            let mut best_residual = (members[0].1 - (alpha * members[0].0 + beta)).abs();
            for p in &members[1..] {
                let r = (p.1 - (alpha * p.0 + beta)).abs();
                if r < best_residual {
                    best_residual = r;
                    best = *p;
                }
            }
            candidates.push(best);
        }
        start = end;
    }
    candidates
}

/// Decimates a chain to at most `target_count` points, choosing the nearest
/// chain point to each of `target_count` uniformly spaced camera-depth
/// targets; both endpoints are always retained.
fn subsample_uniform<T: Scalar>(chain: &[(T, T)], target_count: usize) -> Vec<(T, T)> {
    let lo = chain[0].0;
    let hi = chain[chain.len() - 1].0;
    let span = hi - lo;
    let mut keep = std::collections::BTreeSet::new();
    keep.insert(0);
    keep.insert(chain.len() - 1);
    for k in 1..target_count.saturating_sub(1) {
        let target = lo + span * cast::<T>(k as f64) / cast::<T>((target_count - 1) as f64);
        let i = chain.partition_point(|p| p.0 < target);
        let candidate = if i == 0 {
            0
        } else if i >= chain.len() {
            chain.len() - 1
        } else if (chain[i].0 - target) < (target - chain[i - 1].0) {
            i
        } else {
            i - 1
        };
        keep.insert(candidate);
    }
    keep.into_iter().map(|i| chain[i]).collect()
}

/// Two-stage anchor selection: bin thinning, then the exact DP for the
/// largest monotone convex chain, then uniform decimation to `target_count`.
pub fn select_anchors<T: Scalar>(
    raw: &AnchorSet<T>,
    target_count: usize,
) -> Result<AnchorSet<T>, RefineError> {
    if target_count < 2 {
        return Err(RefineError::TargetTooSmall);
    }
    if raw.is_empty() {
        return Err(RefineError::NoAnchors);
    }
    raw.validate_sorted()?;

    let candidates = thin_candidates(&raw.pairs, target_count);
    let chain_idx = longest_monotone_convex_subsequence(&candidates);
    if chain_idx.len() < 2 {
        return Err(RefineError::DegenerateAnchors);
    }
    let chain: Vec<(T, T)> = chain_idx.iter().map(|&i| candidates[i]).collect();
    let selected = if chain.len() > target_count {
        subsample_uniform(&chain, target_count)
    } else {
        chain
    };

    let set = AnchorSet { pairs: selected };
    set.validate_selected()?;
    Ok(set)
}

/// Remaps every pixel through the anchor curve; zero-valued pixels stay zero.
pub fn remap_depth<T: Scalar>(
    image: &NormalizedDepthImage<T>,
    anchors: &AnchorSet<T>,
) -> Result<DepthImage<T>, RefineError> {
    if anchors.len() < 2 {
        return Err(RefineError::DegenerateAnchors);
    }
    anchors.validate_selected()?;
    let mut out = DepthImage::zeros(image.intrinsics.clone());
    for v in 0..image.height() {
        for u in 0..image.width() {
            let d_c = image.get(u, v);
            if d_c > T::zero() {
                out.set(u, v, anchors.evaluate(d_c));
            }
        }
    }
    Ok(out)
}

/// The full DAR pass: extract, select, remap.
pub fn refine<T: Scalar>(
    ldp: &DepthImage<T>,
    cdp: &NormalizedDepthImage<T>,
    target_count: usize,
) -> Result<DepthImage<T>, RefineError> {
    let raw = extract_anchors(ldp, cdp)?;
    let selected = select_anchors(&raw, target_count)?;
    remap_depth(cdp, &selected)
}

/// Standard monocular depth-quality metrics over pixels valid in both maps.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMetrics<T: Scalar> {
    pub mae: T,
    pub rmse: T,
    pub abs_rel: T,
    pub sq_rel: T,
    pub delta1: T,
    pub delta2: T,
    pub delta3: T,
    pub count: usize,
}

pub fn depth_metrics<T: Scalar>(
    predicted: &DepthImage<T>,
    truth: &DepthImage<T>,
) -> Result<DepthMetrics<T>, RefineError> {
    if !predicted.same_size(truth) {
        return Err(RefineError::SizeMismatch(
            predicted.width(),
            predicted.height(),
            truth.width(),
            truth.height(),
        ));
    }
    let mut count = 0usize;
    let mut abs_sum = T::zero();
    let mut sq_sum = T::zero();
    let mut abs_rel = T::zero();
    let mut sq_rel = T::zero();
    let mut d1 = 0usize;
    let mut d2 = 0usize;
    let mut d3 = 0usize;
    for (&p, &g) in predicted.data().iter().zip(truth.data()) {
        if p <= T::zero() || g <= T::zero() {
            continue;
        }
        count += 1;
        let diff = (p - g).abs();
        abs_sum += diff;
        sq_sum += diff * diff;
        abs_rel += diff / g;
        sq_rel += diff * diff / g;
        let ratio = if p > g { p / g } else { g / p };
        if ratio < cast(1.25) {
            d1 += 1;
        }
        if ratio < cast(1.25f64 * 1.25) {
            d2 += 1;
        }
        if ratio < cast(1.25f64 * 1.25 * 1.25) {
            d3 += 1;
        }
    }
    if count == 0 {
        return Err(RefineError::NoValidPixels);
    }
    let n = cast::<T>(count as f64);
    Ok(DepthMetrics {
        mae: abs_sum / n,
        rmse: (sq_sum / n).sqrt(),
        abs_rel: abs_rel / n,
        sq_rel: sq_rel / n,
        delta1: cast::<T>(d1 as f64) / n,
        delta2: cast::<T>(d2 as f64) / n,
        delta3: cast::<T>(d3 as f64) / n,
        count,
    })
}
