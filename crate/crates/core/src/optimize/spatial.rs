//! Exact nearest-neighbor queries over a point cloud via an axis-aligned
//! splitting tree (median-split kd-tree). Immutable after construction and
//! safe to share across threads.

use nalgebra::Vector3;

use crate::projection::PointCloud;
use crate::scalar::Scalar;

struct Node {
    // Index into the permuted point array for leaves; for inner nodes the
    // splitting point itself is stored here as well.
    point: usize,
    axis: usize,
    left: Option<Box<Node>>,
    right: Option<Box<Node>>,
}

/// Immutable nearest-neighbor index over a snapshot of a point cloud.
pub struct SpatialIndex<T: Scalar> {
    points: Vec<Vector3<T>>,
    root: Option<Box<Node>>,
}

impl<T: Scalar> SpatialIndex<T> {
    pub fn build(cloud: &PointCloud<T>) -> Self {
        Self::from_points(cloud.points.clone())
    }

    pub fn from_points(points: Vec<Vector3<T>>) -> Self {
        let mut indices: Vec<usize> = (0..points.len()).collect();
        let root = build_node(&points, &mut indices, 0);
        Self { points, root }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> &Vector3<T> {
        &self.points[index]
    }

    /// Returns the index of the exact Euclidean nearest neighbor and the
    /// squared distance to it. `None` on an empty index.
    pub fn nearest(&self, query: &Vector3<T>) -> Option<(usize, T)> {
        let root = self.root.as_ref()?;
        let mut best = (root.point, (self.points[root.point] - query).norm_squared());
        self.search(root, query, &mut best);
        Some(best)
    }

    fn search(&self, node: &Node, query: &Vector3<T>, best: &mut (usize, T)) {
        let point = &self.points[node.point];
        let d2 = (point - query).norm_squared();
        if d2 < best.1 {
            *best = (node.point, d2);
        }
        let delta = query[node.axis] - point[node.axis];
        let (near, far) = if delta < T::zero() {
            (&node.left, &node.right)
        } else {
            (&node.right, &node.left)
        };
        if let Some(n) = near {
            self.search(n, query, best);
        }
        if let Some(f) = far {
            if delta * delta < best.1 {
                self.search(f, query, best);
            }
        }
    }
}

fn build_node<T: Scalar>(
    points: &[Vector3<T>],
    indices: &mut [usize],
    depth: usize,
) -> Option<Box<Node>> {
    if indices.is_empty() {
        return None;
    }
    let axis = depth % 3;
    let mid = indices.len() / 2;
    indices.select_nth_unstable_by(mid, |&a, &b| {
        points[a][axis].partial_cmp(&points[b][axis]).unwrap()
    });
    let point = indices[mid];
    let (left, rest) = indices.split_at_mut(mid);
    let right = &mut rest[1..];
    Some(Box::new(Node {
        point,
        axis,
        left: build_node(points, left, depth + 1),
        right: build_node(points, right, depth + 1),
    }))
}
