//! Point sets on the unit sphere `S^(n-1)` and nearest-neighbour spacing.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::linalg::norm;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSample<T> {
    pub points: Vec<Vec<T>>,
    pub count: usize,
    /// Largest nearest-neighbour distance in the set. A mesh-fineness
    /// heuristic, not a proven covering radius.
    pub covering_radius_estimate: T,
}

/// `count` distinct normalized Gaussian vectors from a ChaCha stream seeded
/// with `seed`.
///
/// Samples are nested: the first `k` points of a sample of size `N ≥ k` are
/// the sample of size `k`. On `S⁰ = {±1}` at most two points exist.
pub fn sample_sphere<T: Scalar>(n: usize, count: usize, seed: u64) -> SphereSample<T> {
    assert!(n >= 1 && count >= 1, "sample_sphere needs n >= 1 and count >= 1");
    let target = if n == 1 { count.min(2) } else { count };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(target);
    let mut points: Vec<Vec<T>> = Vec::with_capacity(target);
    while points.len() < target {
        let g: Vec<T> = (0..n)
            .map(|_| T::lit(StandardNormal.sample(&mut rng)))
            .collect();
        let r = norm(&g);
        if r <= T::min_positive_value() {
            continue;
        }
        let p: Vec<T> = g.into_iter().map(|x| x / r).collect();
        if seen.insert(p.iter().map(|x| x.as_f64().to_bits()).collect()) {
            points.push(p);
        }
    }
    let as_f64: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().map(|x| x.as_f64()).collect())
        .collect();
    let covering = nearest_neighbor_distances(&as_f64)
        .into_iter()
        .fold(0.0_f64, f64::max);
    SphereSample {
        count: points.len(),
        points,
        covering_radius_estimate: T::lit(if target == 1 { 2.0 } else { covering }),
    }
}

struct KdNode {
    idx: usize,
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

/// Static k-d tree over a borrowed point set.
struct KdTree<'a> {
    pts: &'a [Vec<f64>],
    nodes: Vec<KdNode>,
    root: Option<usize>,
}

impl<'a> KdTree<'a> {
    fn build(pts: &'a [Vec<f64>]) -> Self {
        let mut idx: Vec<usize> = (0..pts.len()).collect();
        let mut tree = Self {
            pts,
            nodes: Vec::with_capacity(pts.len()),
            root: None,
        };
        tree.root = tree.build_rec(&mut idx, 0);
        tree
    }

    fn build_rec(&mut self, idx: &mut [usize], depth: usize) -> Option<usize> {
        if idx.is_empty() {
            return None;
        }
        let dim = self.pts[idx[0]].len();
        let axis = depth % dim;
        let mid = idx.len() / 2;
        let pts = self.pts;
        idx.select_nth_unstable_by(mid, |&a, &b| pts[a][axis].total_cmp(&pts[b][axis]));
        let node = self.nodes.len();
        self.nodes.push(KdNode {
            idx: idx[mid],
            axis,
            left: None,
            right: None,
        });
        let (lo, rest) = idx.split_at_mut(mid);
        let left = self.build_rec(lo, depth + 1);
        let right = self.build_rec(&mut rest[1..], depth + 1);
        self.nodes[node].left = left;
        self.nodes[node].right = right;
        Some(node)
    }

    /// Squared distance from point `q` to its nearest other point.
    fn nearest_other(&self, q: usize) -> f64 {
        let mut best = f64::INFINITY;
        self.search(self.root, q, &mut best);
        best
    }

    fn search(&self, node: Option<usize>, q: usize, best: &mut f64) {
        let Some(k) = node else { return };
        let node = &self.nodes[k];
        let (p, x) = (&self.pts[node.idx], &self.pts[q]);
        if node.idx != q {
            let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < *best {
                *best = d2;
            }
        }
        let delta = x[node.axis] - p[node.axis];
        let (near, far) = if delta < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.search(near, q, best);
        if delta * delta < *best {
            self.search(far, q, best);
        }
    }
}

/// Distance from every point to its nearest distinct neighbour, in input
/// order. A single point gets `+∞`.
pub fn nearest_neighbor_distances(points: &[Vec<f64>]) -> Vec<f64> {
    if points.len() < 2 {
        return vec![f64::INFINITY; points.len()];
    }
    let tree = KdTree::build(points);
    (0..points.len())
        .into_par_iter()
        .map(|i| tree.nearest_other(i).sqrt())
        .collect()
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton points in `(0, 1)^dims`, starting from index 1.
pub fn halton(dims: usize, count: usize) -> Vec<Vec<f64>> {
    let bases = primes(dims);
    (1..=count as u64)
        .map(|i| bases.iter().map(|&b| radical_inverse(i, b)).collect())
        .collect()
}

/// Low-discrepancy unit directions: Halton points pushed through the
/// inverse normal CDF and normalized. Returns the directions together with
/// one extra Halton coordinate per point for the caller's use.
pub fn low_discrepancy_directions(n: usize, count: usize) -> Vec<(Vec<f64>, f64)> {
    let normal = Normal::standard();
    halton(n + 1, count)
        .into_iter()
        .filter_map(|u| {
            let g: Vec<f64> = u[..n].iter().map(|&x| normal.inverse_cdf(x)).collect();
            let r = norm(&g);
            (r > 0.0 && r.is_finite()).then(|| (g.iter().map(|x| x / r).collect(), u[n]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_unit_and_deterministic() {
        let s = sample_sphere::<f64>(2, 4, 11);
        assert_eq!(s.count, 4);
        for p in &s.points {
            assert!((norm(p) - 1.0).abs() < 1e-14);
        }
        let a = sample_sphere::<f64>(3, 1000, 7);
        let b = sample_sphere::<f64>(3, 1000, 7);
        assert_eq!(a, b);
    }

    #[test]
    fn samples_are_nested() {
        let small = sample_sphere::<f64>(3, 100, 3);
        let big = sample_sphere::<f64>(3, 400, 3);
        assert_eq!(&big.points[..100], &small.points[..]);
    }

    #[test]
    fn zero_sphere_has_two_points() {
        let s = sample_sphere::<f64>(1, 10, 1);
        assert_eq!(s.count, 2);
        assert_eq!(s.covering_radius_estimate, 2.0);
    }

    #[test]
    fn kd_tree_matches_brute_force() {
        let s = sample_sphere::<f64>(4, 700, 5);
        let nn = nearest_neighbor_distances(&s.points);
        for (i, p) in s.points.iter().enumerate() {
            let brute = s
                .points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| crate::linalg::distance(p, q))
                .fold(f64::INFINITY, f64::min);
            assert!((brute - nn[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn halton_is_in_unit_cube() {
        let h = halton(3, 50);
        assert_eq!(h[0], vec![0.5, 1.0 / 3.0, 0.2]);
        assert!(h.iter().flatten().all(|&x| x > 0.0 && x < 1.0));
        let d = low_discrepancy_directions(3, 50);
        assert!(d.iter().all(|(v, _)| (norm(v) - 1.0).abs() < 1e-14));
    }
}
