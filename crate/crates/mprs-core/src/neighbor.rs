//! Nearest-neighbor search over sample sites, per-prediction-point bandwidth
//! estimation and coupling precomputation.
//!
//! Searches are exact. Distance ties are broken by the lower sample index, so
//! results are reproducible across platforms and sample orderings. For up to
//! three dimensions a static kd-tree is used; higher dimensions fall back to
//! a linear scan.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::point::{dist_sq, PointSet};

/// Bandwidths use this many nearest samples regardless of `n_b`.
const BANDWIDTH_NEIGHBORS: usize = 4;

/// Relative floor applied to zero bandwidths (times the domain diagonal).
const BANDWIDTH_FLOOR_REL: f64 = 1e-12;

/// Precomputed interaction structure: for each prediction point, its `n_b`
/// nearest sample indices, distances, bandwidth and couplings.
///
/// Couplings exist only between prediction points and samples; interactions
/// among prediction points are omitted, which decouples the Metropolis
/// updates of distinct points.
#[derive(Debug, Clone)]
pub struct NeighborGraph {
    n_b: usize,
    neighbor_idx: Vec<usize>,
    neighbor_dist: Vec<f64>,
    bandwidth: Vec<f64>,
    coupling: Vec<f64>,
}

impl NeighborGraph {
    /// Assemble a graph from raw rows, validating the structural invariants.
    /// Intended for tests and tools; [`build_graph`] is the normal path.
    pub fn from_parts(
        n_b: usize,
        neighbor_idx: Vec<usize>,
        neighbor_dist: Vec<f64>,
        bandwidth: Vec<f64>,
        coupling: Vec<f64>,
    ) -> Result<Self> {
        if n_b == 0 {
            return Err(Error::InvalidParameter("n_b must be >= 1".into()));
        }
        let p = bandwidth.len();
        if neighbor_idx.len() != p * n_b
            || neighbor_dist.len() != p * n_b
            || coupling.len() != p * n_b
        {
            return Err(Error::DimensionMismatch(
                "graph row buffers must all be P x n_b".into(),
            ));
        }
        for row in neighbor_dist.chunks(n_b) {
            if row.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidParameter(
                    "neighbor distances must be sorted ascending".into(),
                ));
            }
        }
        if bandwidth.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::InvalidParameter("bandwidths must be positive".into()));
        }
        Ok(NeighborGraph {
            n_b,
            neighbor_idx,
            neighbor_dist,
            bandwidth,
            coupling,
        })
    }

    /// Number of prediction points.
    pub fn len(&self) -> usize {
        self.bandwidth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bandwidth.is_empty()
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    #[inline]
    pub fn neighbors(&self, p: usize) -> &[usize] {
        &self.neighbor_idx[p * self.n_b..(p + 1) * self.n_b]
    }

    #[inline]
    pub fn distances(&self, p: usize) -> &[f64] {
        &self.neighbor_dist[p * self.n_b..(p + 1) * self.n_b]
    }

    #[inline]
    pub fn couplings(&self, p: usize) -> &[f64] {
        &self.coupling[p * self.n_b..(p + 1) * self.n_b]
    }

    pub fn bandwidth(&self, p: usize) -> f64 {
        self.bandwidth[p]
    }

    /// True when prediction point `p` coincides with its nearest sample.
    pub fn coincides_with_sample(&self, p: usize) -> bool {
        self.distances(p)[0] == 0.0
    }
}

/// Candidate ordering: by distance, ties by lower sample index. This is a
/// total order because all distances are finite.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    idx: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2
            .partial_cmp(&other.d2)
            .unwrap()
            .then(self.idx.cmp(&other.idx))
    }
}

/// Static kd-tree over a sample set. Axes cycle with depth; each range stores
/// its median (under the total order coordinate-then-index) at the midpoint.
struct KdTree<'a> {
    points: &'a PointSet,
    order: Vec<u32>,
}

impl<'a> KdTree<'a> {
    fn build(points: &'a PointSet) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let dim = points.dim();
        let mut stack = vec![(0usize, points.len(), 0usize)];
        while let Some((lo, hi, depth)) = stack.pop() {
            if hi - lo <= 1 {
                continue;
            }
            let axis = depth % dim;
            let mid = lo + (hi - lo) / 2;
            order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
                let ca = points.coord(a as usize)[axis];
                let cb = points.coord(b as usize)[axis];
                ca.partial_cmp(&cb).unwrap().then(a.cmp(&b))
            });
            stack.push((lo, mid, depth + 1));
            stack.push((mid + 1, hi, depth + 1));
        }
        KdTree { points, order }
    }

    fn knn(&self, query: &[f64], k: usize, best: &mut Vec<Candidate>) {
        best.clear();
        self.search(query, k, 0, self.points.len(), 0, best);
        best.sort_unstable();
    }

    fn search(
        &self,
        query: &[f64],
        k: usize,
        lo: usize,
        hi: usize,
        depth: usize,
        best: &mut Vec<Candidate>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.order[mid] as usize;
        let cand = Candidate {
            d2: dist_sq(query, self.points.coord(idx)),
            idx,
        };
        offer(best, k, cand);

        if hi - lo == 1 {
            return;
        }
        let axis = depth % self.points.dim();
        let delta = query[axis] - self.points.coord(idx)[axis];
        let (near_lo, near_hi, far_lo, far_hi) = if delta < 0.0 {
            (lo, mid, mid + 1, hi)
        } else {
            (mid + 1, hi, lo, mid)
        };
        self.search(query, k, near_lo, near_hi, depth + 1, best);
        // Explore the far side whenever a point there could still displace
        // the current worst, including exact ties (lower index wins).
        if best.len() < k || delta * delta <= worst(best).d2 {
            self.search(query, k, far_lo, far_hi, depth + 1, best);
        }
    }
}

/// Keep the k best candidates in `best` (unordered, worst tracked by scan).
/// k is small (typically 8), so linear bookkeeping beats a heap.
#[inline]
fn offer(best: &mut Vec<Candidate>, k: usize, cand: Candidate) {
    if best.len() < k {
        best.push(cand);
    } else {
        let (w, _) = worst_pos(best);
        if cand < best[w] {
            best[w] = cand;
        }
    }
}

#[inline]
fn worst_pos(best: &[Candidate]) -> (usize, Candidate) {
    let mut w = 0;
    for i in 1..best.len() {
        if best[i] > best[w] {
            w = i;
        }
    }
    (w, best[w])
}

#[inline]
fn worst(best: &[Candidate]) -> Candidate {
    worst_pos(best).1
}

fn knn_scan(samples: &PointSet, query: &[f64], k: usize, best: &mut Vec<Candidate>) {
    best.clear();
    for idx in 0..samples.len() {
        offer(
            best,
            k,
            Candidate {
                d2: dist_sq(query, samples.coord(idx)),
                idx,
            },
        );
    }
    best.sort_unstable();
}

/// Exact k-nearest-neighbor search from every query to the samples.
///
/// Returns flat `P x k` index and distance matrices with each row sorted by
/// ascending distance (ties by lower sample index).
pub fn knn(samples: &PointSet, queries: &PointSet, k: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if samples.dim() != queries.dim() {
        return Err(Error::DimensionMismatch(format!(
            "samples are {}-d but queries are {}-d",
            samples.dim(),
            queries.dim()
        )));
    }
    if samples.len() < k {
        return Err(Error::InsufficientSamples {
            needed: k,
            got: samples.len(),
        });
    }

    let p = queries.len();
    let mut idx_out = vec![0usize; p * k];
    let mut dist_out = vec![0f64; p * k];
    let tree = (samples.dim() <= 3 && samples.len() > 32).then(|| KdTree::build(samples));

    idx_out
        .par_chunks_mut(k)
        .zip(dist_out.par_chunks_mut(k))
        .enumerate()
        .for_each(|(q, (idx_row, dist_row))| {
            let mut best = Vec::with_capacity(k);
            match &tree {
                Some(t) => t.knn(queries.coord(q), k, &mut best),
                None => knn_scan(samples, queries.coord(q), k, &mut best),
            }
            for (j, c) in best.iter().enumerate() {
                idx_row[j] = c.idx;
                dist_row[j] = c.d2.sqrt();
            }
        });

    Ok((idx_out, dist_out))
}

/// Per-query decay lengths: the median distance to the four nearest samples
/// (the mean of the second and third order statistics).
///
/// A query stacked on three or more samples would get a zero bandwidth;
/// those are floored at `1e-12` times the domain diagonal so couplings stay
/// defined (and become an indicator of exact coincidence).
pub fn estimate_bandwidths(samples: &PointSet, queries: &PointSet) -> Result<Vec<f64>> {
    let (_, dist) = knn(samples, queries, BANDWIDTH_NEIGHBORS)?;
    Ok(bandwidths_from_ranked(&dist, samples, queries))
}

fn bandwidths_from_ranked(dist: &[f64], samples: &PointSet, queries: &PointSet) -> Vec<f64> {
    if queries.is_empty() {
        return Vec::new();
    }
    let k = dist.len() / queries.len();
    let floor = {
        let diag = samples.bounding_diagonal().max(queries.bounding_diagonal());
        if diag > 0.0 {
            BANDWIDTH_FLOOR_REL * diag
        } else {
            BANDWIDTH_FLOOR_REL
        }
    };
    dist.chunks(k)
        .map(|row| {
            let b = 0.5 * (row[1] + row[2]);
            if b > 0.0 {
                b
            } else {
                floor
            }
        })
        .collect()
}

/// Compose neighbor search, bandwidth estimation and the exponential coupling
/// `j0 * exp(-r / b_p)` into a [`NeighborGraph`].
pub fn build_graph(
    samples: &PointSet,
    queries: &PointSet,
    params: &ModelParams,
) -> Result<NeighborGraph> {
    params.validate()?;
    let k = params.n_b.max(BANDWIDTH_NEIGHBORS);
    let (idx, dist) = knn(samples, queries, k)?;

    let p = queries.len();
    let n_b = params.n_b;
    let bandwidth = bandwidths_from_ranked(
        &dist
            .chunks(k)
            .flat_map(|row| row[..BANDWIDTH_NEIGHBORS].iter().copied())
            .collect::<Vec<_>>(),
        samples,
        queries,
    );

    let mut neighbor_idx = Vec::with_capacity(p * n_b);
    let mut neighbor_dist = Vec::with_capacity(p * n_b);
    let mut coupling = Vec::with_capacity(p * n_b);
    for q in 0..p {
        let row_idx = &idx[q * k..q * k + n_b];
        let row_dist = &dist[q * k..q * k + n_b];
        neighbor_idx.extend_from_slice(row_idx);
        neighbor_dist.extend_from_slice(row_dist);
        coupling.extend(row_dist.iter().map(|&r| params.j0 * (-r / bandwidth[q]).exp()));
    }

    NeighborGraph::from_parts(n_b, neighbor_idx, neighbor_dist, bandwidth, coupling)
}
