use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Representations;
use crate::error::{HebbError, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KMeansOptions {
    pub n_clusters: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop once no centroid moves farther than this (Euclidean).
    pub tol: f64,
    /// Independent k-means++ starts; the lowest final SSE wins (earliest
    /// start on ties).
    #[serde(default = "default_n_init")]
    pub n_init: usize,
}

fn default_n_init() -> usize {
    10
}

impl KMeansOptions {
    pub fn new(n_clusters: usize, seed: u64) -> Self {
        KMeansOptions {
            n_clusters,
            seed,
            max_iters: 300,
            tol: 1e-4,
            n_init: default_n_init(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeans {
    pub assignments: Vec<usize>,
    /// `n_clusters x dim`, row-major.
    pub centroids: Vec<f64>,
    pub dim: usize,
    /// Within-cluster sum of squares after each assignment step.
    pub sse_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeans {
    pub fn sse(&self) -> f64 {
        *self.sse_history.last().unwrap_or(&0.0)
    }

    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }
}

fn sq_norm(c: &[f64]) -> f64 {
    c.iter().map(|v| v * v).sum()
}

/// `||x_i - c||^2`, clamped at zero against cancellation.
fn dist(points: &Representations, i: usize, c: &[f64], c_sq: f64) -> f64 {
    (points.sq_norm(i) - 2.0 * points.dot_dense(i, c) + c_sq).max(0.0)
}

/// Nearest centroid per point (lowest centroid index on ties) and its
/// squared distance.
fn nearest(points: &Representations, centroids: &[f64], dim: usize) -> Vec<(usize, f64)> {
    let k = centroids.len() / dim;
    let norms: Vec<f64> = centroids.chunks_exact(dim).map(sq_norm).collect();
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut best = (0usize, f64::INFINITY);
            for c in 0..k {
                let d = dist(points, i, &centroids[c * dim..(c + 1) * dim], norms[c]);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .collect()
}

/// Assigns each point to its nearest centroid (`n_clusters x dim`, row-major).
pub fn assign_to_centroids(points: &Representations, centroids: &[f64]) -> Vec<usize> {
    nearest(points, centroids, points.dim())
        .into_iter()
        .map(|(c, _)| c)
        .collect()
}

fn kmeans_plus_plus(points: &Representations, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.len();
    let dim = points.dim();
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.gen_range(0..n);
    centroids.extend(points.dense_row(first).iter().map(|v| *v as f64));
    let mut d2: Vec<f64> = {
        let c = &centroids[..dim];
        let cn = sq_norm(c);
        (0..n).map(|i| dist(points, i, c, cn)).collect()
    };
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if target < *d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let start = centroids.len();
        centroids.extend(points.dense_row(pick).iter().map(|v| *v as f64));
        let c = &centroids[start..];
        let cn = sq_norm(c);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(dist(points, i, c, cn));
        }
    }
    centroids
}

/// Lloyd's algorithm from `n_init` k-means++ starts. Empty clusters are
/// re-seeded at the point currently farthest from its own centroid. Start
/// `i` uses seed `seed + i`.
pub fn kmeans(points: &Representations, opts: &KMeansOptions) -> Result<KMeans> {
    let n = points.len();
    let k = opts.n_clusters;
    if k == 0 || n < k {
        return Err(HebbError::invalid(format!(
            "need 1 <= n_clusters <= points, got {k} clusters for {n} points"
        )));
    }
    let mut best: Option<KMeans> = None;
    for i in 0..opts.n_init.max(1) {
        let run = lloyd(points, opts, opts.seed.wrapping_add(i as u64));
        if best.as_ref().is_none_or(|b| run.sse() < b.sse()) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one start"))
}

fn lloyd(points: &Representations, opts: &KMeansOptions, seed: u64) -> KMeans {
    let n = points.len();
    let k = opts.n_clusters;
    let dim = points.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(points, k, &mut rng);
    let mut sse_history = Vec::new();
    let mut assignments = vec![0usize; n];
    let mut iterations = 0;

    for _ in 0..opts.max_iters.max(1) {
        iterations += 1;
        let near = nearest(points, &centroids, dim);
        let sse: f64 = near.iter().map(|(_, d)| d).sum();
        sse_history.push(sse);
        for (a, (c, _)) in assignments.iter_mut().zip(&near) {
            *a = *c;
        }

        let mut sums = vec![0.0f64; k * dim];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let c = assignments[i];
            counts[c] += 1;
            let (idx, val) = points.row(i);
            for (j, v) in idx.iter().zip(val) {
                sums[c * dim + *j as usize] += *v as f64;
            }
        }
        let mut new_centroids = sums;
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                new_centroids[c * dim..(c + 1) * dim]
                    .iter_mut()
                    .for_each(|v| *v *= inv);
            }
        }
        let empties: Vec<usize> = (0..k).filter(|c| counts[*c] == 0).collect();
        if !empties.is_empty() {
            // Distance of every point to its (updated) centroid.
            let norms: Vec<f64> = new_centroids.chunks_exact(dim).map(sq_norm).collect();
            let mut far: Vec<(usize, f64)> = (0..n)
                .map(|i| {
                    let c = assignments[i];
                    (i, dist(points, i, &new_centroids[c * dim..(c + 1) * dim], norms[c]))
                })
                .collect();
            far.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            for (e, (i, _)) in empties.iter().zip(far) {
                let row = points.dense_row(i);
                for (dst, v) in new_centroids[e * dim..(e + 1) * dim].iter_mut().zip(row) {
                    *dst = v as f64;
                }
            }
        }

        let shift = centroids
            .chunks_exact(dim)
            .zip(new_centroids.chunks_exact(dim))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        centroids = new_centroids;
        if shift < opts.tol && empties.is_empty() {
            // Final assignment against the settled centroids.
            let near = nearest(points, &centroids, dim);
            sse_history.push(near.iter().map(|(_, d)| d).sum());
            for (a, (c, _)) in assignments.iter_mut().zip(&near) {
                *a = *c;
            }
            break;
        }
    }

    KMeans {
        assignments,
        centroids,
        dim,
        sse_history,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reps(points: &[[f32; 2]]) -> Representations {
        Representations::from_rows(points, 2)
    }

    #[test]
    fn separates_two_blobs() {
        let pts = reps(&[[0.0, 0.1], [0.1, 0.0], [0.05, 0.05], [5.0, 5.1], [5.1, 5.0], [4.9, 5.0]]);
        let km = kmeans(&pts, &KMeansOptions::new(2, 3)).unwrap();
        let a = &km.assignments;
        assert!(a[0] == a[1] && a[1] == a[2]);
        assert!(a[3] == a[4] && a[4] == a[5]);
        assert_ne!(a[0], a[3]);
    }

    #[test]
    fn one_cluster_is_the_mean() {
        let pts = reps(&[[1.0, 2.0], [3.0, 0.0], [2.0, 4.0]]);
        let km = kmeans(&pts, &KMeansOptions::new(1, 0)).unwrap();
        assert!((km.centroid(0)[0] - 2.0).abs() < 1e-12);
        assert!((km.centroid(0)[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let pts = reps(&[[1.0, 2.0]]);
        assert!(kmeans(&pts, &KMeansOptions::new(2, 0)).is_err());
        assert!(kmeans(&pts, &KMeansOptions::new(0, 0)).is_err());
    }

    #[test]
    fn duplicate_points_with_more_clusters_than_distinct_values() {
        let pts = reps(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [2.0, 2.0]]);
        let km = kmeans(&pts, &KMeansOptions::new(3, 5)).unwrap();
        assert_eq!(km.assignments.len(), 4);
        assert!(km.sse() < 1e-12);
    }

    #[test]
    fn deterministic_given_seed() {
        let pts: Vec<[f32; 2]> = (0..40)
            .map(|i| [((i * 7) % 13) as f32, ((i * 5) % 11) as f32])
            .collect();
        let r = reps(&pts);
        let a = kmeans(&r, &KMeansOptions::new(4, 9)).unwrap();
        let b = kmeans(&r, &KMeansOptions::new(4, 9)).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.sse_history, b.sse_history);
    }
}
