use std::collections::BTreeMap;

use rayon::prelude::*;

use super::Representations;
use crate::error::{HebbError, Result};
use crate::kernels;

/// Most frequent true label of each cluster id (smaller label on ties).
pub fn modal_labels(assignments: &[usize], labels: &[u32]) -> Result<BTreeMap<usize, u32>> {
    if assignments.len() != labels.len() {
        return Err(HebbError::invalid(format!(
            "{} assignments for {} labels",
            assignments.len(),
            labels.len()
        )));
    }
    let mut counts: BTreeMap<usize, BTreeMap<u32, usize>> = BTreeMap::new();
    for (a, l) in assignments.iter().zip(labels) {
        *counts.entry(*a).or_default().entry(*l).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(cluster, hist)| {
            let mut best = (0u32, 0usize);
            for (label, n) in hist {
                if n > best.1 {
                    best = (label, n);
                }
            }
            (cluster, best.0)
        })
        .collect())
}

/// Percentage of points whose cluster's modal label equals their own.
pub fn cluster_accuracy(assignments: &[usize], labels: &[u32]) -> Result<f64> {
    let modal = modal_labels(assignments, labels)?;
    if labels.is_empty() {
        return Ok(0.0);
    }
    let correct = assignments
        .iter()
        .zip(labels)
        .filter(|(a, l)| modal[a] == **l)
        .count();
    Ok(100.0 * correct as f64 / labels.len() as f64)
}

/// Nearest-neighbour search over a training set: an inverted index when the
/// representations are sparse, plain dense dot products otherwise.
enum NeighbourIndex<'a> {
    Sparse {
        train: &'a Representations,
        /// Per dimension: `(train row, value)` pairs.
        postings: Vec<Vec<(u32, f32)>>,
    },
    Dense {
        train: &'a Representations,
        rows: Vec<f32>,
    },
}

impl<'a> NeighbourIndex<'a> {
    fn new(train: &'a Representations) -> Self {
        let density = train.nnz() as f64 / (train.len() * train.dim()).max(1) as f64;
        if density > 0.25 {
            return NeighbourIndex::Dense {
                train,
                rows: train.to_dense(),
            };
        }
        let mut postings = vec![Vec::new(); train.dim()];
        for i in 0..train.len() {
            let (idx, val) = train.row(i);
            for (j, v) in idx.iter().zip(val) {
                postings[*j as usize].push((i as u32, *v));
            }
        }
        NeighbourIndex::Sparse { train, postings }
    }

    /// Squared distances from `query` row `q` to every training row.
    fn distances(&self, query: &Representations, q: usize, dots: &mut Vec<f64>) -> Vec<f64> {
        let train = match self {
            NeighbourIndex::Sparse { train, .. } | NeighbourIndex::Dense { train, .. } => *train,
        };
        dots.clear();
        dots.resize(train.len(), 0.0);
        match self {
            NeighbourIndex::Sparse { postings, .. } => {
                let (idx, val) = query.row(q);
                for (j, v) in idx.iter().zip(val) {
                    let v = *v as f64;
                    for (t, w) in &postings[*j as usize] {
                        dots[*t as usize] += v * *w as f64;
                    }
                }
            }
            NeighbourIndex::Dense { rows, .. } => {
                let qd = query.dense_row(q);
                for (d, row) in dots.iter_mut().zip(rows.chunks_exact(train.dim())) {
                    *d = kernels::dot(&qd, row) as f64;
                }
            }
        }
        let qn = query.sq_norm(q);
        dots.iter()
            .enumerate()
            .map(|(t, d)| (qn + train.sq_norm(t) - 2.0 * d).max(0.0))
            .collect()
    }
}

/// `k` smallest distances, ordered by (distance, index).
fn k_nearest(dist: &[f64], k: usize) -> Vec<usize> {
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (i, d) in dist.iter().enumerate() {
        if best.len() == k {
            let worst = best[k - 1];
            if *d > worst.0 || (*d == worst.0 && i > worst.1) {
                continue;
            }
        }
        let pos = best.partition_point(|(bd, bi)| *bd < *d || (*bd == *d && *bi < i));
        best.insert(pos, (*d, i));
        best.truncate(k);
    }
    best.into_iter().map(|(_, i)| i).collect()
}

fn vote(neighbours: &[usize], labels: &[u32]) -> u32 {
    let mut hist: BTreeMap<u32, usize> = BTreeMap::new();
    for n in neighbours {
        *hist.entry(labels[*n]).or_default() += 1;
    }
    let mut best = (0u32, 0usize);
    for (label, c) in hist {
        if c > best.1 {
            best = (label, c);
        }
    }
    best.0
}

/// Majority label of the `k` nearest training rows for every test row.
/// Distance ties go to the lower training index, vote ties to the smaller
/// label.
pub fn knn_predict(
    train: &Representations,
    train_labels: &[u32],
    test: &Representations,
    k: usize,
) -> Result<Vec<u32>> {
    if train.is_empty() {
        return Err(HebbError::invalid("k-NN needs a non-empty training set"));
    }
    if train.len() != train_labels.len() {
        return Err(HebbError::invalid("train representations and labels differ in length"));
    }
    if k == 0 || k > train.len() {
        return Err(HebbError::invalid(format!(
            "k = {k} outside 1..={}",
            train.len()
        )));
    }
    if train.dim() != test.dim() {
        return Err(HebbError::invalid(format!(
            "train dimension {} differs from test dimension {}",
            train.dim(),
            test.dim()
        )));
    }
    let index = NeighbourIndex::new(train);
    Ok((0..test.len())
        .into_par_iter()
        .map_init(Vec::new, |dots, q| {
            let d = index.distances(test, q, dots);
            vote(&k_nearest(&d, k), train_labels)
        })
        .collect())
}

/// Percentage of test rows misclassified by k-NN.
pub fn knn_error(
    train: &Representations,
    train_labels: &[u32],
    test: &Representations,
    test_labels: &[u32],
    k: usize,
) -> Result<f64> {
    if test.len() != test_labels.len() {
        return Err(HebbError::invalid("test representations and labels differ in length"));
    }
    let pred = knn_predict(train, train_labels, test, k)?;
    if pred.is_empty() {
        return Ok(0.0);
    }
    let wrong = pred.iter().zip(test_labels).filter(|(p, l)| p != l).count();
    Ok(100.0 * wrong as f64 / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_accuracy_examples() {
        assert_eq!(cluster_accuracy(&[0, 1, 2, 1], &[0, 1, 2, 1]).unwrap(), 100.0);
        let labels: Vec<u32> = (0..10).map(|i| if i < 6 { 3 } else { 5 }).collect();
        assert_eq!(cluster_accuracy(&[0; 10], &labels).unwrap(), 60.0);
        assert!(cluster_accuracy(&[0, 1], &[0]).is_err());
        // 2/2 tie inside one cluster goes to the smaller label.
        let m = modal_labels(&[4, 4, 4, 4], &[7, 2, 7, 2]).unwrap();
        assert_eq!(m[&4], 2);
    }

    #[test]
    fn knn_examples() {
        let train = Representations::from_rows(&[[0.0, 0.0], [1.0, 1.0], [5.0, 5.0]], 2);
        let test = Representations::from_rows(&[[1.0, 1.0]], 2);
        assert_eq!(knn_predict(&train, &[0, 1, 2], &test, 1).unwrap(), vec![1]);

        let test = Representations::from_rows(&[[0.0, 1.0], [3.0, 3.0], [9.0, 9.0]], 2);
        let err = knn_error(&train, &[4, 4, 4], &test, &[4, 1, 2], 2).unwrap();
        assert!((err - 200.0 / 3.0).abs() < 1e-9);

        assert!(knn_error(&Representations::empty(2), &[], &test, &[0, 0, 0], 1).is_err());
        assert!(knn_predict(&train, &[0, 1, 2], &test, 4).is_err());
    }

    #[test]
    fn knn_distance_ties_prefer_lower_index() {
        // Both training points are at distance 1; lower index wins with k=1.
        let train = Representations::from_rows(&[[1.0, 0.0], [-1.0, 0.0]], 2);
        let test = Representations::from_rows(&[[0.0, 0.0]], 2);
        assert_eq!(knn_predict(&train, &[8, 3], &test, 1).unwrap(), vec![8]);
        // k=2 gives a 1-1 vote; smaller label wins.
        assert_eq!(knn_predict(&train, &[8, 3], &test, 2).unwrap(), vec![3]);
    }

    #[test]
    fn k_nearest_orders_by_distance_then_index() {
        assert_eq!(k_nearest(&[3.0, 1.0, 1.0, 0.5, 2.0], 3), vec![3, 1, 2]);
    }
}
