use rayon::prelude::*;

use crate::datasets::LabeledDataset;
use crate::error::{HebbError, Result};
use crate::network::{top_k_indices, Network};

/// Row-compressed `N x dim` matrix. k-winners codes are mostly zeros, so
/// every metric works on the stored nonzeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Representations {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f32>,
    sq_norms: Vec<f64>,
}

impl Representations {
    pub fn empty(dim: usize) -> Self {
        Representations {
            dim,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
            sq_norms: Vec::new(),
        }
    }

    /// Appends a dense row, keeping only nonzero entries.
    pub fn push_dense(&mut self, row: &[f32]) {
        assert_eq!(row.len(), self.dim, "row length");
        let mut sq = 0.0f64;
        for (i, v) in row.iter().enumerate() {
            if *v != 0.0 {
                self.indices.push(i as u32);
                self.values.push(*v);
                sq += (*v as f64) * (*v as f64);
            }
        }
        self.indptr.push(self.indices.len());
        self.sq_norms.push(sq);
    }

    pub fn from_dense(data: &[f32], dim: usize) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(HebbError::invalid(format!(
                "{} values do not form rows of length {dim}",
                data.len()
            )));
        }
        let mut r = Self::empty(dim);
        for row in data.chunks_exact(dim) {
            r.push_dense(row);
        }
        Ok(r)
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R], dim: usize) -> Self {
        let mut r = Self::empty(dim);
        for row in rows {
            r.push_dense(row.as_ref());
        }
        r
    }

    pub fn len(&self) -> usize {
        self.sq_norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sq_norms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(indices, values)` of the nonzeros of row `i`.
    pub fn row(&self, i: usize) -> (&[u32], &[f32]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn sq_norm(&self, i: usize) -> f64 {
        self.sq_norms[i]
    }

    pub fn dense_row(&self, i: usize) -> Vec<f32> {
        let mut out = vec![0.0; self.dim];
        let (idx, val) = self.row(i);
        for (j, v) in idx.iter().zip(val) {
            out[*j as usize] = *v;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<f32> {
        let mut out = vec![0.0; self.len() * self.dim];
        for i in 0..self.len() {
            let (idx, val) = self.row(i);
            for (j, v) in idx.iter().zip(val) {
                out[i * self.dim + *j as usize] = *v;
            }
        }
        out
    }

    /// `x_i . c` for a dense vector `c`, accumulated in f64.
    pub fn dot_dense(&self, i: usize, c: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(j, v)| *v as f64 * c[*j as usize]).sum()
    }
}

/// Encodes every sample with `k` winners; labels are not read.
pub fn represent_dataset(net: &Network, data: &LabeledDataset, k: usize) -> Result<Representations> {
    if data.dim() != net.input_dim() {
        return Err(HebbError::invalid(format!(
            "dataset dimension {} does not match network input {}",
            data.dim(),
            net.input_dim()
        )));
    }
    let r = net.n_neurons();
    if k == 0 || k > r {
        return Err(HebbError::invalid(format!("k = {k} outside 1..={r}")));
    }
    let rows: Vec<(Vec<u32>, Vec<f32>)> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let a = net.activations(data.sample(i)).expect("dimension checked");
            let keep: Vec<usize> = if k == r {
                (0..r).collect()
            } else {
                top_k_indices(&a, k).expect("k checked")
            };
            let mut idx = Vec::with_capacity(keep.len());
            let mut val = Vec::with_capacity(keep.len());
            for j in keep {
                if a[j] != 0.0 {
                    idx.push(j as u32);
                    val.push(a[j]);
                }
            }
            (idx, val)
        })
        .collect();
    let mut out = Representations::empty(r);
    for (idx, val) in rows {
        let sq = val.iter().map(|v| (*v as f64) * (*v as f64)).sum();
        out.indices.extend(idx);
        out.values.extend(val);
        out.indptr.push(out.indices.len());
        out.sq_norms.push(sq);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::ImageShape;

    #[test]
    fn dense_round_trip() {
        let d = vec![0.0, 1.0, 0.0, 2.0, 0.0, 0.0];
        let r = Representations::from_dense(&d, 3).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.nnz(), 2);
        assert_eq!(r.to_dense(), d);
        assert_eq!(r.sq_norm(1), 4.0);
        assert_eq!(r.row_nnz(1), 1);
    }

    #[test]
    fn represent_matches_encode() {
        let net = Network::new(4, 6, 1.0, 11).unwrap();
        let feats: Vec<f32> = (0..12).map(|i| (i % 5) as f32 / 4.0).collect();
        let ds = LabeledDataset::new(feats, vec![0, 1, 0], ImageShape::new(1, 2, 2), 2).unwrap();
        let reps = represent_dataset(&net, &ds, 2).unwrap();
        for i in 0..3 {
            assert_eq!(reps.dense_row(i), net.encode(ds.sample(i), 2).unwrap());
            assert!(reps.row_nnz(i) <= 2);
        }
        let full = represent_dataset(&net, &ds, 6).unwrap();
        assert_eq!(full.dense_row(1), net.activations(ds.sample(1)).unwrap());

        let empty = ds.subset(&[]);
        assert!(represent_dataset(&net, &empty, 2).unwrap().is_empty());
    }
}
