//! Dataset loaders and class-incremental stream construction.
//!
//! All loaders produce a [`LabeledDataset`] with features scaled to `[0, 1]`.
//! They never download anything; point `HEBBCL_DATA_ROOT` at a directory
//! laid out as
//!
//! ```text
//! <root>/mnist/{train,t10k}-{images-idx3,labels-idx1}-ubyte
//! <root>/cifar-10-batches-bin/{data_batch_1..5,test_batch}.bin
//! <root>/omniglot/{images_background,images_evaluation}/<alphabet>/<character>/*.png
//! ```

mod cifar;
mod mnist;
mod omniglot;
mod stream;

use std::path::PathBuf;

pub use cifar::{load_cifar10, parse_cifar10_batch, CIFAR10_CLASSES};
pub use mnist::{load_mnist, load_mnist_dir, parse_idx_images, parse_idx_labels};
pub use omniglot::{load_omniglot, load_omniglot_with};
pub use stream::{LabeledBatch, StreamSpec};

use crate::error::{HebbError, Result};

pub const DATA_ROOT_ENV: &str = "HEBBCL_DATA_ROOT";

/// `$HEBBCL_DATA_ROOT`, or `./data` when unset.
pub fn data_root() -> PathBuf {
    std::env::var_os(DATA_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ImageShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl ImageShape {
    pub const MNIST: ImageShape = ImageShape::new(1, 28, 28);
    pub const CIFAR10: ImageShape = ImageShape::new(3, 32, 32);
    pub const OMNIGLOT: ImageShape = ImageShape::new(1, 105, 105);

    pub const fn new(channels: usize, height: usize, width: usize) -> Self {
        ImageShape {
            channels,
            height,
            width,
        }
    }

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Row-major `N x D` features with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f32>,
    labels: Vec<u32>,
    shape: ImageShape,
    n_classes: usize,
    class_names: Option<Vec<String>>,
}

impl LabeledDataset {
    /// Checks shape, range and label bounds before accepting the data.
    pub fn new(
        features: Vec<f32>,
        labels: Vec<u32>,
        shape: ImageShape,
        n_classes: usize,
    ) -> Result<Self> {
        let d = shape.len();
        if d == 0 {
            return Err(HebbError::invalid("image shape has zero size"));
        }
        if features.len() != labels.len() * d {
            return Err(HebbError::invalid(format!(
                "{} features for {} labels of dimension {d}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(i) = features.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(HebbError::invalid(format!(
                "feature {} of sample {} is {} (outside [0, 1])",
                i % d,
                i / d,
                features[i]
            )));
        }
        if let Some(i) = labels.iter().position(|l| *l as usize >= n_classes) {
            return Err(HebbError::invalid(format!(
                "label {} of sample {i} is not below n_classes = {n_classes}",
                labels[i]
            )));
        }
        Ok(LabeledDataset {
            features,
            labels,
            shape,
            n_classes,
            class_names: None,
        })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Self {
        self.class_names = Some(names);
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> ImageShape {
        self.shape
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn sample(&self, i: usize) -> &[f32] {
        let d = self.dim();
        &self.features[i * d..(i + 1) * d]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f32]> {
        self.features.chunks_exact(self.dim())
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Classes that actually occur, ascending.
    pub fn present_classes(&self) -> Vec<u32> {
        let mut seen = vec![false; self.n_classes];
        for l in &self.labels {
            seen[*l as usize] = true;
        }
        (0..self.n_classes as u32).filter(|c| seen[*c as usize]).collect()
    }

    /// New dataset from the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let d = self.dim();
        let mut features = Vec::with_capacity(indices.len() * d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        LabeledDataset {
            features,
            labels,
            shape: self.shape,
            n_classes: self.n_classes,
            class_names: self.class_names.clone(),
        }
    }

    /// Rows whose label is in `classes`, in original order.
    pub fn filter_classes(&self, classes: &[u32]) -> LabeledDataset {
        let idx: Vec<usize> = (0..self.len())
            .filter(|i| classes.contains(&self.labels[*i]))
            .collect();
        self.subset(&idx)
    }

    /// Indices of every sample with the given label.
    pub fn indices_of(&self, class: u32) -> Vec<usize> {
        (0..self.len()).filter(|i| self.labels[*i] == class).collect()
    }

    /// Splits off a stratified-by-shuffle validation set of `n_val` rows;
    /// returns `(train, validation)`.
    pub fn split_validation(&self, n_val: usize, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        if n_val >= self.len() {
            return Err(HebbError::invalid(format!(
                "validation size {n_val} must be below dataset size {}",
                self.len()
            )));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let (val, train) = idx.split_at(n_val);
        let mut train = train.to_vec();
        let mut val = val.to_vec();
        train.sort_unstable();
        val.sort_unstable();
        Ok((self.subset(&train), self.subset(&val)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_invariants_are_checked() {
        let shape = ImageShape::new(1, 1, 2);
        assert!(LabeledDataset::new(vec![0.0, 1.0], vec![0], shape, 1).is_ok());
        assert!(LabeledDataset::new(vec![0.0, 1.5], vec![0], shape, 1).is_err());
        assert!(LabeledDataset::new(vec![0.0, 1.0], vec![1], shape, 1).is_err());
        assert!(LabeledDataset::new(vec![0.0], vec![0], shape, 1).is_err());
    }

    #[test]
    fn subsets_and_splits() {
        let shape = ImageShape::new(1, 1, 1);
        let ds = LabeledDataset::new(vec![0.0, 0.1, 0.2, 0.3], vec![0, 1, 0, 2], shape, 3).unwrap();
        assert_eq!(ds.present_classes(), vec![0, 1, 2]);
        let f = ds.filter_classes(&[0]);
        assert_eq!(f.features(), &[0.0, 0.2]);
        let (tr, va) = ds.split_validation(1, 3).unwrap();
        assert_eq!(tr.len() + va.len(), 4);
        assert!(ds.split_validation(4, 3).is_err());
    }
}
