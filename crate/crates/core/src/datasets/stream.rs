use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LabeledDataset;
use crate::error::{HebbError, Result};

/// A class-incremental presentation order over a dataset: every sample of
/// the first class, then every sample of the second, and so on. Order within
/// a class is shuffled by the seed.
#[derive(Debug, Clone)]
pub struct StreamSpec<'a> {
    dataset: &'a LabeledDataset,
    class_order: Vec<u32>,
    order: Vec<usize>,
    batch_size: usize,
    seed: u64,
}

/// Minibatch with labels, for supervised consumers and the harness.
#[derive(Debug, Clone)]
pub struct LabeledBatch<'a> {
    pub samples: Vec<&'a [f32]>,
    pub labels: Vec<u32>,
}

impl<'a> StreamSpec<'a> {
    /// `class_order` must list present classes, each at most once. Classes
    /// left out are not streamed.
    pub fn new(
        dataset: &'a LabeledDataset,
        class_order: &[u32],
        batch_size: usize,
        seed: u64,
    ) -> Result<Self> {
        if batch_size == 0 {
            return Err(HebbError::invalid("batch_size must be positive"));
        }
        let present = dataset.present_classes();
        let mut seen = Vec::new();
        for c in class_order {
            if !present.contains(c) {
                return Err(HebbError::invalid(format!("class {c} is not present in the dataset")));
            }
            if seen.contains(c) {
                return Err(HebbError::invalid(format!("class {c} listed twice")));
            }
            seen.push(*c);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order = Vec::with_capacity(dataset.len());
        for c in class_order {
            let mut idx = dataset.indices_of(*c);
            idx.shuffle(&mut rng);
            order.extend(idx);
        }
        Ok(StreamSpec {
            dataset,
            class_order: class_order.to_vec(),
            order,
            batch_size,
            seed,
        })
    }

    /// Natural class order `0, 1, 2, ...` over every present class.
    pub fn natural(dataset: &'a LabeledDataset, batch_size: usize, seed: u64) -> Result<Self> {
        let order = dataset.present_classes();
        Self::new(dataset, &order, batch_size, seed)
    }

    pub fn dataset(&self) -> &'a LabeledDataset {
        self.dataset
    }

    pub fn class_order(&self) -> &[u32] {
        &self.class_order
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Dataset row indices in presentation order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Feature-only minibatches; the last partial batch is kept. Batches
    /// never straddle a class boundary.
    pub fn unlabeled(&self) -> impl Iterator<Item = Vec<&'a [f32]>> + '_ {
        self.index_batches()
            .map(move |b| b.iter().map(|i| self.dataset.sample(*i)).collect())
    }

    pub fn labeled(&self) -> impl Iterator<Item = LabeledBatch<'a>> + '_ {
        self.index_batches().map(move |b| LabeledBatch {
            samples: b.iter().map(|i| self.dataset.sample(*i)).collect(),
            labels: b.iter().map(|i| self.dataset.labels()[*i]).collect(),
        })
    }

    fn index_batches(&self) -> impl Iterator<Item = &[usize]> + '_ {
        let labels = self.dataset.labels();
        let mut start = 0;
        std::iter::from_fn(move || {
            if start >= self.order.len() {
                return None;
            }
            let class = labels[self.order[start]];
            let mut end = start;
            while end < self.order.len()
                && end - start < self.batch_size
                && labels[self.order[end]] == class
            {
                end += 1;
            }
            let b = &self.order[start..end];
            start = end;
            Some(b)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::ImageShape;

    fn toy() -> LabeledDataset {
        // Samples 0..6 with value i/10; classes interleaved.
        let feats: Vec<f32> = (0..6).map(|i| i as f32 / 10.0).collect();
        LabeledDataset::new(feats, vec![1, 0, 1, 0, 0, 1], ImageShape::new(1, 1, 1), 2).unwrap()
    }

    #[test]
    fn batches_follow_class_order() {
        let ds = toy();
        let s = StreamSpec::new(&ds, &[0, 1], 2, 0).unwrap();
        let labels: Vec<Vec<u32>> = s.labeled().map(|b| b.labels).collect();
        assert_eq!(labels, vec![vec![0, 0], vec![0], vec![1, 1], vec![1]]);
        let sizes: Vec<usize> = s.unlabeled().map(|b| b.len()).collect();
        assert_eq!(sizes, vec![2, 1, 2, 1]);
    }

    #[test]
    fn emits_each_sample_once_and_is_deterministic() {
        let ds = toy();
        let a = StreamSpec::new(&ds, &[1, 0], 4, 9).unwrap();
        let b = StreamSpec::new(&ds, &[1, 0], 4, 9).unwrap();
        assert_eq!(a.order(), b.order());
        let mut o = a.order().to_vec();
        o.sort_unstable();
        assert_eq!(o, (0..6).collect::<Vec<_>>());
        let flat: Vec<f32> = a.unlabeled().flatten().map(|x| x[0]).collect();
        assert_eq!(flat.len(), 6);
    }

    #[test]
    fn rejects_unknown_classes() {
        let ds = toy();
        assert!(StreamSpec::new(&ds, &[0, 2], 2, 0).is_err());
        assert!(StreamSpec::new(&ds, &[0, 0], 2, 0).is_err());
        assert!(StreamSpec::new(&ds, &[0], 0, 0).is_err());
    }
}
