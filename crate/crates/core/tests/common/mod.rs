#![allow(dead_code)]

use std::fs;
use std::path::Path;

use hebbcl::{ImageShape, LabeledDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n_per_class` noisy copies of one random sparse prototype per class,
/// values in `[0, 1]`.
pub fn blobs(n_classes: u32, n_per_class: usize, shape: ImageShape, seed: u64) -> LabeledDataset {
    let d = shape.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let protos: Vec<Vec<f32>> = (0..n_classes)
        .map(|_| (0..d).map(|_| if rng.gen_bool(0.3) { rng.gen_range(0.5..1.0) } else { 0.0 }).collect())
        .collect();
    let mut feats = Vec::new();
    let mut labels = Vec::new();
    for (c, p) in protos.iter().enumerate() {
        for _ in 0..n_per_class {
            feats.extend(p.iter().map(|v| {
                if *v > 0.0 {
                    (v + rng.gen_range(-0.2f32..0.2)).clamp(0.0, 1.0)
                } else if rng.gen_bool(0.03) {
                    rng.gen_range(0.0..0.5)
                } else {
                    0.0
                }
            }));
            labels.push(c as u32);
        }
    }
    LabeledDataset::new(feats, labels, shape, n_classes as usize).unwrap()
}

fn idx_images(ds: &LabeledDataset) -> Vec<u8> {
    let s = ds.shape();
    let mut out = vec![0, 0, 8, 3];
    for v in [ds.len(), s.height, s.width] {
        out.extend((v as u32).to_be_bytes());
    }
    out.extend(ds.features().iter().map(|v| (v * 255.0).round() as u8));
    out
}

fn idx_labels(ds: &LabeledDataset) -> Vec<u8> {
    let mut out = vec![0, 0, 8, 1];
    out.extend((ds.len() as u32).to_be_bytes());
    out.extend(ds.labels().iter().map(|l| *l as u8));
    out
}

/// Writes `train` and `test` as MNIST IDX files under `root/mnist`.
pub fn write_mnist(root: &Path, train: &LabeledDataset, test: &LabeledDataset) {
    let dir = root.join("mnist");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("train-images-idx3-ubyte"), idx_images(train)).unwrap();
    fs::write(dir.join("train-labels-idx1-ubyte"), idx_labels(train)).unwrap();
    fs::write(dir.join("t10k-images-idx3-ubyte"), idx_images(test)).unwrap();
    fs::write(dir.join("t10k-labels-idx1-ubyte"), idx_labels(test)).unwrap();
}

pub fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f32> {
    (0..d).map(|_| rng.gen::<f32>()).collect()
}
