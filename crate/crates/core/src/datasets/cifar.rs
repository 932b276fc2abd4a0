use std::fs;
use std::path::Path;

use super::{ImageShape, LabeledDataset};
use crate::error::{HebbError, Result};

const RECORD: usize = 1 + 3 * 32 * 32;

pub const CIFAR10_CLASSES: [&str; 10] = [
    "airplane",
    "automobile",
    "bird",
    "cat",
    "deer",
    "dog",
    "frog",
    "horse",
    "ship",
    "truck",
];

/// Parses one binary batch: records of 1 label byte followed by 3072 pixel
/// bytes (R plane, G plane, B plane). Returns `(labels, features)`.
pub fn parse_cifar10_batch(bytes: &[u8], name: &str) -> Result<(Vec<u32>, Vec<f32>)> {
    if bytes.is_empty() || bytes.len() % RECORD != 0 {
        return Err(HebbError::format(
            name,
            (bytes.len() - bytes.len() % RECORD) as u64,
            format!("size {} is not a positive multiple of {RECORD}", bytes.len()),
        ));
    }
    let n = bytes.len() / RECORD;
    let mut labels = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n * (RECORD - 1));
    for (i, rec) in bytes.chunks_exact(RECORD).enumerate() {
        if rec[0] > 9 {
            return Err(HebbError::format(
                name,
                (i * RECORD) as u64,
                format!("label {} out of range", rec[0]),
            ));
        }
        labels.push(rec[0] as u32);
        features.extend(rec[1..].iter().map(|p| *p as f32 / 255.0));
    }
    Ok((labels, features))
}

fn load_batches(dir: &Path, names: &[&str]) -> Result<LabeledDataset> {
    let mut labels = Vec::new();
    let mut features = Vec::new();
    for name in names {
        let bytes = fs::read(dir.join(name))?;
        let (l, f) = parse_cifar10_batch(&bytes, name)?;
        labels.extend(l);
        features.extend(f);
    }
    Ok(LabeledDataset::new(features, labels, ImageShape::CIFAR10, 10)?
        .with_class_names(CIFAR10_CLASSES.iter().map(|s| s.to_string()).collect()))
}

/// Loads `data_batch_{1..5}.bin` and `test_batch.bin` from `batch_dir`.
pub fn load_cifar10<P: AsRef<Path>>(batch_dir: P) -> Result<(LabeledDataset, LabeledDataset)> {
    let dir = batch_dir.as_ref();
    let train = load_batches(
        dir,
        &[
            "data_batch_1.bin",
            "data_batch_2.bin",
            "data_batch_3.bin",
            "data_batch_4.bin",
            "data_batch_5.bin",
        ],
    )?;
    let test = load_batches(dir, &["test_batch.bin"])?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_white_record() {
        let mut rec = vec![255u8; RECORD];
        rec[0] = 3;
        let (l, f) = parse_cifar10_batch(&rec, "fixture").unwrap();
        assert_eq!(l, vec![3]);
        assert_eq!(f.len(), 3072);
        assert!(f.iter().all(|v| *v == 1.0));
    }

    #[test]
    fn two_record_fixture() {
        let mut bytes = Vec::new();
        for (label, base) in [(1u8, 0usize), (9, 7)] {
            bytes.push(label);
            bytes.extend((0..3072).map(|i| ((i + base) % 256) as u8));
        }
        let (l, f) = parse_cifar10_batch(&bytes, "fixture").unwrap();
        assert_eq!(l, vec![1, 9]);
        for i in 0..3072 {
            assert_eq!(f[i], (i % 256) as f32 / 255.0);
            assert_eq!(f[3072 + i], ((i + 7) % 256) as f32 / 255.0);
        }
    }

    #[test]
    fn wrong_sizes_and_labels() {
        assert!(parse_cifar10_batch(&[0u8; RECORD + 1], "x").is_err());
        assert!(parse_cifar10_batch(&[], "x").is_err());
        let mut rec = vec![0u8; RECORD];
        rec[0] = 10;
        assert!(parse_cifar10_batch(&rec, "x").is_err());
    }
}
