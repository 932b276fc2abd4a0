use std::fs;
use std::path::Path;

use super::{ImageShape, LabeledDataset};
use crate::error::{HebbError, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], offset: usize, ctx: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| HebbError::format(ctx, offset as u64, "truncated header"))
}

/// Parses an IDX3 image file. Returns `(count, rows, cols, pixels)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, usize, &[u8])> {
    let ctx = "IDX images";
    let magic = be_u32(bytes, 0, ctx)?;
    if magic != IMAGES_MAGIC {
        return Err(HebbError::format(ctx, 0, format!("magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}")));
    }
    let n = be_u32(bytes, 4, ctx)? as usize;
    let rows = be_u32(bytes, 8, ctx)? as usize;
    let cols = be_u32(bytes, 12, ctx)? as usize;
    let need = n * rows * cols;
    let payload = &bytes[16..];
    if payload.len() != need {
        return Err(HebbError::format(
            ctx,
            16 + payload.len().min(need) as u64,
            format!("payload has {} bytes, header implies {need}", payload.len()),
        ));
    }
    Ok((n, rows, cols, payload))
}

/// Parses an IDX1 label file.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<&[u8]> {
    let ctx = "IDX labels";
    let magic = be_u32(bytes, 0, ctx)?;
    if magic != LABELS_MAGIC {
        return Err(HebbError::format(ctx, 0, format!("magic {magic:#010x}, expected {LABELS_MAGIC:#010x}")));
    }
    let n = be_u32(bytes, 4, ctx)? as usize;
    let payload = &bytes[8..];
    if payload.len() != n {
        return Err(HebbError::format(
            ctx,
            8 + payload.len().min(n) as u64,
            format!("payload has {} bytes, header implies {n}", payload.len()),
        ));
    }
    Ok(payload)
}

/// Loads an IDX image/label file pair; pixels are divided by 255.
pub fn load_mnist<P: AsRef<Path>, Q: AsRef<Path>>(images: P, labels: Q) -> Result<LabeledDataset> {
    let img_bytes = fs::read(images)?;
    let lbl_bytes = fs::read(labels)?;
    mnist_from_bytes(&img_bytes, &lbl_bytes)
}

pub(crate) fn mnist_from_bytes(img_bytes: &[u8], lbl_bytes: &[u8]) -> Result<LabeledDataset> {
    let (n, rows, cols, pixels) = parse_idx_images(img_bytes)?;
    let labels = parse_idx_labels(lbl_bytes)?;
    if labels.len() != n {
        return Err(HebbError::format(
            "IDX labels",
            4,
            format!("{} labels for {n} images", labels.len()),
        ));
    }
    let max_label = labels.iter().copied().max().unwrap_or(0) as usize;
    let n_classes = (max_label + 1).max(10);
    let features = pixels.iter().map(|p| *p as f32 / 255.0).collect();
    LabeledDataset::new(
        features,
        labels.iter().map(|l| *l as u32).collect(),
        ImageShape::new(1, rows, cols),
        n_classes,
    )
}

/// `(train, test)` from the four standard file names inside `dir`.
pub fn load_mnist_dir<P: AsRef<Path>>(dir: P) -> Result<(LabeledDataset, LabeledDataset)> {
    let dir = dir.as_ref();
    let train = load_mnist(
        dir.join("train-images-idx3-ubyte"),
        dir.join("train-labels-idx1-ubyte"),
    )?;
    let test = load_mnist(
        dir.join("t10k-images-idx3-ubyte"),
        dir.join("t10k-labels-idx1-ubyte"),
    )?;
    Ok((train, test))
}
