use std::fs;
use std::path::{Path, PathBuf};

use super::{ImageShape, LabeledDataset};
use crate::error::{HebbError, Result};

const SIDE: u32 = 105;
const SPLIT_DIRS: [&str; 2] = ["images_background", "images_evaluation"];
const TRAIN_PER_CHARACTER: usize = 15;
const TEST_PER_CHARACTER: usize = 5;

fn sorted_subdirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_type()?.is_dir() {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}

/// Inverted grayscale: strokes (dark) become 1, background becomes 0.
fn read_inverted(path: &Path) -> Result<Vec<f32>> {
    let img = image::open(path)
        .map_err(|e| HebbError::Image(format!("{}: {e}", path.display())))?
        .to_luma8();
    if img.width() != SIDE || img.height() != SIDE {
        return Err(HebbError::format(
            path.display().to_string(),
            0,
            format!("image is {}x{}, expected {SIDE}x{SIDE}", img.width(), img.height()),
        ));
    }
    Ok(img.as_raw().iter().map(|p| 1.0 - *p as f32 / 255.0).collect())
}

/// Loads the 50-alphabet split: label = alphabet index, and for every
/// character the first 15 files (by name) go to train and the last 5 to test.
pub fn load_omniglot<P: AsRef<Path>>(root: P) -> Result<(LabeledDataset, LabeledDataset)> {
    load_omniglot_with(root, Some(50))
}

/// Like [`load_omniglot`] with a configurable (or unchecked) alphabet count.
///
/// `root` may hold `images_background`/`images_evaluation` (alphabets from
/// both are merged, background first) or the alphabet directories directly.
pub fn load_omniglot_with<P: AsRef<Path>>(
    root: P,
    expected_alphabets: Option<usize>,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let root = root.as_ref();
    let mut alphabets = Vec::new();
    let split_dirs: Vec<PathBuf> = SPLIT_DIRS
        .iter()
        .map(|d| root.join(d))
        .filter(|p| p.is_dir())
        .collect();
    if split_dirs.is_empty() {
        alphabets = sorted_subdirs(root)?;
    } else {
        for d in split_dirs {
            alphabets.extend(sorted_subdirs(&d)?);
        }
    }
    if let Some(n) = expected_alphabets {
        if alphabets.len() != n {
            return Err(HebbError::format(
                root.display().to_string(),
                0,
                format!("found {} alphabets, expected {n}", alphabets.len()),
            ));
        }
    }
    if alphabets.is_empty() {
        return Err(HebbError::format(root.display().to_string(), 0, "no alphabets found"));
    }

    let mut names = Vec::with_capacity(alphabets.len());
    let (mut tr_x, mut tr_y, mut te_x, mut te_y) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (label, alphabet) in alphabets.iter().enumerate() {
        names.push(
            alphabet
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        );
        for character in sorted_subdirs(alphabet)? {
            let files = sorted_files(&character)?;
            if files.len() != TRAIN_PER_CHARACTER + TEST_PER_CHARACTER {
                return Err(HebbError::format(
                    character.display().to_string(),
                    0,
                    format!(
                        "{} samples, expected {}",
                        files.len(),
                        TRAIN_PER_CHARACTER + TEST_PER_CHARACTER
                    ),
                ));
            }
            for (i, f) in files.iter().enumerate() {
                let px = read_inverted(f)?;
                if i < TRAIN_PER_CHARACTER {
                    tr_x.extend(px);
                    tr_y.push(label as u32);
                } else {
                    te_x.extend(px);
                    te_y.push(label as u32);
                }
            }
        }
    }
    let n = alphabets.len();
    let train = LabeledDataset::new(tr_x, tr_y, ImageShape::OMNIGLOT, n)?.with_class_names(names.clone());
    let test = LabeledDataset::new(te_x, te_y, ImageShape::OMNIGLOT, n)?.with_class_names(names);
    Ok((train, test))
}
