//! The single wide layer: a growing weight matrix with per-row frozen flags,
//! optional class tags, the k-winners encoder and binary checkpoints.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{HebbError, Result};
use crate::kernels;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"HBCL";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Weight matrix `W` (rows = neurons) plus bookkeeping.
///
/// Rows are only ever appended. A frozen row is never written again by any
/// method of this type other than [`Network::row_mut_unchecked`], which the
/// trainers use only on unfrozen rows.
#[derive(Debug, Clone)]
pub struct Network {
    weights: Vec<f32>,
    frozen: Vec<bool>,
    class_group: Vec<Option<u32>>,
    input_dim: usize,
    init_scale: f32,
    max_neurons: usize,
    rng: ChaCha8Rng,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.input_dim == other.input_dim
            && self.frozen == other.frozen
            && self.class_group == other.class_group
            && self.weights.len() == other.weights.len()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Network {
    /// `n_neurons` rows drawn i.i.d. uniform in `[0, init_scale]`.
    pub fn new(input_dim: usize, n_neurons: usize, init_scale: f32, seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(HebbError::invalid("input_dim must be positive"));
        }
        if n_neurons == 0 {
            return Err(HebbError::invalid("n_neurons must be positive"));
        }
        if !(init_scale > 0.0) || !init_scale.is_finite() {
            return Err(HebbError::invalid("init_scale must be a positive finite number"));
        }
        let mut net = Network {
            weights: Vec::with_capacity(input_dim * n_neurons),
            frozen: Vec::with_capacity(n_neurons),
            class_group: Vec::with_capacity(n_neurons),
            input_dim,
            init_scale,
            max_neurons: usize::MAX,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        for _ in 0..n_neurons {
            net.push_random_row(None);
        }
        Ok(net)
    }

    /// Builds a network from explicit weights, e.g. for tests or imports.
    pub fn from_weights(weights: Vec<f32>, input_dim: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 || weights.is_empty() || weights.len() % input_dim != 0 {
            return Err(HebbError::invalid(format!(
                "{} weights do not form rows of length {}",
                weights.len(),
                input_dim
            )));
        }
        let rows = weights.len() / input_dim;
        Ok(Network {
            weights,
            frozen: vec![false; rows],
            class_group: vec![None; rows],
            input_dim,
            init_scale: 0.01,
            max_neurons: usize::MAX,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn n_neurons(&self) -> usize {
        self.frozen.len()
    }

    pub fn init_scale(&self) -> f32 {
        self.init_scale
    }

    pub fn set_init_scale(&mut self, init_scale: f32) {
        self.init_scale = init_scale;
    }

    pub fn max_neurons(&self) -> usize {
        self.max_neurons
    }

    pub fn set_max_neurons(&mut self, max_neurons: usize) {
        self.max_neurons = max_neurons;
    }

    /// Restarts the generator used for appended rows.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn row(&self, j: usize) -> &[f32] {
        &self.weights[j * self.input_dim..(j + 1) * self.input_dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.weights.chunks_exact(self.input_dim)
    }

    /// Mutable access for the trainers. Callers must not touch frozen rows.
    pub(crate) fn row_mut_unchecked(&mut self, j: usize) -> &mut [f32] {
        debug_assert!(!self.frozen[j], "write to frozen row {j}");
        &mut self.weights[j * self.input_dim..(j + 1) * self.input_dim]
    }

    pub fn is_frozen(&self, j: usize) -> bool {
        self.frozen[j]
    }

    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }

    pub fn frozen_count(&self) -> usize {
        self.frozen.iter().filter(|f| **f).count()
    }

    pub fn unfrozen_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.frozen.iter().enumerate().filter(|(_, f)| !**f).map(|(j, _)| j)
    }

    pub fn class_group(&self, j: usize) -> Option<u32> {
        self.class_group[j]
    }

    pub fn class_groups(&self) -> &[Option<u32>] {
        &self.class_group
    }

    pub fn set_class_group(&mut self, j: usize, class_id: Option<u32>) {
        self.class_group[j] = class_id;
    }

    /// Marks row `j` as frozen. Idempotent.
    pub fn freeze_neuron(&mut self, j: usize) -> Result<()> {
        if j >= self.n_neurons() {
            return Err(HebbError::invalid(format!(
                "row {j} out of range for {} neurons",
                self.n_neurons()
            )));
        }
        self.frozen[j] = true;
        Ok(())
    }

    pub fn freeze_all(&mut self) {
        self.frozen.iter_mut().for_each(|f| *f = true);
    }

    /// Appends one unfrozen row drawn uniform in `[0, init_scale]` and
    /// returns its index.
    pub fn add_neuron(&mut self, class_id: Option<u32>) -> Result<usize> {
        if self.n_neurons() >= self.max_neurons {
            return Err(HebbError::Capacity {
                max: self.max_neurons,
            });
        }
        Ok(self.push_random_row(class_id))
    }

    fn push_random_row(&mut self, class_id: Option<u32>) -> usize {
        let idx = self.n_neurons();
        let scale = self.init_scale;
        let rng = &mut self.rng;
        self.weights
            .extend((0..self.input_dim).map(|_| rng.gen::<f32>() * scale));
        self.frozen.push(false);
        self.class_group.push(class_id);
        idx
    }

    fn check_input(&self, x: &[f32]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(HebbError::invalid(format!(
                "input has length {}, network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    /// `W x`.
    pub fn activations(&self, x: &[f32]) -> Result<Vec<f32>> {
        self.check_input(x)?;
        Ok(self.rows().map(|w| kernels::dot(w, x)).collect())
    }

    /// Single activation `W_j · x` without the length check.
    pub(crate) fn activation(&self, j: usize, x: &[f32]) -> f32 {
        kernels::dot(self.row(j), x)
    }

    /// `k_winners(W x, k)`.
    pub fn encode(&self, x: &[f32], k: usize) -> Result<Vec<f32>> {
        let a = self.activations(x)?;
        k_winners(&a, k)
    }

    /// Largest absolute weight over the whole matrix.
    pub fn max_abs_weight(&self) -> f32 {
        self.weights.iter().fold(0.0f32, |m, w| m.max(w.abs()))
    }

    /// SHA-256 over the bit patterns of the given rows, in order.
    pub fn rows_digest<I: IntoIterator<Item = usize>>(&self, rows: I) -> [u8; 32] {
        let mut h = Sha256::new();
        for j in rows {
            h.update((j as u64).to_le_bytes());
            for w in self.row(j) {
                h.update(w.to_bits().to_le_bytes());
            }
        }
        h.finalize().into()
    }

    /// SHA-256 of the serialized checkpoint bytes.
    pub fn digest(&self) -> [u8; 32] {
        let mut buf = Vec::new();
        self.write_checkpoint(&mut buf)
            .expect("writing to a Vec cannot fail");
        Sha256::digest(&buf).into()
    }

    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        let rows = u32::try_from(self.n_neurons())
            .map_err(|_| HebbError::invalid("too many rows for checkpoint"))?;
        let dim = u32::try_from(self.input_dim)
            .map_err(|_| HebbError::invalid("input_dim too large for checkpoint"))?;
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        w.write_all(&rows.to_le_bytes())?;
        w.write_all(&dim.to_le_bytes())?;
        let mut bytes = Vec::with_capacity(self.weights.len() * 4);
        for v in &self.weights {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&bytes)?;
        let flags: Vec<u8> = self.frozen.iter().map(|f| u8::from(*f)).collect();
        w.write_all(&flags)?;
        let mut groups = Vec::with_capacity(self.class_group.len() * 4);
        for g in &self.class_group {
            let v: i32 = match g {
                Some(c) => i32::try_from(*c)
                    .map_err(|_| HebbError::invalid("class id does not fit in i32"))?,
                None => -1,
            };
            groups.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&groups)?;
        w.flush()?;
        Ok(())
    }

    /// Parses a checkpoint from an in-memory buffer.
    pub fn read_checkpoint(bytes: &[u8]) -> Result<Self> {
        let ctx = "checkpoint";
        let mut cur = ByteCursor::new(bytes, ctx);
        let magic = cur.take(4)?;
        if magic != CHECKPOINT_MAGIC {
            return Err(HebbError::format(ctx, 0, format!("bad magic {magic:?}")));
        }
        let version = cur.u32_le()?;
        if version != CHECKPOINT_VERSION {
            return Err(HebbError::format(ctx, 4, format!("unsupported version {version}")));
        }
        let rows = cur.u32_le()? as usize;
        let dim = cur.u32_le()? as usize;
        if rows == 0 || dim == 0 {
            return Err(HebbError::format(ctx, 8, "zero rows or zero input dimension"));
        }
        let n = rows
            .checked_mul(dim)
            .ok_or_else(|| HebbError::format(ctx, 8, "dimensions overflow"))?;
        let raw = cur.take(n.checked_mul(4).ok_or_else(|| HebbError::format(ctx, 8, "dimensions overflow"))?)?;
        let weights: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let flags_at = cur.offset();
        let flags = cur.take(rows)?;
        let mut frozen = Vec::with_capacity(rows);
        for (i, f) in flags.iter().enumerate() {
            match f {
                0 => frozen.push(false),
                1 => frozen.push(true),
                other => {
                    return Err(HebbError::format(
                        ctx,
                        (flags_at + i) as u64,
                        format!("frozen flag must be 0 or 1, got {other}"),
                    ))
                }
            }
        }
        let groups_at = cur.offset();
        let raw = cur.take(rows * 4)?;
        let mut class_group = Vec::with_capacity(rows);
        for (i, c) in raw.chunks_exact(4).enumerate() {
            let v = i32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            class_group.push(match v {
                -1 => None,
                v if v >= 0 => Some(v as u32),
                v => {
                    return Err(HebbError::format(
                        ctx,
                        (groups_at + 4 * i) as u64,
                        format!("class group {v} is neither -1 nor non-negative"),
                    ))
                }
            });
        }
        if cur.offset() != bytes.len() {
            return Err(HebbError::format(
                ctx,
                cur.offset() as u64,
                format!("{} trailing bytes", bytes.len() - cur.offset()),
            ));
        }
        // The format carries no generator state; derive one from the shape.
        let seed = ((rows as u64) << 32) ^ dim as u64;
        Ok(Network {
            weights,
            frozen,
            class_group,
            input_dim: dim,
            init_scale: 0.01,
            max_neurons: usize::MAX,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn save_checkpoint<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = File::create(path)?;
        self.write_checkpoint(BufWriter::new(file))
    }

    pub fn load_checkpoint<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        Self::read_checkpoint(&bytes)
    }
}

/// Keeps the `k` largest entries of `a` in place and zeroes the rest.
/// Among equal values at the cut-off the lower index is kept.
pub fn k_winners(a: &[f32], k: usize) -> Result<Vec<f32>> {
    let idx = top_k_indices(a, k)?;
    let mut out = vec![0.0; a.len()];
    for i in idx {
        out[i] = a[i];
    }
    Ok(out)
}

/// Indices of the `k` winners, in ascending index order.
pub fn top_k_indices(a: &[f32], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > a.len() {
        return Err(HebbError::invalid(format!(
            "k = {k} outside 1..={}",
            a.len()
        )));
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    if k < a.len() {
        // Descending by value, ascending by index; NaN sorts last.
        let cmp = |&i: &usize, &j: &usize| {
            let (x, y) = (a[i], a[j]);
            match (x.is_nan(), y.is_nan()) {
                (true, true) => i.cmp(&j),
                (true, false) => std::cmp::Ordering::Greater,
                (false, true) => std::cmp::Ordering::Less,
                _ => y.partial_cmp(&x).unwrap().then(i.cmp(&j)),
            }
        };
        order.select_nth_unstable_by(k - 1, cmp);
        order.truncate(k);
    }
    order.sort_unstable();
    Ok(order)
}

struct ByteCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    context: &'static str,
}

impl<'a> ByteCursor<'a> {
    fn new(bytes: &'a [u8], context: &'static str) -> Self {
        ByteCursor {
            bytes,
            pos: 0,
            context,
        }
    }

    fn offset(&self) -> usize {
        self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(HebbError::format(
                self.context,
                self.pos as u64,
                format!(
                    "truncated: need {n} bytes, {} remain",
                    self.bytes.len() - self.pos
                ),
            )),
        }
    }

    fn u32_le(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}
