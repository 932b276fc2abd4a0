//! Label-free training: winner-take-all Hebbian updates, per-minibatch
//! max-abs normalization, distance-triggered freezing and one-for-one
//! expansion.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::config::{FrozenWinnerPolicy, TrainConfig};
use crate::error::{HebbError, Result};
use crate::kernels;
use crate::network::Network;

/// Cumulative (or per-minibatch delta) training telemetry.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub minibatches: u64,
    pub samples_seen: u64,
    pub neurons_frozen_total: u64,
    pub neurons_added_total: u64,
    /// Times expansion was wanted but the growth cap refused it.
    pub expansions_refused: u64,
    /// Samples that found no eligible neuron.
    pub samples_without_winner: u64,
    pub current_r: usize,
    /// Mean `||x - W_m||_2` over the updates of the last minibatch.
    pub mean_delta_norm: f32,
}

impl TrainStats {
    pub fn absorb(&mut self, delta: &TrainStats) {
        self.minibatches += delta.minibatches;
        self.samples_seen += delta.samples_seen;
        self.neurons_frozen_total += delta.neurons_frozen_total;
        self.neurons_added_total += delta.neurons_added_total;
        self.expansions_refused += delta.expansions_refused;
        self.samples_without_winner += delta.samples_without_winner;
        self.current_r = delta.current_r;
        self.mean_delta_norm = delta.mean_delta_norm;
    }
}

/// Result of presenting one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub winner: usize,
    /// False when the winner was frozen (skip-update policy).
    pub updated: bool,
    /// `||x - W_m||_2` before the update.
    pub delta_norm: f32,
}

/// Picks the winner among eligible rows and, if it is unfrozen, moves it
/// toward the input: `W_m += epsilon * (x - W_m)`.
pub fn hebbian_step(
    net: &mut Network,
    x: &[f32],
    epsilon: f32,
    policy: FrozenWinnerPolicy,
) -> Result<Step> {
    if x.len() != net.input_dim() {
        return Err(HebbError::invalid(format!(
            "sample has length {}, network expects {}",
            x.len(),
            net.input_dim()
        )));
    }
    let winner = match policy {
        FrozenWinnerPolicy::SkipUpdate => {
            kernels::argmax_lowest((0..net.n_neurons()).map(|j| (j, net.activation(j, x))))
        }
        FrozenWinnerPolicy::ExcludeFromArgmax => {
            let net_ref = &*net;
            kernels::argmax_lowest(net_ref.unfrozen_rows().map(|j| (j, net_ref.activation(j, x))))
        }
    }
    .ok_or(HebbError::CapacityExhausted)?;

    if net.is_frozen(winner) {
        return Ok(Step {
            winner,
            updated: false,
            delta_norm: kernels::sq_dist(net.row(winner), x).sqrt(),
        });
    }
    let row = net.row_mut_unchecked(winner);
    let mut sq = 0.0f32;
    for (w, xi) in row.iter_mut().zip(x) {
        let d = xi - *w;
        sq += d * d;
        *w += epsilon * d;
    }
    Ok(Step {
        winner,
        updated: true,
        delta_norm: sq.sqrt(),
    })
}

/// Divides each touched unfrozen row by the largest absolute weight of the
/// whole matrix and returns that scale. An all-zero matrix is left alone.
pub fn normalize_updated(net: &mut Network, touched: &BTreeSet<usize>) -> f32 {
    let phi = net.max_abs_weight();
    if phi == 0.0 || !phi.is_finite() {
        return phi;
    }
    let inv = 1.0 / phi;
    for &j in touched {
        if net.is_frozen(j) {
            continue;
        }
        for w in net.row_mut_unchecked(j) {
            *w *= inv;
        }
    }
    phi
}

/// Rows frozen and rows appended by one [`freeze_scan`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreezeOutcome {
    pub frozen: Vec<usize>,
    pub added: Vec<usize>,
    pub refused: usize,
}

/// Smallest `||W_j - x||^2 / ||x||_1` over the batch; samples with zero
/// l1 norm are skipped. `None` if every sample was skipped.
pub fn min_normalized_distance(row: &[f32], batch: &[&[f32]], l1: &[f32]) -> Option<f32> {
    batch
        .iter()
        .zip(l1)
        .filter(|(_, n)| **n > 0.0)
        .map(|(x, n)| kernels::sq_dist(row, x) / n)
        .fold(None, |m: Option<f32>, d| Some(m.map_or(d, |m| m.min(d))))
}

/// Freezes every unfrozen row whose minimum normalized distance to a batch
/// sample is strictly below `threshold`; with `expand` set, appends one
/// fresh row per frozen row while the cap allows. Only rows that existed
/// when the call started are scanned.
pub fn freeze_scan(
    net: &mut Network,
    batch: &[&[f32]],
    threshold: f32,
    expand: bool,
) -> Result<FreezeOutcome> {
    if batch.is_empty() {
        return Err(HebbError::invalid("freeze scan needs a non-empty batch"));
    }
    let l1: Vec<f32> = batch.iter().map(|x| kernels::l1_norm(x)).collect();
    let candidates: Vec<usize> = net.unfrozen_rows().collect();
    let to_freeze: Vec<usize> = candidates
        .into_iter()
        .filter(|&j| {
            min_normalized_distance(net.row(j), batch, &l1).is_some_and(|d| d < threshold)
        })
        .collect();

    let mut out = FreezeOutcome::default();
    for j in to_freeze {
        net.freeze_neuron(j)?;
        out.frozen.push(j);
        if expand {
            match net.add_neuron(None) {
                Ok(idx) => out.added.push(idx),
                Err(HebbError::Capacity { .. }) => out.refused += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

/// One minibatch: Hebbian updates per sample, normalization of the rows
/// touched, then the freeze scan. Each stage obeys the ablation switches.
pub fn train_minibatch(net: &mut Network, batch: &[&[f32]], cfg: &TrainConfig) -> Result<TrainStats> {
    if batch.is_empty() {
        return Err(HebbError::invalid("empty minibatch"));
    }
    net.set_max_neurons(cfg.max_neurons);
    let mut stats = TrainStats {
        minibatches: 1,
        samples_seen: batch.len() as u64,
        ..TrainStats::default()
    };

    if cfg.ablation.hebbian {
        let mut touched = BTreeSet::new();
        let mut delta_sum = 0.0f64;
        for x in batch {
            match hebbian_step(net, x, cfg.epsilon, cfg.frozen_winner_policy) {
                Ok(step) => {
                    if step.updated {
                        touched.insert(step.winner);
                        delta_sum += step.delta_norm as f64;
                    }
                }
                Err(HebbError::CapacityExhausted) => stats.samples_without_winner += 1,
                Err(e) => return Err(e),
            }
        }
        if !touched.is_empty() {
            normalize_updated(net, &touched);
        }
        let n_updates = batch.len() as u64 - stats.samples_without_winner;
        if n_updates > 0 {
            stats.mean_delta_norm = (delta_sum / n_updates as f64) as f32;
        }
    }

    if cfg.ablation.freezing {
        let out = freeze_scan(net, batch, cfg.threshold, cfg.ablation.expansion)?;
        stats.neurons_frozen_total = out.frozen.len() as u64;
        stats.neurons_added_total = out.added.len() as u64;
        stats.expansions_refused = out.refused as u64;
    }
    stats.current_r = net.n_neurons();
    Ok(stats)
}

/// Single pass over feature-only minibatches, in order.
pub fn train_stream<'a, I>(net: &mut Network, batches: I, cfg: &TrainConfig) -> Result<TrainStats>
where
    I: IntoIterator<Item = Vec<&'a [f32]>>,
{
    train_stream_with(net, batches, cfg, |_| Ok(()))
}

/// [`train_stream`] with a callback receiving each minibatch's stats delta.
pub fn train_stream_with<'a, I, F>(
    net: &mut Network,
    batches: I,
    cfg: &TrainConfig,
    mut on_batch: F,
) -> Result<TrainStats>
where
    I: IntoIterator<Item = Vec<&'a [f32]>>,
    F: FnMut(&TrainStats) -> Result<()>,
{
    cfg.validate()?;
    let mut total = TrainStats {
        current_r: net.n_neurons(),
        ..TrainStats::default()
    };
    for batch in batches {
        if batch.is_empty() {
            continue;
        }
        let delta = train_minibatch(net, &batch, cfg)?;
        on_batch(&delta)?;
        total.absorb(&delta);
    }
    Ok(total)
}
