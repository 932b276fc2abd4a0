//! Class-incremental supervised training: each class trains only the
//! currently unfrozen rows, then the whole matrix is frozen and a fresh group
//! of rows is appended for the next class. Prediction sums activations per
//! class group, optionally after cosine normalization and a k-winners mask.

use std::collections::{BTreeMap, BTreeSet};

use crate::config::{FrozenWinnerPolicy, InferenceScore, TrainConfig};
use crate::datasets::{LabeledDataset, StreamSpec};
use crate::error::{HebbError, Result};
use crate::evaluation::{AccuracyReport, TaskAccuracy};
use crate::kernels;
use crate::network::{top_k_indices, Network};
use crate::unsupervised::{hebbian_step, normalize_updated, TrainStats};

/// Ordered `(class, examples)` pairs.
#[derive(Debug, Clone)]
pub struct ClassSchedule<'a> {
    entries: Vec<(u32, Vec<&'a [f32]>)>,
}

impl<'a> ClassSchedule<'a> {
    pub fn new(entries: Vec<(u32, Vec<&'a [f32]>)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (c, ex) in &entries {
            if !seen.insert(*c) {
                return Err(HebbError::invalid(format!("class {c} appears twice in the schedule")));
            }
            if ex.is_empty() {
                return Err(HebbError::invalid(format!("class {c} has no examples")));
            }
        }
        Ok(ClassSchedule { entries })
    }

    /// One entry per class in `class_order`, taking that class's samples in
    /// dataset order.
    pub fn from_dataset(ds: &'a LabeledDataset, class_order: &[u32]) -> Result<Self> {
        let entries = class_order
            .iter()
            .map(|c| (*c, ds.indices_of(*c).into_iter().map(|i| ds.sample(i)).collect()))
            .collect();
        Self::new(entries)
    }

    /// One entry per class in the stream's class order, keeping the
    /// stream's (shuffled) sample order within each class.
    pub fn from_stream(stream: &StreamSpec<'a>) -> Result<Self> {
        let ds = stream.dataset();
        let entries = stream
            .class_order()
            .iter()
            .map(|c| {
                let ex = stream
                    .order()
                    .iter()
                    .filter(|i| ds.labels()[**i] == *c)
                    .map(|i| ds.sample(*i))
                    .collect();
                (*c, ex)
            })
            .collect();
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(u32, Vec<&'a [f32]>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Trains the unfrozen rows on one class, freezes everything and appends
/// `neurons_per_class` fresh rows.
pub fn train_class(
    net: &mut Network,
    examples: &[&[f32]],
    class_id: u32,
    cfg: &TrainConfig,
) -> Result<TrainStats> {
    cfg.validate()?;
    let group: Vec<usize> = net.unfrozen_rows().collect();
    if group.is_empty() {
        return Err(HebbError::InvalidState(
            "no unfrozen neurons left to assign to the class".into(),
        ));
    }
    if let Some(x) = examples.iter().find(|x| x.len() != net.input_dim()) {
        return Err(HebbError::invalid(format!(
            "example has length {}, network expects {}",
            x.len(),
            net.input_dim()
        )));
    }
    net.set_max_neurons(cfg.max_neurons);
    for &j in &group {
        net.set_class_group(j, Some(class_id));
    }

    let mut stats = TrainStats::default();
    if cfg.ablation.hebbian {
        for _ in 0..cfg.epochs {
            for batch in examples.chunks(cfg.batch_size) {
                let mut touched = BTreeSet::new();
                let mut delta = 0.0f64;
                for x in batch {
                    let step = hebbian_step(net, x, cfg.epsilon, FrozenWinnerPolicy::ExcludeFromArgmax)?;
                    touched.insert(step.winner);
                    delta += step.delta_norm as f64;
                }
                normalize_updated(net, &touched);
                stats.minibatches += 1;
                stats.samples_seen += batch.len() as u64;
                stats.mean_delta_norm = (delta / batch.len() as f64) as f32;
            }
        }
    }

    if cfg.ablation.freezing {
        let before = net.frozen_count();
        net.freeze_all();
        stats.neurons_frozen_total = (net.frozen_count() - before) as u64;
    }
    if cfg.ablation.expansion {
        for _ in 0..cfg.neurons_per_class {
            match net.add_neuron(None) {
                Ok(_) => stats.neurons_added_total += 1,
                Err(HebbError::Capacity { .. }) => stats.expansions_refused += 1,
                Err(e) => return Err(e),
            }
        }
    }
    stats.current_r = net.n_neurons();
    Ok(stats)
}

/// Runs [`train_class`] for every schedule entry in order.
pub fn train_sequence(net: &mut Network, schedule: &ClassSchedule<'_>, cfg: &TrainConfig) -> Result<TrainStats> {
    train_sequence_with(net, schedule, cfg, |_, _| Ok(()))
}

/// [`train_sequence`] with a callback after each class, e.g. to snapshot
/// row digests or evaluate intermediate accuracy.
pub fn train_sequence_with<F>(
    net: &mut Network,
    schedule: &ClassSchedule<'_>,
    cfg: &TrainConfig,
    mut after_class: F,
) -> Result<TrainStats>
where
    F: FnMut(u32, &Network) -> Result<()>,
{
    let mut total = TrainStats {
        current_r: net.n_neurons(),
        ..TrainStats::default()
    };
    for (class_id, examples) in schedule.entries() {
        let delta = train_class(net, examples, *class_id, cfg)?;
        total.absorb(&delta);
        after_class(*class_id, net)?;
    }
    Ok(total)
}

/// Precomputed state for scoring many inputs against one network.
pub struct Scorer<'a> {
    net: &'a Network,
    score: InferenceScore,
    /// `1 / ||W_j||` per row, zero for all-zero rows; empty unless cosine.
    inv_norms: Vec<f32>,
    classes: Vec<u32>,
    /// Class-tagged rows and their groups; untagged rows never score.
    tagged: Vec<(usize, u32)>,
}

impl<'a> Scorer<'a> {
    pub fn new(net: &'a Network, score: InferenceScore) -> Result<Self> {
        let tagged: Vec<(usize, u32)> = net
            .class_groups()
            .iter()
            .enumerate()
            .filter_map(|(j, g)| g.map(|g| (j, g)))
            .collect();
        let classes: BTreeSet<u32> = tagged.iter().map(|(_, g)| *g).collect();
        if classes.is_empty() {
            return Err(HebbError::InvalidState("network has no class-tagged rows".into()));
        }
        let inv_norms = match score {
            InferenceScore::Cosine(_) => net
                .rows()
                .map(|w| {
                    let n = kernels::dot(w, w).sqrt();
                    if n > 0.0 { 1.0 / n } else { 0.0 }
                })
                .collect(),
            _ => Vec::new(),
        };
        Ok(Scorer {
            net,
            score,
            inv_norms,
            classes: classes.into_iter().collect(),
            tagged,
        })
    }

    /// Per-class sums over tagged rows, ascending by class.
    pub fn scores(&self, x: &[f32]) -> Result<BTreeMap<u32, f32>> {
        let mut a = self.net.activations(x)?;
        if !self.inv_norms.is_empty() {
            a.iter_mut().zip(&self.inv_norms).for_each(|(v, s)| *v *= s);
        }
        let mut scores: BTreeMap<u32, f32> = self.classes.iter().map(|c| (*c, 0.0)).collect();
        let tagged_a: Vec<f32> = self.tagged.iter().map(|(j, _)| a[*j]).collect();
        let mut add = |t: usize| {
            *scores.get_mut(&self.tagged[t].1).expect("class registered") += tagged_a[t];
        };
        match self.score {
            InferenceScore::Kwta(k) | InferenceScore::Cosine(k) => {
                for t in top_k_indices(&tagged_a, k.min(tagged_a.len()))? {
                    add(t);
                }
            }
            InferenceScore::Raw => (0..tagged_a.len()).for_each(add),
        }
        Ok(scores)
    }

    /// Highest-scoring class; the lowest class id wins ties.
    pub fn predict(&self, x: &[f32]) -> Result<u32> {
        let mut best: Option<(u32, f32)> = None;
        for (c, s) in self.scores(x)? {
            match best {
                Some((_, b)) if s <= b => {}
                _ => best = Some((c, s)),
            }
        }
        Ok(best.expect("non-empty").0)
    }
}

/// Per-class sums of activations over tagged rows, ascending by class.
pub fn class_scores(net: &Network, x: &[f32], score: InferenceScore) -> Result<BTreeMap<u32, f32>> {
    Scorer::new(net, score)?.scores(x)
}

/// Class whose group has the largest summed raw activation; the lowest class
/// id wins ties. Untagged rows are ignored.
pub fn predict(net: &Network, x: &[f32]) -> Result<u32> {
    predict_with(net, x, InferenceScore::Raw)
}

pub fn predict_with(net: &Network, x: &[f32], score: InferenceScore) -> Result<u32> {
    Scorer::new(net, score)?.predict(x)
}

/// Overall class-incremental accuracy, plus per-task accuracy and its mean
/// when `tasks` partitions the label set.
pub fn evaluate_accuracy(
    net: &Network,
    test: &LabeledDataset,
    tasks: Option<&[Vec<u32>]>,
    score: InferenceScore,
) -> Result<AccuracyReport> {
    use rayon::prelude::*;
    let scorer = Scorer::new(net, score)?;
    let preds: Vec<u32> = (0..test.len())
        .into_par_iter()
        .map(|i| scorer.predict(test.sample(i)))
        .collect::<Result<_>>()?;
    let labels = test.labels();
    let correct = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    let overall = if labels.is_empty() {
        0.0
    } else {
        100.0 * correct as f64 / labels.len() as f64
    };

    let mut per_task = Vec::new();
    if let Some(tasks) = tasks {
        for classes in tasks {
            let idx: Vec<usize> = (0..labels.len()).filter(|i| classes.contains(&labels[*i])).collect();
            let ok = idx.iter().filter(|i| preds[**i] == labels[**i]).count();
            per_task.push(TaskAccuracy {
                classes: classes.clone(),
                accuracy_pct: if idx.is_empty() { 0.0 } else { 100.0 * ok as f64 / idx.len() as f64 },
                n_samples: idx.len(),
            });
        }
    }
    let mean_task = (!per_task.is_empty())
        .then(|| per_task.iter().map(|t| t.accuracy_pct).sum::<f64>() / per_task.len() as f64);
    Ok(AccuracyReport {
        dataset: String::new(),
        overall_accuracy_pct: overall,
        per_task,
        mean_task_accuracy_pct: mean_task,
        n_samples: labels.len(),
        final_r: net.n_neurons(),
        frozen_count: net.frozen_count(),
        config: None,
        seed: 0,
        wall_time_s: 0.0,
    })
}

/// `[[0, 1], [2, 3], ...]`: consecutive pairs of `class_order`.
pub fn split_tasks(class_order: &[u32], classes_per_task: usize) -> Vec<Vec<u32>> {
    class_order
        .chunks(classes_per_task.max(1))
        .map(<[u32]>::to_vec)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::ImageShape;

    fn tagged_identity(n: usize) -> Network {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        let mut net = Network::from_weights(w, n, 0).unwrap();
        for j in 0..n {
            net.set_class_group(j, Some(j as u32));
        }
        net
    }

    #[test]
    fn predict_identity_and_ties() {
        let net = tagged_identity(4);
        assert_eq!(predict(&net, &[0., 0., 1., 0.]).unwrap(), 2);
        assert_eq!(predict(&net, &[0., 0., 0., 0.]).unwrap(), 0);
        let untagged = Network::new(4, 2, 0.1, 0).unwrap();
        assert!(matches!(predict(&untagged, &[0.; 4]), Err(HebbError::InvalidState(_))));
    }

    #[test]
    fn train_class_freezes_and_expands() {
        let cfg = TrainConfig {
            neurons_per_class: 3,
            max_neurons: 100,
            epochs: 2,
            batch_size: 2,
            ..TrainConfig::supervised_mnist()
        };
        let mut net = Network::new(4, 3, 0.01, 0).unwrap();
        let xs = [[1.0f32, 0.0, 0.0, 0.5], [0.9, 0.1, 0.0, 0.4]];
        let ex: Vec<&[f32]> = xs.iter().map(|x| x.as_slice()).collect();
        train_class(&mut net, &ex, 7, &cfg).unwrap();
        assert_eq!(net.n_neurons(), 6);
        assert!((0..3).all(|j| net.is_frozen(j) && net.class_group(j) == Some(7)));
        assert!((3..6).all(|j| !net.is_frozen(j) && net.class_group(j).is_none()));
    }

    #[test]
    fn train_class_needs_unfrozen_rows() {
        let mut net = Network::new(2, 2, 0.01, 0).unwrap();
        net.freeze_all();
        let x = [1.0f32, 0.0];
        assert!(matches!(
            train_class(&mut net, &[&x], 0, &TrainConfig::supervised_mnist()),
            Err(HebbError::InvalidState(_))
        ));
    }

    #[test]
    fn accuracy_reports() {
        let net = tagged_identity(2);
        let ds = LabeledDataset::new(
            vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.2, 0.0, 0.7],
            vec![0, 1, 1, 1],
            ImageShape::new(1, 1, 2),
            2,
        )
        .unwrap();
        let r = evaluate_accuracy(&net, &ds, Some(&[vec![0], vec![1]]), InferenceScore::Raw).unwrap();
        assert_eq!(r.overall_accuracy_pct, 75.0);
        assert_eq!(r.per_task[0].accuracy_pct, 100.0);
        assert!((r.per_task[1].accuracy_pct - 200.0 / 3.0).abs() < 1e-9);
        assert!((r.mean_task_accuracy_pct.unwrap() - 250.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn schedule_validation() {
        let x = [0.0f32];
        assert!(ClassSchedule::new(vec![(0, vec![&x[..]]), (0, vec![&x[..]])]).is_err());
        assert!(ClassSchedule::new(vec![(0, vec![])]).is_err());
        assert_eq!(split_tasks(&[0, 1, 2, 3, 4], 2), vec![vec![0, 1], vec![2, 3], vec![4]]);
    }
}
