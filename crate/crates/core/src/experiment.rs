//! End-to-end pipelines: load, train, encode, score. The command line, the
//! examples and the acceptance checks all go through these.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{seeds, TrainConfig};
use crate::datasets::{self, LabeledDataset, StreamSpec};
use crate::error::{HebbError, Result};
use crate::evaluation::{
    assign_to_centroids, cluster_accuracy, kmeans, knn_error, represent_dataset, AccuracyReport, EvalReport, KMeansOptions,
};
use crate::network::Network;
use crate::supervised::{evaluate_accuracy, split_tasks, train_sequence_with, ClassSchedule};
use crate::unsupervised::{train_stream_with, TrainStats};

/// Datasets the pipelines know how to load.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Mnist,
    Cifar10,
    Omniglot,
}

impl DatasetKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "mnist" => Ok(Self::Mnist),
            "cifar10" | "cifar-10" | "cifar" => Ok(Self::Cifar10),
            "omniglot" => Ok(Self::Omniglot),
            other => Err(HebbError::config(
                "dataset",
                format!("unknown dataset `{other}` (mnist | cifar10 | omniglot)"),
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Mnist => "mnist",
            Self::Cifar10 => "cifar10",
            Self::Omniglot => "omniglot",
        }
    }

    /// Directory under the data root holding this dataset.
    pub fn dir(self, root: &Path) -> PathBuf {
        root.join(self.name())
    }

    /// What to put where, for error messages.
    pub fn fetch_hint(self, root: &Path) -> String {
        let dir = self.dir(root);
        let what = match self {
            Self::Mnist => "train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte and t10k-labels-idx1-ubyte (optionally .gz-decompressed first)",
            Self::Cifar10 => "the extracted binary version: data_batch_1.bin .. data_batch_5.bin and test_batch.bin",
            Self::Omniglot => "the extracted images_background/ and images_evaluation/ folders",
        };
        format!(
            "place {what} in {} (set {} to change the data root)",
            dir.display(),
            datasets::DATA_ROOT_ENV
        )
    }

    /// Loads `(train, test)` from `root`.
    pub fn load(self, root: &Path) -> Result<(LabeledDataset, LabeledDataset)> {
        let dir = self.dir(root);
        if !dir.is_dir() {
            return Err(HebbError::MissingData(self.fetch_hint(root)));
        }
        let loaded = match self {
            Self::Mnist => datasets::load_mnist_dir(&dir),
            Self::Cifar10 => datasets::load_cifar10(&dir),
            Self::Omniglot => datasets::load_omniglot(&dir),
        };
        loaded.map_err(|e| match e {
            HebbError::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                HebbError::MissingData(format!("{io}; {}", self.fetch_hint(root)))
            }
            e => e,
        })
    }
}

/// A trained network together with what happened during training.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub net: Network,
    pub stats: TrainStats,
    pub train_time_s: f64,
}

/// Single class-incremental pass over `train` in natural class order. The
/// learner only sees features.
pub fn train_unsupervised<F>(train: &LabeledDataset, cfg: &TrainConfig, on_batch: F) -> Result<TrainedRun>
where
    F: FnMut(&TrainStats) -> Result<()>,
{
    cfg.validate()?;
    let t0 = Instant::now();
    let mut net = Network::new(
        train.dim(),
        cfg.initial_neurons,
        cfg.init_scale,
        seeds::derive(cfg.seed, seeds::NETWORK),
    )?;
    let stream = StreamSpec::natural(train, cfg.batch_size, seeds::derive(cfg.seed, seeds::STREAM))?;
    let stats = train_stream_with(&mut net, stream.unlabeled(), cfg, on_batch)?;
    Ok(TrainedRun {
        net,
        stats,
        train_time_s: t0.elapsed().as_secs_f64(),
    })
}

/// Metrics to compute on a trained unsupervised network.
#[derive(Debug, Clone)]
pub struct EvalPlan {
    /// One k-means run (and one report) per entry.
    pub clusters: Vec<usize>,
    /// Neighbours for the k-NN error; `None` skips it.
    pub knn_k: Option<usize>,
    /// Use every `knn_train_stride`-th training sample as the k-NN
    /// reference set (1 = all of it).
    pub knn_train_stride: usize,
    pub kmeans_seed: u64,
    /// Fit k-means on the training codes and assign test codes to the
    /// learned centroids, instead of clustering the test codes directly.
    pub fit_on_train: bool,
}

impl EvalPlan {
    pub fn new(clusters: Vec<usize>, knn_k: Option<usize>, seed: u64) -> Self {
        EvalPlan {
            clusters,
            knn_k,
            knn_train_stride: 1,
            kmeans_seed: seeds::derive(seed, seeds::KMEANS),
            fit_on_train: false,
        }
    }
}

/// Encodes `test` (and `train` for k-NN) with the configured number of
/// winners, clusters the test codes and scores them. Returns one report
/// per cluster count; the k-NN error is repeated in each. With an empty
/// cluster list a single k-NN-only report is returned.
pub fn evaluate_unsupervised(
    net: &Network,
    cfg: &TrainConfig,
    dataset: &str,
    train: &LabeledDataset,
    test: &LabeledDataset,
    plan: &EvalPlan,
) -> Result<Vec<EvalReport>> {
    let t0 = Instant::now();
    let k = if cfg.ablation.kwta {
        cfg.k_winners.min(net.n_neurons())
    } else {
        net.n_neurons()
    };
    let test_codes = represent_dataset(net, test, k)?;
    let train_codes = if plan.knn_k.is_some() || plan.fit_on_train {
        let idx: Vec<usize> = (0..train.len()).step_by(plan.knn_train_stride.max(1)).collect();
        let reference = if idx.len() == train.len() { train.clone() } else { train.subset(&idx) };
        Some((represent_dataset(net, &reference, k)?, reference))
    } else {
        None
    };
    let knn = match (plan.knn_k, &train_codes) {
        (Some(kk), Some((codes, reference))) => {
            Some(knn_error(codes, reference.labels(), &test_codes, test.labels(), kk)?)
        }
        _ => None,
    };
    let mut notes = Vec::new();
    if plan.knn_train_stride > 1 {
        notes.push(format!("reference set: every {}th training sample", plan.knn_train_stride));
    }
    let base = EvalReport {
        dataset: dataset.to_string(),
        cluster_accuracy_pct: None,
        n_clusters: None,
        knn_error_pct: knn,
        knn_k: plan.knn_k,
        k_winners: cfg.ablation.kwta.then_some(k),
        final_r: net.n_neurons(),
        frozen_count: net.frozen_count(),
        max_neurons: cfg.max_neurons,
        cluster_protocol: if plan.fit_on_train { "train->test" } else { "test" }.into(),
        kmeans: None,
        config: cfg.clone(),
        seed: cfg.seed,
        wall_time_s: 0.0,
        notes,
    };
    if plan.clusters.is_empty() {
        return Ok(vec![EvalReport {
            wall_time_s: t0.elapsed().as_secs_f64(),
            ..base
        }]);
    }
    plan.clusters
        .iter()
        .map(|&nc| {
            let opts = KMeansOptions::new(nc, plan.kmeans_seed);
            let assignments = match &train_codes {
                Some((codes, _)) if plan.fit_on_train => {
                    assign_to_centroids(&test_codes, &kmeans(codes, &opts)?.centroids)
                }
                _ => kmeans(&test_codes, &opts)?.assignments,
            };
            Ok(EvalReport {
                cluster_accuracy_pct: Some(cluster_accuracy(&assignments, test.labels())?),
                n_clusters: Some(nc),
                kmeans: Some(opts),
                wall_time_s: t0.elapsed().as_secs_f64(),
                ..base.clone()
            })
        })
        .collect()
}

/// Class-incremental supervised training in natural class order (samples
/// shuffled within each class), followed by accuracy on `test` pooled and
/// per two-class task. `after_class` sees the network after every class.
pub fn run_supervised<F>(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &TrainConfig,
    dataset: &str,
    after_class: F,
) -> Result<(TrainedRun, AccuracyReport)>
where
    F: FnMut(u32, &Network) -> Result<()>,
{
    cfg.validate()?;
    let t0 = Instant::now();
    let order = train.present_classes();
    let stream = StreamSpec::new(train, &order, cfg.batch_size, seeds::derive(cfg.seed, seeds::STREAM))?;
    let schedule = ClassSchedule::from_stream(&stream)?;
    let mut net = Network::new(
        train.dim(),
        cfg.neurons_per_class,
        cfg.init_scale,
        seeds::derive(cfg.seed, seeds::NETWORK),
    )?;
    let stats = train_sequence_with(&mut net, &schedule, cfg, after_class)?;
    let train_time_s = t0.elapsed().as_secs_f64();
    let tasks = split_tasks(&order, 2);
    let mut report = evaluate_accuracy(&net, test, Some(&tasks), cfg.inference)?;
    report.dataset = dataset.to_string();
    report.config = Some(cfg.clone());
    report.seed = cfg.seed;
    report.wall_time_s = t0.elapsed().as_secs_f64();
    Ok((
        TrainedRun {
            net,
            stats,
            train_time_s,
        },
        report,
    ))
}
