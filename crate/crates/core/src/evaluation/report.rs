use std::io::Write;

use serde::{Deserialize, Serialize};

use super::KMeansOptions;
use crate::config::TrainConfig;
use crate::error::Result;

/// Representation-quality record for one trained network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub cluster_accuracy_pct: Option<f64>,
    pub n_clusters: Option<usize>,
    pub knn_error_pct: Option<f64>,
    pub knn_k: Option<usize>,
    /// Winners kept per code; `None` when codes are raw activations.
    pub k_winners: Option<usize>,
    pub final_r: usize,
    pub frozen_count: usize,
    pub max_neurons: usize,
    /// `test` (cluster and score the test split) or `train->test`.
    pub cluster_protocol: String,
    pub kmeans: Option<KMeansOptions>,
    pub config: TrainConfig,
    pub seed: u64,
    pub wall_time_s: f64,
    /// Preprocessing choices that affect comparability.
    pub notes: Vec<String>,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "dataset,ablation,n_clusters,cluster_accuracy_pct,knn_k,knn_error_pct,final_r,frozen_count,seed";

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn csv_row(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.dataset,
            self.config.ablation.tag(),
            opt(&self.n_clusters),
            opt(&self.cluster_accuracy_pct.map(|v| format!("{v:.2}"))),
            opt(&self.knn_k),
            opt(&self.knn_error_pct.map(|v| format!("{v:.2}"))),
            self.final_r,
            self.frozen_count,
            self.seed
        )
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskAccuracy {
    pub classes: Vec<u32>,
    pub accuracy_pct: f64,
    pub n_samples: usize,
}

/// Class-incremental accuracy: pooled over the whole test set, and per task
/// when a task partition is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub dataset: String,
    pub overall_accuracy_pct: f64,
    pub per_task: Vec<TaskAccuracy>,
    /// Unweighted mean of `per_task`; `None` without a partition.
    pub mean_task_accuracy_pct: Option<f64>,
    pub n_samples: usize,
    pub final_r: usize,
    pub frozen_count: usize,
    pub config: Option<TrainConfig>,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl AccuracyReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

