//! Hebbian continual learning on a single wide layer.
//!
//! A network of prototype-like neurons is trained with a local
//! winner-take-all rule. Neurons that converge to an input are frozen and
//! replaced by fresh ones, so earlier classes are never overwritten, and
//! inputs are encoded as sparse k-winners codes. The crate covers the
//! unsupervised and class-incremental supervised trainers, dataset loaders,
//! the clustering/k-NN evaluation harness and weight visualizations.

pub mod cli;
pub mod config;
pub mod datasets;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod kernels;
pub mod network;
pub mod supervised;
pub mod unsupervised;
pub mod visualization;

pub use config::{Ablation, FrozenWinnerPolicy, InferenceScore, TrainConfig};
pub use datasets::{ImageShape, LabeledDataset, StreamSpec};
pub use error::{HebbError, Result};
pub use network::{k_winners, Network};
pub use unsupervised::TrainStats;
