//! Representation-quality metrics: k-means cluster accuracy with modal
//! class assignment, and k-nearest-neighbour error.

mod kmeans;
mod metrics;
mod report;
mod represent;

pub use kmeans::{assign_to_centroids, kmeans, KMeans, KMeansOptions};
pub use metrics::{cluster_accuracy, knn_error, knn_predict, modal_labels};
pub use report::{AccuracyReport, EvalReport, TaskAccuracy};
pub use represent::{represent_dataset, Representations};
