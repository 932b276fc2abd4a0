//! Unsupervised class-incremental training followed by the representation
//! metrics: k-means cluster accuracy and k-NN error on the test set.
//!
//!     cargo run --release --example unsupervised            # MNIST
//!     cargo run --release --example unsupervised -- omniglot
//!
//! Reads data from `$HEBBCL_DATA_ROOT` (default `./data`). The trained
//! network is saved to `unsupervised.hbcl`.

use hebbcl::config::TrainConfig;
use hebbcl::datasets::data_root;
use hebbcl::experiment::{evaluate_unsupervised, train_unsupervised, DatasetKind, EvalPlan};

fn main() -> hebbcl::Result<()> {
    let kind = DatasetKind::parse(&std::env::args().nth(1).unwrap_or_else(|| "mnist".into()))?;
    let (train, test) = kind.load(&data_root())?;
    let (cfg, clusters) = match kind {
        DatasetKind::Omniglot => (TrainConfig::unsupervised_omniglot(), vec![50, 100]),
        _ => (TrainConfig::unsupervised_mnist(), vec![10, 25, 50]),
    };
    println!("{} train / {} test samples, {} classes", train.len(), test.len(), train.n_classes());

    let run = train_unsupervised(&train, &cfg, |_| Ok(()))?;
    println!(
        "trained in {:.1}s: {} neurons ({} frozen, {} expansions refused)",
        run.train_time_s,
        run.net.n_neurons(),
        run.net.frozen_count(),
        run.stats.expansions_refused
    );

    let plan = EvalPlan::new(clusters, Some(10), cfg.seed);
    for r in evaluate_unsupervised(&run.net, &cfg, kind.name(), &train, &test, &plan)? {
        println!(
            "{:>4} clusters: accuracy {:.2}%   10-NN error {:.2}%",
            r.n_clusters.unwrap_or(0),
            r.cluster_accuracy_pct.unwrap_or(f64::NAN),
            r.knn_error_pct.unwrap_or(f64::NAN)
        );
    }
    run.net.save_checkpoint("unsupervised.hbcl")?;
    Ok(())
}
