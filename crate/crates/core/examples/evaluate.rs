//! Scores a saved unsupervised checkpoint two ways: clustering the test
//! codes directly, and fitting k-means on training codes before assigning
//! the test codes.
//!
//!     cargo run --release --example unsupervised      # writes unsupervised.hbcl
//!     cargo run --release --example evaluate -- unsupervised.hbcl

use hebbcl::config::TrainConfig;
use hebbcl::datasets::data_root;
use hebbcl::experiment::{evaluate_unsupervised, DatasetKind, EvalPlan};
use hebbcl::network::Network;

fn main() -> hebbcl::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "unsupervised.hbcl".into());
    let net = Network::load_checkpoint(&path)?;
    let (train, test) = DatasetKind::Mnist.load(&data_root())?;
    let cfg = TrainConfig::unsupervised_mnist();

    for fit_on_train in [false, true] {
        let mut plan = EvalPlan::new(vec![10, 25, 50], None, cfg.seed);
        plan.fit_on_train = fit_on_train;
        for r in evaluate_unsupervised(&net, &cfg, "mnist", &train, &test, &plan)? {
            println!(
                "{:<12} {:>3} clusters: {:.2}%",
                r.cluster_protocol,
                r.n_clusters.unwrap_or(0),
                r.cluster_accuracy_pct.unwrap_or(f64::NAN)
            );
        }
    }
    let plan = EvalPlan::new(Vec::new(), Some(10), cfg.seed);
    let r = &evaluate_unsupervised(&net, &cfg, "mnist", &train, &test, &plan)?[0];
    println!("10-NN error: {:.2}%", r.knn_error_pct.unwrap_or(f64::NAN));
    Ok(())
}
