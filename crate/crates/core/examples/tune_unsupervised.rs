//! Grid search for the unsupervised trainer on a validation split carved
//! out of the MNIST training set. The test set is never touched.
//!
//!     cargo run --release --example tune_unsupervised
//!     cargo run --release --example tune_unsupervised -- "eps=0.2,t=0.3,k=50" "eps=0.1,t=0.2,k=25,ablation=HF-K"
//!
//! Each argument is a comma-separated list of config overrides. Output is
//! CSV: cluster accuracy at 10/25/50 clusters and 10-NN error, all on the
//! validation split. `KNN_STRIDE` thins the k-NN reference set (default 5).

use hebbcl::config::TrainConfig;
use hebbcl::datasets::data_root;
use hebbcl::experiment::{evaluate_unsupervised, train_unsupervised, DatasetKind, EvalPlan};

fn main() -> hebbcl::Result<()> {
    let (train, _) = DatasetKind::Mnist.load(&data_root())?;
    let (fit, val) = train.split_validation(10_000, 7)?;
    let stride = std::env::var("KNN_STRIDE").ok().and_then(|s| s.parse().ok()).unwrap_or(5);

    let mut override_sets: Vec<String> = std::env::args().skip(1).collect();
    if override_sets.is_empty() {
        for eps in ["0.05", "0.1", "0.2"] {
            for t in ["0.1", "0.2", "0.3", "0.4"] {
                override_sets.push(format!("eps={eps},t={t}"));
            }
        }
    }

    println!("overrides,final_r,frozen,train_s,acc10,acc25,acc50,knn10_err");
    for overrides in override_sets {
        let mut cfg = TrainConfig::unsupervised_mnist();
        cfg.apply_overrides(&overrides)?;
        let run = train_unsupervised(&fit, &cfg, |_| Ok(()))?;
        let mut plan = EvalPlan::new(vec![10, 25, 50], Some(10), cfg.seed);
        plan.knn_train_stride = stride;
        let reports = evaluate_unsupervised(&run.net, &cfg, "mnist", &fit, &val, &plan)?;
        let acc: Vec<String> = reports
            .iter()
            .map(|r| format!("{:.2}", r.cluster_accuracy_pct.unwrap_or(f64::NAN)))
            .collect();
        println!(
            "\"{overrides}\",{},{},{:.1},{},{:.2}",
            run.net.n_neurons(),
            run.net.frozen_count(),
            run.train_time_s,
            acc.join(","),
            reports[0].knn_error_pct.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
