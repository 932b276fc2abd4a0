//! Grid search for the supervised trainer on a validation split carved out
//! of the MNIST training set. The test set is never touched.
//!
//!     cargo run --release --example tune_supervised
//!     cargo run --release --example tune_supervised -- "eps=0.05,epochs=3" "eps=0.1,epochs=1"
//!
//! Each argument is a comma-separated list of config overrides; without
//! arguments a small built-in grid runs. Every trained network is scored
//! with several inference rules.

use hebbcl::config::{InferenceScore, TrainConfig};
use hebbcl::datasets::data_root;
use hebbcl::experiment::{run_supervised, DatasetKind};
use hebbcl::supervised::{evaluate_accuracy, split_tasks};

fn main() -> hebbcl::Result<()> {
    let (train, _) = DatasetKind::Mnist.load(&data_root())?;
    let (fit, val) = train.split_validation(10_000, 7)?;

    let mut override_sets: Vec<String> = std::env::args().skip(1).collect();
    if override_sets.is_empty() {
        for eps in ["0.02", "0.05", "0.1", "0.2"] {
            for epochs in ["1", "3"] {
                override_sets.push(format!("eps={eps},epochs={epochs}"));
            }
        }
    }
    let scores = [
        InferenceScore::Raw,
        InferenceScore::Kwta(3),
        InferenceScore::Cosine(1),
        InferenceScore::Cosine(3),
        InferenceScore::Cosine(5),
        InferenceScore::Cosine(10),
    ];
    let tasks = split_tasks(&fit.present_classes(), 2);

    println!("overrides,{}", scores.map(|s| s.to_string()).join(","));
    for overrides in override_sets {
        let mut cfg = TrainConfig::supervised_mnist();
        cfg.apply_overrides(&overrides)?;
        let (run, _) = run_supervised(&fit, &val, &cfg, "mnist", |_, _| Ok(()))?;
        let mut row = vec![format!("\"{overrides}\"")];
        for s in scores {
            let r = evaluate_accuracy(&run.net, &val, Some(&tasks), s)?;
            row.push(format!("{:.2}", r.mean_task_accuracy_pct.unwrap_or(r.overall_accuracy_pct)));
        }
        println!("{}", row.join(","));
    }
    Ok(())
}
