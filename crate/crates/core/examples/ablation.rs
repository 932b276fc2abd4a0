//! Switches the four mechanisms (Hebbian update, freezing, expansion,
//! k-winners coding) on and off and compares cluster accuracy at 10
//! clusters on MNIST.
//!
//!     cargo run --release --example ablation
//!     cargo run --release --example ablation -- HFEK HF-K
//!
//! Variant tags list the enabled mechanisms in order, `-` for a disabled one.

use hebbcl::config::{Ablation, TrainConfig};
use hebbcl::datasets::data_root;
use hebbcl::experiment::{evaluate_unsupervised, train_unsupervised, DatasetKind, EvalPlan};

fn main() -> hebbcl::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let grid: Vec<Ablation> = if args.is_empty() {
        Ablation::TABLE.to_vec()
    } else {
        args.iter().map(|a| Ablation::parse(a)).collect::<hebbcl::Result<_>>()?
    };
    let (train, test) = DatasetKind::Mnist.load(&data_root())?;
    let base = TrainConfig::unsupervised_mnist();

    println!("variant  neurons  accuracy@10");
    for ablation in grid {
        let cfg = TrainConfig { ablation, ..base.clone() };
        let run = train_unsupervised(&train, &cfg, |_| Ok(()))?;
        let plan = EvalPlan::new(vec![10], None, cfg.seed);
        let r = &evaluate_unsupervised(&run.net, &cfg, "mnist", &train, &test, &plan)?[0];
        println!("{:<8} {:>7}  {:>10.2}%", ablation.tag(), r.final_r, r.cluster_accuracy_pct.unwrap_or(f64::NAN));
    }
    Ok(())
}
