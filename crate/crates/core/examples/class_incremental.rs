//! Supervised class-incremental learning on split MNIST (or split
//! CIFAR-10): classes arrive one at a time, each gets its own group of
//! neurons, and everything learned so far is frozen before the next class.
//!
//!     cargo run --release --example class_incremental
//!     cargo run --release --example class_incremental -- cifar10
//!
//! Prints accuracy per two-class task and checks that the rows learned for
//! the first class are bit-identical at the end of the run.

use hebbcl::config::TrainConfig;
use hebbcl::datasets::data_root;
use hebbcl::experiment::{run_supervised, DatasetKind};

fn main() -> hebbcl::Result<()> {
    let kind = DatasetKind::parse(&std::env::args().nth(1).unwrap_or_else(|| "mnist".into()))?;
    let cfg = match kind {
        DatasetKind::Cifar10 => TrainConfig::supervised_cifar10(),
        _ => TrainConfig::supervised_mnist(),
    };
    let (train, test) = kind.load(&data_root())?;

    let mut first_class = None;
    let (run, report) = run_supervised(&train, &test, &cfg, kind.name(), |class, net| {
        let rows: Vec<usize> = (0..net.n_neurons()).filter(|j| net.class_group(*j) == Some(0)).collect();
        let digest = net.rows_digest(rows);
        let first = *first_class.get_or_insert(digest);
        println!("after class {class}: {} neurons, class-0 rows unchanged: {}", net.n_neurons(), first == digest);
        Ok(())
    })?;

    for t in &report.per_task {
        println!("task {:?}: {:.2}% ({} samples)", t.classes, t.accuracy_pct, t.n_samples);
    }
    println!(
        "mean task accuracy {:.2}%, pooled {:.2}%, trained in {:.1}s",
        report.mean_task_accuracy_pct.unwrap_or(f64::NAN),
        report.overall_accuracy_pct,
        run.train_time_s
    );
    Ok(())
}
