//! Command-line front end. `run` parses arguments, executes one
//! subcommand and returns the process exit code: 0 on success, 1 on a
//! runtime failure, 2 on a usage or configuration error.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{Ablation, TrainConfig};
use crate::datasets::{self, ImageShape};
use crate::error::{HebbError, Result};
use crate::evaluation::EvalReport;
use crate::experiment::{evaluate_unsupervised, run_supervised, train_unsupervised, DatasetKind, EvalPlan};
use crate::network::Network;
use crate::supervised::{evaluate_accuracy, split_tasks};
use crate::visualization::{render_grid, Annotate};

#[derive(Debug, Parser)]
#[command(name = "hebbcl", version, about = "Hebbian continual learning on a single wide layer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train without labels on a class-incremental stream, then evaluate.
    TrainUnsup(TrainUnsupArgs),
    /// Train one class at a time with labels, then report accuracy.
    TrainSup(TrainSupArgs),
    /// Evaluate a saved checkpoint.
    Eval(EvalArgs),
    /// Render a checkpoint's weights as an image grid.
    Visualize(VisualizeArgs),
    /// Train and evaluate one network per ablation variant; emits CSV.
    Ablate(AblateArgs),
}

/// Flags shared by every training subcommand. Precedence: preset, then
/// `--config` file, then `--set`, then the named flags.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// Dataset name: mnist, cifar10 or omniglot.
    #[arg(long, default_value = "mnist")]
    dataset: String,
    /// Data root; defaults to $HEBBCL_DATA_ROOT, then ./data.
    #[arg(long)]
    data_root: Option<PathBuf>,
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    neurons: Option<usize>,
    #[arg(long)]
    eps: Option<f32>,
    #[arg(long)]
    threshold: Option<f32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    max_neurons: Option<usize>,
    /// Ablation tag (`HF-K`) or list (`no-freeze,no-expand`).
    #[arg(long)]
    ablate: Option<String>,
}

#[derive(Debug, Args)]
struct TrainUnsupArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Output directory for checkpoint, config echo and report.
    #[arg(long, default_value = "runs/unsup")]
    out: PathBuf,
    /// JSON-lines file receiving one stats record per minibatch.
    #[arg(long)]
    stats_log: Option<PathBuf>,
    /// Cluster counts to evaluate (repeatable); defaults per dataset.
    #[arg(long)]
    clusters: Vec<usize>,
    /// Neighbours for the k-NN error.
    #[arg(long, default_value_t = 10)]
    knn: usize,
    /// Skip evaluation after training.
    #[arg(long)]
    no_eval: bool,
}

#[derive(Debug, Args)]
struct TrainSupArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long)]
    neurons_per_class: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Class scoring: raw, kwta:<k> or cosine:<k>.
    #[arg(long)]
    inference: Option<String>,
    #[arg(long, default_value = "runs/sup")]
    out: PathBuf,
    /// JSON-lines file receiving one stats record per class.
    #[arg(long)]
    stats_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value = "mnist")]
    dataset: String,
    #[arg(long)]
    data_root: Option<PathBuf>,
    /// Config the checkpoint was trained with (its `config.txt` echo);
    /// supplies k and the ablation switches.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Cluster counts (repeatable); defaults per dataset.
    #[arg(long)]
    clusters: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    knn: usize,
    /// Fit k-means on training codes and assign test codes to it.
    #[arg(long)]
    fit_on_train: bool,
    /// Report class-incremental accuracy instead (supervised checkpoints).
    #[arg(long)]
    accuracy: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VisualizeArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Tile shape: mnist, cifar10, omniglot or CxHxW.
    #[arg(long, default_value = "mnist")]
    shape: String,
    /// Output path; `.ppm` is always written, `.png` too.
    #[arg(long, default_value = "weights.ppm")]
    out: PathBuf,
    /// Tiles per row; defaults to a near-square grid.
    #[arg(long)]
    cols: Option<usize>,
    /// none, frozen or class.
    #[arg(long, default_value = "none")]
    annotate: String,
}

#[derive(Debug, Args)]
struct AblateArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Comma-separated variant tags; defaults to the five table rows. An
    /// empty string yields a header-only CSV.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_values_t = vec![10])]
    clusters: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    knn: usize,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point used by the binary; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// 2 for problems the user can fix by changing the invocation, else 1.
pub fn exit_code(e: &HebbError) -> i32 {
    match e {
        HebbError::Config { .. } | HebbError::MissingData(_) => 2,
        _ => 1,
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::TrainUnsup(a) => train_unsup(a),
        Command::TrainSup(a) => train_sup(a),
        Command::Eval(a) => eval(a),
        Command::Visualize(a) => visualize(a),
        Command::Ablate(a) => ablate(a),
    }
}

fn preset(kind: DatasetKind, supervised: bool) -> TrainConfig {
    match (kind, supervised) {
        (DatasetKind::Omniglot, false) => TrainConfig::unsupervised_omniglot(),
        (_, false) => TrainConfig::unsupervised_mnist(),
        (DatasetKind::Cifar10, true) => TrainConfig::supervised_cifar10(),
        (_, true) => TrainConfig::supervised_mnist(),
    }
}

fn default_clusters(kind: DatasetKind) -> Vec<usize> {
    match kind {
        DatasetKind::Omniglot => vec![50, 100],
        _ => vec![25, 50],
    }
}

/// Layers a config file over `cfg`; an unreadable file is a usage error.
fn apply_file(cfg: &mut TrainConfig, path: &Path) -> Result<()> {
    cfg.apply_kv_file(path).map_err(|e| match e {
        HebbError::Io(io) => HebbError::config("config", format!("{}: {io}", path.display())),
        e => e,
    })
}

fn apply_sets(cfg: &mut TrainConfig, sets: &[String]) -> Result<()> {
    sets.iter().try_for_each(|s| cfg.apply_overrides(s))
}

impl ConfigArgs {
    fn resolve(&self, supervised: bool) -> Result<(DatasetKind, TrainConfig)> {
        let kind = DatasetKind::parse(&self.dataset)?;
        let mut cfg = preset(kind, supervised);
        if let Some(path) = &self.config {
            apply_file(&mut cfg, path)?;
        }
        apply_sets(&mut cfg, &self.set)?;
        if let Some(v) = self.neurons {
            cfg.initial_neurons = v;
        }
        if let Some(v) = self.eps {
            cfg.epsilon = v;
        }
        if let Some(v) = self.threshold {
            cfg.threshold = v;
        }
        if let Some(v) = self.k {
            cfg.k_winners = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.max_neurons {
            cfg.max_neurons = v;
        }
        if let Some(v) = &self.ablate {
            cfg.ablation = Ablation::parse(v)?;
        }
        cfg.validate()?;
        Ok((kind, cfg))
    }

    fn root(&self) -> PathBuf {
        self.data_root.clone().unwrap_or_else(datasets::data_root)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Writes the resolved config next to the run's other outputs and echoes
/// it to stderr.
fn echo_config(out: &Path, cfg: &TrainConfig) -> Result<()> {
    let text = cfg.to_kv();
    fs::write(out.join("config.txt"), &text)?;
    eprint!("resolved config:\n{text}");
    Ok(())
}

fn jsonl_writer(path: &Option<PathBuf>) -> Result<Option<BufWriter<fs::File>>> {
    path.as_ref()
        .map(|p| Ok(BufWriter::new(fs::File::create(p)?)))
        .transpose()
}

fn train_unsup(a: TrainUnsupArgs) -> Result<()> {
    let (kind, cfg) = a.cfg.resolve(false)?;
    let (train, test) = kind.load(&a.cfg.root())?;
    create_dir(&a.out)?;
    echo_config(&a.out, &cfg)?;

    let mut log = jsonl_writer(&a.stats_log)?;
    let mut batch = 0u64;
    let run = train_unsupervised(&train, &cfg, |delta| {
        batch += 1;
        if let Some(w) = log.as_mut() {
            let mut rec = serde_json::to_value(delta)?;
            rec["batch"] = batch.into();
            writeln!(w, "{rec}")?;
        }
        Ok(())
    })?;
    if let Some(mut w) = log {
        w.flush()?;
    }
    run.net.save_checkpoint(a.out.join("checkpoint.hbcl"))?;
    eprintln!(
        "trained in {:.1}s: R = {}, frozen = {}, added = {}, refused = {}",
        run.train_time_s,
        run.net.n_neurons(),
        run.net.frozen_count(),
        run.stats.neurons_added_total,
        run.stats.expansions_refused
    );
    if a.no_eval {
        return Ok(());
    }
    let clusters = if a.clusters.is_empty() { default_clusters(kind) } else { a.clusters };
    let plan = EvalPlan::new(clusters, Some(a.knn), cfg.seed);
    let reports = evaluate_unsupervised(&run.net, &cfg, kind.name(), &train, &test, &plan)?;
    write_eval_reports(&a.out.join("report.json"), &reports)?;
    print_eval_summary(&reports);
    Ok(())
}

fn write_eval_reports(path: &Path, reports: &[EvalReport]) -> Result<()> {
    let f = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(f, reports)?;
    Ok(())
}

fn print_eval_summary(reports: &[EvalReport]) {
    for r in reports {
        let acc = r.cluster_accuracy_pct.map(|v| format!("{v:.2}%")).unwrap_or("-".into());
        let knn = r.knn_error_pct.map(|v| format!("{v:.2}%")).unwrap_or("-".into());
        let nc = r.n_clusters.map(|v| v.to_string()).unwrap_or("-".into());
        println!("{}: clusters {nc}: accuracy {acc}; {}-NN error {knn}", r.dataset, r.knn_k.unwrap_or(0));
    }
}

fn train_sup(a: TrainSupArgs) -> Result<()> {
    let (kind, mut cfg) = a.cfg.resolve(true)?;
    if kind == DatasetKind::Omniglot {
        return Err(HebbError::config("dataset", "supervised training supports mnist and cifar10"));
    }
    if let Some(v) = a.neurons_per_class {
        cfg.neurons_per_class = v;
        cfg.initial_neurons = v;
        cfg.max_neurons = cfg.max_neurons.max(v * 11);
    }
    if let Some(v) = a.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = &a.inference {
        cfg.inference = v.parse()?;
    }
    cfg.validate()?;
    let (train, test) = kind.load(&a.cfg.root())?;
    create_dir(&a.out)?;
    echo_config(&a.out, &cfg)?;

    let mut log = jsonl_writer(&a.stats_log)?;
    let (run, report) = run_supervised(&train, &test, &cfg, kind.name(), |class, net| {
        if let Some(w) = log.as_mut() {
            let rec = serde_json::json!({
                "class": class,
                "current_r": net.n_neurons(),
                "frozen": net.frozen_count(),
            });
            writeln!(w, "{rec}")?;
        }
        Ok(())
    })?;
    if let Some(mut w) = log {
        w.flush()?;
    }
    run.net.save_checkpoint(a.out.join("checkpoint.hbcl"))?;
    fs::write(a.out.join("report.json"), report.to_json()?)?;
    for t in &report.per_task {
        println!("task {:?}: {:.2}%", t.classes, t.accuracy_pct);
    }
    println!(
        "{}: accuracy {:.2}% (mean over tasks {:.2}%)",
        report.dataset,
        report.overall_accuracy_pct,
        report.mean_task_accuracy_pct.unwrap_or(report.overall_accuracy_pct)
    );
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let kind = DatasetKind::parse(&a.dataset)?;
    let mut cfg = preset(kind, a.accuracy);
    if let Some(path) = &a.config {
        apply_file(&mut cfg, path)?;
    }
    apply_sets(&mut cfg, &a.set)?;
    cfg.validate()?;
    let net = Network::load_checkpoint(&a.checkpoint)?;
    let root = a.data_root.clone().unwrap_or_else(datasets::data_root);
    let (train, test) = kind.load(&root)?;
    if net.input_dim() != test.dim() {
        return Err(HebbError::invalid(format!(
            "checkpoint expects inputs of length {}, {} has {}",
            net.input_dim(),
            kind.name(),
            test.dim()
        )));
    }
    let json = if a.accuracy {
        let tasks = split_tasks(&test.present_classes(), 2);
        let mut r = evaluate_accuracy(&net, &test, Some(&tasks), cfg.inference)?;
        r.dataset = kind.name().into();
        r.config = Some(cfg.clone());
        r.seed = cfg.seed;
        println!("{}: accuracy {:.2}%", r.dataset, r.overall_accuracy_pct);
        r.to_json()?
    } else {
        let clusters = if a.clusters.is_empty() { default_clusters(kind) } else { a.clusters.clone() };
        let mut plan = EvalPlan::new(clusters, Some(a.knn), cfg.seed);
        plan.fit_on_train = a.fit_on_train;
        let reports = evaluate_unsupervised(&net, &cfg, kind.name(), &train, &test, &plan)?;
        if a.out.is_some() {
            print_eval_summary(&reports);
        }
        serde_json::to_string_pretty(&reports)?
    };
    match &a.out {
        Some(p) => fs::write(p, json)?,
        None => println!("{json}"),
    }
    Ok(())
}

/// `mnist`, `cifar10`, `omniglot` or an explicit `CxHxW`.
pub fn parse_shape(s: &str) -> Result<ImageShape> {
    match s {
        "mnist" => return Ok(ImageShape::MNIST),
        "cifar10" | "cifar" => return Ok(ImageShape::CIFAR10),
        "omniglot" => return Ok(ImageShape::OMNIGLOT),
        _ => {}
    }
    let dims: Vec<usize> = s
        .split('x')
        .map(|p| p.parse().map_err(|_| HebbError::config("shape", format!("cannot parse `{s}`"))))
        .collect::<Result<_>>()?;
    match dims[..] {
        [c, h, w] if c > 0 && h > 0 && w > 0 => Ok(ImageShape::new(c, h, w)),
        _ => Err(HebbError::config("shape", format!("expected CxHxW, got `{s}`"))),
    }
}

fn visualize(a: VisualizeArgs) -> Result<()> {
    let shape = parse_shape(&a.shape)?;
    let annotate: Annotate = a.annotate.parse()?;
    let net = Network::load_checkpoint(&a.checkpoint)?;
    if net.input_dim() != shape.len() {
        return Err(HebbError::config(
            "shape",
            format!("{} has {} values, checkpoint rows have {}", a.shape, shape.len(), net.input_dim()),
        ));
    }
    let cols = a
        .cols
        .unwrap_or_else(|| (net.n_neurons() as f64).sqrt().ceil().max(1.0) as usize);
    let img = render_grid(&net, shape, cols, annotate)?;
    let ppm = a.out.with_extension("ppm");
    let png = a.out.with_extension("png");
    img.save_ppm(&ppm)?;
    img.save_png(&png)?;
    println!("wrote {} and {} ({}x{})", ppm.display(), png.display(), img.width, img.height);
    Ok(())
}

fn ablate(a: AblateArgs) -> Result<()> {
    let (kind, base) = a.cfg.resolve(false)?;
    let grid: Vec<Ablation> = match &a.grid {
        None => Ablation::TABLE.to_vec(),
        Some(g) => g
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(Ablation::parse)
            .collect::<Result<_>>()?,
    };
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "{}", EvalReport::CSV_HEADER)?;
    if grid.is_empty() {
        out.flush()?;
        return Ok(());
    }
    let (train, test) = kind.load(&a.cfg.root())?;
    for ablation in grid {
        let cfg = TrainConfig { ablation, ..base.clone() };
        let run = train_unsupervised(&train, &cfg, |_| Ok(()))?;
        let plan = EvalPlan::new(a.clusters.clone(), Some(a.knn), cfg.seed);
        for r in evaluate_unsupervised(&run.net, &cfg, kind.name(), &train, &test, &plan)? {
            writeln!(out, "{}", r.csv_row())?;
        }
        out.flush()?;
    }
    Ok(())
}
