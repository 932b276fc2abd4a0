//! Renders every neuron of a network as a tile, frozen neurons outlined in
//! red. Uses a checkpoint when given one; otherwise trains a small network
//! on synthetic strokes so the example runs without any dataset.
//!
//!     cargo run --release --example visualize
//!     cargo run --release --example visualize -- unsupervised.hbcl mnist
//!
//! Writes `weights.ppm` and `weights.png`.

use hebbcl::cli::parse_shape;
use hebbcl::config::TrainConfig;
use hebbcl::datasets::{ImageShape, LabeledDataset};
use hebbcl::experiment::train_unsupervised;
use hebbcl::network::Network;
use hebbcl::visualization::{render_grid, Annotate};

/// Horizontal and vertical bars on a 12x12 canvas, one class per position.
fn bars() -> hebbcl::Result<LabeledDataset> {
    let shape = ImageShape::new(1, 12, 12);
    let mut feats = Vec::new();
    let mut labels = Vec::new();
    for (c, (horizontal, pos)) in [(true, 3), (true, 8), (false, 2), (false, 9)].into_iter().enumerate() {
        for jitter in 0..30 {
            let p = pos + jitter % 3 - 1;
            for y in 0..12 {
                for x in 0..12 {
                    let on = if horizontal { y == p } else { x == p };
                    feats.push(if on { 1.0 } else { 0.0 });
                }
            }
            labels.push(c as u32);
        }
    }
    LabeledDataset::new(feats, labels, shape, 4)
}

fn main() -> hebbcl::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (net, shape) = match args.first() {
        Some(path) => (
            Network::load_checkpoint(path)?,
            parse_shape(args.get(1).map(String::as_str).unwrap_or("mnist"))?,
        ),
        None => {
            let ds = bars()?;
            let cfg = TrainConfig {
                initial_neurons: 8,
                max_neurons: 24,
                batch_size: 10,
                ..TrainConfig::unsupervised_mnist()
            };
            (train_unsupervised(&ds, &cfg, |_| Ok(()))?.net, ds.shape())
        }
    };
    let cols = (net.n_neurons() as f64).sqrt().ceil() as usize;
    let img = render_grid(&net, shape, cols, Annotate::Frozen)?;
    img.save_ppm("weights.ppm")?;
    img.save_png("weights.png")?;
    println!(
        "{} neurons ({} frozen) -> weights.ppm / weights.png, {}x{} pixels",
        net.n_neurons(),
        net.frozen_count(),
        img.width,
        img.height
    );
    Ok(())
}
