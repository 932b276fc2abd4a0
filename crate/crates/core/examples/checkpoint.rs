//! Saves a network to the binary checkpoint format, reads it back and
//! shows that weights, frozen flags and class groups survive bit for bit.
//! Needs no data.
//!
//!     cargo run --example checkpoint

use hebbcl::config::TrainConfig;
use hebbcl::network::Network;
use hebbcl::supervised::{train_sequence, ClassSchedule};

fn hex(d: [u8; 32]) -> String {
    d.iter().map(|b| format!("{b:02x}")).collect()
}

fn main() -> hebbcl::Result<()> {
    let cfg = TrainConfig {
        neurons_per_class: 2,
        initial_neurons: 2,
        max_neurons: 16,
        ..TrainConfig::supervised_mnist()
    };
    let a = [1.0f32, 0.8, 0.0, 0.0];
    let b = [0.0f32, 0.1, 0.9, 1.0];
    let schedule = ClassSchedule::new(vec![(0, vec![&a[..]]), (1, vec![&b[..]])])?;
    let mut net = Network::new(4, 2, cfg.init_scale, 5)?;
    train_sequence(&mut net, &schedule, &cfg)?;

    let path = std::env::temp_dir().join("hebbcl-example.hbcl");
    net.save_checkpoint(&path)?;
    let back = Network::load_checkpoint(&path)?;
    println!("saved   {}", hex(net.digest()));
    println!("loaded  {}", hex(back.digest()));
    println!("groups  {:?}", back.class_groups());
    println!("frozen  {:?}", back.frozen());
    assert_eq!(net, back);
    std::fs::remove_file(path)?;
    Ok(())
}
