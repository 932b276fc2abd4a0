mod common;

use std::collections::BTreeSet;

use hebbcl::config::{Ablation, FrozenWinnerPolicy, TrainConfig};
use hebbcl::datasets::{ImageShape, StreamSpec};
use hebbcl::experiment::train_unsupervised;
use hebbcl::kernels::{l1_norm, sq_dist};
use hebbcl::network::Network;
use hebbcl::unsupervised::{hebbian_step, normalize_updated, train_minibatch, train_stream};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Presenting one input over and over to a single neuron. Normalization
/// divides by the largest weight, so the fixed point is `x / max(x)`; the
/// normalized distance to it never grows from one presentation to the next.
#[test]
fn single_input_convergence() {
    for eps in [0.01f32, 0.1, 0.5] {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f32> = (0..25).map(|_| if rng.gen_bool(0.4) { rng.gen() } else { 0.0 }).collect();
            let m = x.iter().cloned().fold(0.0f32, f32::max);
            if m == 0.0 {
                continue;
            }
            let target: Vec<f32> = x.iter().map(|v| v / m).collect();
            let l1 = l1_norm(&target);
            let mut net = Network::new(25, 1, 0.01, seed).unwrap();
            let mut prev = f32::INFINITY;
            for i in 0..100 {
                hebbian_step(&mut net, &x, eps, FrozenWinnerPolicy::SkipUpdate).unwrap();
                normalize_updated(&mut net, &BTreeSet::from([0]));
                let d = sq_dist(net.row(0), &target) / l1;
                assert!(d <= prev + 1e-6, "eps {eps}, seed {seed}, step {i}: {d} > {prev}");
                prev = d;
            }
            assert!(prev < 1e-2 || eps < 0.05, "eps {eps}: ended at {prev}");
        }
    }
}

/// The mutated rows of a skip-update minibatch are exactly the winners
/// that were unfrozen when selected.
#[test]
fn skip_update_mutates_only_unfrozen_winners() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let d = 12;
    let mut net = Network::new(d, 10, 1.0, 2).unwrap();
    for j in [1, 4, 7] {
        net.freeze_neuron(j).unwrap();
    }
    let cfg = TrainConfig {
        epsilon: 0.2,
        frozen_winner_policy: FrozenWinnerPolicy::SkipUpdate,
        ablation: Ablation { freezing: false, expansion: false, ..Ablation::FULL },
        ..TrainConfig::default()
    };
    for _ in 0..50 {
        let batch: Vec<Vec<f32>> = (0..6).map(|_| common::random_vec(&mut rng, d)).collect();
        let refs: Vec<&[f32]> = batch.iter().map(Vec::as_slice).collect();

        // Oracle: replay winner selection on a scratch copy.
        let mut shadow = net.clone();
        let mut expected = BTreeSet::new();
        for x in &refs {
            let s = hebbian_step(&mut shadow, x, cfg.epsilon, cfg.frozen_winner_policy).unwrap();
            if s.updated {
                expected.insert(s.winner);
            }
        }
        let before: Vec<[u8; 32]> = (0..net.n_neurons()).map(|j| net.rows_digest([j])).collect();
        train_minibatch(&mut net, &refs, &cfg).unwrap();
        let changed: BTreeSet<usize> =
            (0..net.n_neurons()).filter(|j| net.rows_digest([*j]) != before[*j]).collect();
        assert!(changed.is_subset(&expected), "{changed:?} vs {expected:?}");
        // A touched row can only stay bit-identical if the update and the
        // normalization cancel exactly, which random data never does.
        assert_eq!(changed, expected);
    }
}

/// With expansion on and the cap far away, every minibatch adds exactly as
/// many rows as it freezes.
#[test]
fn growth_matches_freezing() {
    let ds = common::blobs(4, 60, ImageShape::new(1, 5, 5), 3);
    let cfg = TrainConfig {
        epsilon: 0.3,
        threshold: 0.3,
        batch_size: 8,
        initial_neurons: 20,
        max_neurons: 10_000,
        ..TrainConfig::default()
    };
    let mut net = Network::new(25, 20, 0.01, 1).unwrap();
    let stream = StreamSpec::natural(&ds, cfg.batch_size, 2).unwrap();
    let mut total_frozen = 0;
    for batch in stream.unlabeled() {
        let r0 = net.n_neurons();
        let s = train_minibatch(&mut net, &batch, &cfg).unwrap();
        assert_eq!((net.n_neurons() - r0) as u64, s.neurons_frozen_total);
        assert_eq!(s.expansions_refused, 0);
        total_frozen += s.neurons_frozen_total;
    }
    assert!(total_frozen > 0);
    assert_eq!(net.n_neurons() as u64, 20 + total_frozen);
}

/// Hitting the cap is reported, never an error.
#[test]
fn growth_cap_is_respected() {
    let ds = common::blobs(6, 40, ImageShape::new(1, 5, 5), 8);
    let cfg = TrainConfig {
        epsilon: 0.5,
        threshold: 0.5,
        batch_size: 4,
        initial_neurons: 4,
        max_neurons: 6,
        frozen_winner_policy: FrozenWinnerPolicy::ExcludeFromArgmax,
        ..TrainConfig::default()
    };
    let mut net = Network::new(25, 4, 0.01, 1).unwrap();
    let stream = StreamSpec::natural(&ds, cfg.batch_size, 2).unwrap();
    let stats = train_stream(&mut net, stream.unlabeled(), &cfg).unwrap();
    assert_eq!(net.n_neurons(), 6);
    assert!(stats.expansions_refused > 0);
    assert_eq!(stats.current_r, 6);
}

/// Training only ever sees features, so relabelling the dataset cannot
/// change the result.
#[test]
fn labels_are_never_consulted() {
    let ds = common::blobs(3, 30, ImageShape::new(1, 4, 4), 1);
    let cfg = TrainConfig { initial_neurons: 10, max_neurons: 100, threshold: 0.3, ..TrainConfig::default() };
    let stream = StreamSpec::natural(&ds, 8, 4).unwrap();
    let order = stream.order().to_vec();

    let run = |labels: Vec<u32>| {
        let relabeled = hebbcl::LabeledDataset::new(ds.features().to_vec(), labels, ds.shape(), 3).unwrap();
        let batches: Vec<Vec<&[f32]>> = order.chunks(8).map(|c| c.iter().map(|i| relabeled.sample(*i)).collect()).collect();
        let mut net = Network::new(16, 10, 0.01, 7).unwrap();
        train_stream(&mut net, batches, &cfg).unwrap();
        net.digest()
    };
    let scrambled: Vec<u32> = ds.labels().iter().map(|l| (l + 1) % 3).collect();
    assert_eq!(run(ds.labels().to_vec()), run(scrambled));
}

#[test]
fn full_runs_are_deterministic() {
    let ds = common::blobs(5, 40, ImageShape::new(1, 6, 6), 12);
    let cfg = TrainConfig {
        initial_neurons: 15,
        max_neurons: 60,
        threshold: 0.3,
        epsilon: 0.2,
        seed: 42,
        ..TrainConfig::default()
    };
    let a = train_unsupervised(&ds, &cfg, |_| Ok(())).unwrap();
    let b = train_unsupervised(&ds, &cfg, |_| Ok(())).unwrap();
    assert_eq!(a.net.digest(), b.net.digest());
    assert_eq!(a.stats, b.stats);
    let c = train_unsupervised(&ds, &TrainConfig { seed: 43, ..cfg }, |_| Ok(())).unwrap();
    assert_ne!(a.net.digest(), c.net.digest());
}

#[test]
fn all_switches_off_leaves_network_untouched() {
    let ds = common::blobs(2, 10, ImageShape::new(1, 3, 3), 0);
    let cfg = TrainConfig { ablation: Ablation::NONE, initial_neurons: 5, ..TrainConfig::default() };
    let mut net = Network::new(9, 5, 0.01, 0).unwrap();
    let before = net.digest();
    let stream = StreamSpec::natural(&ds, 4, 0).unwrap();
    let stats = train_stream(&mut net, stream.unlabeled(), &cfg).unwrap();
    assert_eq!(net.digest(), before);
    assert_eq!(stats.samples_seen, 20);
    assert_eq!(stats.neurons_frozen_total + stats.neurons_added_total, 0);
}
