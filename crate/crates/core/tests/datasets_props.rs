mod common;

use hebbcl::datasets::{load_mnist_dir, ImageShape, StreamSpec};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Every sample is streamed exactly once, classes arrive as contiguous
    /// runs in the requested order, and batches never exceed the size.
    #[test]
    fn stream_is_a_class_ordered_permutation(
        n_classes in 1u32..6,
        per_class in 1usize..15,
        batch in 1usize..10,
        seed in any::<u64>(),
    ) {
        let ds = common::blobs(n_classes, per_class, ImageShape::new(1, 2, 2), seed);
        let mut order: Vec<u32> = (0..n_classes).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let stream = StreamSpec::new(&ds, &order, batch, seed).unwrap();

        let batches: Vec<_> = stream.labeled().collect();
        let total: usize = batches.iter().map(|b| b.samples.len()).sum();
        prop_assert_eq!(total, ds.len());
        prop_assert!(batches.iter().all(|b| !b.samples.is_empty() && b.samples.len() <= batch));

        let mut idx = stream.order().to_vec();
        idx.sort_unstable();
        prop_assert_eq!(idx, (0..ds.len()).collect::<Vec<_>>());

        let mut streamed: Vec<Vec<u32>> = batches
            .iter()
            .flat_map(|b| b.samples.iter().zip(&b.labels).map(|(s, l)| {
                let mut key: Vec<u32> = s.iter().map(|v| v.to_bits()).collect();
                key.push(*l);
                key
            }))
            .collect();
        let mut original: Vec<Vec<u32>> = (0..ds.len())
            .map(|i| {
                let mut key: Vec<u32> = ds.sample(i).iter().map(|v| v.to_bits()).collect();
                key.push(ds.labels()[i]);
                key
            })
            .collect();
        streamed.sort();
        original.sort();
        prop_assert_eq!(streamed, original);

        let labels: Vec<u32> = batches.iter().flat_map(|b| b.labels.iter().copied()).collect();
        let mut runs = labels.clone();
        runs.dedup();
        prop_assert_eq!(&runs, &order);

        let again: Vec<usize> = StreamSpec::new(&ds, &order, batch, seed).unwrap().order().to_vec();
        prop_assert_eq!(again, stream.order().to_vec());
    }
}

#[test]
fn loading_the_same_files_twice_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let shape = ImageShape::new(1, 28, 28);
    common::write_mnist(dir.path(), &common::blobs(10, 6, shape, 1), &common::blobs(10, 2, shape, 2));
    let (a_train, a_test) = load_mnist_dir(dir.path().join("mnist")).unwrap();
    let (b_train, b_test) = load_mnist_dir(dir.path().join("mnist")).unwrap();
    assert_eq!(a_train, b_train);
    assert_eq!(a_test, b_test);
    assert_eq!(a_train.len(), 60);
    assert!(a_train.features().iter().all(|v| (0.0..=1.0).contains(v)));
    // Pixels round-trip through bytes as k/255.
    assert!(a_train.features().iter().all(|v| ((v * 255.0).round() - v * 255.0).abs() < 1e-4));
}
