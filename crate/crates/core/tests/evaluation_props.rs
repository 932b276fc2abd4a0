use std::collections::BTreeMap;

use hebbcl::evaluation::{cluster_accuracy, kmeans, knn_error, knn_predict, KMeansOptions, Representations};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f32>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen_range(-5.0f32..5.0)).collect()).collect()
}

/// Best within-cluster SSE over every assignment of `pts` to `k` non-empty
/// clusters.
fn exhaustive_sse(pts: &[Vec<f32>], k: usize) -> f64 {
    let n = pts.len();
    let d = pts[0].len();
    let mut best = f64::INFINITY;
    let mut labels = vec![0usize; n];
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for l in labels.iter_mut() {
            *l = c % k;
            c /= k;
        }
        let mut count = vec![0usize; k];
        let mut sum = vec![0.0f64; k * d];
        let mut sq = vec![0.0f64; k];
        for (p, l) in pts.iter().zip(&labels) {
            count[*l] += 1;
            for (j, v) in p.iter().enumerate() {
                sum[l * d + j] += *v as f64;
                sq[*l] += (*v as f64) * (*v as f64);
            }
        }
        if count.contains(&0) {
            continue;
        }
        let sse: f64 = (0..k)
            .map(|c| sq[c] - sum[c * d..(c + 1) * d].iter().map(|s| s * s).sum::<f64>() / count[c] as f64)
            .sum();
        best = best.min(sse);
    }
    best
}

#[test]
fn kmeans_sse_never_increases() {
    for seed in 0..30 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = points(&mut rng, 200, 4);
        let reps = Representations::from_rows(&pts, 4);
        let km = kmeans(&reps, &KMeansOptions::new(1 + (seed as usize % 8), seed)).unwrap();
        for w in km.sse_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-9, "seed {seed}: {:?}", km.sse_history);
        }
    }
}

#[test]
fn kmeans_is_near_optimal_on_tiny_instances() {
    for (n, k) in [(12usize, 3usize), (10, 2)] {
        let mut good = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let pts = points(&mut rng, n, 2);
            let opt = exhaustive_sse(&pts, k);
            let km = kmeans(&Representations::from_rows(&pts, 2), &KMeansOptions::new(k, seed)).unwrap();
            assert!(km.sse() >= opt - 1e-6 * opt.max(1.0), "below the optimum?");
            if km.sse() <= opt * 1.05 + 1e-9 {
                good += 1;
            }
        }
        assert!(good >= 95, "n={n} k={k}: only {good}/100 within 5%");
    }
}

fn majority_oracle(assign: &[usize], labels: &[u32]) -> f64 {
    let mut clusters: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for (a, l) in assign.iter().zip(labels) {
        clusters.entry(*a).or_default().push(*l);
    }
    let mut correct = 0;
    for members in clusters.values() {
        let mut best = (usize::MAX, 0usize);
        for l in members {
            let c = members.iter().filter(|m| *m == l).count();
            if c > best.1 || (c == best.1 && (*l as usize) < best.0) {
                best = (*l as usize, c);
            }
        }
        correct += best.1;
    }
    100.0 * correct as f64 / labels.len() as f64
}

#[test]
fn cluster_accuracy_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n = rng.gen_range(1..60);
        let assign: Vec<usize> = (0..n).map(|_| rng.gen_range(0..6)).collect();
        let labels: Vec<u32> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let got = cluster_accuracy(&assign, &labels).unwrap();
        assert!((got - majority_oracle(&assign, &labels)).abs() < 1e-9);

        // Renaming cluster ids changes nothing.
        let renamed: Vec<usize> = assign.iter().map(|a| (a * 7 + 3) % 11 + 100).collect();
        assert_eq!(cluster_accuracy(&renamed, &labels).unwrap(), got);

        // Singletons are always pure.
        let singletons: Vec<usize> = (0..n).collect();
        assert_eq!(cluster_accuracy(&singletons, &labels).unwrap(), 100.0);
    }
}

/// All-pairs k-NN: distance ties to the lower index, vote ties to the
/// smaller label.
fn knn_oracle(train: &[Vec<f32>], labels: &[u32], test: &[Vec<f32>], k: usize) -> Vec<u32> {
    test.iter()
        .map(|q| {
            let mut d: Vec<(f64, usize)> = train
                .iter()
                .enumerate()
                .map(|(i, t)| (t.iter().zip(q).map(|(a, b)| ((*a - *b) as f64).powi(2)).sum(), i))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes: BTreeMap<u32, usize> = BTreeMap::new();
            for (_, i) in &d[..k] {
                *votes.entry(labels[*i]).or_default() += 1;
            }
            let top = *votes.values().max().unwrap();
            *votes.iter().find(|(_, c)| **c == top).unwrap().0
        })
        .collect()
}

#[test]
fn knn_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for inst in 0..100 {
        let d = 12;
        // Alternate between dense real-valued rows and sparse small-integer
        // rows; the latter produce exact distance ties and use the sparse
        // index path.
        let gen = |rng: &mut ChaCha8Rng| -> Vec<f32> {
            if inst % 2 == 0 {
                (0..d).map(|_| rng.gen_range(0.0f32..1.0)).collect()
            } else {
                (0..d).map(|_| if rng.gen_bool(0.15) { rng.gen_range(1..3) as f32 } else { 0.0 }).collect()
            }
        };
        let train: Vec<Vec<f32>> = (0..30).map(|_| gen(&mut rng)).collect();
        let test: Vec<Vec<f32>> = (0..10).map(|_| gen(&mut rng)).collect();
        let labels: Vec<u32> = (0..30).map(|_| rng.gen_range(0..4)).collect();
        let test_labels: Vec<u32> = (0..10).map(|_| rng.gen_range(0..4)).collect();
        let k = [1, 3, 5][inst % 3];

        let tr = Representations::from_rows(&train, d);
        let te = Representations::from_rows(&test, d);
        let expected = knn_oracle(&train, &labels, &test, k);
        assert_eq!(knn_predict(&tr, &labels, &te, k).unwrap(), expected, "instance {inst}");
        let wrong = expected.iter().zip(&test_labels).filter(|(p, l)| p != l).count();
        let err = knn_error(&tr, &labels, &te, &test_labels, k).unwrap();
        assert!((err - 10.0 * wrong as f64).abs() < 1e-9);
    }
}

/// Random orthogonal matrix from Gram-Schmidt on Gaussian-ish columns.
fn rotation(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for u in &q {
            let p: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-3 {
            q.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    q
}

#[test]
fn knn_error_is_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let d = 6;
        let train: Vec<Vec<f32>> = (0..40).map(|_| (0..d).map(|_| rng.gen()).collect()).collect();
        let test: Vec<Vec<f32>> = (0..15).map(|_| (0..d).map(|_| rng.gen()).collect()).collect();
        let labels: Vec<u32> = (0..40).map(|_| rng.gen_range(0..3)).collect();
        let test_labels: Vec<u32> = (0..15).map(|_| rng.gen_range(0..3)).collect();
        let q = rotation(&mut rng, d);
        let rot = |v: &Vec<f32>| -> Vec<f32> {
            q.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * *b as f64).sum::<f64>() as f32).collect()
        };
        let rt: Vec<Vec<f32>> = train.iter().map(rot).collect();
        let rs: Vec<Vec<f32>> = test.iter().map(rot).collect();
        let e1 = knn_error(&Representations::from_rows(&train, d), &labels, &Representations::from_rows(&test, d), &test_labels, 5).unwrap();
        let e2 = knn_error(&Representations::from_rows(&rt, d), &labels, &Representations::from_rows(&rs, d), &test_labels, 5).unwrap();
        assert!((e1 - e2).abs() <= 1e-3, "{e1} vs {e2}");
    }
}

#[test]
fn knn_with_uniform_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let train: Vec<Vec<f32>> = (0..20).map(|_| vec![rng.gen(), rng.gen()]).collect();
    let test: Vec<Vec<f32>> = (0..8).map(|_| vec![rng.gen(), rng.gen()]).collect();
    let test_labels = [2, 2, 1, 2, 0, 2, 2, 2];
    let err = knn_error(
        &Representations::from_rows(&train, 2),
        &[2; 20],
        &Representations::from_rows(&test, 2),
        &test_labels,
        10,
    )
    .unwrap();
    assert_eq!(err, 25.0);
}
