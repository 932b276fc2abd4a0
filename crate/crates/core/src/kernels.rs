//! Dense f32 inner loops shared by the trainers and the evaluation code.
//!
//! Products use eight independent lanes so the compiler can vectorize them;
//! reductions always run in the same order, which keeps every result
//! bit-reproducible for a given input.

const LANES: usize = 8;

#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f32; LANES];
    let chunks = a.len() / LANES;
    let (a_head, a_tail) = a.split_at(chunks * LANES);
    let (b_head, b_tail) = b.split_at(chunks * LANES);
    for (ca, cb) in a_head.chunks_exact(LANES).zip(b_head.chunks_exact(LANES)) {
        for l in 0..LANES {
            acc[l] += ca[l] * cb[l];
        }
    }
    let mut tail = 0.0f32;
    for (x, y) in a_tail.iter().zip(b_tail) {
        tail += x * y;
    }
    reduce(acc) + tail
}

/// Squared Euclidean distance, computed from the differences directly.
#[inline]
pub fn sq_dist(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f32; LANES];
    let chunks = a.len() / LANES;
    let (a_head, a_tail) = a.split_at(chunks * LANES);
    let (b_head, b_tail) = b.split_at(chunks * LANES);
    for (ca, cb) in a_head.chunks_exact(LANES).zip(b_head.chunks_exact(LANES)) {
        for l in 0..LANES {
            let d = ca[l] - cb[l];
            acc[l] += d * d;
        }
    }
    let mut tail = 0.0f32;
    for (x, y) in a_tail.iter().zip(b_tail) {
        let d = x - y;
        tail += d * d;
    }
    reduce(acc) + tail
}

#[inline]
pub fn l1_norm(a: &[f32]) -> f32 {
    a.iter().map(|v| v.abs()).sum()
}

#[inline]
fn reduce(acc: [f32; LANES]) -> f32 {
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]))
}

/// Index of the largest value; the lowest index wins ties. `None` for an
/// empty iterator or when every candidate is NaN.
pub fn argmax_lowest<I>(values: I) -> Option<usize>
where
    I: IntoIterator<Item = (usize, f32)>,
{
    let mut best: Option<(usize, f32)> = None;
    for (i, v) in values {
        if v.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive_sum() {
        let a: Vec<f32> = (0..37).map(|i| (i as f32 * 0.37).sin()).collect();
        let b: Vec<f32> = (0..37).map(|i| (i as f32 * 0.11).cos()).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| *x as f64 * *y as f64).sum();
        assert!((dot(&a, &b) as f64 - naive).abs() < 1e-5);
        let sq: f64 = a.iter().zip(&b).map(|(x, y)| ((*x - *y) as f64).powi(2)).sum();
        assert!((sq_dist(&a, &b) as f64 - sq).abs() < 1e-5);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        let v = [1.0, 3.0, 3.0, 2.0];
        assert_eq!(argmax_lowest(v.iter().copied().enumerate()), Some(1));
        assert_eq!(argmax_lowest(std::iter::empty()), None);
    }
}
