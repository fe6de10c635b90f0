//! Exhaustive two-cluster search.

use super::geometry::{mean, Dist};

/// `Σ_i d(x_i, centroid)^2` with the dimension-normalized Euclidean distance.
pub fn sse(data: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<&[f64]> = data
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(x, _)| x.as_slice())
            .collect();
        if members.is_empty() {
            continue;
        }
        let m = mean(&members);
        total += members
            .iter()
            .map(|x| Dist::Euclidean.eval(x, &m).powi(2))
            .sum::<f64>();
    }
    total
}

/// Lowest SSE over all splits into two nonempty clusters.
pub fn best_two_split(data: &[Vec<f64>]) -> f64 {
    let n = data.len();
    assert!((2..=20).contains(&n));
    let mut best = f64::INFINITY;
    // Fixing point 0 in cluster 0 visits each split once.
    for mask in 1u32..(1 << (n - 1)) {
        let labels: Vec<usize> = (0..n)
            .map(|i| {
                if i == 0 {
                    0
                } else {
                    ((mask >> (i - 1)) & 1) as usize
                }
            })
            .collect();
        best = best.min(sse(data, &labels, 2));
    }
    best
}
