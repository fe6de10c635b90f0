//! Distances written straight from their definitions, in `f64` only.

#[derive(Clone, Copy, Debug)]
pub enum Dist {
    Euclidean,
    Minkowski(f64),
    Cosine,
}

impl Dist {
    pub fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), y.len());
        let h = x.len() as f64;
        match self {
            Dist::Euclidean => {
                (x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / h).sqrt()
            }
            Dist::Minkowski(p) => (x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).abs().powf(p))
                .sum::<f64>()
                / h)
                .powf(1.0 / p),
            Dist::Cosine => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
                let ny = y.iter().map(|b| b * b).sum::<f64>().sqrt();
                (1.0 - dot / (nx * ny)).clamp(0.0, 2.0)
            }
        }
    }
}

pub fn mean(points: &[&[f64]]) -> Vec<f64> {
    let mut m = vec![0.0; points[0].len()];
    for p in points {
        for (acc, v) in m.iter_mut().zip(p.iter()) {
            *acc += v;
        }
    }
    m.iter_mut().for_each(|v| *v /= points.len() as f64);
    m
}

/// `sqrt(mean_x d(r, x)^2)`, Euclidean.
pub fn point_to_set(r: &[f64], set: &[&[f64]]) -> f64 {
    let s: f64 = set.iter().map(|x| Dist::Euclidean.eval(r, x).powi(2)).sum();
    (s / set.len() as f64).sqrt()
}

/// `sqrt(1/(2|S|^2) · Σ_i Σ_j d(x_i, x_j)^2)` over all ordered pairs, Euclidean.
pub fn intraset(set: &[&[f64]]) -> f64 {
    let mut s = 0.0;
    for a in set {
        for b in set {
            s += Dist::Euclidean.eval(a, b).powi(2);
        }
    }
    let n = set.len() as f64;
    (s / (2.0 * n * n)).sqrt()
}

/// Groups point indices by label; labels must be dense `0..k`.
pub fn groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut g = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        g[l].push(i);
    }
    g
}

/// Relabels so that clusters are numbered by first appearance.
pub fn first_appearance(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}
