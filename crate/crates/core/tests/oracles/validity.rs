//! The four internal indices evaluated term by term.

use super::geometry::{groups, intraset, mean, point_to_set, Dist};

#[derive(Clone, Copy, Debug)]
pub struct Indices {
    pub cdi: f64,
    pub mdi: f64,
    pub dbi: f64,
    pub mia: f64,
}

pub fn indices(data: &[Vec<f64>], labels: &[usize]) -> Indices {
    let clusters: Vec<Vec<&[f64]>> = groups(labels)
        .into_iter()
        .map(|g| g.into_iter().map(|i| data[i].as_slice()).collect())
        .collect();
    let k = clusters.len();
    assert!(k >= 2);
    let centers: Vec<Vec<f64>> = clusters.iter().map(|c| mean(c)).collect();
    let scatter: Vec<f64> = clusters
        .iter()
        .zip(&centers)
        .map(|(c, r)| point_to_set(r, c))
        .collect();
    let spread: Vec<f64> = clusters.iter().map(|c| intraset(c)).collect();

    let mia = (scatter.iter().map(|s| s * s).sum::<f64>() / k as f64).sqrt();

    let center_refs: Vec<&[f64]> = centers.iter().map(|c| c.as_slice()).collect();
    let cdi =
        (spread.iter().map(|s| s * s).sum::<f64>() / k as f64).sqrt() / intraset(&center_refs);

    let mut min_sep = f64::INFINITY;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                min_sep = min_sep.min(Dist::Euclidean.eval(&centers[i], &centers[j]));
            }
        }
    }
    let mdi = spread.iter().cloned().fold(0.0, f64::max) / min_sep;

    let mut dbi = 0.0;
    for i in 0..k {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..k {
            if i != j {
                worst = worst.max(
                    (scatter[i] + scatter[j]) / Dist::Euclidean.eval(&centers[i], &centers[j]),
                );
            }
        }
        dbi += worst;
    }
    dbi /= k as f64;

    Indices { cdi, mdi, dbi, mia }
}
