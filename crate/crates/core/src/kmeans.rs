//! Lloyd-style k-means with Euclidean distance and its spherical (cosine)
//! variant.
//!
//! Each restart starts from `k` distinct data points drawn uniformly at
//! random and alternates assignment and centroid updates until assignments
//! stop changing or `max_iter` is reached. The best restart by objective wins;
//! ties go to the lower restart index, so running restarts in parallel does
//! not change the result.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::metrics::sq_euclidean;
use crate::partition::{check_data, ClusterError, Partition};
use crate::scalar::{cmp_scalar, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KmeansConfig {
    pub k: usize,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl KmeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KmeansConfig {
            k,
            max_iter: 300,
            restarts: 10,
            seed,
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    fn check(&self, n: usize) -> Result<(), ClusterError> {
        if self.k == 0 || self.k > n {
            return Err(ClusterError::InvalidK { k: self.k, n });
        }
        if self.max_iter == 0 {
            return Err(ClusterError::Config("max_iter must be >= 1".into()));
        }
        if self.restarts == 0 {
            return Err(ClusterError::Config("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of a k-means run.
#[derive(Clone, Debug)]
pub struct KmeansFit<T> {
    pub partition: Partition<T>,
    /// SSE for Euclidean k-means, summed cosine distance for spherical.
    pub objective: T,
    pub best_restart: usize,
    /// Objective after every centroid update, one trace per restart.
    pub traces: Vec<Vec<T>>,
}

/// How points are compared to centers and how centers are formed.
trait Geometry<T: Scalar>: Sync {
    fn cost(&self, x: &[T], center: &[T]) -> T;
    /// Center from the coordinate sum of `count` members; `None` if undefined.
    fn center(&self, sum: Vec<T>, count: usize) -> Option<Vec<T>>;
}

struct Euclid;

impl<T: Scalar> Geometry<T> for Euclid {
    fn cost(&self, x: &[T], center: &[T]) -> T {
        sq_euclidean(x, center)
    }

    fn center(&self, mut sum: Vec<T>, count: usize) -> Option<Vec<T>> {
        let c = T::of_usize(count);
        sum.iter_mut().for_each(|v| *v = *v / c);
        Some(sum)
    }
}

/// Operates on unit-length data: cost is `1 − x·c`, centers are normalized sums.
struct Spherical;

impl<T: Scalar> Geometry<T> for Spherical {
    fn cost(&self, x: &[T], center: &[T]) -> T {
        let dot: T = x.iter().zip(center).map(|(a, b)| *a * *b).sum();
        (T::one() - dot).max(T::zero()).min(T::lit(2.0))
    }

    fn center(&self, sum: Vec<T>, _count: usize) -> Option<Vec<T>> {
        unit(sum)
    }
}

fn unit<T: Scalar>(mut v: Vec<T>) -> Option<Vec<T>> {
    let norm = v.iter().map(|a| *a * *a).sum::<T>().sqrt();
    if norm.is_nan() || norm <= T::epsilon() {
        return None;
    }
    v.iter_mut().for_each(|a| *a = *a / norm);
    Some(v)
}

struct RestartResult<T> {
    assignment: Vec<usize>,
    centroids: Vec<Vec<T>>,
    objective: T,
    trace: Vec<T>,
}

fn nearest<T: Scalar, G: Geometry<T>>(geom: &G, x: &[T], centroids: &[Vec<T>]) -> usize {
    let mut best = 0;
    let mut best_cost = geom.cost(x, &centroids[0]);
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = geom.cost(x, c);
        if d < best_cost {
            best = j;
            best_cost = d;
        }
    }
    best
}

fn objective<T: Scalar, G: Geometry<T>, V: AsRef<[T]>>(
    geom: &G,
    data: &[V],
    assignment: &[usize],
    centroids: &[Vec<T>],
) -> T {
    data.iter()
        .zip(assignment)
        .map(|(x, &a)| geom.cost(x.as_ref(), &centroids[a]))
        .sum()
}

/// Recomputes centers from `assignment`. Clusters that are empty (or have an
/// undefined center) take over the point farthest from its own center among
/// clusters with at least two members.
fn update_centers<T: Scalar, G: Geometry<T>, V: AsRef<[T]>>(
    geom: &G,
    data: &[V],
    assignment: &mut [usize],
    k: usize,
    dim: usize,
) -> Vec<Vec<T>> {
    let compute = |assignment: &[usize], j: usize| -> (usize, Option<Vec<T>>) {
        let mut sum = vec![T::zero(); dim];
        let mut count = 0;
        for (x, &a) in data.iter().zip(assignment) {
            if a == j {
                count += 1;
                for (s, v) in sum.iter_mut().zip(x.as_ref()) {
                    *s = *s + *v;
                }
            }
        }
        if count == 0 {
            (0, None)
        } else {
            (count, geom.center(sum, count))
        }
    };

    let mut sums = vec![vec![T::zero(); dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &a) in data.iter().zip(assignment.iter()) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(x.as_ref()) {
            *s = *s + *v;
        }
    }
    let mut centers: Vec<Option<Vec<T>>> = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| if c == 0 { None } else { geom.center(s, c) })
        .collect();

    for j in 0..k {
        if centers[j].is_some() {
            continue;
        }
        // Donor: the farthest point from its center, ties to the lowest index.
        let mut donor: Option<(usize, T)> = None;
        for (i, x) in data.iter().enumerate() {
            let a = assignment[i];
            if a == j || counts[a] < 2 {
                continue;
            }
            let Some(center) = &centers[a] else { continue };
            let d = geom.cost(x.as_ref(), center);
            if donor.is_none_or(|(_, best)| d > best) {
                donor = Some((i, d));
            }
        }
        let Some((i, _)) = donor else { continue };
        let from = assignment[i];
        assignment[i] = j;
        counts[from] -= 1;
        counts[j] = 1;
        centers[j] = geom.center(data[i].as_ref().to_vec(), 1);
        centers[from] = compute(assignment, from).1;
    }

    centers
        .into_iter()
        .enumerate()
        .map(|(j, c)| {
            c.unwrap_or_else(|| {
                data[assignment.iter().position(|&a| a == j).unwrap_or(0)]
                    .as_ref()
                    .to_vec()
            })
        })
        .collect()
}

fn run_restart<T: Scalar, G: Geometry<T>, V: AsRef<[T]>>(
    geom: &G,
    data: &[V],
    cfg: &KmeansConfig,
    dim: usize,
    restart: usize,
) -> RestartResult<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let picks = index::sample(&mut rng, data.len(), cfg.k);
    let mut centroids: Vec<Vec<T>> = picks
        .iter()
        .map(|i| {
            let x = data[i].as_ref().to_vec();
            geom.center(x.clone(), 1).unwrap_or(x)
        })
        .collect();

    let mut assignment = vec![usize::MAX; data.len()];
    let mut trace = Vec::new();
    for _ in 0..cfg.max_iter {
        let next: Vec<usize> = data
            .iter()
            .map(|x| nearest(geom, x.as_ref(), &centroids))
            .collect();
        if next == assignment {
            break;
        }
        assignment = next;
        centroids = update_centers(geom, data, &mut assignment, cfg.k, dim);
        trace.push(objective(geom, data, &assignment, &centroids));
    }
    let objective = objective(geom, data, &assignment, &centroids);
    RestartResult {
        assignment,
        centroids,
        objective,
        trace,
    }
}

fn fit<T: Scalar, G: Geometry<T>, V: AsRef<[T]> + Sync>(
    geom: &G,
    data: &[V],
    cfg: &KmeansConfig,
    dim: usize,
    tag: &str,
) -> Result<KmeansFit<T>, ClusterError> {
    let runs: Vec<RestartResult<T>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(geom, data, cfg, dim, r))
        .collect();
    let best = (0..runs.len())
        .min_by(|&a, &b| cmp_scalar(runs[a].objective, runs[b].objective).then(a.cmp(&b)))
        .expect("at least one restart");
    let traces = runs.iter().map(|r| r.trace.clone()).collect();
    let win = runs.into_iter().nth(best).expect("index in range");
    let partition = Partition::new(win.assignment, win.centroids, tag, cfg.seed)?;
    Ok(KmeansFit {
        partition,
        objective: win.objective,
        best_restart: best,
        traces,
    })
}

/// Euclidean k-means. The objective is `Σ dist(x, centroid)²` with the
/// dimension-normalized Euclidean distance.
pub fn kmeans<T: Scalar, V: AsRef<[T]> + Sync>(
    data: &[V],
    cfg: &KmeansConfig,
) -> Result<KmeansFit<T>, ClusterError> {
    let dim = check_data(data)?;
    cfg.check(data.len())?;
    fit(&Euclid, data, cfg, dim, "km")
}

/// Spherical k-means: patterns are compared by cosine distance and centroids
/// are unit vectors along the mean direction of their (unit-scaled) members.
pub fn spherical_kmeans<T: Scalar, V: AsRef<[T]> + Sync>(
    data: &[V],
    cfg: &KmeansConfig,
) -> Result<KmeansFit<T>, ClusterError> {
    let dim = check_data(data)?;
    cfg.check(data.len())?;
    let units = data
        .iter()
        .enumerate()
        .map(|(i, x)| unit(x.as_ref().to_vec()).ok_or(ClusterError::ZeroVector(i)))
        .collect::<Result<Vec<_>, _>>()?;
    fit(&Spherical, &units, cfg, dim, "skm")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[[f64; 2]]) -> Vec<Vec<f64>> {
        v.iter().map(|p| p.to_vec()).collect()
    }

    // Brute force over all 2-colourings with both colours used.
    fn best_two_partition(
        data: &[Vec<f64>],
        cost: impl Fn(&[&Vec<f64>]) -> f64,
    ) -> (f64, Vec<usize>) {
        let n = data.len();
        let mut best = (f64::INFINITY, vec![]);
        for mask in 1u32..(1 << n) - 1 {
            let labels: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
            let total: f64 = (0..2)
                .map(|c| {
                    let members: Vec<&Vec<f64>> = data
                        .iter()
                        .zip(&labels)
                        .filter(|(_, &l)| l == c)
                        .map(|(x, _)| x)
                        .collect();
                    cost(&members)
                })
                .sum();
            if total < best.0 - 1e-12 {
                best = (total, labels);
            }
        }
        best
    }

    fn sse_cost(members: &[&Vec<f64>]) -> f64 {
        let c = crate::metrics::centroid(members).unwrap();
        members.iter().map(|x| sq_euclidean(x, &c)).sum()
    }

    fn cosine_cost(members: &[&Vec<f64>]) -> f64 {
        let units: Vec<Vec<f64>> = members.iter().map(|x| unit(x.to_vec()).unwrap()).collect();
        let mut s = vec![0.0; units[0].len()];
        for u in &units {
            for (a, b) in s.iter_mut().zip(u) {
                *a += b;
            }
        }
        let c = unit(s).unwrap();
        units
            .iter()
            .map(|u| 1.0 - u.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    fn same_clusters(a: &[usize], b: &[usize]) -> bool {
        crate::partition::canonical_labels(a) == crate::partition::canonical_labels(b)
    }

    #[test]
    fn four_points_two_clusters() {
        let data = pts(&[[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]);
        let (opt, labels) = best_two_partition(&data, sse_cost);
        let fit = kmeans(&data, &KmeansConfig::new(2, 1)).unwrap();
        assert!(same_clusters(fit.partition.assignment(), &labels));
        assert!((fit.objective - opt).abs() < 1e-12);
        let mut cs = fit.partition.centroids().to_vec();
        cs.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
        assert_eq!(cs, vec![vec![0.0, 0.5], vec![10.0, 0.5]]);
    }

    #[test]
    fn k_equals_n_and_k_one() {
        let data = pts(&[[0.1, 0.2], [0.9, 0.4], [0.5, 0.5], [0.3, 0.8]]);
        let fit = kmeans(&data, &KmeansConfig::new(4, 5)).unwrap();
        assert_eq!(fit.objective, 0.0);
        assert_eq!(fit.partition.sizes(), vec![1, 1, 1, 1]);

        let fit = kmeans(&data, &KmeansConfig::new(1, 5)).unwrap();
        let mean = crate::metrics::centroid(&data).unwrap();
        assert_eq!(fit.partition.centroids()[0], mean);
    }

    #[test]
    fn k_equals_n_with_duplicates_keeps_all_clusters() {
        let data = pts(&[[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]]);
        let fit = kmeans(&data, &KmeansConfig::new(3, 0)).unwrap();
        assert_eq!(fit.partition.k(), 3);
        assert_eq!(fit.objective, 0.0);
    }

    #[test]
    fn invalid_k() {
        let data = pts(&[[0.0, 0.0], [1.0, 1.0]]);
        assert_eq!(
            kmeans(&data, &KmeansConfig::new(3, 0)).unwrap_err(),
            ClusterError::InvalidK { k: 3, n: 2 }
        );
        assert_eq!(
            kmeans(&data, &KmeansConfig::new(0, 0)).unwrap_err(),
            ClusterError::InvalidK { k: 0, n: 2 }
        );
        assert!(matches!(
            kmeans(&data, &KmeansConfig::new(1, 0).with_restarts(0)),
            Err(ClusterError::Config(_))
        ));
    }

    #[test]
    fn spherical_splits_by_direction() {
        let data = pts(&[[1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [0.0, 3.0]]);
        let (opt, labels) = best_two_partition(&data, cosine_cost);
        let fit = spherical_kmeans(&data, &KmeansConfig::new(2, 3)).unwrap();
        assert!(same_clusters(fit.partition.assignment(), &labels));
        assert!((fit.objective - opt).abs() < 1e-12);
        let mut cs = fit.partition.centroids().to_vec();
        cs.sort_by(|a, b| b[0].partial_cmp(&a[0]).unwrap());
        assert_eq!(cs, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn spherical_parallel_data_and_scale() {
        let data = pts(&[[1.0, 2.0], [2.0, 4.0], [0.5, 1.0]]);
        let fit = spherical_kmeans(&data, &KmeansConfig::new(1, 0)).unwrap();
        assert!(fit.objective.abs() < 1e-12);

        let data = pts(&[
            [0.9, 0.1],
            [0.2, 0.7],
            [0.5, 0.5],
            [0.1, 0.95],
            [0.8, 0.3],
            [0.4, 0.45],
        ]);
        let scaled: Vec<Vec<f64>> = data
            .iter()
            .map(|x| x.iter().map(|v| v * 37.5).collect())
            .collect();
        let a = spherical_kmeans(&data, &KmeansConfig::new(2, 11)).unwrap();
        let b = spherical_kmeans(&scaled, &KmeansConfig::new(2, 11)).unwrap();
        assert_eq!(a.partition.assignment(), b.partition.assignment());
        for c in a.partition.centroids() {
            let n: f64 = c.iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spherical_rejects_zero_vector() {
        let data = pts(&[[1.0, 0.0], [0.0, 0.0]]);
        assert_eq!(
            spherical_kmeans(&data, &KmeansConfig::new(1, 0)).unwrap_err(),
            ClusterError::ZeroVector(1)
        );
    }

    #[test]
    fn deterministic_and_lloyd_fixed_point() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let data: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let cfg = KmeansConfig::new(4, 2024);
        let a = kmeans(&data, &cfg).unwrap();
        let b = kmeans(&data, &cfg).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        // Reassignment against the final centroids changes nothing.
        for (x, &l) in data.iter().zip(a.partition.assignment()) {
            assert_eq!(nearest(&Euclid, x, a.partition.centroids()), l);
        }
        for t in &a.traces {
            for w in t.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let data: Vec<Vec<f32>> = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![10.0, 0.0],
            vec![10.0, 1.0],
        ];
        let fit = kmeans(&data, &KmeansConfig::new(2, 1)).unwrap();
        assert_eq!(fit.partition.sizes(), vec![2, 2]);
    }
}
