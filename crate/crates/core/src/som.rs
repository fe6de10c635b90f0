//! Hexagonal self-organizing map trained online, followed by k-means on the
//! unit weights to produce the final pattern clusters.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kmeans::{kmeans, KmeansConfig};
use crate::metrics::sq_euclidean;
use crate::partition::{check_data, member_means, ClusterError, Partition};
use crate::scalar::Scalar;

/// Lattice distances within this slack of 1 count as adjacent.
const NEIGHBOR_SLACK: f64 = 1e-9;

/// Hexagonal lattice of `rows × cols` units. Unit `u` sits at row `u / cols`,
/// column `u % cols`; odd rows are shifted by half a column and rows are
/// `√3/2` apart, so adjacent units are exactly one lattice unit apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SomGrid {
    rows: usize,
    cols: usize,
}

impl SomGrid {
    pub fn new(rows: usize, cols: usize) -> Result<Self, ClusterError> {
        if rows == 0 || cols == 0 {
            return Err(ClusterError::Config(format!(
                "SOM grid {rows}x{cols} has no units"
            )));
        }
        Ok(SomGrid { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn units(&self) -> usize {
        self.rows * self.cols
    }

    pub fn row_col(&self, unit: usize) -> (usize, usize) {
        (unit / self.cols, unit % self.cols)
    }

    pub fn position(&self, unit: usize) -> (f64, f64) {
        let (r, c) = self.row_col(unit);
        let shift = if r % 2 == 1 { 0.5 } else { 0.0 };
        (c as f64 + shift, r as f64 * 3f64.sqrt() / 2.0)
    }

    pub fn lattice_distance(&self, a: usize, b: usize) -> f64 {
        let (xa, ya) = self.position(a);
        let (xb, yb) = self.position(b);
        ((xa - xb).powi(2) + (ya - yb).powi(2)).sqrt()
    }

    pub fn are_neighbors(&self, a: usize, b: usize) -> bool {
        a != b && self.lattice_distance(a, b) <= 1.0 + NEIGHBOR_SLACK
    }

    pub fn neighbors(&self, unit: usize) -> Vec<usize> {
        (0..self.units())
            .filter(|&b| self.are_neighbors(unit, b))
            .collect()
    }
}

impl Default for SomGrid {
    fn default() -> Self {
        SomGrid { rows: 10, cols: 10 }
    }
}

/// Two-phase training schedule. Learning rate and neighborhood radius move
/// linearly from the first to the second value of each pair over a phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainSchedule<T> {
    pub rough_epochs: usize,
    pub finetune_epochs: usize,
    pub rough_lr: (T, T),
    pub finetune_lr: (T, T),
    pub rough_radius: (T, T),
    pub finetune_radius: (T, T),
}

impl<T: Scalar> TrainSchedule<T> {
    /// 20 rough epochs (lr 0.5→0.05, radius max(rows,cols)/2→1) followed by 40
    /// fine-tuning epochs (lr 0.05→0.01, radius 1→0.5).
    pub fn for_grid(grid: &SomGrid) -> Self {
        let start = (grid.rows.max(grid.cols) as f64 / 2.0).max(1.0);
        TrainSchedule {
            rough_epochs: 20,
            finetune_epochs: 40,
            rough_lr: (T::lit(0.5), T::lit(0.05)),
            finetune_lr: (T::lit(0.05), T::lit(0.01)),
            rough_radius: (T::lit(start), T::one()),
            finetune_radius: (T::one(), T::lit(0.5)),
        }
    }

    pub fn total_epochs(&self) -> usize {
        self.rough_epochs + self.finetune_epochs
    }

    fn validate(&self) -> Result<(), ClusterError> {
        if self.rough_epochs + self.finetune_epochs == 0 {
            return Err(ClusterError::Config("schedule has no epochs".into()));
        }
        let pairs = [
            self.rough_lr,
            self.finetune_lr,
            self.rough_radius,
            self.finetune_radius,
        ];
        if pairs
            .iter()
            .any(|&(a, b)| !(a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite()))
        {
            return Err(ClusterError::Config(
                "learning rates and radii must be positive".into(),
            ));
        }
        Ok(())
    }

    /// (learning rate, radius) for a global epoch index.
    fn at(&self, epoch: usize) -> (T, T) {
        let lerp = |(a, b): (T, T), i: usize, n: usize| {
            if n <= 1 {
                a
            } else {
                a + (b - a) * T::of_usize(i) / T::of_usize(n - 1)
            }
        };
        if epoch < self.rough_epochs {
            (
                lerp(self.rough_lr, epoch, self.rough_epochs),
                lerp(self.rough_radius, epoch, self.rough_epochs),
            )
        } else {
            let i = epoch - self.rough_epochs;
            (
                lerp(self.finetune_lr, i, self.finetune_epochs),
                lerp(self.finetune_radius, i, self.finetune_epochs),
            )
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingMeta<T> {
    pub seed: u64,
    pub epochs: usize,
    pub schedule: TrainSchedule<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SomModel<T> {
    grid: SomGrid,
    weights: Vec<Vec<T>>,
    training: Option<TrainingMeta<T>>,
}

impl<T: Scalar> SomModel<T> {
    /// Wraps explicit weights (one per unit, all of the same dimension).
    pub fn from_weights(grid: SomGrid, weights: Vec<Vec<T>>) -> Result<Self, ClusterError> {
        if weights.len() != grid.units() {
            return Err(ClusterError::Config(format!(
                "{} weights for {} units",
                weights.len(),
                grid.units()
            )));
        }
        check_data(&weights)?;
        Ok(SomModel {
            grid,
            weights,
            training: None,
        })
    }

    pub fn grid(&self) -> &SomGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn training_meta(&self) -> Option<&TrainingMeta<T>> {
        self.training.as_ref()
    }

    fn check_dim(&self, x: &[T]) -> Result<(), ClusterError> {
        if x.len() != self.dim() {
            return Err(ClusterError::DimensionMismatch {
                index: 0,
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Best and second-best matching units (lowest index wins ties).
    fn two_best(&self, x: &[T]) -> (usize, Option<usize>) {
        let mut best = (0, sq_euclidean(x, &self.weights[0]));
        let mut second: Option<(usize, T)> = None;
        for (u, w) in self.weights.iter().enumerate().skip(1) {
            let d = sq_euclidean(x, w);
            if d < best.1 {
                second = Some(best);
                best = (u, d);
            } else if second.is_none_or(|(_, s)| d < s) {
                second = Some((u, d));
            }
        }
        (best.0, second.map(|s| s.0))
    }

    fn bmu_unchecked(&self, x: &[T]) -> usize {
        let mut best = 0;
        let mut best_d = sq_euclidean(x, &self.weights[0]);
        for (u, w) in self.weights.iter().enumerate().skip(1) {
            let d = sq_euclidean(x, w);
            if d < best_d {
                best = u;
                best_d = d;
            }
        }
        best
    }
}

/// Index of the unit whose weight is nearest to `x` (Euclidean; lowest index on ties).
pub fn bmu<T: Scalar>(model: &SomModel<T>, x: &[T]) -> Result<usize, ClusterError> {
    model.check_dim(x)?;
    Ok(model.bmu_unchecked(x))
}

fn check_model_data<T: Scalar, V: AsRef<[T]>>(
    model: &SomModel<T>,
    data: &[V],
) -> Result<(), ClusterError> {
    check_data(data)?;
    model.check_dim(data[0].as_ref())
}

/// Mean distance from each pattern to its best matching unit.
pub fn quantization_error<T: Scalar, V: AsRef<[T]>>(
    model: &SomModel<T>,
    data: &[V],
) -> Result<T, ClusterError> {
    check_model_data(model, data)?;
    let s: T = data
        .iter()
        .map(|x| {
            let x = x.as_ref();
            sq_euclidean(x, &model.weights[model.bmu_unchecked(x)]).sqrt()
        })
        .sum();
    Ok(s / T::of_usize(data.len()))
}

/// Fraction of patterns whose two best matching units are not lattice neighbors.
pub fn topographic_error<T: Scalar, V: AsRef<[T]>>(
    model: &SomModel<T>,
    data: &[V],
) -> Result<T, ClusterError> {
    check_model_data(model, data)?;
    if model.grid.units() < 2 {
        return Err(ClusterError::Config(
            "topographic error needs at least two units".into(),
        ));
    }
    let bad = data
        .iter()
        .filter(|x| {
            let (a, b) = model.two_best(x.as_ref());
            !model.grid.are_neighbors(a, b.expect("at least two units"))
        })
        .count();
    Ok(T::of_usize(bad) / T::of_usize(data.len()))
}

/// Trains a map on `data`. Weights start as a seeded sample (with replacement)
/// of the data; every epoch presents all patterns in a fresh seeded order and
/// pulls every unit toward the pattern with Gaussian neighborhood strength.
pub fn train_som<T: Scalar, V: AsRef<[T]>>(
    data: &[V],
    grid: SomGrid,
    schedule: &TrainSchedule<T>,
    seed: u64,
) -> Result<SomModel<T>, ClusterError> {
    train(data, grid, schedule, seed, false).map(|(m, _)| m)
}

/// As [`train_som`], also returning the quantization error after each epoch.
pub fn train_som_traced<T: Scalar, V: AsRef<[T]>>(
    data: &[V],
    grid: SomGrid,
    schedule: &TrainSchedule<T>,
    seed: u64,
) -> Result<(SomModel<T>, Vec<T>), ClusterError> {
    train(data, grid, schedule, seed, true)
}

fn train<T: Scalar, V: AsRef<[T]>>(
    data: &[V],
    grid: SomGrid,
    schedule: &TrainSchedule<T>,
    seed: u64,
    trace: bool,
) -> Result<(SomModel<T>, Vec<T>), ClusterError> {
    check_data(data)?;
    schedule.validate()?;
    let units = grid.units();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<Vec<T>> = (0..units)
        .map(|_| data[rng.random_range(0..data.len())].as_ref().to_vec())
        .collect();
    let mut model = SomModel {
        grid,
        weights,
        training: Some(TrainingMeta {
            seed,
            epochs: schedule.total_epochs(),
            schedule: *schedule,
        }),
    };

    let lattice_sq: Vec<T> = (0..units * units)
        .map(|i| T::lit(grid.lattice_distance(i / units, i % units).powi(2)))
        .collect();

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut qe = Vec::new();
    let mut strength = vec![T::zero(); units];
    for epoch in 0..schedule.total_epochs() {
        let (lr, radius) = schedule.at(epoch);
        let denom = T::lit(2.0) * radius * radius;
        order.shuffle(&mut rng);
        for &i in &order {
            let x = data[i].as_ref();
            let win = model.bmu_unchecked(x);
            let row = &lattice_sq[win * units..(win + 1) * units];
            for (s, d2) in strength.iter_mut().zip(row) {
                *s = lr * (-*d2 / denom).exp();
            }
            for (w, &s) in model.weights.iter_mut().zip(&strength) {
                for (wv, xv) in w.iter_mut().zip(x) {
                    *wv = *wv + s * (*xv - *wv);
                }
            }
        }
        if trace {
            qe.push(quantization_error(&model, data)?);
        }
    }
    Ok((model, qe))
}

#[derive(Clone, Debug)]
pub struct SomKmeansFit<T> {
    /// Final clusters of the input patterns, empty clusters dropped.
    pub partition: Partition<T>,
    pub model: SomModel<T>,
    /// Cluster of each unit as produced by k-means on the weights, before
    /// dropping clusters without patterns.
    pub unit_clusters: Vec<usize>,
}

/// Groups the units of a trained map with k-means and gives every pattern the
/// cluster of its best matching unit. Clusters that receive no pattern are
/// dropped and the rest renumbered in their original order.
pub fn cluster_units<T: Scalar, V: AsRef<[T]> + Sync>(
    model: &SomModel<T>,
    data: &[V],
    km_cfg: &KmeansConfig,
) -> Result<SomKmeansFit<T>, ClusterError> {
    check_model_data(model, data)?;
    let k = km_cfg.k;
    if k == 0 || k > model.grid.units() {
        return Err(ClusterError::InvalidK {
            k,
            n: model.grid.units(),
        });
    }
    let unit_fit = kmeans(model.weights(), km_cfg)?;
    let unit_clusters = unit_fit.partition.assignment().to_vec();

    let raw: Vec<usize> = data
        .iter()
        .map(|x| unit_clusters[model.bmu_unchecked(x.as_ref())])
        .collect();
    let mut used = vec![false; k];
    raw.iter().for_each(|&c| used[c] = true);
    let mut remap = vec![usize::MAX; k];
    let mut next = 0;
    for c in 0..k {
        if used[c] {
            remap[c] = next;
            next += 1;
        }
    }
    let assignment: Vec<usize> = raw.iter().map(|&c| remap[c]).collect();
    let centroids = member_means(data, &assignment, next, model.dim());
    let partition = Partition::new(assignment, centroids, "som", km_cfg.seed)?.with_requested_k(k);
    Ok(SomKmeansFit {
        partition,
        model: model.clone(),
        unit_clusters,
    })
}

/// Trains a map on `data` and clusters it into at most `k` groups.
pub fn som_kmeans<T: Scalar, V: AsRef<[T]> + Sync>(
    data: &[V],
    grid: SomGrid,
    k: usize,
    seed: u64,
    schedule: &TrainSchedule<T>,
    km_cfg: &KmeansConfig,
) -> Result<SomKmeansFit<T>, ClusterError> {
    if k == 0 || k > grid.units() {
        return Err(ClusterError::InvalidK { k, n: grid.units() });
    }
    let model = train_som(data, grid, schedule, seed)?;
    cluster_units(&model, data, &KmeansConfig { k, ..*km_cfg })
}

/// Writes `unit_row,unit_col,w000..` with one row per unit.
pub fn write_weights_csv<T: Scalar, W: Write>(writer: W, model: &SomModel<T>) -> io::Result<()> {
    let mut w = io::BufWriter::new(writer);
    write!(w, "unit_row,unit_col")?;
    for i in 0..model.dim() {
        write!(w, ",w{i:03}")?;
    }
    writeln!(w)?;
    for (u, weights) in model.weights.iter().enumerate() {
        let (r, c) = model.grid.row_col(u);
        write!(w, "{r},{c}")?;
        for v in weights {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}
