//! Agglomerative hierarchical clustering with single, average and Ward
//! linkage, maintained by Lance–Williams updates over a full distance matrix.
//!
//! Leaves have ids `0..n`; the cluster created by the `s`-th merge gets id
//! `n + s`. At every step the pair with the smallest linkage value is merged,
//! ties going to the lexicographically smallest `(min id, max id)` pair.

use std::cmp::Ordering;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::metrics::Metric;
use crate::partition::{check_data, member_means, ClusterError, Partition};
use crate::scalar::{cmp_scalar, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Linkage {
    Single,
    Average,
    Ward,
}

impl Linkage {
    pub fn name(self) -> &'static str {
        match self {
            Linkage::Single => "single",
            Linkage::Average => "average",
            Linkage::Ward => "ward",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkageSpec<T> {
    pub linkage: Linkage,
    pub metric: Metric<T>,
}

impl<T: Scalar> LinkageSpec<T> {
    pub fn new(linkage: Linkage, metric: Metric<T>) -> Result<Self, ClusterError> {
        let spec = LinkageSpec { linkage, metric };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        self.metric.validate()?;
        if self.linkage == Linkage::Ward && !self.metric.is_euclidean() {
            return Err(ClusterError::Config(format!(
                "ward linkage requires the euclidean metric, got {}",
                self.metric
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Merge<T> {
    /// Smaller of the two merged ids.
    pub left: usize,
    pub right: usize,
    pub height: T,
    /// Number of leaves in the new cluster.
    pub size: usize,
    pub id: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram<T> {
    n: usize,
    merges: Vec<Merge<T>>,
}

impl<T: Scalar> Dendrogram<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge<T>] {
        &self.merges
    }

    /// Cluster labels after undoing the last `k − 1` merges. Clusters are
    /// numbered by their smallest member index.
    pub fn cut_labels(&self, k: usize) -> Result<Vec<usize>, ClusterError> {
        if k == 0 || k > self.n {
            return Err(ClusterError::InvalidK { k, n: self.n });
        }
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        // Representative leaf of every node id.
        let mut leaf_of: Vec<usize> = (0..self.n).collect();
        for m in &self.merges[..self.n - k] {
            let a = find(&mut parent, leaf_of[m.left]);
            let b = find(&mut parent, leaf_of[m.right]);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent[hi] = lo;
            leaf_of.push(lo);
        }
        let mut label_of_root = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut labels = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let r = find(&mut parent, i);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            labels.push(label_of_root[r]);
        }
        Ok(labels)
    }
}

/// Flat partition with `k` clusters; centroids are member means of `data`.
pub fn cut<T: Scalar, V: AsRef<[T]>>(
    dendrogram: &Dendrogram<T>,
    data: &[V],
    k: usize,
    method_tag: &str,
) -> Result<Partition<T>, ClusterError> {
    let dim = check_data(data)?;
    if data.len() != dendrogram.n {
        return Err(ClusterError::Config(format!(
            "dendrogram has {} leaves, data has {} patterns",
            dendrogram.n,
            data.len()
        )));
    }
    let labels = dendrogram.cut_labels(k)?;
    let centroids = member_means(data, &labels, k, dim);
    Partition::new(labels, centroids, method_tag, 0)
}

/// Full symmetric matrix of pairwise distances, row-major.
pub fn distance_matrix<T: Scalar, V: AsRef<[T]> + Sync>(
    metric: &Metric<T>,
    data: &[V],
) -> Result<Vec<T>, ClusterError> {
    check_data(data)?;
    metric.validate()?;
    for (i, x) in data.iter().enumerate() {
        metric.check_vector(x.as_ref()).map_err(|e| match e {
            crate::metrics::MetricError::ZeroVector => ClusterError::ZeroVector(i),
            other => ClusterError::Metric(other),
        })?;
    }
    let n = data.len();
    let mut d = vec![T::zero(); n * n];
    d.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                // Evaluate with the smaller index first so d[i][j] == d[j][i] bitwise.
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                *cell = metric.dist_unchecked(data[a].as_ref(), data[b].as_ref());
            }
        }
    });
    Ok(d)
}

/// Ordering key of a candidate merge: linkage value, then the id pair.
#[derive(Clone, Copy, Debug)]
struct Key<T> {
    value: T,
    lo: usize,
    hi: usize,
}

impl<T: Scalar> Key<T> {
    fn new(value: T, a: usize, b: usize) -> Self {
        Key {
            value,
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        cmp_scalar(self.value, other.value)
            .then(self.lo.cmp(&other.lo))
            .then(self.hi.cmp(&other.hi))
    }
}

/// Builds the full merge tree of `data`.
pub fn hcluster<T: Scalar, V: AsRef<[T]> + Sync>(
    data: &[V],
    spec: &LinkageSpec<T>,
) -> Result<Dendrogram<T>, ClusterError> {
    spec.validate()?;
    check_data(data)?;
    let n = data.len();
    if n < 2 {
        return Err(ClusterError::InvalidK { k: 2, n });
    }
    let mut d = distance_matrix(&spec.metric, data)?;
    if spec.linkage == Linkage::Ward {
        // Ward works on squared distances.
        d.iter_mut().for_each(|v| *v = *v * *v);
    }

    // Slot i holds one active cluster; the merged cluster reuses the slot of
    // the first member.
    let mut id = (0..n).collect::<Vec<_>>();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut nearest: Vec<Option<(usize, Key<T>)>> = vec![None; n];

    let scan = |d: &[T], id: &[usize], active: &[bool], i: usize| -> Option<(usize, Key<T>)> {
        let mut best: Option<(usize, Key<T>)> = None;
        for j in 0..n {
            if j == i || !active[j] {
                continue;
            }
            let k = Key::new(d[i * n + j], id[i], id[j]);
            if best.is_none_or(|(_, b)| k.cmp(&b) == Ordering::Less) {
                best = Some((j, k));
            }
        }
        best
    };
    for (i, slot) in nearest.iter_mut().enumerate() {
        *slot = scan(&d, &id, &active, i);
    }

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let (a, (b, key)) = (0..n)
            .filter(|&i| active[i])
            .filter_map(|i| nearest[i].map(|nb| (i, nb)))
            .min_by(|x, y| x.1 .1.cmp(&y.1 .1))
            .expect("at least two active clusters");
        let (na, nb) = (size[a], size[b]);
        let dab = d[a * n + b];
        let new_id = n + step;
        let height = if spec.linkage == Linkage::Ward {
            key.value.max(T::zero()).sqrt()
        } else {
            key.value
        };
        merges.push(Merge {
            left: key.lo,
            right: key.hi,
            height,
            size: na + nb,
            id: new_id,
        });

        // Lance–Williams update into slot a; slot b retires.
        let (fa, fb, ftot) = (T::of_usize(na), T::of_usize(nb), T::of_usize(na + nb));
        for k in 0..n {
            if !active[k] || k == a || k == b {
                continue;
            }
            let (dak, dbk) = (d[a * n + k], d[b * n + k]);
            let v = match spec.linkage {
                Linkage::Single => dak.min(dbk),
                Linkage::Average => (fa * dak + fb * dbk) / ftot,
                Linkage::Ward => {
                    let fk = T::of_usize(size[k]);
                    ((fa + fk) * dak + (fb + fk) * dbk - fk * dab) / (ftot + fk)
                }
            };
            d[a * n + k] = v;
            d[k * n + a] = v;
        }
        active[b] = false;
        id[a] = new_id;
        size[a] = na + nb;

        nearest[a] = scan(&d, &id, &active, a);
        for k in 0..n {
            if !active[k] || k == a {
                continue;
            }
            match nearest[k] {
                Some((j, _)) if j == a || j == b => nearest[k] = scan(&d, &id, &active, k),
                Some((_, cur)) => {
                    let cand = Key::new(d[k * n + a], id[k], new_id);
                    if cand.cmp(&cur) == Ordering::Less {
                        nearest[k] = Some((a, cand));
                    }
                }
                None => nearest[k] = scan(&d, &id, &active, k),
            }
        }
    }
    Ok(Dendrogram { n, merges })
}

/// Writes `left,right,height,size`, one row per merge.
pub fn write_dendrogram_csv<T: Scalar, W: Write>(
    writer: W,
    dendrogram: &Dendrogram<T>,
) -> io::Result<()> {
    let mut w = io::BufWriter::new(writer);
    writeln!(w, "left,right,height,size")?;
    for m in &dendrogram.merges {
        writeln!(w, "{},{},{},{}", m.left, m.right, m.height, m.size)?;
    }
    w.flush()
}
