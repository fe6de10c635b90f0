//! Flat cluster assignments shared by every clustering method.

use thiserror::Error;

use crate::metrics::MetricError;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("k = {k} is invalid for {n} patterns")]
    InvalidK { k: usize, n: usize },
    #[error("no input patterns")]
    EmptyData,
    #[error("pattern {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("pattern {0} contains a non-finite value")]
    NonFinite(usize),
    #[error("pattern {0} is all zero")]
    ZeroVector(usize),
    #[error("cluster {0} has no members")]
    EmptyCluster(usize),
    #[error("label {label} out of range for {k} clusters")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Checks that `data` is nonempty, rectangular and finite; returns the dimension.
pub fn check_data<T: Scalar, V: AsRef<[T]>>(data: &[V]) -> Result<usize, ClusterError> {
    let first = data.first().ok_or(ClusterError::EmptyData)?.as_ref().len();
    if first == 0 {
        return Err(ClusterError::Metric(MetricError::EmptyVector));
    }
    for (i, v) in data.iter().enumerate() {
        let v = v.as_ref();
        if v.len() != first {
            return Err(ClusterError::DimensionMismatch {
                index: i,
                expected: first,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ClusterError::NonFinite(i));
        }
    }
    Ok(first)
}

/// Assignment of `n` patterns to `k` nonempty clusters with per-cluster centroids.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition<T> {
    assignment: Vec<usize>,
    centroids: Vec<Vec<T>>,
    requested_k: usize,
    method_tag: String,
    seed: u64,
}

impl<T: Scalar> Partition<T> {
    /// Builds a partition, checking that every label is below `centroids.len()`
    /// and that no cluster is empty.
    pub fn new(
        assignment: Vec<usize>,
        centroids: Vec<Vec<T>>,
        method_tag: impl Into<String>,
        seed: u64,
    ) -> Result<Self, ClusterError> {
        let k = centroids.len();
        let mut sizes = vec![0usize; k];
        for &a in &assignment {
            if a >= k {
                return Err(ClusterError::LabelOutOfRange { label: a, k });
            }
            sizes[a] += 1;
        }
        if let Some(c) = sizes.iter().position(|&s| s == 0) {
            return Err(ClusterError::EmptyCluster(c));
        }
        Ok(Partition {
            assignment,
            centroids,
            requested_k: k,
            method_tag: method_tag.into(),
            seed,
        })
    }

    /// Partition whose centroids are the member means of `data`. Labels must
    /// be dense in `0..k`.
    pub fn from_labels<V: AsRef<[T]>>(
        data: &[V],
        assignment: Vec<usize>,
        method_tag: impl Into<String>,
        seed: u64,
    ) -> Result<Self, ClusterError> {
        let dim = check_data(data)?;
        if assignment.len() != data.len() {
            return Err(ClusterError::Config(format!(
                "{} labels for {} patterns",
                assignment.len(),
                data.len()
            )));
        }
        let k = assignment.iter().max().map_or(0, |m| m + 1);
        let centroids = member_means(data, &assignment, k, dim);
        Self::new(assignment, centroids, method_tag, seed)
    }

    pub fn with_requested_k(mut self, requested_k: usize) -> Self {
        self.requested_k = requested_k;
        self
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// Number of (nonempty) clusters, i.e. the effective K.
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn requested_k(&self) -> usize {
        self.requested_k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn centroids(&self) -> &[Vec<T>] {
        &self.centroids
    }

    pub fn method_tag(&self) -> &str {
        &self.method_tag
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k()];
        for &a in &self.assignment {
            s[a] += 1;
        }
        s
    }

    /// Member indices of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.k()];
        for (i, &a) in self.assignment.iter().enumerate() {
            m[a].push(i);
        }
        m
    }
}

/// Mean of the members of each cluster (zero vector for an empty cluster).
pub(crate) fn member_means<T: Scalar, V: AsRef<[T]>>(
    data: &[V],
    assignment: &[usize],
    k: usize,
    dim: usize,
) -> Vec<Vec<T>> {
    let mut sums = vec![vec![T::zero(); dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &a) in data.iter().zip(assignment) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(x.as_ref()) {
            *s = *s + *v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            let c = T::of_usize(c);
            s.iter_mut().for_each(|v| *v = *v / c);
        }
    }
    sums
}

/// Relabels clusters densely in order of first appearance.
pub fn canonical_labels(assignment: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    assignment
        .iter()
        .map(|a| {
            let next = map.len();
            *map.entry(*a).or_insert(next)
        })
        .collect()
}
