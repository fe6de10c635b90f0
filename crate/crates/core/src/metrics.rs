//! Distances between load patterns and the set-level distances built on them.
//!
//! Euclidean and Minkowski distances carry a `1/H` factor inside the root, so
//! values stay on the scale of the features regardless of vector length.

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("vectors must have at least one coordinate")]
    EmptyVector,
    #[error("cosine distance undefined for an all-zero vector")]
    ZeroVector,
    #[error("Minkowski order must be finite and >= 1, got {0}")]
    InvalidOrder(f64),
    #[error("set must be nonempty")]
    EmptySet,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Metric<T> {
    Euclidean,
    Cosine,
    /// Minkowski distance of the given order (≥ 1).
    Minkowski(T),
}

impl<T: Scalar> Metric<T> {
    pub fn minkowski(order: T) -> Result<Self, MetricError> {
        let m = Metric::Minkowski(order);
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if let Metric::Minkowski(p) = *self {
            if !p.is_finite() || p < T::one() {
                return Err(MetricError::InvalidOrder(p.as_f64()));
            }
        }
        Ok(())
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Metric::Euclidean)
    }

    /// Checks that `x` is an admissible operand (nonempty; nonzero under cosine).
    pub fn check_vector(&self, x: &[T]) -> Result<(), MetricError> {
        if x.is_empty() {
            return Err(MetricError::EmptyVector);
        }
        if matches!(self, Metric::Cosine) && x.iter().all(|v| v.is_zero()) {
            return Err(MetricError::ZeroVector);
        }
        Ok(())
    }

    pub fn dist(&self, x: &[T], y: &[T]) -> Result<T, MetricError> {
        self.validate()?;
        if x.len() != y.len() {
            return Err(MetricError::LengthMismatch(x.len(), y.len()));
        }
        self.check_vector(x)?;
        self.check_vector(y)?;
        Ok(self.dist_unchecked(x, y))
    }

    /// Distance without argument validation; callers check shapes up front.
    pub(crate) fn dist_unchecked(&self, x: &[T], y: &[T]) -> T {
        match *self {
            Metric::Euclidean => sq_euclidean(x, y).sqrt(),
            Metric::Minkowski(p) => {
                let h = T::of_usize(x.len());
                let s: T = x.iter().zip(y).map(|(a, b)| (*a - *b).abs().powf(p)).sum();
                (s / h).powf(p.recip())
            }
            Metric::Cosine => {
                let (mut dot, mut nx, mut ny) = (T::zero(), T::zero(), T::zero());
                for (a, b) in x.iter().zip(y) {
                    dot = dot + *a * *b;
                    nx = nx + *a * *a;
                    ny = ny + *b * *b;
                }
                let d = T::one() - dot / (nx.sqrt() * ny.sqrt());
                d.max(T::zero()).min(T::lit(2.0))
            }
        }
    }
}

impl<T: Scalar> fmt::Display for Metric<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Euclidean => f.write_str("euclidean"),
            Metric::Cosine => f.write_str("cosine"),
            Metric::Minkowski(p) => write!(f, "minkowski({p})"),
        }
    }
}

/// Free-function form of [`Metric::dist`].
pub fn dist<T: Scalar>(metric: &Metric<T>, x: &[T], y: &[T]) -> Result<T, MetricError> {
    metric.dist(x, y)
}

/// Dimension-normalized squared Euclidean distance, `(1/H)·Σ(x−y)²`.
pub(crate) fn sq_euclidean<T: Scalar>(x: &[T], y: &[T]) -> T {
    let s: T = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let d = *a - *b;
            d * d
        })
        .sum();
    s / T::of_usize(x.len())
}

fn check_set<T: Scalar, V: AsRef<[T]>>(set: &[V]) -> Result<usize, MetricError> {
    let first = set.first().ok_or(MetricError::EmptySet)?.as_ref().len();
    if first == 0 {
        return Err(MetricError::EmptyVector);
    }
    for v in set {
        if v.as_ref().len() != first {
            return Err(MetricError::LengthMismatch(first, v.as_ref().len()));
        }
    }
    Ok(first)
}

/// Coordinate-wise arithmetic mean.
pub fn centroid<T: Scalar, V: AsRef<[T]>>(set: &[V]) -> Result<Vec<T>, MetricError> {
    let h = check_set(set)?;
    let mut acc = vec![T::zero(); h];
    for v in set {
        for (a, x) in acc.iter_mut().zip(v.as_ref()) {
            *a = *a + *x;
        }
    }
    let n = T::of_usize(set.len());
    for a in &mut acc {
        *a = *a / n;
    }
    Ok(acc)
}

/// Root-mean-square distance from `x` to the members of `set`.
pub fn point_to_set_distance<T: Scalar, V: AsRef<[T]>>(
    metric: &Metric<T>,
    x: &[T],
    set: &[V],
) -> Result<T, MetricError> {
    let h = check_set(set)?;
    if x.len() != h {
        return Err(MetricError::LengthMismatch(x.len(), h));
    }
    metric.validate()?;
    metric.check_vector(x)?;
    for v in set {
        metric.check_vector(v.as_ref())?;
    }
    let s: T = set
        .iter()
        .map(|y| {
            let d = metric.dist_unchecked(x, y.as_ref());
            d * d
        })
        .sum();
    Ok((s / T::of_usize(set.len())).sqrt())
}

/// Intraset distance `sqrt((1/(2|L|²))·ΣΣ d(x,y)²)`.
///
/// Under the Euclidean metric this equals the root-mean-square distance to
/// the centroid, which is evaluated in linear time; other metrics sum all
/// pairs.
pub fn intraset_distance<T: Scalar, V: AsRef<[T]>>(
    metric: &Metric<T>,
    set: &[V],
) -> Result<T, MetricError> {
    check_set(set)?;
    metric.validate()?;
    for v in set {
        metric.check_vector(v.as_ref())?;
    }
    let n = set.len();
    if n == 1 {
        return Ok(T::zero());
    }
    if metric.is_euclidean() {
        let c = centroid(set)?;
        let s: T = set.iter().map(|x| sq_euclidean(x.as_ref(), &c)).sum();
        return Ok((s / T::of_usize(n)).sqrt());
    }
    let mut s = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = metric.dist_unchecked(set[i].as_ref(), set[j].as_ref());
            s = s + d * d;
        }
    }
    // Each unordered pair appears twice in the double sum.
    Ok((s / T::of_usize(n * n)).sqrt())
}
