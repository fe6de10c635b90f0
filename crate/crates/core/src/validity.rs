//! Internal validity indices (CDI, MDI, DBI, MIA) of a partition, plus the
//! adjusted Rand index used to compare against known labels in tests.
//!
//! All indices use the dimension-normalized Euclidean distance on the raw
//! patterns and centroids recomputed as member means, whatever metric the
//! clustering itself used. Lower is better for all four.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};

use thiserror::Error;

use crate::metrics::{intraset_distance, point_to_set_distance, Metric};
use crate::partition::{check_data, member_means, ClusterError, Partition};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidityError {
    #[error("index undefined for a single cluster")]
    SingleCluster,
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("two cluster centroids coincide")]
    CoincidentCentroids,
    #[error("partition covers {partition} patterns, data has {data}")]
    SizeMismatch { partition: usize, data: usize },
    #[error(transparent)]
    Data(#[from] ClusterError),
    #[error("validity file: {0}")]
    Format(String),
}

/// One row of a validity table.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidityReport<T> {
    pub method_tag: String,
    pub requested_k: usize,
    pub effective_k: usize,
    pub cdi: T,
    pub mdi: T,
    pub dbi: T,
    pub mia: T,
}

/// Members and member-mean centroids of each cluster.
struct Clusters<'a, T> {
    members: Vec<Vec<&'a [T]>>,
    centroids: Vec<Vec<T>>,
}

fn clusters<'a, T: Scalar, V: AsRef<[T]>>(
    data: &'a [V],
    partition: &Partition<T>,
) -> Result<Clusters<'a, T>, ValidityError> {
    let dim = check_data(data)?;
    if partition.n() != data.len() {
        return Err(ValidityError::SizeMismatch {
            partition: partition.n(),
            data: data.len(),
        });
    }
    let k = partition.k();
    if k < 2 {
        return Err(ValidityError::SingleCluster);
    }
    let mut members: Vec<Vec<&[T]>> = vec![Vec::new(); k];
    for (x, &a) in data.iter().zip(partition.assignment()) {
        members[a].push(x.as_ref());
    }
    if let Some(c) = members.iter().position(Vec::is_empty) {
        return Err(ValidityError::EmptyCluster(c));
    }
    let centroids = member_means(data, partition.assignment(), k, dim);
    Ok(Clusters { members, centroids })
}

fn euclid<T: Scalar>() -> Metric<T> {
    Metric::Euclidean
}

fn metric_err(e: crate::metrics::MetricError) -> ValidityError {
    ValidityError::Data(ClusterError::Metric(e))
}

fn mia_of<T: Scalar>(c: &Clusters<'_, T>) -> Result<T, ValidityError> {
    let m = euclid::<T>();
    let mut s = T::zero();
    for (r, set) in c.centroids.iter().zip(&c.members) {
        let d = point_to_set_distance(&m, r, set).map_err(metric_err)?;
        s = s + d * d;
    }
    Ok((s / T::of_usize(c.centroids.len())).sqrt())
}

fn intrasets<T: Scalar>(c: &Clusters<'_, T>) -> Result<Vec<T>, ValidityError> {
    let m = euclid::<T>();
    c.members
        .iter()
        .map(|set| intraset_distance(&m, set).map_err(metric_err))
        .collect()
}

fn cdi_of<T: Scalar>(c: &Clusters<'_, T>) -> Result<T, ValidityError> {
    let within = intrasets(c)?;
    let num = (within.iter().map(|d| *d * *d).sum::<T>() / T::of_usize(within.len())).sqrt();
    let den = intraset_distance(&euclid::<T>(), &c.centroids).map_err(metric_err)?;
    if den <= T::zero() {
        return Err(ValidityError::CoincidentCentroids);
    }
    Ok(num / den)
}

fn min_centroid_distance<T: Scalar>(c: &Clusters<'_, T>) -> T {
    let m = euclid::<T>();
    let k = c.centroids.len();
    let mut best = T::infinity();
    for i in 0..k {
        for j in (i + 1)..k {
            best = best.min(m.dist_unchecked(&c.centroids[i], &c.centroids[j]));
        }
    }
    best
}

fn mdi_of<T: Scalar>(c: &Clusters<'_, T>) -> Result<T, ValidityError> {
    let max_within = intrasets(c)?.into_iter().fold(T::zero(), T::max);
    let sep = min_centroid_distance(c);
    if sep <= T::zero() {
        return Err(ValidityError::CoincidentCentroids);
    }
    Ok(max_within / sep)
}

fn dbi_of<T: Scalar>(c: &Clusters<'_, T>) -> Result<T, ValidityError> {
    let m = euclid::<T>();
    let k = c.centroids.len();
    let scatter = c
        .centroids
        .iter()
        .zip(&c.members)
        .map(|(r, set)| point_to_set_distance(&m, r, set).map_err(metric_err))
        .collect::<Result<Vec<T>, _>>()?;
    let mut total = T::zero();
    for i in 0..k {
        let mut worst = T::zero();
        for j in 0..k {
            if i == j {
                continue;
            }
            let d = m.dist_unchecked(&c.centroids[i], &c.centroids[j]);
            if d <= T::zero() {
                return Err(ValidityError::CoincidentCentroids);
            }
            worst = worst.max((scatter[i] + scatter[j]) / d);
        }
        total = total + worst;
    }
    Ok(total / T::of_usize(k))
}

/// Mean Index Adequacy: root mean over clusters of the squared centroid-to-members distance.
pub fn mia<T: Scalar, V: AsRef<[T]>>(
    data: &[V],
    partition: &Partition<T>,
) -> Result<T, ValidityError> {
    mia_of(&clusters(data, partition)?)
}

/// Clustering Dispersion Index: root mean squared cluster intraset distance
/// divided by the intraset distance of the centroids.
pub fn cdi<T: Scalar, V: AsRef<[T]>>(
    data: &[V],
    partition: &Partition<T>,
) -> Result<T, ValidityError> {
    cdi_of(&clusters(data, partition)?)
}

/// Modified Dunn Index: largest cluster intraset distance over the smallest
/// centroid separation.
pub fn mdi<T: Scalar, V: AsRef<[T]>>(
    data: &[V],
    partition: &Partition<T>,
) -> Result<T, ValidityError> {
    mdi_of(&clusters(data, partition)?)
}

/// Davies–Bouldin index with scatter measured as centroid-to-members distance.
pub fn dbi<T: Scalar, V: AsRef<[T]>>(
    data: &[V],
    partition: &Partition<T>,
) -> Result<T, ValidityError> {
    dbi_of(&clusters(data, partition)?)
}

/// All four indices for one partition.
pub fn evaluate<T: Scalar, V: AsRef<[T]>>(
    data: &[V],
    partition: &Partition<T>,
) -> Result<ValidityReport<T>, ValidityError> {
    let c = clusters(data, partition)?;
    Ok(ValidityReport {
        method_tag: partition.method_tag().to_string(),
        requested_k: partition.requested_k(),
        effective_k: partition.k(),
        cdi: cdi_of(&c)?,
        mdi: mdi_of(&c)?,
        dbi: dbi_of(&c)?,
        mia: mia_of(&c)?,
    })
}

/// Adjusted Rand index between a clustering and reference labels.
///
/// When both labelings are trivial in the same way (the index is 0/0) the
/// result is 1 if they describe the same grouping and 0 otherwise.
pub fn ground_truth_agreement(
    assignment: &[usize],
    labels: &[usize],
) -> Result<f64, ValidityError> {
    if assignment.len() != labels.len() {
        return Err(ValidityError::SizeMismatch {
            partition: assignment.len(),
            data: labels.len(),
        });
    }
    let pairs = |c: u64| (c * c.saturating_sub(1) / 2) as f64;
    let mut joint: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&a, &b) in assignment.iter().zip(labels) {
        *joint.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    let index: f64 = joint.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(assignment.len() as u64);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return Ok(if index == max { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// Requested K values at which the compared methods deliver different
/// effective K; indices are only comparable at equal cluster counts.
pub fn comparability_issues<T>(reports: &[ValidityReport<T>]) -> Vec<String> {
    let mut by_k: BTreeMap<usize, Vec<&ValidityReport<T>>> = BTreeMap::new();
    for r in reports {
        by_k.entry(r.requested_k).or_default().push(r);
    }
    by_k.into_iter()
        .filter_map(|(k, rows)| {
            let off: Vec<String> = rows
                .iter()
                .filter(|r| r.effective_k != k)
                .map(|r| format!("{} delivered {}", r.method_tag, r.effective_k))
                .collect();
            (!off.is_empty())
                .then(|| format!("K={k}: {} (not comparable with K={k} rows)", off.join(", ")))
        })
        .collect()
}

pub const VALIDITY_HEADER: &str = "method,k,effective_k,cdi,mdi,dbi,mia";

pub fn write_validity_csv<T: Scalar, W: Write>(
    writer: W,
    reports: &[ValidityReport<T>],
) -> io::Result<()> {
    let mut w = io::BufWriter::new(writer);
    writeln!(w, "{VALIDITY_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.method_tag, r.requested_k, r.effective_k, r.cdi, r.mdi, r.dbi, r.mia
        )?;
    }
    w.flush()
}

/// Reads a validity CSV; a `bdi` column is accepted in place of `dbi`.
pub fn read_validity_csv<R: Read>(reader: R) -> Result<Vec<ValidityReport<f64>>, ValidityError> {
    let fmt = |e: &dyn std::fmt::Display| ValidityError::Format(e.to_string());
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| fmt(&e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| {
        col(name).ok_or_else(|| ValidityError::Format(format!("missing column {name}")))
    };
    let (im, ik, ie) = (need("method")?, need("k")?, need("effective_k")?);
    let (ic, imd, ia) = (need("cdi")?, need("mdi")?, need("mia")?);
    let idb = col("dbi")
        .or_else(|| col("bdi"))
        .ok_or_else(|| ValidityError::Format("missing column dbi".into()))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| fmt(&e))?;
        let f = |i: usize| rec[i].parse::<f64>().map_err(|e| fmt(&e));
        let u = |i: usize| rec[i].parse::<usize>().map_err(|e| fmt(&e));
        out.push(ValidityReport {
            method_tag: rec[im].to_string(),
            requested_k: u(ik)?,
            effective_k: u(ie)?,
            cdi: f(ic)?,
            mdi: f(imd)?,
            dbi: f(idb)?,
            mia: f(ia)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_clusters() -> (Vec<Vec<f64>>, Partition<f64>) {
        let data = vec![
            vec![0.0, 0.0],
            vec![0.0, 2.0],
            vec![4.0, 0.0],
            vec![4.0, 2.0],
        ];
        let p = Partition::from_labels(&data, vec![0, 0, 1, 1], "t", 0).unwrap();
        (data, p)
    }

    #[test]
    fn hand_computed_two_cluster_case() {
        let (data, p) = two_clusters();
        let r = evaluate(&data, &p).unwrap();
        assert!((r.mia - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((r.cdi - 0.5).abs() < 1e-12);
        assert!((r.mdi - 0.25).abs() < 1e-12);
        assert!((r.dbi - 0.5).abs() < 1e-12);
        assert_eq!(r.effective_k, 2);
    }

    #[test]
    fn singletons_score_zero() {
        let data = vec![vec![0.1, 0.3], vec![0.7, 0.2], vec![0.5, 0.9]];
        let p = Partition::from_labels(&data, vec![0, 1, 2], "t", 0).unwrap();
        let r = evaluate(&data, &p).unwrap();
        assert_eq!((r.cdi, r.mdi, r.dbi, r.mia), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn degenerate_partitions() {
        let data = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let one = Partition::from_labels(&data, vec![0, 0], "t", 0).unwrap();
        assert_eq!(cdi(&data, &one), Err(ValidityError::SingleCluster));
        let data = vec![
            vec![0.0, 0.0],
            vec![2.0, 2.0],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
        ];
        let coincident = Partition::from_labels(&data, vec![0, 0, 1, 1], "t", 0).unwrap();
        assert_eq!(
            mdi(&data, &coincident),
            Err(ValidityError::CoincidentCentroids)
        );
        assert_eq!(
            dbi(&data, &coincident),
            Err(ValidityError::CoincidentCentroids)
        );
        let (d4, p) = two_clusters();
        assert!(matches!(
            mia(&d4[..3], &p),
            Err(ValidityError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn ari_cases() {
        assert_eq!(
            ground_truth_agreement(&[0, 0, 1, 1, 2], &[5, 5, 3, 3, 9]).unwrap(),
            1.0
        );
        assert_eq!(
            ground_truth_agreement(&[0, 0, 0, 0], &[0, 1, 0, 2]).unwrap(),
            0.0
        );
        assert!(ground_truth_agreement(&[0, 1], &[0]).is_err());
        // sklearn reference: adjusted_rand_score([0,0,1,1],[0,0,1,2]) = 0.5714285714285715
        let v = ground_truth_agreement(&[0, 0, 1, 1], &[0, 0, 1, 2]).unwrap();
        assert!((v - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn comparability_flags_mismatched_k() {
        let mk = |m: &str, k, e| ValidityReport {
            method_tag: m.into(),
            requested_k: k,
            effective_k: e,
            cdi: 0.0,
            mdi: 0.0,
            dbi: 0.0,
            mia: 0.0,
        };
        let issues = comparability_issues(&[mk("km", 20, 20), mk("som", 20, 18), mk("km", 5, 5)]);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].contains("som delivered 18"));
    }

    #[test]
    fn csv_roundtrip_and_bdi_alias() {
        let (data, p) = two_clusters();
        let r = evaluate(&data, &p).unwrap();
        let mut buf = Vec::new();
        write_validity_csv(&mut buf, std::slice::from_ref(&r)).unwrap();
        assert_eq!(read_validity_csv(buf.as_slice()).unwrap(), vec![r]);
        let alias = "method,k,effective_k,cdi,mdi,bdi,mia\nkm,2,2,0.5,0.25,0.75,0.1\n";
        assert_eq!(read_validity_csv(alias.as_bytes()).unwrap()[0].dbi, 0.75);
    }
}
