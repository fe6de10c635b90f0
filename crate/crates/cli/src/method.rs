//! Clustering methods selectable from the command line.

use std::fmt;
use std::str::FromStr;

use rlp_core::hier::{cut, hcluster, Linkage, LinkageSpec};
use rlp_core::kmeans::{kmeans, spherical_kmeans, KmeansConfig};
use rlp_core::som::{cluster_units, train_som, SomGrid};
use rlp_core::{ClusterError, Dendrogram64, Metric64, Partition64, SomModel64, TrainSchedule64};

use crate::CliError;

/// The eight shorthand names accepted by `--method`.
pub const SHORTHANDS: [&str; 8] = [
    "som", "km", "skm", "hc-w2", "hc-s5", "hc-a2", "hc-sc", "hc-ac",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MethodSpec {
    Som { rows: usize, cols: usize },
    Kmeans,
    SphericalKmeans,
    Hier(LinkageSpec<f64>),
}

impl MethodSpec {
    pub fn hier(linkage: Linkage, metric: Metric64) -> Result<Self, CliError> {
        LinkageSpec::new(linkage, metric)
            .map(MethodSpec::Hier)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Every method in shorthand order, SOM on the default 10×10 grid.
    pub fn all() -> Vec<MethodSpec> {
        SHORTHANDS.iter().map(|s| s.parse().unwrap()).collect()
    }

    /// Short name used in output files: the shorthand for the eight standard
    /// methods, `hc-<linkage letter><metric>` for other hierarchical ones.
    pub fn tag(&self) -> String {
        match self {
            MethodSpec::Som { .. } => "som".into(),
            MethodSpec::Kmeans => "km".into(),
            MethodSpec::SphericalKmeans => "skm".into(),
            MethodSpec::Hier(spec) => {
                let l = match spec.linkage {
                    Linkage::Single => 's',
                    Linkage::Average => 'a',
                    Linkage::Ward => 'w',
                };
                let m = match spec.metric {
                    Metric64::Euclidean => "2".to_string(),
                    Metric64::Cosine => "c".to_string(),
                    Metric64::Minkowski(p) => p.to_string(),
                };
                format!("hc-{l}{m}")
            }
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for MethodSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let five = || Metric64::minkowski(5.0).expect("order 5 is valid");
        match s {
            "som" => Ok(MethodSpec::Som { rows: 10, cols: 10 }),
            "km" => Ok(MethodSpec::Kmeans),
            "skm" => Ok(MethodSpec::SphericalKmeans),
            "hc-w2" => MethodSpec::hier(Linkage::Ward, Metric64::Euclidean),
            "hc-s5" => MethodSpec::hier(Linkage::Single, five()),
            "hc-a2" => MethodSpec::hier(Linkage::Average, Metric64::Euclidean),
            "hc-sc" => MethodSpec::hier(Linkage::Single, Metric64::Cosine),
            "hc-ac" => MethodSpec::hier(Linkage::Average, Metric64::Cosine),
            other => Err(CliError::Usage(format!(
                "unknown method `{other}`; expected one of {}",
                SHORTHANDS.join(", ")
            ))),
        }
    }
}

/// Parses `euclidean`, `cosine` or `minkowski:<p>`.
pub fn parse_metric(s: &str) -> Result<Metric64, CliError> {
    match s {
        "euclidean" => Ok(Metric64::Euclidean),
        "cosine" => Ok(Metric64::Cosine),
        _ => {
            let p = s
                .strip_prefix("minkowski:")
                .and_then(|p| p.parse::<f64>().ok())
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "unknown metric `{s}`; use euclidean, cosine or minkowski:<p>"
                    ))
                })?;
            Metric64::minkowski(p).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

pub fn parse_linkage(s: &str) -> Result<Linkage, CliError> {
    match s {
        "single" => Ok(Linkage::Single),
        "average" => Ok(Linkage::Average),
        "ward" => Ok(Linkage::Ward),
        _ => Err(CliError::Usage(format!(
            "unknown linkage `{s}`; use single, average or ward"
        ))),
    }
}

/// The K-independent part of a method: a trained map or a dendrogram.
#[derive(Clone, Debug)]
pub enum Prepared {
    Som(SomModel64),
    Kmeans,
    SphericalKmeans,
    Hier(Dendrogram64),
}

/// Trains the map or builds the dendrogram once so that many K can be cut
/// from it.
pub fn prepare(
    method: &MethodSpec,
    data: &[Vec<f64>],
    seed: u64,
) -> Result<Prepared, ClusterError> {
    Ok(match method {
        MethodSpec::Som { rows, cols } => {
            let grid = SomGrid::new(*rows, *cols)?;
            Prepared::Som(train_som(
                data,
                grid,
                &TrainSchedule64::for_grid(&grid),
                seed,
            )?)
        }
        MethodSpec::Kmeans => Prepared::Kmeans,
        MethodSpec::SphericalKmeans => Prepared::SphericalKmeans,
        MethodSpec::Hier(spec) => Prepared::Hier(hcluster(data, spec)?),
    })
}

/// Partition with (at most, for SOM) `k` clusters, tagged with `tag`.
pub fn partition_at(
    prepared: &Prepared,
    tag: &str,
    data: &[Vec<f64>],
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<Partition64, ClusterError> {
    let cfg = KmeansConfig::new(k, seed).with_restarts(restarts);
    let p = match prepared {
        Prepared::Som(model) => cluster_units(model, data, &cfg)?.partition,
        Prepared::Kmeans => kmeans(data, &cfg)?.partition,
        Prepared::SphericalKmeans => spherical_kmeans(data, &cfg)?.partition,
        Prepared::Hier(d) => cut(d, data, k, tag)?,
    };
    let requested = p.requested_k();
    Ok(
        Partition64::new(p.assignment().to_vec(), p.centroids().to_vec(), tag, seed)?
            .with_requested_k(requested),
    )
}

/// One-shot clustering at a single K.
pub fn fit(
    method: &MethodSpec,
    data: &[Vec<f64>],
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<(Prepared, Partition64), ClusterError> {
    let prepared = prepare(method, data, seed)?;
    let p = partition_at(&prepared, &method.tag(), data, k, seed, restarts)?;
    Ok((prepared, p))
}
