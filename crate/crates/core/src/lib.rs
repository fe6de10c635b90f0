//! Representative Load Pattern (RLP) extraction and clustering for hourly
//! electricity meter data.
//!
//! The pipeline turns hourly readings into 96-value load patterns (four
//! loading contexts × 24 hours), clusters them with k-means, spherical
//! k-means, SOM + k-means or agglomerative hierarchical clustering, and scores
//! the resulting partitions with four internal validity indices.
//!
//! The numerical modules are generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which is what the extraction
//! step produces.

pub mod calendar;
pub mod hier;
pub mod ingest;
pub mod kmeans;
pub mod metrics;
pub mod partition;
pub mod rlp;
pub mod scalar;
pub mod som;
pub mod synth;
pub mod validity;

pub use calendar::{classify_day, norwegian_holidays, DayContext, HolidayCalendar, SeasonConfig};
pub use ingest::{parse_readings, validate_series, ConsumptionSeries, QualityPolicy};
pub use partition::{ClusterError, Partition};
pub use rlp::{extract_all, extract_rlp, Rlp, RlpMatrix, RLP_LEN};
pub use scalar::Scalar;

pub type Metric64 = metrics::Metric<f64>;
pub type Metric32 = metrics::Metric<f32>;
pub type Partition64 = partition::Partition<f64>;
pub type Partition32 = partition::Partition<f32>;
pub type KmeansFit64 = kmeans::KmeansFit<f64>;
pub type Dendrogram64 = hier::Dendrogram<f64>;
pub type LinkageSpec64 = hier::LinkageSpec<f64>;
pub type SomModel64 = som::SomModel<f64>;
pub type SomModel32 = som::SomModel<f32>;
pub type TrainSchedule64 = som::TrainSchedule<f64>;
pub type ValidityReport64 = validity::ValidityReport<f64>;
