//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "rlpclust",
    version,
    about = "Load pattern extraction, clustering and validity sweeps for hourly meter data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic population of hourly series.
    Synth(SynthArgs),
    /// Turn hourly readings into 96-value load patterns.
    Extract(ExtractArgs),
    /// Cluster load patterns at one K.
    Cluster(ClusterArgs),
    /// Compute validity indices for several methods over a K range.
    Sweep(SweepArgs),
    /// Tabulate cluster sizes and draw per-cluster profile plots.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Readings CSV to write (`meter_id,timestamp,kwh`).
    #[arg(long)]
    pub readings: PathBuf,
    /// Labels CSV to write (`meter_id,label`).
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 2012)]
    pub year: i32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub households: usize,
    /// Households without a winter increase.
    #[arg(long, default_value_t = 0)]
    pub households_flat: usize,
    #[arg(long, default_value_t = 0)]
    pub cabins_summer_off: usize,
    #[arg(long, default_value_t = 0)]
    pub cabins_winter_off: usize,
    #[arg(long, default_value_t = 0)]
    pub lighting: usize,
    #[arg(long, default_value_t = 0)]
    pub industrial: usize,
    /// Meters emitting uniform noise.
    #[arg(long, default_value_t = 0)]
    pub noise_pv: usize,
    /// Standard deviation of the multiplicative reading noise.
    #[arg(long, default_value_t = 0.15)]
    pub noise_sd: f64,
    /// Every meter follows its class template exactly (no atypical meters,
    /// absences or partial cabin occupancy).
    #[arg(long)]
    pub homogeneous: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Readings CSV (`meter_id,timestamp,kwh`).
    #[arg(long)]
    pub input: PathBuf,
    /// RLP CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional CSV of rejected meters (`meter_id,reason`).
    #[arg(long)]
    pub rejections: Option<PathBuf>,
    /// First summer month (1-12).
    #[arg(long, default_value_t = 5)]
    pub summer_start: u32,
    /// Last summer month (1-12).
    #[arg(long, default_value_t = 9)]
    pub summer_end: u32,
    /// Holiday override file: one date per line, `-date` removes a holiday.
    #[arg(long)]
    pub holidays: Option<PathBuf>,
    /// Minimum observed days in each of the four contexts.
    #[arg(long, default_value_t = 10)]
    pub min_days: u32,
    /// Accept meters whose readings are all zero.
    #[arg(long)]
    pub keep_all_zero: bool,
}

#[derive(Debug, Args, Clone)]
pub struct MethodArgs {
    /// One of som, km, skm, hc-w2, hc-s5, hc-a2, hc-sc, hc-ac, or `hc` with
    /// --linkage and --metric.
    #[arg(long)]
    pub method: String,
    /// Linkage for `--method hc`: single, average or ward.
    #[arg(long)]
    pub linkage: Option<String>,
    /// Metric for `--method hc`: euclidean, cosine or minkowski:<p>.
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub som_rows: usize,
    #[arg(long, default_value_t = 10)]
    pub som_cols: usize,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// RLP CSV produced by `extract`.
    #[arg(long)]
    pub rlp: PathBuf,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// k-means restarts (km, skm and the unit clustering of som).
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Assignments CSV to write (`meter_id,cluster`).
    #[arg(long)]
    pub assignments: PathBuf,
    /// Centroids CSV to write (`cluster,swd_h00..wwe_h23`).
    #[arg(long)]
    pub centroids: Option<PathBuf>,
    /// SOM weight dump (som only).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Dendrogram dump (hierarchical methods only).
    #[arg(long)]
    pub dendrogram: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub rlp: PathBuf,
    /// Comma-separated method shorthands.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "som,km,skm,hc-w2,hc-s5,hc-a2,hc-sc,hc-ac"
    )]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    #[arg(long, default_value_t = 50)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 10)]
    pub som_rows: usize,
    #[arg(long, default_value_t = 10)]
    pub som_cols: usize,
    /// Validity CSV to write (`method,k,effective_k,cdi,mdi,dbi,mia`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub rlp: PathBuf,
    /// Assignments CSV; repeat for several methods. The file stem names the
    /// method.
    #[arg(long, required = true)]
    pub assignments: Vec<PathBuf>,
    /// Directory for `sizes.csv` and one SVG per assignments file.
    #[arg(long)]
    pub out_dir: PathBuf,
}
