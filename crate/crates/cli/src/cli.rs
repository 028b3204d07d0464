//! Flag definitions. Most value flags are optional here and resolved
//! in three steps — explicit flag, then the `--config` file key of the
//! same name, then the built-in default — so a config file can pin
//! project-wide settings without repeating them on every call.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "tilemv", version, about = "Tiled sparse kernels: convert, tune, multiply, mine, distribute")]
pub struct Cli {
    /// TOML file of `flag-name = value` defaults, consulted when a
    /// flag is omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Hardware profile JSON; defaults to the built-in profile
    /// (32-lane warps, 30 SMs x 32 warps, 8 memory partitions).
    #[arg(long, global = true, value_name = "PATH")]
    pub hw: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Commands,
}

#[derive(Debug, Subcommand)]
pub enum Commands {
    /// Read or generate a matrix and write it in another format.
    Convert(ConvertArgs),
    /// Time the execution engine and write a performance table.
    BenchTable(BenchTableArgs),
    /// Pick per-tile workload sizes from a performance table.
    Tune(TuneArgs),
    /// Run one sparse matrix-vector multiply.
    Spmv(SpmvArgs),
    /// PageRank scores for a directed graph.
    Pagerank(SolveArgs),
    /// Hub and authority scores for a directed graph.
    Hits(SolveArgs),
    /// Random walk with restart from one or more query vertices.
    Rwr(RwrArgs),
    /// Split rows across partitions and write the partition plan.
    Partition(PartitionArgs),
    /// PageRank with the multiply spread over partitions.
    DistPagerank(DistPagerankArgs),
    /// Render CSV/SVG summaries from matrices and emitted artifacts.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Matrix Market file to read.
    #[arg(long, value_name = "PATH", conflicts_with = "gen")]
    pub input: Option<PathBuf>,

    /// Generate the input instead: `power-law` or `uniform`.
    #[arg(long, value_name = "KIND")]
    pub gen: Option<String>,

    /// Node count for generated matrices (square).
    #[arg(long)]
    pub n: Option<usize>,

    /// Row count for `--gen uniform` (overrides --n).
    #[arg(long)]
    pub rows: Option<usize>,

    /// Column count for `--gen uniform` (overrides --n).
    #[arg(long)]
    pub cols: Option<usize>,

    /// Power-law exponent for `--gen power-law`; must exceed 1.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Nonzero budget for generated matrices.
    #[arg(long)]
    pub nnz: Option<usize>,

    /// Generator seed; identical seeds give identical matrices.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output format: `mtx` (canonical Matrix Market) or
    /// `tile-composite` (packed JSON).
    #[arg(long, value_name = "FORMAT")]
    pub to: Option<String>,

    /// Columns per dense tile when packing tile-composite.
    #[arg(long)]
    pub tile_width: Option<usize>,

    /// Force one workload size for every tile instead of the
    /// occupancy-derived default.
    #[arg(long)]
    pub workload_size: Option<usize>,

    /// Remainder storage when packing: `hyb` or `composite`.
    #[arg(long)]
    pub remainder: Option<String>,

    /// File to write.
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchTableArgs {
    /// Table file to write.
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,

    /// `cached` (gathers stay inside one tile) or `uncached`
    /// (gathers wander the whole vector).
    #[arg(long)]
    pub mode: Option<String>,

    /// Largest workload size the table covers.
    #[arg(long)]
    pub upper_bound: Option<usize>,

    /// Write the analytic model table instead of timing this host;
    /// instant and byte-reproducible.
    #[arg(long)]
    pub synthetic: bool,

    /// Timing samples per shape (median recorded).
    #[arg(long)]
    pub reps: Option<usize>,

    /// Minimum wall time per sample in milliseconds.
    #[arg(long)]
    pub min_sample_ms: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Matrix Market file to tune for.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,

    /// Columns per dense tile.
    #[arg(long)]
    pub tile_width: Option<usize>,

    /// Tune against analytic tables instead of measured files.
    #[arg(long, conflicts_with_all = ["cached_table", "uncached_table"])]
    pub synthetic: bool,

    /// Upper bound for the analytic tables (with --synthetic).
    #[arg(long)]
    pub upper_bound: Option<usize>,

    /// Measured table for in-tile gathers.
    #[arg(long, value_name = "PATH")]
    pub cached_table: Option<PathBuf>,

    /// Measured table for full-width gathers (remainder).
    #[arg(long, value_name = "PATH")]
    pub uncached_table: Option<PathBuf>,

    /// Accept tables whose hardware fingerprint does not match.
    #[arg(long)]
    pub force: bool,

    /// Tuning plan file to write.
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpmvArgs {
    /// Matrix Market file.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,

    /// Kernel: csr-scalar, csr-vector, coo, ell, hyb, tile-coo or
    /// tile-composite.
    #[arg(long)]
    pub backend: Option<String>,

    /// Input vector as a comma-separated list.
    #[arg(long, value_name = "V0,V1,...", conflicts_with = "x_file")]
    pub x: Option<String>,

    /// Input vector as a JSON array file; defaults to all ones.
    #[arg(long, value_name = "PATH")]
    pub x_file: Option<PathBuf>,

    /// Arithmetic width: `double` or `single`.
    #[arg(long)]
    pub precision: Option<String>,

    /// Columns per dense tile for the tiled backends.
    #[arg(long)]
    pub tile_width: Option<usize>,

    /// Tuning plan to take workload sizes from (tile-composite only).
    #[arg(long, value_name = "PATH")]
    pub plan: Option<PathBuf>,

    /// Accept a plan whose hardware fingerprint does not match.
    #[arg(long)]
    pub force: bool,

    /// Write the result vector as a JSON array.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Write the execution counters as JSON (tiled backends only).
    #[arg(long, value_name = "PATH")]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Matrix Market file holding the adjacency matrix.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,

    /// Kernel used for the per-iteration multiply.
    #[arg(long)]
    pub backend: Option<String>,

    /// Walk-continuation weight c in [0, 1].
    #[arg(long)]
    pub damping: Option<f64>,

    /// L1 convergence threshold.
    #[arg(long)]
    pub tolerance: Option<f64>,

    /// Iteration cap.
    #[arg(long)]
    pub max_iterations: Option<usize>,

    /// Write per-node scores as CSV.
    #[arg(long, value_name = "PATH")]
    pub ranks: Option<PathBuf>,

    /// Write the per-iteration residual as CSV.
    #[arg(long, value_name = "PATH")]
    pub residuals: Option<PathBuf>,

    /// How many top-scoring nodes to print.
    #[arg(long)]
    pub top: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RwrArgs {
    #[command(flatten)]
    pub solve: SolveArgs,

    /// Query vertex; repeat the flag to score several.
    #[arg(long = "query", value_name = "NODE", required = true)]
    pub queries: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Matrix Market file.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,

    /// Partition count; also the worker thread count downstream.
    #[arg(long)]
    pub partitions: Option<usize>,

    /// Partition plan file to write.
    #[arg(long, value_name = "PATH")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DistPagerankArgs {
    #[command(flatten)]
    pub solve: SolveArgs,

    /// Partition count; also the worker thread count.
    #[arg(long)]
    pub partitions: Option<usize>,

    /// Reuse a plan from `partition` instead of computing one.
    #[arg(long, value_name = "PATH")]
    pub plan: Option<PathBuf>,

    /// Exchange vectors over loopback TCP instead of in process.
    #[arg(long)]
    pub socket: bool,

    /// Write per-iteration communication volumes as CSV.
    #[arg(long, value_name = "PATH")]
    pub comm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Matrix Market file: emits the column-degree histogram.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,

    /// Residual CSV from a solver run: emits a convergence plot.
    #[arg(long, value_name = "PATH")]
    pub residuals: Option<PathBuf>,

    /// Performance table JSON: emits a rate profile.
    #[arg(long, value_name = "PATH")]
    pub table: Option<PathBuf>,

    /// Directory the CSV/SVG files are written into.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}
