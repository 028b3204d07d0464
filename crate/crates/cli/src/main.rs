//! `tilemv` — command-line front end for the sparse kernel library.
//!
//! Subcommands cover the whole pipeline: `convert` turns Matrix Market
//! files (or generated fixtures) into the internal formats,
//! `bench-table` times the execution engine into a performance table,
//! `tune` picks workload sizes from such a table, `spmv` runs a single
//! multiply, `pagerank`/`hits`/`rwr` solve the mining problems,
//! `partition` and `dist-pagerank` drive the multi-partition path, and
//! `report` renders CSV/SVG summaries of the emitted artifacts.
//!
//! Exit codes: 0 success, 2 bad flags, 3 bad input files, 4 stale or
//! broken model tables. Every artifact is deterministic for fixed
//! flags and seed; only measured benchmark rates and their timestamps
//! depend on the host.

use clap::Parser;
use std::process;

mod cli;
mod commands;
mod common;
mod config;
mod svg;

use common::CliError;

fn main() {
    // Die quietly when the reader of a pipe goes away (`tilemv ... |
    // head`) instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let args = cli::Cli::parse();
    if let Err(err) = run(args) {
        eprintln!("tilemv: {err}");
        process::exit(err.exit_code());
    }
}

fn run(args: cli::Cli) -> Result<(), CliError> {
    let cfg = config::Config::load(args.config.as_deref())?;
    let hw = common::load_hw(args.hw.as_deref(), &cfg)?;
    match args.command {
        cli::Commands::Convert(a) => commands::convert(&a, &cfg, &hw),
        cli::Commands::BenchTable(a) => commands::bench_table(&a, &cfg, &hw),
        cli::Commands::Tune(a) => commands::tune(&a, &cfg, &hw),
        cli::Commands::Spmv(a) => commands::spmv(&a, &cfg, &hw),
        cli::Commands::Pagerank(a) => commands::pagerank(&a, &cfg, &hw),
        cli::Commands::Hits(a) => commands::hits(&a, &cfg, &hw),
        cli::Commands::Rwr(a) => commands::rwr(&a, &cfg, &hw),
        cli::Commands::Partition(a) => commands::partition(&a, &cfg, &hw),
        cli::Commands::DistPagerank(a) => commands::dist_pagerank(&a, &cfg, &hw),
        cli::Commands::Report(a) => commands::report(&a, &cfg, &hw),
    }
}
