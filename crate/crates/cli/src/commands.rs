//! One function per subcommand. Each resolves its knobs (flag, then
//! config key, then default), runs the library, writes the requested
//! artifacts and prints a short summary to stdout.

use std::collections::BTreeMap;
use std::time::Duration;

use tilemv::autotune::{choose_tiles, TuningPlan};
use tilemv::distrib::{
    bitonic_partition, column_partition_volume, distributed_pagerank, CommStats, ExchangeMode,
    PartitionPlan,
};
use tilemv::exec::{default_workload_sizes, Backend, HardwareProfile, PreparedMatrix};
use tilemv::matrix::{
    generate_power_law, generate_uniform, write_matrix_market, CsrMatrix, DegreeHistogram,
};
use tilemv::mining::{self, RankVector, SolverConfig};
use tilemv::perfmodel::{
    build_perf_table_with, BenchOptions, PerfTable, TableMode, DEFAULT_UPPER_BOUND,
};
use tilemv::transform::{
    build_tile_composite, build_tile_coo, sort_columns_desc, RemainderMode, WorkloadSizes,
    DEFAULT_TILE_WIDTH,
};

use crate::cli::*;
use crate::common::*;
use crate::config::Config;
use crate::svg;

fn plural(n: usize) -> &'static str {
    if n == 1 {
        "iteration"
    } else {
        "iterations"
    }
}

fn print_convergence(r: &RankVector) {
    let residual = r.residual_history.last().copied().unwrap_or(0.0);
    if r.converged {
        println!(
            "converged in {} {} (residual = {})",
            r.iterations,
            plural(r.iterations),
            fmt_f64(residual)
        );
    } else {
        println!(
            "did not converge within {} {} (residual = {})",
            r.iterations,
            plural(r.iterations),
            fmt_f64(residual)
        );
    }
}

fn residual_rows(history: &[f64]) -> impl Iterator<Item = String> + '_ {
    history
        .iter()
        .enumerate()
        .map(|(i, r)| format!("{},{}", i + 1, fmt_f64(*r)))
}

// ---------------------------------------------------------------- convert

pub fn convert(args: &ConvertArgs, cfg: &Config, hw: &HardwareProfile) -> Result<(), CliError> {
    let m = load_or_generate(args, cfg)?;
    let to = match &args.to {
        Some(t) => t.clone(),
        None => cfg.string("to")?.unwrap_or_else(|| "mtx".into()),
    };
    match to.as_str() {
        "mtx" => {
            write_text(&args.output, &write_matrix_market(&m.to_coo()))?;
        }
        "tile-composite" => {
            let tile_width = args
                .tile_width
                .or(cfg.usize("tile-width")?)
                .unwrap_or(DEFAULT_TILE_WIDTH);
            check_range(tile_width >= 1, "--tile-width must be at least 1")?;
            let remainder = match args
                .remainder
                .clone()
                .or(cfg.string("remainder")?)
                .as_deref()
            {
                None | Some("hyb") => RemainderMode::Hyb,
                Some("composite") => RemainderMode::Composite,
                Some(other) => {
                    return Err(usage(format!(
                        "unknown remainder mode {other:?}, expected hyb or composite"
                    )))
                }
            };
            let sizes = match args.workload_size.or(cfg.usize("workload-size")?) {
                Some(ws) => {
                    check_range(ws >= 1, "--workload-size must be at least 1")?;
                    let layout = tilemv::transform::enumerate_tiles(
                        &sort_columns_desc(&m),
                        tile_width,
                    )?;
                    WorkloadSizes::uniform(layout.spans.len(), ws)
                }
                None => default_workload_sizes(&m, tile_width, hw)?,
            };
            let built = build_tile_composite(&m, tile_width, &sizes, hw.warp_size, remainder)?;
            write_text(&args.output, &built.to_json()?)?;
        }
        other => {
            return Err(usage(format!(
                "unknown output format {other:?}, expected mtx or tile-composite"
            )))
        }
    }
    println!(
        "wrote {} ({} x {}, {} nonzeros)",
        args.output.display(),
        m.num_rows,
        m.num_cols,
        m.nnz()
    );
    Ok(())
}

fn load_or_generate(args: &ConvertArgs, cfg: &Config) -> Result<CsrMatrix, CliError> {
    match (&args.input, &args.gen) {
        (Some(path), None) => load_matrix(path),
        (None, Some(kind)) => {
            let seed = args.seed.or(cfg.u64("seed")?).unwrap_or(42);
            let n = args.n.or(cfg.usize("n")?).unwrap_or(1000);
            check_range(n >= 1, "--n must be at least 1")?;
            match kind.as_str() {
                "power-law" => {
                    let alpha = args.alpha.or(cfg.f64("alpha")?).unwrap_or(2.2);
                    check_range(alpha > 1.0, "--alpha must exceed 1")?;
                    let nnz = args.nnz.or(cfg.usize("nnz")?).unwrap_or(8 * n);
                    Ok(generate_power_law(n, alpha, nnz, seed)?.to_csr())
                }
                "uniform" => {
                    let rows = args.rows.unwrap_or(n);
                    let cols = args.cols.unwrap_or(n);
                    check_range(rows >= 1 && cols >= 1, "--rows/--cols must be at least 1")?;
                    let nnz = args.nnz.or(cfg.usize("nnz")?).unwrap_or(8 * rows);
                    Ok(generate_uniform(rows, cols, nnz, seed).to_csr())
                }
                other => Err(usage(format!(
                    "unknown generator {other:?}, expected power-law or uniform"
                ))),
            }
        }
        _ => Err(usage("exactly one of --input or --gen is required")),
    }
}

// ------------------------------------------------------------- bench-table

pub fn bench_table(
    args: &BenchTableArgs,
    cfg: &Config,
    hw: &HardwareProfile,
) -> Result<(), CliError> {
    let mode_name = args
        .mode
        .clone()
        .or(cfg.string("mode")?)
        .unwrap_or_else(|| "cached".into());
    let mode = parse_table_mode(&mode_name)?;
    let upper_bound = args
        .upper_bound
        .or(cfg.usize("upper-bound")?)
        .unwrap_or(DEFAULT_UPPER_BOUND);
    check_range(upper_bound >= 1, "--upper-bound must be at least 1")?;
    let table = if args.synthetic {
        PerfTable::synthetic(hw, upper_bound, mode)?
    } else {
        let reps = args.reps.or(cfg.usize("reps")?).unwrap_or(3);
        check_range(reps >= 1, "--reps must be at least 1")?;
        let ms = args.min_sample_ms.or(cfg.u64("min-sample-ms")?).unwrap_or(2);
        let opts = BenchOptions {
            reps,
            min_sample: Duration::from_millis(ms),
        };
        build_perf_table_with(hw, upper_bound, mode, &opts)?
    };
    write_text(&args.output, &table.to_json()?)?;
    println!(
        "wrote {} ({} shapes, {} mode, workload sizes up to {})",
        args.output.display(),
        table.len(),
        mode_name,
        upper_bound
    );
    Ok(())
}

// -------------------------------------------------------------------- tune

pub fn tune(args: &TuneArgs, cfg: &Config, hw: &HardwareProfile) -> Result<(), CliError> {
    let m = load_matrix(&args.input)?;
    let tile_width = args
        .tile_width
        .or(cfg.usize("tile-width")?)
        .unwrap_or(DEFAULT_TILE_WIDTH);
    check_range(tile_width >= 1, "--tile-width must be at least 1")?;
    let (cached, uncached) = if args.synthetic {
        let ub = args
            .upper_bound
            .or(cfg.usize("upper-bound")?)
            .unwrap_or(DEFAULT_UPPER_BOUND);
        check_range(ub >= 1, "--upper-bound must be at least 1")?;
        (
            PerfTable::synthetic(hw, ub, TableMode::Cached)?,
            PerfTable::synthetic(hw, ub, TableMode::Uncached)?,
        )
    } else {
        let cp = args
            .cached_table
            .clone()
            .or(cfg.path("cached-table")?)
            .ok_or_else(|| usage("--cached-table is required unless --synthetic is set"))?;
        let up = args
            .uncached_table
            .clone()
            .or(cfg.path("uncached-table")?)
            .ok_or_else(|| usage("--uncached-table is required unless --synthetic is set"))?;
        (
            load_table(&cp, hw, args.force)?,
            load_table(&up, hw, args.force)?,
        )
    };
    let sorted = sort_columns_desc(&m);
    let plan = choose_tiles(&sorted, tile_width, &cached, &uncached, hw)?;
    write_text(&args.output, &plan.to_json()?)?;
    for (i, t) in plan.tiles.iter().enumerate() {
        println!(
            "tile {i}: workload size {}, predicted {:.3e} s",
            t.workload_size, t.predicted_time
        );
    }
    match &plan.remainder {
        Some(t) => println!(
            "remainder: workload size {}, predicted {:.3e} s",
            t.workload_size, t.predicted_time
        ),
        None => println!("remainder: empty"),
    }
    println!("total predicted time = {:.3e} s", plan.total_predicted_time());
    println!("wrote {}", args.output.display());
    Ok(())
}

// -------------------------------------------------------------------- spmv

pub fn spmv(args: &SpmvArgs, cfg: &Config, hw: &HardwareProfile) -> Result<(), CliError> {
    let m = load_matrix(&args.input)?;
    let backend = parse_backend(
        &args
            .backend
            .clone()
            .or(cfg.string("backend")?)
            .unwrap_or_else(|| "tile-composite".into()),
    )?;
    let precision = parse_precision(
        &args
            .precision
            .clone()
            .or(cfg.string("precision")?)
            .unwrap_or_else(|| "double".into()),
    )?;
    let x = build_x(args, &m)?;
    let prepared = prepare_backend(args, cfg, hw, &m, backend)?;
    let (y, stats) = prepared.spmv_prec(&x, hw, precision)?;

    println!("backend = {}", backend.name());
    println!("y = {}", preview(&y));
    if let Some(st) = &stats {
        println!("kernel launches = {}", st.kernel_launches);
        println!("work units = {}", st.work_units);
        println!("flops = {}", st.flops);
        println!("padded slots = {}", st.padded_slots);
        if let Some(mx) = st.x_fetches_per_tile.iter().max() {
            println!("max x fetches per tile = {mx}");
        }
        println!("x fetches in remainder = {}", st.x_fetches_remainder);
    }
    if let Some(path) = &args.output {
        let json = serde_json::to_string(&y).map_err(tilemv::Error::Json)?;
        write_text(path, &(json + "\n"))?;
    }
    if let Some(path) = &args.stats {
        match &stats {
            Some(st) => {
                let json = serde_json::to_string_pretty(st).map_err(tilemv::Error::Json)?;
                write_text(path, &(json + "\n"))?;
            }
            None => eprintln!(
                "tilemv: note: backend {} reports no execution counters; {} not written",
                backend.name(),
                path.display()
            ),
        }
    }
    Ok(())
}

fn build_x(args: &SpmvArgs, m: &CsrMatrix) -> Result<Vec<f64>, CliError> {
    if let Some(list) = &args.x {
        list.split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| usage(format!("--x: {e}")))
    } else if let Some(path) = &args.x_file {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text).map_err(tilemv::Error::Json)?)
    } else {
        Ok(vec![1.0; m.num_cols])
    }
}

fn prepare_backend(
    args: &SpmvArgs,
    cfg: &Config,
    hw: &HardwareProfile,
    m: &CsrMatrix,
    backend: Backend,
) -> Result<PreparedMatrix, CliError> {
    let tile_width = args.tile_width.or(cfg.usize("tile-width")?);
    if let Some(w) = tile_width {
        check_range(w >= 1, "--tile-width must be at least 1")?;
    }
    match (&args.plan, backend) {
        (Some(path), Backend::TileComposite) => {
            let text = std::fs::read_to_string(path)?;
            let plan = TuningPlan::from_json(&text)?;
            if plan.fingerprint != hw.fingerprint() {
                let err = tilemv::Error::FingerprintMismatch {
                    table: plan.fingerprint.clone(),
                    hardware: hw.fingerprint(),
                };
                if args.force {
                    eprintln!("tilemv: warning: {err} (continuing under --force)");
                } else {
                    return Err(err.into());
                }
            }
            let built = build_tile_composite(
                m,
                plan.tile_width,
                &plan.workload_sizes(),
                hw.warp_size,
                RemainderMode::Composite,
            )?;
            Ok(PreparedMatrix::TileComposite(built))
        }
        (Some(_), _) => Err(usage("--plan only applies to the tile-composite backend")),
        (None, Backend::TileComposite) if tile_width.is_some() => {
            let w = tile_width.unwrap();
            let sizes = default_workload_sizes(m, w, hw)?;
            let built = build_tile_composite(m, w, &sizes, hw.warp_size, RemainderMode::Hyb)?;
            Ok(PreparedMatrix::TileComposite(built))
        }
        (None, Backend::TileCoo) if tile_width.is_some() => {
            Ok(PreparedMatrix::TileCoo(build_tile_coo(m, tile_width.unwrap())?))
        }
        (None, b) => Ok(b.prepare(m, hw)?),
    }
}

// ---------------------------------------------------------------- solvers

fn solver_config(
    args: &SolveArgs,
    cfg: &Config,
    default_damping: f64,
) -> Result<SolverConfig, CliError> {
    let damping = args.damping.or(cfg.f64("damping")?).unwrap_or(default_damping);
    check_range((0.0..=1.0).contains(&damping), "--damping must lie in [0, 1]")?;
    let tolerance = args.tolerance.or(cfg.f64("tolerance")?).unwrap_or(1e-8);
    check_range(tolerance > 0.0, "--tolerance must be positive")?;
    let max_iterations = args
        .max_iterations
        .or(cfg.usize("max-iterations")?)
        .unwrap_or(1000);
    check_range(max_iterations >= 1, "--max-iterations must be at least 1")?;
    let backend = parse_backend(
        &args
            .backend
            .clone()
            .or(cfg.string("backend")?)
            .unwrap_or_else(|| "tile-composite".into()),
    )?;
    Ok(SolverConfig {
        damping,
        tolerance,
        max_iterations,
        backend,
    })
}

fn top_count(args: &SolveArgs, cfg: &Config) -> Result<usize, CliError> {
    Ok(args.top.or(cfg.usize("top")?).unwrap_or(10))
}

pub fn pagerank(args: &SolveArgs, cfg: &Config, hw: &HardwareProfile) -> Result<(), CliError> {
    let m = load_matrix(&args.input)?;
    let sc = solver_config(args, cfg, 0.85)?;
    let r = mining::pagerank(&m, &sc, hw)?;
    print_convergence(&r);
    for i in top_k(&r.values, top_count(args, cfg)?) {
        println!("node {i}: {}", fmt_f64(r.values[i]));
    }
    if let Some(path) = &args.ranks {
        let rows = r
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{i},{}", fmt_f64(*v)));
        write_text(path, &csv("node,score", rows))?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.residuals {
        write_text(path, &csv("iteration,residual", residual_rows(&r.residual_history)))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn hits(args: &SolveArgs, cfg: &Config, hw: &HardwareProfile) -> Result<(), CliError> {
    let m = load_matrix(&args.input)?;
    let sc = solver_config(args, cfg, 0.85)?;
    let (auth, hub) = mining::hits(&m, &sc, hw)?;
    print_convergence(&auth);
    let k = top_count(args, cfg)?;
    println!("top authorities:");
    for i in top_k(&auth.values, k) {
        println!("node {i}: {}", fmt_f64(auth.values[i]));
    }
    println!("top hubs:");
    for i in top_k(&hub.values, k) {
        println!("node {i}: {}", fmt_f64(hub.values[i]));
    }
    if let Some(path) = &args.ranks {
        let rows = (0..auth.values.len()).map(|i| {
            format!(
                "{i},{},{}",
                fmt_f64(auth.values[i]),
                fmt_f64(hub.values[i])
            )
        });
        write_text(path, &csv("node,authority,hub", rows))?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.residuals {
        write_text(
            path,
            &csv("iteration,residual", residual_rows(&auth.residual_history)),
        )?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn rwr(args: &RwrArgs, cfg: &Config, hw: &HardwareProfile) -> Result<(), CliError> {
    let m = load_matrix(&args.solve.input)?;
    let sc = solver_config(&args.solve, cfg, 0.9)?;
    let k = top_count(&args.solve, cfg)?;
    let mut results: Vec<(usize, RankVector)> = Vec::with_capacity(args.queries.len());
    for &q in &args.queries {
        let r = mining::rwr(&m, q, &sc, hw)?;
        print!("query {q}: ");
        print_convergence(&r);
        for i in top_k(&r.values, k) {
            println!("node {i}: {}", fmt_f64(r.values[i]));
        }
        results.push((q, r));
    }
    if let Some(path) = &args.solve.ranks {
        let rows = results.iter().flat_map(|(q, r)| {
            r.values
                .iter()
                .enumerate()
                .map(move |(i, v)| format!("{q},{i},{}", fmt_f64(*v)))
        });
        write_text(path, &csv("query,node,score", rows))?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.solve.residuals {
        let rows = results.iter().flat_map(|(q, r)| {
            r.residual_history
                .iter()
                .enumerate()
                .map(move |(i, v)| format!("{q},{},{}", i + 1, fmt_f64(*v)))
        });
        write_text(path, &csv("query,iteration,residual", rows))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

// --------------------------------------------------------------- partition

pub fn partition(args: &PartitionArgs, cfg: &Config, _hw: &HardwareProfile) -> Result<(), CliError> {
    let m = load_matrix(&args.input)?;
    let p = args.partitions.or(cfg.usize("partitions")?).unwrap_or(2);
    check_range(p >= 1, "--partitions must be at least 1")?;
    let plan = bitonic_partition(&m, p)?;
    write_text(&args.output, &plan.to_json()?)?;
    let comm = CommStats::from_plan(&plan);
    println!("{} partitions over {} rows", p, plan.num_rows);
    println!("rows per partition = {:?}", plan.rows_per_partition);
    println!("nonzeros per partition = {:?}", plan.nnz_per_partition);
    println!(
        "row broadcast per round = {} elements (column split would ship {})",
        comm.total_elements,
        column_partition_volume(plan.num_rows, p)
    );
    println!("wrote {}", args.output.display());
    Ok(())
}

// ----------------------------------------------------------- dist-pagerank

pub fn dist_pagerank(
    args: &DistPagerankArgs,
    cfg: &Config,
    hw: &HardwareProfile,
) -> Result<(), CliError> {
    let m = load_matrix(&args.solve.input)?;
    let sc = solver_config(&args.solve, cfg, 0.85)?;
    let plan = match &args.plan {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let plan = PartitionPlan::from_json(&text)?;
            if let Some(p) = args.partitions {
                if p != plan.partitions {
                    return Err(usage(format!(
                        "--partitions {p} disagrees with the plan file ({} partitions)",
                        plan.partitions
                    )));
                }
            }
            plan
        }
        None => {
            let p = args.partitions.or(cfg.usize("partitions")?).unwrap_or(2);
            check_range(p >= 1, "--partitions must be at least 1")?;
            bitonic_partition(&m, p)?
        }
    };
    let mode = if args.socket {
        ExchangeMode::Socket
    } else {
        ExchangeMode::InProcess
    };
    let (r, rounds) = distributed_pagerank(&plan, &m, &sc, hw, mode)?;
    print_convergence(&r);
    for i in top_k(&r.values, top_count(&args.solve, cfg)?) {
        println!("node {i}: {}", fmt_f64(r.values[i]));
    }
    let per_round = rounds.first().map_or(0, |c| c.total_elements);
    let total: u64 = rounds.iter().map(|c| c.total_elements).sum();
    println!(
        "{} partitions, {} elements broadcast per round, {} total over {} rounds",
        plan.partitions,
        per_round,
        total,
        rounds.len()
    );
    if let Some(path) = &args.solve.ranks {
        let rows = r
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{i},{}", fmt_f64(*v)));
        write_text(path, &csv("node,score", rows))?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.solve.residuals {
        write_text(path, &csv("iteration,residual", residual_rows(&r.residual_history)))?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.comm {
        let rows = rounds.iter().enumerate().flat_map(|(it, c)| {
            c.sent_per_partition
                .iter()
                .enumerate()
                .map(move |(p, sent)| format!("{},{p},{sent}", it + 1))
        });
        write_text(path, &csv("iteration,partition,elements_sent", rows))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

// ------------------------------------------------------------------ report

pub fn report(args: &ReportArgs, _cfg: &Config, _hw: &HardwareProfile) -> Result<(), CliError> {
    if args.input.is_none() && args.residuals.is_none() && args.table.is_none() {
        return Err(usage(
            "give at least one of --input, --residuals or --table",
        ));
    }
    std::fs::create_dir_all(&args.out_dir)?;

    if let Some(path) = &args.input {
        let m = load_matrix(path)?;
        let counts = DegreeHistogram::of(&m).col_degree_counts();
        let rows = counts.iter().map(|(deg, n)| format!("{deg},{n}"));
        let csv_path = args.out_dir.join("degree_hist.csv");
        write_text(&csv_path, &csv("degree,count", rows))?;
        println!("wrote {}", csv_path.display());

        let points: Vec<(f64, f64)> = counts
            .iter()
            .filter(|(&deg, _)| deg >= 1)
            .map(|(&deg, &n)| (deg as f64, n as f64))
            .collect();
        let plot = svg::Plot {
            title: "column degree distribution".into(),
            x_label: "degree".into(),
            y_label: "columns".into(),
            log_x: true,
            log_y: true,
            series: vec![svg::Series {
                label: "columns".into(),
                points,
                line: false,
            }],
        };
        let svg_path = args.out_dir.join("degree_hist.svg");
        write_text(&svg_path, &svg::render(&plot))?;
        println!("wrote {}", svg_path.display());
    }

    if let Some(path) = &args.residuals {
        let text = std::fs::read_to_string(path)?;
        let series = parse_residual_csv(&text)?;
        let plot = svg::Plot {
            title: "solver convergence".into(),
            x_label: "iteration".into(),
            y_label: "L1 residual".into(),
            log_x: false,
            log_y: true,
            series,
        };
        let svg_path = args.out_dir.join("convergence.svg");
        write_text(&svg_path, &svg::render(&plot))?;
        println!("wrote {}", svg_path.display());
    }

    if let Some(path) = &args.table {
        let text = std::fs::read_to_string(path)?;
        let table = PerfTable::from_json(&text)?;
        let rows = table
            .entries()
            .map(|(w, h, rate)| format!("{w},{h},{}", fmt_f64(rate)));
        let csv_path = args.out_dir.join("table_rates.csv");
        write_text(&csv_path, &csv("w,h,slots_per_sec", rows))?;
        println!("wrote {}", csv_path.display());

        let label = match table.mode() {
            TableMode::Cached => "cached",
            TableMode::Uncached => "uncached",
        };
        let points: Vec<(f64, f64)> = table
            .entries()
            .map(|(w, h, rate)| ((w * h) as f64, rate))
            .collect();
        let plot = svg::Plot {
            title: "throughput by workload area".into(),
            x_label: "w x h slots".into(),
            y_label: "slots per second".into(),
            log_x: true,
            log_y: true,
            series: vec![svg::Series {
                label: label.into(),
                points,
                line: false,
            }],
        };
        let svg_path = args.out_dir.join("table_profile.svg");
        write_text(&svg_path, &svg::render(&plot))?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

/// Accepts the residual CSVs this tool writes: either
/// `iteration,residual` or the per-query `query,iteration,residual`.
fn parse_residual_csv(text: &str) -> Result<Vec<svg::Series>, CliError> {
    let bad = |line: usize, msg: String| {
        CliError::Lib(tilemv::Error::Parse { line, msg })
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| bad(1, "empty residual file".into()))?;
    let per_query = match header.trim() {
        "iteration,residual" => false,
        "query,iteration,residual" => true,
        other => {
            return Err(bad(1, format!("unrecognized residual header {other:?}")));
        }
    };
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let want = if per_query { 3 } else { 2 };
        if fields.len() != want {
            return Err(bad(idx + 1, format!("expected {want} fields")));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| bad(idx + 1, e.to_string()))
        };
        let (key, it, resid) = if per_query {
            (
                format!("query {}", fields[0].trim()),
                num(fields[1])?,
                num(fields[2])?,
            )
        } else {
            ("residual".to_string(), num(fields[0])?, num(fields[1])?)
        };
        groups.entry(key).or_default().push((it, resid));
    }
    Ok(groups
        .into_iter()
        .map(|(label, points)| svg::Series {
            label,
            points,
            line: true,
        })
        .collect())
}
