//! End-to-end runs of the `tilemv` binary: every subcommand, the exit
//! code contract, config-file layering, and byte-stable artifacts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tilemv::autotune::TuningPlan;
use tilemv::exec::HardwareProfile;
use tilemv::matrix::parse_matrix_market;
use tilemv::perfmodel::{predict_time, PerfTable, TableMode};
use tilemv::transform::{
    enumerate_tiles, extract_tiles, sort_columns_desc, sort_rows_desc, TiledCompositeMatrix,
};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tilemv"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf8 path")
}

/// Deterministic power-law fixture written through the binary itself.
fn fixture(dir: &Path) -> PathBuf {
    let path = dir.join("web.mtx");
    ok(&[
        "convert",
        "--gen",
        "power-law",
        "--n",
        "300",
        "--alpha",
        "2.1",
        "--nnz",
        "2400",
        "--seed",
        "11",
        "--output",
        path_str(&path),
    ]);
    path
}

fn identity4(dir: &Path) -> PathBuf {
    let path = dir.join("i4.mtx");
    let text = "%%MatrixMarket matrix coordinate real general\n4 4 4\n1 1 1.0\n2 2 1.0\n3 3 1.0\n4 4 1.0\n";
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn spmv_on_identity_echoes_x() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = identity4(dir.path());
    let out = ok(&[
        "spmv",
        "--input",
        path_str(&mtx),
        "--backend",
        "tile-composite",
        "--x",
        "1,2,3,4",
    ]);
    assert!(out.contains("y = [1, 2, 3, 4]"), "stdout was: {out}");

    // Exactly representable values survive the narrowed arithmetic.
    let single = ok(&[
        "spmv",
        "--input",
        path_str(&mtx),
        "--x",
        "1,2,3,4",
        "--precision",
        "single",
    ]);
    assert!(single.contains("y = [1, 2, 3, 4]"), "stdout was: {single}");
}

#[test]
fn pagerank_with_zero_damping_converges_in_one_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let out = ok(&["pagerank", "--input", path_str(&mtx), "--damping", "0"]);
    assert!(
        out.starts_with("converged in 1 iteration "),
        "stdout was: {out}"
    );
}

#[test]
fn tuned_plan_satisfies_the_candidate_law() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let plan_path = dir.path().join("plan.json");
    ok(&[
        "tune",
        "--input",
        path_str(&mtx),
        "--tile-width",
        "48",
        "--synthetic",
        "--upper-bound",
        "512",
        "--output",
        path_str(&plan_path),
    ]);
    let plan = TuningPlan::from_json(&std::fs::read_to_string(&plan_path).unwrap()).unwrap();

    // Re-enumerate the tiles and the candidate ladders independently
    // and hold the plan against them.
    let hw = HardwareProfile::default();
    let cached = PerfTable::synthetic(&hw, 512, TableMode::Cached).unwrap();
    let m = parse_matrix_market(&std::fs::read_to_string(&mtx).unwrap())
        .unwrap()
        .to_csr();
    let sorted = sort_columns_desc(&m);
    let layout = enumerate_tiles(&sorted, 48).unwrap();
    let (tiles, _) = extract_tiles(&sorted, &layout);
    assert_eq!(plan.tiles.len(), tiles.len());
    assert!(!tiles.is_empty());
    for (tuned, tile) in plan.tiles.iter().zip(tiles) {
        let tile = sort_rows_desc(tile);
        let low = tile.longest_row();
        let cap = (tile.nnz() / hw.max_active_total()).min(cached.upper_bound());
        let mut candidates: Vec<usize> =
            (1..).map(|k| low * k).take_while(|&wl| wl <= cap).collect();
        if candidates.is_empty() {
            candidates.push(low);
        }
        assert!(candidates.contains(&tuned.workload_size));
        let best = candidates
            .iter()
            .map(|&wl| {
                let cost = predict_time(&tile, wl, &cached, &hw).unwrap();
                (wl, cost.total_time)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(tuned.workload_size, best.0);
        assert_eq!(tuned.predicted_time, best.1);
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let plan = dir.path().join("p.json");

    // 2: flag out of range, 2: missing required table flags.
    assert_eq!(code(&["pagerank", "--input", path_str(&mtx), "--damping", "1.5"]), 2);
    assert_eq!(
        code(&["tune", "--input", path_str(&mtx), "--output", path_str(&plan)]),
        2
    );

    // 3: input file missing.
    assert_eq!(code(&["pagerank", "--input", "/nonexistent.mtx"]), 3);

    // 4: table built for different hardware; --force lets it pass.
    let hw_path = dir.path().join("hw.json");
    std::fs::write(
        &hw_path,
        r#"{"warp_size":32,"num_sm":2,"max_active_warps_per_sm":4,"partitions":8,"partition_width_bytes":256}"#,
    )
    .unwrap();
    let table = dir.path().join("t.json");
    ok(&[
        "bench-table",
        "--synthetic",
        "--upper-bound",
        "256",
        "--hw",
        path_str(&hw_path),
        "--output",
        path_str(&table),
    ]);
    let tune_args = |force: bool| {
        let mut v = vec![
            "tune",
            "--input",
            path_str(&mtx),
            "--tile-width",
            "48",
            "--cached-table",
            path_str(&table),
            "--uncached-table",
            path_str(&table),
            "--output",
            path_str(&plan),
        ];
        if force {
            v.push("--force");
        }
        v
    };
    assert_eq!(code(&tune_args(false)), 4);
    assert_eq!(code(&tune_args(true)), 0);
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let again = dir.path().join("again.mtx");
    ok(&[
        "convert", "--gen", "power-law", "--n", "300", "--alpha", "2.1", "--nnz", "2400",
        "--seed", "11", "--output", path_str(&again),
    ]);
    assert_eq!(
        std::fs::read(&mtx).unwrap(),
        std::fs::read(&again).unwrap()
    );

    let runs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let ranks = dir.path().join(format!("r{i}.csv"));
            ok(&["pagerank", "--input", path_str(&mtx), "--ranks", path_str(&ranks)]);
            std::fs::read(&ranks).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);

    let svgs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("rep{i}"));
            ok(&["report", "--input", path_str(&mtx), "--out-dir", path_str(&out)]);
            std::fs::read(out.join("degree_hist.svg")).unwrap()
        })
        .collect();
    assert_eq!(svgs[0], svgs[1]);
}

#[test]
fn convert_round_trips_through_tile_composite_json() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let packed = dir.path().join("web.tc.json");
    ok(&[
        "convert",
        "--input",
        path_str(&mtx),
        "--to",
        "tile-composite",
        "--tile-width",
        "48",
        "--output",
        path_str(&packed),
    ]);
    let built =
        TiledCompositeMatrix::from_json(&std::fs::read_to_string(&packed).unwrap()).unwrap();
    built.validate().unwrap();
    let original = parse_matrix_market(&std::fs::read_to_string(&mtx).unwrap()).unwrap();
    assert_eq!(built.to_coo().unwrap(), original);
}

#[test]
fn dist_pagerank_with_one_partition_matches_the_single_machine_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let single = dir.path().join("single.csv");
    let dist = dir.path().join("dist.csv");
    ok(&["pagerank", "--input", path_str(&mtx), "--ranks", path_str(&single)]);
    ok(&[
        "dist-pagerank",
        "--input",
        path_str(&mtx),
        "--partitions",
        "1",
        "--ranks",
        path_str(&dist),
    ]);
    assert_eq!(
        std::fs::read(&single).unwrap(),
        std::fs::read(&dist).unwrap()
    );
}

#[test]
fn socket_exchange_writes_the_same_ranks_as_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let local = dir.path().join("local.csv");
    let socket = dir.path().join("socket.csv");
    let comm = dir.path().join("comm.csv");
    ok(&[
        "dist-pagerank", "--input", path_str(&mtx), "--partitions", "3",
        "--ranks", path_str(&local),
    ]);
    let out = ok(&[
        "dist-pagerank", "--input", path_str(&mtx), "--partitions", "3", "--socket",
        "--ranks", path_str(&socket), "--comm", path_str(&comm),
    ]);
    assert_eq!(
        std::fs::read(&local).unwrap(),
        std::fs::read(&socket).unwrap()
    );
    // Broadcast identity: 300 rows over P=3 ships 300·(P−1) per round.
    assert!(out.contains("600 elements broadcast per round"), "stdout was: {out}");
    let comm_text = std::fs::read_to_string(&comm).unwrap();
    assert!(comm_text.starts_with("iteration,partition,elements_sent\n"));
    assert!(comm_text.contains("\n1,0,200\n"));
}

#[test]
fn partition_plan_feeds_dist_pagerank() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let plan = dir.path().join("plan.json");
    let out = ok(&[
        "partition", "--input", path_str(&mtx), "--partitions", "4",
        "--output", path_str(&plan),
    ]);
    assert!(out.contains("rows per partition = [75, 75, 75, 75]"), "stdout was: {out}");

    ok(&[
        "dist-pagerank", "--input", path_str(&mtx), "--plan", path_str(&plan),
    ]);
    // Disagreeing --partitions is a usage error.
    assert_eq!(
        code(&[
            "dist-pagerank", "--input", path_str(&mtx), "--plan", path_str(&plan),
            "--partitions", "2",
        ]),
        2
    );
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let conf = dir.path().join("tilemv.toml");
    std::fs::write(&conf, "max-iterations = 2\ntop = 1\n").unwrap();
    let out = ok(&[
        "pagerank", "--input", path_str(&mtx), "--config", path_str(&conf),
    ]);
    assert!(out.starts_with("did not converge within 2 iterations"), "stdout was: {out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("node ")).count(), 1);

    let out = ok(&[
        "pagerank", "--input", path_str(&mtx), "--config", path_str(&conf),
        "--max-iterations", "1000",
    ]);
    assert!(out.starts_with("converged in "), "stdout was: {out}");

    std::fs::write(&conf, "max-iterations = \"soon\"\n").unwrap();
    assert_eq!(code(&["pagerank", "--input", path_str(&mtx), "--config", path_str(&conf)]), 2);
}

#[test]
fn rwr_scores_the_query_highest_and_emits_per_query_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let ranks = dir.path().join("rwr.csv");
    let resid = dir.path().join("rwr_resid.csv");
    let out = ok(&[
        "rwr", "--input", path_str(&mtx), "--query", "5", "--query", "9",
        "--top", "1", "--ranks", path_str(&ranks), "--residuals", path_str(&resid),
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("query 5: converged"));
    assert!(lines[1].starts_with("node 5: "));
    assert!(lines[2].starts_with("query 9: converged"));
    assert!(lines[3].starts_with("node 9: "));

    let ranks_text = std::fs::read_to_string(&ranks).unwrap();
    assert!(ranks_text.starts_with("query,node,score\n"));
    assert_eq!(ranks_text.lines().count(), 1 + 2 * 300);
    let resid_text = std::fs::read_to_string(&resid).unwrap();
    assert!(resid_text.starts_with("query,iteration,residual\n"));

    // The per-query residual CSV feeds straight back into report.
    let rep = dir.path().join("rep");
    ok(&["report", "--residuals", path_str(&resid), "--out-dir", path_str(&rep)]);
    let svg = std::fs::read_to_string(rep.join("convergence.svg")).unwrap();
    assert!(svg.starts_with("<svg "));
    assert!(svg.contains("query 5"));
    assert!(svg.contains("query 9"));
}

#[test]
fn hits_writes_node_authority_hub_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let ranks = dir.path().join("hits.csv");
    ok(&["hits", "--input", path_str(&mtx), "--ranks", path_str(&ranks)]);
    let text = std::fs::read_to_string(&ranks).unwrap();
    assert!(text.starts_with("node,authority,hub\n"));
    assert_eq!(text.lines().count(), 1 + 300);
    assert!(text.lines().nth(1).unwrap().split(',').count() == 3);
}

#[test]
fn report_covers_matrices_residuals_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = fixture(dir.path());
    let table = dir.path().join("t.json");
    ok(&[
        "bench-table", "--synthetic", "--mode", "uncached", "--upper-bound", "256",
        "--output", path_str(&table),
    ]);
    let resid = dir.path().join("resid.csv");
    ok(&["pagerank", "--input", path_str(&mtx), "--residuals", path_str(&resid)]);

    let rep = dir.path().join("rep");
    ok(&[
        "report", "--input", path_str(&mtx), "--residuals", path_str(&resid),
        "--table", path_str(&table), "--out-dir", path_str(&rep),
    ]);
    for name in [
        "degree_hist.csv",
        "degree_hist.svg",
        "convergence.svg",
        "table_rates.csv",
        "table_profile.svg",
    ] {
        assert!(rep.join(name).exists(), "{name} missing");
    }
    let hist = std::fs::read_to_string(rep.join("degree_hist.csv")).unwrap();
    assert!(hist.starts_with("degree,count\n"));
    let rates = std::fs::read_to_string(rep.join("table_rates.csv")).unwrap();
    assert!(rates.starts_with("w,h,slots_per_sec\n"));

    // No inputs at all is a usage error.
    assert_eq!(code(&["report", "--out-dir", path_str(&rep)]), 2);
}
