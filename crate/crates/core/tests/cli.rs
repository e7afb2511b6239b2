//! End-to-end checks of the `gfb` binary: subcommands, output artifacts,
//! exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gfb(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfb"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn solve_writes_trace_summary_and_basis() {
    let dir = tempfile::tempdir().unwrap();
    let out = gfb(
        &["solve", "--graph", "path", "--n", "8", "--algo", "sgpc", "--out", "run"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let summary_path = dir.path().join("run/path-n8-s0_sgpc_summary.json");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&summary_path).unwrap()).unwrap();
    let obj = summary.as_object().unwrap();
    let mut keys: Vec<_> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        ["algorithm", "fval", "instance", "iter", "orth", "seed", "termination", "time_sec"]
    );
    assert_eq!(obj["termination"], "tolerance");
    assert!(obj["orth"].as_f64().unwrap() <= 1e-12);
    assert!(obj["iter"].as_u64().unwrap() <= 10_000);

    let trace = fs::read_to_string(dir.path().join("run/path-n8-s0_sgpc_trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,mu,tau,f_smooth,f_true,orth,stat_normal,stat_skew,ls_count"
    );
    assert_eq!(lines.count() as u64, obj["iter"].as_u64().unwrap());

    // recovered basis: 8 rows of 7 columns
    let basis = fs::read_to_string(dir.path().join("run/path-n8-s0_sgpc_basis.csv")).unwrap();
    let rows: Vec<&str> = basis.lines().collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.split(',').count() == 7));
}

#[test]
fn solve_exit_code_2_on_iteration_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = gfb(
        &["solve", "--graph", "tree4", "--algo", "srgd", "--max-iter", "5", "--out", "run"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_rejects_out_of_range_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let out = gfb(
        &["solve", "--graph", "tree4", "--algo", "sgpc", "--sigma", "1.5", "--out", "run"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("sigma"), "stderr: {stderr}");
}

#[test]
fn gen_then_solve_from_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = gfb(
        &["gen", "--graph", "ring", "--n", "6", "--seed", "3", "--out", "ring6.txt"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let listing = fs::read_to_string(dir.path().join("ring6.txt")).unwrap();
    assert_eq!(listing.lines().next().unwrap(), "6");
    assert_eq!(listing.lines().count(), 13); // vertex count + 12 directed edges

    let out = gfb(
        &["solve", "--graph", "ring6.txt", "--algo", "sgpc", "--out", "run"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("run/ring6_sgpc_summary.json").exists());
}

#[test]
fn bench_from_config_file_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bench.toml"),
        r#"
algorithms = ["sgpc", "srgd"]
output = "bench-out"

[[instances]]
kind = "family"
family = "tree4"

[[instances]]
kind = "family"
family = "path"
n = 8

[solver]
max_iter = 10000
"#,
    )
    .unwrap();
    let out = gfb(&["bench", "--config", "bench.toml"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Instance"), "table header missing: {stdout}");

    let csv = fs::read_to_string(dir.path().join("bench-out/bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 4); // header + 2 instances x 2 algorithms
    assert!(lines[0].starts_with("instance,algorithm,seed,rep,digest,status"));
    assert!(lines[1..].iter().all(|l| l.contains(",ok,")));
}

#[test]
fn check_reports_all_families_passing() {
    let dir = tempfile::tempdir().unwrap();
    let out = gfb(&["check"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    for family in [
        "prox-envelope-oracle",
        "envelope-closed-form",
        "envelope-bounds",
        "prox-nonexpansive",
        "gradient-finite-difference",
        "manifold-identities",
    ] {
        assert!(stdout.contains(family), "missing family {family}: {stdout}");
    }
    assert!(stdout.matches("PASS").count() >= 6, "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn sparse_pca_instance_through_config() {
    let dir = tempfile::tempdir().unwrap();
    // write a small data matrix as CSV
    let mut data = String::new();
    for i in 0..12 {
        let row: Vec<String> = (0..10)
            .map(|j| format!("{:.6}", ((i * 10 + j) as f64 * 0.7).sin()))
            .collect();
        data.push_str(&row.join(","));
        data.push('\n');
    }
    fs::write(dir.path().join("data.csv"), data).unwrap();
    fs::write(
        dir.path().join("pca.toml"),
        r#"
algorithms = ["srgd"]

[[instances]]
kind = "sparse-pca"
data = "data.csv"
lambda = 0.5
components = 3
seed = 1

[solver]
max_iter = 2000
"#,
    )
    .unwrap();
    let out = gfb(&["solve", "--config", "pca.toml", "--out", "run"], dir.path());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(2), "{stderr}");
    let summary_path = dir.path().join("run/sparse-pca-n10-p3-s1_srgd_summary.json");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&summary_path).unwrap()).unwrap();
    assert!(summary["orth"].as_f64().unwrap() <= 1e-10);
}
