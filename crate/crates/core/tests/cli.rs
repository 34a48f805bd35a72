// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("netsurgeon-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.display().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("netsurgeon").chain(args.iter().copied());
    let code = netsurgeon::cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "stderr: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn dyad_centrality() {
    let g = scratch("dyad.txt", "a b\n");
    let v = json(&["centrality", "--graph", &g, "--delta", "0.25"]);
    assert_eq!(v["labels"], serde_json::json!(["a", "b"]));
    assert_eq!(v["b"][0].as_f64().unwrap(), 1.33333);
    assert_eq!(v["aggregate"].as_f64().unwrap(), 2.66667);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let g = fixture("regular10.txt");
    let args = [
        "key-group",
        "--graph",
        g.as_str(),
        "--delta",
        "0.2",
        "--k",
        "2",
        "--top",
        "3",
    ];
    let first = run(&args);
    for _ in 0..3 {
        assert_eq!(run(&args), first);
    }
    let v: Value = serde_json::from_str(&first.1).unwrap();
    let text = first.1;
    assert!(text.find("\"group\"").unwrap() < text.find("\"intercentrality\"").unwrap());
    assert!(v.to_string().contains("10.2941"));
}

#[test]
fn key_group_on_regular10() {
    let g = fixture("regular10.txt");
    let v = json(&["key-group", "--graph", &g, "--delta", "0.2", "--k", "1"]);
    let text = v.to_string();
    assert!(text.contains("5.34"), "{text}");
    let (code, out, _) = run(&[
        "key-group",
        "--graph",
        &g,
        "--delta",
        "0.2",
        "--k",
        "2",
        "--mode",
        "greedy",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("rank,group,intercentrality"), "{out}");
}

#[test]
fn intervene_reports_effect() {
    let g = scratch("path.txt", "a b\nb c\n");
    let v = json(&["intervene", "--graph", &g, "--delta", "0.2", "--add", "a,c"]);
    assert!(v["delta_aggregate"].as_f64().unwrap() > 0.0);
    let v = json(&[
        "intervene",
        "--graph",
        &g,
        "--delta",
        "0.2",
        "--dtheta",
        "b=1",
    ]);
    assert!(v["delta_aggregate"].as_f64().unwrap() > 1.0);
}

#[test]
fn link_value_and_bridges() {
    let g = fixture("two_cycles.txt");
    let v = json(&[
        "link-value",
        "--graph",
        &g,
        "--delta",
        "0.21",
        "--all-potential",
    ]);
    let links = v["links"].as_array().unwrap();
    assert_eq!(links.len(), 20);
    assert_eq!(links[0]["kind"], "potential");
    assert_eq!(links[0]["value"].as_f64().unwrap(), 7.98004);
    let (code, out, err) = run(&[
        "key-bridge",
        "--graph1",
        &fixture("star.txt"),
        "--graph2",
        &fixture("cluster.txt"),
        "--delta",
        "0.25",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("h") && out.contains("a2"), "{out}");
}

#[test]
fn walks_and_extensions_run() {
    let g = fixture("regular10.txt");
    json(&["walks", "--graph", &g, "--delta", "0.2", "--exclude", "1,2"]);
    json(&[
        "walks", "--graph", &g, "--delta", "0.2", "--from", "1", "--to", "2",
    ]);
    json(&[
        "extension",
        "--model",
        "multi",
        "--graph",
        &g,
        "--delta",
        "0.1",
        "--beta",
        "0.3",
    ]);
    json(&[
        "extension",
        "--model",
        "congestion",
        "--graph",
        &g,
        "--delta",
        "0.2",
        "--gamma",
        "0.005",
    ]);
    json(&[
        "extension",
        "--model",
        "global",
        "--graph",
        &g,
        "--delta",
        "0.1",
        "--phi",
        "0.2",
    ]);
}

#[test]
fn reproduce_table_four() {
    let (code, out, err) = run(&["reproduce", "--table", "4"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("79.0258") || out.contains("79.026"), "{out}");
    let v = json(&["reproduce", "--table", "4", "--format", "json"]);
    assert!(v.to_string().contains("fixture_valid"));
}

#[test]
fn reproduce_reports_missing_transcription() {
    let dir = std::env::temp_dir().join(format!("netsurgeon-empty-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (code, _, err) = run(&["reproduce", "--fixtures", dir.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("transcribe"), "{err}");
}

#[test]
fn user_errors_exit_one_with_flag() {
    let g = scratch("dyad2.txt", "a b\n");
    let (code, _, err) = run(&["centrality", "--graph", &g, "--delta", "1.5"]);
    assert_eq!(code, 1);
    assert!(err.contains("--delta"), "{err}");

    let (code, _, err) = run(&["intervene", "--graph", &g, "--delta", "0.2", "--add", "a,b"]);
    assert_eq!(code, 1);
    assert!(err.contains("already"), "{err}");

    let bad = scratch("loop.txt", "a a\n");
    let (code, _, err) = run(&["centrality", "--graph", &bad, "--delta", "0.2"]);
    assert_eq!(code, 1);
    assert!(err.contains("--graph"), "{err}");

    let (code, _, _) = run(&[
        "centrality",
        "--graph",
        "/nonexistent/graph.txt",
        "--delta",
        "0.2",
    ]);
    assert_eq!(code, 1);

    let (code, _, _) = run(&["centrality", "--delta", "0.2"]);
    assert_eq!(code, 1);

    let (code, _, err) = run(&[
        "key-group",
        "--graph",
        &fixture("regular10.txt"),
        "--delta",
        "0.2",
        "--k",
        "5",
        "--cap",
        "10",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("--cap") || err.contains("cap"), "{err}");
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("reproduce"));
    let (code, out, _) = run(&["--version"]);
    assert_eq!(code, 0);
    assert!(out.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn internal_errors_map_to_exit_two() {
    use netsurgeon::Error;
    assert!(Error::Singular("test".into()).is_internal());
    assert!(Error::Invariant("test".into()).is_internal());
    assert!(!Error::Precondition("test".into()).is_internal());
}

#[test]
fn binary_matches_library_entry_point() {
    let g = fixture("regular10.txt");
    let args = [
        "centrality",
        "--graph",
        g.as_str(),
        "--delta",
        "0.2",
        "--format",
        "csv",
    ];
    let output = Command::new(env!("CARGO_BIN_EXE_netsurgeon"))
        .args(args)
        .output()
        .unwrap();
    assert!(output.status.success());
    let (_, out, _) = run(&args);
    assert_eq!(String::from_utf8(output.stdout).unwrap(), out);

    let output = Command::new(env!("CARGO_BIN_EXE_netsurgeon"))
        .args(["centrality", "--graph", g.as_str(), "--delta", "0.5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8(output.stderr)
        .unwrap()
        .starts_with("error:"));
}

#[test]
fn thread_cap_does_not_change_results() {
    let g = fixture("regular10.txt");
    let args = [
        "key-group",
        "--graph",
        g.as_str(),
        "--delta",
        "0.2",
        "--k",
        "3",
    ];
    let single = Command::new(env!("CARGO_BIN_EXE_netsurgeon"))
        .args(args)
        .env(netsurgeon::cli::THREADS_ENV, "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_netsurgeon"))
        .args(args)
        .env(netsurgeon::cli::THREADS_ENV, "4")
        .output()
        .unwrap();
    assert!(single.status.success());
    assert_eq!(single.stdout, many.stdout);
}
