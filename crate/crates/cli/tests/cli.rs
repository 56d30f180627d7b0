//! End-to-end tests against the compiled binary: exit codes, stream
//! discipline, and the wiring of flags to pipeline behavior.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ipc-fusion"))
}

fn fixture_csv() -> String {
    let mut out = String::from("patent_id,date,ipc_codes\n");
    let pool = [
        "G06F17/30", "H04L29/06", "G06N3/08", "G06K9/62", "G06T7/00", "A61B5/00", "G06Q10/04",
        "G10L15/22", "B25J9/16", "G05B13/02",
    ];
    let mut id = 0;
    for (yi, year) in (2012..=2021).enumerate() {
        for p in 0..(2 + yi / 2) {
            let a = pool[(yi + p) % pool.len()];
            let b = pool[(yi + p * 3 + 1) % pool.len()];
            out.push_str(&format!("P{id:03},{year}-06-15,{a};{b}\n"));
            id += 1;
        }
    }
    out
}

fn write_fixture(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("corpus.csv");
    std::fs::write(&path, fixture_csv()).unwrap();
    path
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn centrality_prints_a_ranked_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let output = bin()
        .args(["centrality", "--input"])
        .arg(&input)
        .args(["--measure", "degree", "--top", "5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stderr_of(&output).is_empty(), "stderr must stay silent on success");
    let stdout = stdout_of(&output);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 6, "header + 5 rows:\n{stdout}");
    assert!(lines[0].contains("degree"));
    assert!(lines[1].trim_start().starts_with('1'));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let output = bin().args(["centrality", "--bogus"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stdout_of(&output).is_empty());
    assert!(stderr_of(&output).contains("Usage"), "synopsis goes to stderr");
}

#[test]
fn missing_input_is_a_domain_error() {
    let output = bin().args(["ingest", "--input", "/nonexistent/corpus.csv"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).starts_with("error: ingest:"), "got: {}", stderr_of(&output));
}

#[test]
fn short_series_fails_in_the_lifecycle_stage() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.csv");
    std::fs::write(&path, "patent_id,date,ipc_codes\nA,2012,G06F;H04L\nB,2013,G06F;G06N\n")
        .unwrap();
    let output = bin().args(["tlc", "--input"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).starts_with("error: lifecycle:"));
}

#[test]
fn ingest_json_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("messy.csv");
    std::fs::write(
        &path,
        "patent_id,date,ipc_codes\nA,2012,G06F;XYZ\nB,13/45/2012,G06F\nA,2013,H04L\nC,2014,G06N\n",
    )
    .unwrap();
    let output = bin().args(["ingest", "--json", "--input"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(report["records_loaded"], 2);
    assert_eq!(report["bad_date"], 1);
    assert_eq!(report["bad_code"], 1);
    assert_eq!(report["duplicate_id"], 1);
}

#[test]
fn jsonl_extension_is_inferred() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    std::fs::write(
        &path,
        "{\"patent_id\":\"A\",\"date\":\"2012\",\"ipc_codes\":[\"G06F\",\"H04L\"]}\n",
    )
    .unwrap();
    let output = bin().args(["graph", "--input"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(stdout_of(&output), "G06F\tH04L\t1\n");
}

#[test]
fn graph_out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let out_path = dir.path().join("edges.tsv");
    let piped = bin().args(["graph", "--input"]).arg(&input).output().unwrap();
    let written = bin()
        .args(["graph", "--input"])
        .arg(&input)
        .args(["--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(written.status.code(), Some(0));
    assert!(stdout_of(&written).is_empty());
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), stdout_of(&piped));
}

#[test]
fn tlc_json_has_the_fit_keys() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let output = bin().args(["tlc", "--json", "--input"]).arg(&input).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let fit: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    for key in ["model", "L", "a", "b", "r2", "rmse", "phase", "saturation_year", "converged"] {
        assert!(fit.get(key).is_some(), "missing key {key}");
    }
}

#[test]
fn tlc_can_fit_incremental_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let output = bin()
        .args(["tlc", "--json", "--counts", "incremental", "--input"])
        .arg(&input)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr_of(&output));
    let fit: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    // Yearly counts top out well below the cumulative total.
    assert!(fit["L"].as_f64().unwrap() < 40.0);
}

#[test]
fn study_is_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let output = bin()
            .args(["study", "--threads", threads, "--input"])
            .arg(&input)
            .args(["--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr_of(&output));
        assert!(stdout_of(&output).is_empty(), "human study output keeps stdout clean");
        assert!(stderr_of(&output).contains("wrote 18 artifacts"));
        std::fs::read(out.join("manifest.json")).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "2");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn env_var_thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let via_env = bin()
        .env("IPC_FUSION_THREADS", "1")
        .args(["centrality", "--json", "--measure", "betweenness", "--input"])
        .arg(&input)
        .output()
        .unwrap();
    let via_flag = bin()
        .args(["centrality", "--json", "--measure", "betweenness", "--threads", "4", "--input"])
        .arg(&input)
        .output()
        .unwrap();
    assert_eq!(via_env.status.code(), Some(0));
    assert_eq!(via_flag.status.code(), Some(0));
    assert_eq!(stdout_of(&via_env), stdout_of(&via_flag));
}

#[test]
fn study_config_file_applies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let config_path = dir.path().join("study.toml");
    std::fs::write(
        &config_path,
        "top_k = 3\nhorizon_years = 20\nwindow_boundaries = [2012, 2016, 2022]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = bin()
        .args(["study", "--input"])
        .arg(&input)
        .args(["--config"])
        .arg(&config_path)
        .args(["--out"])
        .arg(&out)
        .args(["--top", "2"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr_of(&output));

    // horizon_years came from the file: header + 21 rows.
    let forecast = std::fs::read_to_string(out.join("lifecycle/forecast.csv")).unwrap();
    assert_eq!(forecast.lines().count(), 22);

    // window boundaries came from the file: two windows.
    let evolution: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("evolution/evolution.json")).unwrap())
            .unwrap();
    let windows = evolution["windows"].as_array().unwrap();
    assert_eq!(windows.len(), 2);
    // --top 2 overrode the file's top_k = 3.
    assert!(windows.iter().all(|w| w["rows"].as_array().unwrap().len() <= 2));
}

#[test]
fn bad_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let config_path = dir.path().join("study.toml");
    std::fs::write(&config_path, "topk = 3\n").unwrap();
    let output = bin()
        .args(["study", "--input"])
        .arg(&input)
        .args(["--config"])
        .arg(&config_path)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).starts_with("error: config:"));
}

#[test]
fn evolution_json_mode_emits_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let output = bin()
        .args(["evolution", "--json", "--input"])
        .arg(&input)
        .args(["--windows", "2012,2016,2022", "--top", "3", "--measure", "weighted-degree"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(report["measure"], "weighted_degree");
    assert_eq!(report["windows"].as_array().unwrap().len(), 2);
}

#[test]
fn fusion_json_carries_counting_mode() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path());
    let output = bin()
        .args(["fusion", "--json", "--input"])
        .arg(&input)
        .args(["--segment-level", "section", "--raw"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let table: serde_json::Value = serde_json::from_str(&stdout_of(&output)).unwrap();
    assert_eq!(table["counting"], "raw");
    assert_eq!(table["segment_level"], "section");
    assert!(table["not_found"].as_array().is_some());
}
