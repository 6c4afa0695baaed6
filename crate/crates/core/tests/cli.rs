use std::path::Path;
use std::process::{Command, Output};

use forestseg::tables::Table;

fn forestseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forestseg"))
        .args(args)
        .env("FORESTSEG_JOBS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = forestseg(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn rank_from_rank_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&["rank", "--ranks", &fixture("published_ranks.csv"), "--out", p(dir.path())]);
    // header, separator, then methods in final-score order
    let first_row = stdout.lines().nth(2).unwrap();
    assert!(first_row.starts_with("| RSS |") && first_row.ends_with("| 8.708 |"), "{first_row}");
    let table = Table::load(&dir.path().join("rank_table.csv")).unwrap();
    assert_eq!(table.rows.len(), 22);
    assert!(dir.path().join("rank_table.md").exists());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = forestseg(&["segment", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"segment": {"bogus": 1}}"#).unwrap();
    let out = forestseg(&["--config", p(&cfg), "segment", "--algo", "slic", "--in", "x", "--out", "y"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn module_error_is_a_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = forestseg(&["segment", "--algo", "slic", "--in", p(&dir.path().join("missing.feb1")), "--out", "x"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let line: serde_json::Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert!(line["error"].is_string() && line["message"].is_string(), "{line}");
}

#[test]
fn config_flags_lose_to_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["synth", "--width", "96", "--height", "96", "--blobs", "4", "--out", p(d)]);
    let cfg = d.join("cfg.json");
    std::fs::write(&cfg, r#"{"k": 4, "segment": {"algo": "grid", "k": 9}}"#).unwrap();
    let seg = d.join("a.fel1");
    ok(&["--config", p(&cfg), "segment", "--in", p(&d.join("scene.feb1")), "--out", p(&seg), "--no-merge"]);
    assert_eq!(forestseg::io::load_label_map(&seg).unwrap().k(), 9);
    ok(&["--config", p(&cfg), "segment", "--k", "16", "--in", p(&d.join("scene.feb1")), "--out", p(&seg), "--no-merge"]);
    assert_eq!(forestseg::io::load_label_map(&seg).unwrap().k(), 16);
}

#[test]
fn end_to_end_on_a_synthetic_scene() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let path = |name: &str| d.join(name).to_str().unwrap().to_string();
    ok(&["synth", "--width", "128", "--height", "128", "--blobs", "6", "--out", p(d)]);
    ok(&["pca", "--in", &path("scene.feb1"), "--gt", &path("gt.pgm"), "--rescale", "--out", &path("comp.feb1")]);
    ok(&["segment", "--algo", "snic", "--k", "120", "--in", &path("comp.feb1"), "--out", &path("snic.fel1")]);
    ok(&["segment", "--algo", "slic", "--k", "120", "--in", &path("comp.feb1"), "--out", &path("slic.fel1")]);

    ok(&[
        "eval-spx", "--labels", &path("snic.fel1"), "--labels", &path("slic.fel1"), "--gt", &path("gt.pgm"),
        "--raster", &path("comp.feb1"), "--out", &path("spx.csv"),
    ]);
    ok(&[
        "eval-cs", "--labels", &path("snic.fel1"), "--labels", &path("slic.fel1"), "--gt", &path("gt.pgm"),
        "--out", &path("cs.csv"),
    ]);
    let spx = Table::load(&d.join("spx.csv")).unwrap();
    assert_eq!(spx.rows.len(), 2);
    let text = std::fs::read_to_string(d.join("spx.csv")).unwrap();
    assert!(text.starts_with("# tool: forestseg"));
    assert!(text.lines().any(|l| l.starts_with("# config_sha256: ")));

    let rank_dir = d.join("rank");
    let md = ok(&["rank", "--spx", &path("spx.csv"), "--cs", &path("cs.csv"), "--out", p(&rank_dir)]);
    assert!(md.contains("snic") && md.contains("slic"));

    ok(&[
        "eval-cs", "--labels", &path("slic.fel1"), "--gt", &path("gt.pgm"), "--out", &path("cs1.csv"),
        "--records-out", &path("records.csv"),
    ]);
    let campaign_dir = d.join("campaign");
    let summary = ok(&["simulate-campaign", "--synthesize", "--records", &path("records.csv"), "--out", p(&campaign_dir)]);
    let summary: serde_json::Value = serde_json::from_str(summary.trim()).unwrap();
    assert!(summary["tasks"].as_u64().unwrap() > 0);
    for f in ["votes.csv", "tasks.csv", "selection.csv", "campaign.json"] {
        assert!(campaign_dir.join(f).exists(), "{f}");
    }

    ok(&[
        "features", "--raster", &path("comp.feb1"), "--labels", &path("slic.fel1"), "--gt", &path("gt.pgm"),
        "--useful-only", "--out", &path("features.csv"),
    ]);
    let features = Table::load(&d.join("features.csv")).unwrap();
    assert_eq!(features.header.len(), 158);
    let metrics = ok(&[
        "classify", "--train", &path("features.csv"), "--test", &path("features.csv"), "--k", "1",
        "--out", &path("predictions.csv"),
    ]);
    let metrics: serde_json::Value = serde_json::from_str(metrics.trim()).unwrap();
    assert_eq!(metrics["accuracy"].as_f64(), Some(1.0));

    let report_dir = d.join("report");
    ok(&[
        "report", "--raster", &path("scene.feb1"), "--gt", &path("gt.pgm"), "--k", "120", "--out", p(&report_dir),
    ]);
    for f in ["spx.csv", "cs.csv", "records.csv", "predictions.csv", "labels.fel1", "summary.md"] {
        assert!(report_dir.join(f).exists(), "{f}");
    }
}
