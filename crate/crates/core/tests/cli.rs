use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sample_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample/config.toml")
}

fn newsstock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newsstock"))
        .args(args)
        .output()
        .expect("spawn newsstock")
}

fn run_sample(out: &Path, extra: &[&str]) -> Output {
    let cfg = sample_config();
    let mut args = vec!["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    newsstock(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

#[test]
fn sample_run_succeeds_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_sample(dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("Task"));
    assert!(stdout.contains("Grand average [base]"));
    for f in ["report.txt", "report.csv", "cells.csv", "grid.json", "ablation.txt", "nkorea/plot.csv"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    assert_eq!(read(dir.path().join("report.txt")), stdout);
    assert!(read(dir.path().join("ablation.txt")).contains("Grand average without aux"));
}

#[test]
fn same_config_and_seed_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = run_sample(&a, &["--format", "csv", "--seed", "3"]);
    let ob = run_sample(&b, &["--format", "csv", "--seed", "3"]);
    assert!(oa.status.success() && ob.status.success());
    assert_eq!(oa.stdout, ob.stdout);
    assert_eq!(read(a.join("report.csv")), read(b.join("report.csv")));
    assert_eq!(read(a.join("cells.csv")), read(b.join("cells.csv")));
    assert_eq!(String::from_utf8(oa.stdout).unwrap(), read(a.join("report.csv")));
}

#[test]
fn stages_run_one_by_one_match_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let (whole, staged) = (dir.path().join("whole"), dir.path().join("staged"));
    assert!(run_sample(&whole, &[]).status.success());
    for stage in ["ingest", "prep", "features", "sentiment", "dataset", "train", "report"] {
        let o = run_sample(&staged, &["--stage", stage]);
        assert!(o.status.success(), "{stage}: {}", stderr(&o));
    }
    for f in [
        "report.csv",
        "report.txt",
        "cells.csv",
        "ablation.txt",
        "tesla/articles.jsonl",
        "tesla/clean.jsonl",
        "tesla/terms.csv",
        "nkorea/series.csv",
        "nkorea/stock.csv",
        "nkorea/datasets/classification_stockToArticle_base.csv",
    ] {
        assert_eq!(read(whole.join(f)), read(staged.join(f)), "{f} differs");
    }
}

#[test]
fn dataset_stage_writes_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    for stage in ["ingest", "prep", "features", "sentiment", "dataset"] {
        assert!(run_sample(dir.path(), &["--stage", stage]).status.success());
    }
    let ds = read(dir.path().join("tesla/datasets/regression_articleToStock_past5+base+future1.csv"));
    let header: Vec<&str> = ds.lines().next().unwrap().split(',').collect();
    // base_date, (5 + 1 + 1) days x (driver + aux), target
    assert_eq!(header.len(), 1 + 14 + 1);
    let rows = ds.lines().count() - 1;
    let days = read(dir.path().join("tesla/series.csv")).lines().count() - 1;
    // One change-rate point fewer than days, then past and future days lost.
    assert_eq!(rows, days - 1 - 5 - 1);
    assert!(ds.lines().skip(1).all(|l| l.split(',').count() == 16));
}

#[test]
fn synth_stage_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = newsstock(&["--stage", "synth", "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        read(out.join("synthetic/series.csv"))
    };
    let a = run("a", "5");
    assert_eq!(a, run("b", "5"));
    assert_ne!(a, run("c", "6"));
    assert_eq!(a.lines().next().unwrap(), "date,close,volume,sentiment,article_count");
    assert_eq!(a.lines().count(), 121);
}

#[test]
fn unknown_stage_is_a_usage_error() {
    let cfg = sample_config();
    let o = newsstock(&["--config", cfg.to_str().unwrap(), "--stage", "plot"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("unknown stage") && err.contains("Usage"), "{err}");
}

#[test]
fn missing_config_flag_is_a_usage_error() {
    assert_eq!(newsstock(&[]).status.code(), Some(2));
    assert_eq!(newsstock(&["--bogus"]).status.code(), Some(2));
}

#[test]
fn missing_stock_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let news = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample/tesla_news.jsonl");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "[[markets]]\nname = \"tesla\"\naliases = [\"Tesla\"]\nnews = [{:?}]\nstock = [\"nowhere/tsla.csv\"]\n",
            news.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = newsstock(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("markets[0].stock") && err.contains("nowhere/tsla.csv"), "{err}");
}

#[test]
fn out_of_range_knob_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[features]\nsynonym_tau = 1.5\n").unwrap();
    let o = newsstock(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("features.synonym_tau"));
}

#[test]
fn pipeline_failure_exits_one_and_names_stage() {
    let dir = tempfile::tempdir().unwrap();
    // prep reads the ingest output, which does not exist yet.
    let o = run_sample(dir.path(), &["--stage", "prep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stage prep"), "{}", stderr(&o));
}
