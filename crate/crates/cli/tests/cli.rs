use std::path::Path;
use std::process::{Command, Output};

fn fiwi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiwi")).args(args).env("FIWI_THREADS", "1").output().unwrap()
}

fn preset_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/presets").join(format!("{name}.cfg")).display().to_string()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn analyze_writes_csv_with_header_comment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig5.csv");
    let cfg = preset_path("fig4");
    let o = fiwi(&[
        "analyze",
        "--config",
        &cfg,
        "--scenario",
        "p2p",
        "--routing",
        "min-interference",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# fiwi "));
    assert!(first.contains("config=") && first.contains("seed=1"));
    assert!(!text.contains('\r'));
    let rows = rows(&text);
    assert_eq!(rows[0][..6], ["alpha", "throughput_bps", "D_d_s", "D_u_s", "D_wi_s", "D_s"]);
    assert_eq!(rows.len(), 14);
    let delays: Vec<f64> = rows[1..].iter().filter(|r| r[6] == "true").map(|r| r[5].parse().unwrap()).collect();
    assert!(delays.len() > 3);
    assert!(delays.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn flags_override_config() {
    let o = fiwi(&["--preset", "fig4", "--scenario", "upstream", "--alpha", "0,50", "--fail-fiber", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().next().unwrap().contains("scenario=upstream"));
    assert_eq!(rows(&text).len(), 3);

    let healthy = fiwi(&["--preset", "fig4", "--scenario", "upstream", "--alpha", "0,50"]);
    let healthy_text = String::from_utf8(healthy.stdout).unwrap();
    assert_ne!(rows(&healthy_text)[2], rows(&text)[2]);
}

#[test]
fn missing_config_exits_2() {
    let o = fiwi(&["analyze", "--config", "/nonexistent/fig4.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "version = 1\nmode = \"analyze\"\nrouting = 7\n").unwrap();
    let o = fiwi(&["--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = fiwi(&["--preset", "fig4", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn saturated_sweep_exits_1() {
    let o = fiwi(&["--preset", "fig4", "--alpha", "100000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unstable"));
}

#[test]
fn compare_merges_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    let mut text = std::fs::read_to_string(preset_path("fig4")).unwrap();
    text = text.replace("duration_s = 60.0", "duration_s = 3.0").replace("warmup_s = 10.0", "warmup_s = 0.5");
    text = text.replace("replications = 20", "replications = 2");
    std::fs::write(&cfg, text).unwrap();
    let o = fiwi(&["compare", "--config", cfg.to_str().unwrap(), "--alpha", "100,200", "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().next().unwrap().contains("seed=9"));
    let rows = rows(&out);
    let header = &rows[0];
    for col in ["D_s", "sim_D_s", "sim_D_ci_s", "rel_error"] {
        assert!(header.iter().any(|h| h == col), "missing {col}");
    }
    let rel = header.iter().position(|h| h == "rel_error").unwrap();
    for row in &rows[1..] {
        assert_eq!(row.len(), header.len());
        assert!(row[rel].parse::<f64>().unwrap().abs() < 1.0);
    }
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_fiwi")).args(["--preset", "fig4"]).env("FIWI_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
