use std::path::Path;
use std::process::{Command, Output};

use maip_eval::{Metric, MetricTable};

fn maip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maip"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = maip(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    ok(&["simulate", "--episodes", "2", "--seed", "1", "--out", p(&a)]);
    ok(&["simulate", "--episodes", "2", "--seed", "1", "--out", p(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let sa = maip_sim::dataset::meta_path(&a);
    let sb = maip_sim::dataset::meta_path(&b);
    assert_eq!(std::fs::read(sa).unwrap(), std::fs::read(sb).unwrap());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    let out = dir.path().join("t.csv");
    let r = maip(&[
        "eval",
        "--data",
        p(&data),
        "--method",
        "MAIP",
        "--out",
        p(&out),
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("--model"));
    assert_eq!(maip(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        maip(&[
            "train",
            "--data",
            p(&data),
            "--method",
            "GRU",
            "--out",
            p(&out)
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        maip(&[
            "train",
            "--data",
            p(&data),
            "--method",
            "IDM",
            "--out",
            p(&out)
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn failures_exit_nonzero_with_a_diagnostic() {
    let r = maip(&[
        "eval",
        "--data",
        "/nonexistent.jsonl",
        "--method",
        "IDM",
        "--out",
        "/tmp/x.csv",
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).starts_with("error:"));
}

#[test]
fn gradcheck_passes_on_a_fresh_model() {
    let out = ok(&["gradcheck", "--seed", "3"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS"), "{text}");
}

#[test]
fn end_to_end_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# tiny run\nepisodes = 3\ntest_fraction = 0.34\nepochs = 1\nstride = 4\nn_samples = 10\n",
    )
    .unwrap();
    let data = dir.path().join("d.jsonl");
    let ck = dir.path().join("maip.json");
    let csv = dir.path().join("t.csv");
    let samples = dir.path().join("s.json");
    let svg = dir.path().join("f.svg");
    let c = p(&cfg);
    ok(&["simulate", "--config", c, "--seed", "5", "--out", p(&data)]);
    ok(&["train", "--config", c, "--data", p(&data), "--out", p(&ck)]);
    ok(&[
        "eval",
        "--config",
        c,
        "--data",
        p(&data),
        "--method",
        "IDM",
        "--method",
        "MAIP",
        "--model",
        p(&ck),
        "--method",
        "CONST_VEL",
        "--out",
        p(&csv),
    ]);
    let table = MetricTable::load(&csv).unwrap();
    assert_eq!(table.rows.len(), 3 * 10);
    for m in ["IDM", "MAIP", "CONST_VEL"] {
        assert_eq!(table.series(m, Metric::Theta).len(), 5);
    }
    assert!(table
        .rows
        .iter()
        .filter(|r| r.method == "MAIP")
        .all(|r| r.std.is_some()));
    assert!(table
        .rows
        .iter()
        .filter(|r| r.method == "IDM")
        .all(|r| r.std.is_none()));

    // a checkpoint of the wrong variant is refused
    let r = maip(&[
        "eval",
        "--config",
        c,
        "--data",
        p(&data),
        "--method",
        "CNN_CVAE",
        "--model",
        p(&ck),
        "--out",
        p(&csv),
    ]);
    assert_eq!(r.status.code(), Some(1));

    ok(&[
        "sample",
        "--config",
        c,
        "--data",
        p(&data),
        "--model",
        p(&ck),
        "--episode",
        "0",
        "--frame",
        "100",
        "--out",
        p(&samples),
    ]);
    let dump: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&samples).unwrap()).unwrap();
    let vehicles = dump["vehicles"].as_object().unwrap();
    assert!(!vehicles.is_empty());
    assert!(vehicles.values().all(|v| v.as_array().unwrap().len() == 10));

    ok(&[
        "render",
        "--config",
        c,
        "--data",
        p(&data),
        "--model",
        p(&ck),
        "--episode",
        "0",
        "--frame",
        "100",
        "--out",
        p(&svg),
    ]);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains(r#"class="prediction""#));
    assert_eq!(
        maip(&[
            "render",
            "--data",
            p(&data),
            "--frame",
            "2",
            "--out",
            p(&svg)
        ])
        .status
        .code(),
        Some(2)
    );
}
