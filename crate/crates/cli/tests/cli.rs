use std::path::Path;
use std::process::{Command, Output};

fn harchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harchain"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn ok(args: &[&str]) -> Output {
    let out = harchain(args);
    assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate_planted(dir: &Path, participants: usize) -> std::path::PathBuf {
    let out = dir.join("cohort");
    ok(&[
        "simulate",
        "--design",
        "planted",
        "--participants",
        &participants.to_string(),
        "--seed",
        "4",
        "--out",
        p(&out),
    ]);
    out
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn staged_chain_reproduces_the_fim_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cohort = simulate_planted(tmp.path(), 6);
    let sessions = cohort.join("sessions.json");
    let config = write_config(
        tmp.path(),
        &format!(
            r#"{{"seed": 21, "workflow": "fim", "synthesis": {{"drift_correction": false}},
                "data": {{"sessions": "{}"}}}}"#,
            p(&sessions)
        ),
    );
    let c = p(&config);
    let run = tmp.path().join("run");
    ok(&["run", "--config", c, "--out", p(&run)]);

    let d = |n: &str| tmp.path().join(n);
    ok(&["ingest", "--config", c, "--out", p(&d("real"))]);
    ok(&[
        "synth",
        "--config",
        c,
        "--windows",
        p(&d("real")),
        "--out",
        p(&d("synth")),
    ]);
    ok(&["features", "--windows", p(&d("synth")), "--out", p(&d("sf"))]);
    ok(&["features", "--windows", p(&d("real")), "--out", p(&d("rf"))]);
    let sel = ok(&[
        "select",
        "--config",
        c,
        "--features",
        p(&d("sf").join("features.csv")),
        "--out",
        p(&d("sel")),
    ]);
    assert!(String::from_utf8_lossy(&sel.stdout).contains("mcr"));
    ok(&[
        "evaluate",
        "--config",
        c,
        "--features",
        p(&d("rf").join("features.csv")),
        "--selection",
        p(&d("sel").join("selection.json")),
        "--out",
        p(&d("eval")),
    ]);

    let read = |path: std::path::PathBuf| std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(
        read(run.join("fim_selection.json")),
        read(d("sel").join("selection.json"))
    );
    assert_eq!(
        read(run.join("fim_evaluation.json")),
        read(d("eval").join("evaluation.json"))
    );
    assert_eq!(read(run.join("real_features.csv")), read(d("rf").join("features.csv")));
    assert_eq!(
        read(run.join("synthetic_features.csv")),
        read(d("sf").join("features.csv"))
    );

    let manifest: serde_json::Value = serde_json::from_slice(&read(d("sel").join("run_manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], 21);
    assert_eq!(manifest["command"], "select");

    ok(&[
        "train",
        "--config",
        c,
        "--features",
        p(&d("rf").join("features.csv")),
        "--selection",
        p(&d("sel").join("selection.json")),
        "--out",
        p(&d("model")),
    ]);
    let scored = ok(&[
        "evaluate",
        "--features",
        p(&d("rf").join("features.csv")),
        "--model",
        p(&d("model")),
        "--name",
        "resub",
        "--out",
        p(&d("resub")),
    ]);
    assert!(String::from_utf8_lossy(&scored.stdout).contains("resub"));

    let cmp = ok(&[
        "compare",
        "--a",
        p(&d("eval").join("evaluation.json")),
        "--b",
        p(&d("eval").join("evaluation.json")),
        "--out",
        p(&d("cmp")),
    ]);
    let text = String::from_utf8_lossy(&cmp.stdout).to_string();
    assert!(text.contains("winner: none"), "{text}");
    let report = ok(&["report", "--input", p(&run)]);
    assert!(String::from_utf8_lossy(&report.stdout).contains("FIM"));
}

#[test]
fn output_directory_is_write_once() {
    let tmp = tempfile::tempdir().unwrap();
    let out = simulate_planted(tmp.path(), 2);
    let again = harchain(&[
        "simulate",
        "--design",
        "planted",
        "--participants",
        "2",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&again), 2);
    assert!(String::from_utf8_lossy(&again.stderr).contains("--force"));
    ok(&[
        "simulate",
        "--design",
        "planted",
        "--participants",
        "2",
        "--seed",
        "4",
        "--out",
        p(&out),
        "--force",
    ]);
}

#[test]
fn configuration_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_json = write_config(tmp.path(), "{ not json");
    assert_eq!(
        code(&harchain(&[
            "run",
            "--config",
            p(&bad_json),
            "--out",
            p(&tmp.path().join("o"))
        ])),
        2
    );
    let even_k = write_config(tmp.path(), r#"{"model": {"k": 4}}"#);
    assert_eq!(
        code(&harchain(&[
            "run",
            "--config",
            p(&even_k),
            "--out",
            p(&tmp.path().join("o"))
        ])),
        2
    );
    let missing = write_config(tmp.path(), r#"{"data": {"sessions": "nowhere.json"}}"#);
    assert_eq!(
        code(&harchain(&[
            "run",
            "--config",
            p(&missing),
            "--out",
            p(&tmp.path().join("o"))
        ])),
        2
    );
    assert_eq!(code(&harchain(&["run"])), 2);
    assert_eq!(code(&harchain(&["select", "--features", "x.csv"])), 2);
    assert_eq!(code(&harchain(&["no-such-command"])), 2);
}

#[test]
fn data_errors_exit_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("features.csv");
    std::fs::write(&csv, "a,b\n1,2\n").unwrap();
    let out = harchain(&["select", "--features", p(&csv), "--out", p(&tmp.path().join("o"))]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    let cohort = simulate_planted(tmp.path(), 2);
    let thigh = cohort.join("p01_thigh.csv");
    let mut text = std::fs::read_to_string(&thigh).unwrap();
    text.push_str("oops,1,2,3\n");
    std::fs::write(&thigh, text).unwrap();
    let out = harchain(&[
        "ingest",
        "--sessions",
        p(&cohort.join("sessions.json")),
        "--out",
        p(&tmp.path().join("w")),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn empty_selection_exits_with_4() {
    let tmp = tempfile::tempdir().unwrap();
    let cohort = simulate_planted(tmp.path(), 4);
    let w = tmp.path().join("w");
    ok(&["ingest", "--sessions", p(&cohort.join("sessions.json")), "--out", p(&w)]);
    ok(&["features", "--windows", p(&w), "--out", p(&tmp.path().join("f"))]);
    let config = write_config(tmp.path(), r#"{"selection": {"p_threshold": 1e-300}}"#);
    let out = harchain(&[
        "select",
        "--config",
        p(&config),
        "--features",
        p(&tmp.path().join("f").join("features.csv")),
        "--out",
        p(&tmp.path().join("s")),
    ]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}
