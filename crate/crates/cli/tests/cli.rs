use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pjfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pjfit"))
        .args(args)
        .env_remove("PJFIT_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit status")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn smoke() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/smoke.jsonl")
        .display()
        .to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn sidecars(records: &Path) -> Vec<PathBuf> {
    let stem = records.with_extension("");
    [".jsonl", ".posts.jsonl", ".manifest.json", ".truth.json"]
        .iter()
        .map(|suffix| PathBuf::from(format!("{}{suffix}", stem.display())))
        .collect()
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for out in [&a, &b] {
        let r = pjfit(&["generate", "--seed", "7", "--out", s(out), "--applications", "300", "--candidates", "60"]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    }
    for (x, y) in sidecars(&a).iter().zip(sidecars(&b)) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(&y).unwrap(), "{}", x.display());
    }
}

#[test]
fn usage_errors_exit_one_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.jsonl");
    let ck = dir.path().join("ck.json");
    let corpus = smoke();
    let cases: Vec<Vec<&str>> = vec![
        vec!["generate", "--out", s(&out)],
        vec!["generate", "--seed", "1", "--out", s(&out), "--drift=-1"],
        vec!["generate", "--seed", "1", "--out", s(&out), "--noise", "0.7"],
        vec!["train-explicit", "--corpus", "/nonexistent/c.jsonl", "--seed", "1", "--out", s(&ck)],
        vec!["train-explicit", "--corpus", &corpus, "--seed", "1", "--out", s(&ck), "--mode", "fused-both"],
        vec!["train-explicit", "--corpus", &corpus, "--seed", "1", "--out", s(&ck), "--epochs", "0"],
        vec!["eval", "--corpus", &corpus, "--checkpoint", s(&ck), "--mode", "fused-both"],
        vec!["eval", "--corpus", &corpus, "--checkpoint", s(&ck), "--mode", "best"],
        vec!["shapes", "--scale", "huge"],
        vec!["no-such-command"],
    ];
    for args in &cases {
        let r = pjfit(args);
        assert_eq!(code(&r), 1, "{args:?}: {}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bad_thread_cap_is_a_usage_error() {
    let r = Command::new(env!("CARGO_BIN_EXE_pjfit"))
        .args(["shapes", "--scale", "desk"])
        .env("PJFIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&r), 1);
}

#[test]
fn malformed_corpus_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("bad.jsonl");
    std::fs::write(&records, "{not json}\n").unwrap();
    std::fs::write(dir.path().join("bad.posts.jsonl"), "").unwrap();
    std::fs::write(dir.path().join("bad.manifest.json"), "{}").unwrap();
    let schema = dir.path().join("s.json");
    let r = pjfit(&["extract", "--corpus", s(&records), "--schema-out", s(&schema)]);
    assert_eq!(code(&r), 2, "{}", String::from_utf8_lossy(&r.stderr));
    assert!(!schema.exists());
}

#[test]
fn exploding_learning_rate_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let r = pjfit(&[
        "train-explicit", "--corpus", &smoke(), "--seed", "1", "--epochs", "2", "--lr", "1e300", "--mode",
        "entity-only", "--out", s(&ck),
    ]);
    assert_eq!(code(&r), 3, "{}", String::from_utf8_lossy(&r.stderr));
    assert!(!ck.exists());
}

#[test]
fn smoke_pipeline_reports_every_metric_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = smoke();
    let schema = dir.path().join("schema.json");
    let r = pjfit(&["extract", "--corpus", &corpus, "--schema-out", s(&schema)]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));

    let train = |tag: &str| -> (PathBuf, PathBuf) {
        let e = dir.path().join(format!("explicit-{tag}.json"));
        let f = dir.path().join(format!("fused-{tag}.json"));
        let r = pjfit(&[
            "train-explicit", "--corpus", &corpus, "--schema", s(&schema), "--seed", "3", "--epochs", "3", "--out",
            s(&e),
        ]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
        let r = pjfit(&[
            "train-implicit", "--corpus", &corpus, "--schema", s(&schema), "--seed", "3", "--epochs", "1",
            "--explicit-checkpoint", s(&e), "--out", s(&f),
        ]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
        (e, f)
    };
    let (e1, f1) = train("1");
    let (e2, f2) = train("2");
    assert_eq!(std::fs::read(&e1).unwrap(), std::fs::read(&e2).unwrap());
    assert_eq!(std::fs::read(&f1).unwrap(), std::fs::read(&f2).unwrap());

    let report = dir.path().join("report.json");
    let r = pjfit(&[
        "eval", "--corpus", &corpus, "--schema", s(&schema), "--checkpoint", s(&f1), "--mode", "fused-both", "--out",
        s(&report),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    assert!(stdout(&r).contains("fused-both"));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    for key in ["auc", "accuracy", "f1", "precision_at_recall_0_8"] {
        let v = json[key].as_f64().unwrap_or(f64::NAN);
        assert!((0.0..=1.0).contains(&v), "{key} = {v}");
    }

    // The explicit-only checkpoint cannot serve a fused mode.
    let r = pjfit(&["eval", "--corpus", &corpus, "--checkpoint", s(&e1), "--mode", "fused-both"]);
    assert_eq!(code(&r), 2);

    let r = pjfit(&["score", "--corpus", &corpus, "--checkpoint", s(&f1), "--record", "42"]);
    assert_eq!(code(&r), 0);
    let line: serde_json::Value = serde_json::from_str(stdout(&r).trim()).unwrap();
    assert_eq!(line["record"], 42);
    let p = line["score"].as_f64().unwrap();
    let z = line["explicit_logit"].as_f64().unwrap() + line["implicit_logit"].as_f64().unwrap();
    assert!((p - 1.0 / (1.0 + (-z).exp())).abs() < 1e-12);

    let r = pjfit(&["explain", "--corpus", &corpus, "--checkpoint", s(&f1), "--record", "42"]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let text = stdout(&r);
    assert!(text.contains("record 42"));
    assert!(text.contains(&format!("score {p:.4}")));
    for field in ["title", "req_skill_1", "university_tier", "skill_1", "years_experience"] {
        assert!(text.contains(field), "missing {field}:\n{text}");
    }

    let r = pjfit(&["explain", "--corpus", &corpus, "--checkpoint", s(&f1), "--record", "100000"]);
    assert_eq!(code(&r), 1);
}

#[test]
fn large_scale_shapes_print_target_widths() {
    let r = pjfit(&["shapes", "--scale", "paper"]);
    assert_eq!(code(&r), 0);
    let out = stdout(&r);
    assert!(out.contains("resume s=264 d_x=37000; post s=57 d_x=1600"), "{out}");
    assert!(out.contains("f_E=128 g_E=128 history item=258 f_I=64 g_I=64 fused=192"), "{out}");
}
