use std::path::Path;
use std::process::{Command, Output};

use cdinn::bench::{classify_2d, delay_dataset, ClassKind};
use cdinn_cli::io::{parse_constraints, read_dataset};
use cdinn_cli::ModelFile;

fn cdinn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdinn")).current_dir(dir).args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_is_deterministic_and_reads_back_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&cdinn(p, &["gen", "--func", "moons", "--n", "60", "--seed", "3", "--out", "a.csv"]));
    ok(&cdinn(p, &["gen", "--func", "moons", "--n", "60", "--seed", "3", "--out", "b.csv"]));
    ok(&cdinn(p, &["gen", "--func", "moons", "--n", "60", "--seed", "4", "--out", "c.csv"]));
    let read = |f: &str| std::fs::read(p.join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    let prov: serde_json::Value = serde_json::from_slice(&read("a.provenance.json")).unwrap();
    assert_eq!(prov["generator"], "moons");
    assert_eq!(prov["seed"], 3);
    assert_ne!(read("a.csv"), read("c.csv"));

    let back = read_dataset(&p.join("a.csv")).unwrap();
    let want = classify_2d(ClassKind::Moons, 60, 0.1, 3).unwrap();
    assert_eq!(back.inputs, want.inputs);
    assert_eq!(back.targets, want.targets);

    ok(&cdinn(p, &["gen", "--func", "delay", "--n", "4", "--seq-len", "6", "--out", "d.csv"]));
    let seq = read_dataset(&p.join("d.csv")).unwrap();
    let want = delay_dataset(4, 6, 0).unwrap();
    assert_eq!(seq.seq_len, Some(6));
    assert_eq!(seq.inputs, want.inputs);
    assert_eq!(seq.targets, want.targets);
}

#[test]
fn usage_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(cdinn(p, &["gen", "--func", "rosenbrock", "--out", "x.csv"]).status.code(), Some(2));
    assert_eq!(cdinn(p, &["optimize", "--model", "missing.json", "--x0", "0,0"]).status.code(), Some(2));
    std::fs::write(p.join("bad.csv"), "x0,y\n1,abc\n").unwrap();
    let out = cdinn(p, &["train", "--arch", "icnn", "--data", "bad.csv", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a finite number"));
}

#[test]
fn train_then_optimize_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&cdinn(p, &["gen", "--func", "matyas", "--points", "11", "--out", "m.csv"]));
    let log = ok(&cdinn(
        p,
        &["train", "--arch", "cdinn1", "--hidden", "8", "--epochs", "20", "--restarts", "2", "--data", "m.csv", "--out", "model.json"],
    ));
    assert!(log.contains("restart 0") && log.contains("restart 1"), "{log}");

    let model = ModelFile::load(&p.join("model.json")).unwrap();
    let fitted = model.to_fitted();
    // the stored network reproduces itself bit for bit after another save/load
    model.save(&p.join("copy.json")).unwrap();
    let copy = ModelFile::load(&p.join("copy.json")).unwrap();
    assert_eq!(copy, model);
    for x in [[0.0, 0.0], [3.5, -7.25], [-10.0, 10.0]] {
        assert_eq!(copy.to_fitted().predict(&x).unwrap().to_bits(), fitted.predict(&x).unwrap().to_bits());
    }

    let summary = ok(&cdinn(p, &["optimize", "--model", "model.json", "--x0", "-6,4", "--trace", "t.csv"]));
    assert!(summary.starts_with("method=ccp"), "{summary}");
    let trace = std::fs::read_to_string(p.join("t.csv")).unwrap();
    assert!(trace.starts_with("iter,x0,x1,objective,surrogate,lp_status,lp_pivots"));
    assert!(trace.lines().count() >= 2);

    let gd = ok(&cdinn(
        p,
        &["optimize", "--model", "model.json", "--method", "subgrad", "--alpha0", "10", "--schedule", "over_k", "--x0", "-6,4"],
    ));
    assert!(gd.starts_with("method=subgrad"), "{gd}");

    // start outside the affine row x0 + x1 <= 0
    std::fs::write(p.join("c.txt"), "# half plane\n1 1 <= 0\n").unwrap();
    let out = cdinn(p, &["optimize", "--model", "model.json", "--x0", "4,4", "--constraints", "c.txt"]);
    assert_eq!(out.status.code(), Some(2));
    ok(&cdinn(p, &["optimize", "--model", "model.json", "--x0", "-4,1", "--constraints", "c.txt", "--maximize"]));

    // a future format version is refused
    let text = std::fs::read_to_string(p.join("model.json")).unwrap();
    std::fs::write(p.join("v2.json"), text.replacen("\"format_version\": 1", "\"format_version\": 2", 1)).unwrap();
    assert_eq!(cdinn(p, &["optimize", "--model", "v2.json", "--x0", "0,0"]).status.code(), Some(2));
}

#[test]
fn recurrent_models_cannot_be_optimized() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&cdinn(p, &["gen", "--func", "delay", "--n", "8", "--out", "d.csv"]));
    ok(&cdinn(p, &["train", "--arch", "rcdinn", "--hidden", "4", "--bias", "off", "--epochs", "2", "--data", "d.csv", "--out", "r.json"]));
    assert_eq!(cdinn(p, &["optimize", "--model", "r.json", "--x0", "0"]).status.code(), Some(2));
    // pointwise architectures refuse sequence data
    let out = cdinn(p, &["train", "--arch", "icnn", "--data", "d.csv", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn benchmark_manifest_replays_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let log = ok(&cdinn(p, &["benchmark", "--suite", "delay", "--epochs", "3", "--restarts", "1", "--out-dir", "a"]));
    assert!(log.contains("ratio"), "{log}");
    ok(&cdinn(p, &["benchmark", "--manifest", "a/manifest.json", "--out-dir", "b"]));
    let a = std::fs::read(p.join("a/delay.csv")).unwrap();
    let b = std::fs::read(p.join("b/delay.csv")).unwrap();
    assert_eq!(a, b);
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failed"], 0);
    assert!(summary["runs"][0]["delay_ratio"].as_f64().unwrap() > 0.0);

    ok(&cdinn(p, &["benchmark", "--suite", "table1", "--seeds", "1,2", "--epochs", "1", "--restarts", "1", "--out-dir", "m"]));
    assert!(p.join("m/seed_1/table1.csv").exists() && p.join("m/seed_2/table1.csv").exists());
}

#[test]
fn constraint_files_are_validated() {
    assert_eq!(parse_constraints("1 2 <= 3\n\n# c\n-1 0 <= 0.5 # tail\n", 2).unwrap().len(), 2);
    assert!(parse_constraints("1 2 3 <= 3", 2).is_err());
    assert!(parse_constraints("1 2 >= 3", 2).is_err());
    assert!(parse_constraints("1 x <= 3", 2).is_err());
}
