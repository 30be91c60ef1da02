use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn scouts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scouts")).args(args).output().expect("spawn scouts")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with(".meta.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let dump = scoutgrid::protocol::anchored_geometric(2, &scoutgrid::scalar::Scalar::ratio(1, 2)).unwrap().to_canonical_string();
    let good = write(dir.path(), "good.txt", &dump);
    assert_eq!(code(&scouts(&["validate", &good])), 0);

    let bad = write(dir.path(), "bad.txt", "dim 1\nscouts 1\nstates A\ninit 1 A\ntrans A * -> 1/2 A (+1) | 1/4 A (-1)\n");
    let o = scouts(&["validate", &bad]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["valid"], false);
    assert!(v["violations"][0].as_str().unwrap().contains("row sum"), "{v}");

    let missing = dir.path().join("absent.txt");
    assert_eq!(code(&scouts(&["validate", missing.to_str().unwrap()])), 2);
}

#[test]
fn hitting_verdicts_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = scouts(&["--seed", "3", "--replicas", "10000", "--out-dir", out, "hitting", "--protocol", "builtin:srw", "--target", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["cap_source"], "default");
    assert_eq!(v["targets"][0]["divergence"]["verdict"], "infinite-mean-consistent");
    let curve = std::fs::read_to_string(dir.path().join("hitting_1.csv")).unwrap();
    assert!(curve.starts_with("# seed=3\nu,survivors,total\n"), "{curve}");
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("hitting.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 3);
    assert!(dir.path().join("hitting.json").exists());

    let o = scouts(&[
        "--seed",
        "3",
        "--replicas",
        "2000",
        "--format",
        "csv",
        "hitting",
        "--protocol",
        "builtin:anchored_geometric,d=2",
        "--target",
        "2,1",
        "--target",
        "0,0",
    ]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout.clone()).unwrap();
    // the origin is occupied at time zero: every survivor count is zero
    let origin: Vec<&str> = csv.lines().filter(|l| l.starts_with("\"(0,0)\"")).collect();
    assert!(!origin.is_empty());
    let o = scouts(&[
        "--seed",
        "3",
        "--replicas",
        "2000",
        "hitting",
        "--protocol",
        "builtin:anchored_geometric,d=2",
        "--target",
        "2,1",
        "--target",
        "0,0",
    ]);
    let v = json(&o);
    assert_eq!(v["targets"][0]["divergence"]["verdict"], "finite-mean-consistent");
    assert_eq!(v["targets"][1]["divergence"]["verdict"], "finite-mean-consistent");
    assert_eq!(v["targets"][1]["summary"]["mean"]["mean"], 0.0, "{}", v["targets"][1]);
    for l in origin {
        assert!(l.ends_with(",0,2000"), "{l}");
    }
}

#[test]
fn analyze_reports() {
    let dir = tempfile::tempdir().unwrap();
    let class = |v: &Value| v["report"]["classes"][0]["analysis"].clone();

    let v = json(&scouts(&["analyze", "--protocol", "builtin:srw"]));
    assert_eq!(v["report"]["classes"].as_array().unwrap().len(), 1);
    assert_eq!(class(&v)["drift"][0], "0");
    assert_eq!(class(&v)["degeneracy"]["degenerate"], false);

    let plus = write(dir.path(), "plus.txt", "dim 1\nscouts 1\nstates A\ninit 1 A\ntrans A * -> 1 A (+1)\n");
    let v = json(&scouts(&["analyze", "--protocol", &plus]));
    assert_eq!(class(&v)["drift"][0], "1");
    assert_eq!(class(&v)["ray_direction"], serde_json::json!([1.0]));

    let cycle = write(dir.path(), "cycle.txt", "dim 1\nscouts 1\nstates a b\ninit 1 a\ntrans a * -> 1 b (+1)\ntrans b * -> 1 a (-1)\n");
    let v = json(&scouts(&["analyze", "--protocol", &cycle]));
    assert_eq!(class(&v)["degeneracy"]["degenerate"], true);
    assert_eq!(class(&v)["degeneracy"]["offsets"], serde_json::json!([["a", [0]], ["b", [1]]]));
}

#[test]
fn lemma_exit_codes() {
    let o = scouts(&["lemma", "lemma7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(json(&o)["verdict"], "PASS");
    assert_eq!(code(&scouts(&["lemma", "lemma6", "--law", "1@1/2;-1@1/2"])), 1);
    assert_eq!(code(&scouts(&["lemma", "lemma17", "--law", "0@1"])), 1);
    assert_eq!(code(&scouts(&["lemma", "lemma99"])), 1);
    assert_eq!(code(&scouts(&["--bogus", "lemma", "lemma7"])), 1);
}

#[test]
fn config_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.cfg",
        "# hitting run\nseed = 17\nreplicas = 400\ncap = 65536\nprotocol = builtin:anchored_geometric\ntarget = 1;-2;3\n",
    );
    let run = |threads: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = scouts(&["--config", &cfg, "--threads", threads, "--out-dir", out.to_str().unwrap(), "hitting"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (o.stdout, artifacts(&out))
    };
    let a = run("1", "a");
    let b = run("1", "b");
    let c = run("4", "c");
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(json(&scouts(&["--config", &cfg, "hitting"]))["seed"], 17);
}
