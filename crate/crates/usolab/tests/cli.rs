use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn usolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_usolab"))
        .args(args)
        .env_remove("USOLAB_GUARD")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn generate_classifies_and_rejects_small_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.json");
    let run = usolab(&["generate", "--blocks", "2,2,3", "--product", "ascending", "-o", path(&out)]);
    assert_eq!(run.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&run.stderr).contains("classification: USO"));
    assert_eq!(json(&out)["outmap"]["generator"]["type"], "product");

    let bad = usolab(&["generate", "--blocks", "1,2", "--random"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("at least 2"));
}

#[test]
fn layered_fixture_solves_to_the_same_sink_both_ways() {
    let dir = tempfile::tempdir().unwrap();
    for mode in ["--direct", "--via-eopl"] {
        let cert = dir.path().join("cert.json");
        let run = usolab(&["solve", path(&fixture("layered.json")), mode, "-o", path(&cert)]);
        assert_eq!(run.status.code(), Some(0), "{mode}");
        assert_eq!(json(&cert), serde_json::json!({"type": "GU1", "point": [1, 4, 7]}));
        let check = usolab(&["verify", path(&fixture("layered.json")), path(&cert)]);
        assert_eq!(check.status.code(), Some(0));
    }
}

#[test]
fn violations_exit_three_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("cyc.json");
    // a directed 4-cycle on the square
    std::fs::write(
        &inst,
        r#"{"grid":{"blocks":[[1,2],[3,4]]},"outmap":{"table":{"1,3":[2],"2,3":[4],"2,4":[1],"1,4":[3]}}}"#,
    )
    .unwrap();
    for mode in ["--direct", "--via-eopl"] {
        let cert = dir.path().join("cert.json");
        let run = usolab(&["solve", path(&inst), mode, "-o", path(&cert)]);
        assert_eq!(run.status.code(), Some(3), "{mode}");
        assert_eq!(json(&cert)["type"], "GUV2");
        assert_eq!(usolab(&["verify", path(&inst), path(&cert)]).status.code(), Some(0));
    }
    let forged = dir.path().join("forged.json");
    std::fs::write(&forged, r#"{"type":"GU1","point":[1,3]}"#).unwrap();
    assert_eq!(usolab(&["verify", path(&inst), path(&forged)]).status.code(), Some(4));
}

#[test]
fn relabeled_partition_roundtrips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("p.json");
    let run = usolab(&["generate", "--partition", "1,3;2,4", "--product", "3,1;4,2", "--table", "-o", path(&inst)]);
    assert_eq!(run.status.code(), Some(0));
    let cert = dir.path().join("c.json");
    assert_eq!(usolab(&["solve", path(&inst), "-o", path(&cert)]).status.code(), Some(0));
    assert_eq!(json(&cert), serde_json::json!({"type": "GU1", "point": [3, 4]}));
}

#[test]
fn trace_lines_are_records() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let run = usolab(&["solve", path(&fixture("layered.json")), "--trace", path(&trace)]);
    assert_eq!(run.status.code(), Some(0));
    let text = std::fs::read_to_string(&trace).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first, serde_json::json!({"depth": 0, "direction": 1, "point": [1, 3, 5], "action": "skip"}));
    assert!(text.lines().any(|l| l.contains("\"recurse\"")));
}

#[test]
fn sweep_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a.jsonl", "b.jsonl"] {
        let report = dir.path().join(name);
        let run = usolab(&["sweep", "--blocks", "2,2,2", "--sample", "20", "--seed", "9", "-o", path(&report)]);
        assert_eq!(run.status.code(), Some(0));
        let summary: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
        assert_eq!(summary["orientations"], 20);
        assert_eq!(summary["failedRecords"], 0);
        outputs.push(std::fs::read(&report).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    let square = usolab(&["sweep", "--blocks", "2,2"]);
    let summary: serde_json::Value = serde_json::from_slice(&square.stdout).unwrap();
    assert_eq!((summary["orientations"].as_u64(), summary["usos"].as_u64()), (Some(16), Some(12)));
}

#[test]
fn dot_export_and_guards() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("sq.json");
    usolab(&["generate", "--blocks", "2,2", "--product", "ascending", "-o", path(&inst)]);
    let dot = usolab(&["export-dot", path(&inst)]);
    assert_eq!(dot.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&dot.stdout).matches("->").count(), 4);
    let line = usolab(&["export-dot", path(&inst), "--reduced"]);
    assert_eq!(String::from_utf8_lossy(&line.stdout).matches("->").count(), 4);

    let guarded = Command::new(env!("CARGO_BIN_EXE_usolab"))
        .args(["export-dot", path(&inst), "--reduced"])
        .env("USOLAB_GUARD", "4096,8")
        .output()
        .unwrap();
    assert_eq!(guarded.status.code(), Some(2));
    let lifted = Command::new(env!("CARGO_BIN_EXE_usolab"))
        .args(["export-dot", path(&inst), "--reduced", "--unsafe"])
        .env("USOLAB_GUARD", "4096,8")
        .output()
        .unwrap();
    assert_eq!(lifted.status.code(), Some(0));
}

#[test]
fn reduce_writes_manifest_and_node_dump() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    let nodes = dir.path().join("n.jsonl");
    let run = usolab(&["reduce", path(&fixture("layered.json")), "-o", path(&manifest)]);
    assert_eq!(run.status.code(), Some(0));
    let m = json(&manifest);
    assert_eq!((m["dBits"].as_u64(), m["mBits"].as_u64()), (Some(32), Some(74)));
    assert_eq!(m["startMask"], "00000001");

    let inst = dir.path().join("sq.json");
    usolab(&["generate", "--blocks", "2,2", "--product", "ascending", "-o", path(&inst)]);
    let run = usolab(&["reduce", path(&inst), "--dump", path(&nodes), "-o", path(&manifest)]);
    assert_eq!(run.status.code(), Some(0));
    let dump = std::fs::read_to_string(&nodes).unwrap();
    assert_eq!(dump.lines().count(), 4);
    assert!(dump.starts_with(r#"{"node":"0000","succ":"#));
}

#[test]
fn table_instances_solve_enumerate_and_check() {
    let table = fixture("two_lines.json");
    let walk = usolab(&["eopl-solve", path(&table)]);
    assert_eq!(walk.status.code(), Some(0));
    let ans: serde_json::Value = serde_json::from_slice(&walk.stdout).unwrap();
    assert_eq!(ans, serde_json::json!({"tag": "UF1", "v": "1"}));

    let all = usolab(&["eopl-solve", path(&table), "--enumerate"]);
    assert_eq!(all.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&all.stdout).contains(r#"{"tag":"UFV2","v":"1","w":"4"}"#));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"tag":"UFV1","v":"0","w":"0","kind":"a"}"#).unwrap();
    assert_eq!(usolab(&["eopl-solve", path(&table), "--check", path(&bad)]).status.code(), Some(4));
}
