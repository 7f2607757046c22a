use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rwalk")).args(args).env("RWALK_THREADS", "2").output().expect("binary runs")
}

fn gen(dir: &Path, spec: &str) -> String {
    let path = dir.join(format!("{}.rwg", spec.replace([':', ','], "_")));
    let path = path.to_str().unwrap().to_string();
    let out = rwalk(&["gen", spec, "--out", &path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn json_lines(bytes: &[u8]) -> Vec<Value> {
    String::from_utf8_lossy(bytes).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn gen_writes_a_proper_instance_that_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "regular-proper:100:12:7");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("RWG1 undirected 100 600 12\n"));
    assert!(text.contains("# generator=regular-proper:100:12:7"));
    let again = rwalk(&["gen", "regular-proper:100:12:7"]);
    assert_eq!(String::from_utf8_lossy(&again.stdout), text);
    let v = rwalk(&["verify", "proper", &path]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(json_lines(&v.stdout)[0]["clashes"], 0);
}

#[test]
fn solve_appends_validated_records() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "complete-proper:8");
    let results = dir.path().join("results.jsonl");
    let results = results.to_str().unwrap();
    for algo in ["greedy", "oracle-path"] {
        let out = rwalk(&["solve", &inst, "--algo", algo, "--out", results, "--seed", "3"]);
        assert_eq!(out.status.code(), Some(0), "{algo}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let recs = json_lines(&std::fs::read(results).unwrap());
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["algo"], "greedy");
    assert!(recs[0]["rng"].as_str().unwrap().starts_with("ChaCha8"));
    assert!(recs[0]["achieved_length"].as_u64().unwrap() >= 4);
    assert_eq!(recs[1]["exact"], true);
    assert_eq!(recs[0]["instance_digest"], recs[1]["instance_digest"]);
    let v = rwalk(&["verify", &format!("rainbow:{results}"), &inst]);
    assert_eq!(v.status.code(), Some(0), "{}", String::from_utf8_lossy(&v.stdout));
}

#[test]
fn tampered_results_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "complete-proper:8");
    let out = rwalk(&["solve", &inst]);
    let mut rec = json_lines(&out.stdout).remove(0);
    let colours = rec["path"]["colours"].as_array_mut().unwrap();
    colours[0] = (colours[0].as_u64().unwrap() + 1).into();
    let results = dir.path().join("bad.jsonl");
    std::fs::write(&results, format!("{rec}\n")).unwrap();
    let v = rwalk(&["verify", &format!("rainbow:{}", results.display()), &inst]);
    assert_eq!(v.status.code(), Some(1));
}

#[test]
fn best_effort_runs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "cayley:cyclic:101:1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20,21,22,23,24,25");
    let out = rwalk(&["solve", &inst, "--algo", "dense", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = &json_lines(&out.stdout)[0];
    assert_eq!(rec["hypotheses_met"], false);
    assert!(rec["achieved_length"].as_u64().unwrap() >= 13);
}

#[test]
fn rearrange_reports_an_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "cayley:dihedral:24:random:20:4");
    let out = rwalk(&["solve", &inst, "--algo", "rearrange", "--params", "eps=0.5"]);
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    let rec = &json_lines(&out.stdout)[0];
    assert_eq!(rec["ordering"].as_array().unwrap().len(), 20);
    assert!(rec["repetition_count"].as_u64().unwrap() <= 10);
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), "complete-proper:6");
    assert_eq!(rwalk(&["solve", &inst, "--algo", "nonsense"]).status.code(), Some(1));
    assert_eq!(rwalk(&["solve", &inst, "--params", "bogus=1"]).status.code(), Some(1));
    assert_eq!(rwalk(&["solve", "/no/such/file"]).status.code(), Some(1));
    assert_eq!(rwalk(&["gen", "nonsense:3"]).status.code(), Some(1));
    // Directed instance given to an undirected-only algorithm.
    let directed = gen(dir.path(), "circulant:11:1,2,3");
    assert_eq!(rwalk(&["solve", &directed, "--algo", "mop"]).status.code(), Some(1));
}

#[test]
fn verify_sweeps() {
    let g = rwalk(&["verify", "graham:7"]);
    assert_eq!(g.status.code(), Some(0));
    assert_eq!(json_lines(&g.stdout)[0]["report"]["rearrangeable"], 63);
    let s = rwalk(&["verify", "sequenceable", "dihedral:6"]);
    assert_eq!(json_lines(&s.stdout)[0]["sequenceable"], false);
    let p = rwalk(&["verify", "pollard:sampled:13:500", "--seed", "4"]);
    assert_eq!(p.status.code(), Some(0));
    assert_eq!(rwalk(&["verify", "graham:8"]).status.code(), Some(1));
}

#[test]
fn bench_table_is_in_suite_order() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.txt");
    std::fs::write(&suite, "# small suite\ncomplete-proper:10 greedy 0..2\ncayley:elem2:3:all oracle-path\n").unwrap();
    let out = dir.path().join("table.csv");
    let b = rwalk(&["bench", suite.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(b.status.code(), Some(0), "{}", String::from_utf8_lossy(&b.stderr));
    let table = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "instance,algo,seed,length,target,time_ms,status");
    assert!(rows[1].starts_with("complete-proper:10,greedy,0,"));
    assert!(rows[2].starts_with("complete-proper:10,greedy,1,"));
    assert!(rows[3].starts_with("cayley:elem2:3:all,oracle-path,0,"));
    let j = rwalk(&["bench", suite.to_str().unwrap(), "--format", "json"]);
    assert_eq!(json_lines(&j.stdout).len(), 3);
}
