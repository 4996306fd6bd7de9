use std::fs;
use std::path::{Path, PathBuf};

use dcswitch::oracles::subset_sum_solvable;
use dcswitch::reductions::SubsetSumInstance;
use dcswitch_cli::{run, Outcome, EXIT_CAP, EXIT_MISMATCH, EXIT_NO, EXIT_OK, EXIT_USAGE};
use tempfile::TempDir;

fn dcs(args: &[&str]) -> Outcome {
    run(std::iter::once("dcswitch").chain(args.iter().copied()))
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn cactus_feasibility_follows_subset_sum() {
    let dir = TempDir::new().unwrap();
    for (set, w) in [("1,2,3", 5), ("2", 1), ("1,4", 3)] {
        let net = path(&dir, "net.json");
        let g = dcs(&["gen", "cactus", "--set", set, "--target", &w.to_string(), "-o", s(&net)]);
        assert_eq!(g.code, EXIT_OK, "{}", g.stderr);
        let elems: Vec<u64> = set.split(',').map(|x| x.parse().unwrap()).collect();
        let solvable = subset_sum_solvable(&SubsetSumInstance::new(elems, w).unwrap()).is_some();
        let out = dcs(&["solve", "feas", s(&net)]);
        assert_eq!(out.code, if solvable { EXIT_OK } else { EXIT_NO }, "{set} {w}");
        assert_eq!(out.stdout.lines().next().unwrap(), if solvable { "feasible" } else { "infeasible" });
    }
}

#[test]
fn sch_msf_and_decisions() {
    let dir = TempDir::new().unwrap();
    let net = path(&dir, "sch1.json");
    assert_eq!(dcs(&["gen", "sch", "--x", "1", "-o", s(&net)]).code, EXIT_OK);
    let out = dcs(&["solve", "msf", s(&net)]);
    assert_eq!(out.code, EXIT_OK);
    assert!(out.stdout.starts_with("msf = 3\n"), "{}", out.stdout);
    assert!(out.stdout.contains("switched off: {}"));

    let yes = dcs(&["solve", "msf", s(&net), "--decision", "3"]);
    assert_eq!((yes.code, yes.stdout.as_str()), (EXIT_OK, "msf >= 3: yes\n"));
    let no = dcs(&["solve", "msf", s(&net), "--decision", "7/2"]);
    assert_eq!((no.code, no.stdout.as_str()), (EXIT_NO, "msf >= 7/2: no\n"));
    assert_eq!(dcs(&["solve", "mpf", s(&net), "--decision", "1"]).code, EXIT_USAGE);
}

#[test]
fn structured_solve_output_is_json_and_jobs_independent() {
    let dir = TempDir::new().unwrap();
    let net = path(&dir, "tree.json");
    assert_eq!(dcs(&["gen", "tree2", "--set", "2,1,3", "--target", "5", "-o", s(&net)]).code, EXIT_OK);
    let one = dcs(&["solve", "msf", s(&net), "--format", "structured", "--jobs", "1"]);
    let four = dcs(&["solve", "msf", s(&net), "--format", "structured", "--jobs", "4"]);
    assert_eq!(one, four);
    let v: serde_json::Value = serde_json::from_str(&one.stdout).unwrap();
    // m + 2 + w with m = 1 + 2 + 1 + 3
    assert_eq!(v["value"], "14");
    assert_eq!(v["status"], "optimal");
}

#[test]
fn exit_codes_for_cap_and_usage() {
    let dir = TempDir::new().unwrap();
    let net = path(&dir, "net.json");
    assert_eq!(dcs(&["gen", "cactus", "--set", "1,2,3", "--target", "5", "-o", s(&net)]).code, EXIT_OK);
    let capped = dcs(&["solve", "msf", s(&net), "--cap", "2"]);
    assert_eq!(capped.code, EXIT_CAP);
    assert!(capped.stderr.contains("enumeration cap"));

    assert_eq!(dcs(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(dcs(&["solve", "msf", "/nonexistent/net.json"]).code, EXIT_USAGE);
    assert_eq!(dcs(&["gen", "sch", "--x", "1/0"]).code, EXIT_USAGE);
    assert_eq!(dcs(&["gen", "cactus", "--set", "0", "--target", "1"]).code, EXIT_USAGE);
    let bad = path(&dir, "bad.json");
    fs::write(&bad, r#"{"buses": [{"id": "a", "plmin": "2", "plmax": "1"}]}"#).unwrap();
    let out = dcs(&["solve", "feas", s(&bad)]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("plmin exceeds plmax"));
    assert_eq!(dcs(&["--help"]).code, EXIT_OK);
}

#[test]
fn structure_checks() {
    let dir = TempDir::new().unwrap();
    let net = path(&dir, "net.json");
    dcs(&["gen", "cactus", "--set", "1,2,3", "--target", "5", "-o", s(&net)]);
    assert_eq!(dcs(&["check", "cactus", s(&net)]).code, EXIT_OK);
    assert_eq!(dcs(&["check", "degree", s(&net)]).stdout, "max degree 3\n");

    // K5 breaks the edge bound of planar graphs
    let k5 = path(&dir, "k5.json");
    let buses: Vec<String> = (1..=5).map(|i| format!(r#"{{"id": "b{i}"}}"#)).collect();
    let lines: Vec<String> = (1..=5)
        .flat_map(|i| (i + 1..=5).map(move |j| format!(r#"{{"a": "b{i}", "b": "b{j}"}}"#)))
        .collect();
    fs::write(&k5, format!(r#"{{"buses": [{}], "lines": [{}]}}"#, buses.join(","), lines.join(","))).unwrap();
    assert_eq!(dcs(&["check", "euler", s(&k5)]).code, EXIT_NO);
    assert_eq!(dcs(&["check", "cactus", s(&k5)]).code, EXIT_NO);
}

#[test]
fn tree_level_check_uses_the_emitted_annotation() {
    let dir = TempDir::new().unwrap();
    let (net, report) = (path(&dir, "tree.json"), path(&dir, "report.json"));
    let args = ["gen", "tree2", "--set", "2,1,3", "--target", "5", "-o", s(&net), "--report", s(&report)];
    assert_eq!(dcs(&args).code, EXIT_OK);
    let ok = dcs(&["check", "tree-level", s(&net), "--annotation", s(&report)]);
    assert_eq!(ok.code, EXIT_OK, "{}", ok.stdout);

    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(dcs(&strict).code, EXIT_OK);
    let bad = dcs(&["check", "tree-level", s(&net), "--annotation", s(&report)]);
    assert_eq!(bad.code, EXIT_NO);
    assert!(bad.stdout.contains("t-a1"), "{}", bad.stdout);
    assert_eq!(dcs(&["check", "tree-level", s(&net)]).code, EXIT_USAGE);
}

#[test]
fn gen_writes_reparseable_networks() {
    let dir = TempDir::new().unwrap();
    let out = dcs(&["gen", "longest-path", "--edges", "a-c,c-b"]);
    assert_eq!(out.code, EXIT_OK);
    let net = dcswitch::io::parse_network(&out.stdout).unwrap();
    assert_eq!(dcswitch::io::write_network(&net), out.stdout);
    assert_eq!(dcs(&["gen", "longest-path", "--edges", "a-c", "--b", "d"]).code, EXIT_USAGE);

    let m3 = path(&dir, "m3.json");
    fs::write(&m3, r#"{"X": ["x"], "Y": ["y"], "W": ["w"], "d": [{"x": "x", "y": "y", "w": "w", "cost": 7}]}"#).unwrap();
    let m3net = path(&dir, "m3net.json");
    assert_eq!(dcs(&["gen", "m3da", "--instance", s(&m3), "-o", s(&m3net)]).code, EXIT_OK);
    let ots = dcs(&["solve", "ots", s(&m3net)]);
    assert!(ots.stdout.starts_with("ots = 7\n"), "{}", ots.stdout);

    let sch = path(&dir, "sch.json");
    dcs(&["gen", "sch", "--x", "1", "-o", s(&sch)]);
    let mots = dcs(&["gen", "mots", "--network", s(&sch)]);
    assert_eq!(mots.code, EXIT_OK);
    let mixed = path(&dir, "mixed.json");
    fs::write(&mixed, r#"{"buses": [{"id": "a", "pgmax": "1", "plmax": "1"}, {"id": "b"}], "lines": [{"a": "a", "b": "b"}]}"#)
        .unwrap();
    let out = dcs(&["gen", "mots", "--network", s(&mixed)]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("both a generator and a load"));
}

#[test]
fn verify_reports() {
    let out = dcs(&["verify", "cacti", "--max-elem", "2", "--max-card", "2", "--max-target", "3"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    assert!(out.stdout.ends_with("9/9 instances match: all match\n"), "{}", out.stdout);

    let lp = dcs(&["verify", "longest-path", "--max-vertices", "3", "--format", "structured"]);
    assert_eq!(lp.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&lp.stdout).unwrap();
    assert_eq!(v["all_match"], true);
    let notes: Vec<&str> = v["notes"].as_array().unwrap().iter().map(|n| n.as_str().unwrap()).collect();
    assert!(notes.iter().any(|n| n.starts_with("empirical law: MSF = t_G + c with c = ")));

    let tree = dcs(&["verify", "tree", "--invariants"]);
    assert_eq!(tree.code, EXIT_OK, "{}", tree.stdout);
    assert_eq!(dcs(&["verify", "tree", "--strict-paper"]).code, EXIT_MISMATCH);

    let seeded = dcs(&["verify", "feas-msf", "--seed", "7", "--count", "5", "--format", "structured"]);
    assert_eq!(seeded, dcs(&["verify", "feas-msf", "--seed", "7", "--count", "5", "--format", "structured", "--jobs", "3"]));
}
