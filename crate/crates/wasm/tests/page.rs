use dcswitch::oracles::subset_sum_solvable;
use dcswitch::reductions::SubsetSumInstance;
use dcswitch_wasm::{cactus_demo_json, sch_explore_json, solve_network_json};
use serde_json::Value;

fn parse(s: Result<String, String>) -> Value {
    serde_json::from_str(&s.unwrap()).unwrap()
}

#[test]
fn sch_plus_extremes_are_zero_and_x() {
    let v = parse(sch_explore_json("5/2", "plus", false));
    assert_eq!(v["quantity"], "pgen(v)");
    let rows = v["subsets"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let mut values: Vec<&str> = rows
        .iter()
        .filter(|r| !r["range"].is_null())
        .flat_map(|r| [r["range"][0].as_str().unwrap(), r["range"][1].as_str().unwrap()])
        .collect();
    values.sort();
    values.dedup();
    assert_eq!(values, ["0", "5/2"]);
}

#[test]
fn sch_minus_never_consumes() {
    let v = parse(sch_explore_json("1", "minus", false));
    for r in v["subsets"].as_array().unwrap() {
        if !r["range"].is_null() {
            assert_eq!(r["range"][1], "0");
        }
    }
    assert!(sch_explore_json("1", "sideways", false).is_err());
    assert!(sch_explore_json("-1", "plain", false).is_err());
}

#[test]
fn cactus_demo_agrees_with_subset_sum() {
    for (set, w) in [("1,2,3", 5), ("2", 1), ("1, 4", 3)] {
        let v = parse(cactus_demo_json(set, w, false));
        let elems: Vec<u64> = set.split(',').map(|s| s.trim().parse().unwrap()).collect();
        let solvable = subset_sum_solvable(&SubsetSumInstance::new(elems, w).unwrap()).is_some();
        assert_eq!(v["feasible"], solvable, "{set} {w}");
        assert_eq!(v["agree"], true);
        assert_eq!(v["witness"].is_null(), !solvable);
    }
    assert!(cactus_demo_json("1,x", 2, false).is_err());
}

#[test]
fn solves_uploaded_documents() {
    let doc = r#"{"buses": [{"id": "g", "pgmax": "inf"}, {"id": "l", "plmax": "5"}],
                  "lines": [{"a": "g", "b": "l", "capacity": "2"}]}"#;
    let v = parse(solve_network_json(doc, "msf"));
    assert_eq!(v["value"], "2");
    assert_eq!(parse(solve_network_json(doc, "mpf"))["value"], "2");
    assert!(solve_network_json(doc, "nope").is_err());
    assert!(solve_network_json("{", "msf").is_err());
}
