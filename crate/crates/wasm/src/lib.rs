//! Browser bindings for three small exact computations: the switch-network
//! explorer, the cactus reduction demo and solving an uploaded network.
//!
//! Every export returns a JSON document; the `*_json` functions hold the logic so
//! they can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use dcswitch::io::{parse_network, NetworkFile};
use dcswitch::network::{Network, OperatingPoint, SwitchSet};
use dcswitch::oracles::subset_sum_solvable;
use dcswitch::rational::{parse_rational, ExtRational};
use dcswitch::reductions::{build_cactus, build_sch, BuildMode, SchMode, SubsetSumInstance};
use dcswitch::solvers::{injection_range, solve_feas, solve_mpf, solve_msf, solve_ots, Injection, SearchOptions};

#[derive(Serialize)]
struct SubsetRow {
    switched: SwitchSet,
    /// `None` when the topology admits no feasible point.
    range: Option<(ExtRational, ExtRational)>,
}

#[derive(Serialize)]
struct SchView {
    network: NetworkFile,
    quantity: &'static str,
    subsets: Vec<SubsetRow>,
}

fn sch_mode(variant: &str) -> Result<SchMode, String> {
    match variant {
        "plain" => Ok(SchMode::Plain),
        "plus" => Ok(SchMode::Plus),
        "minus" => Ok(SchMode::Minus),
        other => Err(format!("unknown variant {other:?}")),
    }
}

fn build_mode(strict: bool) -> BuildMode {
    if strict {
        BuildMode::Literal
    } else {
        BuildMode::Repaired
    }
}

fn subsets(net: &Network) -> Vec<SwitchSet> {
    let ids: Vec<&String> = net.switchable_lines().map(|l| &l.id).collect();
    (0u32..1 << ids.len())
        .map(|m| ids.iter().enumerate().filter(|(k, _)| m & (1 << k) != 0).map(|(_, id)| (*id).clone()).collect())
        .collect()
}

/// For each of the 8 switch sets of Sch(x), the range of pgen(v) (plus) or
/// pload(v) (plain and minus) over feasible operating points.
pub fn sch_explore_json(x: &str, variant: &str, strict: bool) -> Result<String, String> {
    let x = parse_rational(x).map_err(|e| e.to_string())?;
    let mode = sch_mode(variant)?;
    let net = build_sch(&x, mode, build_mode(strict)).map_err(|e| e.to_string())?.network;
    let (which, quantity) = match mode {
        SchMode::Plus => (Injection::Generation, "pgen(v)"),
        _ => (Injection::Load, "pload(v)"),
    };
    let rows = subsets(&net)
        .into_iter()
        .map(|sw| {
            let range = injection_range(&net, &sw, "v", which).map_err(|e| e.to_string())?;
            Ok(SubsetRow { switched: sw, range })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&SchView { network: NetworkFile::from_network(&net), quantity, subsets: rows })
}

#[derive(Serialize)]
struct CactusView {
    buses: usize,
    lines: usize,
    switchable: usize,
    feasible: bool,
    subset_sum: Option<Vec<u64>>,
    agree: bool,
    witness: Option<OperatingPoint>,
    network: NetworkFile,
}

/// Builds the cactus for `(M, w)`, decides feasibility and compares with the
/// subset-sum dynamic program.
pub fn cactus_demo_json(set: &str, target: u64, strict: bool) -> Result<String, String> {
    let elems = set
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| format!("{s:?} is not a positive integer")))
        .collect::<Result<Vec<_>, _>>()?;
    let ssi = SubsetSumInstance::new(elems, target).map_err(|e| e.to_string())?;
    let net = build_cactus(&ssi, build_mode(strict)).map_err(|e| e.to_string())?.network;
    let switchable = net.switchable_lines().count();
    let r = solve_feas(&net, &page_options()).map_err(|e| e.to_string())?;
    let oracle = subset_sum_solvable(&ssi);
    to_json(&CactusView {
        buses: net.buses().len(),
        lines: net.lines().len(),
        switchable,
        feasible: r.is_feasible(),
        agree: r.is_feasible() == oracle.is_some(),
        subset_sum: oracle,
        witness: r.witness,
        network: NetworkFile::from_network(&net),
    })
}

/// Solves `feas`, `mpf`, `msf` or `ots` on a network document.
pub fn solve_network_json(document: &str, problem: &str) -> Result<String, String> {
    let net = parse_network(document).map_err(|e| e.to_string())?;
    let opts = page_options();
    let r = match problem {
        "feas" => solve_feas(&net, &opts),
        "mpf" => solve_mpf(&net),
        "msf" => solve_msf(&net, &opts),
        "ots" => solve_ots(&net, &opts),
        other => return Err(format!("unknown problem {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    to_json(&r)
}

fn page_options() -> SearchOptions {
    // the page runs on one thread
    SearchOptions { jobs: 1, ..SearchOptions::default() }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn sch_explore(x: &str, variant: &str, strict: bool) -> Result<String, JsValue> {
    sch_explore_json(x, variant, strict).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn cactus_demo(set: &str, target: u32, strict: bool) -> Result<String, JsValue> {
    cactus_demo_json(set, u64::from(target), strict).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn solve_network(document: &str, problem: &str) -> Result<String, JsValue> {
    solve_network_json(document, problem).map_err(|e| JsValue::from_str(&e))
}
