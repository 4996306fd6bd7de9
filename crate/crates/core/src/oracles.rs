//! Brute-force combinatorial oracles and the harness that checks each gadget
//! construction against them.
//!
//! The oracles work on the combinatorial instances only and never touch the LP
//! machinery; the harness compares their answers with the exact switching solvers.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{check_feasible, Bus, Line, Network, OperatingPoint, SwitchSet};
use crate::rational::{ExtRational, Rational};
use crate::reductions::{
    build_cactus, build_hamiltonian, build_longest_path, build_m3da, build_sch, build_two_level_tree, m3da_bus_ids,
    msf_to_ots, tree_claim, BuildMode, ConstructionError, GraphInstance, M3daInstance, SchMode, SubsetSumInstance,
};
use crate::solvers::{
    injection_range, solve_feas, solve_mpf, solve_msf, solve_ots, upper_bound_msf, Injection, SearchOptions,
    SolveError, SolveResult, Status,
};

/// Largest `|X|` accepted by [`m3da_min`]; the search is `(n!)^2`.
pub const M3DA_MAX: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("vertices {0:?} and {1:?} are not connected")]
    Disconnected(String, String),
    #[error("assignment instance of size {0} exceeds the limit of {M3DA_MAX}")]
    TooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// A subset of the elements summing to the target, if one exists.
pub fn subset_sum_solvable(ssi: &SubsetSumInstance) -> Option<Vec<u64>> {
    let w = ssi.target as usize;
    // reach[i][s]: some subset of the first i elements sums to s
    let mut reach = vec![vec![false; w + 1]; ssi.set.len() + 1];
    reach[0][0] = true;
    for (i, &x) in ssi.set.iter().enumerate() {
        let x = x as usize;
        for s in 0..=w {
            reach[i + 1][s] = reach[i][s] || (s >= x && reach[i][s - x]);
        }
    }
    if !reach[ssi.set.len()][w] {
        return None;
    }
    let mut picked = Vec::new();
    let mut s = w;
    for i in (0..ssi.set.len()).rev() {
        if !reach[i][s] {
            let x = ssi.set[i];
            picked.push(x);
            s -= x as usize;
        }
    }
    picked.reverse();
    Some(picked)
}

/// Longest simple `a`-`b` path, measured in edges, with one such path.
pub fn longest_path(gi: &GraphInstance) -> Result<(usize, Vec<String>), OracleError> {
    let adj = gi.neighbours();
    let mut best: Option<Vec<&str>> = None;
    let mut path = vec![gi.a.as_str()];
    let mut on_path: BTreeSet<&str> = BTreeSet::from([gi.a.as_str()]);

    fn extend<'a>(
        adj: &BTreeMap<&'a str, Vec<&'a str>>,
        target: &str,
        path: &mut Vec<&'a str>,
        on_path: &mut BTreeSet<&'a str>,
        best: &mut Option<Vec<&'a str>>,
    ) {
        let v = *path.last().expect("path starts at a");
        if v == target {
            if best.as_ref().is_none_or(|b| path.len() > b.len()) {
                *best = Some(path.clone());
            }
            return;
        }
        for &w in &adj[v] {
            if on_path.insert(w) {
                path.push(w);
                extend(adj, target, path, on_path, best);
                path.pop();
                on_path.remove(w);
            }
        }
    }
    extend(&adj, &gi.b, &mut path, &mut on_path, &mut best);
    let best = best.ok_or_else(|| OracleError::Disconnected(gi.a.clone(), gi.b.clone()))?;
    Ok((best.len() - 1, best.into_iter().map(str::to_string).collect()))
}

pub fn ham_path_exists(gi: &GraphInstance) -> Result<bool, OracleError> {
    Ok(longest_path(gi)?.0 + 1 == gi.vertices.len())
}

/// Rearranges `p` into the next permutation in lexicographic order.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("p[i] qualifies");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

pub type Triple = (String, String, String);

/// Cheapest perfect assignment, by trying every pairing of Y and W against X.
pub fn m3da_min(mi: &M3daInstance) -> Result<(u64, Vec<Triple>), OracleError> {
    let n = mi.x.len();
    if n > M3DA_MAX {
        return Err(OracleError::TooLarge(n));
    }
    let mut best: Option<(u64, Vec<usize>, Vec<usize>)> = None;
    let mut sy: Vec<usize> = (0..n).collect();
    loop {
        let mut sw: Vec<usize> = (0..n).collect();
        loop {
            let cost: u64 = (0..n).map(|i| mi.d[&(mi.x[i].clone(), mi.y[sy[i]].clone(), mi.w[sw[i]].clone())]).sum();
            if best.as_ref().is_none_or(|b| cost < b.0) {
                best = Some((cost, sy.clone(), sw.clone()));
            }
            if !next_permutation(&mut sw) {
                break;
            }
        }
        if !next_permutation(&mut sy) {
            break;
        }
    }
    let (cost, sy, sw) = best.expect("at least one assignment");
    let triples = (0..n).map(|i| (mi.x[i].clone(), mi.y[sy[i]].clone(), mi.w[sw[i]].clone())).collect();
    Ok((cost, triples))
}

/// Graphs on `v1..vn` for `2 <= n <= max_vertices` with `a = v1`, `b = vn` joined
/// by a path, one per class under relabelling of the middle vertices.
pub fn graph_space(max_vertices: usize) -> Vec<GraphInstance> {
    let mut out = Vec::new();
    for n in 2..=max_vertices {
        let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        // relabellings fixing v1 and vn
        let mut perms = Vec::new();
        let mut mid: Vec<usize> = (1..n - 1).collect();
        loop {
            let mut p = vec![0];
            p.extend(&mid);
            p.push(n - 1);
            perms.push(p);
            if !next_permutation(&mut mid) {
                break;
            }
        }
        for mask in 0u64..(1 << pairs.len()) {
            let canonical = perms.iter().all(|p| {
                let mut image = 0u64;
                for (k, &(x, y)) in pairs.iter().enumerate() {
                    if mask & (1 << k) != 0 {
                        let (u, v) = (p[x].min(p[y]), p[x].max(p[y]));
                        image |= 1 << index[&(u, v)];
                    }
                }
                image >= mask
            });
            if !canonical {
                continue;
            }
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &(x, y))| (names[x].clone(), names[y].clone()))
                .collect();
            let gi = GraphInstance::new(names.clone(), edges, names[0].clone(), names[n - 1].clone())
                .expect("generated graphs are simple");
            if gi.connects_a_b() {
                out.push(gi);
            }
        }
    }
    out
}

/// Seeded random networks with 2-6 buses and at most 8 lines.
///
/// Each network is, with probability 1/2, generator/load disjoint with finite
/// maximum demands, so the MSF-to-OTS identity applies to it.
pub fn random_networks(seed: u64, count: usize) -> Vec<Network> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = [ExtRational::int(1), ExtRational::int(2), ExtRational::int(3), ExtRational::ratio(1, 2)];
    let bounds = [ExtRational::int(0), ExtRational::int(1), ExtRational::int(2), ExtRational::Infinity];
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=6);
            let disjoint = rng.gen_bool(0.5);
            let buses = (0..n)
                .map(|i| {
                    let mut bus = Bus::new(format!("b{i}")).cost(ExtRational::int(rng.gen_range(0..=2)));
                    let role = rng.gen_range(0..3);
                    if !disjoint || role == 0 {
                        bus.pgmax = bounds.choose(&mut rng).expect("nonempty").clone();
                    }
                    if !disjoint || role == 1 {
                        let cap = if disjoint { 3 } else { 4 };
                        let plmax = bounds[rng.gen_range(0..cap)].clone();
                        let plmin = bounds[rng.gen_range(0..3)].clone();
                        bus.plmin = ExtRational::min_of(&plmin, &plmax);
                        bus.plmax = plmax;
                    }
                    bus
                })
                .collect();
            let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            pairs.shuffle(&mut rng);
            let m = rng.gen_range(0..=pairs.len().min(8));
            let lines = pairs[..m]
                .iter()
                .map(|&(a, b)| {
                    let cap = values.choose(&mut rng).expect("nonempty").clone();
                    let sus = values.choose(&mut rng).expect("nonempty").clone();
                    Line::new(format!("b{a}-b{b}"), format!("b{a}"), format!("b{b}"), cap, sus)
                })
                .collect();
            Network::new(buses, lines).expect("sampled networks are well formed")
        })
        .collect()
}

/// Harness settings shared by all verification runs.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub mode: BuildMode,
    pub search: SearchOptions,
    /// Worker threads for instance-level parallelism.
    pub jobs: usize,
    /// Also check MPF <= MSF <= upper bound and witness validity per instance.
    pub invariants: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { mode: BuildMode::Repaired, search: SearchOptions::default(), jobs: 1, invariants: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub mpf: Option<ExtRational>,
    pub msf: Option<ExtRational>,
    pub upper_bound: ExtRational,
    pub ordered: bool,
    pub witnesses_valid: bool,
}

impl InvariantCheck {
    pub fn holds(&self) -> bool {
        self.ordered && self.witnesses_valid
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub reason: String,
    pub solver_witness: Option<OperatingPoint>,
    pub oracle_witness: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub instance: String,
    pub solver: String,
    pub oracle: String,
    pub matches: bool,
    pub mismatch: Option<Mismatch>,
    pub invariants: Option<InvariantCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: String,
    pub mode: BuildMode,
    pub instances: Vec<InstanceOutcome>,
    pub all_match: bool,
    /// Summary lines, such as an empirically determined constant.
    pub notes: Vec<String>,
}

impl VerificationReport {
    fn new(theorem: &str, mode: BuildMode, instances: Vec<InstanceOutcome>, notes: Vec<String>) -> Self {
        let all_match = instances.iter().all(|i| i.matches);
        VerificationReport { theorem: theorem.to_string(), mode, instances, all_match, notes }
    }

    pub fn invariants_hold(&self) -> bool {
        self.instances.iter().filter_map(|i| i.invariants.as_ref()).all(InvariantCheck::holds)
    }
}

fn status_text(r: &SolveResult) -> String {
    match (&r.status, &r.value) {
        (_, Some(v)) => v.to_string(),
        (Status::Feasible, None) => "feasible".into(),
        (Status::Infeasible, _) => "infeasible".into(),
        (s, None) => format!("{s:?}").to_lowercase(),
    }
}

fn witness_ok(net: &Network, r: &SolveResult) -> bool {
    r.witness.as_ref().is_none_or(|w| check_feasible(net, w).is_ok_and(|rep| rep.is_valid()))
}

/// MPF <= MSF <= upper bound, and every witness produced is feasible.
pub fn solver_invariants(net: &Network, search: &SearchOptions) -> Result<InvariantCheck, SolveError> {
    let msf = solve_msf(net, search)?;
    invariants_with(net, &msf)
}

fn invariants_with(net: &Network, msf: &SolveResult) -> Result<InvariantCheck, SolveError> {
    let mpf = solve_mpf(net)?;
    let upper_bound = upper_bound_msf(net);
    let ordered = match (&mpf.value, &msf.value) {
        (Some(p), Some(s)) => p <= s && *s <= upper_bound,
        (None, Some(s)) => *s <= upper_bound,
        (None, None) => true,
        (Some(_), None) => false,
    };
    Ok(InvariantCheck {
        witnesses_valid: witness_ok(net, &mpf) && witness_ok(net, msf),
        mpf: mpf.value,
        msf: msf.value.clone(),
        upper_bound,
        ordered,
    })
}

fn parallel_map<T: Sync, R: Send>(
    jobs: usize,
    items: &[T],
    f: impl Fn(&T) -> Result<R, VerifyError> + Sync + Send,
) -> Result<Vec<R>, VerifyError> {
    if jobs > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(|| items.par_iter().map(&f).collect());
        }
    }
    items.iter().map(f).collect()
}

fn invariants_for(net: &Network, opts: &VerifyOptions) -> Result<Option<InvariantCheck>, VerifyError> {
    Ok(if opts.invariants { Some(solver_invariants(net, &opts.search)?) } else { None })
}

/// As [`invariants_for`], reusing an MSF result already computed on `net`.
fn invariants_given(net: &Network, msf: &SolveResult, opts: &VerifyOptions) -> Result<Option<InvariantCheck>, VerifyError> {
    Ok(if opts.invariants { Some(invariants_with(net, msf)?) } else { None })
}

fn outcome(
    instance: String,
    solver: String,
    oracle: String,
    matches: bool,
    mismatch: impl FnOnce() -> Mismatch,
    invariants: Option<InvariantCheck>,
) -> InstanceOutcome {
    let mismatch = (!matches).then(mismatch);
    InstanceOutcome { instance, solver, oracle, matches, mismatch, invariants }
}

fn rational_set(values: &BTreeSet<ExtRational>) -> String {
    let parts: Vec<String> = values.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

fn all_subsets(net: &Network) -> Vec<SwitchSet> {
    let ids: Vec<&String> = net.switchable_lines().map(|l| &l.id).collect();
    (0u32..1 << ids.len())
        .map(|mask| ids.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, id)| (*id).clone()).collect())
        .collect()
}

fn sch_point(x: &Rational, switched: &[&str], pgen_g: Rational, pgen_v: Rational) -> OperatingPoint {
    let zero = Rational::from_integer(0.into());
    let three = Rational::from_integer(3.into());
    let two = Rational::from_integer(2.into());
    let mut op = OperatingPoint::default();
    for (bus, theta) in [("g", zero.clone()), ("v", x.clone()), ("l", &two * x)] {
        op.theta.insert(bus.into(), theta);
    }
    op.pgen = BTreeMap::from([("g".into(), pgen_g), ("v".into(), pgen_v), ("l".into(), zero.clone())]);
    op.pload = BTreeMap::from([("g".into(), zero.clone()), ("v".into(), zero), ("l".into(), &three * x)]);
    op.switched = switched.iter().map(|s| s.to_string()).collect();
    op
}

/// The switch network dichotomy: pgen(v) over the plus variant is exactly {0, x},
/// and the minus variant never lets v consume power.
pub fn verify_sch(xs: &[Rational], opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let results = parallel_map(opts.jobs, xs, |x| {
        let plus = build_sch(x, SchMode::Plus, opts.mode)?.network;
        let minus = build_sch(x, SchMode::Minus, opts.mode)?.network;
        let mut extremes = BTreeSet::new();
        let mut interior = Vec::new();
        for sw in all_subsets(&plus) {
            if let Some((lo, hi)) = injection_range(&plus, &sw, "v", Injection::Generation)? {
                if lo != hi {
                    interior.push(format!("{sw}: pgen(v) ranges over [{lo}, {hi}]"));
                }
                extremes.insert(lo);
                extremes.insert(hi);
            }
        }
        let mut minus_max: Option<ExtRational> = None;
        for sw in all_subsets(&minus) {
            if let Some((_, hi)) = injection_range(&minus, &sw, "v", Injection::Load)? {
                minus_max = Some(minus_max.map_or(hi.clone(), |m| ExtRational::max_of(&m, &hi)));
            }
        }
        let zero = Rational::from_integer(0.into());
        let two = Rational::from_integer(2.into());
        let three = Rational::from_integer(3.into());
        let (branch, exhibited) = match opts.mode {
            BuildMode::Repaired => ("g-v", sch_point(x, &["g-v"], &two * x, x.clone())),
            BuildMode::Literal => ("g-l", sch_point(x, &["g-l"], &two * x, x.clone())),
        };
        let idle = sch_point(x, &[], &three * x, zero.clone());
        let mut failed = Vec::new();
        for (name, op) in [("no switching, pgen(v) = 0", &idle), ("switching {branch}, pgen(v) = x", &exhibited)] {
            let report = check_feasible(&plus, op).map_err(|e| VerifyError::Solve(e.into()))?;
            if !report.is_valid() {
                let issues: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
                failed.push(format!("{}: {}", name.replace("{branch}", branch), issues.join("; ")));
            }
        }

        let expected: BTreeSet<ExtRational> = [ExtRational::zero(), ExtRational::Finite(x.clone())].into();
        let minus_zero = minus_max.as_ref().is_none_or(ExtRational::is_zero);
        let matches = extremes == expected && interior.is_empty() && minus_zero && failed.is_empty();
        let solver = format!(
            "pgen(v) extremes {}; max pload(v) in minus variant {}",
            rational_set(&extremes),
            minus_max.map_or("infeasible".into(), |m| m.to_string())
        );
        let oracle = format!("pgen(v) in {}; max pload(v) 0", rational_set(&expected));
        let mismatch = || {
            let mut reasons = interior.clone();
            reasons.extend(failed.iter().cloned());
            if extremes != expected {
                reasons.push(format!("pgen(v) extremes {} differ from {}", rational_set(&extremes), rational_set(&expected)));
            }
            if !minus_zero {
                reasons.push("the minus variant lets v consume power".into());
            }
            Mismatch { reason: reasons.join(" | "), solver_witness: Some(exhibited.clone()), oracle_witness: oracle.clone() }
        };
        let invariants = invariants_for(&plus, opts)?;
        Ok(outcome(format!("x = {x}"), solver, oracle.clone(), matches, mismatch, invariants))
    })?;
    Ok(VerificationReport::new("switch network dichotomy", opts.mode, results, Vec::new()))
}

/// Subset-sum instances with `M` a subset of `{1..max_elem}`, `1 <= |M| <= max_card`,
/// and `1 <= w <= max_target`.
pub fn subset_sum_space(max_elem: u64, max_card: usize, max_target: u64) -> Vec<SubsetSumInstance> {
    let mut out = Vec::new();
    for mask in 1u64..(1 << max_elem) {
        let set: Vec<u64> = (1..=max_elem).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        if set.len() > max_card {
            continue;
        }
        for w in 1..=max_target {
            out.push(SubsetSumInstance { set: set.clone(), target: w });
        }
    }
    out
}

fn ssi_text(ssi: &SubsetSumInstance) -> String {
    let parts: Vec<String> = ssi.set.iter().map(ToString::to_string).collect();
    format!("M = {{{}}}, w = {}", parts.join(","), ssi.target)
}

fn subset_text(v: &Option<Vec<u64>>) -> String {
    match v {
        Some(v) => format!("solvable, V = {{{}}}", v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")),
        None => "unsolvable".into(),
    }
}

/// Cactus feasibility against the subset-sum oracle.
pub fn verify_cacti(space: &[SubsetSumInstance], opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let results = parallel_map(opts.jobs, space, |ssi| {
        let net = build_cactus(ssi, opts.mode)?.network;
        let r = solve_feas(&net, &opts.search)?;
        let oracle = subset_sum_solvable(ssi);
        let matches = r.is_feasible() == oracle.is_some() && witness_ok(&net, &r);
        let oracle_text = subset_text(&oracle);
        Ok(outcome(
            ssi_text(ssi),
            status_text(&r),
            oracle_text.clone(),
            matches,
            || Mismatch {
                reason: "feasibility disagrees with subset sum".into(),
                solver_witness: r.witness.clone(),
                oracle_witness: oracle_text,
            },
            invariants_for(&net, opts)?,
        ))
    })?;
    Ok(VerificationReport::new("cactus reduction", opts.mode, results, Vec::new()))
}

/// Tree MSF reaches `m + 2 + w` exactly on the solvable instances.
pub fn verify_tree(space: &[SubsetSumInstance], opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let results = parallel_map(opts.jobs, space, |ssi| {
        let report = build_two_level_tree(ssi, opts.mode)?;
        let net = &report.network;
        let claim = ExtRational::Finite(Rational::from_integer(BigInt::from(tree_claim(ssi))));
        let r = solve_msf(net, &opts.search)?;
        let oracle = subset_sum_solvable(ssi);
        let structure = report
            .annotation
            .as_ref()
            .map(|a| crate::graphcheck::validate_two_level_tree(net, a))
            .transpose()
            .ok()
            .flatten()
            .is_some_and(|v| v.holds);
        let reaches = r.value.as_ref() == Some(&claim);
        let bounded = r.value.as_ref().is_none_or(|v| *v <= claim);
        let matches = reaches == oracle.is_some() && bounded && structure && witness_ok(net, &r);
        let oracle_text = format!("{}; claim m+2+w = {claim}", subset_text(&oracle));
        Ok(outcome(
            ssi_text(ssi),
            format!("msf = {}; 2-level tree: {}", status_text(&r), if structure { "yes" } else { "no" }),
            oracle_text.clone(),
            matches,
            || Mismatch {
                reason: if structure {
                    "MSF does not reach the claim exactly on solvable instances".into()
                } else {
                    "network fails the 2-level tree check".into()
                },
                solver_witness: r.witness.clone(),
                oracle_witness: oracle_text,
            },
            invariants_given(net, &r, opts)?,
        ))
    })?;
    Ok(VerificationReport::new("two-level tree reduction", opts.mode, results, Vec::new()))
}

fn graph_text(gi: &GraphInstance) -> String {
    let edges: Vec<String> = gi.edges.iter().map(|(x, y)| format!("{x}{y}")).collect();
    format!("n = {}, a = {}, b = {}, E = {{{}}}", gi.vertices.len(), gi.a, gi.b, edges.join(","))
}

/// MSF of the longest-path gadget minus the longest path length is one constant.
pub fn verify_longest_path(space: &[GraphInstance], opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let solved = parallel_map(opts.jobs, space, |gi| {
        let net = build_longest_path(gi, opts.mode)?.network;
        let r = solve_msf(&net, &opts.search)?;
        let (t, path) = longest_path(gi)?;
        let offset = r.value.as_ref().and_then(|v| v.finite()).map(|v| v - Rational::from_integer(BigInt::from(t)));
        let valid = witness_ok(&net, &r);
        let inv = invariants_given(&net, &r, opts)?;
        Ok((r, t, path, offset, inv, valid))
    })?;
    let mut counts: BTreeMap<Rational, usize> = BTreeMap::new();
    for (_, _, _, offset, _, _) in &solved {
        if let Some(c) = offset {
            *counts.entry(c.clone()).or_default() += 1;
        }
    }
    // the constant is the offset shared by the most instances (ties: smallest)
    let constant = counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(c, _)| c.clone());
    let mut notes = Vec::new();
    match &constant {
        Some(c) => {
            notes.push(format!("empirical law: MSF = t_G + c with c = {}", crate::rational::format_rational(c)));
            let three = Rational::from_integer(3.into());
            notes.push(format!("claimed constant c = 3 holds: {}", if *c == three { "yes" } else { "no" }));
            if counts.len() > 1 {
                notes.push(format!("offsets observed: {}", counts.len()));
            }
        }
        None => notes.push("no instance produced a finite MSF".into()),
    }
    let instances = space
        .iter()
        .zip(solved)
        .map(|(gi, (r, t, path, offset, inv, valid))| {
            let matches = offset.is_some() && offset == constant && valid;
            let oracle = format!("t_G = {t} via {}", path.join("-"));
            outcome(
                graph_text(gi),
                format!("msf = {}", status_text(&r)),
                oracle.clone(),
                matches,
                || Mismatch {
                    reason: "MSF - t_G differs from the common constant".into(),
                    solver_witness: r.witness.clone(),
                    oracle_witness: oracle,
                },
                inv,
            )
        })
        .collect();
    Ok(VerificationReport::new("longest path law", opts.mode, instances, notes))
}

/// MSF of the Hamiltonian gadget is 2 exactly when an `a`-`b` Hamiltonian path exists.
pub fn verify_hamiltonian(space: &[GraphInstance], opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let two = ExtRational::int(2);
    let results = parallel_map(opts.jobs, space, |gi| {
        let net = build_hamiltonian(gi, opts.mode)?.network;
        let r = solve_msf(&net, &opts.search)?;
        let (t, path) = longest_path(gi)?;
        let ham = t + 1 == gi.vertices.len();
        let bounded = r.value.as_ref().is_none_or(|v| *v <= two);
        let matches = (r.value.as_ref() == Some(&two)) == ham && bounded && witness_ok(&net, &r);
        let oracle = if ham { format!("hamiltonian via {}", path.join("-")) } else { format!("not hamiltonian (t_G = {t})") };
        Ok(outcome(
            graph_text(gi),
            format!("msf = {}", status_text(&r)),
            oracle.clone(),
            matches,
            || Mismatch {
                reason: "MSF = 2 does not coincide with a Hamiltonian path".into(),
                solver_witness: r.witness.clone(),
                oracle_witness: oracle,
            },
            invariants_given(&net, &r, opts)?,
        ))
    })?;
    Ok(VerificationReport::new("hamiltonian path gadget", opts.mode, results, Vec::new()))
}

/// The operating point that realises assignment `a` on the M3DA gadget.
pub fn m3da_point(mi: &M3daInstance, net: &Network, assignment: &[Triple]) -> OperatingPoint {
    let int = |v: i64| Rational::from_integer(v.into());
    let chosen: BTreeSet<&Triple> = assignment.iter().collect();
    let mut op = OperatingPoint::zero(net);
    op.theta.insert("l".into(), int(5));
    for r in mi.x.iter().chain(&mi.y).chain(&mi.w) {
        op.theta.insert(r.clone(), int(4));
    }
    for t in mi.d.keys() {
        let (tb, tg, td) = m3da_bus_ids(t);
        let used = chosen.contains(t);
        op.theta.insert(tb.clone(), int(0));
        op.theta.insert(tg.clone(), int(-5));
        // an unused distributor sits at the angle of its symbols and carries nothing
        op.theta.insert(td.clone(), int(if used { 3 } else { 4 }));
        op.pgen.insert(tg, int(5));
        if used {
            op.pgen.insert(tb, int(3));
        } else {
            op.switched.insert(format!("{tb}-{td}"));
        }
    }
    let demand = net.bus("l").and_then(|b| b.plmax.finite().cloned()).unwrap_or_else(|| int(0));
    op.pload.insert("l".into(), demand);
    op
}

fn m3da_text(mi: &M3daInstance) -> String {
    let costs: Vec<String> = mi.d.iter().map(|(t, c)| format!("d({}) = {c}", M3daInstance::triple_id(t))).collect();
    format!("{0}x{0}x{0}: {1}", mi.x.len(), costs.join(", "))
}

/// OTS of the assignment gadget equals the minimum assignment cost, and the
/// operating point built from an optimal assignment is feasible.
pub fn verify_m3da(space: &[M3daInstance], opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let results = parallel_map(opts.jobs, space, |mi| {
        let net = build_m3da(mi, opts.mode)?.network;
        let r = solve_ots(&net, &opts.search)?;
        let (cost, assignment) = m3da_min(mi)?;
        let point = m3da_point(mi, &net, &assignment);
        let report = check_feasible(&net, &point).map_err(|e| VerifyError::Solve(e.into()))?;
        let expected = ExtRational::Finite(Rational::from_integer(BigInt::from(cost)));
        let same = r.value.as_ref() == Some(&expected);
        let matches = same && report.is_valid() && witness_ok(&net, &r);
        let triples: Vec<String> = assignment.iter().map(|t| format!("({})", M3daInstance::triple_id(t))).collect();
        let oracle = format!("{cost} via {}", triples.join(" "));
        let mut reasons = Vec::new();
        if !same {
            reasons.push("OTS differs from the minimum assignment cost".to_string());
        }
        if !report.is_valid() {
            let issues: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
            reasons.push(format!("operating point built from the assignment is infeasible: {}", issues.join("; ")));
        }
        Ok(outcome(
            m3da_text(mi),
            format!("ots = {}", status_text(&r)),
            oracle.clone(),
            matches,
            || Mismatch { reason: reasons.join(" | "), solver_witness: Some(point.clone()), oracle_witness: oracle },
            invariants_for(&net, opts)?,
        ))
    })?;
    Ok(VerificationReport::new("assignment reduction", opts.mode, results, Vec::new()))
}

fn is_disjoint_finite(net: &Network) -> bool {
    net.buses().iter().all(|b| !(b.is_generator() && b.is_load()) && b.plmax.is_finite())
}

fn net_text(i: usize, net: &Network) -> String {
    format!("net {i}: {} buses, {} lines", net.buses().len(), net.lines().len())
}

/// `sum plmax - MSF(N) = OTS(msf_to_ots(N))` on generator/load disjoint networks.
pub fn verify_mots(nets: &[Network], opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let indexed: Vec<(usize, &Network)> = nets.iter().enumerate().filter(|(_, n)| is_disjoint_finite(n)).collect();
    let results = parallel_map(opts.jobs, &indexed, |&(i, net)| {
        let msf = solve_msf(net, &opts.search)?;
        let transformed = msf_to_ots(net)?.network;
        let ots = solve_ots(&transformed, &opts.search)?;
        let total: Rational =
            net.buses().iter().map(|b| b.plmax.finite().cloned().expect("finite by filter")).sum();
        let lhs = msf.value.as_ref().and_then(|v| v.finite()).map(|v| &total - v);
        let rhs = ots.value.as_ref().and_then(|v| v.finite()).cloned();
        let matches = lhs == rhs && witness_ok(net, &msf) && witness_ok(&transformed, &ots);
        let show = |v: &Option<Rational>| v.as_ref().map_or("infeasible".into(), crate::rational::format_rational);
        let oracle = format!("ots(transformed) = {}", show(&rhs));
        Ok(outcome(
            net_text(i, net),
            format!("sum plmax - msf = {}", show(&lhs)),
            oracle.clone(),
            matches,
            || Mismatch {
                reason: "unserved load differs from the transformed OTS".into(),
                solver_witness: msf.witness.clone(),
                oracle_witness: format!("{oracle}; witness {:?}", ots.witness.as_ref().map(|w| w.switched.to_string())),
            },
            invariants_given(net, &msf, opts)?,
        ))
    })?;
    let skipped = nets.len() - indexed.len();
    let notes = vec![format!("{} of {} networks are generator/load disjoint with finite demand; {skipped} skipped", indexed.len(), nets.len())];
    Ok(VerificationReport::new("unserved load equals transformed OTS", opts.mode, results, notes))
}

/// `MSF >= sum plmin` exactly when some switching is feasible.
pub fn verify_feas_msf(nets: &[Network], opts: &VerifyOptions) -> Result<VerificationReport, VerifyError> {
    let indexed: Vec<(usize, &Network)> = nets.iter().enumerate().collect();
    let results = parallel_map(opts.jobs, &indexed, |&(i, net)| {
        let msf = solve_msf(net, &opts.search)?;
        let feas = solve_feas(net, &opts.search)?;
        let floor = ExtRational::Finite(net.buses().iter().map(|b| b.plmin.finite().cloned().expect("finite")).sum());
        let covers = msf.value.as_ref().is_some_and(|v| *v >= floor);
        let matches = covers == feas.is_feasible() && witness_ok(net, &msf) && witness_ok(net, &feas);
        let oracle = format!("feasibility search: {}", status_text(&feas));
        Ok(outcome(
            net_text(i, net),
            format!("msf = {} against sum plmin = {floor}", status_text(&msf)),
            oracle.clone(),
            matches,
            || Mismatch {
                reason: "MSF covering the minimum demand disagrees with feasibility".into(),
                solver_witness: msf.witness.clone(),
                oracle_witness: oracle,
            },
            invariants_given(net, &msf, opts)?,
        ))
    })?;
    Ok(VerificationReport::new("feasibility equals covering the minimum demand", opts.mode, results, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ssi(set: &[u64], w: u64) -> SubsetSumInstance {
        SubsetSumInstance::new(set.to_vec(), w).unwrap()
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> GraphInstance {
        let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let e = edges.iter().map(|&(x, y)| (names[x - 1].clone(), names[y - 1].clone())).collect();
        GraphInstance::new(names.clone(), e, names[0].clone(), names[n - 1].clone()).unwrap()
    }

    #[test]
    fn subset_sum_examples() {
        assert_eq!(subset_sum_solvable(&ssi(&[1, 2, 3], 5)), Some(vec![2, 3]));
        assert_eq!(subset_sum_solvable(&ssi(&[2], 1)), None);
        assert_eq!(subset_sum_solvable(&ssi(&[4], 4)), Some(vec![4]));
    }

    #[test]
    fn longest_path_examples() {
        assert_eq!(longest_path(&graph(2, &[(1, 2)])).unwrap().0, 1);
        // triangle with a = v1, b = v3
        assert_eq!(longest_path(&graph(3, &[(1, 2), (2, 3), (1, 3)])).unwrap(), (2, vec!["v1".into(), "v2".into(), "v3".into()]));
        // 4-cycle a x b y: a and b opposite
        assert_eq!(longest_path(&graph(4, &[(1, 2), (2, 4), (4, 3), (3, 1)])).unwrap().0, 2);
        // 4-cycle a x y b: a and b adjacent
        assert_eq!(longest_path(&graph(4, &[(1, 2), (2, 3), (3, 4), (4, 1)])).unwrap().0, 3);
        assert!(matches!(longest_path(&graph(3, &[(1, 2)])), Err(OracleError::Disconnected(..))));
    }

    #[test]
    fn hamiltonian_examples() {
        assert!(ham_path_exists(&graph(2, &[(1, 2)])).unwrap());
        // star centred at a = v1 with leaves v2, b = v3
        assert!(!ham_path_exists(&graph(3, &[(1, 2), (1, 3)])).unwrap());
        // 4-cycle where a = v1 and b = v4 are adjacent
        assert!(ham_path_exists(&graph(4, &[(1, 2), (2, 3), (3, 4), (4, 1)])).unwrap());
    }

    #[test]
    fn m3da_examples() {
        assert_eq!(m3da_min(&M3daInstance::uniform(1, |_, _, _| 7)).unwrap().0, 7);
        assert_eq!(m3da_min(&M3daInstance::uniform(2, |_, _, _| 0)).unwrap().0, 0);
        // cost(i, j, k) = 1 unless the triple is "diagonal"; each of the 4
        // assignments pairs x1 with (y_j, w_k) and x2 with the complement
        let mi = M3daInstance::uniform(2, |i, j, k| if j == i && k == (i + 1) % 2 { 0 } else { 5 + (i + j + k) as u64 });
        let (cost, a) = m3da_min(&mi).unwrap();
        assert_eq!(cost, 0);
        assert_eq!(a[0], ("x1".into(), "y1".into(), "w2".into()));
        assert!(matches!(m3da_min(&M3daInstance::uniform(5, |_, _, _| 1)), Err(OracleError::TooLarge(5))));
    }

    #[test]
    fn graph_space_is_deduplicated() {
        let space = graph_space(3);
        // n = 2: {v1v2}; n = 3: every a-b connected edge set on three vertices
        assert_eq!(space.iter().filter(|g| g.vertices.len() == 2).count(), 1);
        assert_eq!(space.iter().filter(|g| g.vertices.len() == 3).count(), 5);
        let four = graph_space(4).into_iter().filter(|g| g.vertices.len() == 4).count();
        assert!(four < 48, "relabelling v2 <-> v3 must merge classes");
    }

    #[test]
    fn sampler_is_deterministic() {
        assert_eq!(random_networks(42, 20), random_networks(42, 20));
        assert_ne!(random_networks(42, 5), random_networks(43, 5));
        let nets = random_networks(42, 20);
        assert!(nets.iter().all(|n| (2..=6).contains(&n.buses().len()) && n.lines().len() <= 8));
        assert!(nets.iter().any(is_disjoint_finite));
    }
}
