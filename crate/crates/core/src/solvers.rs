//! Fixed-topology LPs and the search over switch sets.
//!
//! For a fixed set of switched-off lines the LDC constraints are linear, so each
//! topology is one exact LP. Optimizing over topologies is a depth-first
//! branch-and-bound over the switchable lines. At every node the lines are
//! split into decided-on, decided-off and undecided; the relaxation keeps Ohm's
//! law on decided-on lines, drops undecided lines to plain capacity-bounded
//! transport arcs and removes decided-off lines. Every topology in the subtree is
//! feasible for that relaxation, so its optimum bounds the subtree.
//!
//! Results are canonical: among all optimal switch sets the one reported is the
//! smallest by size and then by sorted line ids, which is exactly the first
//! optimum met by enumerating subsets in that order (see [`Strategy::Exhaustive`]).

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphcheck::bridges;
use crate::lp::{solve_lp, LinearProgram, LpError, LpOutcome, Relation, Sense, VarId};
use crate::network::{ModelError, Network, OperatingPoint, SwitchSet};
use crate::rational::{ExtRational, Rational};

pub const DEFAULT_CAP: usize = 25;

/// Decided levels of the search tree that are expanded before work is handed out
/// to parallel workers. Fixed so that results never depend on the worker count.
const SPLIT_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("{switchable} switchable lines exceed the enumeration cap of {cap}")]
    CapExceeded { switchable: usize, cap: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Feasibility,
    MaxLoad,
    MinCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    BranchAndBound,
    /// Every subset in canonical order. Kept as an independent cross-check.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub cap: usize,
    pub strategy: Strategy,
    pub jobs: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { cap: DEFAULT_CAP, strategy: Strategy::BranchAndBound, jobs: 1 }
    }
}

impl SearchOptions {
    pub fn exhaustive() -> Self {
        SearchOptions { strategy: Strategy::Exhaustive, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Feasible,
    Optimal,
    Infeasible,
    /// Load can grow without bound (only possible with infinite bounds).
    Unbounded,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Complete switch sets whose LP was solved.
    pub subsets_explored: u64,
    pub lps_solved: u64,
    /// Complete switch sets ruled out without solving their LP.
    pub subsets_pruned: u64,
}

impl SearchStats {
    fn add(&mut self, other: &SearchStats) {
        self.subsets_explored += other.subsets_explored;
        self.lps_solved += other.lps_solved;
        self.subsets_pruned += other.subsets_pruned;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub objective: Objective,
    pub status: Status,
    /// Total load (MPF/MSF) or total cost (OTS); `inf` when unbounded.
    pub value: Option<ExtRational>,
    pub witness: Option<OperatingPoint>,
    pub stats: SearchStats,
}

impl SolveResult {
    pub fn is_feasible(&self) -> bool {
        !matches!(self.status, Status::Infeasible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineState {
    On,
    Off,
    /// Undecided: modelled as a transport arc with capacity only.
    Free,
}

/// The LP of one fixed topology, with the variable layout needed to read an
/// operating point back out of an assignment.
#[derive(Debug, Clone)]
pub struct TopologyLp {
    pub lp: LinearProgram,
    pub switched: SwitchSet,
    theta: Vec<VarId>,
    pgen: Vec<Option<VarId>>,
    pload: Vec<Option<VarId>>,
}

impl TopologyLp {
    pub fn theta_var(&self, bus: usize) -> VarId {
        self.theta[bus]
    }

    pub fn pgen_var(&self, bus: usize) -> Option<VarId> {
        self.pgen[bus]
    }

    pub fn pload_var(&self, bus: usize) -> Option<VarId> {
        self.pload[bus]
    }

    pub fn operating_point(&self, net: &Network, x: &[Rational]) -> OperatingPoint {
        let read = |v: Option<VarId>| v.map_or_else(Rational::zero, |v| x[v.0].clone());
        let mut op = OperatingPoint { switched: self.switched.clone(), ..Default::default() };
        for (i, bus) in net.buses().iter().enumerate() {
            op.theta.insert(bus.id.clone(), x[self.theta[i].0].clone());
            op.pgen.insert(bus.id.clone(), read(self.pgen[i]));
            op.pload.insert(bus.id.clone(), read(self.pload[i]));
        }
        op
    }
}

fn finite_or_none(v: &ExtRational) -> Option<Rational> {
    v.finite().cloned()
}

fn build_lp(net: &Network, states: &[LineState], objective: Objective) -> TopologyLp {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let n = net.buses().len();
    let not_ohmic: Vec<bool> = states.iter().map(|s| *s != LineState::On).collect();
    let mut anchored = vec![false; n];
    for comp in net.components_by_mask(&not_ohmic) {
        anchored[comp[0]] = true;
    }
    let add = |lp: &mut LinearProgram, name: String, lo: Option<Rational>, hi: Option<Rational>| {
        lp.add_variable(name, lo, hi).expect("generated names are unique and bounds ordered")
    };
    let mut theta = Vec::with_capacity(n);
    let mut pgen = Vec::with_capacity(n);
    let mut pload = Vec::with_capacity(n);
    for (i, bus) in net.buses().iter().enumerate() {
        let fixed = anchored[i].then(Rational::zero);
        theta.push(add(&mut lp, format!("theta[{}]", bus.id), fixed.clone(), fixed));
        pgen.push(
            bus.pgmax
                .is_positive()
                .then(|| add(&mut lp, format!("pgen[{}]", bus.id), Some(Rational::zero()), finite_or_none(&bus.pgmax))),
        );
        pload.push(bus.plmax.is_positive().then(|| {
            add(&mut lp, format!("pload[{}]", bus.id), finite_or_none(&bus.plmin), finite_or_none(&bus.plmax))
        }));
    }

    // balance[b] collects the flow leaving b minus pgen plus pload; must be 0
    let mut balance: Vec<Vec<(VarId, Rational)>> = vec![Vec::new(); n];
    for (i, line) in net.lines().iter().enumerate() {
        let (a, b) = net.ends(i);
        match states[i] {
            LineState::Off => {}
            LineState::On => {
                let s = line.susceptance_value().clone();
                let flow = vec![(theta[b], s.clone()), (theta[a], -s.clone())];
                if let ExtRational::Finite(c) = &line.capacity {
                    lp.add_constraint(flow.clone(), Relation::Le, c.clone());
                    lp.add_constraint(flow.clone(), Relation::Ge, -c.clone());
                }
                balance[a].extend(flow.iter().cloned());
                balance[b].extend(flow.into_iter().map(|(v, k)| (v, -k)));
            }
            LineState::Free => {
                let cap = finite_or_none(&line.capacity);
                let f = add(&mut lp, format!("flow[{}]", line.id), cap.clone().map(|c| -c), cap);
                balance[a].push((f, Rational::one()));
                balance[b].push((f, -Rational::one()));
            }
        }
    }
    for (i, mut row) in balance.into_iter().enumerate() {
        if let Some(g) = pgen[i] {
            row.push((g, -Rational::one()));
        }
        if let Some(l) = pload[i] {
            row.push((l, Rational::one()));
        }
        lp.add_constraint(combine(row), Relation::Eq, ExtRational::zero());
    }

    match objective {
        Objective::Feasibility => {}
        Objective::MaxLoad => {
            lp.set_objective(Sense::Maximize, pload.iter().flatten().map(|&v| (v, Rational::one())).collect())
        }
        Objective::MinCost => lp.set_objective(
            Sense::Minimize,
            net.buses()
                .iter()
                .zip(&pgen)
                .filter_map(|(bus, g)| {
                    let c = bus.cost.finite().expect("costs are finite");
                    g.filter(|_| !c.is_zero()).map(|g| (g, c.clone()))
                })
                .collect(),
        ),
    }
    let off: Vec<bool> = states.iter().map(|s| *s == LineState::Off).collect();
    TopologyLp { lp, switched: net.switch_set_from_mask(&off), theta, pgen, pload }
}

/// Sums coefficients of repeated variables and drops zeros, keeping first-seen order.
fn combine(terms: Vec<(VarId, Rational)>) -> Vec<(VarId, Rational)> {
    let mut out: Vec<(VarId, Rational)> = Vec::with_capacity(terms.len());
    for (v, k) in terms {
        match out.iter_mut().find(|(w, _)| *w == v) {
            Some((_, acc)) => *acc += k,
            None => out.push((v, k)),
        }
    }
    out.retain(|(_, k)| !k.is_zero());
    out
}

/// The LP whose feasible set is exactly the operating points with the given
/// switched-off lines. Angles of the smallest bus id of each active component
/// are fixed to 0.
pub fn build_fixed_topology_lp(
    net: &Network,
    switched: &SwitchSet,
    objective: Objective,
) -> Result<TopologyLp, SolveError> {
    let off = net.switch_mask(switched)?;
    for id in switched.iter() {
        if !net.line(id).expect("mask checked membership").switchable {
            return Err(ModelError::LineSwitched(id.clone()).into());
        }
    }
    let states: Vec<LineState> = off.iter().map(|&o| if o { LineState::Off } else { LineState::On }).collect();
    Ok(build_lp(net, &states, objective))
}

/// `min(sum pgmax, sum over loads of min(plmax, pgmax + incident capacity))`.
pub fn upper_bound_msf(net: &Network) -> ExtRational {
    upper_bound_active(net, &vec![false; net.lines().len()])
}

fn upper_bound_active(net: &Network, off: &[bool]) -> ExtRational {
    let supply = ExtRational::saturating_sum(net.buses().iter().map(|b| &b.pgmax));
    let mut reach: Vec<ExtRational> = net.buses().iter().map(|b| b.pgmax.clone()).collect();
    for (i, line) in net.lines().iter().enumerate() {
        if off[i] {
            continue;
        }
        let (a, b) = net.ends(i);
        for end in [a, b] {
            reach[end] = ExtRational::saturating_sum([&reach[end], &line.capacity]);
        }
    }
    let per_load: Vec<ExtRational> = net
        .buses()
        .iter()
        .zip(&reach)
        .filter(|(b, _)| b.is_load())
        .map(|(b, r)| ExtRational::min_of(&b.plmax, r))
        .collect();
    ExtRational::min_of(&supply, &ExtRational::saturating_sum(&per_load))
}

/// A solved complete topology.
#[derive(Debug, Clone)]
struct Leaf {
    /// Larger is better: load for MSF, minus cost for OTS, 0 for feasibility.
    score: ExtRational,
    unbounded: bool,
    witness: OperatingPoint,
}

impl Leaf {
    fn beats(&self, other: &Leaf) -> bool {
        self.score > other.score
            || (self.score == other.score && canonical_less(&self.witness.switched, &other.witness.switched))
    }
}

fn canonical_less(a: &SwitchSet, b: &SwitchSet) -> bool {
    (a.len(), a) < (b.len(), b)
}

fn score_of(objective: Objective, value: &Rational) -> ExtRational {
    match objective {
        Objective::Feasibility => ExtRational::zero(),
        Objective::MaxLoad => ExtRational::Finite(value.clone()),
        Objective::MinCost => ExtRational::Finite(-value.clone()),
    }
}

/// Bound from an LP over the relaxation or a complete topology.
enum Evaluation {
    Infeasible,
    Bound(ExtRational),
}

fn evaluate(
    net: &Network,
    states: &[LineState],
    objective: Objective,
    stats: &mut SearchStats,
) -> Result<(Evaluation, Option<Leaf>), SolveError> {
    let topo = build_lp(net, states, objective);
    stats.lps_solved += 1;
    let complete = !states.contains(&LineState::Free);
    Ok(match solve_lp(&topo.lp)? {
        LpOutcome::Infeasible => (Evaluation::Infeasible, None),
        LpOutcome::Optimal { value, assignment } => {
            let score = score_of(objective, &value);
            let leaf = complete.then(|| Leaf {
                score: score.clone(),
                unbounded: false,
                witness: topo.operating_point(net, &assignment),
            });
            (Evaluation::Bound(score), leaf)
        }
        LpOutcome::Unbounded { point, .. } => {
            let leaf = complete.then(|| Leaf {
                score: ExtRational::Infinity,
                unbounded: true,
                witness: topo.operating_point(net, &point),
            });
            (Evaluation::Bound(ExtRational::Infinity), leaf)
        }
    })
}

#[derive(Debug, Clone)]
struct Node {
    states: Vec<LineState>,
    /// Score of the natural completion (all undecided lines on), once solved.
    /// `Some(None)` records an infeasible completion.
    natural: Option<Option<ExtRational>>,
    depth: usize,
}

struct Search<'a> {
    net: &'a Network,
    objective: Objective,
    /// Switchable lines in branching order.
    order: Vec<usize>,
}

impl<'a> Search<'a> {
    fn free_count(&self, node: &Node) -> usize {
        node.states.iter().filter(|s| **s == LineState::Free).count()
    }

    fn off_set(&self, node: &Node) -> SwitchSet {
        let off: Vec<bool> = node.states.iter().map(|s| *s == LineState::Off).collect();
        self.net.switch_set_from_mask(&off)
    }

    /// Forces on every undecided line that is a bridge of the graph of lines not
    /// yet switched off. Switching such a line off never enlarges the feasible
    /// injections: with it on, one side can be shifted to carry zero flow.
    fn force_bridges(&self, node: &mut Node, stats: &mut SearchStats) {
        let idx: Vec<usize> = (0..node.states.len()).filter(|&i| node.states[i] != LineState::Off).collect();
        let edges: Vec<(usize, usize)> = idx.iter().map(|&i| self.net.ends(i)).collect();
        let flags = bridges(self.net.buses().len(), &edges);
        for (k, &i) in idx.iter().enumerate() {
            if flags[k] && node.states[i] == LineState::Free {
                let free = self.free_count(node);
                stats.subsets_pruned += 1u64 << (free - 1);
                node.states[i] = LineState::On;
            }
        }
    }

    fn natural_states(node: &Node) -> Vec<LineState> {
        node.states.iter().map(|s| if *s == LineState::Free { LineState::On } else { *s }).collect()
    }

    fn offer(best: &mut Option<Leaf>, leaf: Leaf) {
        if best.as_ref().is_none_or(|b| leaf.beats(b)) {
            *best = Some(leaf);
        }
    }

    /// Explores `node`. With `split = Some(frontier)`, nodes at [`SPLIT_DEPTH`]
    /// are collected untouched instead of expanded.
    fn explore(
        &self,
        mut node: Node,
        best: &mut Option<Leaf>,
        stats: &mut SearchStats,
        mut split: Option<&mut Vec<Node>>,
    ) -> Result<(), SolveError> {
        if let Some(frontier) = split.as_deref_mut() {
            if node.depth >= SPLIT_DEPTH {
                frontier.push(node);
                return Ok(());
            }
        }
        self.force_bridges(&mut node, stats);
        let free = self.free_count(&node);
        let subtree = 1u64 << free;
        let natural_done = node.natural.is_some();
        let unseen = if natural_done { subtree - 1 } else { subtree };

        if self.objective == Objective::MaxLoad {
            if let Some(b) = best.as_ref() {
                let off: Vec<bool> = node.states.iter().map(|s| *s == LineState::Off).collect();
                if upper_bound_active(self.net, &off) < b.score {
                    stats.subsets_pruned += unseen;
                    return Ok(());
                }
            }
        }

        let bound = if free == 0 {
            None
        } else {
            match evaluate(self.net, &node.states, self.objective, stats)?.0 {
                Evaluation::Infeasible => {
                    stats.subsets_pruned += unseen;
                    return Ok(());
                }
                Evaluation::Bound(b) => Some(b),
            }
        };
        let off = self.off_set(&node);

        if !natural_done {
            if let (Some(bound), Some(b)) = (&bound, best.as_ref()) {
                let inc = &b.witness.switched;
                let hopeless = *bound < b.score
                    || (*bound == b.score
                        && (off.len() > inc.len() || (off.len() == inc.len() && !canonical_less(&off, inc))));
                if hopeless {
                    stats.subsets_pruned += unseen;
                    return Ok(());
                }
            }
            let (eval, leaf) = evaluate(self.net, &Self::natural_states(&node), self.objective, stats)?;
            stats.subsets_explored += 1;
            node.natural = Some(match eval {
                Evaluation::Infeasible => None,
                Evaluation::Bound(s) => Some(s),
            });
            if let Some(leaf) = leaf {
                Self::offer(best, leaf);
            }
        }
        let Some(bound) = bound else { return Ok(()) };

        // Everything else in the subtree switches off at least one more line.
        let natural_attains = node.natural.as_ref().expect("set above").as_ref() == Some(&bound);
        let b = best.as_ref();
        let may_improve = b.is_none_or(|b| bound > b.score || (bound == b.score && off.len() < b.witness.switched.len()));
        if natural_attains || !may_improve {
            stats.subsets_pruned += subtree - 1;
            return Ok(());
        }

        let &line = self.order.iter().find(|&&i| node.states[i] == LineState::Free).expect("free > 0");
        let mut on = node.clone();
        on.states[line] = LineState::On;
        on.depth += 1;
        let mut off_child = node;
        off_child.states[line] = LineState::Off;
        off_child.natural = None;
        off_child.depth += 1;
        self.explore(on, best, stats, split.as_deref_mut())?;
        self.explore(off_child, best, stats, split)
    }

    fn run(&self, jobs: usize) -> Result<(Option<Leaf>, SearchStats), SolveError> {
        let root = Node {
            states: self
                .net
                .lines()
                .iter()
                .map(|l| if l.switchable { LineState::Free } else { LineState::On })
                .collect(),
            natural: None,
            depth: 0,
        };
        let mut best = None;
        let mut stats = SearchStats::default();
        let mut frontier = Vec::new();
        self.explore(root, &mut best, &mut stats, Some(&mut frontier))?;

        let seed = best.clone();
        let work = |node: Node| -> Result<(Option<Leaf>, SearchStats), SolveError> {
            let mut local = seed.clone();
            let mut st = SearchStats::default();
            self.explore(node, &mut local, &mut st, None)?;
            Ok((local, st))
        };
        let results: Vec<Result<(Option<Leaf>, SearchStats), SolveError>> = if jobs > 1 && frontier.len() > 1 {
            match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                Ok(pool) => pool.install(|| frontier.into_par_iter().map(work).collect()),
                Err(_) => frontier.into_iter().map(work).collect(),
            }
        } else {
            frontier.into_iter().map(work).collect()
        };
        for r in results {
            let (leaf, st) = r?;
            stats.add(&st);
            if let Some(leaf) = leaf {
                Self::offer(&mut best, leaf);
            }
        }
        Ok((best, stats))
    }
}

/// Canonical enumeration of all switch sets: by size, then lexicographically.
fn exhaustive(net: &Network, objective: Objective) -> Result<(Option<Leaf>, SearchStats), SolveError> {
    let mut ids: Vec<(String, usize)> =
        net.lines().iter().enumerate().filter(|(_, l)| l.switchable).map(|(i, l)| (l.id.clone(), i)).collect();
    ids.sort();
    let k = ids.len();
    let mut best: Option<Leaf> = None;
    let mut stats = SearchStats::default();
    for size in 0..=k {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let mut states = vec![LineState::On; net.lines().len()];
            for &c in &combo {
                states[ids[c].1] = LineState::Off;
            }
            let (_, leaf) = evaluate(net, &states, objective, &mut stats)?;
            stats.subsets_explored += 1;
            if let Some(leaf) = leaf {
                if best.as_ref().is_none_or(|b| leaf.score > b.score) {
                    best = Some(leaf);
                }
                if objective == Objective::Feasibility {
                    return Ok((best, stats));
                }
            }
            // next combination in lexicographic order
            let Some(pos) = (0..size).rev().find(|&p| combo[p] < k - size + p) else { break };
            combo[pos] += 1;
            for q in pos + 1..size {
                combo[q] = combo[q - 1] + 1;
            }
        }
    }
    Ok((best, stats))
}

/// Switchable lines sorted by hop distance from the nearest generator or load,
/// so lines that shape the angles between injections are decided first.
fn branching_order(net: &Network) -> Vec<usize> {
    let n = net.buses().len();
    let mut dist = vec![usize::MAX; n];
    let mut queue: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for (i, bus) in net.buses().iter().enumerate() {
        if bus.is_generator() || bus.is_load() {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(v) = queue.pop_front() {
        for e in net.incident(v) {
            let (a, b) = net.ends(e);
            let w = if a == v { b } else { a };
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut order: Vec<usize> = (0..net.lines().len()).filter(|&i| net.lines()[i].switchable).collect();
    order.sort_by_key(|&i| {
        let (a, b) = net.ends(i);
        (dist[a].min(dist[b]), i)
    });
    order
}

fn search(net: &Network, objective: Objective, opts: &SearchOptions) -> Result<SolveResult, SolveError> {
    let switchable = net.switchable_lines().count();
    if switchable > opts.cap {
        return Err(SolveError::CapExceeded { switchable, cap: opts.cap });
    }
    let (best, stats) = match opts.strategy {
        Strategy::Exhaustive => exhaustive(net, objective)?,
        Strategy::BranchAndBound => {
            Search { net, objective, order: branching_order(net) }.run(opts.jobs.max(1))?
        }
    };
    Ok(finish(net, objective, best, stats))
}

fn finish(net: &Network, objective: Objective, best: Option<Leaf>, stats: SearchStats) -> SolveResult {
    let Some(leaf) = best else {
        return SolveResult { objective, status: Status::Infeasible, value: None, witness: None, stats };
    };
    let (status, value) = match objective {
        Objective::Feasibility => (Status::Feasible, None),
        _ if leaf.unbounded => (Status::Unbounded, Some(ExtRational::Infinity)),
        Objective::MaxLoad => (Status::Optimal, Some(leaf.score.clone())),
        Objective::MinCost => {
            let cost = crate::network::total_cost(net, &leaf.witness);
            (Status::Optimal, Some(ExtRational::Finite(cost)))
        }
    };
    SolveResult { objective, status, value, witness: Some(leaf.witness), stats }
}

/// Maximum load served with every line in service.
pub fn solve_mpf(net: &Network) -> Result<SolveResult, SolveError> {
    let mut stats = SearchStats::default();
    let states = vec![LineState::On; net.lines().len()];
    let (_, leaf) = evaluate(net, &states, Objective::MaxLoad, &mut stats)?;
    stats.subsets_explored = 1;
    Ok(finish(net, Objective::MaxLoad, leaf, stats))
}

pub fn solve_msf(net: &Network, opts: &SearchOptions) -> Result<SolveResult, SolveError> {
    search(net, Objective::MaxLoad, opts)
}

pub fn solve_ots(net: &Network, opts: &SearchOptions) -> Result<SolveResult, SolveError> {
    search(net, Objective::MinCost, opts)
}

pub fn solve_feas(net: &Network, opts: &SearchOptions) -> Result<SolveResult, SolveError> {
    search(net, Objective::Feasibility, opts)
}

/// Is there a feasible switching serving at least `x`? Infeasible networks answer no.
pub fn decide_msf(net: &Network, x: &Rational, opts: &SearchOptions) -> Result<bool, SolveError> {
    let r = solve_msf(net, opts)?;
    Ok(match r.value {
        Some(ExtRational::Infinity) => true,
        Some(ExtRational::Finite(v)) => v >= *x,
        None => false,
    })
}

/// Is there a feasible switching costing at most `x`? Infeasible networks answer no.
pub fn decide_ots(net: &Network, x: &Rational, opts: &SearchOptions) -> Result<bool, SolveError> {
    let r = solve_ots(net, opts)?;
    Ok(matches!(r.value, Some(ExtRational::Finite(v)) if v <= *x))
}

/// Extreme values of one bus injection over all feasible points of a fixed topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Injection {
    Generation,
    Load,
}

/// `(min, max)` of the chosen injection at `bus`, or `None` if the topology is infeasible.
pub fn injection_range(
    net: &Network,
    switched: &SwitchSet,
    bus: &str,
    which: Injection,
) -> Result<Option<(ExtRational, ExtRational)>, SolveError> {
    let idx = net.bus_idx(bus).ok_or_else(|| ModelError::Structure(format!("unknown bus {bus:?}")))?;
    let mut topo = build_fixed_topology_lp(net, switched, Objective::Feasibility)?;
    let var = match which {
        Injection::Generation => topo.pgen[idx],
        Injection::Load => topo.pload[idx],
    };
    let Some(var) = var else {
        return Ok(solve_lp(&topo.lp)?
            .ne(&LpOutcome::Infeasible)
            .then(|| (ExtRational::zero(), ExtRational::zero())));
    };
    let mut extreme = |sense| -> Result<Option<ExtRational>, SolveError> {
        topo.lp.set_objective(sense, vec![(var, Rational::one())]);
        Ok(match solve_lp(&topo.lp)? {
            LpOutcome::Infeasible => None,
            LpOutcome::Optimal { value, .. } => Some(ExtRational::Finite(value)),
            LpOutcome::Unbounded { .. } => Some(ExtRational::Infinity),
        })
    };
    let (Some(lo), Some(hi)) = (extreme(Sense::Minimize)?, extreme(Sense::Maximize)?) else {
        return Ok(None);
    };
    Ok(Some((lo, hi)))
}

/// Counts of the LP produced for a topology, for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpShape {
    pub angle_variables: usize,
    pub fixed_angles: usize,
    pub injection_variables: usize,
    pub capacity_rows: usize,
    pub balance_rows: usize,
}

impl TopologyLp {
    pub fn shape(&self) -> LpShape {
        let vars = self.lp.variables();
        let fixed_angles = self.theta.iter().filter(|v| vars[v.0].lower.is_some()).count();
        let balance_rows = self.lp.constraints().iter().filter(|c| c.relation == Relation::Eq).count();
        LpShape {
            angle_variables: self.theta.len(),
            fixed_angles,
            injection_variables: self.pgen.iter().chain(&self.pload).flatten().count(),
            capacity_rows: self.lp.constraints().len() - balance_rows,
            balance_rows,
        }
    }
}

/// Sorted map of line id to flow for a witness, handy for reports.
pub fn witness_flows(net: &Network, op: &OperatingPoint) -> BTreeMap<String, Rational> {
    net.lines()
        .iter()
        .filter(|l| !op.switched.contains(&l.id))
        .map(|l| {
            let flow = crate::network::line_flow(net, op, &l.a, &l.b).expect("active line");
            (l.id.clone(), flow)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{check_feasible, total_load, Bus, Line};

    fn int(v: i64) -> ExtRational {
        ExtRational::int(v)
    }

    fn sch_plain() -> Network {
        Network::new(
            vec![Bus::new("g").generation(int(3)), Bus::new("l").load(int(3), int(3)), Bus::new("v")],
            vec![
                Line::new("g-l", "g", "l", int(2), int(1)),
                Line::new("g-v", "g", "v", int(1), int(1)),
                Line::new("v-l", "v", "l", int(1), int(1)),
            ],
        )
        .unwrap()
    }

    fn two_bus(cap: i64) -> Network {
        Network::new(
            vec![Bus::new("g").generation(int(5)), Bus::new("l").load(int(0), int(5))],
            vec![Line::new("g-l", "g", "l", int(cap), int(1))],
        )
        .unwrap()
    }

    fn two_generators() -> Network {
        Network::new(
            vec![
                Bus::new("cheap").generation(int(5)).cost(int(1)),
                Bus::new("dear").generation(int(5)).cost(int(2)),
                Bus::new("l").load(int(3), int(3)),
            ],
            vec![
                Line::new("cheap-l", "cheap", "l", int(5), int(1)),
                Line::new("dear-l", "dear", "l", int(5), int(1)),
            ],
        )
        .unwrap()
    }

    fn assert_witness(net: &Network, r: &SolveResult) {
        let w = r.witness.as_ref().expect("witness");
        assert!(check_feasible(net, w).unwrap().is_valid(), "{:?}", check_feasible(net, w));
        let topo = build_fixed_topology_lp(net, &w.switched, r.objective).unwrap();
        assert!(topo.lp.variables().len() >= net.buses().len());
    }

    #[test]
    fn sch_lp_shape() {
        let topo = build_fixed_topology_lp(&sch_plain(), &SwitchSet::new(), Objective::MaxLoad).unwrap();
        let shape = topo.shape();
        assert_eq!(shape.angle_variables, 3);
        assert_eq!(shape.fixed_angles, 1);
        // generator g and load l; the connector has no injection bounds
        assert_eq!(shape.injection_variables, 2);
        assert_eq!(shape.capacity_rows, 6);
        assert_eq!(shape.balance_rows, 3);
    }

    #[test]
    fn infinite_capacity_has_no_rows() {
        let net = Network::new(
            vec![Bus::new("a"), Bus::new("b")],
            vec![Line::new("a-b", "a", "b", ExtRational::Infinity, int(1))],
        )
        .unwrap();
        let topo = build_fixed_topology_lp(&net, &SwitchSet::new(), Objective::Feasibility).unwrap();
        assert_eq!(topo.shape().capacity_rows, 0);
    }

    #[test]
    fn mpf_examples() {
        let net = sch_plain();
        let r = solve_mpf(&net).unwrap();
        assert_eq!(r.value, Some(int(3)));
        assert_witness(&net, &r);
        assert_eq!(total_load(r.witness.as_ref().unwrap()), *int(3).finite().unwrap());
        assert_eq!(solve_mpf(&two_bus(2)).unwrap().value, Some(int(2)));

        let lonely = Network::new(
            vec![Bus::new("a").load(int(0), int(4)).generation(int(1)), Bus::new("b").load(int(0), int(2)).generation(int(3))],
            vec![],
        )
        .unwrap();
        assert_eq!(solve_mpf(&lonely).unwrap().value, Some(int(3)));
    }

    #[test]
    fn msf_single_line_and_sch() {
        let opts = SearchOptions::default();
        let r = solve_msf(&two_bus(2), &opts).unwrap();
        assert_eq!(r.value, Some(int(2)));
        assert!(r.witness.unwrap().switched.is_empty());
        let r = solve_msf(&sch_plain(), &opts).unwrap();
        assert_eq!((r.status, r.value.clone()), (Status::Optimal, Some(int(3))));
        assert_witness(&sch_plain(), &r);
    }

    #[test]
    fn ots_examples() {
        let net = two_generators();
        let r = solve_ots(&net, &SearchOptions::default()).unwrap();
        assert_eq!(r.value, Some(int(3)));
        assert_witness(&net, &r);
        assert!(decide_ots(&net, &Rational::from_integer(3.into()), &SearchOptions::default()).unwrap());

        let starved = Network::new(
            vec![Bus::new("g").generation(int(10)), Bus::new("l").load(int(4), int(4))],
            vec![Line::new("g-l", "g", "l", int(3), int(1))],
        )
        .unwrap();
        let r = solve_ots(&starved, &SearchOptions::default()).unwrap();
        assert_eq!((r.status, r.value, r.witness), (Status::Infeasible, None, None));
        assert!(!decide_msf(&starved, &Rational::zero(), &SearchOptions::default()).unwrap());
    }

    #[test]
    fn decide_msf_on_sch() {
        let opts = SearchOptions::default();
        assert!(decide_msf(&sch_plain(), &Rational::from_integer(3.into()), &opts).unwrap());
        assert!(!decide_msf(&sch_plain(), &Rational::new(7.into(), 2.into()), &opts).unwrap());
    }

    #[test]
    fn feasibility_of_empty_network() {
        let r = solve_feas(&Network::empty(), &SearchOptions::default()).unwrap();
        assert_eq!(r.status, Status::Feasible);
        assert!(r.witness.unwrap().theta.is_empty());
    }

    #[test]
    fn upper_bounds() {
        assert_eq!(upper_bound_msf(&sch_plain()), int(3));
        assert_eq!(upper_bound_msf(&two_bus(2)), int(2));
        let net = Network::new(vec![Bus::new("l").load(int(0), int(4)).generation(int(1))], vec![]).unwrap();
        assert_eq!(upper_bound_msf(&net), int(1));
    }

    #[test]
    fn cap_is_enforced() {
        let opts = SearchOptions { cap: 2, ..Default::default() };
        assert_eq!(
            solve_msf(&sch_plain(), &opts),
            Err(SolveError::CapExceeded { switchable: 3, cap: 2 })
        );
    }

    #[test]
    fn unbounded_load() {
        let net = Network::new(
            vec![Bus::new("g").generation(ExtRational::Infinity), Bus::new("l").load(int(0), ExtRational::Infinity)],
            vec![Line::new("g-l", "g", "l", ExtRational::Infinity, int(1))],
        )
        .unwrap();
        let r = solve_msf(&net, &SearchOptions::default()).unwrap();
        assert_eq!((r.status, r.value), (Status::Unbounded, Some(ExtRational::Infinity)));
        assert!(check_feasible(&net, r.witness.as_ref().unwrap()).unwrap().is_valid());
    }

    #[test]
    fn strategies_agree_on_examples() {
        for net in [sch_plain(), two_bus(1), two_generators()] {
            for objective in [Objective::Feasibility, Objective::MaxLoad, Objective::MinCost] {
                let a = search(&net, objective, &SearchOptions::default()).unwrap();
                let b = search(&net, objective, &SearchOptions::exhaustive()).unwrap();
                assert_eq!((a.status, &a.value), (b.status, &b.value));
                assert_eq!(a.witness.map(|w| w.switched), b.witness.map(|w| w.switched));
            }
        }
    }

    #[test]
    fn injection_range_of_sch_connector() {
        let net = sch_plain();
        let range = injection_range(&net, &SwitchSet::new(), "g", Injection::Generation).unwrap();
        assert_eq!(range, Some((int(3), int(3))));
        let none = injection_range(&net, &SwitchSet::new(), "v", Injection::Generation).unwrap();
        assert_eq!(none, Some((int(0), int(0))));
    }
}
