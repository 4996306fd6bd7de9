//! Gadget networks built from combinatorial instances.
//!
//! Each builder has two modes. [`BuildMode::Repaired`] (the default) uses
//! parameters under which the intended equivalence actually holds;
//! [`BuildMode::Literal`] uses the parameters exactly as originally printed so
//! the inconsistencies can be demonstrated. Every deviation between the two is
//! listed in the report's `repairs`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphcheck::TreeAnnotation;
use crate::network::{Bus, Line, ModelError, Network};
use crate::rational::{ExtRational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("gadget size must be positive")]
    NonPositive,
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("vertices {0:?} and {1:?} are not connected")]
    Disconnected(String, String),
    #[error("bus {0:?} is both a generator and a load")]
    MixedBus(String),
    #[error("load {0:?} has an infinite maximum demand")]
    InfiniteLoad(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildMode {
    #[default]
    Repaired,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchMode {
    Plain,
    /// Connector is an unbounded generator.
    Plus,
    /// Connector is an unbounded load.
    Minus,
}

/// One parameter that differs from its literal value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repair {
    pub parameter: String,
    pub literal: String,
    pub adopted: String,
    pub reason: String,
}

fn repair(parameter: &str, literal: &str, adopted: &str, reason: &str) -> Repair {
    Repair {
        parameter: parameter.to_string(),
        literal: literal.to_string(),
        adopted: adopted.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub construction: String,
    pub mode: BuildMode,
    #[serde(skip)]
    pub network: Network,
    /// Instance symbol to bus or line id.
    pub mapping: BTreeMap<String, String>,
    pub repairs: Vec<Repair>,
    /// Spanning-tree certificate, for constructions that claim a tree class.
    pub annotation: Option<TreeAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSumInstance {
    pub set: Vec<u64>,
    pub target: u64,
}

impl SubsetSumInstance {
    pub fn new(set: Vec<u64>, target: u64) -> Result<Self, ConstructionError> {
        if set.is_empty() {
            return Err(ConstructionError::Instance("the set is empty".into()));
        }
        if set.contains(&0) || target == 0 {
            return Err(ConstructionError::Instance("elements and target must be at least 1".into()));
        }
        Ok(SubsetSumInstance { set, target })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphInstance {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub a: String,
    pub b: String,
}

impl GraphInstance {
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<(String, String)>,
        a: impl Into<String>,
        b: impl Into<String>,
    ) -> Result<Self, ConstructionError> {
        let (a, b) = (a.into(), b.into());
        let bad = |m: String| Err(ConstructionError::Instance(m));
        let names: BTreeSet<&String> = vertices.iter().collect();
        if names.len() != vertices.len() {
            return bad("duplicate vertex".into());
        }
        if a == b {
            return bad("a and b must differ".into());
        }
        for v in [&a, &b] {
            if !names.contains(v) {
                return bad(format!("unknown vertex {v:?}"));
            }
        }
        let mut seen = BTreeSet::new();
        for (x, y) in &edges {
            if !names.contains(x) || !names.contains(y) {
                return bad(format!("edge {x}-{y} uses an unknown vertex"));
            }
            if x == y {
                return bad(format!("self-loop at {x:?}"));
            }
            if !seen.insert((x.min(y).clone(), x.max(y).clone())) {
                return bad(format!("repeated edge {x}-{y}"));
            }
        }
        Ok(GraphInstance { vertices, edges, a, b })
    }

    pub fn neighbours(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut adj: BTreeMap<&str, Vec<&str>> = self.vertices.iter().map(|v| (v.as_str(), Vec::new())).collect();
        for (x, y) in &self.edges {
            adj.get_mut(x.as_str()).expect("validated").push(y);
            adj.get_mut(y.as_str()).expect("validated").push(x);
        }
        adj
    }

    pub fn connects_a_b(&self) -> bool {
        let adj = self.neighbours();
        let mut seen = BTreeSet::from([self.a.as_str()]);
        let mut stack = vec![self.a.as_str()];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.contains(self.b.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct M3daInstance {
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub w: Vec<String>,
    /// Cost of every triple.
    pub d: BTreeMap<(String, String, String), u64>,
}

impl M3daInstance {
    pub fn new(
        x: Vec<String>,
        y: Vec<String>,
        w: Vec<String>,
        d: BTreeMap<(String, String, String), u64>,
    ) -> Result<Self, ConstructionError> {
        let bad = |m: String| Err(ConstructionError::Instance(m));
        if x.is_empty() || x.len() != y.len() || y.len() != w.len() {
            return bad("X, Y and W must be nonempty and of equal size".into());
        }
        let all: Vec<&String> = x.iter().chain(&y).chain(&w).collect();
        if all.iter().collect::<BTreeSet<_>>().len() != all.len() {
            return bad("X, Y and W must be disjoint sets".into());
        }
        if let Some(s) = all.iter().find(|s| s.as_str() == "l") {
            return bad(format!("symbol {s:?} is reserved"));
        }
        for xi in &x {
            for yi in &y {
                for wi in &w {
                    if !d.contains_key(&(xi.clone(), yi.clone(), wi.clone())) {
                        return bad(format!("missing cost for ({xi}, {yi}, {wi})"));
                    }
                }
            }
        }
        if d.len() != x.len() * y.len() * w.len() {
            return bad("cost table has triples outside X x Y x W".into());
        }
        Ok(M3daInstance { x, y, w, d })
    }

    /// `n x n x n` instance with symbols `x1.., y1.., w1..` and costs from `cost`.
    pub fn uniform(n: usize, mut cost: impl FnMut(usize, usize, usize) -> u64) -> Self {
        let sym = |p: &str| (1..=n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        let (x, y, w) = (sym("x"), sym("y"), sym("w"));
        let mut d = BTreeMap::new();
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                for (k, wk) in w.iter().enumerate() {
                    d.insert((xi.clone(), yj.clone(), wk.clone()), cost(i, j, k));
                }
            }
        }
        M3daInstance { x, y, w, d }
    }

    pub fn triple_id(t: &(String, String, String)) -> String {
        format!("{},{},{}", t.0, t.1, t.2)
    }
}

fn int(v: u64) -> ExtRational {
    ExtRational::Finite(Rational::from_integer(BigInt::from(v)))
}

fn rat(v: Rational) -> ExtRational {
    ExtRational::Finite(v)
}

fn line(a: &str, b: &str, cap: ExtRational, sus: ExtRational) -> Line {
    Line::new(format!("{a}-{b}"), a, b, cap, sus)
}

/// Buses and lines of one switch network with generator `g`, load `l`, connector `v`.
fn sch_parts(x: &Rational, g: &str, l: &str, v: &str) -> (Vec<Bus>, Vec<Line>) {
    let two = Rational::from_integer(2.into());
    let three = Rational::from_integer(3.into());
    let buses = vec![
        Bus::new(g).generation(rat(&three * x)),
        Bus::new(l).load(rat(&three * x), rat(&three * x)),
    ];
    let lines = vec![
        line(g, l, rat(&two * x), ExtRational::one()),
        line(g, v, rat(x.clone()), ExtRational::one()),
        line(v, l, rat(x.clone()), ExtRational::one()),
    ];
    (buses, lines)
}

pub fn build_sch(x: &Rational, mode: SchMode, build: BuildMode) -> Result<ConstructionReport, ConstructionError> {
    if *x <= Rational::from_integer(0.into()) {
        return Err(ConstructionError::NonPositive);
    }
    let (mut buses, lines) = sch_parts(x, "g", "l", "v");
    let mut repairs = Vec::new();
    let connector = match (mode, build) {
        (SchMode::Plain, _) => Bus::new("v"),
        (SchMode::Plus, BuildMode::Repaired) => {
            repairs.push(repair(
                "connector bound in the plus variant",
                "plmax(v) = inf",
                "pgmax(v) = inf",
                "the plus variant makes v an unbounded generator, which is a generation bound",
            ));
            Bus::new("v").generation(ExtRational::Infinity)
        }
        (SchMode::Plus, BuildMode::Literal) => Bus::new("v").load(ExtRational::zero(), ExtRational::Infinity),
        (SchMode::Minus, _) => Bus::new("v").load(ExtRational::zero(), ExtRational::Infinity),
    };
    buses.push(connector);
    let mapping = BTreeMap::from([("v".to_string(), "v".to_string()), ("x".to_string(), x.to_string())]);
    Ok(ConstructionReport {
        construction: format!("sch-{}", format!("{mode:?}").to_lowercase()),
        mode: build,
        network: Network::new(buses, lines)?,
        mapping,
        repairs,
        annotation: None,
    })
}

/// Cactus network whose feasibility encodes the subset-sum instance.
pub fn build_cactus(ssi: &SubsetSumInstance, build: BuildMode) -> Result<ConstructionReport, ConstructionError> {
    let w = ssi.target;
    let mut repairs = vec![repair(
        "bus v0 of the backbone",
        "v0 (never declared)",
        "x0",
        "the chain starts at x0 and no other bus can carry the g-x0-l path",
    )];
    let pgmax_g = match build {
        BuildMode::Repaired => {
            repairs.push(repair(
                "pgmax(g)",
                "2+w",
                "3+2w",
                "g feeds the congested lines g-l (2+w) and g-x0 (w+1)",
            ));
            3 + 2 * w
        }
        BuildMode::Literal => 2 + w,
    };
    let mut buses = vec![
        Bus::new("g").generation(int(pgmax_g)),
        Bus::new("l").load(int(3 + w), int(3 + w)),
        Bus::new("x0"),
    ];
    let mut lines = vec![
        line("g", "l", int(2 + w), ExtRational::one()),
        line("g", "x0", int(w + 1), ExtRational::one()),
        line("x0", "l", int(1), ExtRational::one()),
    ];
    let mut mapping = BTreeMap::new();
    for (i, &xi) in ssi.set.iter().enumerate() {
        let k = i + 1;
        let (x, v) = (format!("x{k}"), format!("v{k}"));
        buses.push(Bus::new(x.clone()));
        buses.push(Bus::new(v.clone()));
        lines.push(line(&format!("x{i}"), &x, int(w), ExtRational::one()));
        lines.push(line(&x, &v, ExtRational::Infinity, ExtRational::one()));
        let (gb, gl) = sch_parts(&Rational::from_integer(BigInt::from(xi)), &format!("g{k}"), &format!("l{k}"), &v);
        buses.extend(gb);
        lines.extend(gl);
        mapping.insert(format!("element {k} ({xi})"), v);
    }
    Ok(ConstructionReport {
        construction: "cactus".into(),
        mode: build,
        network: Network::new(buses, lines)?,
        mapping,
        repairs,
        annotation: None,
    })
}

/// `m = 1 + sum(M)`.
pub fn tree_m(ssi: &SubsetSumInstance) -> u64 {
    1 + ssi.set.iter().sum::<u64>()
}

/// The MSF value claimed exactly when the instance is solvable: `m + 2 + w`.
pub fn tree_claim(ssi: &SubsetSumInstance) -> u64 {
    tree_m(ssi) + 2 + ssi.target
}

/// 2-level tree network whose MSF reaches `m + 2 + w` iff the instance is solvable.
/// The set is taken in the given order as `a_2, ..., a_n`.
pub fn build_two_level_tree(
    ssi: &SubsetSumInstance,
    build: BuildMode,
) -> Result<ConstructionReport, ConstructionError> {
    let m = tree_m(ssi);
    let w = ssi.target;
    let n = ssi.set.len() + 1;
    // a[i] for 1..=n+1
    let mut a = vec![0u64; n + 2];
    a[1] = 1;
    a[2..=n].copy_from_slice(&ssi.set);
    a[n + 1] = m + 1;
    let r = |p: u64, q: u64| rat(Rational::new(BigInt::from(p), BigInt::from(q)));
    let name = |p: &str, i: usize| format!("{p}{i}");

    let mut repairs = vec![
        repair("bus p on the lines p-a_i", "p (never declared)", "t", "the lines are later referred to as t-a_i"),
        repair(
            "values a_1 and a_(n+1)",
            "undeclared",
            "a_1 = 1, a_(n+1) = m+1",
            "forced by the capacities of a_1-l_1 and a_(n+1)-l_(n+1) and the total m+2+w",
        ),
        repair("generator bound", "pgmax(y) = inf", "pgmax(g) = inf", "g is the only generator"),
    ];
    let mut lines = Vec::new();
    let t_range: Vec<usize> = match build {
        BuildMode::Repaired => {
            repairs.push(repair(
                "susceptance of t-a_i",
                "a_i/i for 1 <= i <= n",
                "a_i/(i-1) for 2 <= i <= n",
                "the congested line g-t fixes theta(t) = 1 and the congested chain fixes theta(a_i) = i",
            ));
            (2..=n).collect()
        }
        BuildMode::Literal => (1..=n).collect(),
    };
    for i in t_range {
        let den = if build == BuildMode::Repaired { i as u64 - 1 } else { i as u64 };
        lines.push(line("t", &name("a", i), int(a[i]), r(a[i], den)));
    }
    for (i, &ai) in a.iter().enumerate().take(n + 1).skip(1) {
        lines.push(line(&name("a", i), &name("l", i), int(ai), ExtRational::one()));
    }
    for i in 2..=n + 1 {
        lines.push(line(&name("a", i - 1), &name("a", i), int(m), int(m)));
    }
    let (gn, an) = (name("g", n + 1), name("a", n + 1));
    lines.extend([
        line("g", "g1", int(m + 1), int(2 * m + 2)),
        line("g1", "a1", int(m + 1), int(2 * m + 2)),
        line("g", "t", int(w), int(w)),
        line("g", &gn, int(1), r(2, n as u64 + 1)),
        line(&gn, &an, int(1), r(2, n as u64 + 1)),
    ]);
    lines.push(line(&an, &name("l", n + 1), int(m + 1), ExtRational::one()));

    let mut buses = vec![Bus::new("g").generation(ExtRational::Infinity), Bus::new("t"), Bus::new("g1"), Bus::new(gn.clone())];
    for (i, &ai) in a.iter().enumerate().skip(1) {
        buses.push(Bus::new(name("a", i)));
        buses.push(Bus::new(name("l", i)).load(ExtRational::zero(), int(ai)));
    }

    let mut children = BTreeMap::new();
    children.insert("g".to_string(), vec!["g1".to_string(), "t".to_string(), gn.clone()]);
    children.insert("g1".to_string(), vec!["a1".to_string()]);
    children.insert("t".to_string(), (2..=n).map(|i| name("a", i)).collect());
    children.insert(gn, vec![an]);
    for i in 1..=n + 1 {
        children.insert(name("a", i), vec![name("l", i)]);
    }
    let mapping = (2..=n).map(|i| (format!("element {} ({})", i - 1, a[i]), name("a", i))).collect();
    Ok(ConstructionReport {
        construction: "two-level-tree".into(),
        mode: build,
        network: Network::new(buses, lines)?,
        mapping,
        repairs,
        annotation: Some(TreeAnnotation { root: "g".into(), children }),
    })
}

const RESERVED: [&str; 4] = ["g", "l", "g'", "l'"];

type Parts = (Vec<Bus>, Vec<Line>, Vec<Repair>);

fn graph_gadget(
    gi: &GraphInstance,
    build: BuildMode,
    with_second_generator: bool,
) -> Result<Parts, ConstructionError> {
    if let Some(v) = gi.vertices.iter().find(|v| RESERVED.contains(&v.as_str())) {
        return Err(ConstructionError::Instance(format!("vertex name {v:?} is reserved")));
    }
    if !gi.connects_a_b() {
        return Err(ConstructionError::Disconnected(gi.a.clone(), gi.b.clone()));
    }
    let n = gi.vertices.len() as u64;
    let inv = rat(Rational::new(1.into(), BigInt::from(n + 1)));
    let mut repairs = Vec::new();
    let gl = match build {
        BuildMode::Repaired => {
            repairs.push(repair(
                "line g-l",
                "capacity 1/(n+1), susceptance 1",
                "capacity 1, susceptance 1/(n+1)",
                "flow(g-l) = (theta(l)-theta(g))/(n+1) must reach (t+2)/(n+1) on a single path",
            ));
            line("g", "l", ExtRational::one(), inv)
        }
        BuildMode::Literal => line("g", "l", inv, ExtRational::one()),
    };
    let mut buses: Vec<Bus> = gi.vertices.iter().map(Bus::new).collect();
    buses.push(Bus::new("g").generation(ExtRational::Infinity));
    buses.push(Bus::new("l").load(int(3), ExtRational::Infinity));
    let mut lines: Vec<Line> = gi.edges.iter().map(|(x, y)| line(x, y, ExtRational::one(), ExtRational::one())).collect();
    lines.push(line("g", &gi.a, ExtRational::one(), ExtRational::one()));
    lines.push(line(&gi.b, "l", ExtRational::one(), ExtRational::one()));
    lines.push(gl);
    if with_second_generator {
        buses.push(Bus::new("g'").generation(ExtRational::Infinity));
        buses.push(Bus::new("l'").load(ExtRational::zero(), ExtRational::Infinity));
        lines.push(line("g'", "l'", int(n), int(n)));
        lines.push(line("g'", "l", ExtRational::one(), ExtRational::one()));
        lines.push(line("l'", "l", ExtRational::one(), ExtRational::one()));
    }
    Ok((buses, lines, repairs))
}

fn graph_mapping(gi: &GraphInstance) -> BTreeMap<String, String> {
    let mut mapping: BTreeMap<String, String> = gi.vertices.iter().map(|v| (v.clone(), v.clone())).collect();
    mapping.insert("a".into(), gi.a.clone());
    mapping.insert("b".into(), gi.b.clone());
    mapping
}

/// Network whose MSF grows linearly with the longest `a`-`b` path of the graph.
pub fn build_longest_path(gi: &GraphInstance, build: BuildMode) -> Result<ConstructionReport, ConstructionError> {
    let (buses, lines, repairs) = graph_gadget(gi, build, true)?;
    Ok(ConstructionReport {
        construction: "longest-path".into(),
        mode: build,
        network: Network::new(buses, lines)?,
        mapping: graph_mapping(gi),
        repairs,
        annotation: None,
    })
}

/// The longest-path network without `g'`, `l'`; its MSF is 2 iff the graph has
/// a Hamiltonian `a`-`b` path.
pub fn build_hamiltonian(gi: &GraphInstance, build: BuildMode) -> Result<ConstructionReport, ConstructionError> {
    let (mut buses, lines, mut repairs) = graph_gadget(gi, build, false)?;
    if build == BuildMode::Repaired {
        repairs.push(repair(
            "plmin(l)",
            "3 (inherited)",
            "0",
            "without g' at most 2 units reach l, so a demand of 3 makes every instance infeasible",
        ));
        let l = buses.iter_mut().find(|b| b.id == "l").expect("built above");
        l.plmin = ExtRational::zero();
    }
    Ok(ConstructionReport {
        construction: "hamiltonian".into(),
        mode: build,
        network: Network::new(buses, lines)?,
        mapping: graph_mapping(gi),
        repairs,
        annotation: None,
    })
}

/// Bus ids used for triple `t`: the triple bus, its generator and its distributor.
pub fn m3da_bus_ids(t: &(String, String, String)) -> (String, String, String) {
    let id = M3daInstance::triple_id(t);
    (format!("t[{id}]"), format!("tg[{id}]"), format!("td[{id}]"))
}

/// Network whose OTS equals the minimum assignment cost.
pub fn build_m3da(mi: &M3daInstance, build: BuildMode) -> Result<ConstructionReport, ConstructionError> {
    let triples = mi.d.len() as u64;
    let symbols = (mi.x.len() * 3) as u64;
    let mut repairs = Vec::new();
    let (cap_tg, demand) = match build {
        BuildMode::Repaired => {
            repairs.push(repair(
                "capacity of t-t_g",
                "3",
                "5",
                "t_g supplies 5 units to t over this single line",
            ));
            repairs.push(repair(
                "plmin(l) = plmax(l)",
                "3|T| + |R|",
                "5|T| + |R|",
                "every line at l is congested: |R| lines of capacity 1 and |T| of capacity 5",
            ));
            (5, 5 * triples + symbols)
        }
        BuildMode::Literal => (3, 3 * triples + symbols),
    };
    let mut buses = vec![Bus::new("l").load(int(demand), int(demand))];
    let mut lines = Vec::new();
    let mut mapping = BTreeMap::new();
    for r in mi.x.iter().chain(&mi.y).chain(&mi.w) {
        buses.push(Bus::new(r.clone()));
        lines.push(line(r, "l", int(1), ExtRational::one()));
        mapping.insert(r.clone(), r.clone());
    }
    for (t, &cost) in &mi.d {
        let (tb, tg, td) = m3da_bus_ids(t);
        let third = Rational::new(BigInt::from(cost), BigInt::from(3));
        buses.push(Bus::new(tb.clone()).generation(int(3)).cost(rat(third)));
        buses.push(Bus::new(tg.clone()).generation(int(5)));
        buses.push(Bus::new(td.clone()));
        lines.push(line(&tb, &tg, int(cap_tg), ExtRational::one()));
        lines.push(line(&tb, "l", int(5), ExtRational::one()));
        lines.push(line(&tb, &td, int(3), ExtRational::one()));
        for r in [&t.0, &t.1, &t.2] {
            lines.push(line(&td, r, int(1), ExtRational::one()));
        }
        mapping.insert(format!("({})", M3daInstance::triple_id(t)), tb);
    }
    Ok(ConstructionReport {
        construction: "m3da".into(),
        mode: build,
        network: Network::new(buses, lines)?,
        mapping,
        repairs,
        annotation: None,
    })
}

/// OTS instance whose optimum is the load an MSF optimum leaves unserved.
///
/// Every load gets its demand fixed at `plmax` and a local cost-1 generator
/// covering `plmax - plmin`; original generators become free.
pub fn msf_to_ots(net: &Network) -> Result<ConstructionReport, ConstructionError> {
    let mut buses = Vec::with_capacity(net.buses().len());
    for bus in net.buses() {
        if bus.is_generator() && bus.is_load() {
            return Err(ConstructionError::MixedBus(bus.id.clone()));
        }
        let mut b = bus.clone();
        if bus.is_load() {
            let plmax = bus.plmax.finite().ok_or_else(|| ConstructionError::InfiniteLoad(bus.id.clone()))?;
            let slack = plmax - bus.plmin.finite().expect("plmin is finite");
            b.plmin = bus.plmax.clone();
            b.pgmax = rat(slack);
            b.cost = ExtRational::one();
        } else {
            b.cost = ExtRational::zero();
        }
        buses.push(b);
    }
    Ok(ConstructionReport {
        construction: "msf-to-ots".into(),
        mode: BuildMode::Repaired,
        network: net.with_buses(buses)?,
        mapping: BTreeMap::new(),
        repairs: Vec::new(),
        annotation: None,
    })
}
