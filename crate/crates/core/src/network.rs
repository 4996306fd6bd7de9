//! The linear DC network model, operating points and the exact feasibility checker.
//!
//! Sign convention: the flow on the directed line `(a, b)` is `s * (theta_b - theta_a)`
//! and the balance at bus `a` sums the flows of all active directed lines leaving
//! `a`, which must equal `pgen[a] - pload[a]`. Power therefore moves from low to
//! high angle, and loads sit at the high end.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{format_rational, ExtRational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate bus id {0:?}")]
    DuplicateBus(String),
    #[error("duplicate line id {0:?}")]
    DuplicateLine(String),
    #[error("line {line:?} references unknown bus {bus:?}")]
    UnknownBus { line: String, bus: String },
    #[error("line {0:?} is a self-loop")]
    SelfLoop(String),
    #[error("lines {0:?} and {1:?} connect the same pair of buses")]
    ParallelLine(String, String),
    #[error("bus {bus:?}: {reason}")]
    InvalidBus { bus: String, reason: String },
    #[error("line {line:?}: {reason}")]
    InvalidLine { line: String, reason: String },
    #[error("no line between {0:?} and {1:?}")]
    NoSuchLine(String, String),
    #[error("unknown line id {0:?}")]
    UnknownLine(String),
    #[error("line {0:?} is switched off")]
    LineSwitched(String),
    #[error("operating point does not match the network: {0}")]
    Structure(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bus {
    pub id: String,
    pub plmin: ExtRational,
    pub plmax: ExtRational,
    pub pgmax: ExtRational,
    pub cost: ExtRational,
}

impl Bus {
    /// A bus with every bound at zero.
    pub fn new(id: impl Into<String>) -> Self {
        Bus {
            id: id.into(),
            plmin: ExtRational::zero(),
            plmax: ExtRational::zero(),
            pgmax: ExtRational::zero(),
            cost: ExtRational::zero(),
        }
    }

    pub fn load(mut self, plmin: ExtRational, plmax: ExtRational) -> Self {
        self.plmin = plmin;
        self.plmax = plmax;
        self
    }

    pub fn generation(mut self, pgmax: ExtRational) -> Self {
        self.pgmax = pgmax;
        self
    }

    pub fn cost(mut self, cost: ExtRational) -> Self {
        self.cost = cost;
        self
    }

    pub fn is_generator(&self) -> bool {
        self.pgmax.is_positive()
    }

    pub fn is_load(&self) -> bool {
        self.plmax.is_positive()
    }

    fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: &str| ModelError::InvalidBus { bus: self.id.clone(), reason: reason.to_string() };
        if self.id.is_empty() {
            return Err(bad("empty id"));
        }
        if self.plmin.is_infinite() {
            return Err(bad("plmin must be finite"));
        }
        if self.cost.is_infinite() {
            return Err(bad("cost must be finite"));
        }
        for (name, v) in [("plmin", &self.plmin), ("plmax", &self.plmax), ("pgmax", &self.pgmax), ("cost", &self.cost)] {
            if v.is_negative() {
                return Err(bad(&format!("{name} must be non-negative")));
            }
        }
        if self.plmin > self.plmax {
            return Err(bad("plmin exceeds plmax"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub id: String,
    pub a: String,
    pub b: String,
    pub capacity: ExtRational,
    pub susceptance: ExtRational,
    pub switchable: bool,
}

impl Line {
    pub fn new(
        id: impl Into<String>,
        a: impl Into<String>,
        b: impl Into<String>,
        capacity: ExtRational,
        susceptance: ExtRational,
    ) -> Self {
        Line { id: id.into(), a: a.into(), b: b.into(), capacity, susceptance, switchable: true }
    }

    pub fn fixed(mut self) -> Self {
        self.switchable = false;
        self
    }

    pub fn susceptance_value(&self) -> &Rational {
        self.susceptance.finite().expect("validated finite susceptance")
    }

    fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: &str| ModelError::InvalidLine { line: self.id.clone(), reason: reason.to_string() };
        if self.id.is_empty() {
            return Err(bad("empty id"));
        }
        if self.a == self.b {
            return Err(ModelError::SelfLoop(self.id.clone()));
        }
        if !self.capacity.is_positive() || self.capacity.is_zero() {
            return Err(bad("capacity must be positive"));
        }
        match &self.susceptance {
            ExtRational::Finite(s) if s.is_positive() => Ok(()),
            _ => Err(bad("susceptance must be a positive finite rational")),
        }
    }
}

/// An immutable, validated LDC network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    buses: Vec<Bus>,
    lines: Vec<Line>,
    bus_index: HashMap<String, usize>,
    line_index: HashMap<String, usize>,
    ends: Vec<(usize, usize)>,
}

impl Default for Network {
    fn default() -> Self {
        Network::empty()
    }
}

impl Network {
    pub fn new(buses: Vec<Bus>, lines: Vec<Line>) -> Result<Self, ModelError> {
        let mut bus_index = HashMap::with_capacity(buses.len());
        for (i, bus) in buses.iter().enumerate() {
            bus.validate()?;
            if bus_index.insert(bus.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateBus(bus.id.clone()));
            }
        }
        let mut line_index = HashMap::with_capacity(lines.len());
        let mut pairs: HashMap<(usize, usize), usize> = HashMap::new();
        let mut ends = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            line.validate()?;
            if line_index.insert(line.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateLine(line.id.clone()));
            }
            let lookup = |bus: &String| {
                bus_index
                    .get(bus)
                    .copied()
                    .ok_or_else(|| ModelError::UnknownBus { line: line.id.clone(), bus: bus.clone() })
            };
            let (a, b) = (lookup(&line.a)?, lookup(&line.b)?);
            if let Some(&other) = pairs.get(&(a.min(b), a.max(b))) {
                return Err(ModelError::ParallelLine(lines[other].id.clone(), line.id.clone()));
            }
            pairs.insert((a.min(b), a.max(b)), i);
            ends.push((a, b));
        }
        Ok(Network { buses, lines, bus_index, line_index, ends })
    }

    pub fn empty() -> Self {
        Network::new(Vec::new(), Vec::new()).expect("empty network is valid")
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn bus(&self, id: &str) -> Option<&Bus> {
        self.bus_index.get(id).map(|&i| &self.buses[i])
    }

    pub fn line(&self, id: &str) -> Option<&Line> {
        self.line_index.get(id).map(|&i| &self.lines[i])
    }

    pub fn bus_idx(&self, id: &str) -> Option<usize> {
        self.bus_index.get(id).copied()
    }

    pub fn line_idx(&self, id: &str) -> Option<usize> {
        self.line_index.get(id).copied()
    }

    /// Bus indices of the endpoints of line `i`, in the order stored on the line.
    pub fn ends(&self, i: usize) -> (usize, usize) {
        self.ends[i]
    }

    pub fn line_between(&self, a: &str, b: &str) -> Option<&Line> {
        let (ia, ib) = (self.bus_idx(a)?, self.bus_idx(b)?);
        self.ends
            .iter()
            .position(|&(x, y)| (x == ia && y == ib) || (x == ib && y == ia))
            .map(|i| &self.lines[i])
    }

    /// Indices of lines incident to bus `bus`.
    pub fn incident(&self, bus: usize) -> impl Iterator<Item = usize> + '_ {
        self.ends.iter().enumerate().filter(move |(_, &(a, b))| a == bus || b == bus).map(|(i, _)| i)
    }

    pub fn switchable_lines(&self) -> impl Iterator<Item = &Line> {
        self.lines.iter().filter(|l| l.switchable)
    }

    /// Returns a copy with different bus data but the same line set.
    pub fn with_buses(&self, buses: Vec<Bus>) -> Result<Network, ModelError> {
        Network::new(buses, self.lines.clone())
    }

    /// Converts a switch set to a per-line "off" mask, validating membership.
    pub fn switch_mask(&self, switched: &SwitchSet) -> Result<Vec<bool>, ModelError> {
        let mut mask = vec![false; self.lines.len()];
        for id in switched.iter() {
            let i = self.line_idx(id).ok_or_else(|| ModelError::UnknownLine(id.clone()))?;
            mask[i] = true;
        }
        Ok(mask)
    }

    pub fn switch_set_from_mask(&self, off: &[bool]) -> SwitchSet {
        SwitchSet(
            off.iter()
                .enumerate()
                .filter(|(_, &o)| o)
                .map(|(i, _)| self.lines[i].id.clone())
                .collect(),
        )
    }

    /// Connected components under the lines not marked off, as bus-index lists.
    ///
    /// Each component is sorted by bus id and components are ordered by their
    /// smallest id, so the first entry of each is the component's anchor.
    pub fn components_by_mask(&self, off: &[bool]) -> Vec<Vec<usize>> {
        let n = self.buses.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, &(a, b)) in self.ends.iter().enumerate() {
            if !off[i] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        let mut comps: Vec<Vec<usize>> = groups
            .into_values()
            .map(|mut c| {
                c.sort_by(|&x, &y| self.buses[x].id.cmp(&self.buses[y].id));
                c
            })
            .collect();
        comps.sort_by(|x, y| self.buses[x[0]].id.cmp(&self.buses[y[0]].id));
        comps
    }
}

/// The set of switched-off lines, kept sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SwitchSet(BTreeSet<String>);

impl SwitchSet {
    pub fn new() -> Self {
        SwitchSet::default()
    }

    pub fn insert(&mut self, id: impl Into<String>) -> bool {
        self.0.insert(id.into())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.contains(id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.0.iter()
    }
}

impl<S: Into<String>> FromIterator<S> for SwitchSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        SwitchSet(iter.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for SwitchSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

mod rational_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, Rational>, s: S) -> Result<S::Ok, S::Error> {
        let text: BTreeMap<&String, String> = m.iter().map(|(k, v)| (k, format_rational(v))).collect();
        text.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, Rational>, D::Error> {
        let raw = BTreeMap::<String, ExtRational>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| match v {
                ExtRational::Finite(r) => Ok((k, r)),
                ExtRational::Infinity => Err(serde::de::Error::custom(format!("{k}: value must be finite"))),
            })
            .collect()
    }
}

/// A candidate solution: angles, injections and the switched-off lines.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatingPoint {
    #[serde(with = "rational_map")]
    pub theta: BTreeMap<String, Rational>,
    #[serde(with = "rational_map")]
    pub pgen: BTreeMap<String, Rational>,
    #[serde(with = "rational_map")]
    pub pload: BTreeMap<String, Rational>,
    pub switched: SwitchSet,
}

impl OperatingPoint {
    /// All angles and injections zero, nothing switched.
    pub fn zero(net: &Network) -> Self {
        let zeros: BTreeMap<String, Rational> = net.buses().iter().map(|b| (b.id.clone(), Rational::zero())).collect();
        OperatingPoint { theta: zeros.clone(), pgen: zeros.clone(), pload: zeros, switched: SwitchSet::new() }
    }

    fn check_structure(&self, net: &Network) -> Result<(), ModelError> {
        for (name, map) in [("theta", &self.theta), ("pgen", &self.pgen), ("pload", &self.pload)] {
            if map.len() != net.buses().len() {
                return Err(ModelError::Structure(format!(
                    "{name} has {} entries, network has {} buses",
                    map.len(),
                    net.buses().len()
                )));
            }
            if let Some(k) = map.keys().find(|k| net.bus(k).is_none()) {
                return Err(ModelError::Structure(format!("{name} refers to unknown bus {k:?}")));
            }
        }
        Ok(())
    }
}

/// `s * (theta_to - theta_from)` on the active line joining `from` and `to`.
pub fn line_flow(net: &Network, op: &OperatingPoint, from: &str, to: &str) -> Result<Rational, ModelError> {
    let line = net.line_between(from, to).ok_or_else(|| ModelError::NoSuchLine(from.into(), to.into()))?;
    if op.switched.contains(&line.id) {
        return Err(ModelError::LineSwitched(line.id.clone()));
    }
    let angle = |bus: &str| {
        op.theta.get(bus).ok_or_else(|| ModelError::Structure(format!("no angle for bus {bus:?}")))
    };
    Ok(line.susceptance_value() * (angle(to)? - angle(from)?))
}

/// One violated feasibility condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    UnknownSwitchedLine { line: String },
    NotSwitchable { line: String },
    Capacity { line: String, flow: String, capacity: String },
    LoadBounds { bus: String, pload: String, plmin: String, plmax: String },
    GenerationBounds { bus: String, pgen: String, pgmax: String },
    Balance { bus: String, outflow: String, injection: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownSwitchedLine { line } => write!(f, "switched line {line} is not in the network"),
            Violation::NotSwitchable { line } => write!(f, "line {line} is not switchable"),
            Violation::Capacity { line, flow, capacity } => {
                write!(f, "line {line}: |flow| = |{flow}| exceeds capacity {capacity}")
            }
            Violation::LoadBounds { bus, pload, plmin, plmax } => {
                write!(f, "bus {bus}: load {pload} outside [{plmin}, {plmax}]")
            }
            Violation::GenerationBounds { bus, pgen, pgmax } => {
                write!(f, "bus {bus}: generation {pgen} outside [0, {pgmax}]")
            }
            Violation::Balance { bus, outflow, injection } => {
                write!(f, "bus {bus}: net outflow {outflow} != pgen - pload = {injection}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every feasibility condition exactly and reports each violation.
pub fn check_feasible(net: &Network, op: &OperatingPoint) -> Result<FeasibilityReport, ModelError> {
    op.check_structure(net)?;
    let mut violations = Vec::new();
    for id in op.switched.iter() {
        match net.line(id) {
            None => violations.push(Violation::UnknownSwitchedLine { line: id.clone() }),
            Some(l) if !l.switchable => violations.push(Violation::NotSwitchable { line: id.clone() }),
            Some(_) => {}
        }
    }

    let mut outflow: Vec<Rational> = vec![Rational::zero(); net.buses().len()];
    for (i, line) in net.lines().iter().enumerate() {
        if op.switched.contains(&line.id) {
            continue;
        }
        let (a, b) = net.ends(i);
        let flow = line.susceptance_value() * (&op.theta[&net.buses()[b].id] - &op.theta[&net.buses()[a].id]);
        if let ExtRational::Finite(cap) = &line.capacity {
            if flow.abs() > *cap {
                violations.push(Violation::Capacity {
                    line: line.id.clone(),
                    flow: format_rational(&flow),
                    capacity: format_rational(cap),
                });
            }
        }
        outflow[a] += &flow;
        outflow[b] -= &flow;
    }

    for (i, bus) in net.buses().iter().enumerate() {
        let pload = &op.pload[&bus.id];
        let pgen = &op.pgen[&bus.id];
        let load = ExtRational::Finite(pload.clone());
        if load < bus.plmin || load > bus.plmax {
            violations.push(Violation::LoadBounds {
                bus: bus.id.clone(),
                pload: format_rational(pload),
                plmin: bus.plmin.to_string(),
                plmax: bus.plmax.to_string(),
            });
        }
        let gen = ExtRational::Finite(pgen.clone());
        if pgen.is_negative() || gen > bus.pgmax {
            violations.push(Violation::GenerationBounds {
                bus: bus.id.clone(),
                pgen: format_rational(pgen),
                pgmax: bus.pgmax.to_string(),
            });
        }
        let injection = pgen - pload;
        if outflow[i] != injection {
            violations.push(Violation::Balance {
                bus: bus.id.clone(),
                outflow: format_rational(&outflow[i]),
                injection: format_rational(&injection),
            });
        }
    }
    Ok(FeasibilityReport { violations })
}

pub fn total_load(op: &OperatingPoint) -> Rational {
    op.pload.values().fold(Rational::zero(), |acc, v| acc + v)
}

pub fn total_generation(op: &OperatingPoint) -> Rational {
    op.pgen.values().fold(Rational::zero(), |acc, v| acc + v)
}

/// `sum cost[b] * pgen[b]`; buses missing from the network are ignored.
pub fn total_cost(net: &Network, op: &OperatingPoint) -> Rational {
    op.pgen
        .iter()
        .filter_map(|(id, g)| net.bus(id).map(|b| b.cost.finite().expect("validated finite cost") * g))
        .fold(Rational::zero(), |acc, v| acc + v)
}

/// Partition of bus ids into connected components of the active topology.
pub fn active_components(net: &Network, switched: &SwitchSet) -> Result<Vec<Vec<String>>, ModelError> {
    let off = net.switch_mask(switched)?;
    Ok(net
        .components_by_mask(&off)
        .into_iter()
        .map(|c| c.into_iter().map(|i| net.buses()[i].id.clone()).collect())
        .collect())
}
