//! JSON file formats for networks, graphs and assignment instances, plus
//! rendering of solver results and verification reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Bus, Line, ModelError, Network, OperatingPoint};
use crate::oracles::VerificationReport;
use crate::rational::{format_rational, ExtRational};
use crate::reductions::{ConstructionError, GraphInstance, M3daInstance};
use crate::solvers::SolveResult;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Instance(#[from] ConstructionError),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends its own " at line L column C"
        let message = message.split(" at line ").next().unwrap_or(&message).to_string();
        IoError::Syntax { line: e.line(), column: e.column(), message }
    }
}

fn zero() -> ExtRational {
    ExtRational::zero()
}

fn one() -> ExtRational {
    ExtRational::one()
}

fn yes() -> bool {
    true
}

fn is_zero(v: &ExtRational) -> bool {
    v.is_zero()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusRecord {
    pub id: String,
    #[serde(default = "zero", skip_serializing_if = "is_zero")]
    pub plmin: ExtRational,
    #[serde(default = "zero", skip_serializing_if = "is_zero")]
    pub plmax: ExtRational,
    #[serde(default = "zero", skip_serializing_if = "is_zero")]
    pub pgmax: ExtRational,
    #[serde(default = "zero", skip_serializing_if = "is_zero")]
    pub cost: ExtRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRecord {
    /// Defaults to `a-b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub a: String,
    pub b: String,
    #[serde(default = "one")]
    pub capacity: ExtRational,
    #[serde(default = "one")]
    pub susceptance: ExtRational,
    #[serde(default = "yes")]
    pub switchable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub buses: Vec<BusRecord>,
    #[serde(default)]
    pub lines: Vec<LineRecord>,
}

impl NetworkFile {
    pub fn from_network(net: &Network) -> Self {
        let buses = net
            .buses()
            .iter()
            .map(|b| BusRecord {
                id: b.id.clone(),
                plmin: b.plmin.clone(),
                plmax: b.plmax.clone(),
                pgmax: b.pgmax.clone(),
                cost: b.cost.clone(),
            })
            .collect();
        let lines = net
            .lines()
            .iter()
            .map(|l| LineRecord {
                id: (l.id != format!("{}-{}", l.a, l.b)).then(|| l.id.clone()),
                a: l.a.clone(),
                b: l.b.clone(),
                capacity: l.capacity.clone(),
                susceptance: l.susceptance.clone(),
                switchable: l.switchable,
            })
            .collect();
        NetworkFile { buses, lines }
    }

    pub fn into_network(self) -> Result<Network, ModelError> {
        let buses = self
            .buses
            .into_iter()
            .map(|b| Bus { id: b.id, plmin: b.plmin, plmax: b.plmax, pgmax: b.pgmax, cost: b.cost })
            .collect();
        let lines = self
            .lines
            .into_iter()
            .map(|l| {
                let id = l.id.unwrap_or_else(|| format!("{}-{}", l.a, l.b));
                let mut line = Line::new(id, l.a, l.b, l.capacity, l.susceptance);
                line.switchable = l.switchable;
                line
            })
            .collect();
        Network::new(buses, lines)
    }
}

pub fn parse_network(text: &str) -> Result<Network, IoError> {
    let file: NetworkFile = serde_json::from_str(text)?;
    Ok(file.into_network()?)
}

pub fn write_network(net: &Network) -> String {
    pretty(&NetworkFile::from_network(net))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub a: String,
    pub b: String,
}

pub fn parse_graph(text: &str) -> Result<GraphInstance, IoError> {
    let f: GraphFile = serde_json::from_str(text)?;
    Ok(GraphInstance::new(f.vertices, f.edges, f.a, f.b)?)
}

pub fn write_graph(gi: &GraphInstance) -> String {
    pretty(&GraphFile { vertices: gi.vertices.clone(), edges: gi.edges.clone(), a: gi.a.clone(), b: gi.b.clone() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostRecord {
    pub x: String,
    pub y: String,
    pub w: String,
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct M3daFile {
    #[serde(rename = "X")]
    pub x: Vec<String>,
    #[serde(rename = "Y")]
    pub y: Vec<String>,
    #[serde(rename = "W")]
    pub w: Vec<String>,
    pub d: Vec<CostRecord>,
}

pub fn parse_m3da(text: &str) -> Result<M3daInstance, IoError> {
    let f: M3daFile = serde_json::from_str(text)?;
    let mut d = BTreeMap::new();
    for r in f.d {
        let key = (r.x, r.y, r.w);
        if d.insert(key.clone(), r.cost).is_some() {
            let msg = format!("repeated cost for ({})", M3daInstance::triple_id(&key));
            return Err(ConstructionError::Instance(msg).into());
        }
    }
    Ok(M3daInstance::new(f.x, f.y, f.w, d)?)
}

pub fn write_m3da(mi: &M3daInstance) -> String {
    let d = mi.d.iter().map(|((x, y, w), c)| CostRecord { x: x.clone(), y: y.clone(), w: w.clone(), cost: *c }).collect();
    pretty(&M3daFile { x: mi.x.clone(), y: mi.y.clone(), w: mi.w.clone(), d })
}

pub fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Per-bus table of an operating point, then the switched-off lines.
pub fn render_point(op: &OperatingPoint) -> String {
    let mut out = String::new();
    let rows: Vec<[String; 4]> = op
        .theta
        .iter()
        .map(|(bus, theta)| {
            let get = |m: &BTreeMap<String, _>| m.get(bus).map(format_rational).unwrap_or_else(|| "0".into());
            [bus.clone(), format_rational(theta), get(&op.pgen), get(&op.pload)]
        })
        .collect();
    let header = ["bus", "theta", "pgen", "pload"].map(String::from);
    table(&mut out, &header, &rows);
    let _ = writeln!(out, "switched off: {}", op.switched);
    out
}

fn table(out: &mut String, header: &[String; 4], rows: &[[String; 4]]) {
    let mut width = header.clone().map(|h| h.len());
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    for r in std::iter::once(header).chain(rows) {
        let cells: Vec<String> = r.iter().zip(width).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "  {}", cells.join("  ").trim_end());
    }
}

pub fn render_solve(name: &str, r: &SolveResult) -> String {
    let mut out = String::new();
    match &r.value {
        Some(v) => {
            let _ = writeln!(out, "{name} = {v}");
        }
        None => {
            let _ = writeln!(out, "{}", format!("{:?}", r.status).to_lowercase());
        }
    }
    if let Some(w) = &r.witness {
        out.push_str(&render_point(w));
    }
    let s = &r.stats;
    let _ = writeln!(out, "subsets explored {}, pruned {}, LPs solved {}", s.subsets_explored, s.subsets_pruned, s.lps_solved);
    out
}

pub fn render_report(report: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} ({:?} parameters)", report.theorem, report.mode);
    for (i, inst) in report.instances.iter().enumerate() {
        let mark = if inst.matches { "ok" } else { "MISMATCH" };
        let _ = writeln!(out, "{:>4}  {mark:<8}  {}", i + 1, inst.instance);
        let _ = writeln!(out, "        solver: {}", inst.solver);
        let _ = writeln!(out, "        oracle: {}", inst.oracle);
        if let Some(m) = &inst.mismatch {
            let _ = writeln!(out, "        reason: {}", m.reason);
            if let Some(w) = &m.solver_witness {
                for line in render_point(w).lines() {
                    let _ = writeln!(out, "      {line}");
                }
            }
        }
        if let Some(c) = &inst.invariants {
            if !c.holds() {
                let show = |v: &Option<ExtRational>| v.as_ref().map_or("infeasible".into(), ToString::to_string);
                let _ = writeln!(
                    out,
                    "        invariant violated: mpf {} msf {} bound {} witnesses valid {}",
                    show(&c.mpf),
                    show(&c.msf),
                    c.upper_bound,
                    c.witnesses_valid
                );
            }
        }
    }
    for note in &report.notes {
        let _ = writeln!(out, "note: {note}");
    }
    let matched = report.instances.iter().filter(|i| i.matches).count();
    let verdict = if report.all_match { "all match" } else { "mismatches found" };
    let _ = writeln!(out, "{matched}/{} instances match: {verdict}", report.instances.len());
    out
}
