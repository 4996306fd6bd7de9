//! The `dcswitch` command line: instance generators, solvers, structure checks
//! and the reduction verification harness.
//!
//! [`run`] takes the argument list and returns the exit code with everything that
//! would be printed, so the binary is a thin wrapper and tests drive it directly.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dcswitch::graphcheck::{self, StructureVerdict, TreeAnnotation};
use dcswitch::io::{self, IoError};
use dcswitch::network::Network;
use dcswitch::oracles::{self, VerificationReport, VerifyError, VerifyOptions};
use dcswitch::rational::{parse_rational, Rational};
use dcswitch::reductions::{self, BuildMode, ConstructionError, GraphInstance, M3daInstance, SchMode, SubsetSumInstance};
use dcswitch::solvers::{self, SearchOptions, SolveError, Strategy, DEFAULT_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Outcome { code, stdout, stderr: String::new() }
    }

    fn err(code: i32, message: impl std::fmt::Display) -> Self {
        Outcome { code, stdout: String::new(), stderr: format!("error: {message}\n") }
    }
}

#[derive(Parser, Debug)]
#[command(name = "dcswitch", version, about = "Line switching in the linear DC power-flow model, computed exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a gadget network and write it as JSON.
    Gen(GenArgs),
    /// Solve a switching problem on a network file.
    Solve(SolveArgs),
    /// Check a structural property of a network file.
    Check(CheckArgs),
    /// Compare a reduction against its brute-force oracle.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, Copy)]
struct ModeArgs {
    /// Use the literal construction parameters instead of the repaired ones.
    #[arg(long, alias = "strict-paper", global = true)]
    strict: bool,
}

impl ModeArgs {
    fn mode(self) -> BuildMode {
        if self.strict {
            BuildMode::Literal
        } else {
            BuildMode::Repaired
        }
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(subcommand)]
    what: GenKind,
    /// Output file for the network (stdout when absent).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Also write the construction report (repairs, id mapping, tree annotation).
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Args, Debug)]
struct SubsetSumArgs {
    /// Elements of M, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    set: Vec<u64>,
    #[arg(long)]
    target: u64,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Graph file with vertices, edges, a and b.
    #[arg(long, conflicts_with = "edges")]
    graph: Option<PathBuf>,
    /// Inline edges such as `a-c,c-b`; vertices are the endpoints.
    #[arg(long, value_delimiter = ',')]
    edges: Vec<String>,
    #[arg(long, default_value = "a")]
    a: String,
    #[arg(long, default_value = "b")]
    b: String,
}

#[derive(Args, Debug)]
struct M3daArgs {
    /// Instance file with X, Y, W and the cost table d.
    #[arg(long, conflicts_with_all = ["size", "cost"])]
    instance: Option<PathBuf>,
    /// Size of a uniform instance (every triple has the same cost).
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    cost: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    Plain,
    Plus,
    Minus,
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Three-bus switch network with connector size x.
    Sch {
        #[arg(long, value_parser = parse_rational)]
        x: Rational,
        #[arg(long, value_enum, default_value = "plain")]
        variant: Variant,
    },
    /// Cactus network from a subset-sum instance.
    Cactus(SubsetSumArgs),
    /// Two-level tree network from a subset-sum instance.
    Tree2(SubsetSumArgs),
    /// Longest-path gadget for a graph.
    LongestPath(GraphArgs),
    /// Hamiltonian-path gadget for a graph.
    Hamiltonian(GraphArgs),
    /// Assignment gadget.
    M3da(M3daArgs),
    /// Cost-1 slack generators at every load of a generator/load disjoint network.
    Mots {
        #[arg(long)]
        network: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Human,
    Structured,
}

#[derive(Args, Debug, Clone, Copy)]
struct SearchArgs {
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Largest number of switchable lines to search.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Enumerate every switch set instead of branch and bound.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
}

impl SearchArgs {
    fn options(self) -> SearchOptions {
        let strategy = if self.exhaustive { Strategy::Exhaustive } else { Strategy::BranchAndBound };
        SearchOptions { cap: self.cap, strategy, jobs: self.jobs.max(1) }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Problem {
    Feas,
    Msf,
    Ots,
    Mpf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(value_enum)]
    problem: Problem,
    network: PathBuf,
    /// Answer "is MSF >= x" (msf) or "is OTS <= x" (ots) instead of optimizing.
    #[arg(long, value_parser = parse_rational)]
    decision: Option<Rational>,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Property {
    Cactus,
    Degree,
    TreeLevel,
    Euler,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(value_enum)]
    property: Property,
    network: PathBuf,
    /// Tree annotation, or a construction report that contains one.
    #[arg(long)]
    annotation: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Theorem {
    Sch,
    Cacti,
    Tree,
    LongestPath,
    Hamiltonian,
    M3da,
    Mots,
    FeasMsf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    theorem: Theorem,
    /// Connector sizes for sch.
    #[arg(long, value_delimiter = ',', value_parser = parse_rational, default_value = "1,2,5/2")]
    x: Vec<Rational>,
    /// Subset-sum space for cacti and tree: subsets of {1..max-elem}.
    #[arg(long)]
    max_elem: Option<u64>,
    #[arg(long)]
    max_card: Option<usize>,
    #[arg(long)]
    max_target: Option<u64>,
    /// Graph space for longest-path and hamiltonian.
    #[arg(long, default_value_t = 5)]
    max_vertices: usize,
    /// Costs of the 1x1x1 assignment instances.
    #[arg(long, value_delimiter = ',', default_value = "0,1,7")]
    costs: Vec<u64>,
    /// Assignment instance files, used instead of --costs.
    #[arg(long)]
    instance: Vec<PathBuf>,
    /// Random network sampler seed for mots and feas-msf.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Also check MPF <= MSF <= upper bound and witness validity per instance.
    #[arg(long)]
    invariants: bool,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Cap(String),
    Internal(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<ConstructionError> for Failure {
    fn from(e: ConstructionError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::CapExceeded { .. } => Failure::Cap(e.to_string()),
            SolveError::Model(_) => Failure::Usage(e.to_string()),
            SolveError::Lp(_) => Failure::Internal(e.to_string()),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Solve(s) => s.into(),
            VerifyError::Construction(c) => c.into(),
            VerifyError::Oracle(o) => Failure::Usage(o.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<Network, Failure> {
    io::parse_network(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Runs one command line (including the program name) and captures its output.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                Outcome::ok(EXIT_OK, text)
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Check(a) => check(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(o) => o,
        Err(Failure::Usage(m)) => Outcome::err(EXIT_USAGE, m),
        Err(Failure::Cap(m)) => Outcome::err(EXIT_CAP, m),
        Err(Failure::Internal(m)) => Outcome::err(EXIT_INTERNAL, m),
    }
}

fn graph_instance(g: &GraphArgs) -> Result<GraphInstance, Failure> {
    if let Some(path) = &g.graph {
        return Ok(io::parse_graph(&read(path)?)?);
    }
    let mut vertices: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    for e in &g.edges {
        let (x, y) = e.split_once('-').ok_or_else(|| Failure::Usage(format!("edge {e:?} is not of the form u-v")))?;
        for v in [x, y] {
            if !vertices.iter().any(|w| w == v) {
                vertices.push(v.to_string());
            }
        }
        edges.push((x.to_string(), y.to_string()));
    }
    for v in [&g.a, &g.b] {
        if !vertices.contains(v) {
            vertices.push(v.clone());
        }
    }
    Ok(GraphInstance::new(vertices, edges, g.a.clone(), g.b.clone())?)
}

fn m3da_instance(m: &M3daArgs) -> Result<M3daInstance, Failure> {
    match (&m.instance, m.size) {
        (Some(path), _) => Ok(io::parse_m3da(&read(path)?)?),
        (None, Some(n)) if n > 0 => Ok(M3daInstance::uniform(n, |_, _, _| m.cost)),
        _ => Err(Failure::Usage("give --instance FILE or --size N".into())),
    }
}

fn gen(a: GenArgs) -> Result<Outcome, Failure> {
    let mode = a.mode.mode();
    let report = match &a.what {
        GenKind::Sch { x, variant } => {
            let v = match variant {
                Variant::Plain => SchMode::Plain,
                Variant::Plus => SchMode::Plus,
                Variant::Minus => SchMode::Minus,
            };
            reductions::build_sch(x, v, mode)?
        }
        GenKind::Cactus(s) => reductions::build_cactus(&SubsetSumInstance::new(s.set.clone(), s.target)?, mode)?,
        GenKind::Tree2(s) => reductions::build_two_level_tree(&SubsetSumInstance::new(s.set.clone(), s.target)?, mode)?,
        GenKind::LongestPath(g) => reductions::build_longest_path(&graph_instance(g)?, mode)?,
        GenKind::Hamiltonian(g) => reductions::build_hamiltonian(&graph_instance(g)?, mode)?,
        GenKind::M3da(m) => reductions::build_m3da(&m3da_instance(m)?, mode)?,
        GenKind::Mots { network } => reductions::msf_to_ots(&load_network(network)?)?,
    };
    let text = io::write_network(&report.network);
    if let Some(path) = &a.report {
        write(path, &io::pretty(&report))?;
    }
    match &a.output {
        Some(path) => {
            write(path, &text)?;
            let n = &report.network;
            let repairs = if report.repairs.is_empty() { String::new() } else { format!(", {} repairs", report.repairs.len()) };
            Ok(Outcome::ok(
                EXIT_OK,
                format!("{}: {} buses, {} lines{repairs}\n", report.construction, n.buses().len(), n.lines().len()),
            ))
        }
        None => Ok(Outcome::ok(EXIT_OK, text)),
    }
}

#[derive(Serialize)]
struct Decision<'a> {
    problem: &'a str,
    threshold: String,
    answer: bool,
}

fn solve(a: SolveArgs) -> Result<Outcome, Failure> {
    let net = load_network(&a.network)?;
    let opts = a.search.options();
    let structured = a.search.format == Format::Structured;
    if let Some(x) = &a.decision {
        let (name, answer, question) = match a.problem {
            Problem::Msf => ("msf", solvers::decide_msf(&net, x, &opts)?, ">="),
            Problem::Ots => ("ots", solvers::decide_ots(&net, x, &opts)?, "<="),
            _ => return Err(Failure::Usage("--decision applies to msf and ots".into())),
        };
        let threshold = dcswitch::rational::format_rational(x);
        let text = if structured {
            io::pretty(&Decision { problem: name, threshold, answer })
        } else {
            format!("{name} {question} {threshold}: {}\n", if answer { "yes" } else { "no" })
        };
        return Ok(Outcome::ok(if answer { EXIT_OK } else { EXIT_NO }, text));
    }
    let (name, r) = match a.problem {
        Problem::Feas => ("feas", solvers::solve_feas(&net, &opts)?),
        Problem::Msf => ("msf", solvers::solve_msf(&net, &opts)?),
        Problem::Ots => ("ots", solvers::solve_ots(&net, &opts)?),
        Problem::Mpf => ("mpf", solvers::solve_mpf(&net)?),
    };
    let code = if r.is_feasible() { EXIT_OK } else { EXIT_NO };
    let text = if structured { io::pretty(&r) } else { io::render_solve(name, &r) };
    Ok(Outcome::ok(code, text))
}

fn load_annotation(path: &Path) -> Result<TreeAnnotation, Failure> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let inner = match value.get("annotation") {
        Some(a) => a.clone(),
        None => value,
    };
    serde_json::from_value(inner).map_err(|e| Failure::Usage(format!("{}: no tree annotation: {e}", path.display())))
}

fn render_verdict(v: &StructureVerdict) -> String {
    let mut out = format!("{}: {}\n", v.predicate, if v.holds { "yes" } else { "no" });
    if let Some(w) = &v.witness {
        let json = serde_json::to_string(w).expect("plain data serializes");
        out.push_str(&format!("witness: {json}\n"));
    }
    out
}

fn check(a: CheckArgs) -> Result<Outcome, Failure> {
    let net = load_network(&a.network)?;
    let structured = a.format == Format::Structured;
    let verdict = match a.property {
        Property::Degree => {
            let d = graphcheck::max_degree(&net);
            let text = if structured { io::pretty(&serde_json::json!({ "max_degree": d })) } else { format!("max degree {d}\n") };
            return Ok(Outcome::ok(EXIT_OK, text));
        }
        Property::Cactus => graphcheck::is_cactus(&net),
        Property::Euler => graphcheck::euler_verdict(&net),
        Property::TreeLevel => {
            let path = a.annotation.as_ref().ok_or_else(|| Failure::Usage("tree-level needs --annotation".into()))?;
            let ann = load_annotation(path)?;
            graphcheck::validate_level_tree(&net, &ann, a.levels).map_err(|e| Failure::Usage(e.to_string()))?
        }
    };
    let text = if structured { io::pretty(&verdict) } else { render_verdict(&verdict) };
    Ok(Outcome::ok(if verdict.holds { EXIT_OK } else { EXIT_NO }, text))
}

/// Instances used by `verify tree` when no space is given.
pub fn default_tree_instances() -> Vec<SubsetSumInstance> {
    [(vec![2, 1, 3], 5), (vec![2], 1), (vec![1, 3], 2), (vec![2, 4], 3)]
        .into_iter()
        .map(|(m, w)| SubsetSumInstance::new(m, w).expect("valid instance"))
        .collect()
}

fn verify(a: VerifyArgs) -> Result<Outcome, Failure> {
    let opts = VerifyOptions {
        mode: a.mode.mode(),
        search: a.search.options(),
        jobs: a.search.jobs.max(1),
        invariants: a.invariants,
    };
    let space = |elem: u64, card: usize, target: u64| {
        oracles::subset_sum_space(a.max_elem.unwrap_or(elem), a.max_card.unwrap_or(card), a.max_target.unwrap_or(target))
    };
    let report: VerificationReport = match a.theorem {
        Theorem::Sch => oracles::verify_sch(&a.x, &opts)?,
        Theorem::Cacti => oracles::verify_cacti(&space(4, 3, 6), &opts)?,
        Theorem::Tree => {
            let given = a.max_elem.is_some() || a.max_card.is_some() || a.max_target.is_some();
            let instances = if given { space(3, 3, 6) } else { default_tree_instances() };
            oracles::verify_tree(&instances, &opts)?
        }
        Theorem::LongestPath => oracles::verify_longest_path(&oracles::graph_space(a.max_vertices), &opts)?,
        Theorem::Hamiltonian => oracles::verify_hamiltonian(&oracles::graph_space(a.max_vertices), &opts)?,
        Theorem::M3da => {
            let instances = if a.instance.is_empty() {
                a.costs.iter().map(|&d| M3daInstance::uniform(1, |_, _, _| d)).collect()
            } else {
                a.instance.iter().map(|p| Ok(io::parse_m3da(&read(p)?)?)).collect::<Result<Vec<_>, Failure>>()?
            };
            oracles::verify_m3da(&instances, &opts)?
        }
        Theorem::Mots => oracles::verify_mots(&oracles::random_networks(a.seed, a.count), &opts)?,
        Theorem::FeasMsf => oracles::verify_feas_msf(&oracles::random_networks(a.seed, a.count), &opts)?,
    };
    let ok = report.all_match && report.invariants_hold();
    let text = if a.search.format == Format::Structured { io::pretty(&report) } else { io::render_report(&report) };
    Ok(Outcome::ok(if ok { EXIT_OK } else { EXIT_MISMATCH }, text))
}
