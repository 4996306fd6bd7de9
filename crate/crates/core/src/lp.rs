//! Exact linear programming over rationals.
//!
//! A dense two-phase primal simplex with implicit variable bounds and Bland's
//! smallest-index rule for both the entering and the leaving variable. Every
//! constraint row becomes `a.x - y = 0` with a bounded row variable `y`, and rows
//! sharing the same left-hand side are merged into one ranged row first, so the
//! paired capacity inequalities `-c <= s*dtheta <= c` cost a single row.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, ExtRational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("duplicate variable name {0:?}")]
    DuplicateVariable(String),
    #[error("unknown variable index {0}")]
    UnknownVariable(usize),
    #[error("constraint {0} has an infinite right-hand side")]
    InfiniteRhs(usize),
    #[error("variable {0:?} has lower bound above upper bound")]
    EmptyDomain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    /// `None` is minus infinity.
    pub lower: Option<Rational>,
    /// `None` is plus infinity.
    pub upper: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub terms: Vec<(VarId, Rational)>,
    pub relation: Relation,
    pub rhs: ExtRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    variables: Vec<Variable>,
    names: HashMap<String, VarId>,
    constraints: Vec<Constraint>,
    sense: Sense,
    objective: Vec<(VarId, Rational)>,
}

impl Default for LinearProgram {
    fn default() -> Self {
        LinearProgram::new(Sense::Minimize)
    }
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram { variables: Vec::new(), names: HashMap::new(), constraints: Vec::new(), sense, objective: Vec::new() }
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: Option<Rational>,
        upper: Option<Rational>,
    ) -> Result<VarId, LpError> {
        let name = name.into();
        if self.names.contains_key(&name) {
            return Err(LpError::DuplicateVariable(name));
        }
        if let (Some(l), Some(u)) = (&lower, &upper) {
            if l > u {
                return Err(LpError::EmptyDomain(name));
            }
        }
        let id = VarId(self.variables.len());
        self.names.insert(name.clone(), id);
        self.variables.push(Variable { name, lower, upper });
        Ok(id)
    }

    pub fn add_constraint(&mut self, terms: Vec<(VarId, Rational)>, relation: Relation, rhs: impl Into<ExtRational>) {
        self.constraints.push(Constraint { terms, relation, rhs: rhs.into() });
    }

    pub fn set_objective(&mut self, sense: Sense, terms: Vec<(VarId, Rational)>) {
        self.sense = sense;
        self.objective = terms;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[(VarId, Rational)] {
        &self.objective
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn objective_value(&self, assignment: &[Rational]) -> Rational {
        self.objective.iter().fold(Rational::zero(), |acc, (v, c)| acc + c * &assignment[v.0])
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.variables.len();
        let check = |terms: &[(VarId, Rational)]| {
            terms.iter().find(|(v, _)| v.0 >= n).map_or(Ok(()), |(v, _)| Err(LpError::UnknownVariable(v.0)))
        };
        check(&self.objective)?;
        for (i, c) in self.constraints.iter().enumerate() {
            check(&c.terms)?;
            if c.rhs.is_infinite() {
                return Err(LpError::InfiniteRhs(i));
            }
        }
        Ok(())
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let expr = |terms: &[(VarId, Rational)]| {
            if terms.is_empty() {
                return "0".to_string();
            }
            terms
                .iter()
                .map(|(v, c)| format!("{} {}", format_rational(c), self.variables[v.0].name))
                .collect::<Vec<_>>()
                .join(" + ")
        };
        let sense = match self.sense {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        };
        writeln!(f, "{sense} {}", expr(&self.objective))?;
        for c in &self.constraints {
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            writeln!(f, "  {} {rel} {}", expr(&c.terms), c.rhs)?;
        }
        for v in &self.variables {
            let lo = v.lower.as_ref().map_or("-inf".into(), format_rational);
            let hi = v.upper.as_ref().map_or("inf".into(), format_rational);
            writeln!(f, "  {lo} <= {} <= {hi}", v.name)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, assignment: Vec<Rational> },
    Infeasible,
    /// A feasible point and a direction along which the objective improves without bound.
    Unbounded { point: Vec<Rational>, ray: Vec<Rational> },
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn assignment(&self) -> Option<&[Rational]> {
        match self {
            LpOutcome::Optimal { assignment, .. } => Some(assignment),
            _ => None,
        }
    }
}

/// Assignment keyed by variable name.
pub fn named_assignment(lp: &LinearProgram, assignment: &[Rational]) -> BTreeMap<String, Rational> {
    lp.variables.iter().zip(assignment).map(|(v, x)| (v.name.clone(), x.clone())).collect()
}

/// True iff `assignment` satisfies every bound and constraint of `lp` exactly.
pub fn assert_solution(lp: &LinearProgram, assignment: &[Rational]) -> bool {
    if assignment.len() != lp.variables.len() {
        return false;
    }
    for (v, x) in lp.variables.iter().zip(assignment) {
        if v.lower.as_ref().is_some_and(|l| x < l) || v.upper.as_ref().is_some_and(|u| x > u) {
            return false;
        }
    }
    lp.constraints.iter().all(|c| {
        let Some(rhs) = c.rhs.finite() else { return false };
        let Some(lhs) = c.terms.iter().try_fold(Rational::zero(), |acc, (v, k)| {
            assignment.get(v.0).map(|x| acc + k * x)
        }) else {
            return false;
        };
        match c.relation {
            Relation::Le => lhs <= *rhs,
            Relation::Ge => lhs >= *rhs,
            Relation::Eq => lhs == *rhs,
        }
    })
}

/// Solves `lp` exactly.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let Some(mut tableau) = Tableau::build(lp) else {
        return Ok(LpOutcome::Infeasible);
    };
    Ok(tableau.solve(lp))
}

/// Row data after merging constraints with identical left-hand sides.
struct RangedRow {
    terms: Vec<(usize, Rational)>,
    lower: Option<Rational>,
    upper: Option<Rational>,
}

fn merge_rows(lp: &LinearProgram) -> Option<Vec<RangedRow>> {
    let mut rows: Vec<RangedRow> = Vec::new();
    let mut index: HashMap<Vec<(usize, Rational)>, usize> = HashMap::new();
    for c in &lp.constraints {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (v, k) in &c.terms {
            *acc.entry(v.0).or_insert_with(Rational::zero) += k;
        }
        let terms: Vec<(usize, Rational)> = acc.into_iter().filter(|(_, k)| !k.is_zero()).collect();
        let rhs = c.rhs.finite().expect("validated").clone();
        let (lo, hi) = match c.relation {
            Relation::Le => (None, Some(rhs)),
            Relation::Ge => (Some(rhs), None),
            Relation::Eq => (Some(rhs.clone()), Some(rhs)),
        };
        if terms.is_empty() {
            let zero = Rational::zero();
            if lo.is_some_and(|l| l > zero) || hi.is_some_and(|h| h < zero) {
                return None;
            }
            continue;
        }
        match index.get(&terms) {
            Some(&i) => {
                let row = &mut rows[i];
                if let Some(l) = lo {
                    if row.lower.as_ref().is_none_or(|cur| l > *cur) {
                        row.lower = Some(l);
                    }
                }
                if let Some(h) = hi {
                    if row.upper.as_ref().is_none_or(|cur| h < *cur) {
                        row.upper = Some(h);
                    }
                }
            }
            None => {
                index.insert(terms.clone(), rows.len());
                rows.push(RangedRow { terms, lower: lo, upper: hi });
            }
        }
    }
    for row in &rows {
        if let (Some(l), Some(u)) = (&row.lower, &row.upper) {
            if l > u {
                return None;
            }
        }
    }
    Some(rows)
}

struct Tableau {
    /// Columns: structural variables, then one row variable per row, then artificials.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    lower: Vec<Option<Rational>>,
    upper: Vec<Option<Rational>>,
    value: Vec<Rational>,
    n_struct: usize,
    n_artificial: usize,
}

enum Step {
    Optimal,
    Unbounded { ray: Vec<Rational> },
    Pivoted,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Option<Tableau> {
        let ranged = merge_rows(lp)?;
        let n = lp.variables.len();
        let m = ranged.len();

        let mut lower: Vec<Option<Rational>> = lp.variables.iter().map(|v| v.lower.clone()).collect();
        let mut upper: Vec<Option<Rational>> = lp.variables.iter().map(|v| v.upper.clone()).collect();
        for r in &ranged {
            lower.push(r.lower.clone());
            upper.push(r.upper.clone());
        }

        let mut value: Vec<Rational> = (0..n + m).map(|j| resting_value(&lower[j], &upper[j])).collect();

        // Row activity at the starting point decides whether the row variable can be
        // basic or the row needs an artificial.
        let mut artificial_rows = Vec::new();
        let mut basis = Vec::with_capacity(m);
        for (i, r) in ranged.iter().enumerate() {
            let activity = r.terms.iter().fold(Rational::zero(), |acc, (j, k)| acc + k * &value[*j]);
            let y = n + i;
            let below = lower[y].as_ref().is_some_and(|l| activity < *l);
            let above = upper[y].as_ref().is_some_and(|u| activity > *u);
            if below || above {
                value[y] = if below { lower[y].clone().unwrap() } else { upper[y].clone().unwrap() };
                artificial_rows.push((i, activity - &value[y]));
                basis.push(usize::MAX);
            } else {
                value[y] = activity;
                basis.push(y);
            }
        }

        let n_artificial = artificial_rows.len();
        let width = n + m + n_artificial;
        let mut rows = vec![vec![Rational::zero(); width]; m];
        for (i, r) in ranged.iter().enumerate() {
            for (j, k) in &r.terms {
                rows[i][*j] = k.clone();
            }
            rows[i][n + i] = -Rational::one();
        }
        for (k, (i, residual)) in artificial_rows.iter().enumerate() {
            // a.x - y + sigma*z = 0 with z = |residual| >= 0
            let col = n + m + k;
            let sigma = if residual.is_positive() { -Rational::one() } else { Rational::one() };
            rows[*i][col] = sigma;
            value.push(residual.abs());
            lower.push(Some(Rational::zero()));
            upper.push(None);
            basis[*i] = col;
        }
        // Scale each row so its basic column is +1.
        for (i, row) in rows.iter_mut().enumerate() {
            let pivot = row[basis[i]].clone();
            if pivot != Rational::one() {
                for x in row.iter_mut().filter(|x| !x.is_zero()) {
                    *x /= &pivot;
                }
            }
        }
        let mut is_basic = vec![false; width];
        for &b in &basis {
            is_basic[b] = true;
        }
        Some(Tableau { rows, basis, is_basic, lower, upper, value, n_struct: n, n_artificial })
    }

    fn width(&self) -> usize {
        self.lower.len()
    }

    fn solve(&mut self, lp: &LinearProgram) -> LpOutcome {
        if self.n_artificial > 0 {
            let first_art = self.width() - self.n_artificial;
            let mut cost = vec![Rational::zero(); self.width()];
            for c in cost.iter_mut().skip(first_art) {
                *c = Rational::one();
            }
            loop {
                match self.iterate(&cost, None) {
                    Step::Pivoted => continue,
                    Step::Optimal => break,
                    Step::Unbounded { .. } => unreachable!("phase one is bounded below by zero"),
                }
            }
            if self.value[first_art..].iter().any(|z| !z.is_zero()) {
                return LpOutcome::Infeasible;
            }
            // Artificials are pinned at zero from here on.
            for j in first_art..self.width() {
                self.upper[j] = Some(Rational::zero());
            }
        }

        let mut cost = vec![Rational::zero(); self.width()];
        let flip = lp.sense == Sense::Maximize;
        for (v, k) in &lp.objective {
            cost[v.0] += if flip { -k.clone() } else { k.clone() };
        }
        loop {
            match self.iterate(&cost, Some(self.width() - self.n_artificial)) {
                Step::Pivoted => continue,
                Step::Optimal => break,
                Step::Unbounded { ray } => {
                    let point = self.value[..self.n_struct].to_vec();
                    return LpOutcome::Unbounded { point, ray };
                }
            }
        }
        let assignment = self.value[..self.n_struct].to_vec();
        LpOutcome::Optimal { value: lp.objective_value(&assignment), assignment }
    }

    /// One simplex iteration minimizing `cost . x`; columns at or beyond `limit` never enter.
    fn iterate(&mut self, cost: &[Rational], limit: Option<usize>) -> Step {
        let limit = limit.unwrap_or(self.width());
        // Entering: smallest index with an improving reduced cost and room to move.
        let mut entering = None;
        for j in 0..limit {
            if self.is_basic[j] {
                continue;
            }
            let mut d = cost[j].clone();
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[j];
                if !a.is_zero() {
                    let cb = &cost[self.basis[i]];
                    if !cb.is_zero() {
                        d -= cb * a;
                    }
                }
            }
            if d.is_negative() && self.upper[j].as_ref().is_none_or(|u| self.value[j] < *u) {
                entering = Some((j, true));
                break;
            }
            if d.is_positive() && self.lower[j].as_ref().is_none_or(|l| self.value[j] > *l) {
                entering = Some((j, false));
                break;
            }
        }
        let Some((q, increase)) = entering else {
            return Step::Optimal;
        };

        // Ratio test. Basic variable in row i moves at rate -T[i][q] * dir.
        let mut best: Option<(Rational, Option<usize>)> = if increase {
            self.upper[q].as_ref().map(|u| (u - &self.value[q], None))
        } else {
            self.lower[q].as_ref().map(|l| (&self.value[q] - l, None))
        };
        for (i, row) in self.rows.iter().enumerate() {
            let a = &row[q];
            if a.is_zero() {
                continue;
            }
            let b = self.basis[i];
            let rate_down = if increase { a.is_positive() } else { a.is_negative() };
            let limit = if rate_down {
                self.lower[b].as_ref().map(|l| (&self.value[b] - l) / a.abs())
            } else {
                self.upper[b].as_ref().map(|u| (u - &self.value[b]) / a.abs())
            };
            let Some(t) = limit else { continue };
            let better = match &best {
                None => true,
                Some((bt, None)) => t < *bt,
                Some((bt, Some(bi))) => t < *bt || (t == *bt && b < self.basis[*bi]),
            };
            if better {
                best = Some((t, Some(i)));
            }
        }
        let Some((step, leaving)) = best else {
            let mut ray = vec![Rational::zero(); self.n_struct];
            let dir = if increase { Rational::one() } else { -Rational::one() };
            if q < self.n_struct {
                ray[q] = dir.clone();
            }
            for (i, row) in self.rows.iter().enumerate() {
                if self.basis[i] < self.n_struct && !row[q].is_zero() {
                    ray[self.basis[i]] = -&row[q] * &dir;
                }
            }
            return Step::Unbounded { ray };
        };

        if !step.is_zero() {
            let delta = if increase { step.clone() } else { -step.clone() };
            self.value[q] += &delta;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][q];
                if !a.is_zero() {
                    let b = self.basis[i];
                    let change = a * &delta;
                    self.value[b] -= change;
                }
            }
        }
        if let Some(p) = leaving {
            let out = self.basis[p];
            // Snap the leaving variable onto the bound it reached.
            let a = &self.rows[p][q];
            let rate_down = if increase { a.is_positive() } else { a.is_negative() };
            self.value[out] = if rate_down { self.lower[out].clone() } else { self.upper[out].clone() }
                .expect("blocking bound is finite");
            self.pivot(p, q);
        }
        Step::Pivoted
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let pivot = self.rows[p][q].clone();
        if pivot != Rational::one() {
            for x in self.rows[p].iter_mut().filter(|x| !x.is_zero()) {
                *x /= &pivot;
            }
        }
        let nz: Vec<usize> = (0..self.rows[p].len()).filter(|&j| !self.rows[p][j].is_zero()).collect();
        let pivot_row = std::mem::take(&mut self.rows[p]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p || row[q].is_zero() {
                continue;
            }
            let factor = row[q].clone();
            for &j in &nz {
                let delta = &factor * &pivot_row[j];
                row[j] -= delta;
            }
        }
        self.rows[p] = pivot_row;
        self.is_basic[self.basis[p]] = false;
        self.is_basic[q] = true;
        self.basis[p] = q;
    }
}

/// Starting value of a nonbasic variable: its lower bound, else upper, else zero.
fn resting_value(lower: &Option<Rational>, upper: &Option<Rational>) -> Rational {
    match (lower, upper) {
        (Some(l), _) => l.clone(),
        (None, Some(u)) if u.is_negative() => u.clone(),
        _ => Rational::zero(),
    }
}
