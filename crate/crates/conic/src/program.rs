//! Solver-agnostic description of a linear + second-order-cone program.
//!
//! Every constraint is written over affine expressions of the decision
//! vector, so a modelling layer can state `‖(φ, Re{hᴴw})‖ ≤ ...` without
//! introducing copy variables. The program is always a *maximization*.

use std::collections::HashMap;
use std::fmt;

use crate::error::ProgramError;

/// `Σ coef·x[index] + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn var(index: usize) -> Self {
        Self::term(index, 1.0)
    }

    pub fn term(index: usize, coef: f64) -> Self {
        Self {
            terms: vec![(index, coef)],
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, index: usize, coef: f64) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((index, coef));
        }
        self
    }

    pub fn with_term(mut self, index: usize, coef: f64) -> Self {
        self.add_term(index, coef);
        self
    }

    pub fn add_constant(&mut self, value: f64) -> &mut Self {
        self.constant += value;
        self
    }

    pub fn with_constant(mut self, value: f64) -> Self {
        self.constant += value;
        self
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &AffineExpr, scale: f64) -> &mut Self {
        for &(j, a) in &other.terms {
            self.add_term(j, scale * a);
        }
        self.constant += scale * other.constant;
        self
    }

    pub fn scaled(&self, scale: f64) -> Self {
        let mut out = AffineExpr::zero();
        out.add_scaled(self, scale);
        out
    }

    /// Sorts terms by index, merges duplicates and drops exact zeros.
    pub fn normalize(&mut self) {
        if self.terms.len() > 1 {
            self.terms.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
            for &(j, a) in &self.terms {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += a,
                    _ => merged.push((j, a)),
                }
            }
            self.terms = merged;
        }
        self.terms.retain(|&(_, a)| a != 0.0);
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(j, a)| acc + a * x[j])
    }

    fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|&(j, _)| j)
    }
}

/// `lower ≤ expr ≤ upper`; either bound may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub expr: AffineExpr,
    pub lower: f64,
    pub upper: f64,
}

impl LinearConstraint {
    pub fn at_least(expr: AffineExpr, lower: f64) -> Self {
        Self {
            expr,
            lower,
            upper: f64::INFINITY,
        }
    }

    pub fn at_most(expr: AffineExpr, upper: f64) -> Self {
        Self {
            expr,
            lower: f64::NEG_INFINITY,
            upper,
        }
    }

    pub fn between(expr: AffineExpr, lower: f64, upper: f64) -> Self {
        Self { expr, lower, upper }
    }

    pub fn equal(expr: AffineExpr, value: f64) -> Self {
        Self {
            expr,
            lower: value,
            upper: value,
        }
    }

    /// Positive when violated.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let v = self.expr.eval(x);
        (self.lower - v).max(v - self.upper).max(0.0)
    }
}

/// `‖body‖₂ ≤ head`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderCone {
    pub head: AffineExpr,
    pub body: Vec<AffineExpr>,
}

impl SecondOrderCone {
    pub fn violation(&self, x: &[f64]) -> f64 {
        let norm = self
            .body
            .iter()
            .map(|e| e.eval(x).powi(2))
            .sum::<f64>()
            .sqrt();
        (norm - self.head.eval(x)).max(0.0)
    }
}

/// `2·u·v ≥ ‖body‖₂²` with `u, v ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedCone {
    pub u: AffineExpr,
    pub v: AffineExpr,
    pub body: Vec<AffineExpr>,
}

impl RotatedCone {
    /// Residual of the equivalent standard cone
    /// `‖(body, (u−v)/√2)‖ ≤ (u+v)/√2`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let u = self.u.eval(x);
        let v = self.v.eval(x);
        let sq: f64 = self.body.iter().map(|e| e.eval(x).powi(2)).sum::<f64>()
            + 0.5 * (u - v).powi(2);
        (sq.sqrt() - (u + v) / std::f64::consts::SQRT_2).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRole {
    /// A decision variable of the underlying optimization model.
    Decision,
    /// An epigraph variable introduced to make a term conic.
    Epigraph,
    /// Modelling helper with no meaning outside the program.
    Internal,
}

impl VarRole {
    pub fn as_str(self) -> &'static str {
        match self {
            VarRole::Decision => "decision",
            VarRole::Epigraph => "epigraph",
            VarRole::Internal => "internal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "decision" => Some(VarRole::Decision),
            "epigraph" => Some(VarRole::Epigraph),
            "internal" => Some(VarRole::Internal),
            _ => None,
        }
    }
}

/// A family of variables registered under one symbol, e.g. all `w_k^g`.
///
/// The block holds `count` entries of `entry_len` reals each. For complex
/// entries the first half of an entry is the real part and the second half
/// the imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct VarBlock {
    pub name: String,
    pub role: VarRole,
    pub complex: bool,
    pub start: usize,
    pub count: usize,
    pub entry_len: usize,
}

impl VarBlock {
    pub fn len(&self) -> usize {
        self.count * self.entry_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, entry: usize, offset: usize) -> usize {
        debug_assert!(entry < self.count && offset < self.entry_len);
        self.start + entry * self.entry_len + offset
    }

    /// Scalar count in the model's own convention: a complex entry of
    /// length `2N` counts as `N` scalars.
    pub fn model_scalars(&self) -> usize {
        if self.complex {
            self.len() / 2
        } else {
            self.len()
        }
    }
}

/// Named handle → index-range registry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarMap {
    blocks: Vec<VarBlock>,
    by_name: HashMap<String, usize>,
    next: usize,
}

impl VarMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a new contiguous block. Panics on duplicate names, which is
    /// a programming error in the caller.
    pub fn register(
        &mut self,
        name: &str,
        role: VarRole,
        complex: bool,
        count: usize,
        entry_len: usize,
    ) -> VarBlock {
        assert!(
            !self.by_name.contains_key(name),
            "variable block `{name}` registered twice"
        );
        let block = VarBlock {
            name: name.to_owned(),
            role,
            complex,
            start: self.next,
            count,
            entry_len,
        };
        self.next += block.len();
        self.by_name.insert(name.to_owned(), self.blocks.len());
        self.blocks.push(block.clone());
        block
    }

    pub(crate) fn push_block(&mut self, block: VarBlock) -> Result<(), ProgramError> {
        if self.by_name.contains_key(&block.name) {
            return Err(ProgramError::DuplicateBlock(block.name));
        }
        self.next = self.next.max(block.start + block.len());
        self.by_name.insert(block.name.clone(), self.blocks.len());
        self.blocks.push(block);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&VarBlock> {
        self.by_name.get(name).map(|&i| &self.blocks[i])
    }

    pub fn blocks(&self) -> &[VarBlock] {
        &self.blocks
    }

    pub fn total_len(&self) -> usize {
        self.next
    }

    pub fn count_role(&self, role: VarRole) -> usize {
        self.blocks
            .iter()
            .filter(|b| b.role == role)
            .map(VarBlock::model_scalars)
            .sum()
    }
}

/// A linear objective maximized over linear and second-order-cone constraints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConicProgram {
    pub n_vars: usize,
    /// Dense objective coefficients (length `n_vars`), maximized.
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub equalities: Vec<LinearConstraint>,
    pub inequalities: Vec<LinearConstraint>,
    pub socs: Vec<SecondOrderCone>,
    pub rotated: Vec<RotatedCone>,
    pub var_map: VarMap,
}

impl ConicProgram {
    pub fn new(var_map: VarMap) -> Self {
        let n = var_map.total_len();
        Self {
            n_vars: n,
            objective: vec![0.0; n],
            var_map,
            ..Default::default()
        }
    }

    pub fn add_objective(&mut self, expr: &AffineExpr, scale: f64) {
        for &(j, a) in &expr.terms {
            self.objective[j] += scale * a;
        }
        self.objective_constant += scale * expr.constant;
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .fold(self.objective_constant, |acc, (c, v)| acc + c * v)
    }

    pub fn add_equality(&mut self, c: LinearConstraint) {
        self.equalities.push(c);
    }

    pub fn add_inequality(&mut self, c: LinearConstraint) {
        self.inequalities.push(c);
    }

    pub fn add_soc(&mut self, cone: SecondOrderCone) {
        self.socs.push(cone);
    }

    pub fn add_rotated(&mut self, cone: RotatedCone) {
        self.rotated.push(cone);
    }

    /// Largest violation over all constraints at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = self.equalities.iter().map(|c| c.violation(x));
        let ineq = self.inequalities.iter().map(|c| c.violation(x));
        let soc = self.socs.iter().map(|c| c.violation(x));
        let rot = self.rotated.iter().map(|c| {
            let u = c.u.eval(x);
            let v = c.v.eval(x);
            c.violation(x).max(-u).max(-v)
        });
        eq.chain(ineq).chain(soc).chain(rot).fold(0.0, f64::max)
    }

    /// Normalizes every expression (sorted, merged terms).
    pub fn normalize(&mut self) {
        for c in self.equalities.iter_mut().chain(self.inequalities.iter_mut()) {
            c.expr.normalize();
        }
        for c in &mut self.socs {
            c.head.normalize();
            c.body.iter_mut().for_each(AffineExpr::normalize);
        }
        for c in &mut self.rotated {
            c.u.normalize();
            c.v.normalize();
            c.body.iter_mut().for_each(AffineExpr::normalize);
        }
    }

    /// Checks the structural invariants a solver relies on.
    pub fn validate(&self) -> Result<(), ProgramError> {
        if self.objective.len() != self.n_vars {
            return Err(ProgramError::ObjectiveLength {
                expected: self.n_vars,
                found: self.objective.len(),
            });
        }
        if self.var_map.total_len() > self.n_vars {
            return Err(ProgramError::VarMapOverflow {
                mapped: self.var_map.total_len(),
                n_vars: self.n_vars,
            });
        }
        check_var_map(&self.var_map)?;
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(ProgramError::NonFinite(format!("objective[{j}]")));
        }
        if !self.objective_constant.is_finite() {
            return Err(ProgramError::NonFinite("objective constant".into()));
        }
        for (i, c) in self.equalities.iter().enumerate() {
            let at = || format!("equality {i}");
            self.check_expr(&c.expr, &at)?;
            if !c.lower.is_finite() || c.lower != c.upper {
                return Err(ProgramError::BadBounds(at()));
            }
        }
        for (i, c) in self.inequalities.iter().enumerate() {
            let at = || format!("inequality {i}");
            self.check_expr(&c.expr, &at)?;
            if c.lower.is_nan() || c.upper.is_nan() || c.lower > c.upper {
                return Err(ProgramError::BadBounds(at()));
            }
            if c.lower == f64::INFINITY || c.upper == f64::NEG_INFINITY {
                return Err(ProgramError::BadBounds(at()));
            }
        }
        for (i, c) in self.socs.iter().enumerate() {
            let at = || format!("soc {i}");
            if c.body.is_empty() {
                return Err(ProgramError::EmptyCone(at()));
            }
            self.check_expr(&c.head, &at)?;
            for e in &c.body {
                self.check_expr(e, &at)?;
            }
            check_disjoint([&c.head].into_iter(), c.body.iter(), &at)?;
        }
        for (i, c) in self.rotated.iter().enumerate() {
            let at = || format!("rotated soc {i}");
            if c.body.is_empty() {
                return Err(ProgramError::EmptyCone(at()));
            }
            self.check_expr(&c.u, &at)?;
            self.check_expr(&c.v, &at)?;
            for e in &c.body {
                self.check_expr(e, &at)?;
            }
            check_disjoint([&c.u, &c.v].into_iter(), c.body.iter(), &at)?;
        }
        Ok(())
    }

    fn check_expr(&self, e: &AffineExpr, at: &dyn Fn() -> String) -> Result<(), ProgramError> {
        if !e.constant.is_finite() {
            return Err(ProgramError::NonFinite(at()));
        }
        let mut seen: Vec<usize> = Vec::with_capacity(e.terms.len());
        for &(j, a) in &e.terms {
            if j >= self.n_vars {
                return Err(ProgramError::IndexOutOfRange {
                    location: at(),
                    index: j,
                    n_vars: self.n_vars,
                });
            }
            if !a.is_finite() {
                return Err(ProgramError::NonFinite(at()));
            }
            seen.push(j);
        }
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(ProgramError::DuplicateIndex(at()));
        }
        Ok(())
    }

    /// Headline counts used in census checks and logs.
    pub fn census(&self) -> ProgramCensus {
        ProgramCensus {
            n_vars: self.n_vars,
            decision_scalars: self.var_map.count_role(VarRole::Decision),
            epigraph_scalars: self.var_map.count_role(VarRole::Epigraph),
            internal_scalars: self.var_map.count_role(VarRole::Internal),
            equalities: self.equalities.len(),
            inequalities: self.inequalities.len(),
            socs: self.socs.len(),
            rotated: self.rotated.len(),
        }
    }
}

fn check_var_map(map: &VarMap) -> Result<(), ProgramError> {
    let mut ranges: Vec<(usize, usize, &str)> = map
        .blocks()
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| (b.start, b.start + b.len(), b.name.as_str()))
        .collect();
    ranges.sort_unstable();
    for w in ranges.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(ProgramError::OverlappingBlocks(
                w[0].2.to_owned(),
                w[1].2.to_owned(),
            ));
        }
    }
    for b in map.blocks() {
        if b.complex && b.entry_len % 2 != 0 {
            return Err(ProgramError::OddComplexBlock(b.name.clone()));
        }
    }
    Ok(())
}

fn check_disjoint<'a>(
    heads: impl Iterator<Item = &'a AffineExpr>,
    body: impl Iterator<Item = &'a AffineExpr>,
    at: &dyn Fn() -> String,
) -> Result<(), ProgramError> {
    let mut head_vars: Vec<usize> = heads.flat_map(|e| e.variables()).collect();
    head_vars.sort_unstable();
    for e in body {
        if e.variables().any(|j| head_vars.binary_search(&j).is_ok()) {
            return Err(ProgramError::HeadInBody(at()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProgramCensus {
    pub n_vars: usize,
    pub decision_scalars: usize,
    pub epigraph_scalars: usize,
    pub internal_scalars: usize,
    pub equalities: usize,
    pub inequalities: usize,
    pub socs: usize,
    pub rotated: usize,
}

impl ProgramCensus {
    pub fn constraints(&self) -> usize {
        self.equalities + self.inequalities + self.socs + self.rotated
    }
}

impl fmt::Display for ProgramCensus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} vars ({} decision, {} epigraph, {} internal); {} eq, {} ineq, {} soc, {} rsoc",
            self.n_vars,
            self.decision_scalars,
            self.epigraph_scalars,
            self.internal_scalars,
            self.equalities,
            self.inequalities,
            self.socs,
            self.rotated
        )
    }
}
