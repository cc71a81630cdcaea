//! Plain-text dump of a [`ConicProgram`] for external cross-checking.
//!
//! Line-oriented, whitespace separated, `#` starts a comment line. The
//! first record is the header `fdgroup-conic 1`, the last is `end`.
//! Indices are zero based; rows and cones are numbered in declaration order
//! and must be declared before any triplet refers to them.
//!
//! ```text
//! fdgroup-conic 1
//! vars <n>
//! var <name> <decision|epigraph|internal> <real|complex> <start> <count> <entry_len>
//! obj <j> <coef>                      objective (maximized), COO
//! objconst <value>
//! eq <row> <rhs>                      equality row: a·x = rhs
//! eqa <row> <j> <coef>
//! ineq <row> <lower> <upper>          lower ≤ a·x ≤ upper, bounds may be ±inf
//! ineqa <row> <j> <coef>
//! soc <cone> <body_len>               ‖body‖ ≤ head
//! soce <cone> <entry> <constant>      entry 0 is the head, 1.. the body
//! soca <cone> <entry> <j> <coef>
//! rsoc <cone> <body_len>              2·u·v ≥ ‖body‖², u, v ≥ 0
//! rsoce <cone> <entry> <constant>     entry 0 = u, 1 = v, 2.. = body
//! rsoca <cone> <entry> <j> <coef>
//! end
//! ```
//!
//! Floating point values are written with Rust's shortest round-trip
//! formatting, so `parse(dump(p)) == p` for normalized programs.

use std::fmt::Write as _;

use crate::error::ParseError;
use crate::program::{
    AffineExpr, ConicProgram, LinearConstraint, RotatedCone, SecondOrderCone, VarBlock, VarMap,
    VarRole,
};

pub const HEADER: &str = "fdgroup-conic 1";

/// Upper bound on any declared size; keeps hostile input from allocating.
const MAX_DECLARED: usize = 1 << 24;

pub fn write_program(p: &ConicProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(
        out,
        "# {} ",
        p.census()
    );
    let _ = writeln!(out, "vars {}", p.n_vars);
    for b in p.var_map.blocks() {
        let _ = writeln!(
            out,
            "var {} {} {} {} {} {}",
            b.name,
            b.role.as_str(),
            if b.complex { "complex" } else { "real" },
            b.start,
            b.count,
            b.entry_len
        );
    }
    for (j, &c) in p.objective.iter().enumerate() {
        if c != 0.0 {
            let _ = writeln!(out, "obj {j} {c:?}");
        }
    }
    let _ = writeln!(out, "objconst {:?}", p.objective_constant);
    for (r, c) in p.equalities.iter().enumerate() {
        let _ = writeln!(out, "eq {r} {:?}", c.lower - c.expr.constant);
        for &(j, a) in &c.expr.terms {
            let _ = writeln!(out, "eqa {r} {j} {a:?}");
        }
    }
    for (r, c) in p.inequalities.iter().enumerate() {
        let _ = writeln!(
            out,
            "ineq {r} {:?} {:?}",
            c.lower - c.expr.constant,
            c.upper - c.expr.constant
        );
        for &(j, a) in &c.expr.terms {
            let _ = writeln!(out, "ineqa {r} {j} {a:?}");
        }
    }
    for (k, c) in p.socs.iter().enumerate() {
        let _ = writeln!(out, "soc {k} {}", c.body.len());
        for (e, expr) in std::iter::once(&c.head).chain(&c.body).enumerate() {
            write_entry(&mut out, "soc", k, e, expr);
        }
    }
    for (k, c) in p.rotated.iter().enumerate() {
        let _ = writeln!(out, "rsoc {k} {}", c.body.len());
        for (e, expr) in [&c.u, &c.v].into_iter().chain(&c.body).enumerate() {
            write_entry(&mut out, "rsoc", k, e, expr);
        }
    }
    out.push_str("end\n");
    out
}

fn write_entry(out: &mut String, tag: &str, cone: usize, entry: usize, expr: &AffineExpr) {
    if expr.constant != 0.0 {
        let _ = writeln!(out, "{tag}e {cone} {entry} {:?}", expr.constant);
    }
    for &(j, a) in &expr.terms {
        let _ = writeln!(out, "{tag}a {cone} {entry} {j} {a:?}");
    }
}

struct Cursor<'a> {
    line: usize,
    fields: std::str::SplitWhitespace<'a>,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn word(&mut self) -> Result<&'a str, ParseError> {
        self.fields.next().ok_or_else(|| self.err("missing field"))
    }

    fn index(&mut self) -> Result<usize, ParseError> {
        let w = self.word()?;
        let v: usize = w
            .parse()
            .map_err(|_| self.err(format!("bad index `{w}`")))?;
        if v >= MAX_DECLARED {
            return Err(self.err(format!("index {v} too large")));
        }
        Ok(v)
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let w = self.word()?;
        let v: f64 = w
            .parse()
            .map_err(|_| self.err(format!("bad number `{w}`")))?;
        if v.is_nan() {
            return Err(self.err("NaN is not allowed"));
        }
        Ok(v)
    }

    fn finite(&mut self) -> Result<f64, ParseError> {
        let v = self.number()?;
        if !v.is_finite() {
            return Err(self.err("value must be finite"));
        }
        Ok(v)
    }

    fn done(&mut self) -> Result<(), ParseError> {
        match self.fields.next() {
            None => Ok(()),
            Some(w) => Err(self.err(format!("unexpected trailing field `{w}`"))),
        }
    }
}

fn declared<T>(items: &mut [T], idx: usize, cur: &Cursor<'_>, what: &str) -> Result<(), ParseError> {
    if idx < items.len() {
        Ok(())
    } else {
        Err(cur.err(format!("{what} {idx} used before declaration")))
    }
}

/// Parses the text dump format. Never panics on malformed input.
pub fn parse_program(text: &str) -> Result<ConicProgram, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    match lines.next() {
        Some((_, l)) if l.split_whitespace().eq(HEADER.split_whitespace()) => {}
        _ => return Err(ParseError::MissingHeader),
    }

    let mut n_vars: Option<usize> = None;
    let mut var_map = VarMap::new();
    let mut objective: Vec<f64> = Vec::new();
    let mut objective_constant = 0.0;
    let mut equalities: Vec<LinearConstraint> = Vec::new();
    let mut inequalities: Vec<LinearConstraint> = Vec::new();
    let mut socs: Vec<SecondOrderCone> = Vec::new();
    let mut rotated: Vec<RotatedCone> = Vec::new();
    let mut ended = false;

    for (line, content) in lines {
        if ended {
            return Err(ParseError::Syntax {
                line,
                message: "content after `end`".into(),
            });
        }
        let mut cur = Cursor {
            line,
            fields: content.split_whitespace(),
        };
        let tag = cur.word()?;
        if tag != "vars" && tag != "end" && n_vars.is_none() {
            return Err(cur.err("`vars` must precede other records"));
        }
        let n = n_vars.unwrap_or(0);
        let var_index = |cur: &mut Cursor<'_>| -> Result<usize, ParseError> {
            let j = cur.index()?;
            if j >= n {
                return Err(cur.err(format!("variable {j} out of range")));
            }
            Ok(j)
        };
        match tag {
            "vars" => {
                if n_vars.is_some() {
                    return Err(cur.err("duplicate `vars`"));
                }
                let v = cur.index()?;
                n_vars = Some(v);
                objective = vec![0.0; v];
            }
            "var" => {
                let name = cur.word()?.to_owned();
                let role_word = cur.word()?;
                let role =
                    VarRole::parse(role_word).ok_or_else(|| cur.err("unknown variable role"))?;
                let complex = match cur.word()? {
                    "real" => false,
                    "complex" => true,
                    other => return Err(cur.err(format!("bad kind `{other}`"))),
                };
                let start = cur.index()?;
                let count = cur.index()?;
                let entry_len = cur.index()?;
                let len = count
                    .checked_mul(entry_len)
                    .and_then(|l| l.checked_add(start))
                    .filter(|&end| end <= n)
                    .ok_or_else(|| cur.err("variable block exceeds `vars`"))?;
                let _ = len;
                var_map.push_block(VarBlock {
                    name,
                    role,
                    complex,
                    start,
                    count,
                    entry_len,
                })?;
            }
            "obj" => {
                let j = var_index(&mut cur)?;
                objective[j] += cur.finite()?;
            }
            "objconst" => objective_constant = cur.finite()?,
            "eq" => {
                let r = cur.index()?;
                if r != equalities.len() {
                    return Err(cur.err("equality rows must be declared in order"));
                }
                let rhs = cur.finite()?;
                equalities.push(LinearConstraint::equal(AffineExpr::zero(), rhs));
            }
            "eqa" => {
                let r = cur.index()?;
                declared(&mut equalities, r, &cur, "equality")?;
                let j = var_index(&mut cur)?;
                let a = cur.finite()?;
                equalities[r].expr.add_term(j, a);
            }
            "ineq" => {
                let r = cur.index()?;
                if r != inequalities.len() {
                    return Err(cur.err("inequality rows must be declared in order"));
                }
                let lo = cur.number()?;
                let hi = cur.number()?;
                inequalities.push(LinearConstraint::between(AffineExpr::zero(), lo, hi));
            }
            "ineqa" => {
                let r = cur.index()?;
                declared(&mut inequalities, r, &cur, "inequality")?;
                let j = var_index(&mut cur)?;
                let a = cur.finite()?;
                inequalities[r].expr.add_term(j, a);
            }
            "soc" => {
                let k = cur.index()?;
                if k != socs.len() {
                    return Err(cur.err("cones must be declared in order"));
                }
                let len = cur.index()?;
                socs.push(SecondOrderCone {
                    head: AffineExpr::zero(),
                    body: vec![AffineExpr::zero(); len.min(n.max(1) * 4 + 16)],
                });
                if socs[k].body.len() != len {
                    return Err(cur.err("cone body implausibly long"));
                }
            }
            "soce" | "soca" => {
                let k = cur.index()?;
                declared(&mut socs, k, &cur, "soc")?;
                let e = cur.index()?;
                let cone = &mut socs[k];
                let expr = match e {
                    0 => &mut cone.head,
                    i if i <= cone.body.len() => &mut cone.body[i - 1],
                    _ => return Err(cur.err("cone entry out of range")),
                };
                if tag == "soce" {
                    expr.constant = cur.finite()?;
                } else {
                    let j = var_index(&mut cur)?;
                    let a = cur.finite()?;
                    expr.add_term(j, a);
                }
            }
            "rsoc" => {
                let k = cur.index()?;
                if k != rotated.len() {
                    return Err(cur.err("cones must be declared in order"));
                }
                let len = cur.index()?;
                rotated.push(RotatedCone {
                    u: AffineExpr::zero(),
                    v: AffineExpr::zero(),
                    body: vec![AffineExpr::zero(); len.min(n.max(1) * 4 + 16)],
                });
                if rotated[k].body.len() != len {
                    return Err(cur.err("cone body implausibly long"));
                }
            }
            "rsoce" | "rsoca" => {
                let k = cur.index()?;
                declared(&mut rotated, k, &cur, "rsoc")?;
                let e = cur.index()?;
                let cone = &mut rotated[k];
                let expr = match e {
                    0 => &mut cone.u,
                    1 => &mut cone.v,
                    i if i - 2 < cone.body.len() => &mut cone.body[i - 2],
                    _ => return Err(cur.err("cone entry out of range")),
                };
                if tag == "rsoce" {
                    expr.constant = cur.finite()?;
                } else {
                    let j = var_index(&mut cur)?;
                    let a = cur.finite()?;
                    expr.add_term(j, a);
                }
            }
            "end" => ended = true,
            other => return Err(cur.err(format!("unknown record `{other}`"))),
        }
        cur.done()?;
    }
    if !ended {
        return Err(ParseError::MissingEnd);
    }

    let n_vars = n_vars.unwrap_or(0);
    let mut program = ConicProgram {
        n_vars,
        objective,
        objective_constant,
        equalities,
        inequalities,
        socs,
        rotated,
        var_map,
    };
    program.normalize();
    program.validate()?;
    Ok(program)
}
