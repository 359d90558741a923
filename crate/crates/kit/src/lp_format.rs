//! LP-format export.
//!
//! Variables are named `x0..` for original variables and `t0..` for
//! trailing auxiliaries. Quadratic objective terms are written in a
//! `[ ... ] / 2` block holding the entries of `Q`; quadratic constraint
//! terms are written with their actual coefficients. The reader accepts the
//! subset of the format the writer produces and exists for round-trip checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use qnr_core::{QcqpInstance, QuadFunc, Sense};

pub const HEADER: &str = "\\ generated-by qnr-kit";

/// Linear (`j == None`) or product term between variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Term {
    pub i: usize,
    pub j: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub terms: BTreeMap<Term, f64>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// Effective coefficients of a model: objective `sum coef * term + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub names: Vec<String>,
    pub objective: BTreeMap<Term, f64>,
    pub constant: f64,
    pub rows: Vec<LpRow>,
    pub bounds: Vec<(f64, f64)>,
}

pub fn var_name(inst: &QcqpInstance, i: usize) -> String {
    let n_orig = inst.n_orig();
    if i < n_orig {
        format!("x{i}")
    } else {
        format!("t{}", i - n_orig)
    }
}

/// Shortest round-trip representation, in exponent form outside a
/// readable range.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Terms of `1/2 x^T Q x + c^T x` with their effective coefficients.
fn terms(f: &QuadFunc) -> BTreeMap<Term, f64> {
    let n = f.n();
    let mut out = BTreeMap::new();
    for i in 0..n {
        if f.c[i] != 0.0 {
            out.insert(Term { i, j: None }, f.c[i]);
        }
    }
    for i in 0..n {
        for j in i..n {
            let v = if i == j { 0.5 * f.q[(i, i)] } else { f.q[(i, j)] };
            if v != 0.0 {
                out.insert(Term { i, j: Some(j) }, v);
            }
        }
    }
    out
}

/// The coefficient set an export of `inst` encodes.
pub fn model_of(inst: &QcqpInstance) -> LpModel {
    let mut rows = Vec::new();
    for (k, f) in inst.constraints.iter().enumerate() {
        let sense = if f.sense == Sense::Eq { RowSense::Eq } else { RowSense::Le };
        rows.push(LpRow { name: format!("c{k}"), terms: terms(f), sense, rhs: f.b });
    }
    for (k, e) in inst.equalities.iter().enumerate() {
        let t = e.a.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (Term { i, j: None }, v)).collect();
        rows.push(LpRow { name: format!("e{k}"), terms: t, sense: RowSense::Eq, rhs: e.d });
    }
    LpModel {
        names: (0..inst.n).map(|i| var_name(inst, i)).collect(),
        objective: terms(&inst.objective),
        constant: inst.obj_constant,
        rows,
        bounds: inst.lb.iter().cloned().zip(inst.ub.iter().cloned()).collect(),
    }
}

fn write_expr(out: &mut String, names: &[String], terms: &BTreeMap<Term, f64>, objective: bool) {
    let mut first = true;
    let mut push = |out: &mut String, v: f64, body: &str| {
        if first {
            if v < 0.0 {
                out.push_str(" -");
            }
        } else {
            out.push_str(if v < 0.0 { " -" } else { " +" });
        }
        first = false;
        let a = v.abs();
        if a != 1.0 {
            let _ = write!(out, " {}", num(a));
        }
        let _ = write!(out, " {body}");
    };
    for (t, &v) in terms.iter().filter(|(t, _)| t.j.is_none()) {
        push(out, v, &names[t.i]);
    }
    let quad: Vec<(&Term, f64)> = terms.iter().filter(|(t, _)| t.j.is_some()).map(|(t, &v)| (t, v)).collect();
    if !quad.is_empty() {
        if first {
            out.push_str(" [");
        } else {
            out.push_str(" + [");
        }
        let mut inner_first = true;
        for (t, v) in quad {
            // objective entries are doubled to sit inside `[ ... ] / 2`
            let v = if objective { 2.0 * v } else { v };
            let j = t.j.unwrap();
            if inner_first {
                if v < 0.0 {
                    out.push_str(" -");
                }
            } else {
                out.push_str(if v < 0.0 { " -" } else { " +" });
            }
            inner_first = false;
            let a = v.abs();
            if a != 1.0 {
                let _ = write!(out, " {}", num(a));
            }
            if t.i == j {
                let _ = write!(out, " {} ^ 2", names[t.i]);
            } else {
                let _ = write!(out, " {} * {}", names[t.i], names[j]);
            }
        }
        out.push_str(" ]");
        if objective {
            out.push_str(" / 2");
        }
        first = false;
    }
    if first {
        out.push_str(" 0");
    }
}

/// Renders an instance in LP format.
pub fn to_lp_string(inst: &QcqpInstance) -> String {
    let m = model_of(inst);
    let names = &m.names;
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "\\ kind {} n={} aux={}", inst.kind.as_str(), inst.n, inst.aux);
    out.push_str("Minimize\n obj:");
    write_expr(&mut out, names, &m.objective, true);
    if m.constant != 0.0 {
        out.push_str(if m.constant < 0.0 { " - " } else { " + " });
        out.push_str(&num(m.constant.abs()));
    }
    out.push_str("\nSubject To\n");
    for row in &m.rows {
        let _ = write!(out, " {}:", row.name);
        write_expr(&mut out, names, &row.terms, false);
        let op = match row.sense {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (name, &(l, u)) in names.iter().zip(&m.bounds) {
        match (l.is_finite(), u.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", num(l), num(u));
            }
            (true, false) => {
                let _ = writeln!(out, " {} <= {name} <= +inf", num(l));
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", num(u));
            }
        }
    }
    out.push_str("End\n");
    out
}

/// Writes the LP file. Fails on an unwritable path.
pub fn export_lp(inst: &QcqpInstance, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, to_lp_string(inst))
}

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct LpParseError {
    pub line: usize,
    pub message: String,
}

fn parse_num(s: &str) -> Option<f64> {
    match s {
        "+inf" | "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Parses an expression into terms and a constant. Products inside a
/// bracket followed by `/ 2` are halved.
fn parse_expr(tokens: &[&str], index: &BTreeMap<String, usize>) -> Result<(BTreeMap<Term, f64>, f64), String> {
    let mut terms: BTreeMap<Term, f64> = BTreeMap::new();
    let mut constant = 0.0;
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    let mut in_bracket = false;
    let mut bracket: Vec<(Term, f64)> = Vec::new();
    let var = |s: &str| index.get(s).copied().ok_or_else(|| format!("unknown variable '{s}'"));
    let mut k = 0;
    while k < tokens.len() {
        let tok = tokens[k];
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            "[" => in_bracket = true,
            "]" => {
                in_bracket = false;
                let halve = tokens.get(k + 1) == Some(&"/") && tokens.get(k + 2) == Some(&"2");
                if halve {
                    k += 2;
                }
                for (t, v) in bracket.drain(..) {
                    *terms.entry(t).or_insert(0.0) += if halve { 0.5 * v } else { v };
                }
                sign = 1.0;
            }
            _ => {
                if let Some(v) = parse_num(tok) {
                    if coef.is_some() {
                        return Err(format!("unexpected number '{tok}'"));
                    }
                    coef = Some(v);
                } else {
                    let i = var(tok)?;
                    let c = sign * coef.take().unwrap_or(1.0);
                    let term = match tokens.get(k + 1) {
                        Some(&"^") if tokens.get(k + 2) == Some(&"2") => {
                            k += 2;
                            Term { i, j: Some(i) }
                        }
                        Some(&"*") => {
                            let j = var(tokens.get(k + 2).ok_or("dangling '*'")?)?;
                            k += 2;
                            Term { i: i.min(j), j: Some(i.max(j)) }
                        }
                        _ => Term { i, j: None },
                    };
                    if in_bracket {
                        bracket.push((term, c));
                    } else {
                        *terms.entry(term).or_insert(0.0) += c;
                    }
                    sign = 1.0;
                }
            }
        }
        k += 1;
    }
    if let Some(v) = coef {
        constant += sign * v;
    }
    terms.retain(|_, v| *v != 0.0);
    Ok((terms, constant))
}

fn tokenize(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Reads a file produced by [`to_lp_string`].
pub fn parse_lp(text: &str) -> Result<LpModel, LpParseError> {
    let err = |line: usize, message: String| LpParseError { line, message };
    #[derive(PartialEq)]
    enum Section {
        Head,
        Objective,
        Rows,
        Bounds,
        End,
    }
    // first pass collects variable names from the bounds section, which
    // lists every variable once
    let mut names: Vec<String> = Vec::new();
    let mut in_bounds = false;
    for raw in text.lines() {
        let line = raw.trim();
        if line.eq_ignore_ascii_case("bounds") {
            in_bounds = true;
            continue;
        }
        if line.eq_ignore_ascii_case("end") {
            in_bounds = false;
        }
        if in_bounds && !line.is_empty() {
            let toks = tokenize(line);
            let name = if toks.len() == 2 && toks[1] == "free" { toks[0] } else { toks.get(2).copied().unwrap_or("") };
            names.push(name.to_string());
        }
    }
    let index: BTreeMap<String, usize> = names.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let mut model = LpModel {
        names: names.clone(),
        objective: BTreeMap::new(),
        constant: 0.0,
        rows: Vec::new(),
        bounds: vec![(0.0, f64::INFINITY); names.len()],
    };
    let mut section = Section::Head;
    let mut bound_k = 0;
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line.to_ascii_lowercase().as_str() {
            "minimize" => {
                section = Section::Objective;
                continue;
            }
            "subject to" => {
                section = Section::Rows;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "end" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Head | Section::End => return Err(err(ln, format!("unexpected '{line}'"))),
            Section::Objective => {
                let body = line.split_once(':').map_or(line, |(_, b)| b);
                let (t, c) = parse_expr(&tokenize(body), &index).map_err(|m| err(ln, m))?;
                model.objective = t;
                model.constant = c;
            }
            Section::Rows => {
                let (name, body) = line.split_once(':').ok_or_else(|| err(ln, "row without a name".into()))?;
                let toks = tokenize(body);
                let pos = toks.iter().position(|t| matches!(*t, "<=" | ">=" | "=")).ok_or_else(|| err(ln, "row without a sense".into()))?;
                let sense = match toks[pos] {
                    "<=" => RowSense::Le,
                    ">=" => RowSense::Ge,
                    _ => RowSense::Eq,
                };
                let (terms, c) = parse_expr(&toks[..pos], &index).map_err(|m| err(ln, m))?;
                let rhs = toks.get(pos + 1).and_then(|s| parse_num(s)).ok_or_else(|| err(ln, "bad right-hand side".into()))?;
                model.rows.push(LpRow { name: name.trim().to_string(), terms, sense, rhs: rhs - c });
            }
            Section::Bounds => {
                let toks = tokenize(line);
                let b = if toks.len() == 2 && toks[1] == "free" {
                    (f64::NEG_INFINITY, f64::INFINITY)
                } else if toks.len() == 5 && toks[1] == "<=" && toks[3] == "<=" {
                    let l = parse_num(toks[0]).ok_or_else(|| err(ln, "bad lower bound".into()))?;
                    let u = parse_num(toks[4]).ok_or_else(|| err(ln, "bad upper bound".into()))?;
                    (l, u)
                } else {
                    return Err(err(ln, format!("unsupported bound '{line}'")));
                };
                model.bounds[bound_k] = b;
                bound_k += 1;
            }
        }
    }
    Ok(model)
}
