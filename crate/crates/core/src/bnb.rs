//! Spatial branch-and-bound over box domains.
//!
//! Each node solves the McCormick relaxation rebuilt on the node's box,
//! seeded with the rows its parent ended up using. Nodes are taken in
//! best-bound order, deeper nodes first among equal bounds. Incumbents come
//! from the relaxation points and from a local search on the original
//! (non-lifted) variables.

use alloc::collections::BinaryHeap;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::instance::{classify_convexity, QcqpInstance, QuadFunc, Sense, EIG_TOL};
use crate::linalg::{dot, lu_solve, Matrix};
use crate::lp::{Lp, LpStatus};
use crate::mccormick::{CutPool, RelaxOptions, RelaxResult, RelaxStatus, RelaxedModel};

pub const DEFAULT_REL_TOL: f64 = 1e-4;
pub const DEFAULT_NODE_LIMIT: usize = 1_000_000;
pub const DEFAULT_TIME_LIMIT: f64 = 1200.0;
/// Largest constraint violation accepted for an incumbent.
pub const FEAS_TOL: f64 = 1e-7;
/// Lifted-product violations below this count as zero when branching.
pub const VIOLATION_TOL: f64 = 1e-9;
/// Boxes narrower than this are not split further.
const MIN_WIDTH: f64 = 1e-9;

/// Seconds since the solve started. The core crate has no clock of its own.
pub trait Clock {
    fn elapsed(&self) -> f64;
}

/// Clock that never advances; time limits never fire.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    NodeLimit,
    /// The tree was exhausted (or the root relaxation was infeasible)
    /// without a feasible point.
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "OPTIMAL",
            SolveStatus::TimeLimit => "TIME_LIMIT",
            SolveStatus::NodeLimit => "NODE_LIMIT",
            SolveStatus::Infeasible => "INFEASIBLE",
        }
    }
}

impl core::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub node_limit: usize,
    /// Seconds, measured by the [`Clock`] passed to the solve.
    pub time_limit: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self { node_limit: DEFAULT_NODE_LIMIT, time_limit: DEFAULT_TIME_LIMIT }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub max_iter: usize,
    /// Multiplier of the squared violation of quadratic rows.
    pub penalty: f64,
    pub armijo: f64,
    pub feas_tol: f64,
    pub bisect_steps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { max_iter: 200, penalty: 1e3, armijo: 1e-4, feas_tol: FEAS_TOL, bisect_steps: 60 }
    }
}

#[derive(Debug, Clone)]
pub struct BnbOptions {
    pub rel_tol: f64,
    pub limits: Limits,
    pub relax: RelaxOptions,
    pub search: SearchOptions,
    /// Iteration cap of the local searches started at non-root nodes.
    pub node_search_iter: usize,
    /// Emit a progress line every this many nodes; 0 disables.
    pub log_stride: usize,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            limits: Limits::default(),
            relax: RelaxOptions::default(),
            search: SearchOptions::default(),
            node_search_iter: 40,
            log_stride: 0,
        }
    }
}

/// An open subproblem: its box, bound and relaxation point.
#[derive(Debug, Clone)]
pub struct Node {
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub bound: f64,
    pub x: Vec<f64>,
    /// Lifted values indexed like [`RelaxedModel::pairs`].
    pub lifted: Vec<f64>,
    pub depth: usize,
    pool: Option<Rc<CutPool>>,
}

impl Node {
    fn from_result(lb: Vec<f64>, ub: Vec<f64>, bound: f64, depth: usize, res: RelaxResult) -> Self {
        Self { lb, ub, bound, x: res.x, lifted: res.lifted, depth, pool: Some(Rc::new(res.pool)) }
    }

    /// Node with a given relaxation point and no cut pool.
    pub fn new(lb: Vec<f64>, ub: Vec<f64>, bound: f64, x: Vec<f64>, lifted: Vec<f64>, depth: usize) -> Self {
        Self { lb, ub, bound, x, lifted, depth, pool: None }
    }
}

struct Open {
    node: Node,
    seq: u64,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // max-heap: the lowest bound is the greatest element, then the deepest,
    // then the most recently created
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .node
            .bound
            .total_cmp(&self.node.bound)
            .then(self.node.depth.cmp(&other.node.depth))
            .then(self.seq.cmp(&other.seq))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub incumbent: Option<f64>,
    pub point: Option<Vec<f64>>,
    /// Bound of the root relaxation.
    pub root_bound: f64,
    /// Lowest bound over every unexplored or fathomed region.
    pub best_bound: f64,
    /// Relaxations solved, root included.
    pub nodes: usize,
    pub max_depth: usize,
    pub elapsed: f64,
    pub gap: f64,
    /// Largest amount by which a raw child relaxation bound fell below its
    /// parent's bound before clamping.
    pub raw_bound_drop: f64,
}

/// `(incumbent - bound) / max(1, |incumbent|)`, infinite without incumbent.
pub fn relative_gap(incumbent: Option<f64>, bound: f64) -> f64 {
    match incumbent {
        Some(v) if bound.is_finite() => ((v - bound) / v.abs().max(1.0)).max(0.0),
        Some(_) if bound == f64::INFINITY => 0.0,
        _ => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchRule {
    Violation,
    LongestEdge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub var: usize,
    pub split: f64,
    pub rule: BranchRule,
}

/// Branching variable and split point for a node, or `None` when every
/// candidate interval is already too narrow to split.
pub fn branch_select(model: &RelaxedModel, node: &Node) -> Option<Branch> {
    let n = model.n();
    let width = |i: usize| node.ub[i] - node.lb[i];
    let splittable = |i: usize| width(i) > MIN_WIDTH * (1.0 + node.lb[i].abs().max(node.ub[i].abs()));
    let weights = model.pair_weights();
    let mut score = vec![0.0; n];
    let mut worst: f64 = 0.0;
    for (k, &(i, j)) in model.pairs().iter().enumerate() {
        let v = (node.lifted[k] - node.x[i] * node.x[j]).abs();
        if weights[k] == 0.0 {
            continue;
        }
        worst = worst.max(v);
        score[i] += weights[k] * v;
        if i != j {
            score[j] += weights[k] * v;
        }
    }
    if worst >= VIOLATION_TOL {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if splittable(i) && score[i] > 0.0 && best.map_or(true, |b| score[i] > score[b]) {
                best = Some(i);
            }
        }
        if let Some(i) = best {
            let (l, u) = (node.lb[i], node.ub[i]);
            let w = u - l;
            let split = node.x[i].clamp(l + 0.2 * w, u - 0.2 * w);
            return Some(Branch { var: i, split, rule: BranchRule::Violation });
        }
    }
    // auxiliaries are excluded: they only enter linearly
    let n_orig = model.base.n_orig();
    let mut best: Option<usize> = None;
    for i in 0..n_orig {
        if splittable(i) && best.map_or(true, |b| width(i) > width(b)) {
            best = Some(i);
        }
    }
    best.map(|i| Branch { var: i, split: 0.5 * (node.lb[i] + node.ub[i]), rule: BranchRule::LongestEdge })
}

/// An auxiliary fixed by an equality row: `t = (b - f(x)) / coef` where `f`
/// is the row without the auxiliary.
#[derive(Debug, Clone)]
struct Definition {
    var: usize,
    row: QuadFunc,
    coef: f64,
}

/// Local improvement on the original variables. Auxiliaries defined by an
/// equality row are substituted out, descent directions come from an LP over
/// the linear rows inside a trust region, each step is an Armijo line search
/// on the penalized objective, and every step is followed by a Newton step on
/// the active face.
#[derive(Debug, Clone)]
pub struct LocalSearch {
    full: QcqpInstance,
    red: QcqpInstance,
    keep: Vec<usize>,
    defs: Vec<Definition>,
    opts: SearchOptions,
}

/// Coefficient vector and sense of every linear row of an instance.
fn linear_rows(inst: &QcqpInstance) -> Vec<(&[f64], f64, Sense)> {
    let mut rows: Vec<(&[f64], f64, Sense)> =
        inst.constraints.iter().filter(|f| f.is_linear()).map(|f| (&f.c[..], f.b, f.sense)).collect();
    rows.extend(inst.equalities.iter().map(|e| (&e.a[..], e.d, Sense::Eq)));
    rows
}

impl LocalSearch {
    pub fn new(inst: &QcqpInstance, opts: SearchOptions) -> Self {
        let n = inst.n;
        let first_aux = inst.n_orig();
        let col_zero = |q: &Matrix, k: usize| (0..n).all(|i| q[(i, k)] == 0.0);
        let mut defs: Vec<Definition> = Vec::new();
        let mut def_rows: Vec<usize> = Vec::new();
        for k in first_aux..n {
            if !col_zero(&inst.objective.q, k)
                || inst.constraints.iter().any(|f| !col_zero(&f.q, k))
                || inst.equalities.iter().any(|e| e.a[k] != 0.0)
            {
                continue;
            }
            let found = inst.constraints.iter().enumerate().find(|(r, f)| {
                f.sense == Sense::Eq
                    && f.c[k].abs() > 1e-12
                    && !def_rows.contains(r)
                    && (first_aux..n).all(|j| j == k || f.c[j] == 0.0)
            });
            if let Some((r, f)) = found {
                let mut row = f.clone();
                let coef = row.c[k];
                row.c[k] = 0.0;
                defs.push(Definition { var: k, row, coef });
                def_rows.push(r);
            }
        }

        // substitute t_k = (b - f(x)) / coef wherever t_k appears
        let mut obj = inst.objective.clone();
        let mut constant = inst.obj_constant;
        let mut cons: Vec<QuadFunc> = Vec::new();
        let substitute = |f: &mut QuadFunc| -> f64 {
            let mut shift = 0.0;
            for d in &defs {
                let alpha = f.c[d.var];
                if alpha == 0.0 {
                    continue;
                }
                let s = alpha / d.coef;
                f.q.axpy(-s, &d.row.q);
                for (ci, ri) in f.c.iter_mut().zip(&d.row.c) {
                    *ci -= s * ri;
                }
                f.c[d.var] = 0.0;
                shift += s * d.row.b;
            }
            shift
        };
        constant += substitute(&mut obj);
        for (r, f) in inst.constraints.iter().enumerate() {
            if def_rows.contains(&r) {
                continue;
            }
            let mut g = f.clone();
            let shift = substitute(&mut g);
            g.b -= shift;
            cons.push(g);
        }
        let eliminated: Vec<usize> = defs.iter().map(|d| d.var).collect();
        let keep: Vec<usize> = (0..n).filter(|i| !eliminated.contains(i)).collect();
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let restrict = |f: &QuadFunc| QuadFunc {
            q: Matrix::from_fn(keep.len(), keep.len(), |a, b| f.q[(keep[a], keep[b])]),
            c: pick(&f.c),
            b: f.b,
            sense: f.sense,
        };
        let red = QcqpInstance {
            n: keep.len(),
            objective: restrict(&obj),
            obj_constant: constant,
            constraints: cons.iter().map(restrict).collect(),
            lb: pick(&inst.lb),
            ub: pick(&inst.ub),
            kind: inst.kind,
            equalities: inst
                .equalities
                .iter()
                .map(|e| crate::instance::LinearEquality { a: pick(&e.a), d: e.d })
                .collect(),
            aux: keep.iter().filter(|&&i| i >= first_aux).count(),
        };
        Self { full: inst.clone(), red, keep, defs, opts }
    }

    /// The instance the search actually runs on.
    pub fn reduced(&self) -> &QcqpInstance {
        &self.red
    }

    pub fn eliminated(&self) -> usize {
        self.defs.len()
    }

    fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.keep.iter().enumerate().map(|(a, &i)| x[i].clamp(self.red.lb[a], self.red.ub[a])).collect()
    }

    /// Full point with the substituted auxiliaries recomputed.
    pub fn expand(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.full.n];
        for (a, &i) in self.keep.iter().enumerate() {
            x[i] = y[a];
        }
        for d in &self.defs {
            x[d.var] = (d.row.b - d.row.eval(&x)) / d.coef;
        }
        x
    }

    /// Objective value of `x` (auxiliaries recomputed) if it is feasible.
    pub fn evaluate(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let full = self.expand(&self.restrict(x));
        self.accept(full)
    }

    fn accept(&self, full: Vec<f64>) -> Option<(f64, Vec<f64>)> {
        if self.full.max_violation(&full) <= self.opts.feas_tol {
            Some((self.full.objective_value(&full), full))
        } else {
            None
        }
    }

    fn penalized(&self, y: &[f64]) -> f64 {
        let mut v = self.red.objective_value(y);
        for f in self.red.constraints.iter().filter(|f| !f.is_linear()) {
            let r = f.residual(y);
            let r = if f.sense == Sense::Eq { r } else { r.max(0.0) };
            v += self.opts.penalty * r * r;
        }
        v
    }

    fn penalized_gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut g = self.red.objective.gradient(y);
        for f in self.red.constraints.iter().filter(|f| !f.is_linear()) {
            let r = f.residual(y);
            let r = if f.sense == Sense::Eq { r } else { r.max(0.0) };
            if r != 0.0 {
                for (gi, fi) in g.iter_mut().zip(f.gradient(y)) {
                    *gi += 2.0 * self.opts.penalty * r * fi;
                }
            }
        }
        g
    }

    fn penalized_hessian(&self, y: &[f64]) -> Matrix {
        let mut h = self.red.objective.q.clone();
        for f in self.red.constraints.iter().filter(|f| !f.is_linear()) {
            let r = f.residual(y);
            let r = if f.sense == Sense::Eq { r } else { r.max(0.0) };
            if r == 0.0 && f.sense != Sense::Eq {
                continue;
            }
            let gf = f.gradient(y);
            let rho = 2.0 * self.opts.penalty;
            h.axpy(rho * r, &f.q);
            for i in 0..h.rows() {
                for j in 0..h.rows() {
                    h[(i, j)] += rho * gf[i] * gf[j];
                }
            }
        }
        h
    }

    fn linear_violation(&self, y: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for (a, b, s) in linear_rows(&self.red) {
            let r = dot(a, y) - b;
            v = v.max(if s == Sense::Eq { r.abs() } else { r });
        }
        v
    }

    /// Closest point of the linear rows and box in the 1-norm.
    fn project_linear(&self, y: &[f64]) -> Option<Vec<f64>> {
        let n = self.red.n;
        let mut cost = vec![0.0; n];
        cost.extend(core::iter::repeat(1.0).take(n));
        let mut lo = self.red.lb.clone();
        let mut hi = self.red.ub.clone();
        for i in 0..n {
            lo.push(0.0);
            hi.push(self.red.ub[i] - self.red.lb[i]);
        }
        let mut lp = Lp::new(cost, lo, hi);
        for i in 0..n {
            // e_i >= |y'_i - y_i|
            lp.add_row(&[(n + i, 1.0), (i, -1.0)], -y[i], f64::INFINITY);
            lp.add_row(&[(n + i, 1.0), (i, 1.0)], y[i], f64::INFINITY);
        }
        add_linear_rows(&mut lp, &self.red);
        match lp.solve() {
            LpStatus::Optimal => Some(lp.solution()[..n].to_vec()),
            _ => None,
        }
    }

    /// Runs the search from `x_start` (a full-length point, clipped to the
    /// box). Returns the objective and a feasible full point, or `None`.
    pub fn run(&self, x_start: &[f64]) -> Option<(f64, Vec<f64>)> {
        self.run_with(x_start, self.opts.max_iter, None)
    }

    /// Like [`LocalSearch::run`] with an iteration cap and an extra feasible
    /// point to restore feasibility toward.
    pub fn run_with(&self, x_start: &[f64], max_iter: usize, fallback: Option<&[f64]>) -> Option<(f64, Vec<f64>)> {
        let red = &self.red;
        let n = red.n;
        let mut y = self.restrict(x_start);
        if self.linear_violation(&y) > 1e-9 {
            y = self.project_linear(&y)?;
        }
        let width: f64 = (0..n).map(|i| red.ub[i] - red.lb[i]).fold(0.0, f64::max);
        let mut radius = width;
        let mut phi = self.penalized(&y);
        for _ in 0..max_iter {
            let g = self.penalized_gradient(&y);
            let mut moved = false;
            if let Some(target) = self.direction(&y, &g, radius) {
                let d: Vec<f64> = target.iter().zip(&y).map(|(t, v)| t - v).collect();
                let slope = dot(&g, &d);
                if slope < -1e-12 * (1.0 + phi.abs()) {
                    let mut t = 1.0;
                    while t > 1e-12 {
                        let trial: Vec<f64> = y.iter().zip(&d).map(|(v, dv)| v + t * dv).collect();
                        let pt = self.penalized(&trial);
                        if pt <= phi + self.opts.armijo * t * slope {
                            y = trial;
                            phi = pt;
                            moved = true;
                            break;
                        }
                        t *= 0.5;
                    }
                    radius = if t >= 1.0 { (2.0 * radius).min(width) } else { 0.5 * radius };
                }
            }
            if let Some((ny, np)) = self.face_newton(&y, phi) {
                y = ny;
                phi = np;
                moved = true;
            }
            if !moved || radius < 1e-12 {
                break;
            }
        }
        let full = self.expand(&y);
        if let Some(found) = self.accept(full) {
            return Some(found);
        }
        let center: Vec<f64> = (0..n).map(|i| 0.5 * (red.lb[i] + red.ub[i])).collect();
        let mut targets = vec![center];
        if let Some(f) = fallback {
            targets.push(self.restrict(f));
        }
        for c in targets {
            if self.accept(self.expand(&c)).is_none() {
                continue;
            }
            // y infeasible, c feasible: shrink toward c
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..self.opts.bisect_steps {
                let mid = 0.5 * (lo + hi);
                let p: Vec<f64> = y.iter().zip(&c).map(|(a, b)| a + mid * (b - a)).collect();
                if self.accept(self.expand(&p)).is_some() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let p: Vec<f64> = y.iter().zip(&c).map(|(a, b)| a + hi * (b - a)).collect();
            return self.accept(self.expand(&p));
        }
        None
    }

    /// Minimizer of `g^T y'` over the linear rows inside an infinity-norm ball.
    fn direction(&self, y: &[f64], g: &[f64], radius: f64) -> Option<Vec<f64>> {
        let red = &self.red;
        let lo: Vec<f64> = (0..red.n).map(|i| red.lb[i].max(y[i] - radius).min(y[i])).collect();
        let hi: Vec<f64> = (0..red.n).map(|i| red.ub[i].min(y[i] + radius).max(y[i])).collect();
        let mut lp = Lp::new(g.to_vec(), lo, hi);
        add_linear_rows(&mut lp, red);
        match lp.solve() {
            LpStatus::Optimal => Some(lp.solution().to_vec()),
            _ => None,
        }
    }

    /// Newton step on the face of active bounds and linear rows, truncated
    /// to stay feasible. Returns the new point if it decreases the penalized
    /// objective.
    fn face_newton(&self, y: &[f64], phi: f64) -> Option<(Vec<f64>, f64)> {
        let red = &self.red;
        let n = red.n;
        let near = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + b.abs());
        let free: Vec<usize> = (0..n).filter(|&i| !near(y[i], red.lb[i]) && !near(y[i], red.ub[i])).collect();
        if free.is_empty() {
            return None;
        }
        let rows = linear_rows(red);
        let active: Vec<&[f64]> = rows
            .iter()
            .filter(|(a, b, s)| *s == Sense::Eq || near(dot(a, y), *b))
            .map(|(a, _, _)| *a)
            .filter(|a| free.iter().any(|&i| a[i] != 0.0))
            .collect();
        let nf = free.len();
        let na = active.len();
        if na >= nf {
            return None;
        }
        let h = self.penalized_hessian(y);
        let g = self.penalized_gradient(y);
        let mut k = Matrix::zeros(nf + na, nf + na);
        let mut rhs = vec![0.0; nf + na];
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                k[(a, b)] = h[(i, j)];
            }
            rhs[a] = -g[i];
        }
        for (r, row) in active.iter().enumerate() {
            for (a, &i) in free.iter().enumerate() {
                k[(nf + r, a)] = row[i];
                k[(a, nf + r)] = row[i];
            }
        }
        let sol = lu_solve(k, rhs)?;
        let mut p = vec![0.0; n];
        for (a, &i) in free.iter().enumerate() {
            p[i] = sol[a];
        }
        let slope = dot(&g, &p);
        if !(slope < 0.0) {
            return None;
        }
        let mut step: f64 = 1.0;
        for &i in &free {
            if p[i] > 0.0 {
                step = step.min((red.ub[i] - y[i]) / p[i]);
            } else if p[i] < 0.0 {
                step = step.min((red.lb[i] - y[i]) / p[i]);
            }
        }
        for (a, b, s) in &rows {
            let ap = dot(a, &p);
            if *s == Sense::Le && ap > 0.0 {
                step = step.min(((b - dot(a, y)) / ap).max(0.0));
            }
        }
        let mut t = step;
        while t > 1e-12 {
            let trial: Vec<f64> = (0..n).map(|i| (y[i] + t * p[i]).clamp(red.lb[i], red.ub[i])).collect();
            let pt = self.penalized(&trial);
            if pt <= phi + self.opts.armijo * t * slope && pt < phi {
                return Some((trial, pt));
            }
            t *= 0.5;
        }
        None
    }
}

fn add_linear_rows(lp: &mut Lp, inst: &QcqpInstance) {
    for (a, b, s) in linear_rows(inst) {
        let e: Vec<(usize, f64)> = a.iter().cloned().enumerate().filter(|&(_, v)| v != 0.0).collect();
        let lo = if s == Sense::Eq { b } else { f64::NEG_INFINITY };
        lp.add_row(&e, lo, b);
    }
}

/// One-shot local search with default options.
pub fn local_search_incumbent(inst: &QcqpInstance, x_start: &[f64]) -> Option<(f64, Vec<f64>)> {
    LocalSearch::new(inst, SearchOptions::default()).run(x_start)
}

struct Incumbent {
    best: Option<(f64, Vec<f64>)>,
}

impl Incumbent {
    fn offer(&mut self, cand: Option<(f64, Vec<f64>)>) {
        if let Some((v, x)) = cand {
            if self.best.as_ref().map_or(true, |(b, _)| v < *b) {
                self.best = Some((v, x));
            }
        }
    }

    fn value(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.0)
    }

    /// Bound at or above which a node cannot improve the incumbent enough.
    fn cutoff(&self, rel_tol: f64) -> f64 {
        match self.value() {
            Some(v) => v - rel_tol * v.abs().max(1.0),
            None => f64::INFINITY,
        }
    }
}

/// Global minimization of `inst` over its (finite) box.
pub fn solve_global(inst: &QcqpInstance, opts: &BnbOptions, clock: &dyn Clock) -> Result<SolveReport> {
    if let Some(i) = (0..inst.n).find(|&i| !inst.lb[i].is_finite() || !inst.ub[i].is_finite()) {
        return Err(Error::Unbounded(i));
    }
    if !(opts.rel_tol >= 0.0 && opts.rel_tol < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("relative tolerance {} outside [0, 1)", opts.rel_tol)));
    }
    let tag = classify_convexity(inst, EIG_TOL)?;
    let model = RelaxedModel::build(inst, &tag)?;
    let search = LocalSearch::new(inst, opts.search);
    let mut inc = Incumbent { best: None };

    let report = |status, inc: &Incumbent, root_bound, best_bound: f64, nodes, max_depth, drop| {
        let incumbent = inc.value();
        let best_bound = match incumbent {
            Some(v) => best_bound.min(v),
            None => best_bound,
        };
        SolveReport {
            status,
            incumbent,
            point: inc.best.as_ref().map(|b| b.1.clone()),
            root_bound,
            best_bound,
            nodes,
            max_depth,
            elapsed: clock.elapsed(),
            gap: relative_gap(incumbent, best_bound),
            raw_bound_drop: drop,
        }
    };

    if (0..inst.n).any(|i| inst.lb[i] > inst.ub[i]) {
        return Ok(report(SolveStatus::Infeasible, &inc, f64::INFINITY, f64::INFINITY, 0, 0, 0.0));
    }
    let res = model.solve_on_box(&inst.lb, &inst.ub, &opts.relax, None);
    if res.status == RelaxStatus::Infeasible {
        return Ok(report(SolveStatus::Infeasible, &inc, f64::INFINITY, f64::INFINITY, 1, 0, 0.0));
    }
    let root_bound = res.bound;
    let root = Node::from_result(inst.lb.clone(), inst.ub.clone(), res.bound, 0, res);
    inc.offer(search.evaluate(&root.x));
    inc.offer(search.run(&root.x));
    let center: Vec<f64> = (0..inst.n).map(|i| 0.5 * (inst.lb[i] + inst.ub[i])).collect();
    inc.offer(search.run(&center));

    let mut nodes = 1usize;
    let mut max_depth = 0usize;
    let mut drop: f64 = 0.0;
    let mut closed = f64::INFINITY;
    let mut seq = 0u64;
    let mut heap = BinaryHeap::new();
    heap.push(Open { node: root, seq });

    let status = loop {
        let open = heap.peek().map_or(f64::INFINITY, |o| o.node.bound);
        if open >= inc.cutoff(opts.rel_tol) {
            closed = closed.min(open);
            break if inc.value().is_some() { SolveStatus::Optimal } else { SolveStatus::Infeasible };
        }
        if nodes >= opts.limits.node_limit {
            break SolveStatus::NodeLimit;
        }
        if clock.elapsed() >= opts.limits.time_limit {
            break SolveStatus::TimeLimit;
        }
        let node = heap.pop().expect("open bound is finite").node;
        let Some(br) = branch_select(&model, &node) else {
            closed = closed.min(node.bound);
            continue;
        };
        let i = br.var;
        let mut children = [(node.lb.clone(), node.ub.clone()), (node.lb.clone(), node.ub.clone())];
        children[0].1[i] = br.split;
        children[1].0[i] = br.split;
        for (lb, ub) in children {
            let res = model.solve_on_box(&lb, &ub, &opts.relax, node.pool.as_deref());
            nodes += 1;
            if res.status == RelaxStatus::Infeasible {
                continue;
            }
            drop = drop.max(node.bound - res.bound);
            let bound = res.bound.max(node.bound);
            let child = Node::from_result(lb, ub, bound, node.depth + 1, res);
            max_depth = max_depth.max(child.depth);
            inc.offer(search.evaluate(&child.x));
            if bound < inc.cutoff(opts.rel_tol) {
                let fallback = inc.best.as_ref().map(|b| b.1.clone());
                inc.offer(search.run_with(&child.x, opts.node_search_iter, fallback.as_deref()));
            }
            if bound < inc.cutoff(opts.rel_tol) {
                seq += 1;
                heap.push(Open { node: child, seq });
            } else {
                closed = closed.min(bound);
            }
        }
        if opts.log_stride > 0 && nodes % opts.log_stride < 2 {
            let open = heap.peek().map_or(f64::INFINITY, |o| o.node.bound);
            let bound = open.min(closed);
            log::info!(
                "node={} bound={} incumbent={} gap={}",
                nodes,
                bound,
                inc.value().unwrap_or(f64::INFINITY),
                relative_gap(inc.value(), bound)
            );
        }
    };
    let open = heap.peek().map_or(f64::INFINITY, |o| o.node.bound);
    Ok(report(status, &inc, root_bound, open.min(closed), nodes, max_depth, drop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::horn_matrix;
    use crate::instance::{LinearEquality, ProblemKind};
    use proptest::prelude::*;

    fn solve(inst: &QcqpInstance) -> SolveReport {
        solve_global(inst, &BnbOptions::default(), &NoClock).unwrap()
    }

    fn grid_min_2d(inst: &QcqpInstance, steps: usize) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..=steps {
            for b in 0..=steps {
                let x = [
                    inst.lb[0] + (inst.ub[0] - inst.lb[0]) * a as f64 / steps as f64,
                    inst.lb[1] + (inst.ub[1] - inst.lb[1]) * b as f64 / steps as f64,
                ];
                if inst.is_feasible(&x, 1e-12) {
                    best = best.min(inst.objective_value(&x));
                }
            }
        }
        best
    }

    #[test]
    fn convex_qp_closes_at_root() {
        let inst = QcqpInstance::box_qp(Matrix::from_rows(&[[2.0, 0.0], [0.0, 2.0]]), vec![-1.0, -3.0]).unwrap();
        let r = solve(&inst);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.nodes, 1);
        assert!((r.incumbent.unwrap() + 2.25).abs() < 1e-8);
    }

    #[test]
    fn bilinear_box_qp() {
        let inst = QcqpInstance::box_qp(Matrix::from_rows(&[[0.0, -2.0], [-2.0, 0.0]]), vec![0.0, 0.0]).unwrap();
        let r = solve(&inst);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.nodes <= 3, "{} nodes", r.nodes);
        assert!((r.incumbent.unwrap() + 2.0).abs() < 1e-9);
        let x = r.point.unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
        assert!((grid_min_2d(&inst, 1000) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn horn_stqp_optimum_is_zero() {
        let inst = QcqpInstance::st_qp(horn_matrix()).unwrap();
        let r = solve(&inst);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.incumbent.unwrap().abs() < 1e-6);
        assert!(r.best_bound <= 1e-9 && r.best_bound >= -1e-4);
        assert!(r.raw_bound_drop <= 1e-6);
    }

    #[test]
    fn infeasible_box_reported() {
        // x0 + x1 = 3 over the unit box
        let obj = QuadFunc::new(Matrix::zeros(2, 2), vec![1.0, 0.0], 0.0, Sense::Obj).unwrap();
        let inst = QcqpInstance::new(
            ProblemKind::Lcqp,
            obj,
            vec![],
            vec![0.0; 2],
            vec![1.0; 2],
            vec![LinearEquality { a: vec![1.0, 1.0], d: 3.0 }],
        )
        .unwrap();
        let r = solve(&inst);
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.incumbent.is_none());
    }

    #[test]
    fn node_limit_stops_early() {
        let inst = QcqpInstance::st_qp(horn_matrix()).unwrap();
        let opts = BnbOptions { limits: Limits { node_limit: 1, time_limit: 1e9 }, ..Default::default() };
        let r = solve_global(&inst, &opts, &NoClock).unwrap();
        assert_eq!(r.status, SolveStatus::NodeLimit);
        assert_eq!(r.nodes, 1);
        assert!(r.best_bound <= 0.0);
    }

    struct Expired;
    impl Clock for Expired {
        fn elapsed(&self) -> f64 {
            1e9
        }
    }

    #[test]
    fn time_limit_stops_early() {
        let inst = QcqpInstance::st_qp(horn_matrix()).unwrap();
        let r = solve_global(&inst, &BnbOptions::default(), &Expired).unwrap();
        assert_eq!(r.status, SolveStatus::TimeLimit);
    }

    fn bilinear_model() -> RelaxedModel {
        let inst = QcqpInstance::box_qp(Matrix::from_rows(&[[0.0, -2.0], [-2.0, 0.0]]), vec![0.0, 0.0]).unwrap();
        RelaxedModel::build(&inst, &classify_convexity(&inst, EIG_TOL).unwrap()).unwrap()
    }

    #[test]
    fn exact_products_fall_back_to_longest_edge() {
        let model = bilinear_model();
        let node = Node::new(vec![0.0, 0.0], vec![0.5, 1.0], 0.0, vec![0.3, 0.6], vec![0.18], 0);
        let b = branch_select(&model, &node).unwrap();
        assert_eq!(b.rule, BranchRule::LongestEdge);
        assert_eq!(b.var, 1);
        assert_eq!(b.split, 0.5);
    }

    #[test]
    fn violated_bilinear_ties_to_lowest_index() {
        let model = bilinear_model();
        let node = Node::new(vec![0.0; 2], vec![1.0; 2], -2.0, vec![0.5, 0.5], vec![0.5], 0);
        let b = branch_select(&model, &node).unwrap();
        assert_eq!(b.rule, BranchRule::Violation);
        assert_eq!(b.var, 0);
        assert_eq!(b.split, 0.5);
        // split is clipped to the middle of the interval
        let node = Node::new(vec![0.0; 2], vec![1.0; 2], -2.0, vec![0.99, 0.5], vec![0.6], 0);
        let b = branch_select(&model, &node).unwrap();
        assert!((b.split - 0.8).abs() < 1e-15);
    }

    #[test]
    fn local_search_solves_convex_qp() {
        // min 1/2 x^T Q x + c^T x over [0,1]^3 with x0 + x1 + x2 <= 1.5
        let q = Matrix::from_rows(&[[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]]);
        let c = vec![-3.0, -2.5, -2.0];
        let obj = QuadFunc::new(q, c, 0.0, Sense::Obj).unwrap();
        let row = QuadFunc::linear(vec![1.0, 1.0, 1.0], 1.5, Sense::Le);
        let inst = QcqpInstance::new(ProblemKind::Lcqp, obj, vec![row], vec![0.0; 3], vec![1.0; 3], vec![]).unwrap();
        let reference = solve(&inst).incumbent.unwrap();
        let mut state = 5u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10 {
            let start = [next(), next(), next()];
            let (v, x) = local_search_incumbent(&inst, &start).unwrap();
            assert!(inst.is_feasible(&x, 1e-9));
            assert!((v - reference).abs() < 1e-8, "{v} vs {reference}");
        }
    }

    #[test]
    fn local_search_concave_lands_on_vertex() {
        let q = Matrix::from_rows(&[[-2.0, 0.5, 0.0], [0.5, -1.0, 0.0], [0.0, 0.0, -3.0]]);
        let inst = QcqpInstance::box_qp(q, vec![0.3, -0.2, 1.0]).unwrap();
        let (_, x) = local_search_incumbent(&inst, &[0.4, 0.6, 0.45]).unwrap();
        for v in x {
            assert!(v.abs() < 1e-12 || (v - 1.0).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn local_search_substitutes_defined_auxiliaries() {
        // min t + x0 with t = x0^2 + x1^2 - x0 x1, x in [0,1]^2, t in [-1, 3]
        let obj = QuadFunc::new(Matrix::zeros(3, 3), vec![1.0, 0.0, 1.0], 0.0, Sense::Obj).unwrap();
        let q = Matrix::from_rows(&[[2.0, -1.0, 0.0], [-1.0, 2.0, 0.0], [0.0, 0.0, 0.0]]);
        let row = QuadFunc::new(q, vec![0.0, 0.0, -1.0], 0.0, Sense::Eq).unwrap();
        let inst = QcqpInstance::new(ProblemKind::Qcqp, obj, vec![row], vec![0.0, 0.0, -1.0], vec![1.0, 1.0, 3.0], vec![])
            .unwrap()
            .with_aux(1)
            .unwrap();
        let ls = LocalSearch::new(&inst, SearchOptions::default());
        assert_eq!(ls.eliminated(), 1);
        assert_eq!(ls.reduced().n, 2);
        assert!(ls.reduced().constraints.is_empty());
        let (v, x) = ls.run(&[0.7, 0.2, 0.0]).unwrap();
        assert!(inst.is_feasible(&x, 1e-12));
        assert!(v.abs() < 1e-8, "{v}");
    }

    #[test]
    fn quadratic_rows_are_restored_by_bisection() {
        // min -x0 - x1 s.t. x0^2 + x1^2 <= 1 over [0,1]^2; optimum -sqrt(2)
        let obj = QuadFunc::new(Matrix::zeros(2, 2), vec![-1.0, -1.0], 0.0, Sense::Obj).unwrap();
        let ball = QuadFunc::new(Matrix::identity(2).scaled(2.0), vec![0.0; 2], 1.0, Sense::Le).unwrap();
        let inst = QcqpInstance::new(ProblemKind::Qcqp, obj, vec![ball], vec![0.0; 2], vec![1.0; 2], vec![]).unwrap();
        let (v, x) = local_search_incumbent(&inst, &[1.0, 1.0]).unwrap();
        assert!(inst.is_feasible(&x, FEAS_TOL));
        assert!(v < -1.41 && v >= -2f64.sqrt() - 1e-6, "{v}");
        let r = solve(&inst);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.incumbent.unwrap() + 2f64.sqrt()).abs() < 2e-4);
        assert!(r.best_bound <= -2f64.sqrt() + 1e-7);
    }

    /// Variable whose split (at the same clipped point) maximizes the worse
    /// child bound, with the score of every candidate.
    fn lookahead(model: &RelaxedModel, node: &Node) -> Vec<f64> {
        let opts = RelaxOptions::default();
        (0..model.n())
            .map(|i| {
                let (l, u) = (node.lb[i], node.ub[i]);
                let w = u - l;
                if w <= 1e-9 {
                    return f64::NEG_INFINITY;
                }
                let split = node.x[i].clamp(l + 0.2 * w, u - 0.2 * w);
                let mut ub = node.ub.clone();
                ub[i] = split;
                let mut lb = node.lb.clone();
                lb[i] = split;
                let a = model.solve_on_box(&node.lb, &ub, &opts, None).bound;
                let b = model.solve_on_box(&lb, &node.ub, &opts, None).bound;
                a.min(b)
            })
            .collect()
    }

    #[test]
    fn violation_rule_tracks_lookahead() {
        let mut agree = 0;
        let mut total = 0;
        for seed in 1..=60 {
            if total >= 40 {
                break;
            }
            let inst = crate::generators::gen_boxqp(5, 1.0, seed).unwrap();
            let model = RelaxedModel::build(&inst, &classify_convexity(&inst, EIG_TOL).unwrap()).unwrap();
            let opts = RelaxOptions::default();
            let root = model.solve_on_box(&inst.lb, &inst.ub, &opts, None);
            let mut queue = alloc::collections::VecDeque::new();
            queue.push_back(Node::new(inst.lb.clone(), inst.ub.clone(), root.bound, root.x, root.lifted, 0));
            let mut visited = 0;
            while let Some(node) = queue.pop_front() {
                if visited == 10 {
                    break;
                }
                visited += 1;
                let b = branch_select(&model, &node).unwrap();
                if b.rule != BranchRule::Violation {
                    continue;
                }
                let scores = lookahead(&model, &node);
                let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                total += 1;
                if scores[b.var] >= best - 1e-9 * (1.0 + best.abs()) {
                    agree += 1;
                }
                for (l, u) in [(b.var, true), (b.var, false)] {
                    let (mut lb, mut ub) = (node.lb.clone(), node.ub.clone());
                    if u {
                        ub[l] = b.split;
                    } else {
                        lb[l] = b.split;
                    }
                    let r = model.solve_on_box(&lb, &ub, &opts, None);
                    if r.status != RelaxStatus::Infeasible {
                        queue.push_back(Node::new(lb, ub, r.bound, r.x, r.lifted, node.depth + 1));
                    }
                }
            }
        }
        assert!(total >= 20, "{agree}/{total}");
        let rate = agree as f64 / total as f64;
        assert!(rate >= 0.6, "agreement {agree}/{total}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bounds_bracket_grid_optimum(
            q in proptest::collection::vec(-10i32..=10, 3),
            c in proptest::collection::vec(-10i32..=10, 2),
        ) {
            let qm = Matrix::from_rows(&[[q[0] as f64, q[1] as f64], [q[1] as f64, q[2] as f64]]);
            let inst = QcqpInstance::box_qp(qm, c.iter().map(|&v| v as f64).collect()).unwrap();
            let r = solve(&inst);
            let grid = grid_min_2d(&inst, 1000);
            prop_assert_eq!(r.status, SolveStatus::Optimal);
            let v = r.incumbent.unwrap();
            prop_assert!(r.best_bound <= grid + 1e-6);
            prop_assert!(v <= grid + 1e-4 * grid.abs().max(1.0) + 1e-9);
            prop_assert!(r.gap <= 1e-4);
            prop_assert!(r.raw_bound_drop <= 1e-6);
        }
    }
}
