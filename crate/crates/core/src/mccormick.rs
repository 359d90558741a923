//! McCormick cells and McCormick relaxations of quadratic programs.
//!
//! A relaxation replaces every product `x_i x_j` appearing in a nonconvex row
//! (or a nonconvex objective) by a lifted variable `X_ij` constrained by its
//! four-inequality envelope over the current box. Convex rows are kept
//! quadratic and enforced by tangent cuts on a separable eigen-split, and
//! `X_ii >= x_i^2` is enforced the same way. The resulting LP is solved by
//! the dual simplex in [`crate::lp`] inside a separation loop: envelope rows
//! are added lazily when violated, tangents when the convex parts are off by
//! more than the tolerance.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::instance::{product_interval, square_interval, ConvexityTag, QcqpInstance, Sense};
use crate::linalg::{eigh_jacobi, Matrix};
use crate::lp::{Lp, LpStatus};

/// One of the four envelope inequalities of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellSide {
    /// `X >= l_j x_i + l_i x_j - l_i l_j`
    UnderLow,
    /// `X >= u_j x_i + u_i x_j - u_i u_j`
    UnderHigh,
    /// `X <= u_j x_i + l_i x_j - l_i u_j`
    OverA,
    /// `X <= l_j x_i + u_i x_j - u_i l_j`
    OverB,
}

impl CellSide {
    pub const ALL: [CellSide; 4] = [CellSide::UnderLow, CellSide::UnderHigh, CellSide::OverA, CellSide::OverB];

    pub fn is_under(self) -> bool {
        matches!(self, CellSide::UnderLow | CellSide::UnderHigh)
    }
}

/// Affine piece `a_i x_i + a_j x_j + c` of one envelope inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRow {
    pub side: CellSide,
    pub a_i: f64,
    pub a_j: f64,
    pub c: f64,
}

impl CellRow {
    pub fn eval(&self, xi: f64, xj: f64) -> f64 {
        self.a_i * xi + self.a_j * xj + self.c
    }

    /// Positive when `(X, x_i, x_j)` violates the inequality.
    pub fn violation(&self, xi: f64, xj: f64, xx: f64) -> f64 {
        let f = self.eval(xi, xj);
        if self.side.is_under() {
            f - xx
        } else {
            xx - f
        }
    }
}

/// Envelope of `X_ij = x_i x_j` over `[l_i,u_i] x [l_j,u_j]`. With `i == j`
/// the under-rows are the tangents of `x^2` at the bounds and both over-rows
/// are the secant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCormickCell {
    pub i: usize,
    pub j: usize,
    pub li: f64,
    pub ui: f64,
    pub lj: f64,
    pub uj: f64,
}

impl McCormickCell {
    pub fn new(i: usize, j: usize, li: f64, ui: f64, lj: f64, uj: f64) -> Self {
        Self { i, j, li, ui, lj, uj }
    }

    pub fn is_diagonal(&self) -> bool {
        self.i == self.j
    }

    /// Whether the box is a single point in one of the coordinates, in which
    /// case the envelope pins `X` to the exact product.
    pub fn is_degenerate(&self) -> bool {
        self.li == self.ui || self.lj == self.uj
    }

    pub fn row(&self, side: CellSide) -> CellRow {
        let (li, ui, lj, uj) = (self.li, self.ui, self.lj, self.uj);
        let (a_i, a_j, c) = match side {
            CellSide::UnderLow => (lj, li, -li * lj),
            CellSide::UnderHigh => (uj, ui, -ui * uj),
            CellSide::OverA => (uj, li, -li * uj),
            CellSide::OverB => (lj, ui, -ui * lj),
        };
        CellRow { side, a_i, a_j, c }
    }

    pub fn rows(&self) -> [CellRow; 4] {
        CellSide::ALL.map(|s| self.row(s))
    }

    /// Largest violation over the four inequalities (zero if none).
    pub fn violation(&self, xi: f64, xj: f64, xx: f64) -> f64 {
        self.rows().iter().fold(0.0, |m, r| m.max(r.violation(xi, xj, xx)))
    }

    /// Interval of `X` allowed by the envelope at `(x_i, x_j)`.
    pub fn range(&self, xi: f64, xj: f64) -> (f64, f64) {
        let r = self.rows();
        let lo = r[0].eval(xi, xj).max(r[1].eval(xi, xj));
        let hi = r[2].eval(xi, xj).min(r[3].eval(xi, xj));
        (lo, hi)
    }
}

/// Convenience constructor matching the cell of pair `(i, j)`.
pub fn mccormick_cell(i: usize, j: usize, li: f64, ui: f64, lj: f64, uj: f64) -> McCormickCell {
    McCormickCell::new(i, j, li, ui, lj, uj)
}

/// Inactive off-diagonal cells violated by more than `tol`, sorted by
/// decreasing violation with ties broken by `(i, j)`.
pub fn violated_cells(
    x: &[f64],
    xx: &Matrix,
    lb: &[f64],
    ub: &[f64],
    active: &BTreeSet<(usize, usize)>,
    tol: f64,
) -> Vec<(usize, usize, f64)> {
    let n = x.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if active.contains(&(i, j)) {
                continue;
            }
            let cell = McCormickCell::new(i, j, lb[i], ub[i], lb[j], ub[j]);
            let v = cell.violation(x[i], x[j], xx[(i, j)]);
            if v > tol {
                out.push((i, j, v));
            }
        }
    }
    out.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap_or(core::cmp::Ordering::Equal).then((a.0, a.1).cmp(&(b.0, b.1))));
    out
}

/// `1/2 lambda (v^T x)^2`, one term of the eigen-split of a convex form.
#[derive(Debug, Clone)]
pub struct EpiTerm {
    pub lambda: f64,
    pub v: Vec<(usize, f64)>,
}

impl EpiTerm {
    fn w(&self, x: &[f64]) -> f64 {
        self.v.iter().map(|&(i, a)| a * x[i]).sum()
    }

    fn w_range(&self, lb: &[f64], ub: &[f64]) -> (f64, f64) {
        let (mut lo, mut hi) = (0.0, 0.0);
        for &(i, a) in &self.v {
            if a >= 0.0 {
                lo += a * lb[i];
                hi += a * ub[i];
            } else {
                lo += a * ub[i];
                hi += a * lb[i];
            }
        }
        (lo, hi)
    }
}

/// Positive-curvature part of a PSD form as separable terms.
fn eigen_split(q: &Matrix) -> Result<Vec<EpiTerm>> {
    if q.is_zero() {
        return Ok(Vec::new());
    }
    let n = q.rows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || q[(i, j)] == 0.0));
    if diagonal {
        return Ok((0..n)
            .filter(|&i| q[(i, i)] > 0.0)
            .map(|i| EpiTerm { lambda: q[(i, i)], v: vec![(i, 1.0)] })
            .collect());
    }
    let eig = eigh_jacobi(q)?;
    let top = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut terms = Vec::new();
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= 1e-12 * top {
            continue;
        }
        let v = (0..n).map(|i| (i, eig.vectors[(i, k)])).filter(|&(_, a)| a.abs() > 1e-15).collect();
        terms.push(EpiTerm { lambda: lam, v });
    }
    Ok(terms)
}

#[derive(Debug, Clone)]
struct ModelRow {
    x: Vec<(usize, f64)>,
    pairs: Vec<(usize, f64)>,
    terms: Vec<usize>,
    lo: f64,
    hi: f64,
}

/// Options for the separation loop of a relaxation solve.
#[derive(Debug, Clone, Copy)]
pub struct RelaxOptions {
    /// Violation of envelope rows treated as zero.
    pub linear_tol: f64,
    /// Relative violation of tangent-enforced convex parts treated as zero.
    pub convex_tol: f64,
    pub max_rounds: usize,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self { linear_tol: 1e-9, convex_tol: 1e-7, max_rounds: 200 }
    }
}

impl RelaxOptions {
    /// Tighter tangents for one-off root bounds, where the value itself is
    /// reported and compared rather than pruned against.
    pub fn root() -> Self {
        Self { convex_tol: 1e-9, max_rounds: 1000, ..Self::default() }
    }
}

/// Rounds without objective progress after which separation stops; cuts
/// violated only within the LP tolerance would otherwise repeat forever.
const FLAT_ROUNDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxStatus {
    Optimal,
    Infeasible,
    /// Round or iteration cap hit; the bound is still valid.
    Stalled,
}

/// Envelope sides and tangent points that were binding at the end of a
/// solve, for seeding a solve on a sub-box. Tangent points stay valid
/// everywhere; envelope sides are re-instantiated on the new box.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    pub sides: BTreeSet<(usize, CellSide)>,
    pub diag_points: Vec<(usize, f64)>,
    pub term_points: Vec<(usize, f64)>,
}

const POOL_POINT_CAP: usize = 600;

#[derive(Debug, Clone, Copy)]
enum PoolEntry {
    Side(usize, CellSide),
    Diag(usize, f64),
    Term(usize, f64),
}

#[derive(Debug, Clone)]
pub struct RelaxResult {
    pub status: RelaxStatus,
    /// Certified lower bound (Lagrangian bound of the final LP).
    pub bound: f64,
    /// Objective of the final LP point.
    pub value: f64,
    pub x: Vec<f64>,
    /// Lifted values, indexed like [`RelaxedModel::pairs`].
    pub lifted: Vec<f64>,
    pub pool: CutPool,
    pub rounds: usize,
    pub lp_iterations: usize,
}

/// McCormick relaxation of an instance: which products are lifted, which
/// rows are linearized and which stay convex.
#[derive(Debug, Clone)]
pub struct RelaxedModel {
    pub base: QcqpInstance,
    pub tag: ConvexityTag,
    pairs: Vec<(usize, usize)>,
    pair_of: BTreeMap<(usize, usize), usize>,
    obj_x: Vec<f64>,
    obj_pairs: BTreeMap<usize, f64>,
    obj_terms: Vec<usize>,
    rows: Vec<ModelRow>,
    terms: Vec<EpiTerm>,
    pair_weight: Vec<f64>,
}

impl RelaxedModel {
    /// Builds the relaxation. Fails if a variable has an infinite bound.
    pub fn build(inst: &QcqpInstance, tag: &ConvexityTag) -> Result<Self> {
        if let Some(i) = (0..inst.n).find(|&i| !inst.lb[i].is_finite() || !inst.ub[i].is_finite()) {
            return Err(Error::Unbounded(i));
        }
        let n = inst.n;
        let mut model = Self {
            base: inst.clone(),
            tag: tag.clone(),
            pairs: Vec::new(),
            pair_of: BTreeMap::new(),
            obj_x: inst.objective.c.clone(),
            obj_pairs: BTreeMap::new(),
            obj_terms: Vec::new(),
            rows: Vec::new(),
            terms: Vec::new(),
            pair_weight: Vec::new(),
        };
        // convex parts as (form, epigraph terms) for the lifted cuts below
        let mut convex_parts: Vec<(&Matrix, Vec<usize>)> = Vec::new();
        if tag.objective_convex {
            for t in eigen_split(&inst.objective.q)? {
                model.obj_terms.push(model.terms.len());
                model.terms.push(t);
            }
            convex_parts.push((&inst.objective.q, model.obj_terms.clone()));
        } else {
            for (k, v) in model.linearize(&inst.objective.q) {
                model.obj_pairs.insert(k, v);
            }
        }
        for (r, f) in inst.constraints.iter().enumerate() {
            let x: Vec<(usize, f64)> = sparse(&f.c);
            let (lo, hi) = if f.sense == Sense::Eq { (f.b, f.b) } else { (f64::NEG_INFINITY, f.b) };
            let row = if f.is_linear() {
                ModelRow { x, pairs: vec![], terms: vec![], lo, hi }
            } else if f.sense == Sense::Le && tag.constraint_convex[r] {
                let mut terms = Vec::new();
                for t in eigen_split(&f.q)? {
                    terms.push(model.terms.len());
                    model.terms.push(t);
                }
                convex_parts.push((&f.q, terms.clone()));
                ModelRow { x, pairs: vec![], terms, lo, hi }
            } else {
                let pairs = model.linearize(&f.q);
                ModelRow { x, pairs, terms: vec![], lo, hi }
            };
            model.rows.push(row);
        }
        for e in &inst.equalities {
            model.rows.push(ModelRow { x: sparse(&e.a), pairs: vec![], terms: vec![], lo: e.d, hi: e.d });
        }
        // Once products are lifted at all, each convex part also gets
        // `sum eta >= 1/2 Q . X` over the same lifted products. On a
        // reformulated model this keeps every node bound at or above the
        // plain relaxation's; fully convex models keep pure tangents.
        if !model.pairs.is_empty() {
            for (q, terms) in convex_parts {
                if terms.is_empty() {
                    continue;
                }
                let pairs = model.linearize_unweighted(q).into_iter().map(|(k, v)| (k, -v)).collect();
                model.rows.push(ModelRow { x: vec![], pairs, terms, lo: 0.0, hi: f64::INFINITY });
            }
        }
        debug_assert!(model.pairs.iter().all(|&(i, j)| i <= j && j < n));
        Ok(model)
    }

    /// Pair coefficients of `1/2 Q . X`, registering the lifted pairs.
    fn linearize(&mut self, q: &Matrix) -> Vec<(usize, f64)> {
        let out = self.linearize_unweighted(q);
        for &(k, v) in &out {
            self.pair_weight[k] += v.abs();
        }
        out
    }

    /// As [`Self::linearize`] without counting towards branching weights.
    fn linearize_unweighted(&mut self, q: &Matrix) -> Vec<(usize, f64)> {
        let n = q.rows();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                let v = if i == j { 0.5 * q[(i, i)] } else { q[(i, j)] };
                if v == 0.0 {
                    continue;
                }
                let k = match self.pair_of.get(&(i, j)) {
                    Some(&k) => k,
                    None => {
                        let k = self.pairs.len();
                        self.pairs.push((i, j));
                        self.pair_of.insert((i, j), k);
                        self.pair_weight.push(0.0);
                        k
                    }
                };
                out.push((k, v));
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.base.n
    }

    /// Lifted pairs `(i, j)` with `i <= j`.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.pair_of.get(&key).copied()
    }

    /// Summed absolute coefficient of each lifted pair over linearized rows.
    pub fn pair_weights(&self) -> &[f64] {
        &self.pair_weight
    }

    /// Off-diagonal lifted pairs, i.e. the active cells.
    pub fn active_cells(&self) -> BTreeSet<(usize, usize)> {
        self.pairs.iter().cloned().filter(|&(i, j)| i != j).collect()
    }

    pub fn has_lifted(&self) -> bool {
        !self.pairs.is_empty()
    }

    /// Number of nonconvex rows that were linearized.
    pub fn linearized_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.pairs.is_empty()).count()
    }

    /// Full lifted matrix: lifted entries where present, `x_i x_j` elsewhere.
    pub fn x_matrix(&self, res: &RelaxResult) -> Matrix {
        let n = self.n();
        let mut m = Matrix::from_fn(n, n, |i, j| res.x[i] * res.x[j]);
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            m[(i, j)] = res.lifted[k];
            m[(j, i)] = res.lifted[k];
        }
        m
    }

    pub fn solve(&self, opts: &RelaxOptions) -> RelaxResult {
        self.solve_on_box(&self.base.lb, &self.base.ub, opts, None)
    }

    /// Solves the relaxation with envelopes built on `[lb, ub]`.
    pub fn solve_on_box(&self, lb: &[f64], ub: &[f64], opts: &RelaxOptions, seed: Option<&CutPool>) -> RelaxResult {
        let n = self.n();
        let p = self.pairs.len();
        let nt = self.terms.len();
        let pcol = |k: usize| n + k;
        let tcol = |t: usize| n + p + t;

        let mut cost = self.obj_x.clone();
        let mut clo = lb.to_vec();
        let mut chi = ub.to_vec();
        cost.resize(n + p + nt, 0.0);
        for (&k, &v) in &self.obj_pairs {
            cost[pcol(k)] = v;
        }
        for &t in &self.obj_terms {
            cost[tcol(t)] = 1.0;
        }
        let cells: Vec<McCormickCell> =
            self.pairs.iter().map(|&(i, j)| McCormickCell::new(i, j, lb[i], ub[i], lb[j], ub[j])).collect();
        for &(i, j) in &self.pairs {
            let (lo, hi) = if i == j { square_interval(lb[i], ub[i]) } else { product_interval(lb[i], ub[i], lb[j], ub[j]) };
            clo.push(lo);
            chi.push(hi);
        }
        let w_ranges: Vec<(f64, f64)> = self.terms.iter().map(|t| t.w_range(lb, ub)).collect();
        for (t, &(wl, wh)) in self.terms.iter().zip(&w_ranges) {
            let (sl, sh) = square_interval(wl, wh);
            clo.push(0.5 * t.lambda * sl);
            chi.push(0.5 * t.lambda * sh);
        }
        let mut lp = Lp::new(cost, clo, chi);

        for r in &self.rows {
            let mut e: Vec<(usize, f64)> = r.x.clone();
            e.extend(r.pairs.iter().map(|&(k, v)| (pcol(k), v)));
            e.extend(r.terms.iter().map(|&t| (tcol(t), 1.0)));
            lp.add_row(&e, r.lo, r.hi);
        }

        // LP row of every added side and tangent point
        let mut pool_rows: Vec<(PoolEntry, usize)> = Vec::new();
        let mut added: BTreeSet<(usize, CellSide)> = BTreeSet::new();
        let add_side = |lp: &mut Lp, added: &mut BTreeSet<(usize, CellSide)>, pool: &mut Vec<(PoolEntry, usize)>, k: usize, side: CellSide| {
            if !added.insert((k, side)) {
                return;
            }
            let cell = &cells[k];
            let row = cell.row(side);
            let mut e = vec![(pcol(k), 1.0), (cell.i, -row.a_i), (cell.j, -row.a_j)];
            if cell.i == cell.j {
                e.truncate(2);
                e[1].1 = -(row.a_i + row.a_j);
            }
            let r = if side.is_under() {
                lp.add_row(&e, row.c, f64::INFINITY)
            } else {
                lp.add_row(&e, f64::NEG_INFINITY, row.c)
            };
            pool.push((PoolEntry::Side(k, side), r));
        };
        let add_diag_tangent = |lp: &mut Lp, pool: &mut Vec<(PoolEntry, usize)>, k: usize, x0: f64| {
            let i = self.pairs[k].0;
            let r = lp.add_row(&[(pcol(k), 1.0), (i, -2.0 * x0)], -x0 * x0, f64::INFINITY);
            pool.push((PoolEntry::Diag(k, x0), r));
        };
        let add_term_tangent = |lp: &mut Lp, pool: &mut Vec<(PoolEntry, usize)>, t: usize, w0: f64| {
            let term = &self.terms[t];
            let mut e = vec![(tcol(t), 1.0)];
            e.extend(term.v.iter().map(|&(i, a)| (i, -term.lambda * w0 * a)));
            let r = lp.add_row(&e, -0.5 * term.lambda * w0 * w0, f64::INFINITY);
            pool.push((PoolEntry::Term(t, w0), r));
        };

        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            if i == j {
                add_side(&mut lp, &mut added, &mut pool_rows, k, CellSide::OverA);
                for x0 in [lb[i], ub[i], 0.5 * (lb[i] + ub[i])] {
                    add_diag_tangent(&mut lp, &mut pool_rows, k, x0);
                }
            } else if let Some(&v) = self.obj_pairs.get(&k) {
                let sides = if v > 0.0 {
                    [CellSide::UnderLow, CellSide::UnderHigh]
                } else {
                    [CellSide::OverA, CellSide::OverB]
                };
                for s in sides {
                    add_side(&mut lp, &mut added, &mut pool_rows, k, s);
                }
            }
        }
        for (t, &(wl, wh)) in w_ranges.iter().enumerate() {
            for w0 in [wl, wh, 0.5 * (wl + wh)] {
                add_term_tangent(&mut lp, &mut pool_rows, t, w0);
            }
        }
        if let Some(seed) = seed {
            for &(k, s) in &seed.sides {
                add_side(&mut lp, &mut added, &mut pool_rows, k, s);
            }
            for &(k, x0) in &seed.diag_points {
                let i = self.pairs[k].0;
                if x0 > lb[i] && x0 < ub[i] {
                    add_diag_tangent(&mut lp, &mut pool_rows, k, x0);
                }
            }
            for &(t, w0) in &seed.term_points {
                let (wl, wh) = w_ranges[t];
                if w0 > wl && w0 < wh {
                    add_term_tangent(&mut lp, &mut pool_rows, t, w0);
                }
            }
        }

        let mut in_obj = vec![false; nt];
        self.obj_terms.iter().for_each(|&t| in_obj[t] = true);
        let mut rounds = 0;
        let mut flat = 0;
        let mut last = f64::NEG_INFINITY;
        let status = loop {
            rounds += 1;
            match lp.solve() {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => break RelaxStatus::Infeasible,
                LpStatus::IterationLimit => break RelaxStatus::Stalled,
            }
            let obj = lp.objective();
            flat = if obj - last <= 1e-12 * (1.0 + obj.abs()) { flat + 1 } else { 0 };
            last = obj;
            if flat >= FLAT_ROUNDS {
                break RelaxStatus::Optimal;
            }
            let z = lp.solution().to_vec();
            let mut new_rows = 0;
            for (k, cell) in cells.iter().enumerate() {
                if cell.i == cell.j {
                    continue;
                }
                for s in CellSide::ALL {
                    if added.contains(&(k, s)) {
                        continue;
                    }
                    let row = cell.row(s);
                    let v = row.violation(z[cell.i], z[cell.j], z[pcol(k)]);
                    if v > opts.linear_tol * (1.0 + row.c.abs()) {
                        add_side(&mut lp, &mut added, &mut pool_rows, k, s);
                        new_rows += 1;
                    }
                }
            }
            for (k, &(i, j)) in self.pairs.iter().enumerate() {
                if i != j {
                    continue;
                }
                let xx = z[pcol(k)];
                if z[i] * z[i] - xx > opts.convex_tol * xx.abs().max(1.0) {
                    add_diag_tangent(&mut lp, &mut pool_rows, k, z[i]);
                    new_rows += 1;
                }
            }
            // an objective term's violation goes one-for-one into the bound,
            // so it is measured against the objective rather than the term
            let obj_scale = (obj + self.base.obj_constant).abs().max(1.0);
            for (t, term) in self.terms.iter().enumerate() {
                let w = term.w(&z);
                let eta = z[tcol(t)];
                let scale = if in_obj[t] { obj_scale } else { eta.abs().max(1.0) };
                if 0.5 * term.lambda * w * w - eta > opts.convex_tol * scale {
                    add_term_tangent(&mut lp, &mut pool_rows, t, w);
                    new_rows += 1;
                }
            }
            if new_rows == 0 {
                break RelaxStatus::Optimal;
            }
            if rounds >= opts.max_rounds {
                // one last solve so the bound reflects every added row
                let st = lp.solve();
                break if st == LpStatus::Infeasible { RelaxStatus::Infeasible } else { RelaxStatus::Stalled };
            }
        };

        let z = lp.solution();
        let c0 = self.base.obj_constant;
        let duals = lp.duals();
        let mut pool = CutPool::default();
        for (entry, r) in pool_rows {
            if duals[r].abs() <= 1e-12 {
                continue;
            }
            match entry {
                PoolEntry::Side(k, s) => {
                    pool.sides.insert((k, s));
                }
                PoolEntry::Diag(k, x0) => pool.diag_points.push((k, x0)),
                PoolEntry::Term(t, w0) => pool.term_points.push((t, w0)),
            }
        }
        trim_points(&mut pool.diag_points);
        trim_points(&mut pool.term_points);
        let bound = if status == RelaxStatus::Infeasible { f64::INFINITY } else { lp.dual_bound() + c0 };
        RelaxResult {
            status,
            bound,
            value: lp.objective() + c0,
            x: z[..n].to_vec(),
            lifted: z[n..n + p].to_vec(),
            pool,
            rounds,
            lp_iterations: lp.iterations(),
        }
    }
}

fn trim_points(v: &mut Vec<(usize, f64)>) {
    v.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal)));
    v.dedup_by(|a, b| a.0 == b.0 && (a.1 - b.1).abs() <= 1e-12 * (1.0 + a.1.abs()));
    if v.len() > POOL_POINT_CAP {
        let step = v.len() as f64 / POOL_POINT_CAP as f64;
        let keep: Vec<(usize, f64)> = (0..POOL_POINT_CAP).map(|k| v[(k as f64 * step) as usize]).collect();
        *v = keep;
    }
}

fn sparse(v: &[f64]) -> Vec<(usize, f64)> {
    v.iter().cloned().enumerate().filter(|&(_, a)| a != 0.0).collect()
}

/// `build_mcr` on the instance's own box.
pub fn build_mcr(inst: &QcqpInstance, tag: &ConvexityTag) -> Result<RelaxedModel> {
    RelaxedModel::build(inst, tag)
}

/// Root bound of the relaxation, solved with [`RelaxOptions::root`].
pub fn relaxation_bound(model: &RelaxedModel) -> RelaxResult {
    model.solve(&RelaxOptions::root())
}
