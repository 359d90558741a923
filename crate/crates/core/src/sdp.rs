//! Conic programs with one PSD block and an operator-splitting solver.
//!
//! Every problem has the form `min q^T z + const` subject to `A z + s = b`
//! with `s` in a product of the zero cone, the nonnegative orthant and one
//! PSD cone stored as `svec` (off-diagonal entries scaled by `sqrt(2)`).
//! The builders here produce the SDP+RLT relaxation of a QCQP, its
//! linearly-constrained variant with the squared-residual rows, and the
//! variable bounding problems used when an instance comes without a box.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::generators;
use crate::instance::{ProblemKind, QcqpInstance, Sense};
use crate::linalg::{eigh_jacobi, min_eigenvalue, norm_inf, Cholesky, EigDecomp, Matrix};
use crate::mccormick::{violated_cells, CellSide};

const SQRT2: f64 = core::f64::consts::SQRT_2;
const SCALE_MIN: f64 = 1e-4;
const SCALE_MAX: f64 = 1e4;
const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;
/// Cold eigendecompositions are forced this often to stop the warm basis
/// from drifting away from orthogonality.
const EIG_REFRESH: usize = 200;

/// Identifies a row so that multipliers can be read back and warm starts
/// can survive rows being added between solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowKey {
    /// Quadratic constraint `k` of the instance.
    Constraint(usize),
    /// Linear equality `a_k^T x = d_k`.
    LinEq(usize),
    /// Squared residual row `(a a^T).X - 2 d a^T x = -d^2` of equality `k`.
    GammaEq(usize),
    /// `X_ii <= x_i`.
    Diag(usize),
    /// One envelope inequality of the unit-box cell of `(i, j)`, `i < j`.
    Cell(usize, usize, CellSide),
    /// Entry `k` of the PSD block in `svec` order.
    Psd(usize),
    Custom(usize),
}

/// `entries . z + s = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicRow {
    pub key: RowKey,
    pub entries: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BuildKind {
    Qcqp,
    Lcqp,
    Bounding,
}

/// How the variables of a lifted problem map back to `(x, X)`.
#[derive(Debug, Clone, PartialEq)]
struct Layout {
    n: usize,
    kind: BuildKind,
    m_constraints: usize,
    m_eq: usize,
    gamma_fixed: Option<Vec<f64>>,
}

/// Conic program with zero-cone rows, nonnegative rows and at most one PSD
/// block. Rows are kept grouped by cone in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    nvars: usize,
    pub cost: Vec<f64>,
    pub constant: f64,
    eq: Vec<ConicRow>,
    le: Vec<ConicRow>,
    psd: Vec<ConicRow>,
    psd_order: usize,
    var_lo: Option<Vec<f64>>,
    var_hi: Option<Vec<f64>>,
    trace_bound: Option<f64>,
    layout: Option<Layout>,
}

impl ConicProblem {
    pub fn new(nvars: usize) -> Self {
        Self {
            nvars,
            cost: vec![0.0; nvars],
            constant: 0.0,
            eq: Vec::new(),
            le: Vec::new(),
            psd: Vec::new(),
            psd_order: 0,
            var_lo: None,
            var_hi: None,
            trace_bound: None,
            layout: None,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn nrows(&self) -> usize {
        self.eq.len() + self.le.len() + self.psd.len()
    }

    pub fn n_eq(&self) -> usize {
        self.eq.len()
    }

    pub fn n_le(&self) -> usize {
        self.le.len()
    }

    pub fn psd_order(&self) -> usize {
        self.psd_order
    }

    /// Rows in solver order: equalities, inequalities, PSD entries.
    pub fn rows(&self) -> impl Iterator<Item = &ConicRow> {
        self.eq.iter().chain(self.le.iter()).chain(self.psd.iter())
    }

    pub fn add_eq(&mut self, key: RowKey, entries: Vec<(usize, f64)>, rhs: f64) {
        self.eq.push(ConicRow { key, entries, rhs });
    }

    /// `entries . z <= rhs`.
    pub fn add_le(&mut self, key: RowKey, entries: Vec<(usize, f64)>, rhs: f64) {
        self.le.push(ConicRow { key, entries, rhs });
    }

    /// Sets the PSD block `C + sum coef * z_var * E_(r,c) >= 0` where each
    /// term `(var, r, c, coef)` touches the symmetric position `(r, c)`.
    pub fn set_psd(&mut self, order: usize, constant: &Matrix, terms: &[(usize, usize, usize, f64)]) {
        let mut by_pos: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
        for &(var, r, c, coef) in terms {
            let pos = if r <= c { (r, c) } else { (c, r) };
            by_pos.entry(pos).or_default().push((var, coef));
        }
        self.psd.clear();
        self.psd_order = order;
        let mut k = 0;
        for r in 0..order {
            for c in r..order {
                let w = if r == c { 1.0 } else { SQRT2 };
                let entries = by_pos
                    .get(&(r, c))
                    .map(|v| v.iter().map(|&(var, coef)| (var, -w * coef)).collect())
                    .unwrap_or_default();
                self.psd.push(ConicRow { key: RowKey::Psd(k), entries, rhs: w * constant[(r, c)] });
                k += 1;
            }
        }
    }

    /// Box known to contain every feasible point; enables a certified dual
    /// bound that stays valid when the dual residual is not exactly zero.
    pub fn set_var_box(&mut self, lo: Vec<f64>, hi: Vec<f64>, trace_bound: f64) {
        self.var_lo = Some(lo);
        self.var_hi = Some(hi);
        self.trace_bound = Some(trace_bound);
    }

    fn validate(&self) -> Result<()> {
        if self.cost.len() != self.nvars {
            return Err(Error::Dimension(format!("cost has {} entries for {} variables", self.cost.len(), self.nvars)));
        }
        let expect = self.psd_order * (self.psd_order + 1) / 2;
        if self.psd.len() != expect {
            return Err(Error::Dimension(format!("psd block of order {} needs {} rows", self.psd_order, expect)));
        }
        for row in self.rows() {
            if let Some(&(j, _)) = row.entries.iter().find(|&&(j, _)| j >= self.nvars) {
                return Err(Error::Dimension(format!("row {:?} references variable {}", row.key, j)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConicStatus {
    Optimal,
    Inaccurate,
    InfeasibleOrUnattained,
}

impl ConicStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ConicStatus::Optimal => "OPTIMAL",
            ConicStatus::Inaccurate => "INACCURATE",
            ConicStatus::InfeasibleOrUnattained => "INFEASIBLE_OR_UNATTAINED",
        }
    }
}

impl core::fmt::Display for ConicStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdmmSettings {
    pub max_iter: usize,
    pub tol: f64,
    pub sigma: f64,
    /// Over-relaxation factor.
    pub alpha: f64,
    pub rho: f64,
    /// Step multiplier for equality rows.
    pub eq_rho_scale: f64,
    pub check_every: usize,
    pub adaptive_rho: bool,
    pub scaling_passes: usize,
    /// Record one [`IterLog`] entry per residual check.
    pub log: bool,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        Self {
            max_iter: 50_000,
            tol: 1e-7,
            sigma: 1e-6,
            alpha: 1.6,
            rho: 0.1,
            eq_rho_scale: 1e3,
            check_every: 25,
            adaptive_rho: true,
            scaling_passes: 10,
            log: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterLog {
    pub iter: usize,
    pub primal_res: f64,
    pub dual_res: f64,
    pub gap: f64,
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// Lower bound on the optimal value implied by the current dual iterate;
    /// `-inf` when the problem carries no variable box.
    pub dual_bound: f64,
}

/// Multipliers of the unit-box cell rows as symmetric matrices with zero
/// diagonal. Each unordered pair stores half of its row multiplier in both
/// triangles, so the lifted Hessian picks up `-2M - 2N + 2R + 2S`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMultipliers {
    /// `X_ij >= 0`
    pub m: Matrix,
    /// `X_ij >= x_i + x_j - 1`
    pub n: Matrix,
    /// `X_ij <= x_i`
    pub r: Matrix,
    /// `X_ij <= x_j`
    pub s: Matrix,
}

impl CellMultipliers {
    fn zeros(n: usize) -> Self {
        Self { m: Matrix::zeros(n, n), n: Matrix::zeros(n, n), r: Matrix::zeros(n, n), s: Matrix::zeros(n, n) }
    }
}

/// Primal and dual sides of a conic solve.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: ConicStatus,
    pub x: Vec<f64>,
    pub xx: Matrix,
    /// Dual objective value.
    pub tau: f64,
    /// Multipliers of the quadratic constraints.
    pub gamma: Vec<f64>,
    /// Weights of the squared-residual rows, free or fixed.
    pub gamma_eq: Vec<f64>,
    pub beta: Vec<f64>,
    pub mu: Vec<f64>,
    pub cells: CellMultipliers,
    /// Dual matrix of the PSD block, order `n + 1` for lifted problems.
    pub psd_dual: Matrix,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub dual_bound: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub log: Vec<IterLog>,
    pub z: Vec<f64>,
    pub slack: Vec<f64>,
    /// Row multipliers in solver order, each in the dual cone.
    pub dual: Vec<f64>,
    pub rho: f64,
}

impl ConicSolution {
    /// Bound on the optimal value used downstream: the certified dual bound
    /// when the problem carries a box, otherwise the dual objective.
    pub fn bound(&self) -> f64 {
        if self.dual_bound.is_finite() {
            self.dual_bound
        } else {
            self.dual_obj
        }
    }

    pub fn is_usable(&self) -> bool {
        self.status != ConicStatus::InfeasibleOrUnattained
    }

    pub fn warm_start(&self, p: &ConicProblem) -> WarmStart {
        let rows = p
            .rows()
            .zip(self.slack.iter().zip(self.dual.iter()))
            .map(|(row, (&s, &y))| (row.key, (s, y)))
            .collect();
        WarmStart { z: self.z.clone(), rows, rho: self.rho }
    }
}

/// Starting point carried between related solves.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub z: Vec<f64>,
    pub rows: BTreeMap<RowKey, (f64, f64)>,
    pub rho: f64,
}

/// Set of active cell rows on the unit box, keyed by unordered pair `i < j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CellSet {
    sides: BTreeSet<(usize, usize, CellSide)>,
}

impl CellSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// All four rows of every off-diagonal pair.
    pub fn full(n: usize) -> Self {
        let mut s = Self::empty();
        for i in 0..n {
            for j in (i + 1)..n {
                s.insert_cell(i, j);
            }
        }
        s
    }

    /// Only `X_ij >= 0` for every pair.
    pub fn nonneg(n: usize) -> Self {
        let mut s = Self::empty();
        for i in 0..n {
            for j in (i + 1)..n {
                s.insert(i, j, CellSide::UnderLow);
            }
        }
        s
    }

    pub fn insert(&mut self, i: usize, j: usize, side: CellSide) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.sides.insert((i, j, side))
    }

    pub fn insert_cell(&mut self, i: usize, j: usize) {
        for side in CellSide::ALL {
            self.insert(i, j, side);
        }
    }

    pub fn contains(&self, i: usize, j: usize, side: CellSide) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.sides.contains(&(i, j, side))
    }

    /// Pairs carrying all four rows.
    pub fn complete_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.sides
            .iter()
            .filter(|&&(i, j, _)| CellSide::ALL.iter().all(|&s| self.sides.contains(&(i, j, s))))
            .map(|&(i, j, _)| (i, j))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, usize, CellSide)> {
        self.sides.iter()
    }

    pub fn len(&self) -> usize {
        self.sides.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sides.is_empty()
    }
}

/// Number of variables of the lifted problem over `(x, upper triangle of X)`.
pub fn lifted_vars(n: usize) -> usize {
    n + n * (n + 1) / 2
}

/// Index of `X_ij` among the lifted variables.
pub fn xx_var(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    n + i * n - i * (i + 1) / 2 + j
}

/// Entries of `1/2 Q.X + c^T x` scaled by `w`.
fn quad_entries(n: usize, q: &Matrix, c: &[f64], w: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for (i, &ci) in c.iter().enumerate() {
        if ci != 0.0 {
            out.push((i, w * ci));
        }
    }
    for i in 0..n {
        for j in i..n {
            let v = if i == j { 0.5 * q[(i, i)] } else { 0.5 * (q[(i, j)] + q[(j, i)]) };
            if v != 0.0 {
                out.push((xx_var(n, i, j), w * v));
            }
        }
    }
    out
}

fn add_to_cost(cost: &mut [f64], entries: &[(usize, f64)]) {
    for &(j, v) in entries {
        cost[j] += v;
    }
}

fn check_unit_box(inst: &QcqpInstance) -> Result<()> {
    for i in 0..inst.n {
        if inst.lb[i] != 0.0 || inst.ub[i] != 1.0 {
            return Err(Error::InvalidInstance(format!(
                "lifted relaxations need the unit box; variable {} has [{}, {}]",
                i, inst.lb[i], inst.ub[i]
            )));
        }
    }
    Ok(())
}

fn cell_row(n: usize, i: usize, j: usize, side: CellSide) -> (Vec<(usize, f64)>, f64) {
    let xij = xx_var(n, i, j);
    match side {
        CellSide::UnderLow => (vec![(xij, -1.0)], 0.0),
        CellSide::UnderHigh => (vec![(xij, -1.0), (i, 1.0), (j, 1.0)], 1.0),
        CellSide::OverA => (vec![(xij, 1.0), (i, -1.0)], 0.0),
        CellSide::OverB => (vec![(xij, 1.0), (j, -1.0)], 0.0),
    }
}

/// `Y = [[1, x^T], [x, X]] >= 0` over the lifted variables.
fn lifted_psd(p: &mut ConicProblem, n: usize) {
    let mut constant = Matrix::zeros(n + 1, n + 1);
    constant[(0, 0)] = 1.0;
    let mut terms = Vec::with_capacity(lifted_vars(n));
    for i in 0..n {
        terms.push((i, 0, i + 1, 1.0));
        for j in i..n {
            terms.push((xx_var(n, i, j), i + 1, j + 1, 1.0));
        }
    }
    p.set_psd(n + 1, &constant, &terms);
}

fn add_rlt_rows(p: &mut ConicProblem, n: usize, cells: &CellSet) {
    for i in 0..n {
        p.add_le(RowKey::Diag(i), vec![(xx_var(n, i, i), 1.0), (i, -1.0)], 0.0);
    }
    for &(i, j, side) in cells.iter() {
        if i >= n || j >= n || i == j {
            continue;
        }
        let (entries, rhs) = cell_row(n, i, j, side);
        p.add_le(RowKey::Cell(i, j, side), entries, rhs);
    }
    lifted_psd(p, n);
    let nv = lifted_vars(n);
    let mut lo = vec![0.0; nv];
    let hi = vec![1.0; nv];
    for i in 0..n {
        for j in (i + 1)..n {
            lo[xx_var(n, i, j)] = -1.0;
        }
    }
    p.set_var_box(lo, hi, 1.0 + 2.0 * n as f64);
}

/// SDP+RLT relaxation of a QCQP on the unit box restricted to the given
/// cell rows: `min 1/2 Q0.X + c0^T x` subject to the lifted constraints,
/// `X_ii <= x_i`, the active cell rows and `[[1, x^T], [x, X]] >= 0`.
/// Linear equalities of the instance are kept as rows on `x`.
pub fn build_sdp_rlt(inst: &QcqpInstance, cells: &CellSet) -> Result<ConicProblem> {
    check_unit_box(inst)?;
    let n = inst.n;
    let mut p = ConicProblem::new(lifted_vars(n));
    add_to_cost(&mut p.cost, &quad_entries(n, &inst.objective.q, &inst.objective.c, 1.0));
    p.constant = inst.obj_constant;
    for (k, g) in inst.constraints.iter().enumerate() {
        let entries = quad_entries(n, &g.q, &g.c, 1.0);
        match g.sense {
            Sense::Le => p.add_le(RowKey::Constraint(k), entries, g.b),
            Sense::Eq => p.add_eq(RowKey::Constraint(k), entries, g.b),
            Sense::Obj => return Err(Error::InvalidInstance(format!("constraint {} has objective sense", k))),
        }
    }
    for (k, e) in inst.equalities.iter().enumerate() {
        let entries = e.a.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, v)).collect();
        p.add_eq(RowKey::LinEq(k), entries, e.d);
    }
    add_rlt_rows(&mut p, n, cells);
    p.layout = Some(Layout {
        n,
        kind: BuildKind::Qcqp,
        m_constraints: inst.constraints.len(),
        m_eq: inst.equalities.len(),
        gamma_fixed: None,
    });
    Ok(p)
}

/// Lifted relaxation of a linearly constrained QP where each equality also
/// contributes the squared-residual row `(a a^T).X - 2 d a^T x + d^2 = 0`.
/// With `gamma_fixed` those rows are moved into the objective with the
/// given weights instead.
pub fn build_lcqp_sdp_rlt(inst: &QcqpInstance, cells: &CellSet, gamma_fixed: Option<&[f64]>) -> Result<ConicProblem> {
    check_unit_box(inst)?;
    if !inst.constraints.is_empty() {
        return Err(Error::InvalidInstance(
            "linearly constrained relaxation expects equalities only; convert inequalities first".into(),
        ));
    }
    if let Some(g) = gamma_fixed {
        if g.len() != inst.equalities.len() {
            return Err(Error::Dimension(format!("{} fixed weights for {} equalities", g.len(), inst.equalities.len())));
        }
    }
    let n = inst.n;
    let mut p = ConicProblem::new(lifted_vars(n));
    add_to_cost(&mut p.cost, &quad_entries(n, &inst.objective.q, &inst.objective.c, 1.0));
    p.constant = inst.obj_constant;
    for (k, e) in inst.equalities.iter().enumerate() {
        let mut sq = Vec::new();
        for i in 0..n {
            if e.a[i] == 0.0 {
                continue;
            }
            sq.push((i, -2.0 * e.d * e.a[i]));
            for j in i..n {
                let v = if i == j { e.a[i] * e.a[i] } else { 2.0 * e.a[i] * e.a[j] };
                if v != 0.0 {
                    sq.push((xx_var(n, i, j), v));
                }
            }
        }
        sq.retain(|&(_, v)| v != 0.0);
        match gamma_fixed {
            None => p.add_eq(RowKey::GammaEq(k), sq, -e.d * e.d),
            Some(g) => {
                for &(j, v) in &sq {
                    p.cost[j] += g[k] * v;
                }
                p.constant += g[k] * e.d * e.d;
            }
        }
        let lin = e.a.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, v)).collect();
        p.add_eq(RowKey::LinEq(k), lin, e.d);
    }
    add_rlt_rows(&mut p, n, cells);
    p.layout = Some(Layout {
        n,
        kind: BuildKind::Lcqp,
        m_constraints: 0,
        m_eq: inst.equalities.len(),
        gamma_fixed: gamma_fixed.map(|g| g.to_vec()),
    });
    Ok(p)
}

/// `min lambda` subject to `lambda I - A >= 0`; the optimum is the largest
/// eigenvalue of `A`.
pub fn eigenvalue_sdp(a: &Matrix) -> ConicProblem {
    let n = a.rows();
    let mut p = ConicProblem::new(1);
    p.cost[0] = 1.0;
    let terms: Vec<_> = (0..n).map(|i| (0, i, i, 1.0)).collect();
    p.set_psd(n, &a.scaled(-1.0), &terms);
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// `min (or max) x_i` subject to the lifted constraints and `X >= x x^T`.
pub fn build_bounding(inst: &QcqpInstance, i: usize, direction: Direction) -> Result<ConicProblem> {
    let n = inst.n;
    if i >= n {
        return Err(Error::InvalidArgument(format!("variable {} out of range for n = {}", i, n)));
    }
    let mut p = ConicProblem::new(lifted_vars(n));
    p.cost[i] = match direction {
        Direction::Min => 1.0,
        Direction::Max => -1.0,
    };
    for (k, g) in inst.constraints.iter().enumerate() {
        let entries = quad_entries(n, &g.q, &g.c, 1.0);
        match g.sense {
            Sense::Le => p.add_le(RowKey::Constraint(k), entries, g.b),
            Sense::Eq => p.add_eq(RowKey::Constraint(k), entries, g.b),
            Sense::Obj => return Err(Error::InvalidInstance(format!("constraint {} has objective sense", k))),
        }
    }
    for (k, e) in inst.equalities.iter().enumerate() {
        let entries = e.a.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, v)).collect();
        p.add_eq(RowKey::LinEq(k), entries, e.d);
    }
    lifted_psd(&mut p, n);
    p.layout = Some(Layout {
        n,
        kind: BuildKind::Bounding,
        m_constraints: inst.constraints.len(),
        m_eq: inst.equalities.len(),
        gamma_fixed: None,
    });
    Ok(p)
}

/// Compressed sparse rows.
struct Csr {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    fn from_problem(p: &ConicProblem) -> Self {
        let mut ptr = vec![0];
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for row in p.rows() {
            let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
            for &(j, v) in &row.entries {
                *merged.entry(j).or_insert(0.0) += v;
            }
            for (j, v) in merged {
                if v != 0.0 {
                    idx.push(j);
                    val.push(v);
                }
            }
            ptr.push(idx.len());
        }
        Self { ptr, idx, val }
    }

    fn nrows(&self) -> usize {
        self.ptr.len() - 1
    }

    fn mul(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.ptr[i]..self.ptr[i + 1] {
                s += self.val[k] * z[self.idx[k]];
            }
            *o = s;
        }
    }

    fn mul_t(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for k in self.ptr[i]..self.ptr[i + 1] {
                out[self.idx[k]] += self.val[k] * yi;
            }
        }
    }
}

/// Projection onto the PSD cone in `svec` coordinates. The eigenbasis of the
/// previous call is reused: the rotated matrix is nearly diagonal, so Jacobi
/// needs far fewer sweeps.
struct PsdProjector {
    order: usize,
    basis: Option<Matrix>,
    calls: usize,
}

impl PsdProjector {
    fn new(order: usize) -> Self {
        Self { order, basis: None, calls: 0 }
    }

    fn project(&mut self, v: &mut [f64]) -> Result<()> {
        let n = self.order;
        let m = smat(v, n);
        self.calls += 1;
        if self.calls % EIG_REFRESH == 0 {
            self.basis = None;
        }
        let eig = match &self.basis {
            Some(b) => {
                let rotated = b.transpose().matmul(&m).matmul(b);
                let inner = eigh_jacobi(&rotated)?;
                EigDecomp { values: inner.values, vectors: b.matmul(&inner.vectors) }
            }
            None => eigh_jacobi(&m)?,
        };
        let proj = eig.reconstruct_with(|l| l.max(0.0));
        svec_into(&proj, v);
        self.basis = Some(eig.vectors);
        Ok(())
    }
}

fn smat(v: &[f64], n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    let mut k = 0;
    for r in 0..n {
        for c in r..n {
            let val = if r == c { v[k] } else { v[k] / SQRT2 };
            m[(r, c)] = val;
            m[(c, r)] = val;
            k += 1;
        }
    }
    m
}

fn svec_into(m: &Matrix, out: &mut [f64]) {
    let n = m.rows();
    let mut k = 0;
    for r in 0..n {
        for c in r..n {
            out[k] = if r == c { m[(r, c)] } else { SQRT2 * m[(r, c)] };
            k += 1;
        }
    }
}

struct Scaling {
    d: Vec<f64>,
    e: Vec<f64>,
    cost: f64,
}

fn ruiz(a: &Csr, q: &[f64], n_eq: usize, psd_start: usize, passes: usize) -> Scaling {
    let nv = q.len();
    let nr = a.nrows();
    let mut d = vec![1.0; nv];
    // Rows outside the PSD block start at unit norm; the block shares one
    // scale, so left alone a large row drags its columns off the cone's scale.
    let mut e: Vec<f64> = (0..nr)
        .map(|i| {
            let m = a.val[a.ptr[i]..a.ptr[i + 1]].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if (n_eq..psd_start).contains(&i) && m > 0.0 { (1.0 / m).clamp(SCALE_MIN, SCALE_MAX) } else { 1.0 }
        })
        .collect();
    for _ in 0..passes {
        let mut col = vec![0.0f64; nv];
        let mut row = vec![0.0f64; nr];
        for i in 0..nr {
            for k in a.ptr[i]..a.ptr[i + 1] {
                let j = a.idx[k];
                let v = (e[i] * a.val[k] * d[j]).abs();
                row[i] = row[i].max(v);
                col[j] = col[j].max(v);
            }
        }
        if psd_start < nr {
            let block = row[psd_start..].iter().fold(0.0f64, |m, &v| m.max(v));
            row[psd_start..].iter_mut().for_each(|v| *v = block);
        }
        for j in 0..nv {
            if col[j] > 0.0 {
                d[j] = (d[j] / col[j].sqrt()).clamp(SCALE_MIN, SCALE_MAX);
            }
        }
        for i in 0..nr {
            if row[i] > 0.0 {
                e[i] = (e[i] / row[i].sqrt()).clamp(SCALE_MIN, SCALE_MAX);
            }
        }
    }
    let qn = q.iter().zip(&d).fold(0.0f64, |m, (&qj, &dj)| m.max((qj * dj).abs()));
    let cost = 1.0 / qn.clamp(SCALE_MIN, SCALE_MAX);
    Scaling { d, e, cost }
}

fn factor_kkt(a: &Csr, rho: &[f64], sigma: f64, nv: usize) -> Result<Cholesky> {
    let mut k = Matrix::zeros(nv, nv);
    for i in 0..a.nrows() {
        let (lo, hi) = (a.ptr[i], a.ptr[i + 1]);
        for p in lo..hi {
            let jp = a.idx[p];
            let vp = rho[i] * a.val[p];
            for q in lo..hi {
                let jq = a.idx[q];
                if jq >= jp {
                    k[(jp, jq)] += vp * a.val[q];
                }
            }
        }
    }
    for j in 0..nv {
        k[(j, j)] += sigma;
        for i in 0..j {
            k[(j, i)] = k[(i, j)];
        }
    }
    Cholesky::factor(&k)
}

struct Cones {
    n_eq: usize,
    psd_start: usize,
    projector: Option<PsdProjector>,
}

impl Cones {
    fn project(&mut self, v: &mut [f64]) -> Result<()> {
        v[..self.n_eq].iter_mut().for_each(|x| *x = 0.0);
        v[self.n_eq..self.psd_start].iter_mut().for_each(|x| *x = x.max(0.0));
        if let Some(p) = self.projector.as_mut() {
            p.project(&mut v[self.psd_start..])?;
        }
        Ok(())
    }
}

/// Solves with the given iteration limit and tolerance, other settings at
/// their defaults.
pub fn solve_conic(p: &ConicProblem, max_iter: usize, tol: f64) -> Result<ConicSolution> {
    let settings = AdmmSettings { max_iter, tol, ..AdmmSettings::default() };
    solve_conic_with(p, &settings, None)
}

/// Operator-splitting solve: a cached factorization of `sigma I + A^T R A`
/// handles the affine step, cone projections handle the rest. Returns both
/// primal and dual sides.
pub fn solve_conic_with(p: &ConicProblem, set: &AdmmSettings, warm: Option<&WarmStart>) -> Result<ConicSolution> {
    p.validate()?;
    let nv = p.nvars;
    let nr = p.nrows();
    let n_eq = p.eq.len();
    let psd_start = n_eq + p.le.len();
    let a_raw = Csr::from_problem(p);
    let b_raw: Vec<f64> = p.rows().map(|r| r.rhs).collect();
    let keys: Vec<RowKey> = p.rows().map(|r| r.key).collect();
    let sc = ruiz(&a_raw, &p.cost, n_eq, psd_start, set.scaling_passes);

    let mut a = Csr { ptr: a_raw.ptr.clone(), idx: a_raw.idx.clone(), val: a_raw.val.clone() };
    for i in 0..nr {
        for k in a.ptr[i]..a.ptr[i + 1] {
            a.val[k] *= sc.e[i] * sc.d[a.idx[k]];
        }
    }
    let b: Vec<f64> = (0..nr).map(|i| sc.e[i] * b_raw[i]).collect();
    let q: Vec<f64> = (0..nv).map(|j| sc.cost * sc.d[j] * p.cost[j]).collect();

    let mut cones = Cones {
        n_eq,
        psd_start,
        projector: if p.psd_order > 0 { Some(PsdProjector::new(p.psd_order)) } else { None },
    };

    let mut rho_base = warm.map(|w| w.rho).filter(|r| r.is_finite() && *r > 0.0).unwrap_or(set.rho);
    let rho_vec = |base: f64| -> Vec<f64> {
        (0..nr).map(|i| if i < n_eq { base * set.eq_rho_scale } else { base }).collect()
    };
    let mut rho = rho_vec(rho_base);
    let mut chol = factor_kkt(&a, &rho, set.sigma, nv)?;

    let mut z = vec![0.0; nv];
    let mut s = vec![0.0; nr];
    let mut y = vec![0.0; nr];
    if let Some(w) = warm {
        if w.z.len() == nv {
            for j in 0..nv {
                z[j] = w.z[j] / sc.d[j];
            }
        }
    }
    a.mul(&z, &mut s);
    for i in 0..nr {
        s[i] = b[i] - s[i];
    }
    cones.project(&mut s)?;
    if let Some(w) = warm {
        for (i, key) in keys.iter().enumerate() {
            if let Some(&(sv, yv)) = w.rows.get(key) {
                s[i] = sc.e[i] * sv;
                y[i] = -sc.cost * yv / sc.e[i];
            }
        }
    }

    let mut rhs = vec![0.0; nv];
    let mut work = vec![0.0; nr];
    let mut ax = vec![0.0; nr];
    let mut log = Vec::new();
    let mut status = None;
    let mut iterations = 0;
    let mut report = Report::default();
    let mut ynorm_mid = 0.0;
    let q_norm = norm_inf(&p.cost);
    let b_norm = norm_inf(&b_raw);

    for k in 1..=set.max_iter {
        iterations = k;
        for i in 0..nr {
            work[i] = rho[i] * (b[i] - s[i]) + y[i];
        }
        a.mul_t(&work, &mut rhs);
        for j in 0..nv {
            rhs[j] += set.sigma * z[j] - q[j];
        }
        chol.solve_in_place(&mut rhs);
        a.mul(&rhs, &mut ax);
        for j in 0..nv {
            z[j] = set.alpha * rhs[j] + (1.0 - set.alpha) * z[j];
        }
        for i in 0..nr {
            let st = b[i] - ax[i];
            let sh = set.alpha * st + (1.0 - set.alpha) * s[i];
            work[i] = sh + y[i] / rho[i];
        }
        let v = work.clone();
        cones.project(&mut work)?;
        for i in 0..nr {
            s[i] = work[i];
            y[i] = rho[i] * (v[i] - s[i]);
        }

        if k % set.check_every != 0 && k != set.max_iter {
            continue;
        }
        report = evaluate(p, &a_raw, &b_raw, &sc, &z, &s, &y);
        if set.log {
            log.push(IterLog {
                iter: k,
                primal_res: report.res.primal,
                dual_res: report.res.dual,
                gap: report.res.gap,
                primal_obj: report.pobj,
                dual_obj: report.dobj,
                dual_bound: report.dual_bound,
            });
        }
        if !report.is_finite() || report.y_norm > 1e12 * (1.0 + q_norm + b_norm) {
            status = Some(ConicStatus::InfeasibleOrUnattained);
            break;
        }
        if report.converged(set.tol) {
            status = Some(ConicStatus::Optimal);
            break;
        }
        if k <= set.max_iter / 2 {
            ynorm_mid = report.y_norm;
        }
        if set.adaptive_rho {
            let ratio = rho_ratio(&a, &b, &q, &z, &s, &y);
            if ratio.is_finite() && !(0.2..=5.0).contains(&ratio) {
                rho_base = (rho_base * ratio).clamp(RHO_MIN, RHO_MAX);
                rho = rho_vec(rho_base);
                chol = factor_kkt(&a, &rho, set.sigma, nv)?;
            }
        }
    }
    let status = status.unwrap_or_else(|| {
        // A dual iterate that keeps growing while the primal side settles is
        // the signature of a supremum that is not attained.
        if report.y_norm > 1.25 * ynorm_mid && report.y_norm > 1e2 * (1.0 + q_norm) {
            ConicStatus::InfeasibleOrUnattained
        } else {
            ConicStatus::Inaccurate
        }
    });
    Ok(assemble(p, &sc, status, &z, &s, &y, &report, iterations, log, rho_base))
}

#[derive(Debug, Clone, Default)]
struct Report {
    res: Residuals,
    eps: Residuals,
    pobj: f64,
    dobj: f64,
    dual_bound: f64,
    y_norm: f64,
    z: Vec<f64>,
    s: Vec<f64>,
    yhat: Vec<f64>,
}

impl Report {
    fn is_finite(&self) -> bool {
        self.res.primal.is_finite() && self.res.dual.is_finite() && self.pobj.is_finite() && self.dobj.is_finite()
    }

    fn converged(&self, tol: f64) -> bool {
        self.res.primal <= tol * self.eps.primal && self.res.dual <= tol * self.eps.dual && self.res.gap <= tol * self.eps.gap
    }
}

fn evaluate(p: &ConicProblem, a: &Csr, b: &[f64], sc: &Scaling, zs: &[f64], ss: &[f64], ys: &[f64]) -> Report {
    let nv = zs.len();
    let nr = ss.len();
    let z: Vec<f64> = (0..nv).map(|j| sc.d[j] * zs[j]).collect();
    let s: Vec<f64> = (0..nr).map(|i| ss[i] / sc.e[i]).collect();
    let yhat: Vec<f64> = (0..nr).map(|i| -sc.e[i] * ys[i] / sc.cost).collect();
    let mut az = vec![0.0; nr];
    a.mul(&z, &mut az);
    let mut aty = vec![0.0; nv];
    a.mul_t(&yhat, &mut aty);
    let rp: Vec<f64> = (0..nr).map(|i| az[i] + s[i] - b[i]).collect();
    let rd: Vec<f64> = (0..nv).map(|j| p.cost[j] + aty[j]).collect();
    let pobj = crate::linalg::dot(&p.cost, &z) + p.constant;
    let dobj = -crate::linalg::dot(b, &yhat) + p.constant;
    let dual_bound = match (&p.var_lo, &p.var_hi) {
        (Some(lo), Some(hi)) => dobj + (0..nv).map(|j| (rd[j] * lo[j]).min(rd[j] * hi[j])).sum::<f64>(),
        _ => f64::NEG_INFINITY,
    };
    let res = Residuals { primal: norm_inf(&rp), dual: norm_inf(&rd), gap: (pobj - dobj).abs() };
    let eps = Residuals {
        primal: 1.0 + norm_inf(&az).max(norm_inf(&s)).max(norm_inf(b)),
        dual: 1.0 + norm_inf(&aty).max(norm_inf(&p.cost)),
        gap: 1.0 + pobj.abs().max(dobj.abs()),
    };
    Report { res, eps, pobj, dobj, dual_bound, y_norm: norm_inf(&yhat), z, s, yhat }
}

/// Balance between scaled primal and dual residuals, the usual adaptive
/// step rule for operator splitting.
fn rho_ratio(a: &Csr, b: &[f64], q: &[f64], z: &[f64], s: &[f64], y: &[f64]) -> f64 {
    let nr = b.len();
    let mut az = vec![0.0; nr];
    a.mul(z, &mut az);
    let rp = (0..nr).map(|i| (az[i] + s[i] - b[i]).abs()).fold(0.0f64, f64::max);
    let mut aty = vec![0.0; q.len()];
    let yneg: Vec<f64> = y.iter().map(|v| -v).collect();
    a.mul_t(&yneg, &mut aty);
    let rd = (0..q.len()).map(|j| (q[j] + aty[j]).abs()).fold(0.0f64, f64::max);
    let pn = norm_inf(&az).max(norm_inf(s)).max(1e-10);
    let dn = norm_inf(&aty).max(norm_inf(q)).max(1e-10);
    ((rp / pn) / (rd / dn).max(1e-14)).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    p: &ConicProblem,
    sc: &Scaling,
    status: ConicStatus,
    zs: &[f64],
    ss: &[f64],
    ys: &[f64],
    report: &Report,
    iterations: usize,
    log: Vec<IterLog>,
    rho: f64,
) -> ConicSolution {
    let rep = if report.z.len() == zs.len() {
        report.clone()
    } else {
        let a = Csr::from_problem(p);
        let b: Vec<f64> = p.rows().map(|r| r.rhs).collect();
        evaluate(p, &a, &b, sc, zs, ss, ys)
    };
    let psd_start = p.eq.len() + p.le.len();
    let psd_dual = if p.psd_order > 0 { smat(&rep.yhat[psd_start..], p.psd_order) } else { Matrix::zeros(0, 0) };
    let mut dual_bound = rep.dual_bound;
    if let Some(tb) = p.trace_bound {
        if p.psd_order > 0 && dual_bound.is_finite() {
            let lam = min_eigenvalue(&psd_dual).unwrap_or(f64::NEG_INFINITY);
            dual_bound += lam.min(0.0) * tb;
        }
    }
    let mut sol = ConicSolution {
        status,
        x: Vec::new(),
        xx: Matrix::zeros(0, 0),
        tau: rep.dobj,
        gamma: Vec::new(),
        gamma_eq: Vec::new(),
        beta: Vec::new(),
        mu: Vec::new(),
        cells: CellMultipliers::zeros(0),
        psd_dual,
        primal_obj: rep.pobj,
        dual_obj: rep.dobj,
        dual_bound,
        residuals: rep.res,
        iterations,
        log,
        z: rep.z.clone(),
        slack: rep.s.clone(),
        dual: rep.yhat.clone(),
        rho,
    };
    if let Some(layout) = &p.layout {
        let n = layout.n;
        sol.x = rep.z[..n].to_vec();
        sol.xx = Matrix::from_fn(n, n, |i, j| rep.z[xx_var(n, i, j)]);
        sol.gamma = vec![0.0; layout.m_constraints];
        sol.gamma_eq = layout.gamma_fixed.clone().unwrap_or_else(|| vec![0.0; layout.m_eq]);
        if layout.kind != BuildKind::Lcqp {
            sol.gamma_eq.clear();
        }
        sol.mu = vec![0.0; layout.m_eq];
        sol.beta = vec![0.0; n];
        sol.cells = CellMultipliers::zeros(n);
        for (row, &yv) in p.rows().zip(rep.yhat.iter()) {
            match row.key {
                RowKey::Constraint(k) => sol.gamma[k] = yv,
                RowKey::GammaEq(k) => sol.gamma_eq[k] = yv,
                RowKey::LinEq(k) => sol.mu[k] = yv,
                RowKey::Diag(i) => sol.beta[i] = yv,
                RowKey::Cell(i, j, side) => {
                    let m = match side {
                        CellSide::UnderLow => &mut sol.cells.m,
                        CellSide::UnderHigh => &mut sol.cells.n,
                        CellSide::OverA => &mut sol.cells.r,
                        CellSide::OverB => &mut sol.cells.s,
                    };
                    m[(i, j)] += 0.5 * yv;
                    m[(j, i)] += 0.5 * yv;
                }
                RowKey::Psd(_) | RowKey::Custom(_) => {}
            }
        }
    }
    sol
}

/// Lagrangian data `(Q_hat, c_hat, b_hat)` assembled from the multipliers
/// of a lifted solve: the Lagrangian equals
/// `1/2 x^T Q_hat x + c_hat^T x + b_hat` on the rank-one set `X = x x^T`.
pub fn lagrangian_data(inst: &QcqpInstance, sol: &ConicSolution) -> Result<(Matrix, Vec<f64>, f64)> {
    let n = inst.n;
    if sol.x.len() != n || sol.beta.len() != n {
        return Err(Error::Dimension("solution does not come from a lifted problem of this instance".into()));
    }
    let mut qh = inst.objective.q.clone();
    let mut ch = inst.objective.c.clone();
    let mut bh = inst.obj_constant;
    for (k, g) in inst.constraints.iter().enumerate() {
        let gk = sol.gamma.get(k).copied().unwrap_or(0.0);
        qh.axpy(gk, &g.q);
        for i in 0..n {
            ch[i] += gk * g.c[i];
        }
        bh -= gk * g.b;
    }
    for (k, e) in inst.equalities.iter().enumerate() {
        let gk = sol.gamma_eq.get(k).copied().unwrap_or(0.0);
        let mu = sol.mu.get(k).copied().unwrap_or(0.0);
        for i in 0..n {
            for j in 0..n {
                qh[(i, j)] += 2.0 * gk * e.a[i] * e.a[j];
            }
            ch[i] += -2.0 * gk * e.d * e.a[i] + mu * e.a[i];
        }
        bh += gk * e.d * e.d - mu * e.d;
    }
    let cm = &sol.cells;
    for i in 0..n {
        qh[(i, i)] += 2.0 * sol.beta[i];
        ch[i] -= sol.beta[i];
        for j in 0..n {
            if i == j {
                continue;
            }
            qh[(i, j)] += 2.0 * (-cm.m[(i, j)] - cm.n[(i, j)] + cm.r[(i, j)] + cm.s[(i, j)]);
            // Each pair stores half its multiplier per triangle; x_i appears
            // in N with weight one per pair, in R for pairs (i, j) with
            // i < j and in S for pairs (j, i) with j < i.
            ch[i] += 2.0 * cm.n[(i, j)];
            if i < j {
                ch[i] -= 2.0 * cm.r[(i, j)];
            } else {
                ch[i] -= 2.0 * cm.s[(i, j)];
            }
            if i < j {
                bh -= 2.0 * cm.n[(i, j)];
            }
        }
    }
    Ok((qh, ch, bh))
}

/// `[[2 b_hat - 2 tau, c_hat^T], [c_hat, Q_hat]]`, PSD for a dual-feasible
/// certificate.
pub fn dual_certificate(inst: &QcqpInstance, sol: &ConicSolution) -> Result<Matrix> {
    let (qh, ch, bh) = lagrangian_data(inst, sol)?;
    let n = inst.n;
    Ok(Matrix::from_fn(n + 1, n + 1, |r, c| match (r, c) {
        (0, 0) => 2.0 * bh - 2.0 * sol.tau,
        (0, j) => ch[j - 1],
        (i, 0) => ch[i - 1],
        (i, j) => qh[(i - 1, j - 1)],
    }))
}

/// Which lifted relaxation the cut loop rebuilds each round.
#[derive(Debug, Clone, PartialEq)]
pub enum CutBuilder {
    SdpRlt,
    Lcqp { gamma_fixed: Option<Vec<f64>> },
}

impl CutBuilder {
    pub fn build(&self, inst: &QcqpInstance, cells: &CellSet) -> Result<ConicProblem> {
        match self {
            CutBuilder::SdpRlt => build_sdp_rlt(inst, cells),
            CutBuilder::Lcqp { gamma_fixed } => build_lcqp_sdp_rlt(inst, cells, gamma_fixed.as_deref()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CutOptions {
    pub max_rounds: usize,
    pub max_new_cells: usize,
    pub violation_tol: f64,
    pub initial: CellSet,
    pub settings: AdmmSettings,
    /// Stop at the first round that does not end OPTIMAL.
    pub require_optimal: bool,
}

impl Default for CutOptions {
    fn default() -> Self {
        Self {
            max_rounds: 20,
            max_new_cells: 50,
            violation_tol: 1e-6,
            initial: CellSet::empty(),
            settings: AdmmSettings::default(),
            require_optimal: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CutLoopResult {
    pub solution: ConicSolution,
    pub cells: CellSet,
    /// Bound after each round.
    pub bounds: Vec<f64>,
    pub rounds: usize,
}

/// Starts from the initial cell set (off-diagonal cells dropped by
/// default), then alternates solves with re-adding the most violated cells
/// until none is violated beyond the tolerance or the round limit is hit.
pub fn iterative_cut_solve(inst: &QcqpInstance, builder: &CutBuilder, opts: &CutOptions) -> Result<CutLoopResult> {
    let mut cells = opts.initial.clone();
    let mut bounds = Vec::new();
    let mut warm: Option<WarmStart> = None;
    let lb = vec![0.0; inst.n];
    let ub = vec![1.0; inst.n];
    let mut round = 0;
    loop {
        round += 1;
        let p = builder.build(inst, &cells)?;
        let sol = solve_conic_with(&p, &opts.settings, warm.as_ref())?;
        bounds.push(sol.bound());
        log::debug!("cut round {} status {} bound {} cells {}", round, sol.status, sol.bound(), cells.len());
        let stalled = opts.require_optimal && sol.status != ConicStatus::Optimal;
        if !sol.is_usable() || stalled || round >= opts.max_rounds {
            return Ok(CutLoopResult { solution: sol, cells, bounds, rounds: round });
        }
        let violated = violated_cells(&sol.x, &sol.xx, &lb, &ub, &cells.complete_pairs(), opts.violation_tol);
        if violated.is_empty() {
            return Ok(CutLoopResult { solution: sol, cells, bounds, rounds: round });
        }
        for &(i, j, _) in violated.iter().take(opts.max_new_cells) {
            cells.insert_cell(i, j);
        }
        warm = Some(sol.warm_start(&p));
    }
}

/// Whether some nonnegative combination of the constraint Hessians looks
/// positive definite, judged from random combinations.
pub fn slater_surrogate(inst: &QcqpInstance, samples: usize, seed: u64) -> bool {
    let quads: Vec<&Matrix> =
        inst.constraints.iter().filter(|g| g.sense == Sense::Le && !g.is_linear()).map(|g| &g.q).collect();
    if quads.is_empty() {
        return false;
    }
    let n = inst.n;
    let mut rng = generators::rng(seed);
    for s in 0..samples.max(1) {
        let mut sum = Matrix::zeros(n, n);
        for q in &quads {
            let w = if s == 0 { 1.0 } else { generators::unit_uniform(&mut rng) };
            sum.axpy(w, q);
        }
        if matches!(min_eigenvalue(&sum), Ok(l) if l > 1e-9 * (1.0 + sum.max_abs())) {
            return true;
        }
    }
    false
}

/// Smallest or largest value of `x_i` over the lifted feasible set, widened
/// by a safety margin of `1e-6 (1 + |value|)`.
pub fn solve_bounding(inst: &QcqpInstance, i: usize, direction: Direction) -> Result<f64> {
    solve_bounding_with(inst, i, direction, &AdmmSettings::default())
}

pub fn solve_bounding_with(inst: &QcqpInstance, i: usize, direction: Direction, set: &AdmmSettings) -> Result<f64> {
    if inst.kind != ProblemKind::QcqpNoBounds {
        return Err(Error::InvalidInstance(format!("bounding expects kind QCQP_NOBOUNDS, got {}", inst.kind)));
    }
    let p = build_bounding(inst, i, direction)?;
    let sol = solve_conic_with(&p, set, None)?;
    let v = sol.primal_obj.min(sol.dual_obj);
    if !sol.is_usable() || !v.is_finite() || v.abs() > 1e9 {
        return Err(Error::Solver(format!(
            "bounding problem for x{} ended with status {}; supply explicit bounds for this variable",
            i, sol.status
        )));
    }
    let margin = 1e-6 * (1.0 + v.abs());
    Ok(match direction {
        Direction::Min => v - margin,
        Direction::Max => -v + margin,
    })
}
