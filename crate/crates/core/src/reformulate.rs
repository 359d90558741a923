//! Parameter recovery from lifted solves and construction of the
//! reformulated instances.
//!
//! A reformulation moves the nonconvex part `x^T Z_i x` of every quadratic
//! into an auxiliary `t_i = x^T Z_i x`, leaving `Q_i - Z_i` positive
//! semidefinite. Choosing `Z` from the dual of the SDP+RLT relaxation makes
//! the McCormick bound of the result match the SDP+RLT bound.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::instance::{
    classify_convexity, is_psd, quad_interval, LinearEquality, ProblemKind, QcqpInstance, QuadFunc, Sense, UnitBoxMap,
    EIG_TOL,
};
use crate::linalg::{min_eigenvalue, Matrix};
use crate::mccormick::{build_mcr, relaxation_bound};
use crate::sdp::{
    build_lcqp_sdp_rlt, build_sdp_rlt, iterative_cut_solve, lagrangian_data, solve_bounding_with, solve_conic_with,
    AdmmSettings, CellSet, ConicSolution, ConicStatus, CutBuilder, CutLoopResult, CutOptions, Direction,
};

/// Entries of `Z` below this magnitude are dropped.
pub const Z_TRUNCATE: f64 = 1e-9;
/// Largest PSD violation absorbed by a diagonal shift, relative to the
/// largest entry of the matrix (at least 1).
pub const REPAIR_LIMIT: f64 = 1e-5;
/// Weight used when the free-weight solve fails.
pub const DEFAULT_FALLBACK_GAMMA: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    SdpOptimal,
    GammaFixedFallback,
    Manual,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::SdpOptimal => "SDP_OPTIMAL",
            Provenance::GammaFixedFallback => "GAMMA_FIXED_FALLBACK",
            Provenance::Manual => "MANUAL",
        }
    }
}

/// `z[0]` belongs to the objective, `z[i]` to constraint `i - 1`. On the
/// linearly constrained path `z` has a single entry and `gamma` holds the
/// weights of the squared equality residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct QnrParams {
    pub z: Vec<Matrix>,
    pub gamma: Vec<f64>,
    pub aux_count: usize,
    pub provenance: Provenance,
}

impl QnrParams {
    pub fn new(z: Vec<Matrix>, gamma: Vec<f64>, provenance: Provenance) -> Self {
        let aux_count = z.iter().filter(|m| !m.is_zero()).count();
        Self { z, gamma, aux_count, provenance }
    }

    /// All-zero parameters: the reformulation is the identity.
    pub fn zero(inst: &QcqpInstance) -> Self {
        let n = inst.n;
        let count = if inst.is_linearly_constrained() { 1 } else { 1 + inst.constraints.len() };
        Self::new(vec![Matrix::zeros(n, n); count], vec![0.0; inst.equalities.len()], Provenance::Manual)
    }
}

fn truncate(z: &mut Matrix) {
    let n = z.rows();
    for i in 0..n {
        for j in 0..n {
            if z[(i, j)].abs() < Z_TRUNCATE {
                z[(i, j)] = 0.0;
            }
        }
    }
}

/// Makes `q - z` PSD by shifting `z` down the diagonal when the violation
/// is below [`REPAIR_LIMIT`] times the scale of `q`.
fn repair(q: &Matrix, z: &mut Matrix, what: &str) -> Result<()> {
    let lam = min_eigenvalue(&q.sub(z))?;
    if lam >= 0.0 {
        return Ok(());
    }
    if lam <= -REPAIR_LIMIT * q.max_abs().max(1.0) {
        return Err(Error::RecoveryFailed(format!("{}: min eigenvalue of Q - Z is {:.3e}", what, lam)));
    }
    for i in 0..z.rows() {
        z[(i, i)] += lam - 1e-9;
    }
    Ok(())
}

fn check_status(sol: &ConicSolution) -> Result<()> {
    if sol.status == ConicStatus::InfeasibleOrUnattained {
        return Err(Error::RecoveryFailed(format!("conic solve ended with {}", sol.status)));
    }
    Ok(())
}

/// Parameters of the QCQP path: `Z_i = Q_i` for every constraint and
/// `Z_0 = Q_0 - Q_hat` with `Q_hat = Q_0 + sum gamma_i Q_i + 2 diag(beta)
/// - 2M - 2N + 2R + 2S` read from the multipliers.
pub fn recover_z_qcqp(sol: &ConicSolution, inst: &QcqpInstance) -> Result<QnrParams> {
    check_status(sol)?;
    let (qhat, _, _) = lagrangian_data(inst, sol)?;
    let mut z0 = inst.objective.q.sub(&qhat);
    truncate(&mut z0);
    repair(&inst.objective.q, &mut z0, "objective")?;
    let mut z = vec![z0];
    for g in &inst.constraints {
        z.push(g.q.clone());
    }
    Ok(QnrParams::new(z, Vec::new(), Provenance::SdpOptimal))
}

/// Parameters of the linearly constrained path: `Z = -2 diag(beta) + 2M +
/// 2N - 2R - 2S` and the residual weights `gamma`, free or fixed.
pub fn recover_z_lcqp(sol: &ConicSolution, inst: &QcqpInstance) -> Result<QnrParams> {
    check_status(sol)?;
    let (qhat, _, _) = lagrangian_data(inst, sol)?;
    let gamma = sol.gamma_eq.clone();
    let perturbed = perturbed_hessian(inst, &gamma);
    let mut z = perturbed.sub(&qhat);
    truncate(&mut z);
    repair(&perturbed, &mut z, "perturbed objective")?;
    Ok(QnrParams::new(vec![z], gamma, Provenance::SdpOptimal))
}

/// `Q + 2 sum gamma_k a_k a_k^T`.
pub fn perturbed_hessian(inst: &QcqpInstance, gamma: &[f64]) -> Matrix {
    let mut q = inst.objective.q.clone();
    let n = inst.n;
    for (e, &g) in inst.equalities.iter().zip(gamma) {
        for i in 0..n {
            for j in 0..n {
                q[(i, j)] += 2.0 * g * e.a[i] * e.a[j];
            }
        }
    }
    q
}

/// Largest violation of the PSD preconditions, as a nonnegative number.
pub fn params_violation(inst: &QcqpInstance, params: &QnrParams) -> Result<f64> {
    let mut worst = 0.0f64;
    if params.z.len() == 1 && inst.is_linearly_constrained() {
        let q = perturbed_hessian(inst, &params.gamma);
        worst = worst.max(-min_eigenvalue(&q.sub(&params.z[0]))?);
    } else {
        worst = worst.max(-min_eigenvalue(&inst.objective.q.sub(&params.z[0]))?);
        for (g, z) in inst.constraints.iter().zip(&params.z[1..]) {
            worst = worst.max(-min_eigenvalue(&g.q.sub(z))?);
        }
    }
    Ok(worst.max(0.0))
}

const PARAM_TOL: f64 = 1e-6;

/// Bounds of `x^T Z x` over the box by interval arithmetic.
fn aux_bounds(z: &Matrix, lb: &[f64], ub: &[f64]) -> (f64, f64) {
    let n = lb.len();
    quad_interval(&z.scaled(2.0), &vec![0.0; n], lb, ub)
}

/// Appends `t = x^T Z x` and returns the padded function builder data.
struct AuxBuilder {
    n: usize,
    total: usize,
    next: usize,
    rows: Vec<QuadFunc>,
    lb: Vec<f64>,
    ub: Vec<f64>,
}

impl AuxBuilder {
    fn new(inst: &QcqpInstance, total: usize) -> Self {
        let n = inst.n;
        let mut lb = inst.lb.clone();
        let mut ub = inst.ub.clone();
        lb.resize(n + total, 0.0);
        ub.resize(n + total, 0.0);
        Self { n, total, next: 0, rows: Vec::new(), lb, ub }
    }

    fn dim(&self) -> usize {
        self.n + self.total
    }

    /// Returns the column of the new auxiliary, or `None` for `Z = 0`.
    fn add(&mut self, z: &Matrix) -> Option<usize> {
        if z.is_zero() {
            return None;
        }
        let col = self.n + self.next;
        self.next += 1;
        let (lo, hi) = aux_bounds(z, &self.lb[..self.n], &self.ub[..self.n]);
        self.lb[col] = lo;
        self.ub[col] = hi;
        let mut q = z.scaled(2.0).padded(self.dim());
        q.symmetrize();
        let mut c = vec![0.0; self.dim()];
        c[col] = -1.0;
        self.rows.push(QuadFunc { q, c, b: 0.0, sense: Sense::Eq });
        Some(col)
    }
}

fn pad_equalities(eqs: &[LinearEquality], dim: usize) -> Vec<LinearEquality> {
    eqs.iter()
        .map(|e| {
            let mut a = e.a.clone();
            a.resize(dim, 0.0);
            LinearEquality { a, d: e.d }
        })
        .collect()
}

/// `1/2 x^T (Q - Z) x + c^T x + 1/2 t` with `t` at column `aux`.
fn convexified(f: &QuadFunc, z: &Matrix, aux: Option<usize>, dim: usize) -> QuadFunc {
    let mut out = QuadFunc { q: f.q.sub(z), c: f.c.clone(), b: f.b, sense: f.sense }.padded(dim);
    if let Some(col) = aux {
        out.c[col] += 0.5;
    }
    out
}

/// Reformulated QCQP: objective and every constraint lose `x^T Z_i x`
/// in favour of `t_i / 2`, and `t_i = x^T Z_i x` is appended as a
/// quadratic equality. Auxiliaries are only created for nonzero `Z_i`.
pub fn build_qnr(inst: &QcqpInstance, params: &QnrParams) -> Result<QcqpInstance> {
    if params.z.len() != 1 + inst.constraints.len() {
        return Err(Error::Dimension(format!(
            "{} parameter matrices for {} constraints",
            params.z.len(),
            inst.constraints.len()
        )));
    }
    if !inst.has_finite_bounds() {
        let i = (0..inst.n).find(|&i| !inst.lb[i].is_finite() || !inst.ub[i].is_finite()).unwrap_or(0);
        return Err(Error::Unbounded(i));
    }
    let viol = params_violation(inst, params)?;
    if viol > PARAM_TOL {
        return Err(Error::RecoveryFailed(format!("Q - Z has eigenvalue {:.3e}", -viol)));
    }
    let total = params.z.iter().filter(|z| !z.is_zero()).count();
    let mut aux = AuxBuilder::new(inst, total);
    let dim = aux.dim();
    let t0 = aux.add(&params.z[0]);
    let objective = convexified(&inst.objective, &params.z[0], t0, dim);
    let mut constraints = Vec::new();
    for (g, z) in inst.constraints.iter().zip(&params.z[1..]) {
        let t = aux.add(z);
        constraints.push(convexified(g, z, t, dim));
    }
    constraints.extend(aux.rows.drain(..));
    let kind = if total == 0 { inst.kind } else { ProblemKind::Qcqp };
    let out = QcqpInstance {
        n: dim,
        objective,
        obj_constant: inst.obj_constant,
        constraints,
        lb: aux.lb,
        ub: aux.ub,
        kind,
        equalities: pad_equalities(&inst.equalities, dim),
        aux: inst.aux + total,
    };
    out.validate()?;
    Ok(out)
}

/// Reformulated linearly constrained QP: the objective gains
/// `sum gamma_k (a_k^T x - d_k)^2 - 1/2 x^T Z x + 1/2 t` with `t = x^T Z x`.
/// Bounds stay explicit, including the redundant `x <= 1` of an StQP.
pub fn build_lcqp_qnr(inst: &QcqpInstance, params: &QnrParams) -> Result<QcqpInstance> {
    if !matches!(inst.kind, ProblemKind::Lcqp | ProblemKind::StQp | ProblemKind::BoxQp) || !inst.constraints.is_empty()
    {
        return Err(Error::InvalidInstance(format!("expected an equality-constrained QP, got {}", inst.kind)));
    }
    if params.z.len() != 1 {
        return Err(Error::Dimension(format!("expected one parameter matrix, got {}", params.z.len())));
    }
    let gamma: Vec<f64> =
        if inst.equalities.is_empty() { Vec::new() } else { params.gamma.clone() };
    if gamma.len() != inst.equalities.len() {
        return Err(Error::Dimension(format!("{} weights for {} equalities", gamma.len(), inst.equalities.len())));
    }
    let params = QnrParams { gamma: gamma.clone(), ..params.clone() };
    let viol = params_violation(inst, &params)?;
    if viol > PARAM_TOL {
        return Err(Error::RecoveryFailed(format!("perturbed Q - Z has eigenvalue {:.3e}", -viol)));
    }
    let n = inst.n;
    let mut c = inst.objective.c.clone();
    let mut constant = inst.obj_constant;
    for (e, &g) in inst.equalities.iter().zip(&gamma) {
        for i in 0..n {
            c[i] -= 2.0 * g * e.d * e.a[i];
        }
        constant += g * e.d * e.d;
    }
    let perturbed = QuadFunc { q: perturbed_hessian(inst, &gamma), c, b: 0.0, sense: Sense::Obj };
    let z = &params.z[0];
    let total = usize::from(!z.is_zero());
    let mut aux = AuxBuilder::new(inst, total);
    let dim = aux.dim();
    let t = aux.add(z);
    let objective = convexified(&perturbed, z, t, dim);
    let kind = if total == 0 { inst.kind } else { ProblemKind::Qcqp };
    let out = QcqpInstance {
        n: dim,
        objective,
        obj_constant: constant,
        constraints: aux.rows,
        lb: aux.lb,
        ub: aux.ub,
        kind,
        equalities: pad_equalities(&inst.equalities, dim),
        aux: inst.aux + total,
    };
    out.validate()?;
    Ok(out)
}

/// Re-solves the lifted problem with every residual weight fixed to
/// `gamma_value` and recovers parameters from it. Instances without
/// equalities have no weight to fix and take the QCQP route.
pub fn fallback_gamma(
    inst: &QcqpInstance,
    gamma_value: f64,
    cells: &CellSet,
    settings: &AdmmSettings,
) -> Result<(QnrParams, ConicSolution)> {
    if inst.equalities.is_empty() {
        let sol = solve_conic_with(&build_sdp_rlt(inst, cells)?, settings, None)?;
        let params = recover_z_qcqp(&sol, inst)?;
        return Ok((params, sol));
    }
    let gamma = vec![gamma_value; inst.equalities.len()];
    let sol = solve_conic_with(&build_lcqp_sdp_rlt(inst, cells, Some(&gamma))?, settings, None)?;
    let mut params = recover_z_lcqp(&sol, inst)?;
    params.provenance = Provenance::GammaFixedFallback;
    Ok((params, sol))
}

/// Box for an instance without bounds from the lifted bounding problems.
pub fn preprocess_qcqp2_bounds(inst: &QcqpInstance) -> Result<QcqpInstance> {
    preprocess_qcqp2_bounds_with(inst, &AdmmSettings::default())
}

pub fn preprocess_qcqp2_bounds_with(inst: &QcqpInstance, settings: &AdmmSettings) -> Result<QcqpInstance> {
    if inst.kind != ProblemKind::QcqpNoBounds {
        return Err(Error::InvalidInstance(format!("bound recovery expects QCQP_NOBOUNDS, got {}", inst.kind)));
    }
    if !crate::sdp::slater_surrogate(inst, 200, 0x5eed) {
        log::warn!("no positive definite combination of constraint Hessians found; bounding may fail");
    }
    let mut out = inst.clone();
    for i in 0..inst.n {
        let lo = solve_bounding_with(inst, i, Direction::Min, settings)?;
        let hi = solve_bounding_with(inst, i, Direction::Max, settings)?;
        out.lb[i] = lo.max(inst.lb[i]);
        out.ub[i] = hi.min(inst.ub[i]);
    }
    out.kind = ProblemKind::Qcqp;
    out.validate()?;
    Ok(out)
}

/// Turns every linear inequality `a^T x <= d` into `a^T x + u s = d` with a
/// slack `s` in `[0, 1]`, where `u = d - min_box a^T x`. Slacks are
/// appended after the original variables.
pub fn inequality_to_standard(inst: &QcqpInstance) -> Result<QcqpInstance> {
    if inst.kind != ProblemKind::LcqpInq {
        return Err(Error::InvalidInstance(format!("expected LCQP_INQ, got {}", inst.kind)));
    }
    if inst.aux != 0 {
        return Err(Error::InvalidInstance("convert inequalities before adding auxiliaries".into()));
    }
    let n = inst.n;
    let rows: Vec<&QuadFunc> = inst.constraints.iter().collect();
    if let Some(k) = rows.iter().position(|g| !g.is_linear() || g.sense == Sense::Obj) {
        return Err(Error::InvalidInstance(format!("constraint {} is not a linear row", k)));
    }
    let ineq: Vec<&QuadFunc> = rows.iter().copied().filter(|g| g.sense == Sense::Le).collect();
    let dim = n + ineq.len();
    let mut equalities = pad_equalities(&inst.equalities, dim);
    for g in rows.iter().filter(|g| g.sense == Sense::Eq) {
        let mut a = g.c.clone();
        a.resize(dim, 0.0);
        equalities.push(LinearEquality { a, d: g.b });
    }
    for (k, g) in ineq.iter().enumerate() {
        let (lo, _) = quad_interval(&g.q, &g.c, &inst.lb, &inst.ub);
        let u = g.b - lo;
        if u < 0.0 {
            return Err(Error::Infeasible(format!(
                "inequality {} cannot be satisfied on the box: minimum {} exceeds {}",
                k, lo, g.b
            )));
        }
        let mut a = g.c.clone();
        a.resize(dim, 0.0);
        a[n + k] = u;
        equalities.push(LinearEquality { a, d: g.b });
    }
    let mut lb = inst.lb.clone();
    let mut ub = inst.ub.clone();
    lb.resize(dim, 0.0);
    ub.resize(dim, 1.0);
    let out = QcqpInstance {
        n: dim,
        objective: inst.objective.padded(dim),
        obj_constant: inst.obj_constant,
        constraints: Vec::new(),
        lb,
        ub,
        kind: ProblemKind::Lcqp,
        equalities,
        aux: 0,
    };
    out.validate()?;
    Ok(out)
}

/// McCormick root bound of a model, `-inf` when it cannot be relaxed.
fn mcr_bound(inst: &QcqpInstance) -> f64 {
    classify_convexity(inst, EIG_TOL)
        .and_then(|tag| build_mcr(inst, &tag))
        .map(|m| relaxation_bound(&m).bound)
        .unwrap_or(f64::NEG_INFINITY)
}

/// Split that reproduces the plain relaxation: a nonconvex quadratic goes
/// entirely into its auxiliary, a convex one keeps its tangents. Residual
/// weights are zero.
fn trivial_params(inst: &QcqpInstance, recovered: &QnrParams) -> Result<QnrParams> {
    let split = |q: &Matrix| -> Result<Matrix> {
        Ok(if is_psd(q, EIG_TOL)? { Matrix::zeros(inst.n, inst.n) } else { q.clone() })
    };
    let mut out = recovered.clone();
    out.z[0] = split(&inst.objective.q)?;
    for (z, g) in out.z[1..].iter_mut().zip(&inst.constraints) {
        *z = split(&g.q)?;
    }
    out.gamma.iter_mut().for_each(|g| *g = 0.0);
    Ok(out)
}

fn blend(a: &QnrParams, b: &QnrParams, alpha: f64) -> QnrParams {
    let mut z: Vec<Matrix> = a.z.iter().zip(&b.z).map(|(x, y)| x.scaled(alpha).add(&y.scaled(1.0 - alpha))).collect();
    z.iter_mut().for_each(truncate);
    let gamma = a.gamma.iter().zip(&b.gamma).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect();
    QnrParams::new(z, gamma, a.provenance)
}

/// Golden-section steps of the dominance safeguard.
const BLEND_STEPS: usize = 16;

/// Keeps the reformulated bound at or above the plain one. The McCormick
/// bound is concave along the segment from the trivial split to the
/// recovered parameters, so when the recovered end (limited by conic
/// accuracy) falls below the trivial end the segment is searched for its
/// best point. Returns the chosen mixing weight on the recovered side.
fn safeguard(
    inst: &QcqpInstance,
    recovered: QnrParams,
    build: impl Fn(&QcqpInstance, &QnrParams) -> Result<QcqpInstance>,
) -> Result<(QnrParams, QcqpInstance, f64)> {
    let model = build(inst, &recovered)?;
    let top = mcr_bound(&model);
    let trivial = trivial_params(inst, &recovered)?;
    let Ok(base) = build(inst, &trivial) else { return Ok((recovered, model, 1.0)) };
    let bottom = mcr_bound(&base);
    if top >= bottom {
        return Ok((recovered, model, 1.0));
    }
    let eval = |a: f64| build(inst, &blend(&recovered, &trivial, a)).map(|m| mcr_bound(&m)).unwrap_or(f64::NEG_INFINITY);
    let mut best = (bottom, 0.0);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut a, mut b) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut fa, mut fb) = (eval(a), eval(b));
    for _ in 0..BLEND_STEPS {
        for (x, f) in [(a, fa), (b, fb)] {
            if f > best.0 {
                best = (f, x);
            }
        }
        if fa >= fb {
            hi = b;
            (b, fb) = (a, fa);
            a = hi - r * (hi - lo);
            fa = eval(a);
        } else {
            lo = a;
            (a, fa) = (b, fb);
            b = lo + r * (hi - lo);
            fb = eval(b);
        }
    }
    for (x, f) in [(a, fa), (b, fb)] {
        if f > best.0 {
            best = (f, x);
        }
    }
    let params = blend(&recovered, &trivial, best.1);
    let model = build(inst, &params)?;
    Ok((params, model, best.1))
}

#[derive(Debug, Clone)]
pub struct ReformOptions {
    pub cut: CutOptions,
    pub fallback_gamma: f64,
    /// Solve StQPs once with only `X_ij >= 0` instead of running the cut loop.
    pub stqp_nonneg_only: bool,
    /// Iteration limit of the free-weight attempt on equality-constrained
    /// instances before the fixed-weight fallback.
    pub free_gamma_max_iter: usize,
    /// Tolerance of a polishing solve after the fixed-weight cut loop. The
    /// weight inflates the data norm the residuals are measured against, so
    /// the default tolerance leaves the bound loose by about the weight
    /// times it.
    pub fallback_tol: f64,
    pub fallback_max_iter: usize,
}

impl Default for ReformOptions {
    fn default() -> Self {
        Self {
            cut: CutOptions::default(),
            fallback_gamma: DEFAULT_FALLBACK_GAMMA,
            stqp_nonneg_only: true,
            free_gamma_max_iter: 20_000,
            fallback_tol: 1e-9,
            fallback_max_iter: 100_000,
        }
    }
}

/// Everything produced while reformulating one instance.
#[derive(Debug, Clone)]
pub struct Reformulation {
    /// Instance after bound recovery or slack conversion, before scaling.
    pub standard: QcqpInstance,
    /// `standard` mapped onto the unit box.
    pub scaled: QcqpInstance,
    pub map: UnitBoxMap,
    pub params: QnrParams,
    /// Reformulated instance over the scaled variables.
    pub qnr: QcqpInstance,
    pub sdp: ConicSolution,
    pub cells: CellSet,
    pub cut_bounds: Vec<f64>,
    pub notes: Vec<String>,
}

impl Reformulation {
    /// Maps a point of the reformulated model back to the standard variables.
    pub fn to_standard(&self, y: &[f64]) -> Vec<f64> {
        self.map.to_original(&y[..self.scaled.n])
    }
}

/// Brings an instance into a bounded, equality-only (or QCQP) standard
/// form: bound recovery for unbounded QCQPs, slacks for linear
/// inequalities.
pub fn standardize(inst: &QcqpInstance, settings: &AdmmSettings) -> Result<QcqpInstance> {
    match inst.kind {
        ProblemKind::QcqpNoBounds => preprocess_qcqp2_bounds_with(inst, settings),
        ProblemKind::LcqpInq => inequality_to_standard(inst),
        _ => Ok(inst.clone()),
    }
}

/// Re-solves the final cell set of an OPTIMAL fixed-weight solve at
/// [`ReformOptions::fallback_tol`], warm-started, and keeps the result only
/// if it reaches that tolerance.
fn polish(inst: &QcqpInstance, builder: &CutBuilder, res: &mut CutLoopResult, opts: &ReformOptions) -> Result<()> {
    if res.solution.status != ConicStatus::Optimal || opts.fallback_tol >= opts.cut.settings.tol {
        return Ok(());
    }
    let p = builder.build(inst, &res.cells)?;
    let settings = AdmmSettings { tol: opts.fallback_tol, max_iter: opts.fallback_max_iter, ..opts.cut.settings.clone() };
    let sol = solve_conic_with(&p, &settings, Some(&res.solution.warm_start(&p)))?;
    if sol.status == ConicStatus::Optimal {
        res.bounds.push(sol.bound());
        res.solution = sol;
    }
    Ok(())
}

fn note_blend(notes: &mut Vec<String>, alpha: f64) {
    if alpha < 1.0 {
        notes.push(format!("parameters blended toward the plain split, weight {:.4} on recovered", alpha));
    }
}

/// Full pipeline: standardize, scale to the unit box, solve the lifted
/// problem (cut loop, or the reduced StQP variant), recover parameters,
/// falling back to fixed residual weights when the free solve fails, and
/// build the reformulated instance.
pub fn reformulate(inst: &QcqpInstance, opts: &ReformOptions) -> Result<Reformulation> {
    let standard = standardize(inst, &opts.cut.settings)?;
    let (scaled, map) = standard.to_unit_box()?;
    let mut notes = Vec::new();
    let linear = matches!(scaled.kind, ProblemKind::Lcqp | ProblemKind::StQp | ProblemKind::BoxQp)
        && scaled.constraints.is_empty();
    if !linear {
        let res = iterative_cut_solve(&scaled, &CutBuilder::SdpRlt, &opts.cut)?;
        let params = recover_z_qcqp(&res.solution, &scaled)?;
        let (params, qnr, alpha) = safeguard(&scaled, params, build_qnr)?;
        note_blend(&mut notes, alpha);
        return Ok(Reformulation {
            standard,
            scaled,
            map,
            params,
            qnr,
            sdp: res.solution,
            cells: res.cells,
            cut_bounds: res.bounds,
            notes,
        });
    }
    let mut cut = opts.cut.clone();
    cut.settings.max_iter = opts.free_gamma_max_iter.min(cut.settings.max_iter);
    cut.require_optimal = !scaled.equalities.is_empty();
    if scaled.kind == ProblemKind::StQp && opts.stqp_nonneg_only {
        cut.initial = CellSet::nonneg(scaled.n);
        cut.max_rounds = 1;
    }
    let free = iterative_cut_solve(&scaled, &CutBuilder::Lcqp { gamma_fixed: None }, &cut);
    let attempt = free.and_then(|res| {
        if res.solution.status != ConicStatus::Optimal && !scaled.equalities.is_empty() {
            return Err(Error::RecoveryFailed(format!("free-weight solve ended with {}", res.solution.status)));
        }
        let params = recover_z_lcqp(&res.solution, &scaled)?;
        Ok((params, res))
    });
    let (params, res) = match attempt {
        Ok(v) => v,
        Err(e) => {
            notes.push(format!("fixed-weight fallback after: {}", e));
            log::info!("falling back to fixed residual weight {}: {}", opts.fallback_gamma, e);
            let mut cut = opts.cut.clone();
            if scaled.kind == ProblemKind::StQp && opts.stqp_nonneg_only {
                cut.initial = CellSet::nonneg(scaled.n);
                cut.max_rounds = 1;
            }
            let gamma = vec![opts.fallback_gamma; scaled.equalities.len()];
            let builder = CutBuilder::Lcqp { gamma_fixed: Some(gamma) };
            let mut res = iterative_cut_solve(&scaled, &builder, &cut)
                .map_err(|e2| Error::RecoveryFailed(format!("{}; fallback failed: {}", e, e2)))?;
            polish(&scaled, &builder, &mut res, opts)?;
            let mut params = recover_z_lcqp(&res.solution, &scaled)
                .map_err(|e2| Error::RecoveryFailed(format!("{}; fallback failed: {}", e, e2)))?;
            params.provenance = Provenance::GammaFixedFallback;
            (params, res)
        }
    };
    let (params, qnr, alpha) = safeguard(&scaled, params, build_lcqp_qnr)?;
    note_blend(&mut notes, alpha);
    Ok(Reformulation {
        standard,
        scaled,
        map,
        params,
        qnr,
        sdp: res.solution,
        cells: res.cells,
        cut_bounds: res.bounds,
        notes,
    })
}
