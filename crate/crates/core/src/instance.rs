//! Instance data model: quadratic functions, QCQP instances and convexity
//! classification.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{dot, min_eigenvalue, Matrix};

/// Default tolerance for PSD classification.
pub const EIG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Obj,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "LE",
            Sense::Eq => "EQ",
            Sense::Obj => "OBJ",
        }
    }
}

impl FromStr for Sense {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "LE" | "<=" => Ok(Sense::Le),
            "EQ" | "=" => Ok(Sense::Eq),
            "OBJ" => Ok(Sense::Obj),
            _ => Err(Error::InvalidArgument(format!("unknown sense '{s}'"))),
        }
    }
}

/// `1/2 x^T Q x + c^T x` compared against `b` according to `sense`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadFunc {
    pub q: Matrix,
    pub c: Vec<f64>,
    pub b: f64,
    pub sense: Sense,
}

impl QuadFunc {
    /// Normalizes `Q <- (Q + Q^T)/2`.
    pub fn new(mut q: Matrix, c: Vec<f64>, b: f64, sense: Sense) -> Result<Self> {
        if !q.is_square() || q.rows() != c.len() {
            return Err(Error::Dimension(format!(
                "Q is {}x{} but c has length {}",
                q.rows(),
                q.cols(),
                c.len()
            )));
        }
        q.symmetrize();
        Ok(Self { q, c, b, sense })
    }

    /// Like [`QuadFunc::new`] but rejects asymmetric input instead of
    /// normalizing it.
    pub fn new_strict(q: Matrix, c: Vec<f64>, b: f64, sense: Sense) -> Result<Self> {
        if let Some((i, j)) = q.asymmetry() {
            return Err(Error::NotSymmetric(i, j));
        }
        Self::new(q, c, b, sense)
    }

    pub fn linear(c: Vec<f64>, b: f64, sense: Sense) -> Self {
        let n = c.len();
        Self { q: Matrix::zeros(n, n), c, b, sense }
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn is_linear(&self) -> bool {
        self.q.is_zero()
    }

    /// `1/2 x^T Q x + c^T x`
    pub fn eval(&self, x: &[f64]) -> f64 {
        0.5 * self.q.quad_form(x) + dot(&self.c, x)
    }

    /// `Q x + c`
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.q.mul_vec(x);
        for (gi, ci) in g.iter_mut().zip(&self.c) {
            *gi += ci;
        }
        g
    }

    /// Signed violation `f(x) - b` (positive means violated for `Le`).
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.eval(x) - self.b
    }

    /// Range of `1/2 x^T Q x + c^T x` over a box by interval arithmetic.
    pub fn interval(&self, lb: &[f64], ub: &[f64]) -> (f64, f64) {
        quad_interval(&self.q, &self.c, lb, ub)
    }

    /// Pads with zeros to dimension `n`.
    pub fn padded(&self, n: usize) -> Self {
        let mut c = self.c.clone();
        c.resize(n, 0.0);
        Self { q: self.q.padded(n), c, b: self.b, sense: self.sense }
    }
}

/// `[min, max]` of `x_i * x_j` over the box.
pub fn product_interval(li: f64, ui: f64, lj: f64, uj: f64) -> (f64, f64) {
    let p = [li * lj, li * uj, ui * lj, ui * uj];
    let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// `[min, max]` of `x^2` over `[l, u]`.
pub fn square_interval(l: f64, u: f64) -> (f64, f64) {
    let hi = (l * l).max(u * u);
    let lo = if l <= 0.0 && u >= 0.0 { 0.0 } else { (l * l).min(u * u) };
    (lo, hi)
}

/// Interval enclosure of `1/2 x^T Q x + c^T x` over `[lb, ub]`.
pub fn quad_interval(q: &Matrix, c: &[f64], lb: &[f64], ub: &[f64]) -> (f64, f64) {
    let n = c.len();
    let (mut lo, mut hi) = (0.0, 0.0);
    let mut add = |coef: f64, (a, b): (f64, f64)| {
        if coef >= 0.0 {
            lo += coef * a;
            hi += coef * b;
        } else {
            lo += coef * b;
            hi += coef * a;
        }
    };
    for i in 0..n {
        if c[i] != 0.0 {
            add(c[i], (lb[i], ub[i]));
        }
        if q[(i, i)] != 0.0 {
            add(0.5 * q[(i, i)], square_interval(lb[i], ub[i]));
        }
        for j in (i + 1)..n {
            if q[(i, j)] != 0.0 {
                add(q[(i, j)], product_interval(lb[i], ub[i], lb[j], ub[j]));
            }
        }
    }
    (lo, hi)
}

/// Linear equality `a^T x = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEquality {
    pub a: Vec<f64>,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Qcqp,
    Lcqp,
    LcqpInq,
    BoxQp,
    StQp,
    QcqpNoBounds,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Qcqp => "QCQP",
            ProblemKind::Lcqp => "LCQP",
            ProblemKind::LcqpInq => "LCQP_INQ",
            ProblemKind::BoxQp => "BOXQP",
            ProblemKind::StQp => "STQP",
            ProblemKind::QcqpNoBounds => "QCQP_NOBOUNDS",
        }
    }

    /// Kinds handled by the linearly constrained reformulation path.
    pub fn is_linearly_constrained(self) -> bool {
        matches!(self, ProblemKind::Lcqp | ProblemKind::BoxQp | ProblemKind::StQp)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "QCQP" => ProblemKind::Qcqp,
            "LCQP" => ProblemKind::Lcqp,
            "LCQP_INQ" => ProblemKind::LcqpInq,
            "BOXQP" => ProblemKind::BoxQp,
            "STQP" => ProblemKind::StQp,
            "QCQP_NOBOUNDS" => ProblemKind::QcqpNoBounds,
            _ => return Err(Error::InvalidArgument(format!("unknown kind '{s}'"))),
        })
    }
}

/// A quadratic program
///
/// ```text
/// min  1/2 x^T Q_0 x + c_0^T x + constant
/// s.t. 1/2 x^T Q_i x + c_i^T x (<= | =) b_i
///      a_k^T x = d_k
///      lb <= x <= ub
/// ```
///
/// The last `aux` variables are auxiliaries introduced by a reformulation;
/// they never appear in the original model.
#[derive(Debug, Clone, PartialEq)]
pub struct QcqpInstance {
    pub n: usize,
    pub objective: QuadFunc,
    pub obj_constant: f64,
    pub constraints: Vec<QuadFunc>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub kind: ProblemKind,
    pub equalities: Vec<LinearEquality>,
    pub aux: usize,
}

impl QcqpInstance {
    pub fn new(
        kind: ProblemKind,
        objective: QuadFunc,
        constraints: Vec<QuadFunc>,
        lb: Vec<f64>,
        ub: Vec<f64>,
        equalities: Vec<LinearEquality>,
    ) -> Result<Self> {
        let inst = Self {
            n: objective.n(),
            objective,
            obj_constant: 0.0,
            constraints,
            lb,
            ub,
            kind,
            equalities,
            aux: 0,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// BoxQP `min 1/2 x^T Q x + c^T x` over `[0,1]^n`.
    pub fn box_qp(q: Matrix, c: Vec<f64>) -> Result<Self> {
        let n = c.len();
        let obj = QuadFunc::new(q, c, 0.0, Sense::Obj)?;
        Self::new(ProblemKind::BoxQp, obj, vec![], vec![0.0; n], vec![1.0; n], vec![])
    }

    /// StQP `min 1/2 x^T Q x` over the unit simplex.
    pub fn st_qp(q: Matrix) -> Result<Self> {
        let n = q.rows();
        let obj = QuadFunc::new(q, vec![0.0; n], 0.0, Sense::Obj)?;
        Self::new(
            ProblemKind::StQp,
            obj,
            vec![],
            vec![0.0; n],
            vec![1.0; n],
            vec![LinearEquality { a: vec![1.0; n], d: 1.0 }],
        )
    }

    pub fn with_aux(mut self, aux: usize) -> Result<Self> {
        self.aux = aux;
        self.validate()?;
        Ok(self)
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.obj_constant = constant;
        self
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    /// Number of variables of the original (non-auxiliary) model.
    pub fn n_orig(&self) -> usize {
        self.n - self.aux
    }

    pub fn has_finite_bounds(&self) -> bool {
        self.lb.iter().chain(&self.ub).all(|v| v.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidInstance("no variables".into()));
        }
        if self.aux > n {
            return Err(Error::InvalidInstance(format!("aux={} exceeds n={n}", self.aux)));
        }
        if self.objective.n() != n || self.objective.q.rows() != n {
            return Err(Error::Dimension(format!("objective has dimension {}, expected {n}", self.objective.n())));
        }
        for (i, f) in self.constraints.iter().enumerate() {
            if f.n() != n || f.q.rows() != n {
                return Err(Error::Dimension(format!("constraint {i} has dimension {}, expected {n}", f.n())));
            }
            if f.sense == Sense::Obj {
                return Err(Error::InvalidInstance(format!("constraint {i} has sense OBJ")));
            }
        }
        for (k, e) in self.equalities.iter().enumerate() {
            if e.a.len() != n {
                return Err(Error::Dimension(format!("equality {k} has length {}, expected {n}", e.a.len())));
            }
        }
        if self.lb.len() != n || self.ub.len() != n {
            return Err(Error::Dimension(format!(
                "bounds have lengths {}/{}, expected {n}",
                self.lb.len(),
                self.ub.len()
            )));
        }
        for i in 0..n {
            if self.lb[i].is_nan() || self.ub[i].is_nan() || self.lb[i] > self.ub[i] {
                return Err(Error::InvalidInstance(format!("bad bounds on variable {i}")));
            }
            if self.kind != ProblemKind::QcqpNoBounds && !(self.lb[i].is_finite() && self.ub[i].is_finite()) {
                return Err(Error::InvalidInstance("bounds required".into()));
            }
        }
        match self.kind {
            ProblemKind::StQp => {
                let simplex = self.equalities.len() == 1
                    && self.equalities[0].d == 1.0
                    && self.equalities[0].a[..self.n_orig()].iter().all(|&v| v == 1.0)
                    && self.lb[..self.n_orig()].iter().all(|&v| v == 0.0)
                    && self.ub[..self.n_orig()].iter().all(|&v| v == 1.0);
                if !simplex {
                    return Err(Error::InvalidInstance("STQP requires the simplex row e^T x = 1 and [0,1] bounds".into()));
                }
            }
            ProblemKind::BoxQp => {
                if !self.equalities.is_empty() || !self.constraints.is_empty() {
                    return Err(Error::InvalidInstance("BOXQP takes no constraints".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Objective value including the constant term.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.eval(x) + self.obj_constant
    }

    /// Largest violation over bounds, constraints and equalities.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for i in 0..self.n {
            v = v.max(self.lb[i] - x[i]).max(x[i] - self.ub[i]);
        }
        for f in &self.constraints {
            let r = f.residual(x);
            v = v.max(if f.sense == Sense::Eq { r.abs() } else { r });
        }
        for e in &self.equalities {
            v = v.max((dot(&e.a, x) - e.d).abs());
        }
        v
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.max_violation(x) <= tol
    }

    /// Whether every constraint is linear.
    pub fn is_linearly_constrained(&self) -> bool {
        self.constraints.iter().all(|f| f.is_linear())
    }

    /// Applies the variable permutation `y_a = x_{perm[a]}` to all data.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let pv = |v: &[f64]| perm.iter().map(|&p| v[p]).collect::<Vec<_>>();
        let pf = |f: &QuadFunc| QuadFunc { q: f.q.permuted(perm), c: pv(&f.c), b: f.b, sense: f.sense };
        Self {
            n: self.n,
            objective: pf(&self.objective),
            obj_constant: self.obj_constant,
            constraints: self.constraints.iter().map(pf).collect(),
            lb: pv(&self.lb),
            ub: pv(&self.ub),
            kind: self.kind,
            equalities: self.equalities.iter().map(|e| LinearEquality { a: pv(&e.a), d: e.d }).collect(),
            aux: self.aux,
        }
    }

    /// Affine change of variables `x = lb + w * y` mapping the box onto
    /// `[0,1]^n`. Fixed variables (`w = 0`) keep a zero column.
    pub fn to_unit_box(&self) -> Result<(QcqpInstance, UnitBoxMap)> {
        if !self.has_finite_bounds() {
            let i = (0..self.n).find(|&i| !self.lb[i].is_finite() || !self.ub[i].is_finite()).unwrap_or(0);
            return Err(Error::Unbounded(i));
        }
        let map = UnitBoxMap {
            lb: self.lb.clone(),
            width: self.lb.iter().zip(&self.ub).map(|(l, u)| u - l).collect(),
        };
        let scale = |f: &QuadFunc| -> (QuadFunc, f64) {
            let n = self.n;
            let w = &map.width;
            let l = &map.lb;
            let q = Matrix::from_fn(n, n, |i, j| w[i] * f.q[(i, j)] * w[j]);
            let ql = f.q.mul_vec(l);
            let c: Vec<f64> = (0..n).map(|i| w[i] * (ql[i] + f.c[i])).collect();
            let shift = 0.5 * dot(l, &ql) + dot(&f.c, l);
            (QuadFunc { q, c, b: f.b - shift, sense: f.sense }, shift)
        };
        let (objective, obj_shift) = scale(&self.objective);
        let objective = QuadFunc { b: 0.0, ..objective };
        let constraints = self.constraints.iter().map(|f| scale(f).0).collect();
        let equalities = self
            .equalities
            .iter()
            .map(|e| LinearEquality {
                a: e.a.iter().zip(&map.width).map(|(a, w)| a * w).collect(),
                d: e.d - dot(&e.a, &map.lb),
            })
            .collect();
        let kind = if self.kind == ProblemKind::QcqpNoBounds { ProblemKind::Qcqp } else { self.kind };
        let out = QcqpInstance {
            n: self.n,
            objective,
            obj_constant: self.obj_constant + obj_shift,
            constraints,
            lb: vec![0.0; self.n],
            ub: vec![1.0; self.n],
            kind,
            equalities,
            aux: self.aux,
        };
        Ok((out, map))
    }
}

/// Affine map `x = lb + width * y` produced by [`QcqpInstance::to_unit_box`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitBoxMap {
    pub lb: Vec<f64>,
    pub width: Vec<f64>,
}

impl UnitBoxMap {
    pub fn identity(n: usize) -> Self {
        Self { lb: vec![0.0; n], width: vec![1.0; n] }
    }

    pub fn to_original(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(self.lb.iter().zip(&self.width)).map(|(y, (l, w))| l + w * y).collect()
    }

    pub fn to_scaled(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lb.iter().zip(&self.width))
            .map(|(x, (l, w))| if *w > 0.0 { (x - l) / w } else { 0.0 })
            .collect()
    }
}

/// Convexity flags of the objective and constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexityTag {
    pub objective_convex: bool,
    pub constraint_convex: Vec<bool>,
}

impl ConvexityTag {
    /// Indices of constraints with a PSD Hessian.
    pub fn convex_set(&self) -> Vec<usize> {
        self.constraint_convex.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| i).collect()
    }
}

pub fn is_psd(q: &Matrix, eig_tol: f64) -> Result<bool> {
    if q.is_zero() {
        return Ok(true);
    }
    Ok(min_eigenvalue(q)? >= -eig_tol)
}

/// Tags each quadratic form as convex iff its smallest eigenvalue is at least
/// `-eig_tol`.
pub fn classify_convexity(inst: &QcqpInstance, eig_tol: f64) -> Result<ConvexityTag> {
    Ok(ConvexityTag {
        objective_convex: is_psd(&inst.objective.q, eig_tol)?,
        constraint_convex: inst.constraints.iter().map(|f| is_psd(&f.q, eig_tol)).collect::<Result<_>>()?,
    })
}
