//! Seeded random instance families.
//!
//! All families draw from one xoshiro256++ stream seeded through splitmix64
//! (`seed_from_u64`). Uniform reals take the top 53 bits of a draw; integer
//! ranges and permutations (Fisher-Yates, high index first) use the same
//! reals. The draw order of each family is listed on its function, so an
//! instance is reproducible from `(family, n, m, density, seed)` alone.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::instance::{ProblemKind, QcqpInstance, QuadFunc, Sense};
use crate::linalg::{eigh_jacobi, Matrix};

pub type Rng = Xoshiro256PlusPlus;

/// Rejection-sampling attempts per feasibility check of a random QCQP.
const FEAS_SAMPLES: usize = 20_000;
/// Resamples before giving up on a random QCQP.
const MAX_RESAMPLES: usize = 100;
/// Radius of the ball row `x^T x <= 1000`.
pub const BALL_RHS: f64 = 1000.0;

pub fn rng(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Uniform draw on `[0, 1)` from the top 53 bits.
pub fn unit_uniform(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_uniform(rng)
}

/// Integer uniform on `[lo, hi]`.
pub fn uniform_int(rng: &mut Rng, lo: i64, hi: i64) -> i64 {
    let span = (hi - lo + 1) as f64;
    lo + ((unit_uniform(rng) * span) as i64).min(hi - lo)
}

/// Uniformly random permutation by Fisher-Yates.
pub fn permutation(rng: &mut Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = ((unit_uniform(rng) * (i + 1) as f64) as usize).min(i);
        p.swap(i, j);
    }
    p
}

/// The 5x5 Horn matrix: copositive but not a sum of PSD and nonnegative
/// matrices, which makes its StQP a standard hard case for lifted bounds.
pub fn horn_matrix() -> Matrix {
    Matrix::from_rows(&[
        [1.0, -1.0, 1.0, 1.0, -1.0],
        [-1.0, 1.0, -1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0, -1.0, 1.0],
        [1.0, 1.0, -1.0, 1.0, -1.0],
        [-1.0, 1.0, 1.0, -1.0, 1.0],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    HardStqp,
    LcqpInq,
    QcqpRandom,
    BoxqpDensity,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::HardStqp => "HARD_STQP",
            Family::LcqpInq => "LCQP_INQ",
            Family::QcqpRandom => "QCQP_RANDOM",
            Family::BoxqpDensity => "BOXQP_DENSITY",
        }
    }
}

impl core::fmt::Display for Family {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "HARD_STQP" | "STQP" => Ok(Family::HardStqp),
            "LCQP_INQ" | "LCQP" => Ok(Family::LcqpInq),
            "QCQP_RANDOM" | "QCQP" => Ok(Family::QcqpRandom),
            "BOXQP_DENSITY" | "BOXQP" => Ok(Family::BoxqpDensity),
            _ => Err(Error::InvalidArgument(format!("unknown family '{}'", s))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub density: f64,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(family: Family, n: usize, m: usize, density: f64, seed: u64) -> Self {
        Self { family, n, m, density, seed }
    }
}

pub fn generate(cfg: &GenConfig) -> Result<QcqpInstance> {
    match cfg.family {
        Family::HardStqp => gen_hard_stqp(cfg.n, cfg.seed),
        Family::LcqpInq => gen_lcqp_inq(cfg.n, cfg.m, cfg.seed),
        Family::QcqpRandom => gen_qcqp_random(cfg.n, cfg.m, cfg.seed),
        Family::BoxqpDensity => gen_boxqp(cfg.n, cfg.density, cfg.seed),
    }
}

/// Switches that pin parts of the hard StQP construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HardStqpOverride {
    /// Use `D = I` instead of random scaling.
    pub unit_scaling: bool,
    /// Use `J = I` instead of a random permutation.
    pub identity_permutation: bool,
}

/// Hard StQP: `Q = J D Q_hat D J^T` with `Q_hat = [[B, C], [C^T, H]]`,
/// `B = V V^T`, `H` the Horn matrix.
///
/// Draw order: `V` row-major on `[-50, 50]`, `C` row-major on `[0, 1]`,
/// the diagonal of `D` on `[0, 1]`, then the permutation.
pub fn gen_hard_stqp(n: usize, seed: u64) -> Result<QcqpInstance> {
    gen_hard_stqp_with(n, seed, HardStqpOverride::default())
}

pub fn gen_hard_stqp_with(n: usize, seed: u64, ov: HardStqpOverride) -> Result<QcqpInstance> {
    if n < 5 {
        return Err(Error::InvalidArgument(format!("hard StQP needs n >= 5, got {}", n)));
    }
    let mut r = rng(seed);
    let k = n - 5;
    let v = Matrix::from_fn(k, k, |_, _| uniform(&mut r, -50.0, 50.0));
    let b = v.matmul(&v.transpose());
    let c = Matrix::from_fn(k, 5, |_, _| uniform(&mut r, 0.0, 1.0));
    let h = horn_matrix();
    let qhat = Matrix::from_fn(n, n, |i, j| match (i < k, j < k) {
        (true, true) => b[(i, j)],
        (true, false) => c[(i, j - k)],
        (false, true) => c[(j, i - k)],
        (false, false) => h[(i - k, j - k)],
    });
    let d: Vec<f64> = (0..n).map(|_| uniform(&mut r, 0.0, 1.0)).collect();
    let d = if ov.unit_scaling { vec![1.0; n] } else { d };
    let perm = permutation(&mut r, n);
    let perm = if ov.identity_permutation { (0..n).collect() } else { perm };
    let scaled = Matrix::from_fn(n, n, |i, j| d[i] * qhat[(i, j)] * d[j]);
    // Q_ij = scaled[p_i, p_j] is J scaled J^T for the permutation matrix J
    // with ones at (i, p_i).
    QcqpInstance::st_qp(scaled.permuted(&perm))
}

/// LCQP with inequalities: `Q`, `c` uniform on `[-10, 10]`, rows `a_i`
/// uniform on `[0, 10]`, `d_i = r_i sum_j a_ij` with `r_i` on `[0.2, 0.4]`.
///
/// Draw order: upper triangle of `Q` row-major (diagonal included), `c`,
/// then per row `a_i` followed by `r_i`.
pub fn gen_lcqp_inq(n: usize, m: usize, seed: u64) -> Result<QcqpInstance> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("LCQP_INQ needs n, m >= 1".into()));
    }
    let mut r = rng(seed);
    let q = sym_uniform(&mut r, n, -10.0, 10.0);
    let c: Vec<f64> = (0..n).map(|_| uniform(&mut r, -10.0, 10.0)).collect();
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let a: Vec<f64> = (0..n).map(|_| uniform(&mut r, 0.0, 10.0)).collect();
        let ri = uniform(&mut r, 0.2, 0.4);
        let d = ri * a.iter().sum::<f64>();
        rows.push(QuadFunc::linear(a, d, Sense::Le));
    }
    let obj = QuadFunc::new(q, c, 0.0, Sense::Obj)?;
    QcqpInstance::new(ProblemKind::LcqpInq, obj, rows, vec![0.0; n], vec![1.0; n], vec![])
}

fn sym_uniform(r: &mut Rng, n: usize, lo: f64, hi: f64) -> Matrix {
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = uniform(r, lo, hi);
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    q
}

/// `V diag(d) V^T` where `V` holds the eigenvectors of a random symmetric
/// matrix with entries on `[-10, 10]`.
fn spectrum_replaced(r: &mut Rng, n: usize, dlo: f64, dhi: f64) -> Result<Matrix> {
    let base = sym_uniform(r, n, -10.0, 10.0);
    let eig = eigh_jacobi(&base)?;
    let d: Vec<f64> = (0..n).map(|_| uniform(r, dlo, dhi)).collect();
    let v = &eig.vectors;
    let mut q = Matrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * d[k] * v[(j, k)]).sum());
    q.symmetrize();
    Ok(q)
}

/// Random nonconvex QCQP without a box: a convex objective with spectrum on
/// `[1, 20]`, `m - 1` rows with spectrum on `[-10, 10]`, `c_i` on
/// `[-10, 10]`, `b_i` on `[-10, -1]`, and the ball row `x^T x <= 1000` last.
/// Instances without a sampled feasible point are redrawn from the same
/// stream.
///
/// Draw order per attempt: objective (upper triangle, then spectrum), then
/// per row its matrix (upper triangle, then spectrum), `c_i`, `b_i`;
/// feasibility samples follow on the same stream.
pub fn gen_qcqp_random(n: usize, m: usize, seed: u64) -> Result<QcqpInstance> {
    if n == 0 || m < 2 {
        return Err(Error::InvalidArgument(format!("QCQP_RANDOM needs n >= 1 and m >= 2, got n={} m={}", n, m)));
    }
    let mut r = rng(seed);
    for _ in 0..MAX_RESAMPLES {
        let q0 = spectrum_replaced(&mut r, n, 1.0, 20.0)?;
        let obj = QuadFunc::new(q0, vec![0.0; n], 0.0, Sense::Obj)?;
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m - 1 {
            let qi = spectrum_replaced(&mut r, n, -10.0, 10.0)?;
            let ci: Vec<f64> = (0..n).map(|_| uniform(&mut r, -10.0, 10.0)).collect();
            let bi = uniform(&mut r, -10.0, -1.0);
            rows.push(QuadFunc::new(qi, ci, bi, Sense::Le)?);
        }
        rows.push(QuadFunc::new(Matrix::identity(n).scaled(2.0), vec![0.0; n], BALL_RHS, Sense::Le)?);
        let inst = QcqpInstance::new(
            ProblemKind::QcqpNoBounds,
            obj,
            rows,
            vec![f64::NEG_INFINITY; n],
            vec![f64::INFINITY; n],
            vec![],
        )?;
        if sample_feasible(&inst, &mut r, FEAS_SAMPLES).is_some() {
            return Ok(inst);
        }
    }
    Err(Error::Infeasible(format!("no feasible QCQP drawn in {} attempts (seed {})", MAX_RESAMPLES, seed)))
}

/// Uniform sample from the ball `x^T x <= 1000`.
pub fn ball_point(r: &mut Rng, n: usize) -> Vec<f64> {
    let radius = BALL_RHS.sqrt();
    loop {
        let x: Vec<f64> = (0..n).map(|_| uniform(r, -radius, radius)).collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= BALL_RHS {
            return x;
        }
    }
}

/// First sampled point of the ball that satisfies every row, if any. Draws
/// are mixed across radii so thin feasible shells near the origin are hit.
pub fn sample_feasible(inst: &QcqpInstance, r: &mut Rng, samples: usize) -> Option<Vec<f64>> {
    let n = inst.n;
    for s in 0..samples {
        let mut x = ball_point(r, n);
        let shrink = [1.0, 0.3, 0.1, 0.03][s % 4];
        x.iter_mut().for_each(|v| *v *= shrink);
        if inst.constraints.iter().all(|g| g.residual(&x) <= 0.0) {
            return Some(x);
        }
    }
    None
}

/// Density-controlled BoxQP: each off-diagonal pair is nonzero with
/// probability `density` and then takes an integer on `[-50, 50]` other than
/// zero; the diagonal and `c` take integers on `[-50, 50]`.
///
/// Draw order: for each `i`, the diagonal entry, then for each `j > i` a
/// coin and (if it lands) a value; then `c`.
pub fn gen_boxqp(n: usize, density: f64, seed: u64) -> Result<QcqpInstance> {
    if !(density > 0.0 && density <= 1.0) || n == 0 {
        return Err(Error::InvalidArgument(format!("BoxQP needs n >= 1 and density in (0, 1], got {}", density)));
    }
    let mut r = rng(seed);
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        q[(i, i)] = uniform_int(&mut r, -50, 50) as f64;
        for j in (i + 1)..n {
            if unit_uniform(&mut r) < density {
                let mut v = uniform_int(&mut r, -50, 49);
                if v >= 0 {
                    v += 1;
                }
                q[(i, j)] = v as f64;
                q[(j, i)] = v as f64;
            }
        }
    }
    let c: Vec<f64> = (0..n).map(|_| uniform_int(&mut r, -50, 50) as f64).collect();
    QcqpInstance::box_qp(q, c)
}

/// Density class used when reporting BoxQP results.
pub fn density_class(d: f64) -> &'static str {
    if d <= 0.4 {
        "low"
    } else if d <= 0.6 {
        "medium"
    } else {
        "high"
    }
}

/// Fraction of nonzero off-diagonal pairs.
pub fn realized_density(q: &Matrix) -> f64 {
    let n = q.rows();
    if n < 2 {
        return 0.0;
    }
    let nz = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).filter(|&(i, j)| q[(i, j)] != 0.0).count();
    nz as f64 / (n * (n - 1) / 2) as f64
}
