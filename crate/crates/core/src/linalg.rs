//! Dense linear algebra: a small row-major matrix type, the cyclic Jacobi
//! eigensolver, PSD projection and a regularized Cholesky factorization.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Maximum number of Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;

/// Relative off-diagonal Frobenius norm at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-12;

/// Pivot floor used by [`Cholesky`].
pub const CHOL_REG: f64 = 1e-12;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].as_ref().len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `x^T A x` for a square matrix.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        assert!(self.is_square() && self.rows == x.len());
        let mut s = 0.0;
        for i in 0..self.rows {
            s += x[i] * dot(self.row(i), x);
        }
        s
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Matrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Replaces `A` by `(A + A^T) / 2`.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square());
        let n = self.rows;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    /// First `(i, j)` with `A[i][j] != A[j][i]` (bitwise), if any.
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        if !self.is_square() {
            return Some((0, 0));
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self[(i, j)].to_bits() != self[(j, i)].to_bits() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// `sum_ij A_ij B_ij`
    pub fn inner(&self, other: &Matrix) -> f64 {
        dot(&self.data, &other.data)
    }

    /// Symmetric permutation `P A P^T` with `(PAP^T)[a][b] = A[perm[a]][perm[b]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.rows, self.cols, |a, b| self[(perm[a], perm[b])])
    }

    /// Embeds the matrix in the top-left corner of a larger zero matrix.
    pub fn padded(&self, n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigendecomposition `A = V diag(values) V^T` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct EigDecomp {
    pub values: Vec<f64>,
    /// Columns are eigenvectors.
    pub vectors: Matrix,
}

impl EigDecomp {
    /// `V f(diag) V^T` for a map applied to every eigenvalue.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = Matrix::zeros(n, n);
        for k in 0..n {
            let lk = mapped[k];
            if lk == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * lk;
                if vik == 0.0 {
                    continue;
                }
                for j in i..n {
                    out[(i, j)] += vik * v[(j, k)];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                out[(i, j)] = out[(j, i)];
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_with(|l| l)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations with a threshold
/// strategy for the first sweeps. The sweep order is fixed, so the result is
/// deterministic for a given input.
pub fn eigh_jacobi(a: &Matrix) -> Result<EigDecomp> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::Dimension(alloc::format!(
            "eigh_jacobi needs a non-empty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut w = a.clone();
    w.symmetrize();
    let mut v = Matrix::identity(n);
    let norm_f = w.frobenius();
    let mut converged = n == 1 || norm_f == 0.0;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        let mut off = 0.0;
        let mut off_abs = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * w[(p, q)] * w[(p, q)];
                off_abs += w[(p, q)].abs();
            }
        }
        if off.sqrt() <= JACOBI_TOL * norm_f {
            converged = true;
            continue;
        }
        let threshold = if sweep < 3 { 0.2 * off_abs / (n * n) as f64 } else { 0.0 };
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = w[(p, q)];
                let g = 100.0 * apq.abs();
                let app = w[(p, p)];
                let aqq = w[(q, q)];
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    w[(p, q)] = 0.0;
                    w[(q, p)] = 0.0;
                    continue;
                }
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                let h = aqq - app;
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut w, &mut v, p, q, c, s, t, apq);
            }
        }
        sweep += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(i, i)].partial_cmp(&w[(j, j)]).unwrap_or(core::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| w[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(EigDecomp { values, vectors })
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn rotate(w: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64, t: f64, apq: f64) {
    let n = w.rows();
    let app = w[(p, p)];
    let aqq = w[(q, q)];
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = w[(k, p)];
        let akq = w[(k, q)];
        let nkp = c * akp - s * akq;
        let nkq = s * akp + c * akq;
        w[(k, p)] = nkp;
        w[(p, k)] = nkp;
        w[(k, q)] = nkq;
        w[(q, k)] = nkq;
    }
    w[(p, p)] = app - t * apq;
    w[(q, q)] = aqq + t * apq;
    w[(p, q)] = 0.0;
    w[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &Matrix) -> Result<f64> {
    Ok(eigh_jacobi(a)?.values[0])
}

/// Nearest positive semidefinite matrix in Frobenius norm.
pub fn psd_project(a: &Matrix) -> Result<Matrix> {
    let eig = eigh_jacobi(a)?;
    if eig.values[0] >= 0.0 {
        let mut out = a.clone();
        out.symmetrize();
        return Ok(out);
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0)))
}

/// Lower-triangular Cholesky factor `A = L L^T`; pivots below the floor are
/// replaced by [`CHOL_REG`] scaled to the diagonal magnitude.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    regularized: usize,
}

impl Cholesky {
    pub fn factor(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(alloc::format!("cholesky of {}x{}", a.rows(), a.cols())));
        }
        let n = a.rows();
        let scale = (0..n).fold(1.0f64, |m, i| m.max(a[(i, i)].abs()));
        let floor = CHOL_REG * scale;
        let mut l = vec![0.0; n * n];
        let mut regularized = 0;
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= floor {
                d = floor;
                regularized += 1;
            }
            let ljj = d.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { n, l, regularized })
    }

    /// Number of pivots that hit the regularization floor.
    pub fn regularized_pivots(&self) -> usize {
        self.regularized
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let l = &self.l;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i * n + k] * b[k];
            }
            b[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * b[k];
            }
            b[i] = s / l[i * n + i];
        }
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting. Returns
/// `None` when a pivot falls below `1e-12` times the largest entry.
pub fn lu_solve(mut a: Matrix, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return None;
    }
    let tiny = 1e-12 * a.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let mut p = k;
        for i in (k + 1)..n {
            if a[(i, k)].abs() > a[(p, k)].abs() {
                p = i;
            }
        }
        if a[(p, k)].abs() <= tiny {
            return None;
        }
        if p != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = t;
            }
            b.swap(k, p);
        }
        let piv = a[(k, k)];
        for i in (k + 1)..n {
            let f = a[(i, k)] / piv;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[(i, j)] -= f * a[(k, j)];
            }
            b[i] -= f * b[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= a[(i, j)] * b[j];
        }
        b[i] = s / a[(i, i)];
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    fn random_sym(n: usize, seed: &mut u64) -> Matrix {
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = lcg(seed);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    fn det(mut a: Matrix) -> f64 {
        let n = a.rows();
        let mut d = 1.0;
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[(i, k)].abs().partial_cmp(&a[(j, k)].abs()).unwrap()).unwrap();
            if a[(p, k)] == 0.0 {
                return 0.0;
            }
            if p != k {
                for j in 0..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = t;
                }
                d = -d;
            }
            d *= a[(k, k)];
            for i in (k + 1)..n {
                let f = a[(i, k)] / a[(k, k)];
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        d
    }

    /// Roots of det(A - lambda I) by sign-change scanning plus bisection.
    fn char_poly_roots(a: &Matrix) -> Vec<f64> {
        let n = a.rows();
        let r = a.max_abs() * n as f64 + 1.0;
        let f = |l: f64| det(a.sub(&Matrix::identity(n).scaled(l)));
        let steps = 20000;
        let mut roots = Vec::new();
        let mut prev_x = -r;
        let mut prev = f(prev_x);
        for s in 1..=steps {
            let x = -r + 2.0 * r * s as f64 / steps as f64;
            let fx = f(x);
            if prev == 0.0 {
                roots.push(prev_x);
            } else if prev.signum() != fx.signum() && fx != 0.0 {
                let (mut lo, mut hi) = (prev_x, x);
                let flo = prev;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid).signum() == flo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev = fx;
            prev_x = x;
        }
        roots
    }

    #[test]
    fn diagonal_input() {
        let e = eigh_jacobi(&Matrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn analytic_two_by_two() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let e = eigh_jacobi(&a).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        // eigenvector of -1 is (1,-1)/sqrt2 up to sign
        let v0 = (e.vectors[(0, 0)], e.vectors[(1, 0)]);
        assert!((v0.0.abs() - s).abs() < 1e-14 && (v0.0 + v0.1).abs() < 1e-14);
        let v1 = (e.vectors[(0, 1)], e.vectors[(1, 1)]);
        assert!((v1.0.abs() - s).abs() < 1e-14 && (v1.0 - v1.1).abs() < 1e-14);
    }

    #[test]
    fn matches_characteristic_polynomial_roots() {
        let mut seed = 7;
        for _ in 0..5 {
            let a = random_sym(4, &mut seed);
            let e = eigh_jacobi(&a).unwrap();
            let roots = char_poly_roots(&a);
            assert_eq!(roots.len(), 4);
            for (x, y) in e.values.iter().zip(&roots) {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
    }

    /// Number of eigenvalues below `l`, from the inertia of `A - l I`
    /// (symmetric elimination without pivoting).
    fn count_below(a: &Matrix, l: f64) -> usize {
        let n = a.rows();
        let mut m = a.sub(&Matrix::identity(n).scaled(l));
        let mut neg = 0;
        for k in 0..n {
            let p = m[(k, k)];
            if p < 0.0 {
                neg += 1;
            }
            let p = if p == 0.0 { 1e-300 } else { p };
            for i in (k + 1)..n {
                let f = m[(i, k)] / p;
                for j in (k + 1)..n {
                    let v = m[(k, j)];
                    m[(i, j)] -= f * v;
                }
            }
        }
        neg
    }

    /// Smallest eigenvalue by bisection on the inertia count.
    fn bisect_min(a: &Matrix) -> f64 {
        let r = a.max_abs() * a.rows() as f64 + 1.0;
        let (mut lo, mut hi) = (-r, r);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_below(a, mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn horn_matrix_min_eigenvalue() {
        let h = Matrix::from_rows(&[
            [1.0, -1.0, 1.0, 1.0, -1.0],
            [-1.0, 1.0, -1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0, 1.0],
            [1.0, 1.0, -1.0, 1.0, -1.0],
            [-1.0, 1.0, 1.0, -1.0, 1.0],
        ]);
        let lmin = min_eigenvalue(&h).unwrap();
        let oracle = bisect_min(&h);
        assert!((lmin - oracle).abs() < 1e-8);
        assert!((lmin + 1.2360679).abs() < 1e-6);
    }

    #[test]
    fn min_eigenvalue_basics() {
        assert!((min_eigenvalue(&Matrix::identity(3)).unwrap() - 1.0).abs() < 1e-15);
        let a = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        assert!((min_eigenvalue(&a).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_and_orthogonality_many_seeds() {
        let mut seed = 1;
        for trial in 0..1000 {
            let n = 1 + trial % 12;
            let a = random_sym(n, &mut seed);
            let e = eigh_jacobi(&a).unwrap();
            let vtv = e.vectors.transpose().matmul(&e.vectors);
            assert!(vtv.sub(&Matrix::identity(n)).max_abs() <= 1e-10);
            let rec = e.reconstruct();
            assert!(rec.sub(&a).max_abs() <= 1e-8 * a.max_abs().max(1.0));
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn projection_of_swap_matrix() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let p = psd_project(&a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[(i, j)] - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn projection_fixes_psd_and_is_idempotent() {
        let mut seed = 3;
        for _ in 0..50 {
            let b = random_sym(5, &mut seed);
            let psd = b.matmul(&b);
            let p = psd_project(&psd).unwrap();
            assert!(p.sub(&psd).max_abs() < 1e-10);
            let a = random_sym(5, &mut seed);
            let p1 = psd_project(&a).unwrap();
            let p2 = psd_project(&p1).unwrap();
            assert!(p2.sub(&p1).max_abs() < 1e-10);
            assert!(min_eigenvalue(&p1).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn projection_is_nonexpansive() {
        let mut seed = 11;
        for _ in 0..100 {
            let a = random_sym(5, &mut seed);
            let b = random_sym(5, &mut seed);
            let pa = psd_project(&a).unwrap();
            let pb = psd_project(&b).unwrap();
            assert!(pa.sub(&pb).frobenius() <= a.sub(&b).frobenius() + 1e-12);
        }
    }

    #[test]
    fn projection_is_locally_nearest() {
        // Any PSD matrix near the projection is no closer to the input.
        let mut seed = 5;
        for _ in 0..5 {
            let a = random_sym(5, &mut seed);
            let p = psd_project(&a).unwrap();
            let d0 = a.sub(&p).frobenius();
            for _ in 0..200 {
                let mut e = random_sym(5, &mut seed).scaled(0.05);
                e = p.add(&e);
                let cand = psd_project(&e).unwrap();
                assert!(a.sub(&cand).frobenius() >= d0 - 1e-10);
            }
        }
    }

    #[test]
    fn cholesky_solves() {
        let a = Matrix::from_rows(&[[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]]);
        let ch = Cholesky::factor(&a).unwrap();
        let mut b = vec![1.0, 2.0, 3.0];
        ch.solve_in_place(&mut b);
        let r = a.mul_vec(&b);
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12 && (r[2] - 3.0).abs() < 1e-12);
        assert_eq!(ch.regularized_pivots(), 0);
        let singular = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        assert_eq!(Cholesky::factor(&singular).unwrap().regularized_pivots(), 1);
    }

    #[test]
    fn lu_solve_matches_product() {
        let mut seed = 11u64;
        for n in 1..7 {
            let a = Matrix::from_fn(n, n, |_, _| lcg(&mut seed));
            let x: Vec<f64> = (0..n).map(|_| lcg(&mut seed)).collect();
            let b = a.mul_vec(&x);
            let got = lu_solve(a, b).unwrap();
            for (g, e) in got.iter().zip(&x) {
                assert!((g - e).abs() < 1e-9);
            }
        }
        assert!(lu_solve(Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]), vec![1.0, 2.0]).is_none());
    }
}
