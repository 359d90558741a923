//! Bounded dual simplex for `min c^T z  s.t.  lo_r <= A z <= hi_r, l <= z <= u`.
//!
//! Every structural column must have finite bounds, so starting from the slack
//! basis with each column parked at its cost-sign bound is dual feasible and
//! no phase one is needed. Rows can be appended between solves; the new slack
//! enters the basis and dual feasibility is kept, which makes cutting-plane
//! loops warm. The basis inverse is stored dense.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const STALL_SWITCH: usize = 60;
const NONBASIC: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct Lp {
    n: usize,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
    /// Variable occupying each basis position.
    head: Vec<usize>,
    /// Basis position of each variable, `NONBASIC` otherwise.
    pos: Vec<usize>,
    x: Vec<f64>,
    d: Vec<f64>,
    binv: Vec<Vec<f64>>,
    since_refactor: usize,
    iterations: usize,
    pub max_iterations: Option<usize>,
}

impl Lp {
    /// Structural columns with costs and finite bounds.
    pub fn new(cost: Vec<f64>, lb: Vec<f64>, ub: Vec<f64>) -> Self {
        let n = cost.len();
        assert!(lb.len() == n && ub.len() == n);
        debug_assert!(lb.iter().chain(&ub).all(|v| v.is_finite()), "columns need finite bounds");
        let x = (0..n).map(|j| if cost[j] >= 0.0 { lb[j] } else { ub[j] }).collect();
        Self {
            n,
            d: cost.clone(),
            cost,
            lo: lb,
            hi: ub,
            cols: vec![Vec::new(); n],
            rows: Vec::new(),
            head: Vec::new(),
            pos: vec![NONBASIC; n],
            x,
            binv: Vec::new(),
            since_refactor: 0,
            iterations: 0,
            max_iterations: None,
        }
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn col_bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Appends `lo <= sum v_j z_j <= hi`; either side may be infinite.
    pub fn add_row(&mut self, entries: &[(usize, f64)], lo: f64, hi: f64) -> usize {
        let mut e: Vec<(usize, f64)> = entries.iter().cloned().filter(|&(_, v)| v != 0.0).collect();
        e.sort_by_key(|&(j, _)| j);
        e.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let i = self.rows.len();
        let m = i;
        let mut w = vec![0.0; m];
        let mut act = 0.0;
        for &(j, v) in &e {
            assert!(j < self.n);
            self.cols[j].push((i, v));
            act += v * self.x[j];
            if self.pos[j] != NONBASIC {
                w[self.pos[j]] = v;
            }
        }
        let mut new_row = vec![0.0; m + 1];
        for (r, &wr) in w.iter().enumerate() {
            if wr != 0.0 {
                for (c, &b) in self.binv[r].iter().enumerate() {
                    new_row[c] += wr * b;
                }
            }
        }
        new_row[m] = -1.0;
        for row in &mut self.binv {
            row.push(0.0);
        }
        self.binv.push(new_row);
        self.rows.push(e);
        self.lo.push(lo);
        self.hi.push(hi);
        self.cost.push(0.0);
        self.x.push(act);
        self.d.push(0.0);
        self.pos.push(m);
        self.head.push(self.n + i);
        i
    }

    /// Structural values.
    pub fn solution(&self) -> &[f64] {
        &self.x[..self.n]
    }

    pub fn row_activity(&self, i: usize) -> f64 {
        self.x[self.n + i]
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    /// Row duals `y = c_B^T B^{-1}`.
    pub fn duals(&self) -> Vec<f64> {
        let m = self.rows.len();
        let mut y = vec![0.0; m];
        for (r, &v) in self.head.iter().enumerate() {
            let c = self.cost[v];
            if c != 0.0 {
                for (i, &b) in self.binv[r].iter().enumerate() {
                    y[i] += c * b;
                }
            }
        }
        y
    }

    /// Lagrangian lower bound from the current duals with signs clamped to
    /// what the row bounds admit. Valid for any basis, optimal or not.
    pub fn dual_bound(&self) -> f64 {
        let mut y = self.duals();
        let n = self.n;
        let mut bound = 0.0;
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.lo[n + i], self.hi[n + i]);
            if (*yi > 0.0 && !lo.is_finite()) || (*yi < 0.0 && !hi.is_finite()) {
                *yi = 0.0;
            }
            if *yi > 0.0 {
                bound += *yi * lo;
            } else if *yi < 0.0 {
                bound += *yi * hi;
            }
        }
        for j in 0..n {
            let dj = self.cost[j] - self.cols[j].iter().map(|&(i, v)| y[i] * v).sum::<f64>();
            bound += if dj >= 0.0 { dj * self.lo[j] } else { dj * self.hi[j] };
        }
        bound
    }

    fn infeasibility(&self, v: usize) -> f64 {
        let x = self.x[v];
        let below = self.lo[v] - x;
        let above = x - self.hi[v];
        let tol_lo = PRIMAL_TOL * (1.0 + self.lo[v].abs().min(1e12));
        let tol_hi = PRIMAL_TOL * (1.0 + self.hi[v].abs().min(1e12));
        if below > tol_lo {
            below
        } else if above > tol_hi {
            above
        } else {
            0.0
        }
    }

    fn alpha_row(&self, rho: &[f64], j: usize) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(i, v)| rho[i] * v).sum()
        } else {
            -rho[j - self.n]
        }
    }

    fn column(&self, q: usize) -> Vec<f64> {
        let m = self.rows.len();
        let mut a = vec![0.0; m];
        if q < self.n {
            for &(i, v) in &self.cols[q] {
                for r in 0..m {
                    a[r] += self.binv[r][i] * v;
                }
            }
        } else {
            let i = q - self.n;
            for r in 0..m {
                a[r] = -self.binv[r][i];
            }
        }
        a
    }

    /// Runs the dual simplex from the current basis.
    pub fn solve(&mut self) -> LpStatus {
        let m = self.rows.len();
        let limit = self.max_iterations.unwrap_or(50 * (m + self.n) + 1000);
        let mut used = 0;
        let mut best_obj = f64::NEG_INFINITY;
        let mut stall = 0;
        let mut retried = false;
        let mut alpha = vec![0.0; self.n + m];
        loop {
            if used >= limit {
                return LpStatus::IterationLimit;
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            let bland = stall >= STALL_SWITCH;
            let mut r = NONBASIC;
            let mut worst = 0.0;
            for (p, &v) in self.head.iter().enumerate() {
                let inf = self.infeasibility(v);
                if inf <= 0.0 {
                    continue;
                }
                let better = if bland { r == NONBASIC || v < self.head[r] } else { inf > worst };
                if better {
                    worst = inf;
                    r = p;
                }
            }
            if r == NONBASIC {
                return LpStatus::Optimal;
            }
            let p = self.head[r];
            let to_upper = self.x[p] > self.hi[p];
            let target = if to_upper { self.hi[p] } else { self.lo[p] };
            let rho = self.binv[r].clone();

            let total = self.n + self.rows.len();
            alpha.resize(total, 0.0);
            let mut theta_max = f64::INFINITY;
            for j in 0..total {
                if self.pos[j] != NONBASIC || self.lo[j] == self.hi[j] {
                    alpha[j] = 0.0;
                    continue;
                }
                let a = self.alpha_row(&rho, j);
                alpha[j] = a;
                if !self.eligible(j, a, to_upper) {
                    continue;
                }
                let t = (self.d[j].abs() + DUAL_TOL) / a.abs();
                if t < theta_max {
                    theta_max = t;
                }
            }
            let mut q = NONBASIC;
            let mut best = 0.0;
            for j in 0..total {
                let a = alpha[j];
                if a == 0.0 || self.pos[j] != NONBASIC || !self.eligible(j, a, to_upper) {
                    continue;
                }
                let ratio = self.d[j].abs() / a.abs();
                if bland {
                    if q == NONBASIC || ratio < best - 1e-12 {
                        q = j;
                        best = ratio;
                    }
                } else if ratio <= theta_max && a.abs() > best {
                    q = j;
                    best = a.abs();
                }
            }
            if q == NONBASIC {
                if !retried {
                    retried = true;
                    self.refactor();
                    continue;
                }
                return LpStatus::Infeasible;
            }
            retried = false;

            let col = self.column(q);
            let arq = col[r];
            if arq.abs() < PIVOT_TOL {
                // column and row disagree numerically; refresh and retry
                self.refactor();
                used += 1;
                continue;
            }
            let mut theta_d = self.d[q] / alpha[q];
            if (to_upper && theta_d < 0.0) || (!to_upper && theta_d > 0.0) {
                theta_d = 0.0;
            }
            let theta_p = (self.x[p] - target) / arq;
            for (i, &ci) in col.iter().enumerate() {
                if ci != 0.0 {
                    let v = self.head[i];
                    self.x[v] -= theta_p * ci;
                }
            }
            self.x[q] += theta_p;
            self.x[p] = target;
            for j in 0..total {
                if self.pos[j] == NONBASIC && alpha[j] != 0.0 {
                    self.d[j] -= theta_d * alpha[j];
                }
            }
            self.d[p] = -theta_d;
            self.d[q] = 0.0;
            self.head[r] = q;
            self.pos[q] = r;
            self.pos[p] = NONBASIC;

            let piv = &mut self.binv[r];
            for v in piv.iter_mut() {
                *v /= arq;
            }
            let pivot_row = self.binv[r].clone();
            for (i, &ci) in col.iter().enumerate() {
                if i != r && ci != 0.0 {
                    for (b, &pr) in self.binv[i].iter_mut().zip(&pivot_row) {
                        *b -= ci * pr;
                    }
                }
            }
            self.since_refactor += 1;
            self.iterations += 1;
            used += 1;

            let obj = self.objective();
            if obj > best_obj + 1e-12 * (1.0 + obj.abs()) {
                best_obj = obj;
                stall = 0;
            } else {
                stall += 1;
            }
        }
    }

    #[inline]
    fn eligible(&self, j: usize, a: f64, to_upper: bool) -> bool {
        let at_upper = self.x[j] == self.hi[j] && self.x[j] != self.lo[j];
        if a.abs() <= PIVOT_TOL {
            return false;
        }
        if to_upper {
            (!at_upper && a > 0.0) || (at_upper && a < 0.0)
        } else {
            (!at_upper && a < 0.0) || (at_upper && a > 0.0)
        }
    }

    /// Rebuilds the basis inverse from scratch, then basic values and reduced
    /// costs. Only the structural part of the basis needs a dense inverse.
    fn refactor(&mut self) {
        self.since_refactor = 0;
        let m = self.rows.len();
        let n = self.n;
        let mut t_rows = Vec::new();
        let mut t_index = vec![NONBASIC; m];
        for i in 0..m {
            if self.pos[n + i] == NONBASIC {
                t_index[i] = t_rows.len();
                t_rows.push(i);
            }
        }
        let k_cols: Vec<usize> = self.head.iter().cloned().filter(|&v| v < n).collect();
        let k = k_cols.len();
        let mut k_index = vec![NONBASIC; n];
        for (c, &j) in k_cols.iter().enumerate() {
            k_index[j] = c;
        }
        if k != t_rows.len() {
            self.reset_basis();
            return;
        }
        let mut a_tk = vec![vec![0.0; k]; k];
        for (c, &j) in k_cols.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                if t_index[i] != NONBASIC {
                    a_tk[t_index[i]][c] = v;
                }
            }
        }
        let inv = match invert(a_tk) {
            Some(inv) => inv,
            None => {
                self.reset_basis();
                return;
            }
        };
        for r in 0..m {
            let v = self.head[r];
            let row = &mut self.binv[r];
            row.iter_mut().for_each(|b| *b = 0.0);
            if v < n {
                let c = k_index[v];
                for t in 0..k {
                    row[t_rows[t]] = inv[c][t];
                }
            } else {
                let i = v - n;
                row[i] = -1.0;
                for &(j, a) in &self.rows[i] {
                    let c = k_index[j];
                    if c != NONBASIC {
                        for t in 0..k {
                            row[t_rows[t]] += a * inv[c][t];
                        }
                    }
                }
            }
        }
        self.recompute_primal();
        self.recompute_dual();
    }

    /// Falls back to the slack basis, which is always dual feasible.
    fn reset_basis(&mut self) {
        let m = self.rows.len();
        let n = self.n;
        for j in 0..n {
            self.pos[j] = NONBASIC;
            self.x[j] = if self.cost[j] >= 0.0 { self.lo[j] } else { self.hi[j] };
        }
        for i in 0..m {
            self.head[i] = n + i;
            self.pos[n + i] = i;
            for (c, b) in self.binv[i].iter_mut().enumerate() {
                *b = if c == i { -1.0 } else { 0.0 };
            }
        }
        self.recompute_primal();
        self.recompute_dual();
        self.since_refactor = 0;
    }

    fn recompute_primal(&mut self) {
        let m = self.rows.len();
        let n = self.n;
        let mut rhs = vec![0.0; m];
        for j in 0..n {
            if self.pos[j] == NONBASIC {
                let xj = self.x[j];
                for &(i, v) in &self.cols[j] {
                    rhs[i] -= v * xj;
                }
            }
        }
        for i in 0..m {
            if self.pos[n + i] == NONBASIC {
                rhs[i] += self.x[n + i];
            }
        }
        for r in 0..m {
            let v = self.head[r];
            self.x[v] = self.binv[r].iter().zip(&rhs).map(|(a, b)| a * b).sum();
        }
    }

    fn recompute_dual(&mut self) {
        let y = self.duals();
        let n = self.n;
        for j in 0..n {
            self.d[j] = if self.pos[j] == NONBASIC {
                self.cost[j] - self.cols[j].iter().map(|&(i, v)| y[i] * v).sum::<f64>()
            } else {
                0.0
            };
        }
        for (i, &yi) in y.iter().enumerate() {
            self.d[n + i] = if self.pos[n + i] == NONBASIC { yi } else { 0.0 };
        }
        // Drift can leave a structural column on the wrong side; flipping it
        // restores dual feasibility (slacks are left alone).
        let mut flipped = false;
        for j in 0..n {
            if self.pos[j] != NONBASIC || self.lo[j] == self.hi[j] {
                continue;
            }
            let at_upper = self.x[j] == self.hi[j];
            if !at_upper && self.d[j] < -DUAL_TOL {
                self.x[j] = self.hi[j];
                flipped = true;
            } else if at_upper && self.d[j] > DUAL_TOL {
                self.x[j] = self.lo[j];
                flipped = true;
            }
        }
        if flipped {
            self.recompute_primal();
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let k = a.len();
    let mut inv: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for c in 0..k {
        let mut p = c;
        for r in (c + 1)..k {
            if a[r][c].abs() > a[p][c].abs() {
                p = r;
            }
        }
        if a[p][c].abs() < 1e-13 {
            return None;
        }
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c];
        for v in a[c].iter_mut() {
            *v /= piv;
        }
        for v in inv[c].iter_mut() {
            *v /= piv;
        }
        let (ac, ic) = (a[c].clone(), inv[c].clone());
        for r in 0..k {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    for (x, y) in a[r].iter_mut().zip(&ac) {
                        *x -= f * y;
                    }
                    for (x, y) in inv[r].iter_mut().zip(&ic) {
                        *x -= f * y;
                    }
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    /// Brute force: enumerate every choice of `n` tight constraints among
    /// bounds and row sides, keep feasible vertices, return the best.
    fn vertex_oracle(cost: &[f64], lb: &[f64], ub: &[f64], rows: &[(Vec<f64>, f64, f64)]) -> Option<f64> {
        let n = cost.len();
        let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            cons.push((e.clone(), lb[j]));
            cons.push((e, ub[j]));
        }
        for (a, lo, hi) in rows {
            if lo.is_finite() {
                cons.push((a.clone(), *lo));
            }
            if hi.is_finite() {
                cons.push((a.clone(), *hi));
            }
        }
        let feasible = |x: &[f64]| {
            (0..n).all(|j| x[j] >= lb[j] - 1e-9 && x[j] <= ub[j] + 1e-9)
                && rows.iter().all(|(a, lo, hi)| {
                    let v: f64 = a.iter().zip(x).map(|(a, b)| a * b).sum();
                    v >= lo - 1e-9 && v <= hi + 1e-9
                })
        };
        let mut best: Option<f64> = None;
        let c = cons.len();
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let a: Vec<Vec<f64>> = idx.iter().map(|&i| cons[i].0.clone()).collect();
            if let Some(inv) = invert(a) {
                let b: Vec<f64> = idx.iter().map(|&i| cons[i].1).collect();
                let x: Vec<f64> = (0..n).map(|r| (0..n).map(|t| inv[r][t] * b[t]).sum()).collect();
                if feasible(&x) {
                    let v: f64 = cost.iter().zip(&x).map(|(a, b)| a * b).sum();
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
            // next combination
            let mut k = n;
            loop {
                if k == 0 {
                    return best;
                }
                k -= 1;
                if idx[k] < c - n + k {
                    idx[k] += 1;
                    for t in (k + 1)..n {
                        idx[t] = idx[t - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    fn build(cost: &[f64], lb: &[f64], ub: &[f64], rows: &[(Vec<f64>, f64, f64)]) -> Lp {
        let mut lp = Lp::new(cost.to_vec(), lb.to_vec(), ub.to_vec());
        for (a, lo, hi) in rows {
            let e: Vec<(usize, f64)> = a.iter().cloned().enumerate().collect();
            lp.add_row(&e, *lo, *hi);
        }
        lp
    }

    #[test]
    fn bounds_only() {
        let mut lp = Lp::new(vec![1.0, -2.0], vec![-1.0, 0.0], vec![1.0, 3.0]);
        assert_eq!(lp.solve(), LpStatus::Optimal);
        assert_eq!(lp.solution(), &[-1.0, 3.0]);
        assert_eq!(lp.objective(), -7.0);
    }

    #[test]
    fn small_textbook_lp() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6 on [0,10]^2 -> (1.6, 1.2)
        let rows = vec![(vec![1.0, 2.0], f64::NEG_INFINITY, 4.0), (vec![3.0, 1.0], f64::NEG_INFINITY, 6.0)];
        let mut lp = build(&[-1.0, -1.0], &[0.0, 0.0], &[10.0, 10.0], &rows);
        assert_eq!(lp.solve(), LpStatus::Optimal);
        let x = lp.solution();
        assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
        assert!((lp.dual_bound() - lp.objective()).abs() < 1e-12);
    }

    #[test]
    fn equality_rows_and_warm_rows() {
        // simplex row x0+x1+x2 = 1, minimize x0 - x1 + 0.5 x2
        let rows = vec![(vec![1.0, 1.0, 1.0], 1.0, 1.0)];
        let mut lp = build(&[1.0, -1.0, 0.5], &[0.0; 3], &[1.0; 3], &rows);
        assert_eq!(lp.solve(), LpStatus::Optimal);
        assert!((lp.objective() + 1.0).abs() < 1e-12);
        // cut x1 <= 0.25 forces mass to x2
        lp.add_row(&[(1, 1.0)], f64::NEG_INFINITY, 0.25);
        assert_eq!(lp.solve(), LpStatus::Optimal);
        assert!((lp.objective() - (-0.25 + 0.375)).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        let rows = vec![(vec![1.0, 1.0], 3.0, f64::INFINITY)];
        let mut lp = build(&[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0], &rows);
        assert_eq!(lp.solve(), LpStatus::Infeasible);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's cycling example, bounded
        let rows = vec![
            (vec![0.25, -60.0, -0.04, 9.0], f64::NEG_INFINITY, 0.0),
            (vec![0.5, -90.0, -0.02, 3.0], f64::NEG_INFINITY, 0.0),
            (vec![0.0, 0.0, 1.0, 0.0], f64::NEG_INFINITY, 1.0),
        ];
        let cost = [-0.75, 150.0, -0.02, 6.0];
        let (lb, ub) = ([0.0; 4], [100.0; 4]);
        let mut lp = build(&cost, &lb, &ub, &rows);
        assert_eq!(lp.solve(), LpStatus::Optimal);
        let oracle = vertex_oracle(&cost, &lb, &ub, &rows).unwrap();
        assert!((lp.objective() - oracle).abs() < 1e-8, "{} vs {}", lp.objective(), oracle);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn matches_vertex_enumeration(
            cost in proptest::collection::vec(-3i32..=3, 3),
            coefs in proptest::collection::vec(-3i32..=3, 12),
            rhs in proptest::collection::vec(-2i32..=4, 4),
            kinds in proptest::collection::vec(0u8..3, 4),
            add_late in 0usize..4,
        ) {
            let cost: Vec<f64> = cost.into_iter().map(f64::from).collect();
            let lb = [-1.0, 0.0, -2.0];
            let ub = [2.0, 1.5, 1.0];
            let rows: Vec<(Vec<f64>, f64, f64)> = (0..4).map(|r| {
                let a: Vec<f64> = coefs[3 * r..3 * r + 3].iter().map(|&v| f64::from(v)).collect();
                let b = f64::from(rhs[r]);
                match kinds[r] {
                    0 => (a, f64::NEG_INFINITY, b),
                    1 => (a, b - 1.0, f64::INFINITY),
                    _ => (a, b - 2.0, b),
                }
            }).collect();
            let oracle = vertex_oracle(&cost, &lb, &ub, &rows);
            let mut lp = build(&cost, &lb, &ub, &rows[..add_late]);
            let _ = lp.solve();
            for (a, lo, hi) in &rows[add_late..] {
                let e: Vec<(usize, f64)> = a.iter().cloned().enumerate().collect();
                lp.add_row(&e, *lo, *hi);
            }
            let status = lp.solve();
            match oracle {
                None => prop_assert_eq!(status, LpStatus::Infeasible),
                Some(v) => {
                    prop_assert_eq!(status, LpStatus::Optimal);
                    prop_assert!((lp.objective() - v).abs() < 1e-7, "{} vs {}", lp.objective(), v);
                    prop_assert!(lp.dual_bound() <= v + 1e-7);
                    prop_assert!((lp.dual_bound() - v).abs() < 1e-7);
                }
            }
        }
    }
}
