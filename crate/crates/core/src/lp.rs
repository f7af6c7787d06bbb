//! Dense primal simplex for `min Σ_{k ∉ free} |a_k|  s.t.  A a = y`.
//!
//! Each variable is split as `a = a⁺ − a⁻` with `a± ≥ 0`; free columns get
//! zero cost on both halves. Phase 1 starts from an all-artificial basis.
//! Pricing is Dantzig's rule (most negative reduced cost) and falls back to
//! Bland's lowest-index rule for good after a run of degenerate pivots.
//! Ratio-test ties are broken lexicographically on the rows of `B⁻¹` scaled
//! by the pivot column, then by lowest basis index, so degenerate stalls are
//! avoided and the result is deterministic. When the optimum is not unique,
//! which vertex comes back depends on the column order.

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::scalar::{max_abs, Real};

/// Basis refactorization period, in pivots.
pub const REFACTOR_EVERY: usize = 50;

/// Consecutive degenerate pivots after which pricing switches to Bland's
/// rule for the rest of the phase.
pub const BLAND_AFTER: usize = 20;

#[derive(Clone, Debug)]
pub struct L1Problem<T> {
    a: Matrix<T>,
    y: Vec<T>,
    free: Vec<bool>,
}

impl<T: Real> L1Problem<T> {
    pub fn new(a: Matrix<T>, y: Vec<T>, free_cols: &[usize]) -> Result<Self> {
        if y.len() != a.rows() {
            return Err(Error::DimensionMismatch { expected: a.rows(), got: y.len() });
        }
        if a.as_slice().iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite LP data".into()));
        }
        let mut free = vec![false; a.cols()];
        for &k in free_cols {
            if k >= a.cols() {
                return Err(Error::InvalidParameter(format!("free column {k} out of range")));
            }
            free[k] = true;
        }
        Ok(Self { a, y, free })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn rhs(&self) -> &[T] {
        &self.y
    }

    pub fn is_free(&self, k: usize) -> bool {
        self.free[k]
    }

    /// Residual tolerance: `1e-9`, scaled by `‖y‖_∞` when that exceeds one.
    pub fn default_tol(&self) -> T {
        T::lit(1e-9) * max_abs(&self.y).max(T::one())
    }

    /// `Σ_{k ∉ free} |a_k|`.
    pub fn objective_of(&self, a: &[T]) -> T {
        a.iter()
            .zip(&self.free)
            .filter(|(_, f)| !**f)
            .map(|(v, _)| v.abs())
            .fold(T::zero(), |s, v| s + v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct L1Solution<T> {
    pub a: Vec<T>,
    /// Dual vector `p` (Lagrange multipliers of `A a = y`).
    pub dual: Vec<T>,
    pub objective: T,
    pub status: LpStatus,
    pub iterations: usize,
}

impl<T: Real> L1Solution<T> {
    pub fn into_optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::Infeasible(self.objective.to_f64_lossy())),
            LpStatus::Unbounded => Err(Error::Unbounded),
        }
    }

    /// Indices with `|a_k| > thr`.
    pub fn support(&self, thr: T) -> Vec<usize> {
        (0..self.a.len()).filter(|&k| self.a[k].abs() > thr).collect()
    }
}

/// Certificate residuals of an optimal solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals<T> {
    /// `‖A a − y‖_∞`
    pub feas_inf: T,
    /// `max(0, max_{costed k} |(Aᵀp)_k| − 1)`, also covering `|(Aᵀp)_k|` on free columns.
    pub dual_inf: T,
    /// `|objective − ⟨p, y⟩|`
    pub gap: T,
}

pub fn dual_residuals<T: Real>(prob: &L1Problem<T>, sol: &L1Solution<T>) -> Residuals<T> {
    let ax = prob.a.matvec(&sol.a);
    let feas_inf = ax.iter().zip(&prob.y).fold(T::zero(), |m, (p, q)| m.max((*p - *q).abs()));
    let atp = prob.a.t_matvec(&sol.dual);
    let mut dual_inf = T::zero();
    for (k, v) in atp.iter().enumerate() {
        let viol = if prob.free[k] { v.abs() } else { v.abs() - T::one() };
        dual_inf = dual_inf.max(viol);
    }
    let py: T = sol.dual.iter().zip(&prob.y).map(|(p, y)| *p * *y).sum();
    Residuals { feas_inf, dual_inf, gap: (sol.objective - py).abs() }
}

#[derive(Clone, Copy, Debug)]
pub struct LpOptions<T> {
    /// Phase-1 infeasibility threshold.
    pub feas_tol: T,
    /// Reduced-cost threshold for entering.
    pub opt_tol: T,
    /// Minimum pivot magnitude in the ratio test.
    pub pivot_tol: T,
    pub max_iter: usize,
}

impl<T: Real> LpOptions<T> {
    pub fn for_problem(prob: &L1Problem<T>, tol: T) -> Self {
        Self {
            feas_tol: tol,
            opt_tol: T::lit(1e-11),
            pivot_tol: T::lit(1e-9),
            max_iter: 200_000 + 50 * prob.a.cols(),
        }
    }
}

/// Solves with [`LpOptions::for_problem`].
pub fn solve_min_l1<T: Real>(prob: &L1Problem<T>, tol: T) -> Result<L1Solution<T>> {
    if tol <= T::zero() {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    solve_with(prob, &LpOptions::for_problem(prob, tol))
}

pub fn solve_with<T: Real>(prob: &L1Problem<T>, opts: &LpOptions<T>) -> Result<L1Solution<T>> {
    let (m, n) = (prob.a.rows(), prob.a.cols());
    if max_abs(&prob.y) == T::zero() {
        return Ok(L1Solution {
            a: vec![T::zero(); n],
            dual: vec![T::zero(); m],
            objective: T::zero(),
            status: LpStatus::Optimal,
            iterations: 0,
        });
    }
    let mut tab = Simplex::new(prob, opts);
    tab.run(Phase::One)?;
    let infeas = tab.artificial_mass();
    if infeas > opts.feas_tol {
        return Ok(L1Solution {
            a: vec![T::zero(); n],
            dual: vec![T::zero(); m],
            objective: infeas,
            status: LpStatus::Infeasible,
            iterations: tab.iterations,
        });
    }
    tab.drive_out_artificials();
    let status = tab.run(Phase::Two)?;
    tab.refactor();
    let (a, dual) = tab.extract();
    let objective = prob.objective_of(&a);
    Ok(L1Solution { a, dual, objective, status, iterations: tab.iterations })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

/// Revised simplex state over `2n` split structurals followed by `m`
/// artificials. Rows are sign-flipped so that the right-hand side is
/// nonnegative.
struct Simplex<'a, T> {
    prob: &'a L1Problem<T>,
    opts: &'a LpOptions<T>,
    m: usize,
    n: usize,
    row_sign: Vec<T>,
    b: Vec<T>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Matrix<T>,
    xb: Vec<T>,
    iterations: usize,
    since_refactor: usize,
}

impl<'a, T: Real> Simplex<'a, T> {
    fn new(prob: &'a L1Problem<T>, opts: &'a LpOptions<T>) -> Self {
        let (m, n) = (prob.a.rows(), prob.a.cols());
        let row_sign: Vec<T> = prob.y.iter().map(|v| if *v < T::zero() { -T::one() } else { T::one() }).collect();
        let b: Vec<T> = prob.y.iter().map(|v| v.abs()).collect();
        let basis: Vec<usize> = (0..m).map(|i| 2 * n + i).collect();
        let mut is_basic = vec![false; 2 * n + m];
        for &j in &basis {
            is_basic[j] = true;
        }
        Self {
            prob,
            opts,
            m,
            n,
            row_sign,
            xb: b.clone(),
            b,
            basis,
            is_basic,
            binv: Matrix::identity(m),
            iterations: 0,
            since_refactor: 0,
        }
    }

    #[inline]
    fn is_artificial(&self, j: usize) -> bool {
        j >= 2 * self.n
    }

    fn column(&self, j: usize) -> Vec<T> {
        if self.is_artificial(j) {
            let mut e = vec![T::zero(); self.m];
            e[j - 2 * self.n] = T::one();
            return e;
        }
        let (k, s) = if j < self.n { (j, T::one()) } else { (j - self.n, -T::one()) };
        (0..self.m).map(|i| self.row_sign[i] * self.prob.a[(i, k)] * s).collect()
    }

    fn cost(&self, j: usize, phase: Phase) -> T {
        match phase {
            Phase::One => {
                if self.is_artificial(j) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Phase::Two => {
                if self.is_artificial(j) {
                    T::zero()
                } else {
                    let k = if j < self.n { j } else { j - self.n };
                    if self.prob.free[k] {
                        T::zero()
                    } else {
                        T::one()
                    }
                }
            }
        }
    }

    /// Simplex multipliers `π = B^{-T} c_B` (in flipped-row space).
    fn multipliers(&self, phase: Phase) -> Vec<T> {
        let cb: Vec<T> = self.basis.iter().map(|&j| self.cost(j, phase)).collect();
        self.binv.t_matvec(&cb)
    }

    /// Entering structural: most negative reduced cost (lowest index on ties),
    /// or under `bland` the lowest index with negative reduced cost, every
    /// `a⁺` half preceding every `a⁻` half. Artificials never re-enter.
    fn entering(&self, phase: Phase, pi: &[T], bland: bool, rejected: &[bool]) -> Option<usize> {
        let n = self.n;
        let mut best: Option<(usize, T)> = None;
        let mut first_minus: Option<usize> = None;
        for k in 0..n {
            if self.is_basic[k] && self.is_basic[k + n] {
                continue;
            }
            // π·Ā_k serves both halves.
            let mut dotp = T::zero();
            let mut mag = T::one();
            for i in 0..self.m {
                let v = pi[i] * self.row_sign[i] * self.prob.a[(i, k)];
                dotp = dotp + v;
                mag = mag + v.abs();
            }
            // Relative threshold: rounding in π grows with the basis condition number.
            let thresh = -self.opts.opt_tol * mag;
            for (j, d) in [(k, self.cost(k, phase) - dotp), (k + n, self.cost(k + n, phase) + dotp)] {
                if self.is_basic[j] || rejected[j] || d >= thresh {
                    continue;
                }
                if bland {
                    if j < n {
                        return Some(j);
                    }
                    first_minus.get_or_insert(j);
                } else if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        if bland {
            first_minus
        } else {
            best.map(|(j, _)| j)
        }
    }

    fn run(&mut self, phase: Phase) -> Result<LpStatus> {
        let mut rejected = vec![false; 2 * self.n];
        let mut degenerate_streak = 0;
        loop {
            if self.iterations >= self.opts.max_iter {
                return Err(Error::IterationLimit(self.opts.max_iter));
            }
            let pi = self.multipliers(phase);
            let bland = degenerate_streak >= BLAND_AFTER;
            let Some(enter) = self.entering(phase, &pi, bland, &rejected) else {
                return Ok(LpStatus::Optimal);
            };
            let u = self.binv.matvec(&self.column(enter));
            let Some(row) = self.leaving(&u) else {
                // Phase 1 is bounded; a column without a usable pivot is
                // numerically parallel to the basis and is skipped.
                if phase == Phase::Two && u.iter().all(|v| *v <= T::zero()) {
                    return Ok(LpStatus::Unbounded);
                }
                rejected[enter] = true;
                continue;
            };
            if self.xb[row] <= self.opts.pivot_tol * u[row] {
                degenerate_streak += 1;
            } else if !bland {
                degenerate_streak = 0;
            }
            self.pivot(row, enter, &u);
            rejected.iter_mut().for_each(|r| *r = false);
        }
    }

    /// Minimum-ratio row. Ties are broken lexicographically on the rows of
    /// `B⁻¹ / u_r` (the symbolic-perturbation rule), then by the lowest basic
    /// variable index.
    fn leaving(&self, u: &[T]) -> Option<usize> {
        let tie = T::lit(1e-12);
        let rows: Vec<usize> = (0..self.m).filter(|&r| u[r] > self.opts.pivot_tol).collect();
        let ratio = |r: usize| self.xb[r].max(T::zero()) / u[r];
        let min = rows.iter().map(|&r| ratio(r)).fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.min(v))))?;
        let mut best: Option<usize> = None;
        for &r in rows.iter().filter(|&&r| ratio(r) <= min + tie) {
            best = Some(match best {
                None => r,
                Some(br) => {
                    if self.lex_less(r, br, u) {
                        r
                    } else {
                        br
                    }
                }
            });
        }
        best
    }

    fn lex_less(&self, r: usize, s: usize, u: &[T]) -> bool {
        let tie = T::lit(1e-12);
        for j in 0..self.m {
            let a = self.binv[(r, j)] / u[r];
            let b = self.binv[(s, j)] / u[s];
            if a < b - tie {
                return true;
            }
            if a > b + tie {
                return false;
            }
        }
        self.basis[r] < self.basis[s]
    }

    fn pivot(&mut self, row: usize, enter: usize, u: &[T]) {
        let m = self.m;
        let piv = u[row];
        for j in 0..m {
            self.binv[(row, j)] = self.binv[(row, j)] / piv;
        }
        self.xb[row] = self.xb[row] / piv;
        for r in 0..m {
            if r != row && u[r] != T::zero() {
                let f = u[r];
                for j in 0..m {
                    self.binv[(r, j)] = self.binv[(r, j)] - f * self.binv[(row, j)];
                }
                self.xb[r] = self.xb[r] - f * self.xb[row];
            }
        }
        self.is_basic[self.basis[row]] = false;
        self.is_basic[enter] = true;
        self.basis[row] = enter;
        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
    }

    fn refactor(&mut self) {
        self.since_refactor = 0;
        let cols: Vec<Vec<T>> = self.basis.iter().map(|&j| self.column(j)).collect();
        let bmat = Matrix::from_columns(self.m, &cols);
        if let Some(lu) = Lu::factorize(&bmat, T::epsilon()) {
            self.binv = lu.inverse();
            self.xb = lu.solve(&self.b);
        }
    }

    fn artificial_mass(&self) -> T {
        self.basis
            .iter()
            .zip(&self.xb)
            .filter(|(j, _)| self.is_artificial(**j))
            .map(|(_, x)| x.max(T::zero()))
            .sum()
    }

    /// Pivots zero-level artificials out of the basis where some structural
    /// column has a usable entry in their row; the rest sit on redundant rows.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let binv_row: Vec<T> = self.binv.row(r).to_vec();
            let mut chosen = None;
            for j in 0..2 * self.n {
                if self.is_basic[j] {
                    continue;
                }
                let col = self.column(j);
                let entry: T = binv_row.iter().zip(&col).map(|(a, b)| *a * *b).sum();
                if entry.abs() > self.opts.pivot_tol {
                    chosen = Some(j);
                    break;
                }
            }
            if let Some(j) = chosen {
                let u = self.binv.matvec(&self.column(j));
                self.pivot(r, j, &u);
            }
        }
        self.refactor();
    }

    fn extract(&self) -> (Vec<T>, Vec<T>) {
        let n = self.n;
        let mut a = vec![T::zero(); n];
        for (r, &j) in self.basis.iter().enumerate() {
            let v = self.xb[r].max(T::zero());
            if j < n {
                a[j] = a[j] + v;
            } else if j < 2 * n {
                a[j - n] = a[j - n] - v;
            }
        }
        let pi = self.multipliers(Phase::Two);
        let dual = pi.iter().zip(&self.row_sign).map(|(p, s)| *p * *s).collect();
        (a, dual)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_constraints() {
        let prob = L1Problem::new(Matrix::<f64>::identity(2), vec![3.0, -4.0], &[]).unwrap();
        let sol = solve_min_l1(&prob, 1e-9).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.a, vec![3.0, -4.0]);
        assert_eq!(sol.objective, 7.0);
        assert_eq!(sol.dual, vec![1.0, -1.0]);
        let r = dual_residuals(&prob, &sol);
        assert_eq!((r.feas_inf, r.dual_inf, r.gap), (0.0, 0.0, 0.0));

        let mut doubled = sol.clone();
        doubled.dual.iter_mut().for_each(|p| *p *= 2.0);
        let r = dual_residuals(&prob, &doubled);
        assert_eq!(r.dual_inf, 1.0);
    }

    #[test]
    fn degenerate_single_row_picks_lowest_index() {
        let prob = L1Problem::new(Matrix::<f64>::from_rows(&[vec![1.0, 1.0]]), vec![1.0], &[]).unwrap();
        let sol = solve_min_l1(&prob, 1e-9).unwrap();
        assert_eq!(sol.objective, 1.0);
        assert_eq!(sol.a, vec![1.0, 0.0]);
    }

    #[test]
    fn infeasible_is_reported() {
        let a = Matrix::<f64>::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let prob = L1Problem::new(a, vec![1.0, 1.0], &[]).unwrap();
        let sol = solve_min_l1(&prob, 1e-9).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert!(matches!(sol.into_optimal(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn free_columns_carry_no_cost() {
        // a_0 free: y = (2) is met entirely by the free column.
        let a = Matrix::<f64>::from_rows(&[vec![1.0, 1.0]]);
        let prob = L1Problem::new(a, vec![2.0], &[0]).unwrap();
        let sol = solve_min_l1(&prob, 1e-9).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.a, vec![2.0, 0.0]);
        let r = dual_residuals(&prob, &sol);
        assert!(r.dual_inf <= 1e-12 && r.gap <= 1e-12);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let a = Matrix::<f64>::from_rows(&[vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let prob = L1Problem::new(a, vec![2.0, 4.0, -1.0], &[]).unwrap();
        let sol = solve_min_l1(&prob, 1e-9).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-12);
        let r = dual_residuals(&prob, &sol);
        assert!(r.feas_inf < 1e-12 && r.dual_inf < 1e-12 && r.gap < 1e-12);
    }

    #[test]
    fn zero_rhs_returns_zero_dual() {
        let prob = L1Problem::new(Matrix::<f64>::identity(3), vec![0.0; 3], &[]).unwrap();
        let sol = solve_min_l1(&prob, 1e-9).unwrap();
        assert_eq!(sol.dual, vec![0.0; 3]);
        assert_eq!(sol.objective, 0.0);
    }
}
