//! Polynomial splines with sparse knots: minimize the total variation of
//! `Dⁿu` subject to point evaluations, over a uniform grid of candidate
//! knots, with an unpenalized polynomial part of degree below `n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_svd, Matrix};
use crate::lp::{solve_min_l1, L1Problem};
use crate::scalar::{max_abs, Real};
use crate::sparsify::prune_columns;

/// Default number of candidate knots.
pub const DEFAULT_KNOT_GRID: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Knot<T> {
    pub x: T,
    pub a: T,
}

/// `u(x) = Σ a_k (x − x_k)₊ⁿ / n! + P(x)` with `P(x) = Σ_j poly_j x^j`, `j < n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SplineModel<T> {
    pub order: usize,
    pub knots: Vec<Knot<T>>,
    pub poly: Vec<T>,
}

impl<T: Real> SplineModel<T> {
    pub fn new(order: usize, knots: Vec<Knot<T>>, poly: Vec<T>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("spline order must be at least 1".into()));
        }
        if poly.len() != order {
            return Err(Error::DimensionMismatch { expected: order, got: poly.len() });
        }
        Ok(Self { order, knots, poly })
    }

    pub fn eval(&self, x: T) -> T {
        let knots: T = self.knots.iter().map(|k| k.a * truncated_power(x - k.x, self.order)).sum();
        knots + self.poly.iter().rev().fold(T::zero(), |acc, c| acc * x + *c)
    }

    /// Total variation of the `n`-th distributional derivative, `Σ |a_k|`.
    pub fn tv(&self) -> T {
        self.knots.iter().map(|k| k.a.abs()).fold(T::zero(), |s, v| s + v)
    }
}

pub fn eval_spline<T: Real>(model: &SplineModel<T>, x: T) -> T {
    model.eval(x)
}

/// `(x)₊ⁿ / n!`
pub fn truncated_power<T: Real>(x: T, n: usize) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    (1..=n).fold(T::one(), |acc, k| acc * x / T::from_usize_lossy(k))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Sample<T> {
    pub s: T,
    pub y: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SplineProblem<T> {
    pub order: usize,
    pub samples: Vec<Sample<T>>,
    /// Candidate knots are `k / knot_grid` for `k = 0..knot_grid`.
    pub knot_grid: usize,
}

impl<T: Real> SplineProblem<T> {
    pub fn new(order: usize, samples: Vec<Sample<T>>, knot_grid: usize) -> Result<Self> {
        let prob = Self { order, samples, knot_grid };
        prob.validate()?;
        Ok(prob)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidParameter("spline order must be at least 1".into()));
        }
        if self.knot_grid == 0 || self.samples.is_empty() {
            return Err(Error::InvalidParameter("need at least one sample and one knot".into()));
        }
        for (i, p) in self.samples.iter().enumerate() {
            if !(p.s >= T::zero() && p.s <= T::one()) || !p.y.is_finite() {
                return Err(Error::InvalidParameter(format!("sample {i} must lie in [0, 1] with a finite value")));
            }
            if self.samples[..i].iter().any(|q| q.s == p.s) {
                return Err(Error::InvalidParameter(format!("sample position {} repeated", p.s)));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.samples.len()
    }

    pub fn knot(&self, k: usize) -> T {
        T::from_usize_lossy(k) / T::from_usize_lossy(self.knot_grid)
    }

    /// Monomials `s_i^j`, `j < n`.
    pub fn poly_block(&self) -> Matrix<T> {
        Matrix::from_fn(self.m(), self.order, |i, j| self.samples[i].s.powi(j as i32))
    }

    /// Rank of the polynomial block, i.e. the dimension of the evaluated kernel of `Dⁿ`.
    pub fn poly_rank(&self) -> usize {
        jacobi_svd(&self.poly_block()).rank(T::lit(1e-10))
    }

    fn knot_block(&self) -> Matrix<T> {
        Matrix::from_fn(self.m(), self.knot_grid, |i, k| truncated_power(self.samples[i].s - self.knot(k), self.order))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SplineSolution<T> {
    pub model: SplineModel<T>,
    pub objective: T,
    /// Rank `d` of the polynomial block; the knot count is at most `m − d`.
    pub poly_rank: usize,
}

fn y_scale<T: Real>(prob: &SplineProblem<T>) -> Vec<T> {
    prob.samples.iter().map(|p| p.y).chain(std::iter::once(T::one())).collect()
}

pub fn solve_spline<T: Real>(prob: &SplineProblem<T>) -> Result<SplineSolution<T>> {
    prob.validate()?;
    let (m, n, grid) = (prob.m(), prob.order, prob.knot_grid);
    let knots = prob.knot_block();
    let poly = prob.poly_block();
    let mut a = Matrix::zeros(m, grid + n);
    for i in 0..m {
        for k in 0..grid {
            a[(i, k)] = knots[(i, k)];
        }
        for j in 0..n {
            a[(i, grid + j)] = poly[(i, j)];
        }
    }
    let y: Vec<T> = prob.samples.iter().map(|p| p.y).collect();
    let free: Vec<usize> = (grid..grid + n).collect();
    let tol = T::lit(1e-10) * max_abs(&y_scale(prob));
    let lp = L1Problem::new(a, y, &free)?;
    let sol = solve_min_l1(&lp, tol)?.into_optimal()?;

    // Knots whose whole contribution sits below rounding are simplex noise.
    let noise = T::lit(1e-12) * max_abs(&y_scale(prob));
    let mut amps: Vec<T> = sol.a[..grid].to_vec();
    for (k, a) in amps.iter_mut().enumerate() {
        if a.abs() * max_abs(&knots.column(k)) <= noise {
            *a = T::zero();
        }
    }
    // A vertex may leave polynomial coefficients nonbasic; prune against the
    // full polynomial block to reach the m − d bound.
    let free_cols: Vec<Vec<T>> = (0..n).map(|j| poly.column(j)).collect();
    let (kept, amps, poly_coef, _) = prune_columns(&knots, &amps, &free_cols, &sol.a[grid..])?;
    let model = SplineModel {
        order: n,
        knots: kept.iter().zip(amps).map(|(&k, a)| Knot { x: prob.knot(k), a }).collect(),
        poly: poly_coef,
    };
    Ok(SplineSolution { objective: model.tv(), model, poly_rank: prob.poly_rank() })
}
