//! Seeded random instances for tests, benchmarks and the experiment commands.
//!
//! All generators draw from SplitMix64 so fixtures are reproducible across
//! platforms. Independent trials use the seed `seed ^ trial`.

use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::linalg::Matrix;
use crate::measures::{Atom, AtomicMeasure, TorusPoint, TrigPolynomial, TrigSystem};
use crate::sparsify::{FeatureInstance, PsdInstance};
use crate::spline::{Sample, SplineProblem};

pub type Rng = SplitMix64;

pub fn rng(seed: u64) -> Rng {
    SplitMix64::seed_from_u64(seed)
}

/// Seed of trial `trial` in a run seeded with `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed ^ trial
}

pub fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn sign(rng: &mut Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// `r` atoms at uniform positions with amplitudes `±U[0.5, 2]`.
pub fn signed_measure(rng: &mut Rng, r: usize) -> AtomicMeasure<f64> {
    AtomicMeasure::new(
        (0..r)
            .map(|_| {
                let x = rng.random::<f64>();
                let a = sign(rng) * uniform(rng, 0.5, 2.0);
                Atom::new(x, a)
            })
            .collect(),
    )
}

/// `r` uniformly placed positions with pairwise torus distance at least `sep`.
///
/// Draws `r` points on `[0, 1 − r·sep)`, sorts them, spreads the `i`-th by
/// `i·sep` and rotates the whole configuration at random.
pub fn separated_positions(rng: &mut Rng, r: usize, sep: f64) -> Vec<f64> {
    assert!(r as f64 * sep < 1.0, "cannot place {r} points {sep} apart on the torus");
    let span = 1.0 - r as f64 * sep;
    let mut u: Vec<f64> = (0..r).map(|_| rng.random::<f64>() * span).collect();
    u.sort_by(f64::total_cmp);
    let shift = rng.random::<f64>();
    u.iter().enumerate().map(|(i, v)| TorusPoint::new(v + i as f64 * sep + shift).value()).collect()
}

/// Nonnegative measure with `r` atoms separated by `0.5 / f_c` and
/// amplitudes in `[0.5, 2]`.
pub fn separated_nonneg_measure(rng: &mut Rng, f_c: usize, r: usize) -> AtomicMeasure<f64> {
    let xs = separated_positions(rng, r, 0.5 / f_c as f64);
    AtomicMeasure::new(xs.into_iter().map(|x| Atom::new(x, uniform(rng, 0.5, 2.0))).collect())
}

/// Nonnegative measure with total mass 1.
pub fn probability_measure(rng: &mut Rng, r: usize) -> AtomicMeasure<f64> {
    let w: Vec<f64> = (0..r).map(|_| uniform(rng, 0.05, 1.0)).collect();
    let total: f64 = w.iter().sum();
    AtomicMeasure::new(w.into_iter().map(|a| Atom::new(rng.random::<f64>(), a / total)).collect())
}

pub fn trig_polynomial(rng: &mut Rng, sys: TrigSystem) -> TrigPolynomial<f64> {
    let p = (0..sys.m()).map(|_| uniform(rng, -1.0, 1.0)).collect();
    TrigPolynomial::new(sys, p).expect("length matches the system")
}

pub fn uniform_matrix(rng: &mut Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| uniform(rng, -1.0, 1.0))
}

/// `m × r` uniform features with signed amplitudes and the matching target.
pub fn feature_instance(rng: &mut Rng, m: usize, r: usize) -> FeatureInstance<f64> {
    let features = uniform_matrix(rng, m, r);
    let amplitudes = (0..r).map(|_| sign(rng) * uniform(rng, 0.1, 2.0)).collect();
    FeatureInstance::from_atoms(features, amplitudes).expect("dimensions agree")
}

pub fn symmetric_matrix(rng: &mut Rng, n: usize) -> Matrix<f64> {
    uniform_matrix(rng, n, n).symmetrize()
}

/// Full-rank `Q = G Gᵀ / n` with `m` random symmetric constraints it satisfies.
pub fn psd_instance(rng: &mut Rng, n: usize, m: usize) -> PsdInstance<f64> {
    let g = uniform_matrix(rng, n, n);
    let q = g.matmul(&g.transpose()).scale(1.0 / n as f64).symmetrize();
    let constraints = (0..m).map(|_| symmetric_matrix(rng, n)).collect();
    PsdInstance::from_solution(q, constraints)
}

/// Order-`n` spline problem with `m` distinct sorted samples and targets in `[−1, 1]`.
pub fn spline_problem(rng: &mut Rng, order: usize, m: usize, knot_grid: usize) -> SplineProblem<f64> {
    let xs = separated_positions(rng, m, 0.25 / m as f64);
    let mut xs: Vec<f64> = xs.into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
    xs.sort_by(f64::total_cmp);
    let samples = xs.into_iter().map(|s| Sample { s, y: uniform(rng, -1.0, 1.0) }).collect();
    SplineProblem::new(order, samples, knot_grid).expect("samples are distinct and inside [0, 1]")
}
