//! Dual certificates: rigorous sup-norm bounds for trigonometric
//! polynomials and the primal–dual extremality checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{AtomicMeasure, MomentVector, TorusPoint, TrigPolynomial};
use crate::scalar::Real;

/// Samples per unit of the cutoff used when no explicit grid is requested.
pub const DEFAULT_CHECK_PER_FC: usize = 4096;

pub fn default_n_check(f_c: usize) -> usize {
    DEFAULT_CHECK_PER_FC * f_c
}

/// Highest frequency with a nonzero coefficient.
pub fn effective_degree<T: Real>(eta: &TrigPolynomial<T>) -> usize {
    let p = eta.coefficients();
    (1..=eta.system().f_c())
        .rev()
        .find(|&j| p[2 * j - 1] != T::zero() || p[2 * j] != T::zero())
        .unwrap_or(0)
}

/// `max_i |η(i / n)|`.
pub fn sampled_sup<T: Real>(eta: &TrigPolynomial<T>, n: usize) -> T {
    let nf = T::from_usize_lossy(n);
    (0..n)
        .map(|i| eta.eval(TorusPoint::new(T::from_usize_lossy(i) / nf)).abs())
        .fold(T::zero(), T::max)
}

/// First-order bound `M / (1 − π d / N)` from `‖η′‖_∞ ≤ 2πd‖η‖_∞`.
pub fn bernstein_sup_bound<T: Real>(eta: &TrigPolynomial<T>, n_check: usize) -> Result<T> {
    let d = effective_degree(eta);
    let f_c = T::from_usize_lossy(eta.system().f_c());
    let nf = T::from_usize_lossy(n_check);
    if nf <= T::PI() * f_c {
        return Err(Error::InvalidParameter(format!(
            "N_check = {n_check} must exceed π f_c"
        )));
    }
    let m = sampled_sup(eta, n_check);
    if d == 0 {
        return Ok(m);
    }
    let ratio = T::PI() * T::from_usize_lossy(d) / nf;
    Ok(m / (T::one() - ratio))
}

/// Certified upper bound on `‖η‖_∞` from `N_check` uniform samples.
///
/// Takes the smallest of three valid bounds. Besides the first-order
/// Bernstein bound, at an extremum `t*` of `|η|` the nearest sample lies
/// within `1/(2N)` and `η′(t*) = 0`, so `‖η‖_∞ ≤ M + ‖η″‖_∞ / (8N²)`, with
/// `‖η″‖_∞` bounded either by Bernstein, `(2πd)²‖η‖_∞`, or directly from
/// the coefficients, `Σ_j (2πj)² |(p_{2j−1}, p_{2j})|`.
pub fn certified_sup_norm<T: Real>(eta: &TrigPolynomial<T>, n_check: usize) -> Result<T> {
    let first = bernstein_sup_bound(eta, n_check)?;
    let d = effective_degree(eta);
    if d == 0 {
        return Ok(first);
    }
    let m = sampled_sup(eta, n_check);
    let nf = T::from_usize_lossy(n_check);
    let r = T::PI() * T::from_usize_lossy(d) / nf;
    let second = m / (T::one() - r * r / T::lit(2.0));
    let p = eta.coefficients();
    let curvature: T = (1..=d)
        .map(|j| {
            let w = T::two_pi() * T::from_usize_lossy(j);
            w * w * p[2 * j - 1].hypot(p[2 * j])
        })
        .sum();
    let direct = m + curvature / (T::lit(8.0) * nf * nf);
    Ok(first.min(second).min(direct))
}

/// `max_i |η(x_i) − sign(a_i)|`.
pub fn extremality_error<T: Real>(eta: &TrigPolynomial<T>, mu: &AtomicMeasure<T>) -> T {
    mu.atoms
        .iter()
        .map(|atom| (eta.eval(atom.x) - atom.a.signum()).abs())
        .fold(T::zero(), T::max)
}

/// `|μ|(T) − ⟨p, y⟩`.
pub fn duality_gap<T: Real>(mu: &AtomicMeasure<T>, eta: &TrigPolynomial<T>, y: &MomentVector<T>) -> T {
    mu.tv_norm() - eta.pairing(y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CertificateReport<T> {
    pub sup_norm_bound: T,
    pub extremality_max_err: T,
    pub gap: T,
    pub verdict: Verdict,
}

/// Runs the three checks. `Certified` means μ is optimal for the moments
/// `y`; `Violated` means the samples alone already show `‖η‖_∞ > 1 + tol`.
pub fn certify<T: Real>(
    mu: &AtomicMeasure<T>,
    eta: &TrigPolynomial<T>,
    y: &MomentVector<T>,
    tol: T,
    n_check: usize,
) -> Result<CertificateReport<T>> {
    if eta.system() != y.system() {
        return Err(Error::Precondition("dual and moments use different systems".into()));
    }
    let sup_norm_bound = certified_sup_norm(eta, n_check)?;
    let extremality_max_err = extremality_error(eta, mu);
    let gap = duality_gap(mu, eta, y);
    let verdict = if sup_norm_bound <= T::one() + tol && extremality_max_err <= tol && gap <= tol {
        Verdict::Certified
    } else if sampled_sup(eta, n_check) > T::one() + tol {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    Ok(CertificateReport { sup_norm_bound, extremality_max_err, gap, verdict })
}
