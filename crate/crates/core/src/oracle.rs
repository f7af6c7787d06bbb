//! Closed-form solution of total-variation recovery for two opposite close
//! spikes `δ_{h/2} − δ_{−h/2}`: a Dirac comb on `t_j = 1/(4f_c) + j/(2f_c)`,
//! `j = −f_c, …, f_c − 1`, certified by `η(t) = sin(2π f_c t)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::measures::{Atom, AtomicMeasure, MomentVector, TorusPoint, TrigPolynomial, TrigSystem};
use crate::scalar::Real;

/// `|sin|` below which the cotangent is treated as a pole.
pub const COT_POLE_EPS: f64 = 1e-14;

/// Largest imaginary residue accepted by [`amplitudes_via_dft`].
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// `cot(π u)`, reduced to an argument in `(0, π)`.
pub fn cot_pi<T: Real>(u: T) -> Result<T> {
    let r = u - u.floor();
    let s = (T::PI() * r).sin();
    if s.abs() < T::lit(COT_POLE_EPS) {
        return Err(Error::Pole);
    }
    Ok((T::PI() * r).cos() / s)
}

/// Comb node `t_j`, as a real number (not reduced mod 1).
pub fn comb_node<T: Real>(f_c: usize, j: i64) -> T {
    let fc = T::from_usize_lossy(f_c);
    T::one() / (T::lit(4.0) * fc) + T::from_i64(j).unwrap() / (T::lit(2.0) * fc)
}

/// Indices `j = −f_c, …, f_c − 1`.
pub fn comb_indices(f_c: usize) -> impl Iterator<Item = i64> {
    let f = f_c as i64;
    -f..f
}

/// Moments of `δ_{h/2} − δ_{−h/2}`.
pub fn two_spike_moments<T: Real>(f_c: usize, h: T) -> Result<MomentVector<T>> {
    let sys = TrigSystem::new(f_c)?;
    let half = h / T::lit(2.0);
    Ok(sys.moments(&AtomicMeasure::new(vec![Atom::new(half, T::one()), Atom::new(-half, -T::one())])))
}

fn check_h<T: Real>(f_c: usize, h: T) -> Result<()> {
    let upper = T::one() / (T::lit(2.0) * T::from_usize_lossy(f_c));
    if !(h > T::zero() && h < upper) {
        return Err(Error::InvalidParameter(format!(
            "h = {h} must lie in (0, 1/(2 f_c)) = (0, {upper})"
        )));
    }
    Ok(())
}

/// The comb amplitudes from the cotangent formula, ordered `j = −f_c..f_c−1`.
pub fn comb_amplitudes<T: Real>(f_c: usize, h: T) -> Result<Vec<T>> {
    TrigSystem::new(f_c)?;
    check_h(f_c, h)?;
    let fc = T::from_usize_lossy(f_c);
    let two_fc = T::lit(2.0) * fc;
    let pref = (T::PI() * h * fc).cos() / two_fc;
    let half = h / T::lit(2.0);
    comb_indices(f_c)
        .map(|j| {
            let t = comb_node::<T>(f_c, j);
            let sign = if j.rem_euclid(2) == 0 { T::one() } else { -T::one() };
            Ok(sign * pref * (cot_pi(t - half)? - cot_pi(t + half)?))
        })
        .collect()
}

/// Solution measure and its dual certificate `p = (0, …, 0, 1)`.
pub fn oracle_solution<T: Real>(f_c: usize, h: T) -> Result<(AtomicMeasure<T>, TrigPolynomial<T>)> {
    let sys = TrigSystem::new(f_c)?;
    let amps = comb_amplitudes(f_c, h)?;
    let atoms = comb_indices(f_c)
        .zip(amps)
        .map(|(j, a)| Atom::new(comb_node::<T>(f_c, j), a))
        .collect();
    Ok((AtomicMeasure::new(atoms), TrigPolynomial::top_sine(sys)))
}

/// At `h = 1/(2f_c)` the spikes themselves are recovered: `a_0 = 1` at
/// `t_0 = 1/(4f_c)` and `a_{−1} = −1` at `t_{−1} = −1/(4f_c)`.
pub fn oracle_boundary<T: Real>(f_c: usize) -> Result<AtomicMeasure<T>> {
    TrigSystem::new(f_c)?;
    Ok(AtomicMeasure::new(vec![
        Atom::new(comb_node::<T>(f_c, 0), T::one()),
        Atom::new(comb_node::<T>(f_c, -1), -T::one()),
    ]))
}

/// Both evaluations of `f(x) = (1/2f_c) Σ_{k=−f_c}^{f_c−1} e^{2iπkx}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirichletValue<T> {
    pub sum: Complex<T>,
    /// `sin(2πf_c x)/(2f_c) · (cot(πx) − i)`; `None` at the pole `x ∈ Z`.
    pub closed: Option<Complex<T>>,
}

pub fn dirichlet_f<T: Real>(x: T, f_c: usize) -> DirichletValue<T> {
    let two_fc = T::lit(2.0) * T::from_usize_lossy(f_c);
    let p = TorusPoint::new(x);
    let sum = comb_indices(f_c)
        .map(|k| p.exp_i(k))
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
        / two_fc;
    let (_, s) = p.harmonic(2 * f_c);
    let closed = cot_pi(x).ok().map(|cot| Complex::new(cot, -T::one()) * (s / two_fc));
    DirichletValue { sum, closed }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DftAmplitudes<T> {
    /// `a_ℓ`, ordered `ℓ = −f_c..f_c−1`.
    pub amplitudes: Vec<T>,
    /// Largest discarded imaginary part.
    pub imag_residue: T,
    /// `|Σ_j a_j e^{−2iπ f_c t_j} − c_{f_c}|`, the equation left out of the
    /// square inverse DFT.
    pub top_residual: T,
}

/// Inverts `Σ_j a_j e^{−2iπk t_j} = c_k`, `k = −f_c..f_c−1`, by direct
/// inverse DFT on the shifted nodes `t_j`.
pub fn amplitudes_via_dft<T: Real>(y: &MomentVector<T>) -> Result<DftAmplitudes<T>> {
    let f_c = y.system().f_c();
    let c = y.complex_moments();
    let two_fc = T::lit(2.0) * T::from_usize_lossy(f_c);
    let mut amplitudes = Vec::with_capacity(2 * f_c);
    let mut imag_residue = T::zero();
    for l in comb_indices(f_c) {
        let t = TorusPoint::new(comb_node::<T>(f_c, l));
        let v = comb_indices(f_c)
            .map(|k| t.exp_i(k) * c.get(k))
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
            / two_fc;
        imag_residue = imag_residue.max(v.im.abs());
        amplitudes.push(v.re);
    }
    let scale = y.sup_norm().max(T::one());
    if imag_residue > T::lit(IMAG_RESIDUE_TOL) * scale {
        return Err(Error::ImaginaryResidue(imag_residue.to_f64_lossy()));
    }
    let top = comb_indices(f_c)
        .zip(&amplitudes)
        .map(|(j, a)| TorusPoint::new(comb_node::<T>(f_c, j)).exp_i(-(f_c as i64)) * *a)
        .fold(Complex::new(T::zero(), T::zero()), |s, z| s + z);
    let top_residual = (top - c.get(f_c as i64)).norm();
    Ok(DftAmplitudes { amplitudes, imag_residue, top_residual })
}
