//! Truncated trigonometric moment problem for nonnegative measures.
//!
//! `T(c)` is the `(f_c+1) × (f_c+1)` Hermitian Toeplitz matrix of the
//! complex moments. A nonnegative measure with moments `y` exists iff
//! `T(c) ⪰ 0`; if `rank T(c) = r ≤ f_c` it is unique with `r` atoms, located
//! at the unit-circle roots of a kernel polynomial.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, lstsq, ComplexMatrix, Matrix};
use crate::measures::{Atom, AtomicMeasure, ComplexMoments, MomentVector, TorusPoint};
use crate::scalar::{max_abs, Real};

#[derive(Clone, Copy, Debug)]
pub struct ToeplitzTolerances<T> {
    /// Min eigenvalue allowed down to `−psd_tol · ‖T‖`.
    pub psd_tol: T,
    /// Eigenvalues above `rank_tol · max |λ|` count toward the rank.
    pub rank_tol: T,
    /// Accepted distance `|1 − |z||` of a root from the unit circle.
    pub root_tol: T,
    /// Most negative amplitude accepted before clamping.
    pub amp_tol: T,
    /// Moment residual bound on the recovered measure (scaled by `max(1, ‖y‖_∞)`).
    pub residual_tol: T,
}

impl<T: Real> Default for ToeplitzTolerances<T> {
    fn default() -> Self {
        Self {
            psd_tol: T::lit(1e-10),
            rank_tol: T::lit(1e-10),
            root_tol: T::lit(1e-6),
            amp_tol: T::lit(1e-8),
            residual_tol: T::lit(1e-8),
        }
    }
}

/// Entry `(i, j)` is `c_{j−i}` for `j ≥ i` and `conj(c_{i−j})` below the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianToeplitz<T> {
    c: ComplexMoments<T>,
}

impl<T: Real> HermitianToeplitz<T> {
    pub fn size(&self) -> usize {
        self.c.c.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.c.get(j as i64 - i as i64)
    }

    pub fn to_matrix(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_fn(self.size(), |i, j| self.entry(i, j))
    }

    pub fn moments(&self) -> &ComplexMoments<T> {
        &self.c
    }
}

pub fn build_toeplitz<T: Real>(y: &MomentVector<T>) -> HermitianToeplitz<T> {
    HermitianToeplitz { c: y.complex_moments() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MomentDiagnosis<T> {
    pub is_psd: bool,
    pub rank: usize,
    /// Ascending.
    pub eigenvalues: Vec<T>,
}

pub fn diagnose<T: Real>(t: &HermitianToeplitz<T>, psd_tol: T, rank_tol: T) -> MomentDiagnosis<T> {
    let eig = hermitian_eigen(&t.to_matrix());
    diagnosis_from(&eig.values, psd_tol, rank_tol)
}

fn diagnosis_from<T: Real>(values: &[T], psd_tol: T, rank_tol: T) -> MomentDiagnosis<T> {
    let scale = max_abs(values);
    let min = values.first().copied().unwrap_or(T::zero());
    let is_psd = min >= -psd_tol * scale;
    let rank = if scale == T::zero() {
        0
    } else {
        values.iter().filter(|l| **l > rank_tol * scale).count()
    };
    MomentDiagnosis { is_psd, rank, eigenvalues: values.to_vec() }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Recovery<T> {
    /// `rank T(c) ≤ f_c`: the unique nonnegative representing measure.
    Unique(AtomicMeasure<T>),
    /// `T(c)` invertible: infinitely many solutions with `f_c + 1` atoms.
    Nonunique,
    /// `T(c)` is not positive semidefinite.
    NoSolution,
}

#[derive(Clone, Debug)]
pub struct RecoveryReport<T> {
    pub diagnosis: MomentDiagnosis<T>,
    pub recovery: Recovery<T>,
    /// Smallest amplitude before clamping, if a measure was produced.
    pub min_amplitude: Option<T>,
}

pub fn recover_nonneg<T: Real>(y: &MomentVector<T>) -> Result<Recovery<T>> {
    recover_nonneg_with(y, &ToeplitzTolerances::default()).map(|r| r.recovery)
}

pub fn recover_nonneg_with<T: Real>(y: &MomentVector<T>, tol: &ToeplitzTolerances<T>) -> Result<RecoveryReport<T>> {
    let toeplitz = build_toeplitz(y);
    let diagnosis = diagnose(&toeplitz, tol.psd_tol, tol.rank_tol);
    let report = |recovery, min_amplitude| RecoveryReport { diagnosis: diagnosis.clone(), recovery, min_amplitude };
    if !diagnosis.is_psd {
        return Ok(report(Recovery::NoSolution, None));
    }
    let r = diagnosis.rank;
    if r == 0 {
        return Ok(report(Recovery::Unique(AtomicMeasure::empty()), None));
    }
    if r == toeplitz.size() {
        return Ok(report(Recovery::Nonunique, None));
    }

    // The leading (r+1)-block still has rank r, so its kernel is a line and
    // the kernel polynomial has exactly the r atoms as roots.
    let block = toeplitz.to_matrix().leading(r + 1);
    let eig = hermitian_eigen(&block);
    let kernel = &eig.vectors[0];
    let roots = crate::linalg::polynomial_roots(kernel);
    let on_circle: Vec<Complex<T>> = roots
        .iter()
        .copied()
        .filter(|z| (T::one() - z.norm()).abs() <= tol.root_tol)
        .collect();
    if on_circle.len() != r {
        return Err(Error::RootCount {
            expected: r,
            found: on_circle.len(),
            moduli: roots.iter().map(|z| z.norm().to_f64_lossy()).collect(),
        });
    }
    // kernel ⟂ (e^{2πikx})_k ⇔ q(e^{−2πix}) = 0
    let positions: Vec<T> = on_circle.iter().map(|z| -z.arg() / T::two_pi()).collect();
    let (measure, min_amp) = fit_nonnegative(y, &positions, tol)?;
    Ok(report(Recovery::Unique(measure), Some(min_amp)))
}

/// Least-squares amplitudes on fixed positions, checked nonnegative and
/// consistent with `y`.
fn fit_nonnegative<T: Real>(
    y: &MomentVector<T>,
    positions: &[T],
    tol: &ToeplitzTolerances<T>,
) -> Result<(AtomicMeasure<T>, T)> {
    let sys = y.system();
    let pts: Vec<TorusPoint<T>> = positions.iter().map(|x| TorusPoint::new(*x)).collect();
    let cols: Vec<Vec<T>> = pts.iter().map(|p| sys.basis_vector(*p)).collect();
    let a = Matrix::from_columns(sys.m(), &cols);
    let amps = lstsq(&a, y.values(), T::epsilon() * T::lit(16.0));
    let min_amp = amps.iter().copied().fold(T::infinity(), T::min);
    let scale = y.sup_norm().max(T::one());
    if min_amp < -tol.amp_tol * scale {
        return Err(Error::Numerical(format!("negative amplitude {min_amp} in nonnegative recovery")));
    }
    let atoms: Vec<Atom<T>> = pts
        .iter()
        .zip(&amps)
        .map(|(p, a)| Atom { x: *p, a: a.max(T::zero()) })
        .collect();
    let measure = AtomicMeasure::new(atoms).sorted();
    let resid = sys.moments(&measure).distance(y);
    if resid > tol.residual_tol * scale {
        return Err(Error::Numerical(format!("moment residual {resid} after recovery")));
    }
    Ok((measure, min_amp))
}

fn cdot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * *y)
        .fold(Complex::new(T::zero(), T::zero()), |s, z| s + z)
}

/// Mass the solution family can place at `t0`: `ρ = 1 / (v(t0)ᴴ T⁻¹ v(t0))`,
/// `v(t) = (e^{2πikt})_{k=0}^{f_c}`.
pub fn christoffel_mass<T: Real>(y: &MomentVector<T>, t0: TorusPoint<T>) -> Result<T> {
    let toeplitz = build_toeplitz(y);
    let tol = ToeplitzTolerances::<T>::default();
    let eig = hermitian_eigen(&toeplitz.to_matrix());
    let diag = diagnosis_from(&eig.values, tol.psd_tol, tol.rank_tol);
    if !diag.is_psd || diag.rank != toeplitz.size() {
        return Err(Error::Precondition(format!(
            "charging a point needs an invertible PSD Toeplitz matrix (psd = {}, rank = {} of {})",
            diag.is_psd,
            diag.rank,
            toeplitz.size()
        )));
    }
    let v: Vec<Complex<T>> = (0..toeplitz.size()).map(|k| t0.exp_i(k as i64)).collect();
    let quad: T = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .map(|(l, u)| cdot(u, &v).norm_sqr() / *l)
        .sum();
    Ok(T::one() / quad)
}

/// A solution charging `t0`: `ρ δ_{t0}` plus the unique representation of
/// the rank-`f_c` remainder. Requires `T(c)` positive definite.
pub fn recover_charging<T: Real>(y: &MomentVector<T>, t0: TorusPoint<T>) -> Result<AtomicMeasure<T>> {
    let rho = christoffel_mass(y, t0)?;
    let sys = y.system();
    let charged = AtomicMeasure::new(vec![Atom { x: t0, a: rho }]);
    let rest = y.sub(&sys.moments(&charged));
    let tol = ToeplitzTolerances::<T>::default();
    let report = recover_nonneg_with(&rest, &tol)?;
    let Recovery::Unique(rest_measure) = report.recovery else {
        return Err(Error::Numerical(format!(
            "remainder after charging has rank {} (expected {})",
            report.diagnosis.rank,
            sys.f_c()
        )));
    };
    let out = charged.plus(&rest_measure).sorted();
    let scale = y.sup_norm().max(T::one());
    let resid = sys.moments(&out).distance(y);
    if resid > tol.residual_tol * scale {
        return Err(Error::Numerical(format!("moment residual {resid} after charging")));
    }
    Ok(out)
}
