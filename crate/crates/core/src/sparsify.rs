//! Constructive sparsification.
//!
//! * Carathéodory pruning: walk along kernel directions of the active
//!   feature columns until an amplitude vanishes, never increasing the total
//!   variation, until at most `rank(A)` atoms remain.
//! * Semidefinite rank reduction: move a feasible `Q ⪰ 0` inside its face
//!   until `r(r+1)/2 ≤ m`.
//! * Minimal-face dimensions for the ℓ1 ball and the PSD cone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_svd, lstsq, symmetric_eigen, Matrix};
use crate::measures::{Atom, AtomicMeasure, TrigSystem};
use crate::scalar::{max_abs, Real};

/// Default feasibility tolerance for instance validation.
pub const FEAS_TOL: f64 = 1e-9;

/// Atoms given by their feature columns: `features · amplitudes = target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FeatureInstance<T> {
    pub features: Matrix<T>,
    pub amplitudes: Vec<T>,
    pub target: Vec<T>,
}

impl<T: Real> FeatureInstance<T> {
    pub fn new(features: Matrix<T>, amplitudes: Vec<T>, target: Vec<T>) -> Result<Self> {
        let inst = Self { features, amplitudes, target };
        inst.validate(T::lit(FEAS_TOL))?;
        Ok(inst)
    }

    /// Builds the instance with `target = features · amplitudes`.
    pub fn from_atoms(features: Matrix<T>, amplitudes: Vec<T>) -> Result<Self> {
        if amplitudes.len() != features.cols() {
            return Err(Error::DimensionMismatch { expected: features.cols(), got: amplitudes.len() });
        }
        let target = features.matvec(&amplitudes);
        Ok(Self { features, amplitudes, target })
    }

    /// `features` column `i` is the trigonometric feature vector of atom `i`.
    pub fn from_measure(sys: TrigSystem, mu: &AtomicMeasure<T>) -> Self {
        let cols: Vec<Vec<T>> = mu.atoms.iter().map(|a| sys.basis_vector(a.x)).collect();
        let features = Matrix::from_columns(sys.m(), &cols);
        let amplitudes = mu.amplitudes();
        let target = features.matvec(&amplitudes);
        Self { features, amplitudes, target }
    }

    pub fn validate(&self, feas_tol: T) -> Result<()> {
        if self.amplitudes.len() != self.features.cols() {
            return Err(Error::DimensionMismatch { expected: self.features.cols(), got: self.amplitudes.len() });
        }
        if self.target.len() != self.features.rows() {
            return Err(Error::DimensionMismatch { expected: self.features.rows(), got: self.target.len() });
        }
        let r = self.residual();
        if r > feas_tol * max_abs(&self.target).max(T::one()) {
            return Err(Error::Precondition(format!("features · amplitudes misses target by {r}")));
        }
        Ok(())
    }

    /// `‖A a − y‖_∞`
    pub fn residual(&self) -> T {
        let ax = self.features.matvec(&self.amplitudes);
        ax.iter().zip(&self.target).fold(T::zero(), |m, (p, q)| m.max((*p - *q).abs()))
    }

    pub fn tv(&self) -> T {
        self.amplitudes.iter().map(|a| a.abs()).fold(T::zero(), |s, v| s + v)
    }

    pub fn atom_count(&self) -> usize {
        self.amplitudes.len()
    }
}

#[derive(Clone, Debug)]
pub struct Pruned<T> {
    pub instance: FeatureInstance<T>,
    /// Input column index of every output atom.
    pub kept: Vec<usize>,
    pub steps: usize,
}

impl<T: Real> Pruned<T> {
    /// Maps the kept atoms back onto their input positions.
    pub fn to_measure(&self, input: &AtomicMeasure<T>) -> AtomicMeasure<T> {
        AtomicMeasure::new(
            self.kept
                .iter()
                .zip(&self.instance.amplitudes)
                .map(|(&i, &a)| Atom { x: input.atoms[i].x, a })
                .collect(),
        )
    }
}

pub fn caratheodory_prune<T: Real>(inst: &FeatureInstance<T>) -> Result<Pruned<T>> {
    let (kept, amps, _, steps) = prune_columns(&inst.features, &inst.amplitudes, &[], &[])?;
    let features = inst.features.select_columns(&kept);
    Ok(Pruned {
        instance: FeatureInstance { features, amplitudes: amps, target: inst.target.clone() },
        kept,
        steps,
    })
}

/// Pruning with extra zero-cost columns `free` (coefficients `free_amps`)
/// that are never dropped. Returns the surviving costed column indices,
/// their amplitudes, the updated free coefficients and the step count.
///
/// Stops once the costed columns are independent modulo the span of the
/// free ones, so at most `m − rank(free)` costed atoms survive.
pub fn prune_columns<T: Real>(
    costed: &Matrix<T>,
    amps: &[T],
    free: &[Vec<T>],
    free_amps: &[T],
) -> Result<(Vec<usize>, Vec<T>, Vec<T>, usize)> {
    let m = costed.rows();
    assert_eq!(amps.len(), costed.cols());
    assert_eq!(free.len(), free_amps.len());
    let scale = max_abs(amps);
    let zero_thr = T::lit(1e-14) * scale;
    let mut active: Vec<usize> = (0..amps.len()).filter(|&i| amps[i].abs() > zero_thr).collect();
    let mut a: Vec<T> = amps.to_vec();
    let mut fa: Vec<T> = free_amps.to_vec();
    let nf = free.len();
    let mut steps = 0;
    let mut target = costed.matvec(amps);
    for (col, c) in free.iter().zip(free_amps) {
        for (t, v) in target.iter_mut().zip(col) {
            *t = *t + *c * *v;
        }
    }

    loop {
        // Free columns first, then as few costed columns as still guarantee
        // a dependency; the full active set once it fits.
        let take = if nf + active.len() > m { (m + 1).saturating_sub(nf).max(1) } else { active.len() };
        let subset: Vec<usize> = active[..take.min(active.len())].to_vec();
        let mut cols: Vec<Vec<T>> = free.to_vec();
        cols.extend(subset.iter().map(|&i| costed.column(i)));
        if cols.is_empty() {
            break;
        }
        let mat = Matrix::from_columns(m, &cols);
        let Some(d) = kernel_direction(&mat, nf) else {
            if subset.len() < active.len() {
                return Err(Error::Numerical("no kernel direction in an overdetermined column set".into()));
            }
            break;
        };
        let (d_free, d_cost) = d.split_at(nf);

        let slope: T = subset.iter().zip(d_cost).map(|(&i, di)| a[i].signum() * *di).sum();
        let orient = if slope > T::zero() { -T::one() } else { T::one() };
        let dmax = max_abs(d_cost);
        let mut step: Option<(usize, T)> = None;
        for (pos, (&i, di)) in subset.iter().zip(d_cost).enumerate() {
            let di = *di * orient;
            if di.abs() <= T::lit(1e-12) * dmax {
                continue;
            }
            if a[i] * di < T::zero() {
                let t = -a[i] / di;
                if step.is_none_or(|(_, bt)| t < bt) {
                    step = Some((pos, t));
                }
            }
        }
        let Some((hit, t)) = step else {
            return Err(Error::Numerical("kernel walk found no zero crossing".into()));
        };
        for (&i, di) in subset.iter().zip(d_cost) {
            a[i] = a[i] + t * orient * *di;
        }
        for (f, di) in fa.iter_mut().zip(d_free) {
            *f = *f + t * orient * *di;
        }
        a[subset[hit]] = T::zero();
        active.retain(|&i| a[i].abs() > zero_thr);
        steps += 1;
    }

    refit(costed, &mut a, &active, free, &mut fa, &target);
    let out: Vec<T> = active.iter().map(|&i| a[i]).collect();
    Ok((active, out, fa, steps))
}

/// Kernel vector of `mat` whose components past the first `nf` are not all
/// negligible, or `None` when the costed part is independent modulo the
/// free columns.
fn kernel_direction<T: Real>(mat: &Matrix<T>, nf: usize) -> Option<Vec<T>> {
    let svd = jacobi_svd(mat);
    let smax = svd.sigma.first().copied().unwrap_or(T::zero());
    let null_thr = T::lit(1e-11) * smax.max(T::min_positive_value());
    let mut best: Option<(Vec<T>, T)> = None;
    for (j, s) in svd.sigma.iter().enumerate() {
        if *s > null_thr {
            continue;
        }
        let v = svd.v.column(j);
        let weight = max_abs(&v[nf..]);
        if best.as_ref().is_none_or(|(_, w)| weight > *w) {
            best = Some((v, weight));
        }
    }
    best.filter(|(_, w)| *w > T::lit(1e-8)).map(|(v, _)| v)
}

/// Least-squares re-solve on the final support; accepted only when it
/// lowers the residual without flipping signs.
fn refit<T: Real>(costed: &Matrix<T>, a: &mut [T], active: &[usize], free: &[Vec<T>], fa: &mut [T], target: &[T]) {
    let m = costed.rows();
    let mut cols: Vec<Vec<T>> = free.to_vec();
    cols.extend(active.iter().map(|&i| costed.column(i)));
    if cols.is_empty() {
        return;
    }
    let mat = Matrix::from_columns(m, &cols);
    let current: Vec<T> = fa.iter().copied().chain(active.iter().map(|&i| a[i])).collect();
    let resid = |x: &[T]| {
        mat.matvec(x)
            .iter()
            .zip(target)
            .fold(T::zero(), |acc, (p, q)| acc.max((*p - *q).abs()))
    };
    let x = lstsq(&mat, target, T::lit(1e-12));
    let nf = free.len();
    let signs_kept = active.iter().zip(&x[nf..]).all(|(&i, v)| v.signum() == a[i].signum());
    if signs_kept && resid(&x) < resid(&current) {
        fa.copy_from_slice(&x[..nf]);
        for (&i, v) in active.iter().zip(&x[nf..]) {
            a[i] = *v;
        }
    }
}

/// Semidefinite feasibility data: `Q ⪰ 0` with `⟨Φ_i, Q⟩ = y_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PsdInstance<T> {
    pub q: Matrix<T>,
    pub constraints: Vec<Matrix<T>>,
    pub rhs: Vec<T>,
}

#[derive(Clone, Copy, Debug)]
pub struct PsdTolerances<T> {
    pub feas_tol: T,
    /// Eigenvalues at or below `psd_tol · λ_max` are treated as zero.
    pub psd_tol: T,
}

impl<T: Real> Default for PsdTolerances<T> {
    fn default() -> Self {
        Self { feas_tol: T::lit(1e-8), psd_tol: T::lit(1e-10) }
    }
}

impl<T: Real> PsdInstance<T> {
    pub fn new(q: Matrix<T>, constraints: Vec<Matrix<T>>, rhs: Vec<T>) -> Result<Self> {
        let inst = Self { q, constraints, rhs };
        inst.validate(&PsdTolerances::default())?;
        Ok(inst)
    }

    /// Instance whose right-hand side is read off `q`.
    pub fn from_solution(q: Matrix<T>, constraints: Vec<Matrix<T>>) -> Self {
        let rhs = constraints.iter().map(|c| c.inner(&q)).collect();
        Self { q, constraints, rhs }
    }

    pub fn n(&self) -> usize {
        self.q.rows()
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self, tol: &PsdTolerances<T>) -> Result<()> {
        let n = self.n();
        if !self.q.is_square() || self.constraints.iter().any(|c| c.rows() != n || c.cols() != n) {
            return Err(Error::InvalidParameter("PSD instance matrices must all be n × n".into()));
        }
        if self.rhs.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), got: self.rhs.len() });
        }
        let scale = self.q.max_abs().max(T::one());
        if self.q.asymmetry() > T::lit(1e-12) * scale {
            return Err(Error::Precondition("Q is not symmetric".into()));
        }
        let drift = self.drift();
        if drift > tol.feas_tol * max_abs(&self.rhs).max(T::one()) {
            return Err(Error::Precondition(format!("constraints violated by {drift}")));
        }
        let eig = symmetric_eigen(&self.q);
        let lmax = eig.values.last().copied().unwrap_or(T::zero()).max(T::zero());
        if eig.values.first().copied().unwrap_or(T::zero()) < -tol.psd_tol * lmax.max(T::one()) {
            return Err(Error::Precondition("Q is not positive semidefinite".into()));
        }
        Ok(())
    }

    /// `max_i |⟨Φ_i, Q⟩ − y_i|`
    pub fn drift(&self) -> T {
        self.constraints
            .iter()
            .zip(&self.rhs)
            .fold(T::zero(), |m, (c, y)| m.max((c.inner(&self.q) - *y).abs()))
    }

    pub fn rank(&self, psd_tol: T) -> usize {
        psd_rank(&self.q, psd_tol)
    }

    pub fn min_eigenvalue(&self) -> T {
        symmetric_eigen(&self.q).values.first().copied().unwrap_or(T::zero())
    }
}

fn psd_rank<T: Real>(q: &Matrix<T>, psd_tol: T) -> usize {
    let eig = symmetric_eigen(q);
    let lmax = eig.values.last().copied().unwrap_or(T::zero());
    if lmax <= T::zero() {
        return 0;
    }
    eig.values.iter().filter(|l| **l > psd_tol * lmax).count()
}

/// `Q ≈ F Fᵀ` with `F` of shape `n × r`, dropping eigenvalues at or below `psd_tol · λ_max`.
fn psd_factor<T: Real>(q: &Matrix<T>, psd_tol: T) -> Matrix<T> {
    let eig = symmetric_eigen(q);
    let n = q.rows();
    let lmax = eig.values.last().copied().unwrap_or(T::zero());
    let keep: Vec<usize> = (0..n).filter(|&j| lmax > T::zero() && eig.values[j] > psd_tol * lmax).collect();
    Matrix::from_fn(n, keep.len(), |i, k| eig.vectors[(i, keep[k])] * eig.values[keep[k]].sqrt())
}

/// Largest rank allowed by `r(r+1)/2 ≤ m`, i.e. `⌊(√(8m+1) − 1)/2⌋`.
pub fn barvinok_rank_bound(m: usize) -> usize {
    let mut r = 0;
    while (r + 1) * (r + 2) / 2 <= m {
        r += 1;
    }
    r
}

/// Row `i`: coefficients of `⟨Fᵀ Φ_i F, S⟩` in the upper-triangular
/// coordinates of a symmetric `S`.
fn face_constraints<T: Real>(f: &Matrix<T>, constraints: &[Matrix<T>]) -> Matrix<T> {
    let r = f.cols();
    let s = r * (r + 1) / 2;
    let ft = f.transpose();
    let mut out = Matrix::zeros(constraints.len(), s);
    for (i, c) in constraints.iter().enumerate() {
        let w = ft.matmul(c).matmul(f);
        let mut col = 0;
        for a in 0..r {
            for b in a..r {
                out[(i, col)] = if a == b { w[(a, a)] } else { w[(a, b)] + w[(b, a)] };
                col += 1;
            }
        }
    }
    out
}

fn unpack_symmetric<T: Real>(r: usize, v: &[T]) -> Matrix<T> {
    let mut m = Matrix::zeros(r, r);
    let mut k = 0;
    for a in 0..r {
        for b in a..r {
            m[(a, b)] = v[k];
            m[(b, a)] = v[k];
            k += 1;
        }
    }
    m
}

#[derive(Clone, Debug)]
pub struct PsdReduction<T> {
    pub instance: PsdInstance<T>,
    /// Rank before each step and at the end.
    pub ranks: Vec<usize>,
}

impl<T: Real> PsdReduction<T> {
    pub fn final_rank(&self) -> usize {
        *self.ranks.last().unwrap_or(&0)
    }

    pub fn iterations(&self) -> usize {
        self.ranks.len().saturating_sub(1)
    }
}

pub fn psd_rank_reduce<T: Real>(inst: &PsdInstance<T>) -> Result<PsdReduction<T>> {
    psd_rank_reduce_with(inst, &PsdTolerances::default())
}

pub fn psd_rank_reduce_with<T: Real>(inst: &PsdInstance<T>, tol: &PsdTolerances<T>) -> Result<PsdReduction<T>> {
    inst.validate(tol)?;
    let m = inst.m();
    let mut q = inst.q.symmetrize();
    let mut ranks = vec![psd_rank(&q, tol.psd_tol)];
    loop {
        let f = psd_factor(&q, tol.psd_tol);
        let r = f.cols();
        if r * (r + 1) / 2 <= m {
            break;
        }
        let lin = face_constraints(&f, &inst.constraints);
        let svd = jacobi_svd(&lin);
        let delta = unpack_symmetric(r, &svd.last_right_vector());
        let residual = max_abs(&lin.matvec(&svd.last_right_vector()));
        if delta.max_abs() <= T::lit(1e-12) || residual > T::lit(1e-9) * svd.sigma[0].max(T::one()) {
            return Err(Error::Numerical("no face direction: constraint matrices are degenerate".into()));
        }
        let eig = symmetric_eigen(&delta);
        let lam = eig
            .values
            .iter()
            .copied()
            .fold(T::zero(), |best, l| if l.abs() > best.abs() { l } else { best });
        let t = -T::one() / lam;
        let step = Matrix::identity(r).add(&delta.scale(t));
        let min_eig = symmetric_eigen(&step).values[0];
        if min_eig < T::lit(-1e-12) {
            return Err(Error::Numerical(format!("face step left the cone (min eigenvalue {min_eig})")));
        }
        q = f.matmul(&step).matmul(&f.transpose()).symmetrize();
        q = correct_drift(&q, inst, tol.psd_tol);
        let new_rank = psd_rank(&q, tol.psd_tol);
        if new_rank >= r {
            return Err(Error::Numerical(format!("rank failed to drop below {r}")));
        }
        ranks.push(new_rank);
        if ranks.len() > inst.n() + 1 {
            return Err(Error::Numerical("rank reduction exceeded n steps".into()));
        }
    }
    Ok(PsdReduction {
        instance: PsdInstance { q, constraints: inst.constraints.clone(), rhs: inst.rhs.clone() },
        ranks,
    })
}

/// Minimum-norm correction `Q += F S Fᵀ` on the current factor that pulls
/// the constraint residual back toward zero.
fn correct_drift<T: Real>(q: &Matrix<T>, inst: &PsdInstance<T>, psd_tol: T) -> Matrix<T> {
    let f = psd_factor(q, psd_tol);
    let r = f.cols();
    if r == 0 {
        return q.clone();
    }
    let resid: Vec<T> = inst.constraints.iter().zip(&inst.rhs).map(|(c, y)| *y - c.inner(q)).collect();
    let lin = face_constraints(&f, &inst.constraints);
    let s = unpack_symmetric(r, &lstsq(&lin, &resid, T::lit(1e-12)));
    let corrected = q.add(&f.matmul(&s).matmul(&f.transpose())).symmetrize();
    let drift = |m: &Matrix<T>| {
        inst.constraints
            .iter()
            .zip(&inst.rhs)
            .fold(T::zero(), |acc, (c, y)| acc.max((c.inner(m) - *y).abs()))
    };
    if drift(&corrected) < drift(q) {
        corrected
    } else {
        q.clone()
    }
}

/// Dimension of the minimal face of the ℓ1 ball of radius `tau` containing `a`.
pub fn l1_face_dim<T: Real>(a: &[T], tau: T, tol: T) -> Result<usize> {
    if tau <= T::zero() {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    let norm: T = a.iter().map(|v| v.abs()).fold(T::zero(), |s, v| s + v);
    if norm > tau + tol {
        return Err(Error::Precondition(format!("‖a‖₁ = {norm} exceeds the ball radius {tau}")));
    }
    if norm < tau - tol {
        return Ok(a.len());
    }
    let nnz = a.iter().filter(|v| v.abs() > tol).count();
    Ok(nnz.saturating_sub(1))
}

/// `r(r+1)/2` with `r = rank Q`: dimension of the minimal face of the PSD cone at `Q`.
pub fn psd_face_dim<T: Real>(q: &Matrix<T>, psd_tol: T) -> Result<usize> {
    if !q.is_square() || q.asymmetry() > T::lit(1e-12) * q.max_abs().max(T::one()) {
        return Err(Error::Precondition("Q must be symmetric".into()));
    }
    let eig = symmetric_eigen(q);
    let lmax = eig.values.last().copied().unwrap_or(T::zero()).max(T::zero());
    if eig.values.first().copied().unwrap_or(T::zero()) < -psd_tol * lmax.max(T::one()) {
        return Err(Error::Precondition("Q is not positive semidefinite".into()));
    }
    let r = psd_rank(q, psd_tol);
    Ok(r * (r + 1) / 2)
}
