//! Atomic measures on the torus `T = R/Z`, the real trigonometric
//! measurement system and the objects built on it.
//!
//! The trigonometric system with cutoff `f_c` has `m = 2 f_c + 1` basis
//! functions: `φ_0 = 1`, `φ_{2j-1}(t) = cos(2πjt)`, `φ_{2j}(t) = sin(2πjt)`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{max_abs, Real};

/// Zero-amplitude threshold for canonicalization, relative to the largest
/// amplitude of the input.
pub const ZERO_AMPLITUDE_REL: f64 = 1e-12;

/// Point of the torus, stored as the representative in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct TorusPoint<T>(T);

impl<T: Real> TorusPoint<T> {
    pub fn new(x: T) -> Self {
        let mut r = x - x.floor();
        // x slightly below an integer can round up to exactly 1
        if r >= T::one() {
            r = T::zero();
        }
        Self(r)
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    /// Torus distance, in `[0, 1/2]`.
    pub fn distance(self, other: Self) -> T {
        let d = (self.0 - other.0).abs();
        d.min(T::one() - d)
    }

    pub fn shift(self, s: T) -> Self {
        Self::new(self.0 + s)
    }

    pub fn neg(self) -> Self {
        Self::new(-self.0)
    }

    /// `(cos 2π k x, sin 2π k x)` with the argument reduced before scaling.
    #[inline]
    pub fn harmonic(self, k: usize) -> (T, T) {
        let kx = T::from_usize_lossy(k) * self.0;
        let ang = T::two_pi() * (kx - kx.floor());
        (ang.cos(), ang.sin())
    }

    /// `e^{2πikx}` for a signed frequency.
    pub fn exp_i(self, k: i64) -> Complex<T> {
        let (c, s) = self.harmonic(k.unsigned_abs() as usize);
        if k >= 0 {
            Complex::new(c, s)
        } else {
            Complex::new(c, -s)
        }
    }
}

impl<T: Real> From<T> for TorusPoint<T> {
    fn from(x: T) -> Self {
        Self::new(x)
    }
}

impl<T: Real> Serialize for TorusPoint<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for TorusPoint<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        T::deserialize(d).map(Self::new)
    }
}

/// One signed Dirac mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Atom<T> {
    pub x: TorusPoint<T>,
    pub a: T,
}

impl<T: Real> Atom<T> {
    pub fn new(x: T, a: T) -> Self {
        Self { x: TorusPoint::new(x), a }
    }
}

/// Finite signed atomic measure `Σ a_i δ_{x_i}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AtomicMeasure<T> {
    pub atoms: Vec<Atom<T>>,
}

impl<T: Real> AtomicMeasure<T> {
    pub fn new(atoms: Vec<Atom<T>>) -> Self {
        Self { atoms }
    }

    pub fn empty() -> Self {
        Self { atoms: Vec::new() }
    }

    pub fn from_pairs(pairs: &[(T, T)]) -> Self {
        Self::new(pairs.iter().map(|&(x, a)| Atom::new(x, a)).collect())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn positions(&self) -> Vec<T> {
        self.atoms.iter().map(|a| a.x.value()).collect()
    }

    pub fn amplitudes(&self) -> Vec<T> {
        self.atoms.iter().map(|a| a.a).collect()
    }

    /// Sum of absolute amplitudes without canonicalizing.
    pub fn raw_mass(&self) -> T {
        self.atoms.iter().map(|a| a.a.abs()).fold(T::zero(), |s, v| s + v)
    }

    /// Total variation `|μ|(T)`, computed on the radius-0 canonical form so
    /// that coincident opposite masses cancel.
    pub fn tv_norm(&self) -> T {
        self.canonicalize(T::zero()).raw_mass()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::new(self.atoms.iter().map(|a| Atom { x: a.x, a: a.a * s }).collect())
    }

    pub fn shifted(&self, s: T) -> Self {
        Self::new(self.atoms.iter().map(|a| Atom { x: a.x.shift(s), a: a.a }).collect())
    }

    /// Formal sum (atoms concatenated, not merged).
    pub fn plus(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Self::new(atoms)
    }

    pub fn sorted(&self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(std::cmp::Ordering::Equal));
        Self::new(atoms)
    }

    /// Merges atoms within torus distance `merge_radius` (single linkage) at
    /// their `|a|`-weighted circular mean, and drops amplitudes at or below
    /// `1e-12 · max |a_i|`. Output is sorted by position and its positions
    /// are pairwise farther apart than `merge_radius`.
    pub fn canonicalize(&self, merge_radius: T) -> Self {
        let scale = max_abs(&self.amplitudes());
        if scale == T::zero() {
            return Self::empty();
        }
        let thr = T::lit(ZERO_AMPLITUDE_REL) * scale;
        let mut atoms: Vec<Atom<T>> = self.atoms.iter().copied().filter(|a| a.a.abs() > thr).collect();
        loop {
            atoms.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(std::cmp::Ordering::Equal));
            let clusters = link_clusters(&atoms, merge_radius);
            let merged_any = clusters.iter().any(|c| c.len() > 1);
            let mut next: Vec<Atom<T>> = clusters.iter().map(|c| merge_cluster(&atoms, c)).collect();
            next.retain(|a| a.a.abs() > thr);
            atoms = next;
            if !merged_any {
                break;
            }
        }
        atoms.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(std::cmp::Ordering::Equal));
        Self::new(atoms)
    }

    /// Largest `|a|` over atoms, zero if empty.
    pub fn max_amplitude(&self) -> T {
        max_abs(&self.amplitudes())
    }
}

/// Single-linkage clusters of sorted atoms, wrapping around the torus.
fn link_clusters<T: Real>(atoms: &[Atom<T>], radius: T) -> Vec<Vec<usize>> {
    let n = atoms.len();
    if n == 0 {
        return Vec::new();
    }
    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..n {
        let gap = atoms[i].x.value() - atoms[i - 1].x.value();
        if gap <= radius {
            clusters.last_mut().unwrap().push(i);
        } else {
            clusters.push(vec![i]);
        }
    }
    if clusters.len() > 1 {
        let wrap_gap = T::one() - atoms[n - 1].x.value() + atoms[0].x.value();
        if wrap_gap <= radius {
            let last = clusters.pop().unwrap();
            let mut first = last;
            first.extend_from_slice(&clusters[0]);
            clusters[0] = first;
        }
    }
    clusters
}

fn merge_cluster<T: Real>(atoms: &[Atom<T>], idx: &[usize]) -> Atom<T> {
    if idx.len() == 1 {
        return atoms[idx[0]];
    }
    let amp: T = idx.iter().map(|&i| atoms[i].a).sum();
    let x0 = atoms[idx[0]].x;
    if idx.iter().all(|&i| atoms[i].x == x0) {
        return Atom { x: x0, a: amp };
    }
    let (mut sc, mut ss) = (T::zero(), T::zero());
    for &i in idx {
        let w = atoms[i].a.abs();
        let (c, s) = atoms[i].x.harmonic(1);
        sc = sc + w * c;
        ss = ss + w * s;
    }
    let x = ss.atan2(sc) / T::two_pi();
    Atom { x: TorusPoint::new(x), a: amp }
}

/// Trigonometric measurement system with frequency cutoff `f_c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrigSystem {
    f_c: usize,
}

impl TrigSystem {
    pub fn new(f_c: usize) -> Result<Self> {
        if f_c == 0 {
            return Err(Error::InvalidParameter("f_c must be positive".into()));
        }
        Ok(Self { f_c })
    }

    #[inline]
    pub fn f_c(&self) -> usize {
        self.f_c
    }

    /// Number of measurements `m = 2 f_c + 1`.
    #[inline]
    pub fn m(&self) -> usize {
        2 * self.f_c + 1
    }

    pub fn eval_basis<T: Real>(&self, k: usize, t: TorusPoint<T>) -> Result<T> {
        if k > 2 * self.f_c {
            return Err(Error::IndexOutOfRange { index: k, f_c: self.f_c });
        }
        if k == 0 {
            return Ok(T::one());
        }
        let (c, s) = t.harmonic(k.div_ceil(2));
        Ok(if k % 2 == 1 { c } else { s })
    }

    /// `(φ_k(t))_{k=0}^{2f_c}`.
    pub fn basis_vector<T: Real>(&self, t: TorusPoint<T>) -> Vec<T> {
        let mut v = Vec::with_capacity(self.m());
        v.push(T::one());
        for j in 1..=self.f_c {
            let (c, s) = t.harmonic(j);
            v.push(c);
            v.push(s);
        }
        v
    }

    /// `(φ_k'(t))_k`, derivative in `t`.
    pub fn basis_derivative<T: Real>(&self, t: TorusPoint<T>) -> Vec<T> {
        let mut v = Vec::with_capacity(self.m());
        v.push(T::zero());
        for j in 1..=self.f_c {
            let (c, s) = t.harmonic(j);
            let w = T::two_pi() * T::from_usize_lossy(j);
            v.push(-w * s);
            v.push(w * c);
        }
        v
    }

    pub fn moments<T: Real>(&self, mu: &AtomicMeasure<T>) -> MomentVector<T> {
        let mut y = vec![T::zero(); self.m()];
        for atom in &mu.atoms {
            for (yk, phi) in y.iter_mut().zip(self.basis_vector(atom.x)) {
                *yk = *yk + atom.a * phi;
            }
        }
        MomentVector { system: *self, y }
    }
}

/// Trigonometric moments `y_k = ∫ φ_k dμ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "RawMoments<T>", into = "RawMoments<T>")]
pub struct MomentVector<T> {
    system: TrigSystem,
    y: Vec<T>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[doc(hidden)]
pub struct RawMoments<T> {
    f_c: usize,
    y: Vec<T>,
}

impl<T: Real> TryFrom<RawMoments<T>> for MomentVector<T> {
    type Error = Error;
    fn try_from(raw: RawMoments<T>) -> Result<Self> {
        MomentVector::new(TrigSystem::new(raw.f_c)?, raw.y)
    }
}

impl<T: Real> From<MomentVector<T>> for RawMoments<T> {
    fn from(m: MomentVector<T>) -> Self {
        RawMoments { f_c: m.system.f_c, y: m.y }
    }
}

impl<T: Real> MomentVector<T> {
    pub fn new(system: TrigSystem, y: Vec<T>) -> Result<Self> {
        if y.len() != system.m() {
            return Err(Error::DimensionMismatch { expected: system.m(), got: y.len() });
        }
        Ok(Self { system, y })
    }

    pub fn zeros(system: TrigSystem) -> Self {
        Self { system, y: vec![T::zero(); system.m()] }
    }

    pub fn system(&self) -> TrigSystem {
        self.system
    }

    pub fn values(&self) -> &[T] {
        &self.y
    }

    pub fn into_values(self) -> Vec<T> {
        self.y
    }

    pub fn sup_norm(&self) -> T {
        max_abs(&self.y)
    }

    /// `‖self − other‖_∞`.
    pub fn distance(&self, other: &Self) -> T {
        self.y.iter().zip(&other.y).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            system: self.system,
            y: self.y.iter().zip(&other.y).map(|(a, b)| *a - *b).collect(),
        }
    }

    /// `c_0 = y_0`, `c_j = y_{2j-1} − i y_{2j}`.
    pub fn complex_moments(&self) -> ComplexMoments<T> {
        let mut c = Vec::with_capacity(self.system.f_c + 1);
        c.push(Complex::new(self.y[0], T::zero()));
        for j in 1..=self.system.f_c {
            c.push(Complex::new(self.y[2 * j - 1], -self.y[2 * j]));
        }
        ComplexMoments { c }
    }
}

/// Complex moments `c_j = ∫ e^{-2πijt} dμ(t)`, `j = 0..=f_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMoments<T> {
    pub c: Vec<Complex<T>>,
}

impl<T: Real> ComplexMoments<T> {
    pub fn f_c(&self) -> usize {
        self.c.len() - 1
    }

    /// `c_k` for `|k| ≤ f_c`, using `c_{-k} = conj(c_k)`.
    pub fn get(&self, k: i64) -> Complex<T> {
        let j = k.unsigned_abs() as usize;
        if k >= 0 {
            self.c[j]
        } else {
            self.c[j].conj()
        }
    }

    pub fn to_real(&self) -> MomentVector<T> {
        let f_c = self.f_c();
        let mut y = Vec::with_capacity(2 * f_c + 1);
        y.push(self.c[0].re);
        for j in 1..=f_c {
            y.push(self.c[j].re);
            y.push(-self.c[j].im);
        }
        MomentVector { system: TrigSystem { f_c }, y }
    }
}

/// Trigonometric polynomial `η = Σ_k p_k φ_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "RawPoly<T>", into = "RawPoly<T>")]
pub struct TrigPolynomial<T> {
    system: TrigSystem,
    p: Vec<T>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[doc(hidden)]
pub struct RawPoly<T> {
    f_c: usize,
    p: Vec<T>,
}

impl<T: Real> TryFrom<RawPoly<T>> for TrigPolynomial<T> {
    type Error = Error;
    fn try_from(raw: RawPoly<T>) -> Result<Self> {
        TrigPolynomial::new(TrigSystem::new(raw.f_c)?, raw.p)
    }
}

impl<T: Real> From<TrigPolynomial<T>> for RawPoly<T> {
    fn from(p: TrigPolynomial<T>) -> Self {
        RawPoly { f_c: p.system.f_c, p: p.p }
    }
}

impl<T: Real> TrigPolynomial<T> {
    pub fn new(system: TrigSystem, p: Vec<T>) -> Result<Self> {
        if p.len() != system.m() {
            return Err(Error::DimensionMismatch { expected: system.m(), got: p.len() });
        }
        Ok(Self { system, p })
    }

    pub fn zero(system: TrigSystem) -> Self {
        Self { system, p: vec![T::zero(); system.m()] }
    }

    /// `sin(2π f_c t)`, i.e. `p = (0, …, 0, 1)`.
    pub fn top_sine(system: TrigSystem) -> Self {
        let mut p = vec![T::zero(); system.m()];
        p[system.m() - 1] = T::one();
        Self { system, p }
    }

    pub fn system(&self) -> TrigSystem {
        self.system
    }

    pub fn coefficients(&self) -> &[T] {
        &self.p
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { system: self.system, p: self.p.iter().map(|x| *x * s).collect() }
    }

    pub fn eval(&self, t: TorusPoint<T>) -> T {
        let mut s = self.p[0];
        for j in 1..=self.system.f_c {
            let (c, si) = t.harmonic(j);
            s = s + self.p[2 * j - 1] * c + self.p[2 * j] * si;
        }
        s
    }

    pub fn eval_derivative(&self, t: TorusPoint<T>) -> T {
        self.system
            .basis_derivative(t)
            .iter()
            .zip(&self.p)
            .map(|(d, p)| *d * *p)
            .sum()
    }

    /// `⟨p, y⟩ = ∫ η dμ` for any μ with moments `y`.
    pub fn pairing(&self, y: &MomentVector<T>) -> T {
        self.p.iter().zip(y.values()).map(|(a, b)| *a * *b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(f_c: usize) -> TrigSystem {
        TrigSystem::new(f_c).unwrap()
    }

    #[test]
    fn basis_values() {
        let s = sys(2);
        assert_eq!(s.eval_basis(0, TorusPoint::<f64>::new(0.3)).unwrap(), 1.0);
        assert!(s.eval_basis(1, TorusPoint::<f64>::new(0.25)).unwrap().abs() < 1e-15);
        assert!((s.eval_basis(2, TorusPoint::<f64>::new(0.25)).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            s.eval_basis(5, TorusPoint::<f64>::new(0.1)),
            Err(Error::IndexOutOfRange { index: 5, f_c: 2 })
        ));
    }

    #[test]
    fn torus_point_normalizes() {
        assert_eq!(TorusPoint::<f64>::new(1.25).value(), 0.25);
        assert_eq!(TorusPoint::<f64>::new(-0.25).value(), 0.75);
        assert_eq!(TorusPoint::<f64>::new(-1e-18).value(), 0.0);
        let a = TorusPoint::<f64>::new(0.05);
        let b = TorusPoint::<f64>::new(0.95);
        assert!((a.distance(b) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn moments_of_dirac_at_zero() {
        let mu = AtomicMeasure::<f64>::from_pairs(&[(0.0, 1.0)]);
        assert_eq!(sys(2).moments(&mu).values(), &[1.0, 1.0, 0.0, 1.0, 0.0]);
        let empty = AtomicMeasure::<f64>::empty();
        assert!(sys(2).moments(&empty).values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn odd_pair_moments_are_pure_sine() {
        let h = 0.1;
        let mu = AtomicMeasure::<f64>::from_pairs(&[(h / 2.0, 1.0), (-h / 2.0, -1.0)]);
        let y = sys(3).moments(&mu);
        let v = y.values();
        assert!(v[0].abs() < 1e-15, "{}", v[0]);
        for j in 1..=3 {
            assert!(v[2 * j - 1].abs() < 1e-14);
            let want = 2.0 * (std::f64::consts::PI * j as f64 * h).sin();
            assert!((v[2 * j] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn tv_norm_cases() {
        assert_eq!(AtomicMeasure::<f64>::from_pairs(&[(0.1, 2.0), (0.4, -3.0)]).tv_norm(), 5.0);
        assert_eq!(AtomicMeasure::<f64>::from_pairs(&[(0.1, 1.0), (0.1, -1.0)]).tv_norm(), 0.0);
        assert_eq!(AtomicMeasure::<f64>::empty().tv_norm(), 0.0);
    }

    #[test]
    fn canonicalize_cases() {
        let m = AtomicMeasure::<f64>::from_pairs(&[(0.1, 1.0), (0.1, 2.0)]).canonicalize(0.0);
        assert_eq!(m, AtomicMeasure::<f64>::from_pairs(&[(0.1, 3.0)]));

        let m = AtomicMeasure::<f64>::from_pairs(&[(0.1, 1.0), (0.1 + 1e-6, -1.0)]).canonicalize(1e-4);
        assert!(m.is_empty());

        let orig = AtomicMeasure::<f64>::from_pairs(&[(0.1, 1.0), (0.5, 1.0)]);
        assert_eq!(orig.canonicalize(1e-4), orig);
    }

    #[test]
    fn canonicalize_wraps_around_zero() {
        let m = AtomicMeasure::<f64>::from_pairs(&[(0.9999, 1.0), (0.0001, 1.0), (0.5, 1.0)]).canonicalize(1e-3);
        assert_eq!(m.len(), 2);
        let merged = m.atoms.iter().find(|a| a.a == 2.0).unwrap();
        assert!(merged.x.distance(TorusPoint::<f64>::new(0.0)) < 1e-12);
    }

    #[test]
    fn canonicalize_chains_transitively() {
        let m = AtomicMeasure::<f64>::from_pairs(&[(0.1, 1.0), (0.1008, 1.0), (0.1016, 1.0)]).canonicalize(1e-3);
        assert_eq!(m.len(), 1);
        assert!((m.atoms[0].x.value() - 0.1008).abs() < 1e-12);
    }

    #[test]
    fn trig_poly_eval() {
        let s = sys(3);
        let top = TrigPolynomial::<f64>::top_sine(s);
        for &t in &[0.0, 0.1, 0.37, 0.9] {
            let want = (2.0 * std::f64::consts::PI * 3.0 * t).sin();
            assert!((top.eval(TorusPoint::<f64>::new(t)) - want).abs() < 1e-14);
        }
        let one = TrigPolynomial::new(s, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(one.eval(TorusPoint::<f64>::new(0.77)), 1.0);
        let cos1 = TrigPolynomial::new(s, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(cos1.eval(TorusPoint::<f64>::new(0.0)), 1.0);
    }

    #[test]
    fn complex_moment_cases() {
        let y = MomentVector::new(sys(1), vec![1.0, 0.5, 0.2]).unwrap();
        let c = y.complex_moments();
        assert_eq!(c.c, vec![Complex::new(1.0, 0.0), Complex::new(0.5, -0.2)]);
        let z = MomentVector::<f64>::zeros(sys(2)).complex_moments();
        assert!(z.c.iter().all(|v| v.norm() == 0.0));
        let d = MomentVector::new(sys(2), vec![1.0, 1.0, 0.0, 1.0, 0.0]).unwrap().complex_moments();
        assert!(d.c.iter().all(|v| *v == Complex::new(1.0, 0.0)));
        assert_eq!(d.to_real().values(), &[1.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn json_schemas() {
        let mu = AtomicMeasure::<f64>::from_pairs(&[(0.125, 0.5)]);
        let s = serde_json::to_string(&mu).unwrap();
        assert_eq!(s, r#"{"atoms":[{"x":0.125,"a":0.5}]}"#);
        let y = MomentVector::new(sys(1), vec![1.0, 0.1, -0.3]).unwrap();
        let s = serde_json::to_string(&y).unwrap();
        assert_eq!(s, r#"{"f_c":1,"y":[1.0,0.1,-0.3]}"#);
        let bad: std::result::Result<MomentVector<f64>, _> = serde_json::from_str(r#"{"f_c":2,"y":[1.0]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn single_precision_instantiation() {
        let s = sys(2);
        let mu = AtomicMeasure::<f32>::from_pairs(&[(0.25, 1.0)]);
        let y = s.moments(&mu);
        assert!((y.values()[2] - 1.0).abs() < 1e-6);
        assert!((mu.tv_norm() - 1.0).abs() < 1e-6);
    }
}
