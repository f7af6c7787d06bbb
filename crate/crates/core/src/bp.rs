//! Basis pursuit for measures on the torus: grid LP, artifact merging,
//! continuous polishing of atom positions and extraction of the dual
//! trigonometric polynomial.

use serde::{Deserialize, Serialize};

use crate::certificate::{certified_sup_norm, default_n_check};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_svd, lstsq, Matrix};
use crate::lp::{solve_min_l1, L1Problem, L1Solution};
use crate::measures::{Atom, AtomicMeasure, MomentVector, TorusPoint, TrigPolynomial, TrigSystem};
use crate::scalar::{max_abs, norm2, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BpConfig<T> {
    pub grid_size: usize,
    pub merge_radius: T,
    /// Relative feasibility tolerance, scaled by `max(1, ‖y‖_∞)`.
    pub feas_tol: T,
    pub polish: bool,
    /// When set, a polished solve whose gap exceeds this fails.
    pub gap_tol: Option<T>,
}

impl<T: Real> BpConfig<T> {
    pub fn new(grid_size: usize) -> Self {
        Self {
            grid_size,
            merge_radius: T::lit(2.0) / T::from_usize_lossy(grid_size.max(1)),
            feas_tol: T::lit(1e-9),
            polish: false,
            gap_tol: None,
        }
    }

    pub fn with_polish(mut self, polish: bool) -> Self {
        self.polish = polish;
        self
    }

    pub fn validate(&self, sys: TrigSystem) -> Result<()> {
        if self.grid_size <= 4 * sys.f_c() {
            return Err(Error::InvalidParameter(format!(
                "grid size {} must exceed 4 f_c = {}",
                self.grid_size,
                4 * sys.f_c()
            )));
        }
        if !(self.merge_radius >= T::zero()) || !(self.feas_tol > T::zero()) {
            return Err(Error::InvalidParameter("merge_radius must be ≥ 0 and feas_tol > 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BpResult<T> {
    pub measure: AtomicMeasure<T>,
    pub dual: TrigPolynomial<T>,
    pub objective: T,
    /// `|μ|(T) − ⟨p, y⟩ / max(1, S)` with `S` a certified bound on `‖η‖_∞`.
    pub duality_gap: T,
    pub dual_sup_bound: T,
    pub lp_iterations: usize,
}

/// LP data for the nodes `i / n`.
pub fn grid_problem<T: Real>(y: &MomentVector<T>, n: usize) -> Result<L1Problem<T>> {
    let sys = y.system();
    let cols: Vec<Vec<T>> = (0..n).map(|i| sys.basis_vector(grid_node(i, n))).collect();
    L1Problem::new(Matrix::from_columns(sys.m(), &cols), y.values().to_vec(), &[])
}

fn grid_node<T: Real>(i: usize, n: usize) -> TorusPoint<T> {
    TorusPoint::new(T::from_usize_lossy(i) / T::from_usize_lossy(n))
}

pub fn extract_dual<T: Real>(sys: TrigSystem, sol: &L1Solution<T>) -> Result<TrigPolynomial<T>> {
    TrigPolynomial::new(sys, sol.dual.clone())
}

/// `‖moments(μ) − y‖_∞`.
pub fn moment_residual<T: Real>(mu: &AtomicMeasure<T>, y: &MomentVector<T>) -> T {
    y.system().moments(mu).distance(y)
}

/// Least-squares amplitudes on fixed positions.
pub fn refit_amplitudes<T: Real>(positions: &[TorusPoint<T>], y: &MomentVector<T>) -> AtomicMeasure<T> {
    let sys = y.system();
    let cols: Vec<Vec<T>> = positions.iter().map(|x| sys.basis_vector(*x)).collect();
    let a = lstsq(&Matrix::from_columns(sys.m(), &cols), y.values(), T::lit(1e-13));
    AtomicMeasure::new(positions.iter().zip(a).map(|(x, a)| Atom { x: *x, a }).collect())
}

fn feas_scale<T: Real>(y: &MomentVector<T>) -> T {
    y.sup_norm().max(T::one())
}

/// Gap against the continuous dual bound.
pub fn certified_gap<T: Real>(mu: &AtomicMeasure<T>, eta: &TrigPolynomial<T>, y: &MomentVector<T>, n_check: usize) -> Result<(T, T)> {
    let s = certified_sup_norm(eta, n_check)?;
    Ok((mu.tv_norm() - eta.pairing(y) / s.max(T::one()), s))
}

pub fn solve_bp_grid<T: Real>(y: &MomentVector<T>, cfg: &BpConfig<T>) -> Result<BpResult<T>> {
    let sys = y.system();
    cfg.validate(sys)?;
    if y.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("moments must be finite".into()));
    }
    let feas_tol = cfg.feas_tol * feas_scale(y);
    let n = cfg.grid_size;
    let prob = grid_problem(y, n)?;
    let sol = solve_min_l1(&prob, feas_tol)?.into_optimal()?;
    let lp_measure = AtomicMeasure::new(
        (0..n)
            .filter(|&i| sol.a[i] != T::zero())
            .map(|i| Atom { x: grid_node(i, n), a: sol.a[i] })
            .collect(),
    )
    .canonicalize(T::zero());
    let lp_tv = lp_measure.tv_norm();
    let same = T::lit(1e-12) * lp_tv.max(T::one());

    let merged = lp_measure.canonicalize(cfg.merge_radius);
    let merged = refit_amplitudes(&merged.positions().iter().map(|x| TorusPoint::new(*x)).collect::<Vec<_>>(), y);
    let merged_ok = moment_residual(&merged, y) <= feas_tol && (merged.tv_norm() - lp_tv).abs() <= same;
    let mut measure = if merged_ok { merged.canonicalize(T::zero()) } else { lp_measure.clone() };
    let mut dual = extract_dual(sys, &sol)?;

    let n_check = default_n_check(sys.f_c()).max(16 * n);
    let (mut gap, mut sup) = certified_gap(&measure, &dual, y, n_check)?;
    if cfg.polish && !measure.is_empty() {
        let start = if merged_ok { measure.clone() } else { merged };
        let opts = PolishOptions { feas_tol, merge_radius: cfg.merge_radius, ..PolishOptions::default() };
        let polished = polish_kkt(&start, y, Some(dual.coefficients()), &opts);
        let cand = polished.measure.canonicalize(T::zero());
        if moment_residual(&cand, y) <= feas_tol && cand.tv_norm() <= lp_tv + same {
            measure = cand;
            let (g, s) = certified_gap(&measure, &dual, y, n_check)?;
            gap = g;
            sup = s;
        }
        if let Some(p) = polished.dual {
            let eta = TrigPolynomial::new(sys, p)?;
            let (g, s) = certified_gap(&measure, &eta, y, n_check)?;
            if g.abs() < gap.abs() {
                dual = eta;
                gap = g;
                sup = s;
            }
        }
        if let Some(tol) = cfg.gap_tol {
            if gap > tol {
                return Err(Error::Numerical(format!("duality gap {gap} above tolerance {tol} after polish")));
            }
        }
    }
    Ok(BpResult { objective: measure.tv_norm(), measure, dual, duality_gap: gap, dual_sup_bound: sup, lp_iterations: sol.iterations })
}

#[derive(Clone, Copy, Debug)]
pub struct PolishOptions<T> {
    pub max_iter: usize,
    /// Stop once the largest coordinate update is at most this.
    pub step_tol: T,
    /// Absolute moment residual a polished measure must meet.
    pub feas_tol: T,
    /// Atoms drifting this close together are fused and the solve repeated.
    pub merge_radius: T,
}

impl<T: Real> Default for PolishOptions<T> {
    fn default() -> Self {
        Self { max_iter: 60, step_tol: T::lit(1e-14), feas_tol: T::lit(1e-9), merge_radius: T::lit(1e-6) }
    }
}

#[derive(Clone, Debug)]
pub struct Polished<T> {
    pub measure: AtomicMeasure<T>,
    /// Dual coefficients solving the optimality system, when it converged.
    pub dual: Option<Vec<T>>,
    pub kkt_residual: T,
    pub iterations: usize,
}

/// Refines positions so that the moments stay matched and a dual
/// polynomial touches `sign(a_i)` with zero slope at each atom.
///
/// Falls back to the input unless the result is feasible and its TV does not
/// exceed the input's (an infeasible input only needs a feasible output).
pub fn polish_atoms<T: Real>(mu: &AtomicMeasure<T>, y: &MomentVector<T>, opts: &PolishOptions<T>) -> AtomicMeasure<T> {
    let mu = mu.canonicalize(T::zero());
    if mu.is_empty() || mu.len() > y.system().m() {
        return mu;
    }
    let out = polish_kkt(&mu, y, None, opts).measure.canonicalize(T::zero());
    let input_feasible = moment_residual(&mu, y) <= opts.feas_tol;
    let slack = T::lit(1e-12) * mu.tv_norm().max(T::one());
    let ok = moment_residual(&out, y) <= opts.feas_tol && (!input_feasible || out.tv_norm() <= mu.tv_norm() + slack);
    if ok {
        out
    } else {
        mu
    }
}

struct Kkt<'a, T> {
    sys: TrigSystem,
    y: &'a [T],
    signs: Vec<T>,
}

impl<T: Real> Kkt<'_, T> {
    fn r(&self) -> usize {
        self.signs.len()
    }

    /// Unknowns `(x_1..x_r, a_1..a_r, p_0..p_{m−1})`.
    fn residual(&self, z: &[T]) -> Vec<T> {
        self.eval(z, false).0
    }

    fn eval(&self, z: &[T], jac: bool) -> (Vec<T>, Option<Matrix<T>>) {
        let (r, m) = (self.r(), self.sys.m());
        let scale = T::two_pi() * T::from_usize_lossy(self.sys.f_c());
        let (x, rest) = z.split_at(r);
        let (a, p) = rest.split_at(r);
        let mut res = vec![T::zero(); m + 2 * r];
        for (k, yk) in self.y.iter().enumerate() {
            res[k] = -*yk;
        }
        let mut j = if jac { Some(Matrix::zeros(m + 2 * r, 2 * r + m)) } else { None };
        for i in 0..r {
            let t = TorusPoint::new(x[i]);
            let phi = self.sys.basis_vector(t);
            let d1 = self.sys.basis_derivative(t);
            let d2 = basis_second(self.sys, t);
            let eta: T = p.iter().zip(&phi).map(|(u, v)| *u * *v).sum();
            let eta1: T = p.iter().zip(&d1).map(|(u, v)| *u * *v).sum();
            let eta2: T = p.iter().zip(&d2).map(|(u, v)| *u * *v).sum();
            for k in 0..m {
                res[k] = res[k] + a[i] * phi[k];
            }
            res[m + i] = eta - self.signs[i];
            res[m + r + i] = eta1 / scale;
            if let Some(j) = j.as_mut() {
                for k in 0..m {
                    j[(k, i)] = a[i] * d1[k];
                    j[(k, r + i)] = phi[k];
                    j[(m + i, 2 * r + k)] = phi[k];
                    j[(m + r + i, 2 * r + k)] = d1[k] / scale;
                }
                j[(m + i, i)] = eta1;
                j[(m + r + i, i)] = eta2 / scale;
            }
        }
        (res, j)
    }
}

fn basis_second<T: Real>(sys: TrigSystem, t: TorusPoint<T>) -> Vec<T> {
    let mut v = Vec::with_capacity(sys.m());
    v.push(T::zero());
    for j in 1..=sys.f_c() {
        let (c, s) = t.harmonic(j);
        let w = T::two_pi() * T::from_usize_lossy(j);
        v.push(-w * w * c);
        v.push(-w * w * s);
    }
    v
}

/// Minimum-norm `p` with `η(x_i) = sign(a_i)` and `η′(x_i) = 0`.
fn interpolating_dual<T: Real>(sys: TrigSystem, mu: &AtomicMeasure<T>) -> Vec<T> {
    let mut rows = Vec::with_capacity(2 * mu.len());
    let mut rhs = Vec::with_capacity(2 * mu.len());
    let scale = T::two_pi() * T::from_usize_lossy(sys.f_c());
    for atom in &mu.atoms {
        rows.push(sys.basis_vector(atom.x));
        rhs.push(atom.a.signum());
        rows.push(sys.basis_derivative(atom.x).into_iter().map(|v| v / scale).collect());
        rhs.push(T::zero());
    }
    lstsq(&Matrix::from_rows(&rows), &rhs, T::lit(1e-12))
}

/// Minimizer of a unimodal `f` on `[lo, hi]`.
fn golden_section<T: Real>(mut f: impl FnMut(T) -> T, mut lo: T, mut hi: T, tol: T) -> T {
    let g = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Gauss–Newton on the optimality system with a golden-section line search
/// on the residual norm. Atoms whose amplitude collapses or changes sign are
/// dropped, atoms that collide are fused, and the system is solved again on
/// the remaining support.
pub fn polish_kkt<T: Real>(mu: &AtomicMeasure<T>, y: &MomentVector<T>, p0: Option<&[T]>, opts: &PolishOptions<T>) -> Polished<T> {
    let sys = y.system();
    let mut p = match p0 {
        Some(p) => p.to_vec(),
        None => interpolating_dual(sys, mu),
    };
    let mut current = mu.clone();
    loop {
        let run = gauss_newton(&current, y, &p, opts);
        let amax = run.polished.measure.max_amplitude();
        let keep: Vec<Atom<T>> = run
            .polished
            .measure
            .atoms
            .iter()
            .zip(&current.atoms)
            .filter(|(new, old)| new.a.abs() > T::lit(COLLAPSE_REL) * amax && new.a.signum() == old.a.signum())
            .map(|(new, _)| *new)
            .collect();
        let next = AtomicMeasure::new(keep).canonicalize(opts.merge_radius);
        if next.len() == current.len() || next.is_empty() {
            return run.polished;
        }
        current = next;
        p = run.p;
    }
}

/// Relative amplitude below which a polished atom is considered spurious.
const COLLAPSE_REL: f64 = 1e-8;

struct PolishedRun<T> {
    polished: Polished<T>,
    p: Vec<T>,
}

fn gauss_newton<T: Real>(mu: &AtomicMeasure<T>, y: &MomentVector<T>, p: &[T], opts: &PolishOptions<T>) -> PolishedRun<T> {
    let sys = y.system();
    let r = mu.len();
    let kkt = Kkt { sys, y: y.values(), signs: mu.atoms.iter().map(|a| a.a.signum()).collect() };
    let mut z: Vec<T> = mu.positions();
    z.extend(mu.amplitudes());
    z.extend_from_slice(p);
    let mut norm = norm2(&kkt.residual(&z));
    let mut iterations = 0;
    for _ in 0..opts.max_iter {
        let (res, j) = kkt.eval(&z, true);
        let j = j.expect("jacobian requested");
        let neg: Vec<T> = res.iter().map(|v| -*v).collect();
        let step = jacobi_svd(&j).solve(&neg, T::lit(1e-12));
        let trial = |alpha: T| -> T {
            let zt: Vec<T> = z.iter().zip(&step).map(|(u, d)| *u + alpha * *d).collect();
            norm2(&kkt.residual(&zt))
        };
        let full = trial(T::one());
        let alpha = if full < norm { T::one() } else { golden_section(trial, T::zero(), T::one(), T::lit(1e-6)) };
        let new_norm = trial(alpha);
        if !(new_norm < norm) {
            break;
        }
        iterations += 1;
        for (u, d) in z.iter_mut().zip(&step) {
            *u = *u + alpha * *d;
        }
        norm = new_norm;
        if alpha * max_abs(&step) <= opts.step_tol {
            break;
        }
    }
    let measure = AtomicMeasure::new((0..r).map(|i| Atom { x: TorusPoint::new(z[i]), a: z[r + i] }).collect());
    let refit = refit_amplitudes(&measure.atoms.iter().map(|a| a.x).collect::<Vec<_>>(), y);
    let measure = if moment_residual(&refit, y) < moment_residual(&measure, y) { refit } else { measure };
    let converged = norm <= T::lit(1e-9) * feas_scale(y);
    let p = z[2 * r..].to_vec();
    PolishedRun { polished: Polished { measure, dual: converged.then(|| p.clone()), kkt_residual: norm, iterations }, p }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{comb_indices, comb_node, oracle_solution, two_spike_moments};

    fn sys(f_c: usize) -> TrigSystem {
        TrigSystem::new(f_c).unwrap()
    }

    #[test]
    fn zero_moments_give_empty_measure() {
        let y = MomentVector::<f64>::zeros(sys(2));
        let out = solve_bp_grid(&y, &BpConfig::new(64)).unwrap();
        assert!(out.measure.is_empty());
        assert_eq!(out.objective, 0.0);
        assert!(out.dual.coefficients().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn on_grid_spike() {
        let y = sys(2).moments(&AtomicMeasure::<f64>::from_pairs(&[(0.25, 1.0)]));
        let out = solve_bp_grid(&y, &BpConfig::new(2048)).unwrap();
        assert_eq!(out.measure.len(), 1);
        assert!((out.measure.atoms[0].x.value() - 0.25).abs() < 1e-15);
        assert!((out.measure.atoms[0].a - 1.0).abs() < 1e-12);
        assert!((out.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_spike_grid_matches_comb() {
        let h = 0.1;
        let y = two_spike_moments::<f64>(2, h).unwrap();
        let out = solve_bp_grid(&y, &BpConfig::new(4096)).unwrap();
        let (oracle, _) = oracle_solution::<f64>(2, h).unwrap();
        assert_eq!(out.measure.len(), 4);
        for (got, want) in out.measure.sorted().atoms.iter().zip(oracle.sorted().atoms.iter()) {
            assert!(got.x.distance(want.x) < 1e-3);
            assert!((got.a - want.a).abs() < 1e-3);
        }
    }

    #[test]
    fn polished_two_spike_dual_is_top_sine() {
        let y = two_spike_moments::<f64>(2, 0.1).unwrap();
        let out = solve_bp_grid(&y, &BpConfig::new(512).with_polish(true)).unwrap();
        let top = TrigPolynomial::<f64>::top_sine(sys(2));
        for (p, q) in out.dual.coefficients().iter().zip(top.coefficients()) {
            assert!((p - q).abs() < 1e-6, "{p} vs {q}");
        }
        assert_eq!(out.measure.len(), 4);
        for j in comb_indices(2) {
            let t = TorusPoint::new(comb_node::<f64>(2, j));
            assert!(out.measure.atoms.iter().any(|a| a.x.distance(t) < 1e-6));
        }
        assert!(out.duality_gap.abs() < 1e-6);
    }

    #[test]
    fn off_grid_spike_is_polished() {
        let y = sys(2).moments(&AtomicMeasure::<f64>::from_pairs(&[(0.2501, 1.0)]));
        let out = solve_bp_grid(&y, &BpConfig::new(1000).with_polish(true)).unwrap();
        assert_eq!(out.measure.len(), 1);
        assert!((out.measure.atoms[0].x.value() - 0.2501).abs() < 1e-8);
    }

    #[test]
    fn single_spike_dual_touches_one() {
        let y = sys(1).moments(&AtomicMeasure::<f64>::from_pairs(&[(0.25, 1.0)]));
        let out = solve_bp_grid(&y, &BpConfig::new(256)).unwrap();
        assert!((out.dual.eval(TorusPoint::new(0.25)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn polish_keeps_oracle_fixed_point() {
        let (mu, _) = oracle_solution::<f64>(3, 0.1).unwrap();
        let y = sys(3).moments(&mu);
        let out = polish_atoms(&mu, &y, &PolishOptions::default());
        for (a, b) in out.sorted().atoms.iter().zip(mu.sorted().atoms.iter()) {
            assert!(a.x.distance(b.x) < 1e-12);
            assert!((a.a - b.a).abs() < 1e-9);
        }
    }

    #[test]
    fn small_grid_is_rejected() {
        let y = MomentVector::<f64>::zeros(sys(2));
        assert!(solve_bp_grid(&y, &BpConfig::new(8)).is_err());
    }
}
