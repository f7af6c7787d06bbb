//! Roots of complex polynomials by Aberth–Ehrlich simultaneous iteration.

use num_complex::Complex;

use crate::scalar::Real;

const MAX_ITER: usize = 500;

fn horner<T: Real>(coef: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    // coef[k] multiplies z^k
    let zero = Complex::new(T::zero(), T::zero());
    let mut p = zero;
    let mut dp = zero;
    for c in coef.iter().rev() {
        dp = dp * z + p;
        p = p * z + *c;
    }
    (p, dp)
}

/// All roots of `Σ coef[k] z^k`. Leading coefficients that vanish relative
/// to the largest one are trimmed first (those roots sit at infinity).
pub fn polynomial_roots<T: Real>(coef: &[Complex<T>]) -> Vec<Complex<T>> {
    let scale = coef.iter().fold(T::zero(), |m, c| m.max(c.norm()));
    if scale == T::zero() {
        return Vec::new();
    }
    let cut = scale * T::epsilon() * T::lit(16.0);
    let mut deg = coef.len() - 1;
    while deg > 0 && coef[deg].norm() <= cut {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = coef[deg];
    let monic: Vec<Complex<T>> = coef[..=deg].iter().map(|c| *c / lead).collect();

    // Starting points on a circle of the geometric-mean radius, rotated off
    // the real axis to avoid symmetric stalls.
    let radius = {
        let c0 = monic[0].norm();
        if c0 > T::zero() {
            c0.powf(T::one() / T::from_usize_lossy(deg))
        } else {
            T::one()
        }
    };
    let mut z: Vec<Complex<T>> = (0..deg)
        .map(|k| {
            let ang = T::two_pi() * T::from_usize_lossy(k) / T::from_usize_lossy(deg) + T::lit(0.4);
            Complex::from_polar(radius, ang)
        })
        .collect();

    let tol = T::epsilon() * T::lit(4.0);
    for _ in 0..MAX_ITER {
        let mut max_step = T::zero();
        for k in 0..deg {
            let (p, dp) = horner(&monic, z[k]);
            if p.norm() == T::zero() {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex::new(T::zero(), T::zero());
            for j in 0..deg {
                if j != k {
                    s = s + Complex::new(T::one(), T::zero()) / (z[k] - z[j]);
                }
            }
            let w = ratio / (Complex::new(T::one(), T::zero()) - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[k] = z[k] - w;
                max_step = max_step.max(w.norm() / z[k].norm().max(T::one()));
            }
        }
        if max_step <= tol {
            break;
        }
    }
    // Newton polish.
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&monic, *zk);
            if dp.norm() == T::zero() {
                break;
            }
            let step = p / dp;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            *zk = *zk - step;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn cube_roots_of_unity() {
        // z^3 - 1
        let roots = polynomial_roots(&[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(roots.len(), 3);
        for r in &roots {
            assert!((r.powu(3) - c(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn trims_vanishing_leading_terms() {
        // 2 - z, padded with a zero z^2 term
        let roots = polynomial_roots(&[c(2.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn complex_coefficients() {
        // (z - i)(z - 2) = z^2 - (2 + i) z + 2i
        let roots = polynomial_roots(&[c(0.0, 2.0), c(-2.0, -1.0), c(1.0, 0.0)]);
        let mut found_i = false;
        let mut found_2 = false;
        for r in roots {
            found_i |= (r - c(0.0, 1.0)).norm() < 1e-12;
            found_2 |= (r - c(2.0, 0.0)).norm() < 1e-12;
        }
        assert!(found_i && found_2);
    }
}
