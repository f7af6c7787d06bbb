//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use representer::{Mat, Measure};

/// Solves the square system `m x = b` by Gaussian elimination with partial
/// pivoting; `None` when a pivot falls below `1e-10` relative.
pub fn gauss_solve(m: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut a: Vec<Vec<f64>> = m.iter().zip(b).map(|(row, bi)| row.iter().copied().chain([*bi]).collect()).collect();
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..=n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    Some(x)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Minimum of `Σ_{k ∉ free} |a_k|` over `A a = y` by enumerating every basic
/// solution: supports `S` of `k` columns and `k` rows with an invertible
/// `k × k` block whose solution satisfies all rows. `None` if infeasible.
pub fn brute_force_min_l1(a: &Mat, y: &[f64], free: &[usize]) -> Option<f64> {
    let (m, n) = (a.rows(), a.cols());
    let ynorm = y.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if ynorm == 0.0 {
        return Some(0.0);
    }
    let mut best: Option<f64> = None;
    for k in 1..=m.min(n) {
        for cols in subsets(n, k) {
            for rows in subsets(m, k) {
                let block: Vec<Vec<f64>> = rows.iter().map(|&i| cols.iter().map(|&j| a[(i, j)]).collect()).collect();
                let rhs: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
                let Some(x) = gauss_solve(&block, &rhs) else { continue };
                let mut full = vec![0.0; n];
                for (&j, v) in cols.iter().zip(&x) {
                    full[j] = *v;
                }
                let resid = (0..m)
                    .map(|i| ((0..n).map(|j| a[(i, j)] * full[j]).sum::<f64>() - y[i]).abs())
                    .fold(0.0, f64::max);
                if resid > 1e-9 * ynorm.max(1.0) {
                    continue;
                }
                let obj: f64 = (0..n).filter(|j| !free.contains(j)).map(|j| full[j].abs()).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    }
    best
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Largest position and amplitude errors under the best one-to-one atom
/// matching; `None` when the atom counts differ.
pub fn match_atoms(got: &Measure, want: &Measure) -> Option<(f64, f64)> {
    if got.len() != want.len() {
        return None;
    }
    let mut best: Option<(f64, f64)> = None;
    for p in permutations(got.len()) {
        let (mut dx, mut da) = (0.0f64, 0.0f64);
        for (i, &j) in p.iter().enumerate() {
            dx = dx.max(got.atoms[i].x.distance(want.atoms[j].x));
            da = da.max((got.atoms[i].a - want.atoms[j].a).abs());
        }
        if best.is_none_or(|(bx, ba)| dx.max(da) < bx.max(ba)) {
            best = Some((dx, da));
        }
    }
    best
}
