//! End-to-end acceptance checks, one line per criterion.

mod common;

use std::time::{Duration, Instant};

use representer::bp::{solve_bp_grid, BpConfig};
use representer::instances::{
    psd_instance, rng, separated_nonneg_measure, signed_measure, spline_problem, trial_seed, uniform,
    uniform_matrix,
};
use representer::lp::{solve_min_l1, L1Problem};
use representer::oracle::{amplitudes_via_dft, comb_amplitudes, comb_indices, comb_node, oracle_boundary, two_spike_moments};
use representer::sparsify::{barvinok_rank_bound, caratheodory_prune, prune_columns, psd_rank_reduce, FeatureInstance};
use representer::spline::{solve_spline, DEFAULT_KNOT_GRID};
use representer::toeplitz::{recover_nonneg, Recovery};
use representer::{Mat, Measure, MomentVector, Poly, TrigSystem};

use common::{brute_force_min_l1, match_atoms};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn two_spike_reproduction() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut slowest = Duration::ZERO;
    let mut pass = true;
    for f_c in 1..=3usize {
        let h = 0.5 / (2.0 * f_c as f64);
        let start = Instant::now();
        let y = two_spike_moments::<f64>(f_c, h).unwrap();
        let out = solve_bp_grid(&y, &BpConfig::new(4096).with_polish(true)).unwrap();
        slowest = slowest.max(start.elapsed());

        let closed = comb_amplitudes::<f64>(f_c, h).unwrap();
        let dft = amplitudes_via_dft(&y).unwrap().amplitudes;
        let oracle_agree = closed.iter().zip(&dft).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let expected = Measure::new(
            comb_indices(f_c)
                .zip(&closed)
                .map(|(j, a)| representer::Atom::new(comb_node::<f64>(f_c, j), *a))
                .collect(),
        );
        let count_ok = out.measure.len() == 2 * f_c;
        let (dx, da_rel) = match match_atoms(&out.measure, &expected) {
            Some(_) => {
                let mut dx = 0.0f64;
                let mut da = 0.0f64;
                for want in &expected.atoms {
                    let got = out.measure.atoms.iter().min_by(|a, b| a.x.distance(want.x).total_cmp(&b.x.distance(want.x))).unwrap();
                    dx = dx.max(got.x.distance(want.x));
                    da = da.max((got.a - want.a).abs() / want.a.abs());
                }
                (dx, da)
            }
            None => (f64::INFINITY, f64::INFINITY),
        };
        let top = Poly::top_sine(y.system());
        let dual_err = out.dual.coefficients().iter().zip(top.coefficients()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        pass &= count_ok
            && dx <= 1e-3
            && da_rel <= 1e-3
            && out.duality_gap <= 1e-6
            && dual_err <= 1e-4
            && oracle_agree <= 1e-11
            && start.elapsed() < Duration::from_secs(30);
        worst = (worst.0.max(dx), worst.1.max(da_rel), worst.2.max(out.duality_gap), worst.3.max(dual_err), worst.4.max(oracle_agree));
    }
    outcome(
        pass,
        format!(
            "max position err {:.1e}, max rel amplitude err {:.1e}, max gap {:.1e}, max dual err {:.1e}, closed-form vs DFT {:.1e}, slowest {:?}",
            worst.0, worst.1, worst.2, worst.3, worst.4, slowest
        ),
    )
}

fn boundary_recovery() -> Outcome {
    let mut worst = 0.0f64;
    let mut pass = true;
    for f_c in 1..=4usize {
        let expected = oracle_boundary::<f64>(f_c).unwrap();
        let y = TrigSystem::new(f_c).unwrap().moments(&expected);
        let out = solve_bp_grid(&y, &BpConfig::new(4096).with_polish(true)).unwrap();
        match match_atoms(&out.measure, &expected) {
            Some((dx, da)) => {
                worst = worst.max(dx).max(da);
                pass &= dx <= 1e-6 && da <= 1e-6;
            }
            None => {
                pass = false;
                worst = f64::INFINITY;
            }
        }
    }
    outcome(pass, format!("max position/amplitude err {worst:.1e} over f_c = 1..4"))
}

fn atom_count_bound() -> Outcome {
    let mut violations = 0;
    let mut max_excess = i64::MIN;
    for trial in 0..200u64 {
        let mut g = rng(trial_seed(3000, trial));
        let f_c = 1 + (trial % 4) as usize;
        let sys = TrigSystem::new(f_c).unwrap();
        let r = 1 + (trial as usize * 5) % (4 * f_c + 4);
        let mu = signed_measure(&mut g, r);
        let y = sys.moments(&mu);
        let bp = solve_bp_grid(&y, &BpConfig::new(256)).unwrap();
        let pruned = caratheodory_prune(&FeatureInstance::from_measure(sys, &mu.canonicalize(0.0))).unwrap();
        for count in [bp.measure.len(), pruned.instance.atom_count()] {
            max_excess = max_excess.max(count as i64 - sys.m() as i64);
            if count > sys.m() {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations; max (atoms − (2f_c+1)) = {max_excess}"))
}

fn toeplitz_round_trip() -> Outcome {
    let mut failures = 0;
    let mut worst = 0.0f64;
    for trial in 0..200u64 {
        let mut g = rng(trial_seed(4000, trial));
        let f_c = 1 + (trial % 5) as usize;
        let r = 1 + (trial as usize / 5) % f_c;
        let mu = separated_nonneg_measure(&mut g, f_c, r);
        let y = TrigSystem::new(f_c).unwrap().moments(&mu);
        match recover_nonneg(&y) {
            Ok(Recovery::Unique(got)) => match match_atoms(&got, &mu) {
                Some((dx, da)) if dx <= 1e-6 && da <= 1e-6 => worst = worst.max(dx).max(da),
                _ => failures += 1,
            },
            _ => failures += 1,
        }
    }
    let negative = MomentVector::new(TrigSystem::new(1).unwrap(), vec![0.0, 1.0, 0.0]).unwrap();
    let rejected = matches!(recover_nonneg(&negative), Ok(Recovery::NoSolution));
    outcome(
        failures == 0 && rejected,
        format!("{}/200 recovered, max err {worst:.1e}; c = (0, 1) rejected: {rejected}", 200 - failures),
    )
}

fn barvinok_bound() -> Outcome {
    let bound = barvinok_rank_bound(5);
    let (mut max_rank, mut max_drift, mut min_eig) = (0usize, 0.0f64, f64::INFINITY);
    let mut slowest = Duration::ZERO;
    let mut errors = 0;
    for trial in 0..100u64 {
        let mut g = rng(trial_seed(5000, trial));
        let inst = psd_instance(&mut g, 10, 5);
        let start = Instant::now();
        match psd_rank_reduce(&inst) {
            Ok(out) => {
                slowest = slowest.max(start.elapsed());
                max_rank = max_rank.max(out.final_rank());
                max_drift = max_drift.max(out.instance.drift());
                min_eig = min_eig.min(out.instance.min_eigenvalue());
            }
            Err(_) => errors += 1,
        }
    }
    let pass = errors == 0 && bound == 2 && max_rank <= 2 && max_drift <= 1e-8 && min_eig >= -1e-9 && slowest < Duration::from_secs(5);
    outcome(
        pass,
        format!("max rank {max_rank} (bound {bound}), max drift {max_drift:.1e}, min eigenvalue {min_eig:.1e}, slowest {slowest:?}, errors {errors}"),
    )
}

fn spline_knot_bound() -> Outcome {
    let (mut violations, mut max_resid, mut errors) = (0, 0.0f64, 0);
    for trial in 0..100u64 {
        let mut g = rng(trial_seed(6000, trial));
        let order = 1 + (trial % 3) as usize;
        let m = order + 1 + (trial as usize / 3) % (10 - order);
        let prob = spline_problem(&mut g, order, m, DEFAULT_KNOT_GRID);
        match solve_spline(&prob) {
            Ok(sol) => {
                if sol.model.knots.len() > m - sol.poly_rank {
                    violations += 1;
                }
                for p in &prob.samples {
                    max_resid = max_resid.max((sol.model.eval(p.s) - p.y).abs());
                }
            }
            Err(_) => errors += 1,
        }
    }
    outcome(
        violations == 0 && errors == 0 && max_resid <= 1e-8,
        format!("{violations} knot-bound violations, max interpolation residual {max_resid:.1e}, errors {errors}"),
    )
}

/// Optimal but non-vertex inputs: the midpoint of two LP optima (forward and
/// reversed column order) spread over both copies of each column of `[B | B]`.
fn pruning_optimality() -> Outcome {
    let (mut worst, mut max_resid, mut min_support_excess, mut errors) = (0.0f64, 0.0f64, usize::MAX, 0);
    for trial in 0..100u64 {
        let mut g = rng(trial_seed(7000, trial));
        let m = 2 + (trial % 5) as usize;
        let k = m + 2 + (trial as usize % 6);
        let b = uniform_matrix(&mut g, m, k);
        let y: Vec<f64> = (0..m).map(|_| uniform(&mut g, -1.0, 1.0)).collect();
        let forward = solve_min_l1(&L1Problem::new(b.clone(), y.clone(), &[]).unwrap(), 1e-10).unwrap();
        let rev_idx: Vec<usize> = (0..k).rev().collect();
        let reversed = solve_min_l1(&L1Problem::new(b.select_columns(&rev_idx), y.clone(), &[]).unwrap(), 1e-10).unwrap();
        let mut backward = vec![0.0; k];
        for (pos, &i) in rev_idx.iter().enumerate() {
            backward[i] = reversed.a[pos];
        }
        let mut cols: Vec<Vec<f64>> = Vec::new();
        let mut amps = Vec::new();
        for i in 0..k {
            let w = uniform(&mut g, 0.2, 0.8);
            let avg = 0.5 * (forward.a[i] + backward[i]);
            cols.push(b.column(i));
            amps.push(w * avg);
            cols.push(b.column(i));
            amps.push((1.0 - w) * avg);
        }
        let features = Mat::from_columns(m, &cols);
        let input_tv: f64 = amps.iter().map(|a| a.abs()).sum();
        let support = amps.iter().filter(|a| **a != 0.0).count();
        min_support_excess = min_support_excess.min(support.saturating_sub(m));
        match prune_columns(&features, &amps, &[], &[]) {
            Ok((kept, out, _, _)) => {
                let tv: f64 = out.iter().map(|a| a.abs()).sum();
                worst = worst.max((tv - input_tv).abs());
                let fit = features.select_columns(&kept).matvec(&out);
                max_resid = fit.iter().zip(&y).fold(max_resid, |r, (p, q)| r.max((p - q).abs()));
            }
            Err(_) => errors += 1,
        }
        worst = worst.max((input_tv - forward.objective).abs());
    }
    outcome(
        worst <= 1e-10 && max_resid <= 1e-9 && errors == 0,
        format!("max |TV(pruned) − TV(input)| {worst:.1e}, max residual {max_resid:.1e}, min input support beyond m {min_support_excess}, errors {errors}"),
    )
}

fn lp_oracle_equivalence() -> Outcome {
    let (mut count, mut worst, mut mismatches) = (0, 0.0f64, 0);
    for m in 1..=4usize {
        for n in 1..=8usize {
            for t in 0..8u64 {
                let mut g = rng(trial_seed(8000 + 16 * m as u64 + n as u64, t));
                let a = if t % 2 == 0 { uniform_matrix(&mut g, m, n) } else { Mat::from_fn(m, n, |_, _| uniform(&mut g, -2.5, 2.5).round()) };
                let y: Vec<f64> = if t % 4 < 2 {
                    let x: Vec<f64> = (0..n).map(|_| uniform(&mut g, -1.0, 1.0)).collect();
                    a.matvec(&x)
                } else {
                    (0..m).map(|_| uniform(&mut g, -1.0, 1.0)).collect()
                };
                let free: Vec<usize> = if t % 3 == 2 { vec![0] } else { vec![] };
                let expect = brute_force_min_l1(&a, &y, &free);
                let sol = solve_min_l1(&L1Problem::new(a, y, &free).unwrap(), 1e-9).unwrap();
                count += 1;
                match (expect, sol.into_optimal()) {
                    (Some(obj), Ok(s)) => {
                        let err = (s.objective - obj).abs();
                        worst = worst.max(err);
                        if err > 1e-9 {
                            mismatches += 1;
                        }
                    }
                    (None, Err(_)) => {}
                    _ => mismatches += 1,
                }
            }
        }
    }
    outcome(mismatches == 0, format!("{count} instances, {mismatches} mismatches, max objective err {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("two-spike reproduction", two_spike_reproduction),
        ("boundary two-spike is exact", boundary_recovery),
        ("atom count at most 2f_c+1", atom_count_bound),
        ("Caratheodory-Toeplitz round trip", toeplitz_round_trip),
        ("Barvinok rank bound", barvinok_bound),
        ("spline knot bound", spline_knot_bound),
        ("pruning preserves optimality", pruning_optimality),
        ("LP matches vertex enumeration", lp_oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        println!("{} criterion {}: {name}: {} [{:.2?}]", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail, start.elapsed());
        failed += usize::from(!o.pass);
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
