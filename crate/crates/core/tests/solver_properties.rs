mod common;

use representer::bp::{moment_residual, solve_bp_grid, BpConfig};
use representer::instances::{
    feature_instance, psd_instance, rng, separated_nonneg_measure, separated_positions, signed_measure, spline_problem,
    trial_seed, uniform,
};
use representer::sparsify::{barvinok_rank_bound, caratheodory_prune, psd_rank_reduce};
use representer::spline::solve_spline;
use representer::toeplitz::{build_toeplitz, diagnose, recover_charging, recover_nonneg_with, Recovery, ToeplitzTolerances};
use representer::sparsify::FeatureInstance;
use representer::{Atom, Measure, Point, TrigSystem};

use common::match_atoms;

#[test]
fn pruning_is_safe() {
    for trial in 0..500u64 {
        let mut g = rng(trial_seed(11, trial));
        let m = 2 + (trial % 7) as usize;
        let r = m + 1 + (trial as usize * 7) % (50 - m);
        let inst = feature_instance(&mut g, m, r);
        let out = caratheodory_prune(&inst).unwrap();
        assert!(out.instance.residual() <= 1e-9, "trial {trial}: drift {}", out.instance.residual());
        assert!(out.instance.tv() <= inst.tv() + 1e-12, "trial {trial}");
        assert!(out.instance.atom_count() <= m);
        for (k, &i) in out.kept.iter().enumerate() {
            assert_eq!(out.instance.features.column(k), inst.features.column(i));
        }
    }
}

#[test]
fn pruning_trigonometric_atoms() {
    let sys = TrigSystem::new(1).unwrap();
    for trial in 0..50 {
        let mut g = rng(trial_seed(5, trial));
        let mu = signed_measure(&mut g, 10);
        let mu = Measure::new(mu.atoms.iter().map(|a| Atom { x: a.x, a: a.a.abs() }).collect());
        let mu = mu.scaled(1.0 / mu.tv_norm());
        let inst = FeatureInstance::from_measure(sys, &mu);
        let out = caratheodory_prune(&inst).unwrap();
        let pruned = out.to_measure(&mu);
        assert!(pruned.len() <= 3);
        assert!(moment_residual(&pruned, &sys.moments(&mu)) <= 1e-10);
        assert!(pruned.tv_norm() <= mu.tv_norm() + 1e-12);
    }
}

#[test]
fn psd_rank_reduction_properties() {
    for trial in 0..40u64 {
        let mut g = rng(trial_seed(99, trial));
        let n = 3 + (trial % 6) as usize;
        let m = 1 + (trial % 7) as usize;
        let inst = psd_instance(&mut g, n, m);
        let out = psd_rank_reduce(&inst).unwrap();
        assert!(out.ranks.windows(2).all(|w| w[1] < w[0]), "{:?}", out.ranks);
        assert!(out.iterations() <= n);
        let r = out.final_rank();
        assert!(r * (r + 1) / 2 <= m);
        assert!(r <= barvinok_rank_bound(m));
        assert!(out.instance.drift() <= 1e-8);
        assert!(out.instance.min_eigenvalue() >= -1e-9);
    }
}

#[test]
fn toeplitz_rank_equals_cardinality() {
    for trial in 0..100u64 {
        let mut g = rng(trial_seed(3, trial));
        let f_c = 1 + (trial % 5) as usize;
        let r = (trial as usize / 5) % (f_c + 1);
        let mu = separated_nonneg_measure(&mut g, f_c, r);
        let y = TrigSystem::new(f_c).unwrap().moments(&mu);
        let tol = ToeplitzTolerances::default();
        let d = diagnose(&build_toeplitz(&y), tol.psd_tol, tol.rank_tol);
        assert!(d.is_psd);
        assert_eq!(d.rank, r);
        let report = recover_nonneg_with(&y, &tol).unwrap();
        let Recovery::Unique(got) = report.recovery else { panic!("trial {trial}: expected unique recovery") };
        let (dx, da) = match_atoms(&got, &mu).unwrap();
        assert!(dx <= 1e-6 && da <= 1e-6);
        if let Some(min) = report.min_amplitude {
            assert!(min >= -1e-10);
        }
    }
}

#[test]
fn charging_gives_full_positive_support() {
    for trial in 0..50u64 {
        let mut g = rng(trial_seed(77, trial));
        let f_c = 1 + (trial % 4) as usize;
        let sys = TrigSystem::new(f_c).unwrap();
        let xs = separated_positions(&mut g, f_c + 1, 0.3 / f_c as f64);
        let mu = Measure::new(xs.into_iter().map(|x| Atom::new(x, uniform(&mut g, 0.5, 2.0))).collect());
        let y = sys.moments(&mu);
        let t0 = Point::new(uniform(&mut g, 0.0, 1.0));
        let out = recover_charging(&y, t0).unwrap();
        assert_eq!(out.len(), f_c + 1);
        assert!(out.atoms.iter().all(|a| a.a > 0.0));
        assert!(out.atoms.iter().any(|a| a.x.distance(t0) < 1e-12));
        assert!(moment_residual(&out, &y) <= 1e-8);
    }
}

#[test]
fn bp_vertex_count_feasibility_and_duality() {
    for trial in 0..40u64 {
        let mut g = rng(trial_seed(21, trial));
        let f_c = 1 + (trial % 4) as usize;
        let sys = TrigSystem::new(f_c).unwrap();
        let mu = signed_measure(&mut g, 1 + (trial as usize % (3 * f_c)));
        let y = sys.moments(&mu);
        let cfg = BpConfig::new(256);
        let out = solve_bp_grid(&y, &cfg).unwrap();
        assert!(out.measure.len() <= sys.m());
        let tol = cfg.feas_tol * y.sup_norm().max(1.0);
        assert!(moment_residual(&out.measure, &y) <= tol);
        assert!(out.duality_gap >= -1e-9);
        let lp_gap = (out.objective - out.dual.pairing(&y)).abs();
        assert!(lp_gap <= 1e-6, "trial {trial}: |objective − ⟨p,y⟩| = {lp_gap}");
    }
}

#[test]
fn bp_objective_is_monotone_under_refinement() {
    for trial in 0..20u64 {
        let mut g = rng(trial_seed(31, trial));
        let f_c = 1 + (trial % 3) as usize;
        let y = TrigSystem::new(f_c).unwrap().moments(&signed_measure(&mut g, 2 * f_c));
        let mut prev = f64::INFINITY;
        for n in [32usize, 64, 128, 256, 512] {
            let obj = solve_bp_grid(&y, &BpConfig::new(n)).unwrap().objective;
            assert!(obj <= prev + 1e-9, "trial {trial}, N={n}: {obj} > {prev}");
            prev = obj;
        }
    }
}

#[test]
fn spline_knot_bound_and_interpolation() {
    for trial in 0..30u64 {
        let mut g = rng(trial_seed(41, trial));
        let order = 1 + (trial % 3) as usize;
        let m = order + 1 + (trial as usize / 3) % (10 - order);
        let prob = spline_problem(&mut g, order, m, 128);
        let sol = solve_spline(&prob).unwrap();
        assert!(sol.model.knots.len() <= m - sol.poly_rank);
        for p in &prob.samples {
            assert!((sol.model.eval(p.s) - p.y).abs() <= 1e-8);
        }
        assert_eq!(sol.objective, sol.model.tv());
    }
}
