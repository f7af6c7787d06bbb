use std::path::Path;

use anyhow::Result;
use representer::bp::{moment_residual, solve_bp_grid, BpConfig};
use representer::certificate::{certify, default_n_check};
use representer::oracle::{amplitudes_via_dft, comb_amplitudes, comb_indices, comb_node, oracle_solution, two_spike_moments};
use representer::sparsify::{barvinok_rank_bound, caratheodory_prune, psd_rank_reduce, FeatureInstance, PsdInstance, PsdTolerances, FEAS_TOL};
use representer::spline::{solve_spline, SplineProblem};
use representer::toeplitz::{build_toeplitz, diagnose, recover_charging, recover_nonneg_with, Recovery, ToeplitzTolerances};
use representer::{Measure, Moments, Point, Poly};
use serde_json::{json, Value};

use crate::io::{csv_string, read_json, read_samples, write_csv};
use crate::report::{usage, Check, ExperimentReport};

/// Largest position and amplitude error when each wanted atom is matched to
/// its nearest recovered atom; amplitude errors are relative when `relative`.
pub fn atom_errors(got: &Measure, want: &Measure, relative: bool) -> (f64, f64) {
    let (mut dx, mut da) = (0.0f64, 0.0f64);
    for w in &want.atoms {
        let Some(g) = got.atoms.iter().min_by(|a, b| a.x.distance(w.x).total_cmp(&b.x.distance(w.x))) else {
            return (f64::INFINITY, f64::INFINITY);
        };
        dx = dx.max(g.x.distance(w.x));
        let scale = if relative { w.a.abs() } else { 1.0 };
        da = da.max((g.a - w.a).abs() / scale);
    }
    (dx, da)
}

fn feas_bound(y: &Moments, tol: f64) -> f64 {
    tol * y.sup_norm().max(1.0)
}

pub fn bp_solve(y: &Moments, grid: usize, polish: bool, tol: Option<f64>) -> Result<ExperimentReport> {
    let cfg = BpConfig::new(grid).with_polish(polish);
    let out = solve_bp_grid(y, &cfg)?;
    let m = y.system().m();
    let mut checks = vec![
        Check::at_most("moment_residual", moment_residual(&out.measure, y), feas_bound(y, cfg.feas_tol)),
        Check::at_most("atom_count", out.measure.len() as f64, m as f64),
    ];
    if polish {
        checks.push(Check::at_most("duality_gap", out.duality_gap, tol.unwrap_or(1e-6)));
    }
    let inputs = json!({ "f_c": y.system().f_c(), "y": y.values(), "grid": grid, "polish": polish });
    Ok(ExperimentReport::new("bp solve", inputs, serde_json::to_value(&out)?, checks))
}

/// Dual given as `{"f_c": .., "p": [..]}` or a bare coefficient array.
fn read_dual(arg: &str, y: &Moments) -> Result<Poly> {
    let v: Value = read_json(arg, "dual")?;
    if v.is_array() {
        let p: Vec<f64> = serde_json::from_value(v).map_err(|e| usage(format!("cannot parse dual: {e}")))?;
        return Poly::new(y.system(), p).map_err(|e| usage(e.to_string()));
    }
    serde_json::from_value(v).map_err(|e| usage(format!("cannot parse dual: {e}")))
}

pub fn bp_certify(measure: &str, dual: &str, y: &Moments, tol: Option<f64>, n_check: Option<usize>) -> Result<ExperimentReport> {
    let mu: Measure = read_json(measure, "measure")?;
    let eta = read_dual(dual, y)?;
    let tol = tol.unwrap_or(1e-6);
    let n_check = n_check.unwrap_or_else(|| default_n_check(y.system().f_c()));
    let report = certify(&mu, &eta, y, tol, n_check).map_err(|e| usage(e.to_string()))?;
    let checks = vec![
        Check::at_most("sup_norm_excess", report.sup_norm_bound - 1.0, tol),
        Check::at_most("extremality_max_err", report.extremality_max_err, tol),
        Check::at_most("duality_gap", report.gap.abs(), tol),
    ];
    let inputs = json!({ "measure": mu, "dual": eta, "y": y, "tol": tol, "n_check": n_check });
    Ok(ExperimentReport::new("bp certify", inputs, serde_json::to_value(&report)?, checks))
}

pub fn oracle_checks(f_c: usize, h: f64) -> Result<(Vec<f64>, Vec<Check>)> {
    let closed = comb_amplitudes::<f64>(f_c, h)?;
    let dft = amplitudes_via_dft(&two_spike_moments::<f64>(f_c, h)?)?;
    let agree = closed.iter().zip(&dft.amplitudes).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let checks = vec![
        Check::at_most("closed_form_vs_dft", agree, 1e-11),
        Check::at_most("dft_top_residual", dft.top_residual, 1e-11),
    ];
    Ok((closed, checks))
}

pub fn oracle_two_spike(f_c: usize, h: f64) -> Result<ExperimentReport> {
    crate::experiments::validate_two_spike(f_c, h, false)?;
    let (mu, eta) = oracle_solution::<f64>(f_c, h)?;
    let (_, checks) = oracle_checks(f_c, h)?;
    let outputs = json!({ "measure": mu, "dual": eta, "moments": two_spike_moments::<f64>(f_c, h)? });
    Ok(ExperimentReport::new("oracle two-spike", json!({ "f_c": f_c, "h": h }), outputs, checks))
}

/// `(j, t_j, a_j)` rows of the comb.
pub fn oracle_table(f_c: usize, h: f64) -> Result<(String, Vec<Check>)> {
    crate::experiments::validate_two_spike(f_c, h, false)?;
    let (closed, checks) = oracle_checks(f_c, h)?;
    let rows = comb_indices(f_c)
        .zip(&closed)
        .map(|(j, a)| vec![j.to_string(), comb_node::<f64>(f_c, j).to_string(), a.to_string()]);
    Ok((csv_string(&["j", "t_j", "a_j"], rows)?, checks))
}

pub fn moment_recover(y: &Moments, charge: Option<f64>, tol: Option<f64>) -> Result<ExperimentReport> {
    let tols = ToeplitzTolerances::default();
    let (branch, measure, diagnosis, min_amplitude) = match charge {
        Some(t0) => {
            let diagnosis = diagnose(&build_toeplitz(y), tols.psd_tol, tols.rank_tol);
            let mu = recover_charging(y, Point::new(t0))?;
            ("charged", Some(mu), diagnosis, None)
        }
        None => {
            let report = recover_nonneg_with(y, &tols)?;
            let (branch, mu) = match report.recovery {
                Recovery::Unique(mu) => ("unique", Some(mu)),
                Recovery::Nonunique => ("nonunique", None),
                Recovery::NoSolution => ("no_solution", None),
            };
            (branch, mu, report.diagnosis, report.min_amplitude)
        }
    };
    let mut checks = Vec::new();
    if let Some(mu) = &measure {
        checks.push(Check::at_most("moment_residual", moment_residual(mu, y), feas_bound(y, tol.unwrap_or(1e-8))));
        if branch == "unique" {
            checks.push(Check::count("rank_vs_atoms", mu.len(), diagnosis.rank));
        }
    }
    let outputs = json!({
        "measure": measure,
        "diagnosis": {
            "eigenvalues": diagnosis.eigenvalues,
            "rank": diagnosis.rank,
            "is_psd": diagnosis.is_psd,
            "branch": branch,
            "min_amplitude": min_amplitude,
        },
    });
    Ok(ExperimentReport::new("moment recover", json!({ "y": y, "charge": charge }), outputs, checks))
}

pub fn prune_atoms(instance: &str, tol: Option<f64>) -> Result<ExperimentReport> {
    let inst: FeatureInstance<f64> = read_json(instance, "feature instance")?;
    inst.validate(FEAS_TOL).map_err(|e| usage(e.to_string()))?;
    let out = caratheodory_prune(&inst)?;
    let m = inst.features.rows();
    let checks = vec![
        Check::at_most("feasibility_drift", out.instance.residual(), feas_tol_scaled(&inst.target, tol.unwrap_or(FEAS_TOL))),
        Check::at_most("tv_increase", out.instance.tv() - inst.tv(), 1e-12 * inst.tv().max(1.0)),
        Check::at_most("atom_count", out.instance.atom_count() as f64, m as f64),
    ];
    let outputs = json!({
        "instance": out.instance,
        "kept": out.kept,
        "steps": out.steps,
        "tv_before": inst.tv(),
        "tv_after": out.instance.tv(),
    });
    Ok(ExperimentReport::new("prune atoms", json!({ "rows": m, "atoms": inst.amplitudes.len() }), outputs, checks))
}

fn feas_tol_scaled(target: &[f64], tol: f64) -> f64 {
    tol * target.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

pub fn prune_psd(instance: &str, tol: Option<f64>) -> Result<ExperimentReport> {
    let inst: PsdInstance<f64> = read_json(instance, "PSD instance")?;
    let tols = PsdTolerances::default();
    inst.validate(&tols).map_err(|e| usage(e.to_string()))?;
    let out = psd_rank_reduce(&inst)?;
    let bound = barvinok_rank_bound(inst.m());
    let checks = vec![
        Check::at_most("final_rank", out.final_rank() as f64, bound as f64),
        Check::at_most("constraint_drift", out.instance.drift(), feas_tol_scaled(&inst.rhs, tol.unwrap_or(tols.feas_tol))),
        Check::at_most("negative_eigenvalue", (-out.instance.min_eigenvalue()).max(0.0), 1e-9),
    ];
    let outputs = json!({ "instance": out.instance, "ranks": out.ranks, "rank_bound": bound });
    Ok(ExperimentReport::new("prune psd", json!({ "n": inst.n(), "m": inst.m() }), outputs, checks))
}

pub fn spline_solve(order: usize, samples: &str, grid: usize, eval: Option<&Path>, points: usize, tol: Option<f64>) -> Result<ExperimentReport> {
    let samples = read_samples(samples)?;
    let prob = SplineProblem::new(order, samples, grid).map_err(|e| usage(e.to_string()))?;
    let sol = solve_spline(&prob)?;
    let resid = prob.samples.iter().fold(0.0f64, |r, p| r.max((sol.model.eval(p.s) - p.y).abs()));
    let checks = vec![
        Check::at_most("knot_count", sol.model.knots.len() as f64, (prob.m() - sol.poly_rank) as f64),
        Check::at_most("interpolation_residual", resid, tol.unwrap_or(1e-8)),
    ];
    if let Some(path) = eval {
        let lo = prob.samples.iter().fold(0.0f64, |m, p| m.min(p.s));
        let hi = prob.samples.iter().fold(1.0f64, |m, p| m.max(p.s));
        let n = points.max(2);
        let rows = (0..n).map(|i| {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            vec![x.to_string(), sol.model.eval(x).to_string()]
        });
        write_csv(path, &["x", "u"], rows)?;
    }
    let inputs = json!({ "order": order, "grid": grid, "samples": prob.samples });
    Ok(ExperimentReport::new("spline solve", inputs, serde_json::to_value(&sol)?, checks))
}
