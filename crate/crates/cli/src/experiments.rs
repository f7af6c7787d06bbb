use std::path::{Path, PathBuf};

use anyhow::Result;
use representer::bp::{solve_bp_grid, BpConfig, BpResult};
use representer::certificate::{certify, default_n_check};
use representer::instances::{feature_instance, rng, separated_nonneg_measure, trial_seed};
use representer::oracle::{oracle_boundary, oracle_solution, two_spike_moments};
use representer::sparsify::caratheodory_prune;
use representer::toeplitz::{recover_nonneg_with, Recovery, ToeplitzTolerances};
use representer::{Measure, Point, Poly, TrigSystem};
use serde_json::json;

use crate::commands::{atom_errors, oracle_checks};
use crate::io::write_csv;
use crate::report::{usage, Check, ExperimentReport};

/// Points used for the `(t, η(t))` plot data.
const PLOT_SAMPLES: usize = 1024;

/// Returns whether `h` sits on the boundary `1 / (2 f_c)`. The boundary is
/// only accepted when `allow_boundary` is set.
pub fn validate_two_spike(f_c: usize, h: f64, allow_boundary: bool) -> Result<bool> {
    if f_c == 0 {
        return Err(usage("f_c must be at least 1"));
    }
    let edge = 0.5 / f_c as f64;
    if !(h > 0.0 && h.is_finite()) {
        return Err(usage(format!("h must be positive, got {h}")));
    }
    let on_edge = (h - edge).abs() <= 1e-12 * edge;
    if on_edge && allow_boundary {
        return Ok(true);
    }
    if h >= edge || on_edge {
        return Err(usage(format!("h = {h} must be below 1/(2 f_c) = {edge}")));
    }
    Ok(false)
}

fn plot_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}

fn write_plots(prefix: &Path, eta: &Poly, atoms: &[(&str, &Measure)]) -> Result<Vec<String>> {
    let dual = plot_path(prefix, "_dual.csv");
    let rows = (0..PLOT_SAMPLES).map(|i| {
        let t = i as f64 / PLOT_SAMPLES as f64;
        vec![t.to_string(), eta.eval(Point::new(t)).to_string()]
    });
    write_csv(&dual, &["t", "eta"], rows)?;
    let spikes = plot_path(prefix, "_atoms.csv");
    let rows = atoms.iter().flat_map(|(source, mu)| {
        mu.sorted().atoms.into_iter().map(move |a| vec![source.to_string(), a.x.value().to_string(), a.a.to_string()])
    });
    write_csv(&spikes, &["source", "t", "a"], rows)?;
    Ok(vec![dual.display().to_string(), spikes.display().to_string()])
}

fn bp_certified(bp: &BpResult<f64>, y: &representer::Moments, tol: f64, grid: usize) -> Result<serde_json::Value> {
    let n_check = default_n_check(y.system().f_c()).max(16 * grid);
    Ok(serde_json::to_value(certify(&bp.measure, &bp.dual, y, tol, n_check)?)?)
}

pub fn two_spike(f_c: usize, h: f64, grid: usize, tol: Option<f64>, plot: Option<&Path>) -> Result<ExperimentReport> {
    let boundary = validate_two_spike(f_c, h, true)?;
    let tol = tol.unwrap_or(1e-6);
    let cfg = BpConfig::new(grid).with_polish(true);
    let inputs = json!({ "f_c": f_c, "h": h, "grid": grid, "tol": tol });
    if boundary {
        // The dual is not unique here; only the primal is checked.
        let expected = oracle_boundary::<f64>(f_c)?;
        let y = TrigSystem::new(f_c)?.moments(&expected);
        let bp = solve_bp_grid(&y, &cfg)?;
        let (dx, da) = atom_errors(&bp.measure, &expected, false);
        let checks = vec![
            Check::count("atom_count", bp.measure.len(), 2),
            Check::at_most("position_error", dx, 1e-6),
            Check::at_most("amplitude_error", da, 1e-6),
        ];
        let plots = match plot {
            Some(prefix) => write_plots(prefix, &bp.dual, &[("expected", &expected), ("recovered", &bp.measure)])?,
            None => Vec::new(),
        };
        let outputs = json!({
            "branch": "boundary",
            "expected": expected,
            "bp": bp,
            "bp_certificate": bp_certified(&bp, &y, tol, grid)?,
            "plots": plots,
        });
        return Ok(ExperimentReport::new("experiment two-spike", inputs, outputs, checks));
    }

    let y = two_spike_moments::<f64>(f_c, h)?;
    let (oracle, eta) = oracle_solution::<f64>(f_c, h)?;
    let oracle_cert = certify(&oracle, &eta, &y, tol, default_n_check(f_c))?;
    let bp = solve_bp_grid(&y, &cfg)?;
    let (dx, da) = atom_errors(&bp.measure, &oracle, true);
    let top = Poly::top_sine(y.system());
    let dual_err = bp.dual.coefficients().iter().zip(top.coefficients()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let (_, mut checks) = oracle_checks(f_c, h)?;
    checks.splice(
        0..0,
        [
            Check::count("atom_count", bp.measure.len(), 2 * f_c),
            Check::at_most("position_error", dx, 1e-3),
            Check::at_most("amplitude_rel_error", da, 1e-3),
            Check::at_most("duality_gap", bp.duality_gap, tol),
            Check::at_most("dual_error", dual_err, 1e-4),
            Check::holds("oracle_certified", oracle_cert.verdict == representer::certificate::Verdict::Certified),
        ],
    );
    let plots = match plot {
        Some(prefix) => write_plots(prefix, &eta, &[("oracle", &oracle), ("recovered", &bp.measure)])?,
        None => Vec::new(),
    };
    let outputs = json!({
        "branch": "interior",
        "oracle": { "measure": oracle, "dual": eta, "certificate": oracle_cert },
        "bp": bp,
        "bp_certificate": bp_certified(&bp, &y, tol, grid)?,
        "plots": plots,
    });
    Ok(ExperimentReport::new("experiment two-spike", inputs, outputs, checks))
}

pub fn toeplitz_roundtrip(f_c: usize, r: usize, seed: u64, tol: Option<f64>) -> Result<ExperimentReport> {
    if f_c == 0 {
        return Err(usage("f_c must be at least 1"));
    }
    if r > f_c {
        return Err(usage(format!("r = {r} exceeds f_c = {f_c}; the moments would not determine the measure")));
    }
    let tol = tol.unwrap_or(1e-6);
    let truth = separated_nonneg_measure(&mut rng(seed), f_c, r);
    let y = TrigSystem::new(f_c)?.moments(&truth);
    let report = recover_nonneg_with(&y, &ToeplitzTolerances::default())?;
    let (branch, recovered) = match report.recovery {
        Recovery::Unique(mu) => ("unique", Some(mu)),
        Recovery::Nonunique => ("nonunique", None),
        Recovery::NoSolution => ("no_solution", None),
    };
    let (dx, da) = match &recovered {
        Some(mu) if mu.len() == truth.len() => atom_errors(mu, &truth, false),
        _ => (f64::INFINITY, f64::INFINITY),
    };
    let checks = vec![
        Check::count("rank", report.diagnosis.rank, r),
        Check::holds("unique_recovery", branch == "unique"),
        Check::at_most("position_error", dx, tol),
        Check::at_most("amplitude_error", da, tol),
    ];
    let outputs = json!({
        "truth": truth,
        "moments": y,
        "recovered": recovered,
        "diagnosis": report.diagnosis,
        "branch": branch,
    });
    Ok(ExperimentReport::new("experiment toeplitz-roundtrip", json!({ "f_c": f_c, "r": r }), outputs, checks))
}

pub fn prune_bench(m: usize, r: usize, trials: u64, seed: u64, tol: Option<f64>) -> Result<ExperimentReport> {
    if m == 0 {
        return Err(usage("m must be at least 1"));
    }
    if r <= m {
        return Err(usage(format!("r = {r} must exceed m = {m}; there is nothing to prune")));
    }
    let (mut drift, mut tv_increase, mut max_atoms, mut total_atoms, mut total_steps) = (0.0f64, f64::NEG_INFINITY, 0usize, 0usize, 0usize);
    for t in 0..trials {
        let inst = feature_instance(&mut rng(trial_seed(seed, t)), m, r);
        let out = caratheodory_prune(&inst)?;
        drift = drift.max(out.instance.residual());
        tv_increase = tv_increase.max(out.instance.tv() - inst.tv());
        max_atoms = max_atoms.max(out.instance.atom_count());
        total_atoms += out.instance.atom_count();
        total_steps += out.steps;
    }
    let denom = trials.max(1) as f64;
    if trials == 0 {
        tv_increase = 0.0;
    }
    let checks = vec![
        Check::at_most("max_feasibility_drift", drift, tol.unwrap_or(1e-9)),
        Check::at_most("max_tv_increase", tv_increase, 1e-12),
        Check::at_most("max_atom_count", max_atoms as f64, m as f64),
    ];
    let outputs = json!({
        "max_feasibility_drift": drift,
        "max_tv_increase": tv_increase,
        "max_atom_count": max_atoms,
        "mean_atom_count": total_atoms as f64 / denom,
        "mean_steps": total_steps as f64 / denom,
    });
    Ok(ExperimentReport::new("experiment prune-bench", json!({ "m": m, "r": r, "trials": trials }), outputs, checks))
}
