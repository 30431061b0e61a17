use super::{initial_state, initial_state_on, integrator_error};
use crate::config::RunConfig;
use crate::output::{finite_or_null, write_json};
use crate::CliError;
use csh_core::diagnostics::energy;
use csh_core::integrator::{evolve, IntegratorError, StepConfig};
use csh_core::model::CshState;
use serde_json::{json, Value};

pub const CONVERGENCE: &str = "convergence.json";
/// Accepted distance between fitted and expected order.
pub const ORDER_TOL: f64 = 0.3;
pub const MIN_LEVELS: usize = 4;

/// Final state and energy drift of one run.
struct Level {
    dt: f64,
    steps: usize,
    last: CshState,
    energy_drift: f64,
    max_div_rel: f64,
}

fn run_level(cfg: &RunConfig, initial: &CshState, dt: f64) -> Result<Level, IntegratorError> {
    let step = StepConfig { dt, ..cfg.step };
    let traj = evolve(initial, &step, &cfg.potential, cfg.t_end, usize::MAX).map_err(|f| f.error)?;
    let e0 = energy(initial, &cfg.potential);
    let e1 = energy(traj.last(), &cfg.potential);
    Ok(Level {
        dt,
        steps: traj.records.len() - 1,
        last: traj.last().clone(),
        energy_drift: (e1 - e0).abs() / e0.abs().max(f64::MIN_POSITIVE),
        max_div_rel: traj.max_div_rel(),
    })
}

/// Relative `L²` distance of `(φ, u)` between two states on one grid.
pub fn state_distance(a: &CshState, b: &CshState) -> f64 {
    let num = a.phi.sub(&b.phi).l2_norm_sqr() + a.u.sub(&b.u).l2_norm_sqr();
    let den = b.phi.l2_norm_sqr() + b.u.l2_norm_sqr();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Least-squares slope of `log y` against `log x`; `None` unless at least two
/// points are positive and finite.
pub fn fit_order(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(_, v)| v.is_finite() && **v > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

pub fn run(cfg: &RunConfig) -> Result<bool, CliError> {
    if cfg.convergence_levels < MIN_LEVELS {
        return Err(CliError::Config(format!(
            "insufficient ladder: convergence.levels = {} (need at least {MIN_LEVELS})",
            cfg.convergence_levels
        )));
    }
    let initial = initial_state(cfg)?;
    if !(cfg.t_end > initial.t) {
        return Err(CliError::Config(format!("t_end {} must exceed the initial time {}", cfg.t_end, initial.t)));
    }
    let fine_grid = cfg.grid.with_n(2 * cfg.grid.n).map_err(|e| CliError::Config(e.to_string()))?;
    let fine_initial = initial_state_on(cfg, fine_grid)?;
    let dts: Vec<f64> = (0..cfg.convergence_levels).map(|i| cfg.step.dt / 2f64.powi(i as i32)).collect();
    let finest = *dts.last().expect("at least four levels");
    log::info!("convergence: {} levels from dt = {}, grid pair n = {}, {}", dts.len(), dts[0], cfg.grid.n, fine_grid.n);

    // Ladder levels and the fine-grid run are independent evolutions.
    let (levels, fine) = std::thread::scope(|s| {
        let (initial, fine_initial) = (&initial, &fine_initial);
        let handles: Vec<_> = dts.iter().map(|&dt| s.spawn(move || run_level(cfg, initial, dt))).collect();
        let fine = s.spawn(move || run_level(cfg, fine_initial, finest));
        let levels: Vec<_> = handles.into_iter().map(|h| h.join().expect("worker panicked")).collect();
        (levels, fine.join().expect("worker panicked"))
    });

    let scheme = cfg.step.scheme;
    let mut report = json!({
        "scheme": scheme.tag(),
        "quadrature": cfg.step.quadrature,
        "expected_order": scheme.order(),
        "tolerance": ORDER_TOL,
        "t_end": cfg.t_end,
        "n": cfg.grid.n,
    });
    if let Some((i, e)) = levels.iter().enumerate().find_map(|(i, l)| l.as_ref().err().map(|e| (i, e))) {
        report["error"] = json!(format!("level {i} (dt = {}): {e}", dts[i]));
        report["passed"] = json!(false);
        write_json(&cfg.out_dir.join(CONVERGENCE), &report)?;
        return Err(integrator_error(e));
    }
    if let Err(e) = &fine {
        report["error"] = json!(format!("grid pair (n = {}): {e}", fine_grid.n));
        report["passed"] = json!(false);
        write_json(&cfg.out_dir.join(CONVERGENCE), &report)?;
        return Err(integrator_error(e));
    }
    let levels: Vec<Level> = levels.into_iter().map(|l| l.expect("checked")).collect();
    let fine = fine.expect("checked");

    // Self-convergence: distance of each level to the next finer one.
    let diffs: Vec<f64> = levels.windows(2).map(|w| state_distance(&w[0].last, &w[1].last)).collect();
    let state_order = fit_order(&dts[..diffs.len()], &diffs);
    let drifts: Vec<f64> = levels.iter().map(|l| l.energy_drift).collect();
    let energy_order = fit_order(&dts, &drifts);
    let state_pass = state_order.is_some_and(|p| (p - scheme.order()).abs() <= ORDER_TOL);

    let coarse_last = &levels.last().expect("nonempty").last;
    let fine_on_coarse = CshState {
        phi: fine.last.phi.resample(cfg.grid),
        u: fine.last.u.resample(cfg.grid),
        ..coarse_last.clone()
    };
    let grid_diff = state_distance(coarse_last, &fine_on_coarse);

    report["levels"] = Value::Array(
        levels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                json!({
                    "dt": l.dt,
                    "steps": l.steps,
                    "energy_drift": finite_or_null(l.energy_drift),
                    "diff_to_next": diffs.get(i).map(|&d| finite_or_null(d)),
                    "max_div_rel": finite_or_null(l.max_div_rel),
                })
            })
            .collect(),
    );
    report["state_order"] = json!(state_order);
    report["energy_order"] = json!(energy_order);
    report["state_pass"] = json!(state_pass);
    report["grid"] = json!({
        "n_coarse": cfg.grid.n,
        "n_fine": fine_grid.n,
        "dt": finest,
        "rel_diff": finite_or_null(grid_diff),
        "fine_energy_drift": finite_or_null(fine.energy_drift),
    });
    report["passed"] = json!(state_pass);
    write_json(&cfg.out_dir.join(CONVERGENCE), &report)?;
    match state_order {
        Some(p) => log::info!("convergence: observed order {p:.3} (expected {})", scheme.order()),
        None => log::warn!("convergence: no order could be fitted"),
    }
    Ok(state_pass)
}
