use super::{initial_state, integrator_error, write_manifest};
use crate::config::RunConfig;
use crate::output::{finite_or_null, write_atomic};
use crate::{snapshot, CliError};
use csh_core::diagnostics::{write_csv, AprioriMonitor};
use csh_core::integrator::{evolve, Trajectory};
use serde_json::{json, Map};

pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";
/// Largest relative `‖div a‖` accepted on any emitted state.
pub const DIV_TOL: f64 = 1e-11;

pub fn snapshot_name(i: usize) -> String {
    format!("snap_{i:06}.csh")
}

/// Writes the CSV and snapshots of `traj`.
fn write_outputs(cfg: &RunConfig, traj: &Trajectory) -> Result<(), CliError> {
    let mut csv = Vec::new();
    write_csv(&traj.rows, &mut csv).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&cfg.out_dir.join(DIAGNOSTICS), &csv)?;
    if cfg.snapshots {
        let dir = cfg.out_dir.join(SNAPSHOT_DIR);
        if dir.exists() {
            for e in std::fs::read_dir(&dir).map_err(|e| CliError::Io(e.to_string()))?.flatten() {
                if e.path().extension().is_some_and(|x| x == "csh") {
                    std::fs::remove_file(e.path()).map_err(|e| CliError::Io(e.to_string()))?;
                }
            }
        }
        for (i, s) in traj.states.iter().enumerate() {
            snapshot::write(&dir.join(snapshot_name(i)), s)?;
        }
    }
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<bool, CliError> {
    let initial = initial_state(cfg)?;
    if !(cfg.t_end > initial.t) {
        return Err(CliError::Config(format!("t_end {} must exceed the initial time {}", cfg.t_end, initial.t)));
    }
    log::info!("simulate: n = {}, dt = {}, t_end = {}, scheme = {}", cfg.grid.n, cfg.step.dt, cfg.t_end, cfg.step.scheme.tag());
    let (traj, failure) = match evolve(&initial, &cfg.step, &cfg.potential, cfg.t_end, cfg.diag_every) {
        Ok(t) => (t, None),
        Err(f) => (f.partial, Some(f.error)),
    };
    write_outputs(cfg, &traj)?;

    let max_div = traj.max_div_rel();
    let div_ok = max_div <= DIV_TOL;
    let mut extra = Map::new();
    extra.insert("steps".into(), json!(traj.records.len().saturating_sub(1)));
    extra.insert("t_final".into(), json!(traj.last().t));
    extra.insert("guard_warnings".into(), json!(traj.guard_warnings));
    extra.insert("max_div_rel".into(), finite_or_null(max_div));
    extra.insert("div_ok".into(), json!(div_ok));
    let mut apriori_ok = true;
    if cfg.potential.alpha.is_some() {
        let monitor = AprioriMonitor::new(&initial, &cfg.potential).expect("alpha is set");
        let reports: Vec<_> = traj.states.iter().map(|s| monitor.check(s)).collect();
        apriori_ok = reports.iter().all(|r| r.holds);
        let min_slack = reports.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        extra.insert("apriori_min_slack".into(), finite_or_null(min_slack));
        extra.insert("apriori_ok".into(), json!(apriori_ok));
    }
    if let Some(e) = &failure {
        extra.insert("error".into(), json!(e.to_string()));
        write_manifest(cfg, "simulate", "aborted", extra)?;
        return Err(integrator_error(e));
    }
    let ok = div_ok && apriori_ok;
    write_manifest(cfg, "simulate", if ok { "ok" } else { "property_failure" }, extra)?;
    if !div_ok {
        log::error!("relative div a reached {max_div:.3e} > {DIV_TOL:e}");
    }
    if !apriori_ok {
        log::error!("a-priori bound violated");
    }
    log::info!("simulate: {} rows written to {}", traj.rows.len(), cfg.out_dir.display());
    Ok(ok)
}
