use super::simulate::SNAPSHOT_DIR;
use crate::config::RunConfig;
use crate::output::write_json;
use crate::{snapshot, CliError};
use csh_core::lp::{s_gamma_norm, FieldSeries};
use csh_core::spectral::GridSpec;
use serde_json::json;
use std::path::{Path, PathBuf};

pub const NORMS: &str = "norms.json";

/// Snapshot files of a trajectory directory, in name order.
pub fn snapshot_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Format(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csh"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Format(format!("{}: no snapshots", dir.display())));
    }
    Ok(files)
}

/// Number of leading samples that are uniformly spaced in time.
fn uniform_prefix(times: &[f64]) -> usize {
    if times.len() < 3 {
        return times.len();
    }
    let dt = times[1] - times[0];
    let mut len = 2;
    while len < times.len() && ((times[len] - times[len - 1]) - dt).abs() <= 1e-9 * dt.abs().max(1.0) {
        len += 1;
    }
    len
}

pub fn run(cfg: &RunConfig, trajectory: Option<&Path>, gamma: Option<f64>) -> Result<bool, CliError> {
    let gamma = gamma.unwrap_or(cfg.norms_gamma);
    if !gamma.is_finite() {
        return Err(CliError::Config(format!("gamma must be finite, got {gamma}")));
    }
    let dir = trajectory
        .map(Path::to_path_buf)
        .or_else(|| cfg.norms_trajectory.clone())
        .unwrap_or_else(|| cfg.out_dir.join(SNAPSHOT_DIR));
    let snaps = snapshot_files(&dir)?.iter().map(|p| snapshot::read(p)).collect::<Result<Vec<_>, _>>()?;
    let (n, l) = (snaps[0].n, snaps[0].l);
    if snaps.iter().any(|s| s.n != n || s.l != l) {
        return Err(CliError::Format(format!("{}: snapshots on different grids", dir.display())));
    }
    let grid = GridSpec::new(n as usize, l, cfg.grid.dealias_fraction).map_err(|e| CliError::Format(e.to_string()))?;
    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let used = uniform_prefix(&times);
    if used < snaps.len() {
        log::warn!("norms: using the {used} uniformly spaced leading samples of {}", snaps.len());
    }
    let series = |f: &dyn Fn(&snapshot::Snapshot) -> csh_core::spectral::ScalarField| {
        FieldSeries::from_times(&times[..used], snaps[..used].iter().map(f).collect())
            .map_err(|e| CliError::Format(e.to_string()))
    };
    let phi = series(&|s| s.phi_field(grid))?;
    let u = series(&|s| s.u_field(grid))?;
    let rt = |e: csh_core::lp::LpError| CliError::Runtime(e.to_string());
    let phi_report = s_gamma_norm(&phi, gamma).map_err(rt)?;
    let u_report = s_gamma_norm(&u, gamma - 1.0).map_err(rt)?;
    let value = phi_report.value + u_report.value;
    log::info!("norms: |phi|_S^{gamma} = {:.6e}, |u|_S^{} = {:.6e}", phi_report.value, gamma - 1.0, u_report.value);
    let report = json!({
        "gamma": gamma,
        "trajectory": dir.display().to_string(),
        "samples": used,
        "t0": times[0],
        "dt": phi.dt,
        "value": value,
        "phi": phi_report,
        "u": u_report,
    });
    write_json(&cfg.out_dir.join(NORMS), &report)?;
    Ok(true)
}
