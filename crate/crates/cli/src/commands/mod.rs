pub mod convergence;
pub mod norms;
pub mod simulate;
pub mod verify;

use crate::config::{InitSource, RunConfig};
use crate::output::write_json;
use crate::{snapshot, CliError};
use csh_core::integrator::IntegratorError;
use csh_core::model::{CshState, InitialData, DEFAULT_SIGMA};
use csh_core::spectral::{Complex64, GridSpec, ScalarField, ValueKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

pub const MANIFEST: &str = "run_manifest.json";

/// Random band-limited initial data: modes with `max|m| ≤ max_mode`, uniform
/// coefficients in the unit square scaled by `amplitude/(1 + |m|²)`.
pub fn random_data(seed: u64, amplitude: f64, max_mode: i64, omega: f64) -> InitialData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for m2 in -max_mode..=max_mode {
        for m1 in -max_mode..=max_mode {
            let w = amplitude / (1.0 + (m1 * m1 + m2 * m2) as f64);
            modes.push((m1, m2, [w * rng.gen_range(-1.0..1.0), w * rng.gen_range(-1.0..1.0)]));
        }
    }
    InitialData::FourierModes { modes, omega }
}

/// Random spectrum on `max|m| ≤ max_mode`, optionally mean-zero.
pub fn random_field(grid: GridSpec, rng: &mut ChaCha8Rng, max_mode: i64, mean_zero: bool) -> ScalarField {
    let mut f = ScalarField::zeros_spectral(grid, ValueKind::Complex);
    let n = grid.n;
    for m2 in -max_mode..=max_mode {
        for m1 in -max_mode..=max_mode {
            if mean_zero && m1 == 0 && m2 == 0 {
                continue;
            }
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            f.data_mut()[grid.index_of(m2) * n + grid.index_of(m1)] = c;
        }
    }
    f
}

/// The configured initial state on `grid` (the configured grid, or a refinement
/// of it for grid-doubling runs).
pub fn initial_state_on(cfg: &RunConfig, grid: GridSpec) -> Result<CshState, CliError> {
    let cfg_err = |e: String| CliError::Config(e);
    match &cfg.init {
        InitSource::Generator(d) => {
            let (phi, u) = d.build(&grid).map_err(|e| cfg_err(e.to_string()))?;
            CshState::new(phi, u, cfg.sigma, 0.0).map_err(|e| cfg_err(e.to_string()))
        }
        InitSource::Random { amplitude, max_mode, omega } => {
            let d = random_data(cfg.seed, *amplitude, *max_mode, *omega);
            let (phi, u) = d.build(&grid).map_err(|e| cfg_err(e.to_string()))?;
            CshState::new(phi, u, cfg.sigma, 0.0).map_err(|e| cfg_err(e.to_string()))
        }
        InitSource::Snapshot(path) => {
            let snap = snapshot::read(path)?;
            if snap.sigma != cfg.sigma.as_i8() {
                return Err(cfg_err(format!("snapshot sign {} differs from configured sigma", snap.sigma)));
            }
            let base = cfg.grid;
            let phi = snap.phi_field(base).resample(grid);
            let u = snap.u_field(base).resample(grid);
            CshState::new(phi, u, cfg.sigma, snap.t).map_err(|e| CliError::Format(e.to_string()))
        }
    }
}

pub fn initial_state(cfg: &RunConfig) -> Result<CshState, CliError> {
    initial_state_on(cfg, cfg.grid)
}

/// Configuration problems detected by the integrator are config errors;
/// everything else aborts the run.
pub fn integrator_error(e: &IntegratorError) -> CliError {
    match e {
        IntegratorError::BadConfig(m) => CliError::Config(m.clone()),
        other => CliError::Runtime(other.to_string()),
    }
}

/// Writes `run_manifest.json`: the full config echo, build information, the
/// command's status and any command-specific fields.
pub fn write_manifest(cfg: &RunConfig, command: &str, status: &str, extra: Map<String, Value>) -> Result<(), CliError> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("status".into(), json!(status));
    m.insert("config".into(), json!(cfg.entries));
    m.insert(
        "build".into(),
        json!({
            "package": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "debug_assertions": cfg!(debug_assertions),
        }),
    );
    m.insert("sigma".into(), json!(cfg.sigma.as_i8()));
    m.insert("passing_sigma".into(), json!(DEFAULT_SIGMA.as_i8()));
    m.insert("alpha".into(), json!(cfg.potential.alpha));
    m.extend(extra);
    write_json(&cfg.out_dir.join(MANIFEST), &Value::Object(m))
}
