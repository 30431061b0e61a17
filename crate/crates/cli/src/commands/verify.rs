use super::{random_field, write_manifest};
use crate::config::RunConfig;
use crate::output::{finite_or_null, write_json};
use crate::snapshot::Snapshot;
use crate::CliError;
use csh_core::diagnostics::{constraint_residuals, div_relative};
use csh_core::estimates::{
    default_cases, resolve_params, EstimateCase, EstimateError, EstimateReport, EstimateStatus, Lab,
};
use csh_core::integrator::{evolve, Quadrature, Scheme, StepConfig};
use csh_core::lp::{cube_cover, lattice_scale, lp_project, sobolev_norm, BandRange, CUBE_COUNT_CONSTANT};
use csh_core::model::{gaussian_bump, null_form_pair, CshState, PotentialSpec, Sigma, DEFAULT_SIGMA};
use csh_core::spectral::{Complex64, GridSpec, ScalarField, ValueKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

pub const VERIFY_REPORT: &str = "verify_report.json";
pub const ESTIMATE_DIR: &str = "estimates";

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

fn check(name: &str, passed: bool, detail: Value) -> Check {
    log::info!("verify: {name}: {}", if passed { "pass" } else { "FAIL" });
    Check { name: name.into(), passed, detail }
}

/// `‖lhs − rhs‖_{L²} ≤ 1e−11·‖φ‖_{H¹}‖ψ‖_{H¹}` for both forms of the null form.
pub fn null_form_check(grid: GridSpec, pairs: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = (grid.dealias_cutoff().ceil() as i64 - 1).max(1);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let phi = random_field(grid, &mut rng, top, false);
        let psi = random_field(grid, &mut rng, top, false);
        let (l, r) = null_form_pair(&phi, &psi).expect("same grid");
        let scale = sobolev_norm(&phi, 1.0, false) * sobolev_norm(&psi, 1.0, false);
        worst = worst.max(l.sub(&r).l2_norm() / scale);
    }
    check("null_form_identity", worst <= 1e-11, json!({"pairs": pairs, "max_relative": worst, "tolerance": 1e-11}))
}

/// `Σ_k P_k = id` on mean-zero fields inside the resolved bands, cube covers
/// summing to one on their annuli, and the cube-count bound.
pub fn lp_structure_check(grid: GridSpec, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let range = BandRange::of(&grid);
    let radius = 2f64.powi(range.hi as i32 + 1);
    let reach = (radius / grid.dxi()).floor() as i64;
    let mut telescoping: f64 = 0.0;
    for _ in 0..10 {
        let mut f = random_field(grid, &mut rng, reach, true);
        let n = grid.n;
        for j2 in 0..n {
            for j1 in 0..n {
                if grid.xi(j1).hypot(grid.xi(j2)) > radius {
                    f.data_mut()[j2 * n + j1] = Complex64::default();
                }
            }
        }
        let mut acc = ScalarField::zeros_spectral(grid, ValueKind::Complex);
        for k in range.iter() {
            acc = acc.add(&lp_project(&f, k).expect("resolved band"));
        }
        telescoping = telescoping.max(acc.sub(&f).l2_norm() / f.l2_norm());
    }
    let mut partition: f64 = 0.0;
    let mut count_ok = true;
    for k in range.iter() {
        for ell in lattice_scale(&grid).min(k)..=k {
            let cover = cube_cover(&grid, ell, k).expect("resolved band");
            count_ok &= cover.cubes.len() as f64 <= CUBE_COUNT_CONSTANT * 4f64.powi((k - ell) as i32);
            for j2 in 0..grid.n {
                for j1 in 0..grid.n {
                    let xi = [grid.xi(j1), grid.xi(j2)];
                    let r = xi[0].hypot(xi[1]);
                    if r < 2f64.powi(k as i32 - 2) || r > 2f64.powi(k as i32 + 2) {
                        continue;
                    }
                    let s: f64 = cover.cubes.iter().map(|c| cover.symbol(c, xi)).sum();
                    partition = partition.max((s - 1.0).abs());
                }
            }
        }
    }
    let passed = telescoping <= 1e-10 && partition <= 1e-12 && count_ok;
    check(
        "lp_structure",
        passed,
        json!({"telescoping_rel": telescoping, "partition_defect": partition, "cube_counts_ok": count_ok}),
    )
}

fn random_state(grid: GridSpec, rng: &mut ChaCha8Rng, sigma: Sigma) -> CshState {
    let phi = random_field(grid, rng, 4, false).scale(0.2);
    let u = random_field(grid, rng, 4, false).scale(0.2);
    CshState::new(phi, u, sigma, 0.0).expect("same grid")
}

/// FFT, snapshot and config round trips, and the Coulomb condition on solved
/// potentials.
pub fn round_trip_checks(cfg: &RunConfig, grid: GridSpec, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fft: f64 = 0.0;
    let mut div: f64 = 0.0;
    let mut snap_ok = true;
    for _ in 0..10 {
        let f = random_field(grid, &mut rng, grid.n as i64 / 2 - 1, false).to_physical();
        fft = fft.max(f.to_spectral().to_physical().rel_diff(&f));
        let s = random_state(grid, &mut rng, DEFAULT_SIGMA);
        div = div.max(div_relative(&s));
        let snap = Snapshot::of(&s);
        snap_ok &= Snapshot::decode(&snap.encode()).as_ref() == Ok(&snap);
    }
    let config_ok = RunConfig::from_entries(&cfg.entries, std::path::Path::new("/"))
        .map(|c| c.entries == cfg.entries)
        .unwrap_or(false);
    vec![
        check("fft_round_trip", fft <= 1e-13, json!({"max_rel": fft})),
        check("snapshot_round_trip", snap_ok, json!({})),
        check("config_round_trip", config_ok, json!({})),
        check("coulomb_gauge", div <= 1e-11, json!({"max_div_rel": div, "tolerance": 1e-11})),
    ]
}

/// Curl-constraint residuals of one sign over a dt ladder.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaTrial {
    pub sigma: i8,
    pub dts: Vec<f64>,
    /// Largest `‖curl a − ρ‖_{L²}` over each run.
    pub residuals: Vec<f64>,
    /// Fitted order of the residual in `dt`.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaExperiment {
    pub trials: Vec<SigmaTrial>,
    /// The sign whose residual is at truncation-error scale while the other's
    /// is not, when exactly one sign behaves so.
    pub passing: Option<i8>,
}

/// Runs both signs on the same data and ladder. A sign passes when its
/// residual decays at least at `order − 0.5` and stays below `1e−3` times the
/// other sign's residual, while the other sign's residual does not decay
/// (fitted order below 0.5).
pub fn sigma_experiment(
    phi: &ScalarField,
    u: &ScalarField,
    pot: &PotentialSpec,
    step: StepConfig,
    t_end: f64,
    dts: &[f64],
) -> Result<SigmaExperiment, CliError> {
    let mut trials = Vec::new();
    for sigma in [Sigma::Minus, Sigma::Plus] {
        let initial = CshState::new(phi.clone(), u.clone(), sigma, 0.0).map_err(|e| CliError::Config(e.to_string()))?;
        let mut residuals = Vec::new();
        for &dt in dts {
            let traj = evolve(&initial, &StepConfig { dt, ..step }, pot, t_end, 1)
                .map_err(|f| CliError::Runtime(f.to_string()))?;
            residuals.push(traj.states.iter().map(|s| constraint_residuals(s).1).fold(0.0, f64::max));
        }
        let order = super::convergence::fit_order(dts, &residuals);
        trials.push(SigmaTrial { sigma: sigma.as_i8(), dts: dts.to_vec(), residuals, order });
    }
    let expected = step.scheme.order();
    let good = |t: &SigmaTrial, other: &SigmaTrial| {
        let last = |t: &SigmaTrial| *t.residuals.last().expect("nonempty ladder");
        t.order.is_some_and(|p| p >= expected - 0.5)
            && last(t) <= 1e-3 * last(other)
            && other.order.map_or(true, |p| p < 0.5)
    };
    let passing = match (good(&trials[0], &trials[1]), good(&trials[1], &trials[0])) {
        (true, false) => Some(trials[0].sigma),
        (false, true) => Some(trials[1].sigma),
        _ => None,
    };
    Ok(SigmaExperiment { trials, passing })
}

/// The desk-scale sign experiment of the verify suite: `n = 32`, a unit
/// Gaussian with `u = iφ`, self-dual potential, trapezoid twisted Duhamel.
pub fn default_sigma_experiment(grid: GridSpec) -> Result<SigmaExperiment, CliError> {
    let c = grid.period_length / 2.0;
    let phi = gaussian_bump(&grid, 1.0, 0.8, [c, c]).map_err(|e| CliError::Config(e.to_string()))?;
    let u = phi.scale_complex(Complex64::new(0.0, 1.0));
    let step = StepConfig {
        scheme: Scheme::TwistedDuhamel,
        quadrature: Quadrature::Trapezoid,
        ..StepConfig::default()
    };
    sigma_experiment(&phi, &u, &PotentialSpec::self_dual(1.0), step, 0.2, &[0.02, 0.01, 0.005])
}

/// The configured estimate cases; inadmissible parameters become skipped
/// reports.
pub fn run_estimates(cfg: &RunConfig) -> Vec<(EstimateReport, Option<String>)> {
    let lab = Lab::new();
    let mut out = Vec::new();
    for base in default_cases(cfg.seed) {
        if cfg.verify_estimates.as_ref().is_some_and(|ids| !ids.contains(&base.id)) {
            continue;
        }
        let case = EstimateCase {
            params: cfg.estimate_params.get(&base.id).cloned().unwrap_or_default(),
            ensemble_size: cfg.verify_ensemble_size,
            n: if cfg.verify_n > 0 { cfg.verify_n } else { base.n },
            ..base
        };
        let result = resolve_params(&case).and_then(|_| lab.run(&case));
        match result {
            Ok(r) => {
                log::info!("verify: {} ratio_max {:.3e} drift {:.3} {:?}", r.id, r.ratio_max, r.drift_factor, r.status);
                out.push((r, None));
            }
            Err(e @ EstimateError::InadmissibleParameters { .. }) => {
                log::warn!("verify: skipping {}: {e}", case.id);
                out.push((EstimateReport::skipped(&case), Some(e.to_string())));
            }
            Err(e) => {
                log::error!("verify: {} failed: {e}", case.id);
                let mut r = EstimateReport::skipped(&case);
                r.status = EstimateStatus::Unstable;
                out.push((r, Some(e.to_string())));
            }
        }
    }
    out
}

fn report_json(r: &EstimateReport, note: &Option<String>) -> Value {
    let mut v = json!({
        "id": r.id,
        "params": r.params.iter().map(|(k, v)| (k.clone(), finite_or_null(*v))).collect::<Map<String, Value>>(),
        "seed": r.seed,
        "n": r.n,
        "ensemble_size": r.ensemble_size,
        "ratio_max": finite_or_null(r.ratio_max),
        "ratio_median": finite_or_null(r.ratio_median),
        "drift_factor": finite_or_null(r.drift_factor),
        "status": r.status,
    });
    if let Some(n) = note {
        v["note"] = json!(n);
    }
    v
}

pub fn run(cfg: &RunConfig) -> Result<bool, CliError> {
    let small = cfg.grid.with_n(32).map_err(|e| CliError::Config(e.to_string()))?;
    let mut checks = vec![null_form_check(small, 100, cfg.seed), lp_structure_check(cfg.grid, cfg.seed)];
    checks.extend(round_trip_checks(cfg, small, cfg.seed));
    let sigma = default_sigma_experiment(GridSpec::standard(32))?;
    checks.push(check(
        "sigma_consistency",
        sigma.passing == Some(DEFAULT_SIGMA.as_i8()),
        serde_json::to_value(&sigma).expect("serializable"),
    ));

    let estimates = run_estimates(cfg);
    let dir = cfg.out_dir.join(ESTIMATE_DIR);
    let mut est_ok = true;
    let mut est_json = Vec::new();
    for (r, note) in &estimates {
        let v = report_json(r, note);
        write_json(&dir.join(format!("{}.json", r.id)), &v)?;
        est_ok &= matches!(r.status, EstimateStatus::Pass | EstimateStatus::Skipped);
        est_json.push(v);
    }
    checks.push(check(
        "estimate_catalogue",
        est_ok,
        json!({"cases": estimates.len(), "failing": estimates.iter().filter(|(r, _)| !matches!(r.status, EstimateStatus::Pass | EstimateStatus::Skipped)).map(|(r, _)| r.id.clone()).collect::<Vec<_>>()}),
    ));

    let passed = checks.iter().all(|c| c.passed);
    write_json(
        &cfg.out_dir.join(VERIFY_REPORT),
        &json!({"passed": passed, "checks": checks, "estimates": est_json}),
    )?;
    let mut extra = Map::new();
    extra.insert("measured_passing_sigma".into(), json!(sigma.passing));
    extra.insert("checks_passed".into(), json!(checks.iter().filter(|c| c.passed).count()));
    extra.insert("checks_total".into(), json!(checks.len()));
    write_manifest(cfg, "verify", if passed { "ok" } else { "property_failure" }, extra)?;
    Ok(passed)
}
