//! Time stepping: exact half-wave propagators, the twisted Duhamel step with
//! an inner Picard iteration, and a classical RK4 reference on the same
//! vector field.

mod stepper;

pub use stepper::Stepper;

use crate::diagnostics::{self, DiagnosticsRow};
use crate::model::{CshState, ModelError, PotentialSpec};
use crate::spectral::{Complex64, ScalarField, SpectralError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    TwistedDuhamel,
    Rk4Reference,
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::TwistedDuhamel => "twisted_duhamel",
            Scheme::Rk4Reference => "rk4_reference",
        }
    }

    /// Expected global order of accuracy.
    pub fn order(self) -> f64 {
        match self {
            Scheme::TwistedDuhamel => 2.0,
            Scheme::Rk4Reference => 4.0,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "twisted_duhamel" => Ok(Scheme::TwistedDuhamel),
            "rk4_reference" => Ok(Scheme::Rk4Reference),
            other => Err(format!("unknown scheme '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// Endpoint rule `∫₀^τ K(τ−s)X(s)ds ≈ τ/2·(K(τ)X(0) + K(0)X(τ))`.
    Trapezoid,
    /// `∫₀^τ K(τ−s)X(s)ds ≈ τ·K(τ/2)·(X(0) + X(τ))/2`.
    Midpoint,
}

impl std::str::FromStr for Quadrature {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "trapezoid" => Ok(Quadrature::Trapezoid),
            "midpoint" => Ok(Quadrature::Midpoint),
            other => Err(format!("unknown quadrature '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub dt: f64,
    pub picard_max: u32,
    pub picard_tol: f64,
    pub quadrature: Quadrature,
    pub scheme: Scheme,
    /// Warn when `dt·‖a₀‖²_∞` exceeds this.
    pub delta0_guard: f64,
    /// When false the gauge potentials are forced to vanish.
    pub couple_gauge: bool,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            picard_max: 8,
            picard_tol: 1e-12,
            quadrature: Quadrature::Trapezoid,
            scheme: Scheme::TwistedDuhamel,
            delta0_guard: 0.05,
            couple_gauge: true,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<(), IntegratorError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(IntegratorError::BadConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.picard_max < 1 {
            return Err(IntegratorError::BadConfig("picard_max must be at least 1".into()));
        }
        if !(self.picard_tol > 0.0) {
            return Err(IntegratorError::BadConfig("picard_tol must be positive".into()));
        }
        if !(self.delta0_guard > 0.0) {
            return Err(IntegratorError::BadConfig("delta0_guard must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegratorError {
    #[error("invalid step configuration: {0}")]
    BadConfig(String),
    #[error("Picard iteration diverged at step {step} (deltas {deltas:?})")]
    PicardDivergence { step: u64, deltas: Vec<f64> },
    #[error("non-finite values after step {step}")]
    NonFinite { step: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Free wave evolution over time `t`: returns
/// `(cos(t|∇|)f + sin(t|∇|)/|∇|·g, −|∇|sin(t|∇|)f + cos(t|∇|)g)`, spectral.
pub fn half_wave(f: &ScalarField, g: &ScalarField, t: f64) -> Result<(ScalarField, ScalarField), SpectralError> {
    f.same_grid(g)?;
    let fs = f.to_spectral();
    let gs = g.to_spectral();
    let grid = *f.grid();
    let n = grid.n;
    let mut pos = fs.clone().with_kind(crate::spectral::ValueKind::Complex);
    let mut vel = gs.clone().with_kind(crate::spectral::ValueKind::Complex);
    let (pd, vd) = (pos.data_mut(), vel.data_mut());
    for j2 in 0..n {
        let x2 = grid.xi(j2);
        for j1 in 0..n {
            let x1 = grid.xi(j1);
            let r = (x1 * x1 + x2 * x2).sqrt();
            let (c, s, w) = stepper::wave_kernels(r, t);
            let idx = j2 * n + j1;
            let (a, b): (Complex64, Complex64) = (fs.data()[idx], gs.data()[idx]);
            pd[idx] = a * c + b * s;
            vd[idx] = -a * w + b * c;
        }
    }
    let kind = if f.kind() == g.kind() { f.kind() } else { crate::spectral::ValueKind::Complex };
    Ok((pos.with_kind(kind), vel.with_kind(kind)))
}

/// `F_tot = mφ + 2i(a₁∂₁φ + a₂∂₂φ) − i·a₀·u + (a₁² + a₂²)φ + W(φ)` from the
/// state's cached potentials, dealiased, physical.
pub fn nonlinearity_f(state: &CshState, pot: &PotentialSpec) -> ScalarField {
    stepper::total_forcing(&state.phi, &state.u, &state.a0, &state.a1, &state.a2, pot).to_physical()
}

/// One twisted Duhamel step.
pub fn twisted_duhamel_step(state: &CshState, cfg: &StepConfig, pot: &PotentialSpec) -> Result<CshState, IntegratorError> {
    let cfg = StepConfig { scheme: Scheme::TwistedDuhamel, ..*cfg };
    Ok(Stepper::new(*state.grid(), cfg, pot.clone())?.step(state)?.0)
}

/// One twisted Duhamel step, also returning the Picard iterate-to-iterate
/// relative changes.
pub fn twisted_duhamel_step_traced(
    state: &CshState,
    cfg: &StepConfig,
    pot: &PotentialSpec,
) -> Result<(CshState, Vec<f64>), IntegratorError> {
    let cfg = StepConfig { scheme: Scheme::TwistedDuhamel, ..*cfg };
    let (next, deltas) = Stepper::new(*state.grid(), cfg, pot.clone())?.step(state)?;
    Ok((next, deltas))
}

/// One classical Runge-Kutta step of
/// `∂_tφ = u + i·a₀φ`, `∂_t u = Δφ − F_tot`, `∂_t a = ∇a₀ + E`.
pub fn rk4_reference_step(state: &CshState, cfg: &StepConfig, pot: &PotentialSpec) -> Result<CshState, IntegratorError> {
    let cfg = StepConfig { scheme: Scheme::Rk4Reference, ..*cfg };
    Ok(Stepper::new(*state.grid(), cfg, pot.clone())?.step(state)?.0)
}

/// Scalars recorded after every step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub t: f64,
    /// `∫|φ|²`
    pub charge: f64,
    /// `2∫Re(φ·conj(u))`
    pub charge_rate: f64,
    /// `‖div a‖/‖a‖_{H¹}` (0 when `a = 0`).
    pub div_rel: f64,
    pub picard_iters: u32,
    pub picard_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub scheme: Scheme,
    /// States at the diagnostic steps, starting with the initial state.
    pub states: Vec<CshState>,
    pub rows: Vec<DiagnosticsRow>,
    /// One record per step, index 0 is the initial state.
    pub records: Vec<StepRecord>,
    pub guard_warnings: u64,
}

impl Trajectory {
    pub fn last(&self) -> &CshState {
        self.states.last().expect("trajectory holds its initial state")
    }

    /// Largest relative divergence over every step.
    pub fn max_div_rel(&self) -> f64 {
        self.records.iter().map(|r| r.div_rel).fold(0.0, f64::max)
    }
}

/// A failed evolution with everything computed before the failure.
#[derive(Debug, Clone)]
pub struct EvolveFailure {
    pub error: IntegratorError,
    pub partial: Trajectory,
}

impl std::fmt::Display for EvolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} steps)", self.error, self.partial.records.len().saturating_sub(1))
    }
}

impl std::error::Error for EvolveFailure {}

fn record(state: &CshState, step: u64) -> StepRecord {
    StepRecord {
        step,
        t: state.t,
        charge: diagnostics::charge(state),
        charge_rate: diagnostics::charge_rate(state),
        div_rel: diagnostics::div_relative(state),
        picard_iters: state.provenance.picard_iters,
        picard_residual: state.provenance.picard_residual,
    }
}

/// Advances `initial` to `t_end` with `round((t_end − t)/dt)` uniform steps,
/// emitting a diagnostics row and keeping the state every `diag_every` steps
/// and at the final step.
pub fn evolve(
    initial: &CshState,
    cfg: &StepConfig,
    pot: &PotentialSpec,
    t_end: f64,
    diag_every: usize,
) -> Result<Trajectory, EvolveFailure> {
    let fail_early = |error: IntegratorError| EvolveFailure {
        error,
        partial: Trajectory {
            dt: cfg.dt,
            scheme: cfg.scheme,
            states: vec![initial.clone()],
            rows: vec![],
            records: vec![],
            guard_warnings: 0,
        },
    };
    if let Err(e) = cfg.validate() {
        return Err(fail_early(e));
    }
    if !(t_end > initial.t) {
        return Err(fail_early(IntegratorError::BadConfig(format!(
            "t_end {t_end} must exceed the initial time {}",
            initial.t
        ))));
    }
    let diag_every = diag_every.max(1);
    let steps = ((t_end - initial.t) / cfg.dt).round().max(1.0) as u64;
    let mut stepper = match Stepper::new(*initial.grid(), *cfg, pot.clone()) {
        Ok(s) => s,
        Err(e) => return Err(fail_early(e)),
    };
    let tag = cfg.scheme.tag();
    let mut traj = Trajectory {
        dt: cfg.dt,
        scheme: cfg.scheme,
        states: vec![initial.clone()],
        rows: vec![diagnostics::row(initial, pot, tag)],
        records: vec![record(initial, initial.provenance.step)],
        guard_warnings: 0,
    };
    let mut state = initial.clone();
    let mut outcome = Ok(());
    for k in 1..=steps {
        let guard = cfg.dt * state.a0.linf_norm().powi(2);
        if guard > cfg.delta0_guard {
            traj.guard_warnings += 1;
            log::warn!("step {k}: dt*|a0|^2 = {guard:.3e} exceeds delta0_guard {:.3e}", cfg.delta0_guard);
        }
        let mut next = match stepper.step(&state) {
            Ok((s, _)) => s,
            Err(e) => {
                outcome = Err(e);
                break;
            }
        };
        next.t = initial.t + k as f64 * cfg.dt;
        if !next.is_finite() {
            outcome = Err(IntegratorError::NonFinite { step: next.provenance.step });
            break;
        }
        traj.records.push(record(&next, next.provenance.step));
        if k % diag_every as u64 == 0 || k == steps {
            traj.rows.push(diagnostics::row(&next, pot, tag));
            traj.states.push(next.clone());
        }
        state = next;
    }
    diagnostics::fill_charge_rate_residuals(&mut traj);
    match outcome {
        Ok(()) => Ok(traj),
        Err(error) => Err(EvolveFailure { error, partial: traj }),
    }
}
