//! Empirical probes of the harmonic-analysis inequalities behind the
//! well-posedness argument: both sides are evaluated on seeded random
//! ensembles and the ratio is tracked across one octave of resolution.
//!
//! A bounded ratio that does not grow with resolution is the deliverable;
//! no claim is made about the implicit constants.

mod catalogue;
mod ensemble;
mod measure;

pub use catalogue::{find, list_estimates, EstimateInfo, ParamSpec};

use crate::lp::{s_gamma_norm, LpError, TrajectoryNormReport};
use crate::spectral::{GridSpec, SpectralError};
use ensemble::{Member, Traj};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;
use thiserror::Error;

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("no estimate named `{0}`")]
    NotFound(String),
    #[error("`{id}` does not take a parameter `{param}`")]
    UnknownParameter { id: String, param: String },
    #[error("inadmissible parameters for `{id}`: {reason}")]
    InadmissibleParameters { id: String, reason: String },
    #[error("bad case: {0}")]
    BadCase(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Drift below this is a pass.
pub const DRIFT_PASS: f64 = 2.0;
/// Drift at or above this marks the case unstable.
pub const DRIFT_UNSTABLE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateCase {
    pub id: String,
    /// Overrides of the entry's defaults.
    pub params: Params,
    pub ensemble_size: usize,
    pub seed: u64,
    /// Base resolution; the case is repeated at `2n`.
    pub n: usize,
}

impl EstimateCase {
    /// The entry's default case: default parameters and resolution, three
    /// members (one per decay exponent).
    pub fn default_for(id: &str) -> Result<Self, EstimateError> {
        let info = find(id)?;
        Ok(Self { id: id.into(), params: Params::new(), ensemble_size: 3, seed: 0, n: info.default_n })
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.into(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateStatus {
    Pass,
    Marginal,
    Unstable,
    Skipped,
}

impl EstimateStatus {
    pub fn from_drift(ratio_max: f64, drift: f64) -> Self {
        if !ratio_max.is_finite() || !drift.is_finite() || drift >= DRIFT_UNSTABLE {
            Self::Unstable
        } else if drift >= DRIFT_PASS {
            Self::Marginal
        } else {
            Self::Pass
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub id: String,
    pub params: Params,
    pub seed: u64,
    pub n: usize,
    pub ensemble_size: usize,
    /// Largest LHS/RHS over the ensemble at `n`.
    pub ratio_max: f64,
    pub ratio_median: f64,
    /// `ratio_max` at `2n` over `ratio_max` at `n`.
    pub drift_factor: f64,
    pub status: EstimateStatus,
}

impl EstimateReport {
    /// Report for a case that was not run.
    pub fn skipped(case: &EstimateCase) -> Self {
        Self {
            id: case.id.clone(),
            params: case.params.clone(),
            seed: case.seed,
            n: case.n,
            ensemble_size: case.ensemble_size,
            ratio_max: f64::NAN,
            ratio_median: f64::NAN,
            drift_factor: f64::NAN,
            status: EstimateStatus::Skipped,
        }
    }
}

type Key = (u64, usize, usize, Traj);

/// Runs cases, sharing S-norm evaluations of ensemble trajectories between
/// them.
#[derive(Default)]
pub struct Lab {
    reports: RefCell<HashMap<Key, Rc<TrajectoryNormReport>>>,
}

/// Per-member evaluation context.
pub(crate) struct Ctx<'a> {
    lab: &'a Lab,
    pub m: Member,
}

impl Ctx<'_> {
    pub fn grid(&self) -> GridSpec {
        self.m.grid
    }

    pub fn report(&self, kind: Traj) -> Result<Rc<TrajectoryNormReport>, EstimateError> {
        let key = (self.m.seed, self.m.index, self.m.grid.n, kind);
        if let Some(r) = self.lab.reports.borrow().get(&key) {
            return Ok(r.clone());
        }
        let r = Rc::new(s_gamma_norm(&self.m.trajectory(kind), 0.0)?);
        self.lab.reports.borrow_mut().insert(key, r.clone());
        Ok(r)
    }

    /// `‖·‖_{S^γ}` of a named trajectory.
    pub fn s(&self, kind: Traj, gamma: f64) -> Result<f64, EstimateError> {
        Ok(self.report(kind)?.reweight(gamma))
    }

    /// `‖P_k ·‖_{S⁰_k}` of a named trajectory.
    pub fn s0k(&self, kind: Traj, k: i64) -> Result<f64, EstimateError> {
        let r = self.report(kind)?;
        r.bands
            .iter()
            .find(|b| b.k == k)
            .map(|b| b.value)
            .ok_or_else(|| EstimateError::BadCase(format!("band {k} not resolved at n = {}", self.m.grid.n)))
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Entry defaults merged with the case's overrides, checked against the
/// entry's hypotheses.
pub fn resolve_params(case: &EstimateCase) -> Result<Params, EstimateError> {
    let info = find(&case.id)?;
    let mut p: Params = info.params.iter().map(|s| (s.name.to_string(), s.default)).collect();
    for (k, v) in &case.params {
        if !p.contains_key(k) {
            return Err(EstimateError::UnknownParameter { id: case.id.clone(), param: k.clone() });
        }
        p.insert(k.clone(), *v);
    }
    info.admissible(&p).map_err(|reason| EstimateError::InadmissibleParameters { id: case.id.clone(), reason })?;
    Ok(p)
}

impl Lab {
    pub fn new() -> Self {
        Self::default()
    }

    fn ratios(&self, info: &EstimateInfo, p: &Params, seed: u64, size: usize, n: usize) -> Result<Vec<f64>, EstimateError> {
        let grid = GridSpec::standard(n);
        (0..size)
            .map(|index| {
                let ctx = Ctx { lab: self, m: Member { seed, index, grid } };
                let parts = info.evaluate(&ctx, p)?;
                Ok(parts.into_iter().map(|(l, r)| ratio(l, r)).fold(0.0, f64::max))
            })
            .collect()
    }

    pub fn run(&self, case: &EstimateCase) -> Result<EstimateReport, EstimateError> {
        self.run_entry(&find(&case.id)?, case)
    }

    fn run_entry(&self, info: &EstimateInfo, case: &EstimateCase) -> Result<EstimateReport, EstimateError> {
        let p = resolve_params(case)?;
        if case.ensemble_size == 0 {
            return Err(EstimateError::BadCase("ensemble_size must be positive".into()));
        }
        if !case.n.is_power_of_two() || case.n < info.min_n {
            return Err(EstimateError::BadCase(format!(
                "`{}` needs a power-of-two n of at least {}, got {}",
                case.id, info.min_n, case.n
            )));
        }
        let mut base = self.ratios(info, &p, case.seed, case.ensemble_size, case.n)?;
        let fine = self.ratios(info, &p, case.seed, case.ensemble_size, 2 * case.n)?;
        let ratio_max = base.iter().cloned().fold(0.0, f64::max);
        let fine_max = fine.iter().cloned().fold(0.0, f64::max);
        let ratio_median = median(&mut base);
        let drift_factor = if ratio_max == 0.0 && fine_max == 0.0 { 1.0 } else { fine_max / ratio_max };
        let status = EstimateStatus::from_drift(ratio_max, drift_factor);
        log::info!("{}: max {ratio_max:.4e} median {ratio_median:.4e} drift {drift_factor:.3}", case.id);
        Ok(EstimateReport {
            id: case.id.clone(),
            params: p,
            seed: case.seed,
            n: case.n,
            ensemble_size: case.ensemble_size,
            ratio_max,
            ratio_median,
            drift_factor,
            status,
        })
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Runs one case on a fresh cache.
pub fn run_estimate(case: &EstimateCase) -> Result<EstimateReport, EstimateError> {
    Lab::new().run(case)
}

/// The default case of every catalogue entry.
pub fn default_cases(seed: u64) -> Vec<EstimateCase> {
    list_estimates()
        .iter()
        .map(|e| EstimateCase { seed, ..EstimateCase::default_for(e.id).expect("listed") })
        .collect()
}
