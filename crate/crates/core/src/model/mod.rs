//! State, potential and the Coulomb-gauge elliptic hierarchy.

mod elliptic;
mod gauge;
mod init;

pub use elliptic::{
    coulomb_initial_data, curl, divergence, eval_w, null_form_pair, solve_a0, solve_spatial_potentials,
    A0Parts,
};
pub(crate) use elliptic::{derive, im_product, Derived};
pub use gauge::gauge_transform;
pub use init::{fourier_modes, gaussian_bump, vortex_like, InitialData};

use crate::spectral::{ScalarField, SpectralError, ValueKind};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i64),
    #[error("invalid potential: {0}")]
    BadPotential(String),
    #[error("invalid initial data: {0}")]
    BadInit(String),
}

/// Sign `σ` in `∂₁a₂ − ∂₂a₁ = σ·Im(φ·conj(u))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sigma {
    Plus,
    Minus,
}

impl Sigma {
    pub fn from_i64(s: i64) -> Result<Self, ModelError> {
        match s {
            1 => Ok(Sigma::Plus),
            -1 => Ok(Sigma::Minus),
            other => Err(ModelError::BadSign(other)),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sigma::Plus => 1.0,
            Sigma::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sigma::Plus => 1,
            Sigma::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sigma::Plus => Sigma::Minus,
            Sigma::Minus => Sigma::Plus,
        }
    }
}

/// The sign under which the tracked curl constraint is transported by the
/// dynamics.
pub const DEFAULT_SIGMA: Sigma = Sigma::Minus;

/// Mass and self-interaction `V(r) = Σ_j c_j r^j` (no constant term).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub m: f64,
    /// `c_1, c_2, …`
    pub v_coeffs: Vec<f64>,
    /// Witness `α` with `V(r) + α²r ≥ 0`; `None` when unverified.
    pub alpha: Option<f64>,
    /// Upper end of the sampled range for the `α` check.
    pub r_max: f64,
}

const ALPHA_SAMPLES: usize = 4001;

impl PotentialSpec {
    pub fn new(m: f64, v_coeffs: Vec<f64>) -> Result<Self, ModelError> {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(ModelError::BadPotential(format!("mass {m} must be finite and nonnegative")));
        }
        if v_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::BadPotential("non-finite coefficient".into()));
        }
        Ok(Self { m, v_coeffs, alpha: None, r_max: 4.0 })
    }

    pub fn zero() -> Self {
        Self { m: 0.0, v_coeffs: vec![], alpha: Some(0.0), r_max: 4.0 }
    }

    /// `V(r) = r(1 − r)/16`.
    pub fn self_dual(m: f64) -> Self {
        Self { m, v_coeffs: vec![1.0 / 16.0, -1.0 / 16.0], alpha: None, r_max: 4.0 }
    }

    pub fn v(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.v_coeffs.iter().rev() {
            acc = (acc + c) * r;
        }
        acc
    }

    pub fn dv(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.v_coeffs.iter().enumerate().rev() {
            acc = acc * r + (j + 1) as f64 * c;
        }
        acc
    }

    fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        (1..ALPHA_SAMPLES).map(move |i| self.r_max * i as f64 / (ALPHA_SAMPLES - 1) as f64)
    }

    /// Smallest `α ≥ 0` with `V(r) + α²r ≥ 0` at the sample points of
    /// `(0, r_max]`.
    pub fn fit_alpha(&self) -> f64 {
        self.samples().map(|r| (-self.v(r) / r).max(0.0)).fold(0.0, f64::max).sqrt()
    }

    pub fn check_alpha(&self, alpha: f64) -> bool {
        self.samples().all(|r| self.v(r) + alpha * alpha * r >= -1e-14 * r)
    }

    pub fn with_fitted_alpha(mut self) -> Self {
        self.alpha = Some(self.fit_alpha());
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self, ModelError> {
        if !self.check_alpha(alpha) {
            return Err(ModelError::BadPotential(format!(
                "V(r) + alpha^2 r < 0 somewhere on [0, {}] for alpha = {alpha}",
                self.r_max
            )));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub step: u64,
    pub picard_iters: u32,
    pub picard_residual: f64,
}

/// Dynamical state. `a0, a1, a2` are caches of the elliptic solves from
/// `(phi, u)`; `a_tracked` is the spatial potential advanced by its own
/// evolution equation `∂_t a = ∇a₀ + E`, used to monitor the curl constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct CshState {
    pub t: f64,
    pub phi: ScalarField,
    pub u: ScalarField,
    pub a0: ScalarField,
    pub a1: ScalarField,
    pub a2: ScalarField,
    pub a_tracked: [ScalarField; 2],
    pub sigma: Sigma,
    pub provenance: Provenance,
}

impl CshState {
    /// Builds a state from `(φ, u)` with freshly solved potentials;
    /// the tracked potential starts equal to the solved one.
    pub fn new(phi: ScalarField, u: ScalarField, sigma: Sigma, t: f64) -> Result<Self, ModelError> {
        phi.same_grid(&u)?;
        let phi = phi.to_physical().with_kind(ValueKind::Complex);
        let u = u.to_physical().with_kind(ValueKind::Complex);
        let (a1, a2) = solve_spatial_potentials(&phi, &u, sigma)?;
        let parts = solve_a0(&phi, &a1, &a2)?;
        Ok(Self {
            t,
            a_tracked: [a1.clone(), a2.clone()],
            phi,
            u,
            a0: parts.a0,
            a1,
            a2,
            sigma,
            provenance: Provenance::default(),
        })
    }

    pub fn zero(grid: crate::spectral::GridSpec, sigma: Sigma) -> Self {
        let z = ScalarField::zeros(grid, ValueKind::Complex);
        Self::new(z.clone(), z, sigma, 0.0).expect("zero state")
    }

    pub fn grid(&self) -> &crate::spectral::GridSpec {
        self.phi.grid()
    }

    /// Recomputes the potential caches from `(phi, u)`.
    pub fn refresh(&mut self) -> Result<(), ModelError> {
        let (a1, a2) = solve_spatial_potentials(&self.phi, &self.u, self.sigma)?;
        let parts = solve_a0(&self.phi, &a1, &a2)?;
        self.a1 = a1;
        self.a2 = a2;
        self.a0 = parts.a0;
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite()
            && self.u.is_finite()
            && self.a0.is_finite()
            && self.a1.is_finite()
            && self.a2.is_finite()
            && self.a_tracked.iter().all(|a| a.is_finite())
    }
}
