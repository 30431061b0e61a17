//! Littlewood-Paley projections, Klainerman-Tataru cube covers and the
//! dyadic space-time norms built on them.
//!
//! The bump is `χ(r) = 1 − T((r − 2)/2)` with `T(x) = ψ(x)/(ψ(x) + ψ(1 − x))`,
//! `ψ(x) = e^{−1/x}` for `x > 0` and 0 otherwise; so `χ = 1` on `r ≤ 2` and
//! `χ = 0` on `r ≥ 4`. Band `k` is `P_k = χ(·/2^k) − χ(·/2^{k−1})`, supported
//! in `2^k ≤ |ξ| ≤ 2^{k+2}`, with `2^k` measured in angular frequency.

mod cubes;
mod norms;
mod trichotomy;

pub use cubes::{cube_cover, Cube, CubeCover, CUBE_COUNT_CONSTANT, ORTHOGONALITY_BOUNDS};
pub use norms::{
    ks_term, s0k_detail, s0k_norm, s_gamma_norm, sobolev_norm, square_function_norms, square_function_sup,
    time_norm, BandNorm, FieldSeries, TrajectoryNormReport,
};
pub use trichotomy::{classify_triple, trichotomy_split, Trichotomy};

use crate::spectral::{GridSpec, ScalarField};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("band {k} is not resolvable (resolvable bands {lo}..={hi})")]
    BandOutOfRange { k: i64, lo: i64, hi: i64 },
    #[error("cube scale {ell} exceeds band {k}")]
    BadScale { ell: i64, k: i64 },
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    #[error("trajectory samples are not uniformly spaced")]
    NonUniformTimes,
    #[error("fields live on different grids")]
    GridMismatch,
}

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth monotone step: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = psi(x);
        a / (a + psi(1.0 - x))
    }
}

/// Radial cutoff profile.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - 2.0) / 2.0)
}

pub fn chi_k(k: i64, r: f64) -> f64 {
    chi(r / 2f64.powi(k as i32))
}

pub fn band_symbol(k: i64, r: f64) -> f64 {
    chi_k(k, r) - chi_k(k - 1, r)
}

/// Inclusive range of bands the grid resolves: the lowest band catches the
/// lattice frequency `2π/L`, the highest keeps `2^{k+2}` at or below Nyquist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandRange {
    pub lo: i64,
    pub hi: i64,
}

impl BandRange {
    pub fn of(grid: &GridSpec) -> Self {
        let lo = grid.dxi().log2().floor() as i64 - 1;
        let hi = grid.nyquist().log2().floor() as i64 - 2;
        Self { lo, hi }
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn contains(&self, k: i64) -> bool {
        k <= self.hi
    }
}

/// Finest cube scale: one cube per lattice point.
pub fn lattice_scale(grid: &GridSpec) -> i64 {
    grid.dxi().log2().floor() as i64
}

fn radial_multiply(f: &ScalarField, sym: impl Fn(f64) -> f64) -> ScalarField {
    let mut out = f.to_spectral();
    let g = *out.grid();
    let n = g.n;
    let data = out.data_mut();
    for j2 in 0..n {
        let x2 = g.xi(j2);
        for j1 in 0..n {
            let x1 = g.xi(j1);
            data[j2 * n + j1] *= sym((x1 * x1 + x2 * x2).sqrt());
        }
    }
    out
}

pub(crate) fn check_band(grid: &GridSpec, k: i64) -> Result<(), LpError> {
    let r = BandRange::of(grid);
    if r.contains(k) {
        Ok(())
    } else {
        Err(LpError::BandOutOfRange { k, lo: r.lo, hi: r.hi })
    }
}

/// `P_k f`, returned in spectral form.
pub fn lp_project(f: &ScalarField, k: i64) -> Result<ScalarField, LpError> {
    check_band(f.grid(), k)?;
    Ok(radial_multiply(f, |r| band_symbol(k, r)))
}

/// `P_{≤k} f`. Any `k` is accepted: above the resolvable range the symbol is
/// identically 1 on the lattice.
pub fn lp_project_leq(f: &ScalarField, k: i64) -> ScalarField {
    radial_multiply(f, |r| chi_k(k, r))
}
