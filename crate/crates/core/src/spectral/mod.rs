//! Periodic 2D grid, Fourier transforms and Fourier multipliers.
//!
//! Samples are stored row-major with the x₁ index fastest: entry
//! `i2 * n + i1` holds the value at `(i1·h, i2·h)`, `h = L/n`.
//! Spectral coefficients are Fourier-series coefficients
//! `f̂_m = n⁻² Σ_x f(x) e^{−iξ_m·x}`, so a constant field `c` has `f̂_0 = c`
//! and `‖f‖²_{L²} = L² Σ_m |f̂_m|²`.

pub(crate) mod fft;
mod field;
mod symbol;

pub use field::{Repr, ScalarField, ValueKind};
pub use symbol::{apply_multiplier, dealias, Axis, Symbol};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use num_complex::Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid size {0} must be a power of two and at least 8")]
    BadSize(usize),
    #[error("period length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("dealias fraction must lie in (0, 1], got {0}")]
    BadDealias(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("symbol is singular at xi = 0 and the field has nonzero mean {0:e}")]
    SingularSymbol(f64),
    #[error("data length {got} does not match n*n = {want}")]
    BadLengthData { got: usize, want: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub period_length: f64,
    pub dealias_fraction: f64,
}

impl GridSpec {
    pub fn new(n: usize, period_length: f64, dealias_fraction: f64) -> Result<Self, SpectralError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(SpectralError::BadSize(n));
        }
        if !(period_length > 0.0 && period_length.is_finite()) {
            return Err(SpectralError::BadLength(period_length));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(SpectralError::BadDealias(dealias_fraction));
        }
        Ok(Self { n, period_length, dealias_fraction })
    }

    /// `n` points on `[0, 2π)²` with the 2/3 rule.
    pub fn standard(n: usize) -> Self {
        Self::new(n, std::f64::consts::TAU, 2.0 / 3.0).expect("valid standard grid")
    }

    pub fn with_n(&self, n: usize) -> Result<Self, SpectralError> {
        Self::new(n, self.period_length, self.dealias_fraction)
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn spacing(&self) -> f64 {
        self.period_length / self.n as f64
    }

    /// Quadrature weight of one sample.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Lattice spacing in frequency, `2π/L`.
    pub fn dxi(&self) -> f64 {
        std::f64::consts::TAU / self.period_length
    }

    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / self.period_length
    }

    /// Signed mode index in `[−n/2, n/2)` of storage index `j`.
    #[inline]
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Storage index of signed mode `m` (taken mod n).
    #[inline]
    pub fn index_of(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    #[inline]
    pub fn xi(&self, j: usize) -> f64 {
        self.dxi() * self.mode(j) as f64
    }

    /// Physical coordinate of sample index `i`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    /// Largest retained `max(|m1|,|m2|)` after dealiasing is `< cutoff`.
    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_fraction * self.n as f64 / 2.0
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }
}
