#![allow(dead_code)]

use csh_core::spectral::{Complex64, GridSpec, Repr, ScalarField, ValueKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random physical field with i.i.d. normal-ish samples.
pub fn random_physical(grid: GridSpec, seed: u64) -> ScalarField {
    let mut r = rng(seed);
    let data = (0..grid.len())
        .map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
        .collect();
    ScalarField::from_data(grid, Repr::Physical, ValueKind::Complex, data).unwrap()
}

/// Random spectrum supported on `|m_i| <= mmax`, optionally without mean.
pub fn random_band_limited(grid: GridSpec, mmax: i64, mean_zero: bool, seed: u64) -> ScalarField {
    let mut r = rng(seed);
    let mut f = ScalarField::zeros_spectral(grid, ValueKind::Complex);
    let n = grid.n;
    for m2 in -mmax..=mmax {
        for m1 in -mmax..=mmax {
            if mean_zero && m1 == 0 && m2 == 0 {
                continue;
            }
            let idx = grid.index_of(m2) * n + grid.index_of(m1);
            f.data_mut()[idx] = Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        }
    }
    f.to_physical()
}

/// Random field supported on `|ξ| <= radius`.
pub fn random_disc(grid: GridSpec, radius: f64, mean_zero: bool, seed: u64) -> ScalarField {
    let mut r = rng(seed);
    let mut f = ScalarField::zeros_spectral(grid, ValueKind::Complex);
    let n = grid.n;
    for j2 in 0..n {
        for j1 in 0..n {
            let (x1, x2) = (grid.xi(j1), grid.xi(j2));
            let rad = (x1 * x1 + x2 * x2).sqrt();
            if rad > radius || (mean_zero && j1 == 0 && j2 == 0) {
                continue;
            }
            if grid.is_nyquist(j1) || grid.is_nyquist(j2) {
                continue;
            }
            f.data_mut()[j2 * n + j1] = Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        }
    }
    f.to_physical()
}

pub fn random_real_band_limited(grid: GridSpec, mmax: i64, seed: u64) -> ScalarField {
    random_band_limited(grid, mmax, false, seed).re()
}
