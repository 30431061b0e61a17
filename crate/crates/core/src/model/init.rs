use super::ModelError;
use crate::spectral::{dealias, Complex64, GridSpec, ScalarField};
use serde::{Deserialize, Serialize};

/// Sum over the 3×3 nearest periodic images, so profiles that have decayed
/// within one period come out smooth on the torus.
fn periodize(grid: &GridSpec, center: [f64; 2], f: impl Fn(f64, f64) -> Complex64) -> ScalarField {
    let l = grid.period_length;
    ScalarField::from_fn(*grid, |x1, x2| {
        let mut acc = Complex64::default();
        for s2 in -1..=1 {
            for s1 in -1..=1 {
                acc += f(x1 - center[0] + s1 as f64 * l, x2 - center[1] + s2 as f64 * l);
            }
        }
        acc
    })
}

/// `amplitude·exp(−|x − center|²/(2·width²))`, periodized and dealiased.
pub fn gaussian_bump(grid: &GridSpec, amplitude: f64, width: f64, center: [f64; 2]) -> Result<ScalarField, ModelError> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(ModelError::BadInit(format!("width must be positive, got {width}")));
    }
    let w2 = 2.0 * width * width;
    let f = periodize(grid, center, |y1, y2| Complex64::new(amplitude * (-(y1 * y1 + y2 * y2) / w2).exp(), 0.0));
    Ok(dealias(&f).to_physical())
}

/// Sum of `amp·e^{i(m₁x₁ + m₂x₂)·2π/L}`; modes must survive dealiasing.
pub fn fourier_modes(grid: &GridSpec, modes: &[(i64, i64, Complex64)]) -> Result<ScalarField, ModelError> {
    let cut = grid.dealias_cutoff();
    let mut f = ScalarField::zeros_spectral(*grid, crate::spectral::ValueKind::Complex);
    for &(m1, m2, amp) in modes {
        if m1.unsigned_abs().max(m2.unsigned_abs()) as f64 >= cut {
            return Err(ModelError::BadInit(format!("mode ({m1}, {m2}) is removed by dealiasing")));
        }
        f = f.add(&ScalarField::mode(*grid, m1, m2, amp));
    }
    Ok(f.to_physical())
}

/// `(r/r_c)^{|n|}e^{inθ}·exp(−r²/(2r_c²))` about the domain center: a
/// localized profile with a winding-`n` zero, periodized and dealiased.
pub fn vortex_like(grid: &GridSpec, winding: i64, core_radius: f64) -> Result<ScalarField, ModelError> {
    if !(core_radius > 0.0 && core_radius.is_finite()) {
        return Err(ModelError::BadInit(format!("core radius must be positive, got {core_radius}")));
    }
    let c = grid.period_length / 2.0;
    let p = winding.unsigned_abs() as i32;
    let f = periodize(grid, [c, c], |y1, y2| {
        let r2 = (y1 * y1 + y2 * y2) / (core_radius * core_radius);
        let z = Complex64::new(y1, y2 * winding.signum() as f64) / core_radius;
        z.powi(p) * (-0.5 * r2).exp()
    });
    Ok(dealias(&f).to_physical())
}

/// Built-in initial data. `u = iω·φ`, so `ω ≠ 0` gives a nonzero charge
/// density `Im(φ·conj(u)) = −ω|φ|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum InitialData {
    Zero,
    GaussianBump { amplitude: f64, width: f64, center: [f64; 2], omega: f64 },
    FourierModes { modes: Vec<(i64, i64, [f64; 2])>, omega: f64 },
    VortexLike { winding: i64, core_radius: f64, amplitude: f64, omega: f64 },
}

impl InitialData {
    pub fn build(&self, grid: &GridSpec) -> Result<(ScalarField, ScalarField), ModelError> {
        let (phi, omega) = match self {
            InitialData::Zero => (ScalarField::zeros(*grid, crate::spectral::ValueKind::Complex), 0.0),
            InitialData::GaussianBump { amplitude, width, center, omega } => {
                (gaussian_bump(grid, *amplitude, *width, *center)?, *omega)
            }
            InitialData::FourierModes { modes, omega } => {
                let m: Vec<_> = modes.iter().map(|&(a, b, [re, im])| (a, b, Complex64::new(re, im))).collect();
                (fourier_modes(grid, &m)?, *omega)
            }
            InitialData::VortexLike { winding, core_radius, amplitude, omega } => {
                (vortex_like(grid, *winding, *core_radius)?.scale(*amplitude), *omega)
            }
        };
        let phi = phi.with_kind(crate::spectral::ValueKind::Complex);
        let u = phi.scale_complex(Complex64::new(0.0, omega));
        Ok((phi, u))
    }
}
