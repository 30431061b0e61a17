use crate::lp::time_norm;
use crate::spectral::{apply_multiplier, dealias, Complex64, GridSpec, ScalarField, Symbol};

/// Trajectories are sampled at 65 uniform times on `[0, 1]`.
pub(crate) const SAMPLES: usize = 65;
pub(crate) const DT: f64 = 1.0 / (SAMPLES - 1) as f64;

pub(crate) fn times() -> impl Iterator<Item = f64> {
    (0..SAMPLES).map(|i| i as f64 * DT)
}

/// Largest `max(|m1|, |m2|)` kept by the 2/3 rule.
pub(crate) fn band_limit(g: &GridSpec) -> i64 {
    g.dealias_cutoff().ceil() as i64 - 1
}

/// Finest grid needed to hold a product of `count` band-limited factors
/// without aliasing.
pub(crate) fn product_grid(g: &GridSpec, count: usize) -> GridSpec {
    let need = count as i64 * band_limit(g);
    let mut p = 1;
    while need >= (p * g.n / 2) as i64 {
        p *= 2;
    }
    g.with_n(g.n * p).expect("power of two")
}

/// Exact pointwise product of band-limited factors, physical on a padded grid.
pub(crate) fn product(factors: &[&ScalarField]) -> ScalarField {
    let target = product_grid(factors[0].grid(), factors.len());
    let mut acc: Option<ScalarField> = None;
    for f in factors {
        let f = dealias(f).resample(target).into_physical();
        acc = Some(match acc {
            None => f,
            Some(a) => a.mul(&f),
        });
    }
    acc.expect("at least one factor")
}

pub(crate) fn multiply(f: &ScalarField, sym: Symbol) -> ScalarField {
    apply_multiplier(f, &sym).expect("symbol regular at the origin")
}

/// `|∇|^s` with the zero mode dropped.
pub(crate) fn abs_grad(f: &ScalarField, s: f64) -> ScalarField {
    multiply(f, Symbol::AbsGrad { s, zero: Some(Complex64::default()) })
}

/// `‖f‖_{Ḣ^s}` without the zero mode.
pub(crate) fn hom(f: &ScalarField, s: f64) -> f64 {
    crate::lp::sobolev_norm(f, s, true)
}

/// `‖f‖_{H^s}`
pub(crate) fn inh(f: &ScalarField, s: f64) -> f64 {
    crate::lp::sobolev_norm(f, s, false)
}

/// Sup over a twice refined grid.
pub(crate) fn sup(f: &ScalarField) -> f64 {
    let g = *f.grid();
    f.resample(g.with_n(2 * g.n).expect("power of two")).linf_norm()
}

/// `L^p_x` on a twice refined grid; `p = ∞` is the sampled sup.
pub(crate) fn lp(f: &ScalarField, p: f64) -> f64 {
    let g = *f.grid();
    f.resample(g.with_n(2 * g.n).expect("power of two")).lp_norm(p)
}

pub(crate) fn lt(values: &[f64], q: f64) -> f64 {
    time_norm(values, DT, q)
}

pub(crate) fn max(values: &[f64]) -> f64 {
    values.iter().cloned().fold(0.0, f64::max)
}

/// `‖v‖_{ℓ^p}`
pub(crate) fn seq_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return max(v);
    }
    v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}
