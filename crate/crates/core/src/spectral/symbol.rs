use super::field::{Repr, ScalarField, ValueKind};
use super::SpectralError;
use num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    fn pick(self, xi: [f64; 2]) -> f64 {
        match self {
            Axis::X1 => xi[0],
            Axis::X2 => xi[1],
        }
    }
}

type SymbolFn = Arc<dyn Fn([f64; 2]) -> Complex64 + Send + Sync>;

/// A Fourier multiplier. Odd symbols (`Deriv`, `Riesz`) vanish on the
/// Nyquist line of their axis so that real fields stay real.
#[derive(Clone)]
pub enum Symbol {
    /// `iξ_j`
    Deriv(Axis),
    /// `|ξ|^s`; the value at `ξ = 0` is 0 for `s > 0`, 1 for `s = 0`,
    /// otherwise `zero` (required when the input has nonzero mean).
    AbsGrad { s: f64, zero: Option<Complex64> },
    /// `(1 + |ξ|²)^{s/2}`
    Bracket(f64),
    /// `iξ_j/|ξ|²`, 0 at the origin. Equals `(−Δ)⁻¹∂_j`.
    Riesz(Axis),
    /// `−1/|ξ|²`; the zero mode takes `zero`.
    InvLap { zero: Option<Complex64> },
    /// `−|ξ|²`
    Laplacian,
    Custom { f: SymbolFn, zero: Option<Complex64> },
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Symbol::Deriv(a) => write!(fm, "Deriv({a:?})"),
            Symbol::AbsGrad { s, zero } => write!(fm, "AbsGrad({s}, {zero:?})"),
            Symbol::Bracket(s) => write!(fm, "Bracket({s})"),
            Symbol::Riesz(a) => write!(fm, "Riesz({a:?})"),
            Symbol::InvLap { zero } => write!(fm, "InvLap({zero:?})"),
            Symbol::Laplacian => write!(fm, "Laplacian"),
            Symbol::Custom { zero, .. } => write!(fm, "Custom({zero:?})"),
        }
    }
}

impl Symbol {
    pub fn abs_grad(s: f64) -> Self {
        Symbol::AbsGrad { s, zero: None }
    }

    pub fn inv_lap() -> Self {
        Symbol::InvLap { zero: None }
    }

    pub fn custom(f: impl Fn([f64; 2]) -> Complex64 + Send + Sync + 'static) -> Self {
        Symbol::Custom { f: Arc::new(f), zero: None }
    }

    fn odd_axis(&self) -> Option<Axis> {
        match self {
            Symbol::Deriv(a) | Symbol::Riesz(a) => Some(*a),
            _ => None,
        }
    }

    /// Symbol value away from the origin.
    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        match self {
            Symbol::Deriv(a) => Complex64::new(0.0, a.pick(xi)),
            Symbol::AbsGrad { s, .. } => Complex64::new(r2.powf(0.5 * s), 0.0),
            Symbol::Bracket(s) => Complex64::new((1.0 + r2).powf(0.5 * s), 0.0),
            Symbol::Riesz(a) => Complex64::new(0.0, a.pick(xi) / r2),
            Symbol::InvLap { .. } => Complex64::new(-1.0 / r2, 0.0),
            Symbol::Laplacian => Complex64::new(-r2, 0.0),
            Symbol::Custom { f, .. } => f(xi),
        }
    }

    /// Value at `ξ = 0`, `None` when undefined.
    pub fn at_origin(&self) -> Option<Complex64> {
        match self {
            Symbol::Deriv(_) | Symbol::Riesz(_) | Symbol::Laplacian => Some(Complex64::default()),
            Symbol::Bracket(_) => Some(Complex64::new(1.0, 0.0)),
            Symbol::AbsGrad { s, zero } => {
                if *s > 0.0 {
                    Some(Complex64::default())
                } else if *s == 0.0 {
                    Some(Complex64::new(1.0, 0.0))
                } else {
                    *zero
                }
            }
            Symbol::InvLap { zero } => *zero,
            Symbol::Custom { f, zero } => zero.or_else(|| {
                let v = f([0.0, 0.0]);
                (v.re.is_finite() && v.im.is_finite()).then_some(v)
            }),
        }
    }

    fn preserves_real(&self) -> bool {
        !matches!(self, Symbol::Custom { .. })
    }
}

/// Multiplies the spectrum of `f` by `symbol`; the result is spectral.
/// A mean below `1e−12` of the coefficient norm counts as zero.
pub fn apply_multiplier(f: &ScalarField, symbol: &Symbol) -> Result<ScalarField, SpectralError> {
    let mut out = f.to_spectral();
    let g = *out.grid();
    let n = g.n;
    let zero = match symbol.at_origin() {
        Some(v) => v,
        None => {
            let m = out.data()[0];
            let total: f64 = out.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if m.norm() > 1e-12 * total {
                return Err(SpectralError::SingularSymbol(m.norm()));
            }
            Complex64::default()
        }
    };
    let odd = symbol.odd_axis();
    let data = out.data_mut();
    for j2 in 0..n {
        let xi2 = g.xi(j2);
        for j1 in 0..n {
            let idx = j2 * n + j1;
            if idx == 0 {
                data[0] *= zero;
                continue;
            }
            let on_nyq = match odd {
                Some(Axis::X1) => g.is_nyquist(j1),
                Some(Axis::X2) => g.is_nyquist(j2),
                None => false,
            };
            if on_nyq {
                data[idx] = Complex64::default();
            } else {
                data[idx] *= symbol.eval([g.xi(j1), xi2]);
            }
        }
    }
    let kind = if f.kind() == ValueKind::Real && symbol.preserves_real() {
        ValueKind::Real
    } else {
        ValueKind::Complex
    };
    Ok(out.with_kind(kind))
}

/// Zeroes modes with `max(|m1|,|m2|) ≥ dealias_fraction·n/2`.
pub fn dealias(f: &ScalarField) -> ScalarField {
    let mut out = f.to_spectral();
    dealias_in_place(&mut out);
    out
}

pub(crate) fn dealias_in_place(f: &mut ScalarField) {
    debug_assert_eq!(f.repr(), Repr::Spectral);
    let g = *f.grid();
    let n = g.n;
    let cut = g.dealias_cutoff();
    let data = f.data_mut();
    for j2 in 0..n {
        let m2 = g.mode(j2).unsigned_abs() as f64;
        for j1 in 0..n {
            let m1 = g.mode(j1).unsigned_abs() as f64;
            if m1.max(m2) >= cut {
                data[j2 * n + j1] = Complex64::default();
            }
        }
    }
}
