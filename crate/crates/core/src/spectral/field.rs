use super::fft::fft2;
use super::{GridSpec, SpectralError};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    Physical,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Complex,
    Real,
}

/// A sampled field on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    repr: Repr,
    kind: ValueKind,
    data: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec, kind: ValueKind) -> Self {
        Self { grid, repr: Repr::Physical, kind, data: vec![Complex64::default(); grid.len()] }
    }

    pub fn zeros_spectral(grid: GridSpec, kind: ValueKind) -> Self {
        Self { grid, repr: Repr::Spectral, kind, data: vec![Complex64::default(); grid.len()] }
    }

    pub fn from_data(
        grid: GridSpec,
        repr: Repr,
        kind: ValueKind,
        data: Vec<Complex64>,
    ) -> Result<Self, SpectralError> {
        if data.len() != grid.len() {
            return Err(SpectralError::BadLengthData { got: data.len(), want: grid.len() });
        }
        let mut f = Self { grid, repr, kind, data };
        if kind == ValueKind::Real && repr == Repr::Physical {
            f.strip_imag();
        }
        Ok(f)
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let n = grid.n;
        let mut data = Vec::with_capacity(grid.len());
        for i2 in 0..n {
            for i1 in 0..n {
                data.push(f(grid.x(i1), grid.x(i2)));
            }
        }
        Self { grid, repr: Repr::Physical, kind: ValueKind::Complex, data }
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::from_fn(grid, |x1, x2| Complex64::new(f(x1, x2), 0.0));
        out.kind = ValueKind::Real;
        out
    }

    pub fn constant(grid: GridSpec, c: Complex64) -> Self {
        let kind = if c.im == 0.0 { ValueKind::Real } else { ValueKind::Complex };
        Self { grid, repr: Repr::Physical, kind, data: vec![c; grid.len()] }
    }

    /// Spectral field with a single coefficient at signed mode `(m1, m2)`.
    pub fn mode(grid: GridSpec, m1: i64, m2: i64, amp: Complex64) -> Self {
        let mut f = Self::zeros_spectral(grid, ValueKind::Complex);
        let idx = grid.index_of(m2) * grid.n + grid.index_of(m1);
        f.data[idx] = amp;
        f
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn repr(&self) -> Repr {
        self.repr
    }
    pub fn kind(&self) -> ValueKind {
        self.kind
    }
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn same_grid(&self, other: &Self) -> Result<(), SpectralError> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch)
        }
    }

    pub fn with_kind(mut self, kind: ValueKind) -> Self {
        self.kind = kind;
        if kind == ValueKind::Real && self.repr == Repr::Physical {
            self.strip_imag();
        }
        self
    }

    fn strip_imag(&mut self) {
        for z in &mut self.data {
            z.im = 0.0;
        }
    }

    pub fn to_spectral(&self) -> Self {
        match self.repr {
            Repr::Spectral => self.clone(),
            Repr::Physical => {
                let mut data = self.data.clone();
                fft2(&mut data, self.grid.n, false);
                let s = 1.0 / self.grid.len() as f64;
                for z in &mut data {
                    *z *= s;
                }
                Self { grid: self.grid, repr: Repr::Spectral, kind: self.kind, data }
            }
        }
    }

    pub fn to_physical(&self) -> Self {
        match self.repr {
            Repr::Physical => self.clone(),
            Repr::Spectral => {
                let mut data = self.data.clone();
                fft2(&mut data, self.grid.n, true);
                let mut out = Self { grid: self.grid, repr: Repr::Physical, kind: self.kind, data };
                if out.kind == ValueKind::Real {
                    out.strip_imag();
                }
                out
            }
        }
    }

    pub fn into_spectral(self) -> Self {
        if self.repr == Repr::Spectral {
            self
        } else {
            self.to_spectral()
        }
    }

    pub fn into_physical(self) -> Self {
        if self.repr == Repr::Physical {
            self
        } else {
            self.to_physical()
        }
    }

    fn zip(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let (a, b) = if self.repr == other.repr {
            (self.clone(), std::borrow::Cow::Borrowed(other))
        } else {
            (self.clone(), std::borrow::Cow::Owned(match self.repr {
                Repr::Physical => other.to_physical(),
                Repr::Spectral => other.to_spectral(),
            }))
        };
        let kind = if a.kind == ValueKind::Real && b.kind == ValueKind::Real {
            ValueKind::Real
        } else {
            ValueKind::Complex
        };
        let data = a.data.iter().zip(b.data.iter()).map(|(&x, &y)| op(x, y)).collect();
        Self { grid: a.grid, repr: a.repr, kind, data }
    }

    /// Sum in the representation of `self`.
    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    /// Pointwise product (no dealiasing).
    pub fn mul(&self, other: &Self) -> Self {
        let a = self.to_physical();
        let b = other.to_physical();
        a.zip(&b, |x, y| x * y)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= c;
        }
        out
    }

    pub fn scale_complex(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= c;
        }
        if c.im != 0.0 {
            out.kind = ValueKind::Complex;
        }
        out
    }

    /// Applies `f` to every physical sample.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut out = self.to_physical();
        for z in &mut out.data {
            *z = f(*z);
        }
        out.kind = ValueKind::Complex;
        out
    }

    pub fn conj(&self) -> Self {
        let p = self.to_physical();
        let mut out = p.clone();
        for z in &mut out.data {
            *z = z.conj();
        }
        out
    }

    pub fn re(&self) -> Self {
        self.map(|z| Complex64::new(z.re, 0.0)).with_kind(ValueKind::Real)
    }

    pub fn im(&self) -> Self {
        self.map(|z| Complex64::new(z.im, 0.0)).with_kind(ValueKind::Real)
    }

    /// `|f|²` as a real field.
    pub fn norm_sqr(&self) -> Self {
        self.map(|z| Complex64::new(z.norm_sqr(), 0.0)).with_kind(ValueKind::Real)
    }

    pub fn l2_norm_sqr(&self) -> f64 {
        let s: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        match self.repr {
            Repr::Physical => s * self.grid.cell_area(),
            Repr::Spectral => s * self.grid.period_length * self.grid.period_length,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sqr().sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        let p = self.to_physical();
        p.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(∫|f|^p)^{1/p}`; `p = ∞` gives the sup over samples.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.linf_norm();
        }
        let f = self.to_physical();
        let s: f64 = f.data.iter().map(|z| z.norm().powf(p)).sum();
        (s * self.grid.cell_area()).powf(1.0 / p)
    }

    /// Spatial average.
    pub fn mean(&self) -> Complex64 {
        match self.repr {
            Repr::Spectral => self.data[0],
            Repr::Physical => self.data.iter().sum::<Complex64>() / self.grid.len() as f64,
        }
    }

    /// `∫ f` with the grid quadrature.
    pub fn integral(&self) -> Complex64 {
        let l = self.grid.period_length;
        self.mean() * l * l
    }

    /// Largest `|f̂(ξ) − conj f̂(−ξ)|` relative to `max |f̂|`.
    pub fn hermitian_defect(&self) -> f64 {
        let s = self.to_spectral();
        let g = self.grid;
        let n = g.n;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j2 in 0..n {
            for j1 in 0..n {
                let a = s.data[j2 * n + j1];
                let k1 = g.index_of(-g.mode(j1));
                let k2 = g.index_of(-g.mode(j2));
                let b = s.data[k2 * n + k1];
                worst = worst.max((a - b.conj()).norm());
                scale = scale.max(a.norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Relative L² distance, `‖a − b‖/max(‖a‖, ‖b‖)` (0 when both vanish).
    pub fn rel_diff(&self, other: &Self) -> f64 {
        let d = self.sub(other).l2_norm();
        let s = self.l2_norm().max(other.l2_norm());
        if s == 0.0 {
            d
        } else {
            d / s
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Resamples by spectral zero-padding or truncation onto `target`
    /// (same period length). Truncation drops modes outside the target lattice.
    pub fn resample(&self, target: GridSpec) -> Self {
        let src = self.to_spectral();
        let g = self.grid;
        let mut out = Self::zeros_spectral(target, self.kind);
        let half_src = g.n as i64 / 2;
        let half_dst = target.n as i64 / 2;
        for j2 in 0..g.n {
            let m2 = g.mode(j2);
            for j1 in 0..g.n {
                let m1 = g.mode(j1);
                let keep = |m: i64| -half_dst < m && m < half_dst && -half_src < m;
                if !(keep(m1) && keep(m2)) {
                    continue;
                }
                let idx = target.index_of(m2) * target.n + target.index_of(m1);
                out.data[idx] = src.data[j2 * g.n + j1];
            }
        }
        out
    }
}
