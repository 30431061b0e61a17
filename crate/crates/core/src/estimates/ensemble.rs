use super::measure::{abs_grad, band_limit, times, DT};
use crate::integrator::half_wave;
use crate::lp::FieldSeries;
use crate::spectral::{Complex64, GridSpec, ScalarField, ValueKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Spectral decay exponents `a` in `|ξ|^{−a}`, cycled over ensemble members.
pub(crate) const POWER_LAWS: [f64; 3] = [0.5, 1.0, 1.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Role {
    F1 = 1,
    F2,
    F3,
    F4,
    Disk,
    Omega,
}

/// Named trajectories of a member; their S-norm band values are cached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Traj {
    /// `cos(t|∇|) f₁`
    Cos1,
    /// `sin(t|∇|) f₁`
    Sin1,
    /// `|∇|⁻¹ sin(t|∇|) g₂` with `g₂ = |∇| f₂`
    Sin2,
    /// `∫₀ᵗ |∇|⁻¹ sin((t−s)|∇|) F(s) ds`, `F(s) = e^{iωs}|∇| f₃`
    DuhamelF,
    /// `∫₀ᵗ sin((t−s)|∇|) G(s) ds`, `G(s) = e^{iωs} f₄`
    DuhamelGSin,
    /// `∫₀ᵗ cos((t−s)|∇|) G(s) ds`
    DuhamelGCos,
    /// `cos(t|∇|) Re f₃`, real
    Real3,
    /// `cos(t|∇|) Re f₄`, real
    Real4,
}

/// One ensemble draw: a seed, an index (which fixes the decay exponent and
/// the random streams) and the grid.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Member {
    pub seed: u64,
    pub index: usize,
    pub grid: GridSpec,
}

impl Member {
    pub fn a(&self) -> f64 {
        POWER_LAWS[self.index % POWER_LAWS.len()]
    }

    fn rng(&self, role: Role) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.index as u64 * 16 + role as u64);
        r
    }

    /// Random phases and amplitudes with `(1 + |ξ|²)^{−a/2}` decay on the
    /// dealiased, mean-zero modes. Modes are drawn shell by shell in
    /// `max(|m1|, |m2|)`, so the field at `2n` extends the field at `n`.
    pub fn field(&self, role: Role) -> ScalarField {
        let g = self.grid;
        let n = g.n;
        let a = self.a();
        let mut rng = self.rng(role);
        let mut out = ScalarField::zeros_spectral(g, ValueKind::Complex);
        for s in 1..=band_limit(&g) {
            for m2 in -s..=s {
                for m1 in -s..=s {
                    if m1.abs().max(m2.abs()) != s {
                        continue;
                    }
                    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                    let amp = 0.5 + rng.gen::<f64>();
                    let r2 = g.dxi().powi(2) * (m1 * m1 + m2 * m2) as f64;
                    let c = Complex64::from_polar(amp * (1.0 + r2).powf(-0.5 * a), theta);
                    out.data_mut()[g.index_of(m2) * n + g.index_of(m1)] = c;
                }
            }
        }
        out
    }

    /// Real part of `field(role)`, kept spectral.
    pub fn real_field(&self, role: Role) -> ScalarField {
        let f = self.field(role);
        let g = self.grid;
        let n = g.n;
        let mut out = ScalarField::zeros_spectral(g, ValueKind::Real);
        for j2 in 0..n {
            for j1 in 0..n {
                let k = g.index_of(-g.mode(j2)) * n + g.index_of(-g.mode(j1));
                out.data_mut()[j2 * n + j1] = 0.5 * (f.data()[j2 * n + j1] + f.data()[k].conj());
            }
        }
        out
    }

    /// A field supported in a random disk of radius `max(2, s/4)` lattice
    /// units, `s` the band limit, with the disk's area in frequency.
    pub fn disk_field(&self) -> (ScalarField, f64) {
        let g = self.grid;
        let n = g.n;
        let s = band_limit(&g);
        let mut rng = self.rng(Role::Disk);
        let half = s / 2;
        let c = [rng.gen_range(-half..=half), rng.gen_range(-half..=half)];
        let radius = (s as f64 / 4.0).max(2.0);
        let reach = radius.ceil() as i64;
        let mut out = ScalarField::zeros_spectral(g, ValueKind::Complex);
        for m2 in c[1] - reach..=c[1] + reach {
            for m1 in c[0] - reach..=c[0] + reach {
                let d2 = ((m1 - c[0]).pow(2) + (m2 - c[1]).pow(2)) as f64;
                let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                let amp = 0.5 + rng.gen::<f64>();
                if d2 > radius * radius || m1.abs().max(m2.abs()) > s {
                    continue;
                }
                out.data_mut()[g.index_of(m2) * n + g.index_of(m1)] = Complex64::from_polar(amp, theta);
            }
        }
        let area = std::f64::consts::PI * (radius * g.dxi()).powi(2);
        (out, area)
    }

    /// Forcing frequency for the Duhamel trajectories, in `[−8, 8]`.
    pub fn omega(&self) -> f64 {
        self.rng(Role::Omega).gen_range(-8.0..=8.0)
    }

    /// `g₂ = |∇| f₂`
    pub fn g2(&self) -> ScalarField {
        abs_grad(&self.field(Role::F2), 1.0)
    }

    /// `F₀ = |∇| f₃`
    pub fn forcing_f(&self) -> ScalarField {
        abs_grad(&self.field(Role::F3), 1.0)
    }

    /// `G₀ = f₄`
    pub fn forcing_g(&self) -> ScalarField {
        self.field(Role::F4)
    }

    pub fn trajectory(&self, kind: Traj) -> FieldSeries {
        let zero = ScalarField::zeros_spectral(self.grid, ValueKind::Complex);
        let wave = |f: &ScalarField, g: &ScalarField| -> Vec<ScalarField> {
            times().map(|t| half_wave(f, g, t).expect("same grid").0).collect()
        };
        let fields = match kind {
            Traj::Cos1 => wave(&self.field(Role::F1), &zero),
            Traj::Sin1 => wave(&zero, &abs_grad(&self.field(Role::F1), 1.0)),
            Traj::Sin2 => wave(&zero, &self.g2()),
            Traj::Real3 | Traj::Real4 => {
                let role = if kind == Traj::Real3 { Role::F3 } else { Role::F4 };
                let f = self.real_field(role);
                let z = ScalarField::zeros_spectral(self.grid, ValueKind::Real);
                times().map(|t| half_wave(&f, &z, t).expect("same grid").0).collect()
            }
            Traj::DuhamelF => {
                let w = self.omega();
                let f = self.forcing_f();
                times().map(|t| kernel(&f, |lam| duhamel_sin(lam, w, t) / lam)).collect()
            }
            Traj::DuhamelGSin => {
                let w = self.omega();
                let f = self.forcing_g();
                times().map(|t| kernel(&f, |lam| duhamel_sin(lam, w, t))).collect()
            }
            Traj::DuhamelGCos => {
                let w = self.omega();
                let f = self.forcing_g();
                times().map(|t| kernel(&f, |lam| duhamel_cos(lam, w, t))).collect()
            }
        };
        FieldSeries::uniform(0.0, DT, fields).expect("nonempty, one grid")
    }
}

/// Multiplies each nonzero mode by `k(|ξ|)`; the zero mode is dropped.
fn kernel(f: &ScalarField, k: impl Fn(f64) -> Complex64) -> ScalarField {
    let mut out = f.to_spectral().with_kind(ValueKind::Complex);
    let g = *out.grid();
    let n = g.n;
    for j2 in 0..n {
        for j1 in 0..n {
            let idx = j2 * n + j1;
            let lam = g.xi(j1).hypot(g.xi(j2));
            let c = out.data()[idx];
            out.data_mut()[idx] = if lam == 0.0 { Complex64::default() } else { c * k(lam) };
        }
    }
    out
}

/// `∫₀ᵗ e^{iμs} ds`
fn e_int(mu: f64, t: f64) -> Complex64 {
    let x = 0.5 * mu * t;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    Complex64::from_polar(1.0, x) * (t * sinc)
}

/// `∫₀ᵗ sin((t−s)λ) e^{iωs} ds`
fn duhamel_sin(lam: f64, w: f64, t: f64) -> Complex64 {
    let p = Complex64::from_polar(1.0, lam * t) * e_int(w - lam, t);
    let m = Complex64::from_polar(1.0, -lam * t) * e_int(w + lam, t);
    (p - m) / Complex64::new(0.0, 2.0)
}

/// `∫₀ᵗ cos((t−s)λ) e^{iωs} ds`
fn duhamel_cos(lam: f64, w: f64, t: f64) -> Complex64 {
    let p = Complex64::from_polar(1.0, lam * t) * e_int(w - lam, t);
    let m = Complex64::from_polar(1.0, -lam * t) * e_int(w + lam, t);
    0.5 * (p + m)
}
