use super::{IntegratorError, Quadrature, Scheme, StepConfig};
use crate::model::{derive, CshState, Derived, PotentialSpec, Sigma};
use crate::spectral::{dealias, Axis, Complex64, GridSpec, Repr, ScalarField, Symbol, ValueKind};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `(cos(tr), sin(tr)/r, r·sin(tr))` with the `r → 0` limit `t` for the middle.
pub(crate) fn wave_kernels(r: f64, t: f64) -> (f64, f64, f64) {
    let (sn, cs) = (r * t).sin_cos();
    let s = if r == 0.0 { t } else { sn / r };
    (cs, s, r * sn)
}

/// Dealiased spectral `F_tot` from physical fields. The mass term is added
/// pointwise with the rest, so it is dealiased too.
fn forcing_hat(
    phi: &ScalarField,
    u: &ScalarField,
    dphi: &[ScalarField; 2],
    a: Option<[&ScalarField; 3]>,
    pot: &PotentialSpec,
) -> ScalarField {
    let grid = *phi.grid();
    let p = phi.data();
    let mut out = Vec::with_capacity(grid.len());
    match a {
        None => {
            for &z in p {
                out.push(z * (pot.m + pot.dv(z.norm_sqr())));
            }
        }
        Some([a0, a1, a2]) => {
            let (uu, d1, d2) = (u.data(), dphi[0].data(), dphi[1].data());
            let (b0, b1, b2) = (a0.data(), a1.data(), a2.data());
            for i in 0..p.len() {
                let z = p[i];
                let (x0, x1, x2) = (b0[i].re, b1[i].re, b2[i].re);
                let v = z * (pot.m + pot.dv(z.norm_sqr()) + x1 * x1 + x2 * x2) + I * 2.0 * (d1[i] * x1 + d2[i] * x2)
                    - I * x0 * uu[i];
                out.push(v);
            }
        }
    }
    let f = ScalarField::from_data(grid, Repr::Physical, ValueKind::Complex, out).expect("grid length");
    dealias(&f)
}

pub(crate) fn total_forcing(
    phi: &ScalarField,
    u: &ScalarField,
    a0: &ScalarField,
    a1: &ScalarField,
    a2: &ScalarField,
    pot: &PotentialSpec,
) -> ScalarField {
    let phi = phi.to_physical();
    let u = u.to_physical();
    let d = |axis| {
        crate::spectral::apply_multiplier(&phi, &Symbol::Deriv(axis)).expect("regular").to_physical()
    };
    let dphi = [d(Axis::X1), d(Axis::X2)];
    let (a0, a1, a2) = (a0.to_physical(), a1.to_physical(), a2.to_physical());
    forcing_hat(&phi, &u, &dphi, Some([&a0, &a1, &a2]), pot)
}

/// Spectral right-hand sides at one `(φ, u)`.
struct Forcing {
    /// `F_tot`
    f: Vec<Complex64>,
    /// `a₀φ`
    g: Vec<Complex64>,
    /// `∇a₀ + E` with `E = (J₂, −J₁)`
    bdot: [Vec<Complex64>; 2],
}

struct Cache {
    phi: ScalarField,
    u: ScalarField,
    forcing: Forcing,
}

/// Reusable stepper holding the propagator tables for one grid and `dt`.
pub struct Stepper {
    grid: GridSpec,
    cfg: StepConfig,
    pot: PotentialSpec,
    c: Vec<f64>,
    s: Vec<f64>,
    w: Vec<f64>,
    ch: Vec<f64>,
    sh: Vec<f64>,
    wh: Vec<f64>,
    lap: Vec<f64>,
    /// `ξ_j`, zero on the Nyquist line of axis `j`.
    k: [Vec<f64>; 2],
    cache: Option<Cache>,
}

fn spectral(grid: GridSpec, v: Vec<Complex64>) -> ScalarField {
    ScalarField::from_data(grid, Repr::Spectral, ValueKind::Complex, v).expect("grid length")
}

fn rel_change(new: [&[Complex64]; 2], old: [&[Complex64]; 2]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in new.iter().zip(old.iter()) {
        for (x, y) in a.iter().zip(b.iter()) {
            num += (x - y).norm_sqr();
            den += x.norm_sqr();
        }
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

impl Stepper {
    pub fn new(grid: GridSpec, cfg: StepConfig, pot: PotentialSpec) -> Result<Self, IntegratorError> {
        cfg.validate()?;
        let n = grid.n;
        let len = grid.len();
        let mut t = Self {
            grid,
            cfg,
            pot,
            c: Vec::with_capacity(len),
            s: Vec::with_capacity(len),
            w: Vec::with_capacity(len),
            ch: Vec::with_capacity(len),
            sh: Vec::with_capacity(len),
            wh: Vec::with_capacity(len),
            lap: Vec::with_capacity(len),
            k: [Vec::with_capacity(len), Vec::with_capacity(len)],
            cache: None,
        };
        for j2 in 0..n {
            let x2 = grid.xi(j2);
            for j1 in 0..n {
                let x1 = grid.xi(j1);
                let r2 = x1 * x1 + x2 * x2;
                let r = r2.sqrt();
                let (c, s, w) = wave_kernels(r, cfg.dt);
                let (ch, sh, wh) = wave_kernels(r, 0.5 * cfg.dt);
                t.c.push(c);
                t.s.push(s);
                t.w.push(w);
                t.ch.push(ch);
                t.sh.push(sh);
                t.wh.push(wh);
                t.lap.push(-r2);
                t.k[0].push(if grid.is_nyquist(j1) { 0.0 } else { x1 });
                t.k[1].push(if grid.is_nyquist(j2) { 0.0 } else { x2 });
            }
        }
        Ok(t)
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    fn eval(&self, phi: &ScalarField, u: &ScalarField, sigma: Sigma) -> (Derived, Forcing) {
        let d = derive(phi, u, sigma, self.cfg.couple_gauge);
        let len = self.grid.len();
        let forcing = if self.cfg.couple_gauge {
            let f = forcing_hat(&d.phi, &d.u, &d.dphi, Some([&d.a0, &d.a1, &d.a2]), &self.pot);
            let g = dealias(&d.a0.mul(&d.phi)).into_data();
            let a0h = d.a0_hat.data();
            let (j1, j2) = (d.current[0].data(), d.current[1].data());
            let mut b1 = Vec::with_capacity(len);
            let mut b2 = Vec::with_capacity(len);
            for i in 0..len {
                b1.push(I * self.k[0][i] * a0h[i] + j2[i]);
                b2.push(I * self.k[1][i] * a0h[i] - j1[i]);
            }
            Forcing { f: f.into_data(), g, bdot: [b1, b2] }
        } else {
            let f = forcing_hat(&d.phi, &d.u, &d.dphi, None, &self.pot);
            let z = vec![Complex64::default(); len];
            Forcing { f: f.into_data(), g: z.clone(), bdot: [z.clone(), z] }
        };
        (d, forcing)
    }

    /// Forcing at the given state, reused from the previous step when the
    /// state is the one this stepper just produced.
    fn forcing_at(&mut self, state: &CshState) -> Forcing {
        if let Some(c) = self.cache.take() {
            if c.phi == state.phi && c.u == state.u {
                return c.forcing;
            }
        }
        self.eval(&state.phi, &state.u, state.sigma).1
    }

    fn finish(
        &mut self,
        state: &CshState,
        phi: Vec<Complex64>,
        u: Vec<Complex64>,
        b: impl FnOnce(&Forcing) -> [Vec<Complex64>; 2],
        iters: u32,
        residual: f64,
    ) -> CshState {
        let (d, fo) = self.eval(&spectral(self.grid, phi), &spectral(self.grid, u), state.sigma);
        let [b1, b2] = b(&fo);
        let tracked = |v| spectral(self.grid, v).with_kind(ValueKind::Real).into_physical();
        let mut next = CshState {
            t: state.t + self.cfg.dt,
            a_tracked: [tracked(b1), tracked(b2)],
            phi: d.phi,
            u: d.u,
            a0: d.a0,
            a1: d.a1,
            a2: d.a2,
            sigma: state.sigma,
            provenance: state.provenance,
        };
        next.provenance.step += 1;
        next.provenance.picard_iters = iters;
        next.provenance.picard_residual = residual;
        self.cache = Some(Cache { phi: next.phi.clone(), u: next.u.clone(), forcing: fo });
        next
    }

    /// Advances one step; the second component holds the Picard deltas
    /// (empty for RK4).
    pub fn step(&mut self, state: &CshState) -> Result<(CshState, Vec<f64>), IntegratorError> {
        if *state.grid() != self.grid {
            return Err(IntegratorError::Spectral(crate::spectral::SpectralError::GridMismatch));
        }
        match self.cfg.scheme {
            Scheme::TwistedDuhamel => self.step_duhamel(state),
            Scheme::Rk4Reference => Ok((self.step_rk4(state), Vec::new())),
        }
    }

    fn step_duhamel(&mut self, state: &CshState) -> Result<(CshState, Vec<f64>), IntegratorError> {
        let dt = self.cfg.dt;
        let h = 0.5 * dt;
        let phi0 = state.phi.to_spectral().into_data();
        let u0 = state.u.to_spectral().into_data();
        let b0 = [state.a_tracked[0].to_spectral().into_data(), state.a_tracked[1].to_spectral().into_data()];
        let f0 = self.forcing_at(state);
        let len = self.grid.len();
        let trap = self.cfg.quadrature == Quadrature::Trapezoid;
        let mut lin_phi = Vec::with_capacity(len);
        let mut lin_u = Vec::with_capacity(len);
        let mut base_phi = Vec::with_capacity(len);
        let mut base_u = Vec::with_capacity(len);
        for i in 0..len {
            let (c, s, w) = (self.c[i], self.s[i], self.w[i]);
            let lp = phi0[i] * c + u0[i] * s;
            let lu = -phi0[i] * w + u0[i] * c;
            lin_phi.push(lp);
            lin_u.push(lu);
            if trap {
                base_phi.push(lp + h * (-f0.f[i] * s + I * f0.g[i] * c));
                base_u.push(lu + h * (-f0.f[i] * c - I * f0.g[i] * w));
            } else {
                let (ch, sh, wh) = (self.ch[i], self.sh[i], self.wh[i]);
                base_phi.push(lp + h * (-f0.f[i] * sh + I * f0.g[i] * ch));
                base_u.push(lu + h * (-f0.f[i] * ch - I * f0.g[i] * wh));
            }
        }
        let (mut phi, mut u) = (lin_phi, lin_u);
        let mut deltas: Vec<f64> = Vec::new();
        let mut growth = 0;
        for _ in 0..self.cfg.picard_max {
            let (_, fo) = self.eval(&spectral(self.grid, phi.clone()), &spectral(self.grid, u.clone()), state.sigma);
            let mut np = Vec::with_capacity(len);
            let mut nu = Vec::with_capacity(len);
            for i in 0..len {
                if trap {
                    np.push(base_phi[i] + h * I * fo.g[i]);
                    nu.push(base_u[i] - h * fo.f[i]);
                } else {
                    let (ch, sh, wh) = (self.ch[i], self.sh[i], self.wh[i]);
                    np.push(base_phi[i] + h * (-fo.f[i] * sh + I * fo.g[i] * ch));
                    nu.push(base_u[i] + h * (-fo.f[i] * ch - I * fo.g[i] * wh));
                }
            }
            let delta = rel_change([&np, &nu], [&phi, &u]);
            if let Some(&prev) = deltas.last() {
                growth = if delta > prev { growth + 1 } else { 0 };
            }
            deltas.push(delta);
            phi = np;
            u = nu;
            if !delta.is_finite() {
                return Err(IntegratorError::NonFinite { step: state.provenance.step + 1 });
            }
            if growth >= 3 {
                return Err(IntegratorError::PicardDivergence { step: state.provenance.step + 1, deltas });
            }
            if delta <= self.cfg.picard_tol {
                break;
            }
        }
        let residual = *deltas.last().unwrap_or(&0.0);
        if residual > self.cfg.picard_tol {
            log::debug!("Picard stopped at {} iterations with residual {residual:.3e}", deltas.len());
        }
        let iters = deltas.len() as u32;
        let next = self.finish(
            state,
            phi,
            u,
            |fo| {
                let mut out = [Vec::with_capacity(len), Vec::with_capacity(len)];
                for j in 0..2 {
                    for i in 0..len {
                        out[j].push(b0[j][i] + h * (f0.bdot[j][i] + fo.bdot[j][i]));
                    }
                }
                out
            },
            iters,
            residual,
        );
        Ok((next, deltas))
    }

    fn rates(&self, phi: &[Complex64], u: &[Complex64], fo: &Forcing) -> [Vec<Complex64>; 4] {
        let len = phi.len();
        let mut dp = Vec::with_capacity(len);
        let mut du = Vec::with_capacity(len);
        for i in 0..len {
            dp.push(u[i] + I * fo.g[i]);
            du.push(phi[i] * self.lap[i] - fo.f[i]);
        }
        [dp, du, fo.bdot[0].clone(), fo.bdot[1].clone()]
    }

    fn step_rk4(&mut self, state: &CshState) -> CshState {
        let dt = self.cfg.dt;
        let y0 = [
            state.phi.to_spectral().into_data(),
            state.u.to_spectral().into_data(),
            state.a_tracked[0].to_spectral().into_data(),
            state.a_tracked[1].to_spectral().into_data(),
        ];
        let axpy = |y: &[Vec<Complex64>; 4], k: &[Vec<Complex64>; 4], a: f64| -> [Vec<Complex64>; 4] {
            std::array::from_fn(|c| y[c].iter().zip(&k[c]).map(|(x, d)| x + d * a).collect())
        };
        let f1 = self.forcing_at(state);
        let k1 = self.rates(&y0[0], &y0[1], &f1);
        let stage = |y: &[Vec<Complex64>; 4]| {
            let (_, fo) =
                self.eval(&spectral(self.grid, y[0].clone()), &spectral(self.grid, y[1].clone()), state.sigma);
            self.rates(&y[0], &y[1], &fo)
        };
        let k2 = stage(&axpy(&y0, &k1, 0.5 * dt));
        let k3 = stage(&axpy(&y0, &k2, 0.5 * dt));
        let k4 = stage(&axpy(&y0, &k3, dt));
        let y1: [Vec<Complex64>; 4] = std::array::from_fn(|c| {
            (0..y0[c].len())
                .map(|i| y0[c][i] + (k1[c][i] + (k2[c][i] + k3[c][i]) * 2.0 + k4[c][i]) * (dt / 6.0))
                .collect()
        });
        let [phi, u, b1, b2] = y1;
        self.finish(state, phi, u, |_| [b1, b2], 0, 0.0)
    }
}
