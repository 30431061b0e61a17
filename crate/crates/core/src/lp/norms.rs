use super::cubes::CubeCover;
use super::{cube_cover, lattice_scale, lp_project, BandRange, LpError};
use crate::spectral::fft::fft2;
use crate::spectral::{Complex64, GridSpec, ScalarField};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Uniformly sampled fields `φ(t0 + i·dt)`.
#[derive(Debug, Clone)]
pub struct FieldSeries {
    pub t0: f64,
    pub dt: f64,
    pub fields: Vec<ScalarField>,
}

impl FieldSeries {
    pub fn uniform(t0: f64, dt: f64, fields: Vec<ScalarField>) -> Result<Self, LpError> {
        if fields.is_empty() {
            return Err(LpError::EmptyTrajectory);
        }
        let g = *fields[0].grid();
        if fields.iter().any(|f| *f.grid() != g) {
            return Err(LpError::GridMismatch);
        }
        Ok(Self { t0, dt, fields })
    }

    pub fn from_times(times: &[f64], fields: Vec<ScalarField>) -> Result<Self, LpError> {
        if times.is_empty() || fields.is_empty() {
            return Err(LpError::EmptyTrajectory);
        }
        let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        for w in times.windows(2) {
            let step = w[1] - w[0];
            if !(step > 0.0) || (step - dt).abs() > 1e-9 * dt.abs().max(1.0) {
                return Err(LpError::NonUniformTimes);
            }
        }
        Self::uniform(times[0], dt, fields)
    }

    /// A field held constant at `samples` times over `[0, duration]`.
    pub fn constant(f: ScalarField, samples: usize, duration: f64) -> Self {
        let dt = if samples > 1 { duration / (samples - 1) as f64 } else { 0.0 };
        Self { t0: 0.0, dt, fields: vec![f; samples.max(1)] }
    }

    pub fn grid(&self) -> &GridSpec {
        self.fields[0].grid()
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { t0: self.t0, dt: self.dt, fields: self.fields.iter().map(|f| f.scale(c)).collect() }
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self { t0: self.t0, dt: self.dt, fields: self.fields.iter().map(f).collect() }
    }
}

/// `‖v‖_{L^q_t}` of nonnegative samples spaced `dt`: composite trapezoid for
/// finite `q`, maximum for `q = ∞`.
pub fn time_norm(values: &[f64], dt: f64, q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().cloned().fold(0.0, f64::max);
    }
    if values.len() < 2 {
        return 0.0;
    }
    let p: Vec<f64> = values.iter().map(|v| v.abs().powf(q)).collect();
    let inner: f64 = p[1..p.len() - 1].iter().sum();
    let s = dt * (inner + 0.5 * (p[0] + p[p.len() - 1]));
    s.powf(1.0 / q)
}

/// `‖⟨∇⟩^s f‖_{L²}` or, when `homogeneous`, `‖|∇|^s f‖_{L²}` without the
/// zero mode.
pub fn sobolev_norm(f: &ScalarField, s: f64, homogeneous: bool) -> f64 {
    let sp = f.to_spectral();
    let g = *sp.grid();
    let n = g.n;
    let mut acc = 0.0;
    for j2 in 0..n {
        let x2 = g.xi(j2);
        for j1 in 0..n {
            let x1 = g.xi(j1);
            let c = sp.data()[j2 * n + j1].norm_sqr();
            if c == 0.0 {
                continue;
            }
            let r2 = x1 * x1 + x2 * x2;
            let w = if homogeneous {
                if r2 == 0.0 {
                    continue;
                }
                r2.powf(s)
            } else {
                (1.0 + r2).powf(s)
            };
            acc += w * c;
        }
    }
    (acc * g.period_length * g.period_length).sqrt()
}

/// `sup_x Σ_c |P_c φ_k(x)|²` over the grid points, for a spectral `phik`.
///
/// Each cube piece has a narrow spectrum, so `|P_c φ_k|²` is evaluated on a
/// small grid wide enough to hold it without aliasing; the summed square
/// function is then interpolated exactly onto the full grid.
pub fn square_function_sup(phik: &ScalarField, cover: &CubeCover) -> f64 {
    let sp = phik.to_spectral();
    SquarePlan::new(&[&sp], cover).sup(&sp)
}

/// `‖(Σ_c |P_c φ_k|²)^{1/2}‖_{L^r_x}` for each sample of `bands` (all
/// supported in band `cover.k`), with grid quadrature for finite `r`.
pub fn square_function_norms(bands: &[ScalarField], cover: &CubeCover, r: f64) -> Vec<f64> {
    if bands.is_empty() {
        return Vec::new();
    }
    let spectral: Vec<ScalarField> = bands.iter().map(|b| b.to_spectral()).collect();
    let refs: Vec<&ScalarField> = spectral.iter().collect();
    let plan = SquarePlan::new(&refs, cover);
    let area = spectral[0].grid().cell_area();
    spectral
        .iter()
        .map(|b| {
            if r.is_infinite() {
                return plan.sup(b).sqrt();
            }
            let s: f64 = plan.values(b).iter().map(|v| v.max(0.0).powf(r / 2.0)).sum();
            (s * area).powf(1.0 / r)
        })
        .collect()
}

/// Smallest `2^a 3^b 5^c ≥ len`.
fn smooth_length(len: usize) -> usize {
    (len.max(1)..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("unbounded range")
}

/// Cube pieces of a cover restricted to a fixed spectral support, reusable
/// across time samples.
struct SquarePlan {
    grid: GridSpec,
    singleton: bool,
    m: usize,
    direct: bool,
    /// Per cube: (lattice index, small-grid index, weight).
    pieces: Vec<Vec<(usize, usize, f64)>>,
}

impl SquarePlan {
    fn new(support: &[&ScalarField], cover: &CubeCover) -> Self {
        let g = *support[0].grid();
        let n = g.n;
        let mut plan = Self { grid: g, singleton: cover.is_singleton(), m: n, direct: true, pieces: Vec::new() };
        if plan.singleton {
            return plan;
        }
        let mut raw: BTreeMap<[i64; 2], Vec<(usize, i64, i64, f64)>> = BTreeMap::new();
        for j2 in 0..n {
            for j1 in 0..n {
                let idx = j2 * n + j1;
                if support.iter().all(|f| f.data()[idx] == Complex64::default()) {
                    continue;
                }
                for (a, w) in cover.weights_at([g.xi(j1), g.xi(j2)]) {
                    raw.entry(a).or_default().push((idx, g.mode(j1), g.mode(j2), w));
                }
            }
        }
        // The summed squares have spectral extent 2w − 1 for pieces of width w.
        let mut width = 1;
        for entries in raw.values() {
            for axis in [1, 2] {
                let pick = |e: &(usize, i64, i64, f64)| if axis == 1 { e.1 } else { e.2 };
                let lo = entries.iter().map(pick).min().unwrap();
                let hi = entries.iter().map(pick).max().unwrap();
                width = width.max((hi - lo + 1) as usize);
            }
        }
        let m = smooth_length(2 * width - 1);
        if m < n {
            plan.m = m;
            plan.direct = false;
        }
        let (m, mi) = (plan.m, plan.m as i64);
        for entries in raw.into_values() {
            let b1 = entries.iter().map(|e| e.1).min().unwrap();
            let b2 = entries.iter().map(|e| e.2).min().unwrap();
            let piece = entries
                .into_iter()
                .map(|(idx, m1, m2, w)| {
                    let o1 = (m1 - b1).rem_euclid(mi) as usize;
                    let o2 = (m2 - b2).rem_euclid(mi) as usize;
                    (idx, o2 * m + o1, w)
                })
                .collect();
            plan.pieces.push(piece);
        }
        plan
    }

    fn sup(&self, sp: &ScalarField) -> f64 {
        self.values(sp).into_iter().fold(0.0, f64::max)
    }

    /// `Σ_c |P_c φ|²` at every grid point.
    fn values(&self, sp: &ScalarField) -> Vec<f64> {
        let (g, m, n) = (self.grid, self.m, self.grid.n);
        if self.singleton {
            return sp.to_physical().data().iter().map(|z| z.norm_sqr()).collect();
        }
        if self.pieces.is_empty() {
            return vec![0.0; n * n];
        }
        let mi = m as i64;
        let mut acc = vec![0.0f64; m * m];
        let mut buf = vec![Complex64::default(); m * m];
        // A single-mode piece has constant modulus.
        let mut offset = 0.0;
        let mut any = false;
        for piece in &self.pieces {
            if let [(idx, _, w)] = piece[..] {
                offset += (sp.data()[idx] * w).norm_sqr();
                continue;
            }
            any = true;
            buf.iter_mut().for_each(|z| *z = Complex64::default());
            for &(idx, o, w) in piece {
                buf[o] += sp.data()[idx] * w;
            }
            fft2(&mut buf, m, true);
            for (a, z) in acc.iter_mut().zip(&buf) {
                *a += z.norm_sqr();
            }
        }
        if !any {
            return vec![offset; n * n];
        }
        if self.direct {
            return acc.into_iter().map(|a| a + offset).collect();
        }
        let mut coef: Vec<Complex64> = acc.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        fft2(&mut coef, m, false);
        let inv = 1.0 / (m * m) as f64;
        let mut full = vec![Complex64::default(); n * n];
        let signed = |j: usize| -> i64 {
            let j = j as i64;
            if 2 * j < mi {
                j
            } else {
                j - mi
            }
        };
        for q2 in 0..m {
            for q1 in 0..m {
                let idx = g.index_of(signed(q2)) * n + g.index_of(signed(q1));
                full[idx] += coef[q2 * m + q1] * inv;
            }
        }
        fft2(&mut full, n, true);
        full.into_iter().map(|z| z.re + offset).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BandNorm {
    pub k: i64,
    /// `‖φ_k‖_{S⁰_k}`
    pub value: f64,
    /// `max_t ‖φ_k(t)‖_{L²}`
    pub linf_l2: f64,
    /// Weighted square-function term at the maximizing scale.
    pub ks_term: f64,
    /// Scale `ℓ` attaining the supremum.
    pub ell: i64,
    /// Whether the supremum sits at the lattice truncation.
    pub at_lattice: bool,
}

fn band_series(series: &FieldSeries, k: i64) -> Result<Vec<ScalarField>, LpError> {
    series.fields.iter().map(|f| lp_project(f, k)).collect()
}

fn band_detail(series: &FieldSeries, k: i64, bands: &[ScalarField]) -> Result<BandNorm, LpError> {
    let g = *series.grid();
    let linf_l2 = bands.iter().map(|b| b.l2_norm()).fold(0.0, f64::max);
    let lattice = lattice_scale(&g);
    let ell_min = lattice.min(k);
    let mut best = (f64::NEG_INFINITY, ell_min);
    for ell in ell_min..=k {
        let term = ks_term(&g, bands, series.dt, ell, k)?;
        if term > best.0 {
            best = (term, ell);
        }
    }
    let value = (linf_l2 * linf_l2 + best.0).sqrt();
    Ok(BandNorm { k, value, linf_l2, ks_term: best.0, ell: best.1, at_lattice: best.1 == ell_min })
}

/// `2^{k−ℓ} 2^{−3k/2} ‖(Σ_{c∈C_{ℓ,k}} |P_c φ_k|²)^{1/2}‖²_{L⁴_t L^∞_x}` for band
/// samples `bands` spaced `dt`.
pub fn ks_term(g: &GridSpec, bands: &[ScalarField], dt: f64, ell: i64, k: i64) -> Result<f64, LpError> {
    let cover = cube_cover(g, ell, k)?;
    let spectral: Vec<ScalarField> = bands.iter().map(|b| b.to_spectral()).collect();
    let refs: Vec<&ScalarField> = spectral.iter().collect();
    let plan = SquarePlan::new(&refs, &cover);
    let sups: Vec<f64> = spectral.iter().map(|b| plan.sup(b).sqrt()).collect();
    let l4 = time_norm(&sups, dt, 4.0);
    Ok(2f64.powi((k - ell) as i32) * 2f64.powf(-1.5 * k as f64) * l4 * l4)
}

/// `‖P_k φ‖_{S⁰_k}` with its attaining scale.
pub fn s0k_detail(series: &FieldSeries, k: i64) -> Result<BandNorm, LpError> {
    if series.is_empty() {
        return Err(LpError::EmptyTrajectory);
    }
    let bands = band_series(series, k)?;
    band_detail(series, k, &bands)
}

pub fn s0k_norm(series: &FieldSeries, k: i64) -> Result<f64, LpError> {
    Ok(s0k_detail(series, k)?.value)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrajectoryNormReport {
    pub gamma: f64,
    pub value: f64,
    /// Band index → `‖φ_k‖_{S⁰_k}`.
    pub band_values: BTreeMap<String, f64>,
    pub bands: Vec<BandNorm>,
    pub time_quadrature: String,
    pub time_samples: usize,
    pub dt: f64,
    pub lattice_scale: i64,
}

/// `(Σ_k 2^{2γk⁺} ‖φ_k‖²_{S⁰_k})^{1/2}` over the resolvable bands.
pub fn s_gamma_norm(series: &FieldSeries, gamma: f64) -> Result<TrajectoryNormReport, LpError> {
    if series.is_empty() {
        return Err(LpError::EmptyTrajectory);
    }
    let g = *series.grid();
    let range = BandRange::of(&g);
    let mut total = 0.0;
    let mut bands = Vec::new();
    let mut band_values = BTreeMap::new();
    for k in range.iter() {
        let b = s0k_detail(series, k)?;
        total += 4f64.powf(gamma * k.max(0) as f64) * b.value * b.value;
        band_values.insert(k.to_string(), b.value);
        bands.push(b);
    }
    Ok(TrajectoryNormReport {
        gamma,
        value: total.sqrt(),
        band_values,
        bands,
        time_quadrature: "trapezoid (L4_t), max over samples (Linf_t)".into(),
        time_samples: series.len(),
        dt: series.dt,
        lattice_scale: lattice_scale(&g),
    })
}

impl TrajectoryNormReport {
    /// The aggregate norm at another `γ`, from the stored band values.
    pub fn reweight(&self, gamma: f64) -> f64 {
        self.bands
            .iter()
            .map(|b| 4f64.powf(gamma * b.k.max(0) as f64) * b.value * b.value)
            .sum::<f64>()
            .sqrt()
    }
}
