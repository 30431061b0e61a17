//! Conserved and constrained quantities, per-step rows and their CSV form.

use crate::integrator::Trajectory;
use crate::lp::sobolev_norm;
use crate::model::{curl, divergence, im_product, CshState, PotentialSpec};
use crate::spectral::{apply_multiplier, Axis, Complex64, ScalarField, Symbol};
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagError {
    #[error("step index {i} outside 1..={max}")]
    IndexOutOfRange { i: usize, max: usize },
    #[error("potential has no verified alpha")]
    AlphaUnset,
}

fn covariant_gradient(state: &CshState) -> [ScalarField; 2] {
    let phi = state.phi.to_physical();
    let d = |axis, a: &ScalarField| {
        let g = apply_multiplier(&phi, &Symbol::Deriv(axis)).expect("regular").to_physical();
        let a = a.to_physical();
        let data = g
            .data()
            .iter()
            .zip(a.data())
            .zip(phi.data())
            .map(|((&dz, &ai), &z)| dz - Complex64::new(0.0, ai.re) * z)
            .collect();
        ScalarField::from_data(*phi.grid(), crate::spectral::Repr::Physical, crate::spectral::ValueKind::Complex, data)
            .expect("grid length")
    };
    [d(Axis::X1, &state.a1), d(Axis::X2, &state.a2)]
}

/// `½∫|u|² + Σ_j|∂_jφ − ia_jφ|² + m|φ|² + V(|φ|²)` with the grid quadrature.
pub fn energy(state: &CshState, pot: &PotentialSpec) -> f64 {
    let [d1, d2] = covariant_gradient(state);
    let phi = state.phi.to_physical();
    let u = state.u.to_physical();
    let mut acc = 0.0;
    for i in 0..phi.data().len() {
        let r = phi.data()[i].norm_sqr();
        acc += u.data()[i].norm_sqr() + d1.data()[i].norm_sqr() + d2.data()[i].norm_sqr() + pot.m * r + pot.v(r);
    }
    0.5 * acc * state.grid().cell_area()
}

/// `∫|φ|²`
pub fn charge(state: &CshState) -> f64 {
    state.phi.l2_norm_sqr()
}

/// `2∫Re(φ·conj(u))`, the exact time derivative of the charge.
pub fn charge_rate(state: &CshState) -> f64 {
    let phi = state.phi.to_physical();
    let u = state.u.to_physical();
    let s: f64 = phi.data().iter().zip(u.data()).map(|(a, b)| (a * b.conj()).re).sum();
    2.0 * s * state.grid().cell_area()
}

fn h1(f: &ScalarField) -> f64 {
    sobolev_norm(f, 1.0, false)
}

/// `‖div a‖_{L²}/‖a‖_{H¹}` on the solved potentials, 0 when `a = 0`.
pub fn div_relative(state: &CshState) -> f64 {
    let scale = (h1(&state.a1).powi(2) + h1(&state.a2).powi(2)).sqrt();
    if scale == 0.0 {
        return 0.0;
    }
    divergence(&state.a1, &state.a2).l2_norm() / scale
}

/// `(‖∂₁a₁ + ∂₂a₂‖, ‖∂₁b₂ − ∂₂b₁ − σ(ρ − ρ̄)‖)` with `ρ = Im(φ·conj(u))`, the
/// divergence taken on the solved potentials `a` and the curl on the
/// transported potential `b`. The mean `ρ̄` is conserved and cannot be the
/// curl of a periodic field, so it is excluded.
pub fn constraint_residuals(state: &CshState) -> (f64, f64) {
    let div = divergence(&state.a1, &state.a2).l2_norm();
    let mut rho = im_product(&state.phi, &state.u).scale(state.sigma.value());
    rho.data_mut()[0] = Complex64::default();
    let res = curl(&state.a_tracked[0], &state.a_tracked[1]).sub(&rho.to_physical());
    (div, res.l2_norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub energy: f64,
    pub charge: f64,
    pub charge_rate_residual: f64,
    pub div_a_l2: f64,
    pub curl_constraint_l2: f64,
    pub phi_h1: f64,
    pub u_l2: f64,
    pub a0_linf: f64,
    pub picard_iters: u32,
    pub picard_residual: f64,
    pub scheme: String,
}

pub const CSV_HEADER: &str = "t,energy,charge,charge_rate_residual,div_a_l2,curl_constraint_l2,phi_h1,u_l2,a0_linf,picard_iters,picard_residual,scheme";

/// A row with `charge_rate_residual` left at 0; trajectories fill it in once
/// neighbouring steps are known.
pub fn row(state: &CshState, pot: &PotentialSpec, scheme: &str) -> DiagnosticsRow {
    let (div, curl) = constraint_residuals(state);
    DiagnosticsRow {
        t: state.t,
        energy: energy(state, pot),
        charge: charge(state),
        charge_rate_residual: 0.0,
        div_a_l2: div,
        curl_constraint_l2: curl,
        phi_h1: h1(&state.phi),
        u_l2: state.u.l2_norm(),
        a0_linf: state.a0.linf_norm(),
        picard_iters: state.provenance.picard_iters,
        picard_residual: state.provenance.picard_residual,
        scheme: scheme.to_string(),
    }
}

fn charge_derivative(traj: &Trajectory, i: usize) -> f64 {
    let q: Vec<f64> = traj.records.iter().map(|r| r.charge).collect();
    let dt = traj.dt;
    let m = q.len();
    match m {
        0 | 1 => 0.0,
        2 => (q[1] - q[0]) / dt,
        _ if i == 0 => (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * dt),
        _ if i == m - 1 => (3.0 * q[m - 1] - 4.0 * q[m - 2] + q[m - 3]) / (2.0 * dt),
        _ => (q[i + 1] - q[i - 1]) / (2.0 * dt),
    }
}

fn normalized_gap(traj: &Trajectory, i: usize) -> f64 {
    let r = &traj.records[i];
    (charge_derivative(traj, i) - r.charge_rate).abs() / r.charge.max(1.0)
}

/// `|ΔQ/Δt − 2∫Re(φ·conj(u))|/max(1, Q)` at interior step `i` with a central
/// difference.
pub fn charge_identity_residual(traj: &Trajectory, i: usize) -> Result<f64, DiagError> {
    let m = traj.records.len();
    if m < 3 || i == 0 || i >= m - 1 {
        return Err(DiagError::IndexOutOfRange { i, max: m.saturating_sub(2) });
    }
    Ok(normalized_gap(traj, i))
}

/// Fills `charge_rate_residual` of every row; the end points use one-sided
/// second-order differences.
pub fn fill_charge_rate_residuals(traj: &mut Trajectory) {
    let Some(first) = traj.states.first().map(|s| s.provenance.step) else { return };
    for k in 0..traj.rows.len() {
        let i = (traj.states[k].provenance.step - first) as usize;
        if i < traj.records.len() {
            traj.rows[k].charge_rate_residual = normalized_gap(traj, i);
        }
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(rows: &[DiagnosticsRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let cols = [
            fmt_f(r.t),
            fmt_f(r.energy),
            fmt_f(r.charge),
            fmt_f(r.charge_rate_residual),
            fmt_f(r.div_a_l2),
            fmt_f(r.curl_constraint_l2),
            fmt_f(r.phi_h1),
            fmt_f(r.u_l2),
            fmt_f(r.a0_linf),
            r.picard_iters.to_string(),
            fmt_f(r.picard_residual),
            r.scheme.clone(),
        ];
        writeln!(w, "{}", cols.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AprioriReport {
    /// `‖u‖² + Σ‖D_jφ‖² + m‖φ‖²`
    pub lhs: f64,
    /// `2E + α²‖φ‖²`
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    /// Bound on `‖φ‖²` from the growth envelope (massless case only).
    pub envelope: Option<f64>,
    pub envelope_ok: Option<bool>,
}

fn apriori_sides(state: &CshState, pot: &PotentialSpec, alpha: f64) -> (f64, f64, f64) {
    let [d1, d2] = covariant_gradient(state);
    let q = charge(state);
    let lhs = state.u.l2_norm_sqr() + d1.l2_norm_sqr() + d2.l2_norm_sqr() + pot.m * q;
    let rhs = 2.0 * energy(state, pot) + alpha * alpha * q;
    (lhs, rhs, q)
}

fn tol(rhs: f64) -> f64 {
    1e-12 * rhs.abs().max(1.0)
}

/// Checks `‖u‖² + Σ‖D_jφ‖² + m‖φ‖² ≤ 2E + α²‖φ‖²`.
pub fn apriori_monitor(state: &CshState, pot: &PotentialSpec) -> Result<AprioriReport, DiagError> {
    let alpha = pot.alpha.ok_or(DiagError::AlphaUnset)?;
    let (lhs, rhs, _) = apriori_sides(state, pot, alpha);
    let slack = rhs - lhs;
    Ok(AprioriReport { lhs, rhs, slack, holds: slack >= -tol(rhs), envelope: None, envelope_ok: None })
}

/// The same check plus, for `m = 0`, the growth envelope
/// `‖φ(t)‖² ≤ (‖φ₀‖² + c)e^{(1+α²)(t−t₀)} − c`, `c = 2E₀/(1+α²)`, from
/// `d/dt‖φ‖² ≤ ‖φ‖² + ‖u‖²` and `‖u‖² ≤ 2E₀ + α²‖φ‖²`.
#[derive(Debug, Clone)]
pub struct AprioriMonitor {
    pub e0: f64,
    pub q0: f64,
    pub t0: f64,
    pub pot: PotentialSpec,
}

impl AprioriMonitor {
    pub fn new(initial: &CshState, pot: &PotentialSpec) -> Result<Self, DiagError> {
        pot.alpha.ok_or(DiagError::AlphaUnset)?;
        Ok(Self { e0: energy(initial, pot), q0: charge(initial), t0: initial.t, pot: pot.clone() })
    }

    pub fn check(&self, state: &CshState) -> AprioriReport {
        let alpha = self.pot.alpha.expect("checked at construction");
        let (lhs, rhs, q) = apriori_sides(state, &self.pot, alpha);
        let slack = rhs - lhs;
        let (envelope, envelope_ok) = if self.pot.m == 0.0 {
            let k = 1.0 + alpha * alpha;
            let c = 2.0 * self.e0.max(0.0) / k;
            let env = (self.q0 + c) * (k * (state.t - self.t0)).exp() - c;
            (Some(env), Some(q <= env + tol(env)))
        } else {
            (None, None)
        };
        AprioriReport { lhs, rhs, slack, holds: slack >= -tol(rhs), envelope, envelope_ok }
    }
}
