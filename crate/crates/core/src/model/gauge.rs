use super::CshState;
use crate::spectral::{apply_multiplier, Axis, Complex64, ScalarField, Symbol, ValueKind};

/// `A_μ ↦ A_μ + ∂_μχ`, `φ ↦ e^{iχ}φ`, `u ↦ e^{iχ}u`.
///
/// The phase sign is the one that makes `D = ∂ − iA` covariant. Caches are
/// transformed rather than re-solved, so the output leaves Coulomb gauge
/// unless `Δχ = 0`.
pub fn gauge_transform(state: &CshState, chi: &ScalarField, chi_t: &ScalarField) -> CshState {
    let chi = chi.to_physical().with_kind(ValueKind::Real);
    let chi_t = chi_t.to_physical().with_kind(ValueKind::Real);
    let phase = chi.map(|c| Complex64::from_polar(1.0, c.re));
    let grad = |axis| {
        apply_multiplier(&chi, &Symbol::Deriv(axis))
            .expect("derivative is regular")
            .to_physical()
            .with_kind(ValueKind::Real)
    };
    let g1 = grad(Axis::X1);
    let g2 = grad(Axis::X2);
    let mut out = state.clone();
    out.phi = state.phi.mul(&phase);
    out.u = state.u.mul(&phase);
    out.a0 = state.a0.to_physical().add(&chi_t);
    out.a1 = state.a1.to_physical().add(&g1);
    out.a2 = state.a2.to_physical().add(&g2);
    out.a_tracked = [state.a_tracked[0].to_physical().add(&g1), state.a_tracked[1].to_physical().add(&g2)];
    out
}
