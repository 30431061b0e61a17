use super::{ModelError, PotentialSpec, Sigma};
use crate::spectral::{apply_multiplier, dealias, Axis, Complex64, Repr, ScalarField, Symbol, ValueKind};

fn mult(f: &ScalarField, sym: &Symbol) -> ScalarField {
    apply_multiplier(f, sym).expect("symbol is regular at the origin")
}

fn d(f: &ScalarField, axis: Axis) -> ScalarField {
    mult(f, &Symbol::Deriv(axis))
}

/// `(−Δ)⁻¹∂_j`.
fn riesz(f: &ScalarField, axis: Axis) -> ScalarField {
    mult(f, &Symbol::Riesz(axis))
}

fn real_dealiased(p: ScalarField) -> ScalarField {
    dealias(&p.with_kind(ValueKind::Real))
}

/// `Im(a·conj(b))`, dealiased, spectral.
pub(crate) fn im_product(a: &ScalarField, b: &ScalarField) -> ScalarField {
    let a = a.to_physical();
    let b = b.to_physical();
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| Complex64::new((x * y.conj()).im, 0.0))
        .collect();
    real_dealiased(ScalarField::from_data(*a.grid(), Repr::Physical, ValueKind::Real, data).expect("same grid"))
}

/// `a·b` for real `a`, dealiased, spectral.
fn real_times(a: &ScalarField, b: &ScalarField) -> ScalarField {
    real_dealiased(a.to_physical().mul(&b.to_physical()))
}

fn check(a: &ScalarField, b: &ScalarField) -> Result<(), ModelError> {
    a.same_grid(b)?;
    Ok(())
}

fn spatial_from_rho(rho: &ScalarField, sigma: Sigma) -> (ScalarField, ScalarField) {
    let s = sigma.value();
    let a1 = riesz(rho, Axis::X2).scale(s).to_physical().with_kind(ValueKind::Real);
    let a2 = riesz(rho, Axis::X1).scale(-s).to_physical().with_kind(ValueKind::Real);
    (a1, a2)
}

/// Divergence-free `(a₁, a₂)` with `∂₁a₂ − ∂₂a₁ = Im(f·conj(g))`.
pub fn coulomb_initial_data(f: &ScalarField, g: &ScalarField) -> Result<(ScalarField, ScalarField), ModelError> {
    solve_spatial_potentials(f, g, Sigma::Plus)
}

/// Divergence-free `(a₁, a₂)` with `∂₁a₂ − ∂₂a₁ = σ·Im(φ·conj(u))`
/// (the mean of the right side excepted).
pub fn solve_spatial_potentials(
    phi: &ScalarField,
    u: &ScalarField,
    sigma: Sigma,
) -> Result<(ScalarField, ScalarField), ModelError> {
    check(phi, u)?;
    Ok(spatial_from_rho(&im_product(phi, u), sigma))
}

#[derive(Debug, Clone, PartialEq)]
pub struct A0Parts {
    pub a0: ScalarField,
    pub a01: ScalarField,
    pub a02: ScalarField,
}

struct A0Hats {
    a01: ScalarField,
    a02: ScalarField,
    /// `Im(φ∂_jφ̄)`
    jp: [ScalarField; 2],
    /// `a_j|φ|²`
    aq: [ScalarField; 2],
}

fn a0_hats(phi: &ScalarField, dphi: &[ScalarField; 2], a1: &ScalarField, a2: &ScalarField) -> A0Hats {
    let jp = [im_product(phi, &dphi[0]), im_product(phi, &dphi[1])];
    let q = phi.norm_sqr();
    let aq = [real_times(a1, &q), real_times(a2, &q)];
    let a01 = riesz(&jp[1], Axis::X1).sub(&riesz(&jp[0], Axis::X2));
    let a02 = riesz(&aq[1], Axis::X1).sub(&riesz(&aq[0], Axis::X2));
    A0Hats { a01, a02, jp, aq }
}

fn a0_physical(h: &A0Hats) -> ScalarField {
    h.a01.add(&h.a02).to_physical().with_kind(ValueKind::Real)
}

fn gradient(phi: &ScalarField) -> [ScalarField; 2] {
    [d(phi, Axis::X1).to_physical(), d(phi, Axis::X2).to_physical()]
}

/// Temporal potential `a₀ = a₀₁ + a₀₂` from
/// `Δa₀₁ = −∂₁Im(φ∂₂φ̄) + ∂₂Im(φ∂₁φ̄)` and `Δa₀₂ = −∂₁(a₂|φ|²) + ∂₂(a₁|φ|²)`.
pub fn solve_a0(phi: &ScalarField, a1: &ScalarField, a2: &ScalarField) -> Result<A0Parts, ModelError> {
    check(phi, a1)?;
    check(phi, a2)?;
    let phi = phi.to_physical();
    let h = a0_hats(&phi, &gradient(&phi), a1, a2);
    Ok(A0Parts {
        a0: a0_physical(&h),
        a01: h.a01.to_physical().with_kind(ValueKind::Real),
        a02: h.a02.to_physical().with_kind(ValueKind::Real),
    })
}

/// Everything the time steppers need from one `(φ, u)` pair.
pub(crate) struct Derived {
    pub phi: ScalarField,
    pub u: ScalarField,
    pub dphi: [ScalarField; 2],
    pub a0: ScalarField,
    pub a0_hat: ScalarField,
    pub a1: ScalarField,
    pub a2: ScalarField,
    /// `J_j = Im(φ·conj(D_jφ))`, spectral.
    pub current: [ScalarField; 2],
}

/// Runs the elliptic chain. The potentials match `solve_spatial_potentials`
/// and `solve_a0` bit for bit. With `couple == false` all potentials are 0.
pub(crate) fn derive(phi: &ScalarField, u: &ScalarField, sigma: Sigma, couple: bool) -> Derived {
    let phi = phi.to_physical();
    let u = u.to_physical();
    let grid = *phi.grid();
    let dphi = gradient(&phi);
    if !couple {
        let z = ScalarField::zeros(grid, ValueKind::Real);
        let zs = ScalarField::zeros_spectral(grid, ValueKind::Real);
        return Derived {
            phi,
            u,
            dphi,
            a0: z.clone(),
            a0_hat: zs.clone(),
            a1: z.clone(),
            a2: z,
            current: [zs.clone(), zs],
        };
    }
    let (a1, a2) = spatial_from_rho(&im_product(&phi, &u), sigma);
    let h = a0_hats(&phi, &dphi, &a1, &a2);
    let a0_hat = h.a01.add(&h.a02);
    let a0 = a0_hat.to_physical().with_kind(ValueKind::Real);
    let [jp1, jp2] = h.jp;
    let [aq1, aq2] = h.aq;
    let current = [jp1.add(&aq1), jp2.add(&aq2)];
    Derived { phi, u, dphi, a0, a0_hat, a1, a2, current }
}

/// `∂₁a₂ − ∂₂a₁`, physical.
pub fn curl(a1: &ScalarField, a2: &ScalarField) -> ScalarField {
    d(a2, Axis::X1).sub(&d(a1, Axis::X2)).to_physical().with_kind(ValueKind::Real)
}

/// `∂₁a₁ + ∂₂a₂`, physical.
pub fn divergence(a1: &ScalarField, a2: &ScalarField) -> ScalarField {
    d(a1, Axis::X1).add(&d(a2, Axis::X2)).to_physical().with_kind(ValueKind::Real)
}

fn dealiased_product(a: &ScalarField, b: &ScalarField) -> ScalarField {
    dealias(&a.mul(b))
}

/// Both sides of `∂₁(φ∂₂ψ) − ∂₂(φ∂₁ψ) = −∂₁(∂₂φ·ψ) + ∂₂(∂₁φ·ψ)`, each
/// evaluated from its own products; physical.
pub fn null_form_pair(phi: &ScalarField, psi: &ScalarField) -> Result<(ScalarField, ScalarField), ModelError> {
    check(phi, psi)?;
    let lhs = d(&dealiased_product(phi, &d(psi, Axis::X2)), Axis::X1)
        .sub(&d(&dealiased_product(phi, &d(psi, Axis::X1)), Axis::X2));
    let rhs = d(&dealiased_product(&d(phi, Axis::X1), psi), Axis::X2)
        .sub(&d(&dealiased_product(&d(phi, Axis::X2), psi), Axis::X1));
    Ok((lhs.to_physical(), rhs.to_physical()))
}

/// `φ·V′(|φ|²)`, dealiased, physical.
pub fn eval_w(phi: &ScalarField, pot: &PotentialSpec) -> ScalarField {
    w_spectral(phi, pot).to_physical()
}

fn w_spectral(phi: &ScalarField, pot: &PotentialSpec) -> ScalarField {
    let p = phi.to_physical();
    if pot.v_coeffs.iter().all(|&c| c == 0.0) {
        return ScalarField::zeros_spectral(*p.grid(), p.kind());
    }
    dealias(&p.map(|z| z * pot.dv(z.norm_sqr())).with_kind(p.kind()))
}
