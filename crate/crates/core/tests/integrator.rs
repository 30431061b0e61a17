mod common;

use common::*;
use csh_core::diagnostics::energy;
use csh_core::integrator::{
    evolve, half_wave, nonlinearity_f, rk4_reference_step, twisted_duhamel_step, twisted_duhamel_step_traced,
    IntegratorError, Quadrature, Scheme, StepConfig,
};
use csh_core::model::{CshState, InitialData, PotentialSpec, Sigma};
use csh_core::spectral::{Complex64, GridSpec, ScalarField, ValueKind};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bump_state(n: usize, amp: f64) -> CshState {
    let g = GridSpec::standard(n);
    let d = InitialData::GaussianBump { amplitude: amp, width: 0.8, center: [3.0, 3.2], omega: 1.0 };
    let (phi, u) = d.build(&g).unwrap();
    CshState::new(phi, u, Sigma::Minus, 0.0).unwrap()
}

fn linear_cfg(dt: f64, scheme: Scheme) -> StepConfig {
    StepConfig { dt, scheme, couple_gauge: false, ..Default::default() }
}

fn rel_l2(a: &CshState, b: &CshState) -> f64 {
    let num = a.phi.sub(&b.phi).l2_norm_sqr() + a.u.sub(&b.u).l2_norm_sqr();
    let den = b.phi.l2_norm_sqr() + b.u.l2_norm_sqr();
    (num / den).sqrt()
}

fn slope(errs: &[f64]) -> f64 {
    // Least-squares slope of log2(err) against the halving level.
    let m = errs.len() as f64;
    let xs: Vec<f64> = (0..errs.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = errs.iter().map(|e| -e.log2()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn half_wave_identity_and_zero_mode() {
    let g = GridSpec::standard(32);
    let f = random_band_limited(g, 6, false, 1);
    let v = random_band_limited(g, 6, false, 2);
    let (p, q) = half_wave(&f, &v, 0.0).unwrap();
    assert!(p.rel_diff(&f) < 1e-15 && q.rel_diff(&v) < 1e-15);
    let z = ScalarField::zeros(g, ValueKind::Complex);
    let cst = ScalarField::constant(g, c(1.5, -0.5));
    let (p, q) = half_wave(&z, &cst, 0.7).unwrap();
    assert!(p.rel_diff(&cst.scale(0.7)) < 1e-15);
    assert!(q.rel_diff(&cst) < 1e-15);
}

#[test]
fn half_wave_single_mode_matches_closed_form_and_conserves_energy() {
    let g = GridSpec::standard(32);
    let (m1, m2) = (3i64, -2i64);
    let w = ((m1 * m1 + m2 * m2) as f64).sqrt();
    let f = ScalarField::mode(g, m1, m2, c(1.0, 0.0));
    let z = ScalarField::zeros_spectral(g, ValueKind::Complex);
    let wave_energy = |p: &ScalarField, q: &ScalarField| 0.5 * (q.l2_norm_sqr() + w * w * p.l2_norm_sqr());
    let e0 = wave_energy(&f, &z);
    let dt = 0.01;
    let (mut p, mut q) = (f.clone(), z.clone());
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let next = half_wave(&p, &q, dt).unwrap();
        p = next.0;
        q = next.1;
        worst = worst.max((wave_energy(&p, &q) - e0).abs() / e0);
    }
    assert!(worst <= 1e-13, "{worst:e}");
    let t = 1000.0 * dt;
    let want = ScalarField::mode(g, m1, m2, c((w * t).cos(), 0.0));
    assert!(p.rel_diff(&want) < 1e-12);
}

#[test]
fn nonlinearity_trivial_cases() {
    let g = GridSpec::standard(32);
    let zero = CshState::zero(g, Sigma::Minus);
    assert_eq!(nonlinearity_f(&zero, &PotentialSpec::self_dual(1.0)).linf_norm(), 0.0);
    // A real profile at rest carries no charge or current, so all potentials vanish.
    let phi = random_real_band_limited(g, 5, 4).with_kind(ValueKind::Complex);
    let s = CshState::new(phi.clone(), ScalarField::zeros(g, ValueKind::Complex), Sigma::Minus, 0.0).unwrap();
    assert!(s.a0.linf_norm() + s.a1.linf_norm() + s.a2.linf_norm() < 1e-14 * phi.linf_norm().powi(2));
    let f = nonlinearity_f(&s, &PotentialSpec::new(1.0, vec![]).unwrap());
    assert!(f.rel_diff(&phi) < 1e-14);
}

#[test]
fn nonlinearity_is_bit_identical_after_recomputing_caches() {
    let s = bump_state(32, 1.0);
    let pot = PotentialSpec::self_dual(1.0);
    let mut fresh = s.clone();
    fresh.refresh().unwrap();
    assert_eq!(nonlinearity_f(&s, &pot), nonlinearity_f(&fresh, &pot));
    let stepped = twisted_duhamel_step(&s, &StepConfig::default(), &pot).unwrap();
    let mut again = stepped.clone();
    again.refresh().unwrap();
    assert_eq!(again, stepped);
}

#[test]
fn uncoupled_free_duhamel_step_is_the_half_wave() {
    let g = GridSpec::standard(32);
    let phi = random_band_limited(g, 8, false, 10);
    let u = random_band_limited(g, 8, false, 11);
    let s = CshState::new(phi.clone(), u.clone(), Sigma::Minus, 0.0).unwrap();
    let cfg = linear_cfg(0.05, Scheme::TwistedDuhamel);
    let next = twisted_duhamel_step(&s, &cfg, &PotentialSpec::zero()).unwrap();
    let (p, q) = half_wave(&phi, &u, 0.05).unwrap();
    assert!(next.phi.rel_diff(&p) <= 1e-12);
    assert!(next.u.rel_diff(&q) <= 1e-12);
}

#[test]
fn zero_state_stays_zero() {
    let g = GridSpec::standard(16);
    let z = CshState::zero(g, Sigma::Minus);
    let pot = PotentialSpec::self_dual(1.0);
    for scheme in [Scheme::TwistedDuhamel, Scheme::Rk4Reference] {
        let cfg = StepConfig { scheme, ..Default::default() };
        let n = if scheme == Scheme::Rk4Reference {
            rk4_reference_step(&z, &cfg, &pot).unwrap()
        } else {
            twisted_duhamel_step(&z, &cfg, &pot).unwrap()
        };
        assert_eq!(n.phi.linf_norm() + n.u.linf_norm() + n.a0.linf_norm(), 0.0);
        assert_eq!(n.provenance.step, 1);
    }
}

#[test]
fn picard_contracts_with_ratio_proportional_to_dt() {
    let s = bump_state(32, 1.0);
    let pot = PotentialSpec::self_dual(1.0);
    let mut prev_ratio = f64::INFINITY;
    for dt in [0.02, 0.01, 0.005] {
        let cfg = StepConfig { dt, ..Default::default() };
        let (_, d) = twisted_duhamel_step_traced(&s, &cfg, &pot).unwrap();
        assert!(d.len() >= 3);
        let ratios: Vec<f64> = d.windows(2).take(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|&r| r < 0.5), "{ratios:?}");
        let r = ratios[0];
        assert!(r <= 0.5 * prev_ratio, "ratio {r} vs {prev_ratio}");
        prev_ratio = r;
    }
}

#[test]
fn accepted_picard_state_is_a_fixed_point() {
    let s = bump_state(32, 1.0);
    let pot = PotentialSpec::self_dual(1.0);
    let cfg = StepConfig { dt: 0.02, ..Default::default() };
    let a = twisted_duhamel_step(&s, &cfg, &pot).unwrap();
    let k = a.provenance.picard_iters;
    assert!(a.provenance.picard_residual <= cfg.picard_tol);
    let extra = StepConfig { picard_max: k + 1, picard_tol: 1e-300, ..cfg };
    let b = twisted_duhamel_step(&s, &extra, &pot).unwrap();
    assert_eq!(b.provenance.picard_iters, k + 1);
    assert!(rel_l2(&b, &a) <= 10.0 * cfg.picard_tol);
}

#[test]
fn inflated_step_triggers_picard_divergence() {
    let s = bump_state(32, 1.0);
    let pot = PotentialSpec::self_dual(1.0);
    let cfg = StepConfig { dt: 2.0, ..Default::default() };
    let err = evolve(&s, &cfg, &pot, 20.0, 1).unwrap_err();
    assert!(matches!(err.error, IntegratorError::PicardDivergence { .. }), "{err}");
    assert!(!err.partial.records.is_empty());
}

#[test]
fn non_finite_input_is_reported() {
    let mut s = bump_state(16, 1.0);
    s.phi.data_mut()[3] = c(f64::NAN, 0.0);
    for scheme in [Scheme::TwistedDuhamel, Scheme::Rk4Reference] {
        let cfg = StepConfig { scheme, ..Default::default() };
        let err = evolve(&s, &cfg, &PotentialSpec::zero(), 0.05, 1).unwrap_err();
        assert!(matches!(err.error, IntegratorError::NonFinite { step: 1 }), "{err}");
    }
}

#[test]
fn rk4_linear_order() {
    let g = GridSpec::standard(32);
    let phi = random_disc(g, 6.0, false, 20);
    let u = random_disc(g, 6.0, false, 21);
    let s = CshState::new(phi.clone(), u.clone(), Sigma::Minus, 0.0).unwrap();
    let t_end = 1.0;
    let (p, q) = half_wave(&phi, &u, t_end).unwrap();
    let exact = CshState { phi: p.to_physical(), u: q.to_physical(), ..s.clone() };
    let errs: Vec<f64> = [0.04, 0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| {
            let tr = evolve(&s, &linear_cfg(dt, Scheme::Rk4Reference), &PotentialSpec::zero(), t_end, 1000).unwrap();
            rel_l2(tr.last(), &exact)
        })
        .collect();
    let k = slope(&errs);
    assert!((3.7..=4.3).contains(&k), "slope {k} errs {errs:?}");
}

fn reference(s: &CshState, pot: &PotentialSpec, t_end: f64) -> CshState {
    let cfg = StepConfig { dt: 1.25e-3, scheme: Scheme::Rk4Reference, ..Default::default() };
    evolve(s, &cfg, pot, t_end, 100_000).unwrap().last().clone()
}

#[test]
fn duhamel_nonlinear_order_two_for_both_quadratures() {
    let s = bump_state(32, 1.0);
    let pot = PotentialSpec::self_dual(1.0);
    let t_end = 0.4;
    let exact = reference(&s, &pot, t_end);
    for quadrature in [Quadrature::Trapezoid, Quadrature::Midpoint] {
        let errs: Vec<f64> = [0.04, 0.02, 0.01, 0.005]
            .iter()
            .map(|&dt| {
                let cfg = StepConfig { dt, quadrature, ..Default::default() };
                rel_l2(evolve(&s, &cfg, &pot, t_end, 1000).unwrap().last(), &exact)
            })
            .collect();
        let k = slope(&errs);
        assert!((1.7..=2.3).contains(&k), "{quadrature:?} slope {k} errs {errs:?}");
    }
}

#[test]
fn schemes_agree_on_small_data() {
    let s = bump_state(64, 0.1);
    let pot = PotentialSpec::self_dual(1.0);
    let mut prev = f64::INFINITY;
    for dt in [0.02, 0.01] {
        let a = evolve(&s, &StepConfig { dt, ..Default::default() }, &pot, 0.5, 1000).unwrap();
        let cfg = StepConfig { dt, scheme: Scheme::Rk4Reference, ..Default::default() };
        let b = evolve(&s, &cfg, &pot, 0.5, 1000).unwrap();
        let gap = rel_l2(a.last(), b.last());
        assert!(gap <= 1e-4 && gap < prev, "gap {gap:e}");
        prev = gap;
    }
}

#[test]
fn evolve_single_step_and_restart_determinism() {
    let s = bump_state(32, 1.0);
    let pot = PotentialSpec::self_dual(1.0);
    let cfg = StepConfig { dt: 0.01, ..Default::default() };
    let one = evolve(&s, &cfg, &pot, 0.01, 1).unwrap();
    assert_eq!(one.records.len(), 2);
    assert_eq!(one.states.len(), 2);
    let straight = evolve(&s, &cfg, &pot, 0.2, 5).unwrap();
    let half = evolve(&s, &cfg, &pot, 0.1, 5).unwrap();
    let rest = evolve(half.last(), &cfg, &pot, 0.2, 5).unwrap();
    let (a, b) = (straight.last(), rest.last());
    assert_eq!(a.phi, b.phi);
    assert_eq!(a.u, b.u);
    assert_eq!(a.a_tracked, b.a_tracked);
    assert_eq!(a.provenance, b.provenance);
    assert!((a.t - b.t).abs() < 1e-12);
    assert_eq!(straight.rows.len(), 5);
    let again = evolve(&s, &cfg, &pot, 0.2, 5).unwrap();
    assert_eq!(again.rows, straight.rows);
}

#[test]
fn linear_run_conserves_energy() {
    let g = GridSpec::standard(64);
    let phi = random_disc(g, 12.0, false, 30);
    let u = random_disc(g, 12.0, false, 31);
    let s = CshState::new(phi, u, Sigma::Minus, 0.0).unwrap();
    let pot = PotentialSpec::zero();
    let cfg = linear_cfg(0.01, Scheme::TwistedDuhamel);
    let tr = evolve(&s, &cfg, &pot, 10.0, 100).unwrap();
    assert_eq!(tr.records.len(), 1001);
    // a ≡ 0 is forced, so the energy is evaluated with the uncoupled potentials.
    let lin_energy = |st: &CshState| {
        let mut z = st.clone();
        let zero = ScalarField::zeros(g, ValueKind::Real);
        z.a1 = zero.clone();
        z.a2 = zero;
        energy(&z, &pot)
    };
    let e0 = lin_energy(&s);
    let worst = tr.states.iter().map(|st| (lin_energy(st) - e0).abs() / e0).fold(0.0, f64::max);
    assert!(worst <= 1e-10, "{worst:e}");
}

#[test]
fn bad_configs_are_rejected() {
    let s = bump_state(16, 1.0);
    let pot = PotentialSpec::zero();
    for cfg in [
        StepConfig { dt: 0.0, ..Default::default() },
        StepConfig { picard_max: 0, ..Default::default() },
        StepConfig { picard_tol: 0.0, ..Default::default() },
    ] {
        assert!(matches!(twisted_duhamel_step(&s, &cfg, &pot), Err(IntegratorError::BadConfig(_))));
    }
    assert!(evolve(&s, &StepConfig::default(), &pot, 0.0, 1).is_err());
}
