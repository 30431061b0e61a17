mod common;

use common::*;
use csh_core::lp::*;
use csh_core::spectral::{apply_multiplier, Complex64, GridSpec, ScalarField, Symbol};
use proptest::prelude::*;

fn grid(n: usize) -> GridSpec {
    GridSpec::standard(n)
}

#[test]
fn band_range_of_standard_grids() {
    assert_eq!(BandRange::of(&grid(64)), BandRange { lo: -1, hi: 3 });
    assert_eq!(BandRange::of(&grid(128)), BandRange { lo: -1, hi: 4 });
    assert_eq!(lattice_scale(&grid(64)), 0);
}

#[test]
fn bump_profile() {
    assert_eq!(chi(0.0), 1.0);
    assert_eq!(chi(2.0), 1.0);
    assert_eq!(chi(4.0), 0.0);
    assert!(chi(3.0) > 0.0 && chi(3.0) < 1.0);
    // Symmetric transition: χ(3) = 1/2.
    assert!((chi(3.0) - 0.5).abs() < 1e-15);
    for i in 0..200 {
        let r = i as f64 * 0.03;
        assert!(chi(r) >= chi(r + 0.03));
    }
}

#[test]
fn constant_field_projections() {
    let g = grid(32);
    let f = ScalarField::constant(g, Complex64::new(1.5, 0.0));
    for k in BandRange::of(&g).iter() {
        assert!(lp_project(&f, k).unwrap().l2_norm() < 1e-14);
        assert!(lp_project_leq(&f, k).sub(&f).l2_norm() < 1e-12);
    }
}

#[test]
fn plane_wave_on_band_circle_passes() {
    let g = grid(64);
    for k in 0..=3i64 {
        let m = 1i64 << (k + 1);
        let f = ScalarField::mode(g, m, 0, Complex64::new(1.0, 0.0));
        assert_eq!(band_symbol(k, m as f64), 1.0);
        let p = lp_project(&f, k).unwrap();
        assert!(p.sub(&f).l2_norm() < 1e-14);
    }
}

#[test]
fn out_of_range_band_is_rejected() {
    let g = grid(64);
    let f = random_disc(g, 10.0, true, 1);
    assert!(matches!(lp_project(&f, 4), Err(LpError::BandOutOfRange { k: 4, .. })));
    assert!(cube_cover(&g, 0, 4).is_err());
    assert!(cube_cover(&g, 3, 2).is_err());
    // P_{≤k} is the identity once k is large.
    assert!(lp_project_leq(&f, 40).sub(&f).l2_norm() < 1e-12 * f.l2_norm());
}

#[test]
fn telescoping_sums() {
    for n in [32usize, 64] {
        let g = grid(n);
        let r = BandRange::of(&g);
        let radius = 2f64.powi(r.hi as i32 + 1);
        for seed in 0..10 {
            let f = random_disc(g, radius, true, seed);
            let mut acc = ScalarField::zeros_spectral(g, csh_core::spectral::ValueKind::Complex);
            for k in r.iter() {
                acc = acc.add(&lp_project(&f, k).unwrap());
            }
            assert!(acc.sub(&f).l2_norm() <= 1e-10 * f.l2_norm());
            let with_mean = random_disc(g, radius, false, seed + 50);
            for k in r.iter() {
                let mut acc = lp_project_leq(&with_mean, k);
                for j in (k + 1)..=r.hi {
                    acc = acc.add(&lp_project(&with_mean, j).unwrap());
                }
                assert!(acc.sub(&with_mean).l2_norm() <= 1e-10 * with_mean.l2_norm());
            }
        }
    }
}

#[test]
fn square_function_equivalence() {
    let g = grid(64);
    let r = BandRange::of(&g);
    for seed in 0..10 {
        let f = random_disc(g, 16.0, true, seed);
        let mut sq = ScalarField::zeros(g, csh_core::spectral::ValueKind::Real);
        for k in r.iter() {
            sq = sq.add(&lp_project(&f, k).unwrap().to_physical().norm_sqr());
        }
        let ratio = sq.map(|z| Complex64::new(z.re.sqrt(), 0.0)).l2_norm() / f.l2_norm();
        assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    }
}

#[test]
fn singleton_cover() {
    let g = grid(64);
    let c = cube_cover(&g, 2, 2).unwrap();
    assert_eq!(c.cubes.len(), 1);
    assert!(c.is_singleton());
    assert_eq!(c.symbol(&c.cubes[0], [5.0, 1.0]), 1.0);
}

#[test]
fn cube_covers_partition_unity_and_counts() {
    for (n, l) in [(64usize, std::f64::consts::TAU), (64, 11.0), (128, std::f64::consts::TAU)] {
        let g = GridSpec::new(n, l, 2.0 / 3.0).unwrap();
        let r = BandRange::of(&g);
        for k in r.iter() {
            for ell in (lattice_scale(&g) - 1).min(k)..=k {
                let cover = cube_cover(&g, ell, k).unwrap();
                let bound = CUBE_COUNT_CONSTANT * 4f64.powi((k - ell) as i32);
                assert!(cover.cubes.len() as f64 <= bound, "({ell},{k}): {}", cover.cubes.len());
                for j2 in 0..n {
                    for j1 in 0..n {
                        let xi = [g.xi(j1), g.xi(j2)];
                        let rad = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                        if rad < 2f64.powi(k as i32 - 2) || rad > 2f64.powi(k as i32 + 2) {
                            continue;
                        }
                        let s: f64 = cover.cubes.iter().map(|c| cover.symbol(c, xi)).sum();
                        assert!((s - 1.0).abs() <= 1e-12, "({ell},{k}) at {xi:?}: {s}");
                    }
                }
            }
        }
    }
    let g = grid(128);
    let cover = cube_cover(&g, 1, 4).unwrap();
    assert!(cover.cubes.len() as f64 <= CUBE_COUNT_CONSTANT * 64.0);
}

fn brute_square_sup(phik: &ScalarField, cover: &CubeCover) -> f64 {
    let g = *phik.grid();
    let mut acc = ScalarField::zeros(g, csh_core::spectral::ValueKind::Real);
    for c in &cover.cubes {
        let cc = *c;
        let cv = cover.clone();
        let sym = Symbol::custom(move |xi| Complex64::new(cv.symbol(&cc, xi), 0.0));
        let piece = apply_multiplier(phik, &sym).unwrap().to_physical();
        acc = acc.add(&piece.norm_sqr());
    }
    acc.data().iter().map(|z| z.re).fold(0.0, f64::max)
}

#[test]
fn almost_orthogonality_of_cubes() {
    let g = grid(64);
    let (c1, c2) = ORTHOGONALITY_BOUNDS;
    for seed in 0..5 {
        let f = random_disc(g, 16.0, true, seed);
        let fk = lp_project(&f, 2).unwrap();
        for ell in 0..2 {
            let cover = cube_cover(&g, ell, 2).unwrap();
            let mut s = 0.0;
            for c in &cover.cubes {
                let cc = *c;
                let cv = cover.clone();
                let sym = Symbol::custom(move |xi| Complex64::new(cv.symbol(&cc, xi), 0.0));
                s += apply_multiplier(&fk, &sym).unwrap().l2_norm_sqr();
            }
            let r = s / fk.l2_norm_sqr();
            assert!(r >= c1 - 1e-12 && r <= c2 + 1e-12, "{r}");
        }
    }
}

#[test]
fn fast_square_function_matches_brute_force() {
    for (n, l) in [(32usize, std::f64::consts::TAU), (32, 9.0)] {
        let g = GridSpec::new(n, l, 2.0 / 3.0).unwrap();
        let r = BandRange::of(&g);
        for seed in 0..3 {
            let f = random_disc(g, g.nyquist(), true, seed);
            for k in r.iter() {
                let fk = lp_project(&f, k).unwrap();
                for ell in (lattice_scale(&g) - 1).min(k)..=k {
                    let cover = cube_cover(&g, ell, k).unwrap();
                    let fast = square_function_sup(&fk, &cover);
                    let slow = brute_square_sup(&fk, &cover);
                    assert!((fast - slow).abs() <= 1e-10 * slow.max(1e-300), "({ell},{k}) {fast} vs {slow}");
                }
            }
        }
    }
}

fn wave_series(g: GridSpec, seed: u64, samples: usize) -> FieldSeries {
    let f = random_disc(g, 12.0, true, seed);
    let dt = 1.0 / (samples - 1) as f64;
    let fields = (0..samples)
        .map(|i| {
            let t = i as f64 * dt;
            let sym = Symbol::custom(move |xi| {
                Complex64::from_polar(1.0, t * (xi[0] * xi[0] + xi[1] * xi[1]).sqrt())
            });
            apply_multiplier(&f, &sym).unwrap()
        })
        .collect();
    FieldSeries::uniform(0.0, dt, fields).unwrap()
}

#[test]
fn s0k_supremum_matches_exhaustive_scan() {
    let g = grid(32);
    let series = wave_series(g, 4, 9);
    for k in BandRange::of(&g).iter() {
        let d = s0k_detail(&series, k).unwrap();
        let bands: Vec<ScalarField> = series.fields.iter().map(|f| lp_project(f, k).unwrap()).collect();
        let mut best = f64::NEG_INFINITY;
        for ell in lattice_scale(&g).min(k)..=k {
            let cover = cube_cover(&g, ell, k).unwrap();
            let sups: Vec<f64> = bands.iter().map(|b| brute_square_sup(b, &cover).sqrt()).collect();
            let l4 = time_norm(&sups, series.dt, 4.0);
            let term = 2f64.powi((k - ell) as i32) * 2f64.powf(-1.5 * k as f64) * l4 * l4;
            best = best.max(term);
        }
        assert!((d.ks_term - best).abs() <= 1e-10 * best, "band {k}");
        let l2 = bands.iter().map(|b| b.l2_norm()).fold(0.0, f64::max);
        assert!((d.value - (l2 * l2 + best).sqrt()).abs() <= 1e-10 * d.value);
    }
}

#[test]
fn s_norm_trivial_cases() {
    let g = grid(32);
    let zero = FieldSeries::constant(ScalarField::zeros(g, csh_core::spectral::ValueKind::Complex), 5, 1.0);
    assert_eq!(s_gamma_norm(&zero, 0.9).unwrap().value, 0.0);
    assert_eq!(s0k_norm(&zero, 1).unwrap(), 0.0);
    let empty = FieldSeries { t0: 0.0, dt: 0.1, fields: vec![] };
    assert_eq!(s0k_norm(&empty, 0), Err(LpError::EmptyTrajectory));
    assert!(s_gamma_norm(&empty, 0.0).is_err());

    let series = wave_series(g, 9, 9);
    let base = s_gamma_norm(&series, 0.8).unwrap();
    let scaled = s_gamma_norm(&series.scale(-3.0), 0.8).unwrap();
    assert!((scaled.value - 3.0 * base.value).abs() <= 1e-12 * scaled.value);
    assert!((base.reweight(0.8) - base.value).abs() <= 1e-14 * base.value);
    let json = serde_json::to_string(&base).unwrap();
    let back: TrajectoryNormReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.bands.len(), base.bands.len());
}

#[test]
fn time_constant_band_dominates_l2() {
    let g = grid(64);
    for k in 0..=3i64 {
        let f = random_disc(g, 16.0, true, k as u64);
        let fk = lp_project(&f, k).unwrap();
        let series = FieldSeries::constant(f, 9, 1.0);
        assert!(s0k_norm(&series, k).unwrap() >= fk.l2_norm());
    }
}

#[test]
fn s_gamma_against_sobolev() {
    let g = grid(64);
    // On the circles |ξ| = 2^{k+1} a single band symbol equals 1, so at γ = 0
    // the S-norm of a static field dominates its L² norm exactly.
    let mut f = ScalarField::zeros_spectral(g, csh_core::spectral::ValueKind::Complex);
    let mut r = rng(3);
    for k in 0..=3i64 {
        let m = 1i64 << (k + 1);
        for (a, b) in [(m, 0), (0, m), (-m, 0), (0, -m)] {
            use rand::Rng;
            let idx = g.index_of(b) * g.n + g.index_of(a);
            f.data_mut()[idx] = Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        }
    }
    let s = s_gamma_norm(&FieldSeries::constant(f.clone(), 9, 1.0), 0.0).unwrap();
    assert!(s.value >= sobolev_norm(&f, 0.0, false) * (1.0 - 1e-12));
    // Generic static fields: Σ P_k² ≥ 1/2 and ⟨ξ⟩^{2γ} ≤ 17^γ 4^{γk⁺} on band k.
    for seed in 0..4 {
        let f = random_disc(g, 16.0, true, seed);
        for gamma in [0.0, 0.5, 1.0] {
            let s = s_gamma_norm(&FieldSeries::constant(f.clone(), 5, 1.0), gamma).unwrap();
            let h = sobolev_norm(&f, gamma, false);
            assert!(s.value >= h / (2.0 * 17f64.powf(gamma)).sqrt(), "{} vs {h}", s.value);
        }
    }
}

#[test]
fn sobolev_norm_cases() {
    let l = 3.0;
    let g = GridSpec::new(32, l, 2.0 / 3.0).unwrap();
    let zero = ScalarField::zeros(g, csh_core::spectral::ValueKind::Complex);
    assert_eq!(sobolev_norm(&zero, 1.0, true), 0.0);
    let wave = ScalarField::mode(g, 1, 0, Complex64::new(1.0, 0.0));
    let want = std::f64::consts::TAU / l * l;
    assert!((sobolev_norm(&wave, 1.0, true) - want).abs() < 1e-13);
    for seed in 0..10 {
        let f = random_physical(g, seed);
        assert!((sobolev_norm(&f, 0.0, false) - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
    }
}

#[test]
fn low_frequency_bands_bounded_by_energy() {
    let g = grid(64);
    for seed in 0..5 {
        let series = wave_series(g, seed, 17);
        for k in BandRange::of(&g).lo..=0 {
            let d = s0k_detail(&series, k).unwrap();
            assert!(d.value <= 10.0 * d.linf_l2, "band {k}: {} vs {}", d.value, d.linf_l2);
        }
    }
}

fn exact_product_bands(f: &ScalarField, g2: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let fine = grid.with_n(grid.n * 2).unwrap();
    let prod = f.resample(fine).to_physical().mul(&g2.resample(fine).to_physical());
    let prod = prod.to_spectral().resample(grid);
    let mut acc = ScalarField::zeros_spectral(grid, csh_core::spectral::ValueKind::Complex);
    for k in BandRange::of(&grid).iter() {
        acc = acc.add(&lp_project(&prod, k).unwrap());
    }
    acc
}

#[test]
fn trichotomy_reconstructs_product() {
    let g = grid(32);
    for seed in 0..3 {
        let f = random_disc(g, 8.0, true, seed);
        let h = random_disc(g, 8.0, true, seed + 10);
        let t = trichotomy_split(&f, &h).unwrap();
        let want = exact_product_bands(&f, &h);
        assert!(t.sum().sub(&want).l2_norm() <= 1e-8 * want.l2_norm());
        let swapped = trichotomy_split(&h, &f).unwrap();
        assert!(t.lh.sub(&swapped.hl).l2_norm() <= 1e-12 * want.l2_norm());
        let same = trichotomy_split(&f, &f).unwrap();
        assert!(same.lh.sub(&same.hl).l2_norm() <= 1e-12 * same.sum().l2_norm());
    }
}

#[test]
fn trichotomy_support_separation() {
    let g = grid(128);
    let low = ScalarField::mode(g, 1, 0, Complex64::new(1.0, 0.0));
    let high = ScalarField::mode(g, 0, 16, Complex64::new(1.0, 0.0)).add(&ScalarField::mode(g, 16, 3, Complex64::new(0.5, 0.2)));
    let t = trichotomy_split(&low, &high).unwrap();
    let total = t.sum().l2_norm();
    assert!(total > 0.0);
    assert!(t.hl.l2_norm() <= 1e-12 * total);
    assert!(t.hh.l2_norm() <= 1e-12 * total);
    let want = exact_product_bands(&low, &high);
    assert!(t.lh.sub(&want).l2_norm() <= 1e-10 * total);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trichotomy_classes_cover_every_live_triple(k0 in -3i64..12, k1 in -3i64..12, k2 in -3i64..12) {
        let (a, b, c) = classify_triple(k0, k1, k2);
        prop_assert!((a + b + c - 1.0).abs() < 1e-15);
        let (a2, b2, c2) = classify_triple(k0, k2, k1);
        prop_assert_eq!((a, b, c), (b2, a2, c2));
    }

    #[test]
    fn band_symbols_telescope(r in 0.0f64..200.0, lo in -4i64..0, hi in 3i64..8) {
        let s: f64 = (lo..=hi).map(|k| band_symbol(k, r)).sum();
        prop_assert!((s - (chi_k(hi, r) - chi_k(lo - 1, r))).abs() < 1e-12);
    }
}
