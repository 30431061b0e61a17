use super::{lp_project, BandRange, LpError};
use crate::spectral::{ScalarField, ValueKind};

/// The three partial sums of `Σ_{k0,k1,k2} P_{k0}(P_{k1}f · P_{k2}g)`.
#[derive(Debug, Clone)]
pub struct Trichotomy {
    pub lh: ScalarField,
    pub hl: ScalarField,
    pub hh: ScalarField,
}

impl Trichotomy {
    pub fn sum(&self) -> ScalarField {
        self.lh.add(&self.hl).add(&self.hh)
    }
}

/// Weights `(lh, hl, hh)` assigning the triple `(k0, k1, k2)`.
///
/// The index sets overlap; `HH` takes precedence, and a triple in both `LH`
/// and `HL` goes to the side of the lower input band (split evenly when
/// `k1 = k2`), which keeps the split symmetric under `f ↔ g`.
pub fn classify_triple(k0: i64, k1: i64, k2: i64) -> (f64, f64, f64) {
    let hh = k0 <= k1.min(k2) - 5 && (k1 - k2).abs() <= 5;
    if hh {
        return (0.0, 0.0, 1.0);
    }
    let lh = k1 <= k2 + 5 && (k0 - k2).abs() <= 5;
    let hl = k2 <= k1 + 5 && (k0 - k1).abs() <= 5;
    match (lh, hl) {
        (true, false) => (1.0, 0.0, 0.0),
        (false, true) => (0.0, 1.0, 0.0),
        _ => {
            if k1 < k2 {
                (1.0, 0.0, 0.0)
            } else if k1 > k2 {
                (0.0, 1.0, 0.0)
            } else {
                (0.5, 0.5, 0.0)
            }
        }
    }
}

/// Splits the resolvable part of `f·g` into low-high, high-low and high-high
/// interactions. Products are formed on a grid of twice the resolution, so no
/// aliasing enters; results are returned on the input grid in spectral form.
pub fn trichotomy_split(f: &ScalarField, g: &ScalarField) -> Result<Trichotomy, LpError> {
    if f.grid() != g.grid() {
        return Err(LpError::GridMismatch);
    }
    let grid = *f.grid();
    let fine = grid.with_n(grid.n * 2).expect("doubling a valid grid");
    let range = BandRange::of(&grid);
    let lift = |h: &ScalarField, k: i64| -> Result<ScalarField, LpError> {
        Ok(lp_project(h, k)?.resample(fine).to_physical())
    };
    let fb: Vec<ScalarField> = range.iter().map(|k| lift(f, k)).collect::<Result<_, _>>()?;
    let gb: Vec<ScalarField> = range.iter().map(|k| lift(g, k)).collect::<Result<_, _>>()?;
    let zero = ScalarField::zeros_spectral(grid, ValueKind::Complex);
    let (mut lh, mut hl, mut hh) = (zero.clone(), zero.clone(), zero);
    let ks: Vec<i64> = range.iter().collect();
    for (i1, &k1) in ks.iter().enumerate() {
        for (i2, &k2) in ks.iter().enumerate() {
            let prod = fb[i1].mul(&gb[i2]).to_spectral().resample(grid);
            for &k0 in &ks {
                let (a, b, c) = classify_triple(k0, k1, k2);
                let piece = lp_project(&prod, k0)?;
                if a != 0.0 {
                    lh = lh.add(&piece.scale(a));
                }
                if b != 0.0 {
                    hl = hl.add(&piece.scale(b));
                }
                if c != 0.0 {
                    hh = hh.add(&piece.scale(c));
                }
            }
        }
    }
    Ok(Trichotomy { lh, hl, hh })
}
