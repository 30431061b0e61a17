use super::{check_band, smooth_step, LpError};
use crate::spectral::GridSpec;

/// Every cover satisfies `#cubes ≤ CUBE_COUNT_CONSTANT · 4^{k−ℓ}`: cube
/// centres lie on the lattice `2^ℓ Z²` within `2^{k+2} + 2^ℓ` of the origin.
pub const CUBE_COUNT_CONSTANT: f64 = 121.0;

/// `Σ_c χ_c² ∈ [1/4, 1]` pointwise (at most two overlapping cutoffs per axis),
/// hence `Σ_c ‖P_c f‖² ∈ [1/4, 1]·‖f‖²`.
pub const ORTHOGONALITY_BOUNDS: (f64, f64) = (0.25, 1.0);

/// One-dimensional partition profile `β(y) = T(y + 1) − T(y)`, supported in
/// `(−1, 1)`, with `Σ_a β(y − a) = 1`.
pub fn beta(y: f64) -> f64 {
    smooth_step(y + 1.0) - smooth_step(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cube {
    /// Lattice label `a`; the centre is `2^ℓ·a`.
    pub index: [i64; 2],
}

#[derive(Debug, Clone)]
pub struct CubeCover {
    pub ell: i64,
    pub k: i64,
    pub cubes: Vec<Cube>,
}

impl CubeCover {
    pub fn is_singleton(&self) -> bool {
        self.ell == self.k
    }

    pub fn side(&self) -> f64 {
        2f64.powi(self.ell as i32)
    }

    pub fn center(&self, c: &Cube) -> [f64; 2] {
        let s = self.side();
        [s * c.index[0] as f64, s * c.index[1] as f64]
    }

    /// `χ_c(ξ)`.
    pub fn symbol(&self, c: &Cube, xi: [f64; 2]) -> f64 {
        if self.is_singleton() {
            return 1.0;
        }
        let s = self.side();
        beta(xi[0] / s - c.index[0] as f64) * beta(xi[1] / s - c.index[1] as f64)
    }

    /// Cubes with nonzero weight at `ξ`, with their weights.
    pub fn weights_at(&self, xi: [f64; 2]) -> Vec<([i64; 2], f64)> {
        if self.is_singleton() {
            return vec![([0, 0], 1.0)];
        }
        let s = self.side();
        let axis = |x: f64| -> Vec<(i64, f64)> {
            let y = x / s;
            let f = y.floor() as i64;
            [f, f + 1]
                .into_iter()
                .map(|a| (a, beta(y - a as f64)))
                .filter(|(_, w)| *w > 0.0)
                .collect()
        };
        let (w1, w2) = (axis(xi[0]), axis(xi[1]));
        let mut out = Vec::with_capacity(4);
        for &(a1, b1) in &w1 {
            for &(a2, b2) in &w2 {
                out.push(([a1, a2], b1 * b2));
            }
        }
        out
    }
}

pub(crate) fn annulus_contains(k: i64, r: f64) -> bool {
    let lo = 2f64.powi(k as i32 - 2);
    let hi = 2f64.powi(k as i32 + 2);
    r >= lo && r <= hi
}

/// Partition of unity on the lattice points of `2^{k−2} ≤ |ξ| ≤ 2^{k+2}` by
/// cutoffs of scale `2^ℓ`; a single cube when `ℓ = k`.
pub fn cube_cover(grid: &GridSpec, ell: i64, k: i64) -> Result<CubeCover, LpError> {
    if ell > k {
        return Err(LpError::BadScale { ell, k });
    }
    check_band(grid, k)?;
    let mut cover = CubeCover { ell, k, cubes: Vec::new() };
    if ell == k {
        cover.cubes.push(Cube { index: [0, 0] });
        return Ok(cover);
    }
    let n = grid.n;
    let mut seen = std::collections::BTreeSet::new();
    for j2 in 0..n {
        let x2 = grid.xi(j2);
        for j1 in 0..n {
            let x1 = grid.xi(j1);
            if !annulus_contains(k, (x1 * x1 + x2 * x2).sqrt()) {
                continue;
            }
            for (a, _) in cover.weights_at([x1, x2]) {
                seen.insert(a);
            }
        }
    }
    cover.cubes = seen.into_iter().map(|index| Cube { index }).collect();
    Ok(cover)
}
