use super::ensemble::{Role, Traj};
use super::measure::{abs_grad, hom, inh, lp, lt, max, multiply, product, seq_norm, sup, times};
use super::{Ctx, EstimateError, Params};
use crate::integrator::half_wave;
use crate::lp::{classify_triple, cube_cover, lattice_scale, lp_project, lp_project_leq, square_function_norms, BandRange};
use crate::spectral::{Axis, Complex64, ScalarField, Symbol};
use serde::Serialize;

type Parts = Result<Vec<(f64, f64)>, EstimateError>;

#[derive(Debug, Clone, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub domain: &'static str,
}

/// One inequality `LHS ≲ RHS` with its hypotheses as a predicate.
#[derive(Clone, Serialize)]
pub struct EstimateInfo {
    pub id: &'static str,
    pub name: &'static str,
    pub statement: &'static str,
    pub hypotheses: &'static str,
    pub params: Vec<ParamSpec>,
    /// Smallest base resolution at which every quantity is resolved.
    pub min_n: usize,
    pub default_n: usize,
    #[serde(skip)]
    check: fn(&Params) -> Result<(), String>,
    #[serde(skip)]
    eval: fn(&Ctx, &Params) -> Parts,
}

impl std::fmt::Debug for EstimateInfo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EstimateInfo").field("id", &self.id).finish_non_exhaustive()
    }
}

impl EstimateInfo {
    /// `Ok` iff `p` satisfies the hypotheses; boundaries follow the strict or
    /// non-strict inequalities of each statement.
    pub fn admissible(&self, p: &Params) -> Result<(), String> {
        for spec in &self.params {
            match p.get(spec.name) {
                None => return Err(format!("missing parameter {}", spec.name)),
                Some(v) if v.is_nan() => return Err(format!("{} is NaN", spec.name)),
                _ => {}
            }
        }
        (self.check)(p)
    }

    pub fn default_params(&self) -> Params {
        self.params.iter().map(|s| (s.name.to_string(), s.default)).collect()
    }

    /// `(LHS, RHS)` for each part of the statement on one member.
    pub(crate) fn evaluate(&self, ctx: &Ctx, p: &Params) -> Parts {
        (self.eval)(ctx, p)
    }
}

fn par(name: &'static str, default: f64, domain: &'static str) -> ParamSpec {
    ParamSpec { name, default, domain }
}

fn require(ok: bool, msg: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

fn finite(p: &Params, names: &[&str]) -> Result<(), String> {
    for n in names {
        require(p[*n].is_finite(), &format!("{n} must be finite"))?;
    }
    Ok(())
}

fn integer(x: f64) -> bool {
    x.is_finite() && x.fract() == 0.0
}

/// `2 ≤ q, r ≤ ∞` and `2/q ≤ 1/2 − 1/r`.
fn strichartz(q: f64, r: f64) -> Result<(), String> {
    require(q >= 2.0 && r >= 2.0, "need 2 <= q, r")?;
    require(2.0 / q <= 0.5 - 1.0 / r + 1e-12, "(q, r) is not Strichartz admissible: 2/q > 1/2 - 1/r")
}

fn range(ctx: &Ctx) -> BandRange {
    BandRange::of(&ctx.grid())
}

fn samples(ctx: &Ctx, kind: Traj) -> Vec<ScalarField> {
    ctx.m.trajectory(kind).fields
}

fn sym_abs(s: f64) -> Symbol {
    Symbol::AbsGrad { s, zero: Some(Complex64::default()) }
}

pub fn list_estimates() -> Vec<EstimateInfo> {
    vec![
        EstimateInfo {
            id: "bernstein",
            name: "Bernstein inequality",
            statement: "‖φ‖_{L^p} ≲ |B|^{1/2−1/p} ‖φ‖_{L²} for supp φ̂ ⊂ B",
            hypotheses: "2 ≤ p ≤ ∞",
            params: vec![par("p", 4.0, "[2, ∞]")],
            min_n: 16,
            default_n: 64,
            check: |p| require(p["p"] >= 2.0, "need p >= 2"),
            eval: bernstein,
        },
        EstimateInfo {
            id: "sobolev_product",
            name: "Sobolev product rule",
            statement: "‖φ¹φ²‖_{Ḣ^{−β₀}} ≲ ‖φ¹‖_{Ḣ^{β₁}} ‖φ²‖_{Ḣ^{β₂}}",
            hypotheses: "β₀ + β₁ + β₂ = 1, max βᵢ < 1",
            params: vec![par("beta0", 0.25, "ℝ"), par("beta1", 0.375, "ℝ"), par("beta2", 0.375, "ℝ")],
            min_n: 16,
            default_n: 64,
            check: |p| {
                finite(p, &["beta0", "beta1", "beta2"])?;
                let b = [p["beta0"], p["beta1"], p["beta2"]];
                require((b[0] + b[1] + b[2] - 1.0).abs() <= 1e-12, "need beta0 + beta1 + beta2 = 1")?;
                require(b.iter().all(|&x| x < 1.0), "need max beta < 1")
            },
            eval: sobolev_product,
        },
        EstimateInfo {
            id: "lp_basic",
            name: "Littlewood-Paley boundedness, finite band and square function",
            statement: "‖P_kφ‖_p, ‖P_{≤k}φ‖_p ≲ ‖φ‖_p; ‖|∇|P_kφ‖_p ~ 2^k‖P_kφ‖_p; \
                        ‖⟨∇⟩P_kφ‖_p ~ 2^{k⁺}‖P_kφ‖_p; ‖(Σ|P_kφ|²)^{1/2}‖_p ~ ‖φ‖_p (1 < p < ∞)",
            hypotheses: "1 ≤ p ≤ ∞; the square function part only for 1 < p < ∞",
            params: vec![par("p", 4.0, "[1, ∞]")],
            min_n: 16,
            default_n: 64,
            check: |p| require(p["p"] >= 1.0, "need p >= 1"),
            eval: lp_basic,
        },
        EstimateInfo {
            id: "simple_convolution",
            name: "Simple convolution bound",
            statement: "‖Σ_{|j−k|≤a} b_j‖_{ℓ^p_k} ≲_a ‖b‖_{ℓ^p}",
            hypotheses: "b ≥ 0, a ≥ 0 an integer, 1 ≤ p ≤ ∞",
            params: vec![par("a", 2.0, "integer ≥ 0"), par("p", 2.0, "[1, ∞]")],
            min_n: 16,
            default_n: 64,
            check: |p| {
                require(integer(p["a"]) && p["a"] >= 0.0, "a must be a nonnegative integer")?;
                require(p["p"] >= 1.0, "need p >= 1")
            },
            eval: simple_convolution,
        },
        EstimateInfo {
            id: "kt_strichartz",
            name: "Klainerman-Tataru refined Strichartz",
            statement: "‖(Σ_{c∈C_{ℓ,k}} |P_c e^{±it|∇|} f_k|²)^{1/2}‖_{L^q_t L^r_x} \
                        ≲ 2^{(1−2/q−2/r)(ℓ−k)} 2^{(1−1/q−2/r)k} ‖f_k‖_{L²}",
            hypotheses: "ℓ ≤ k, (q, r) Strichartz admissible: 2 ≤ q, r ≤ ∞, 2/q ≤ 1/2 − 1/r",
            params: vec![
                par("q", 4.0, "[2, ∞]"),
                par("r", f64::INFINITY, "[2, ∞]"),
                par("k_minus_ell", 2.0, "integer ≥ 0"),
                par("sign", 1.0, "±1"),
            ],
            min_n: 32,
            default_n: 64,
            check: |p| {
                strichartz(p["q"], p["r"])?;
                require(integer(p["k_minus_ell"]) && p["k_minus_ell"] >= 0.0, "need ell <= k")?;
                require(p["sign"] == 1.0 || p["sign"] == -1.0, "sign must be +1 or -1")
            },
            eval: kt_strichartz,
        },
        EstimateInfo {
            id: "s0k_controls_strichartz",
            name: "S⁰_k controls the refined Strichartz norms",
            statement: "sup_{ℓ≤k} 2^{−(1−2/q−2/r)(ℓ−k)} 2^{−(1−1/q−2/r)k} \
                        ‖(Σ_{c∈C_{ℓ,k}} |P_c φ_k|²)^{1/2}‖_{L^q_t L^r_x} ≲ ‖φ_k‖_{S⁰_k}",
            hypotheses: "(q, r) Strichartz admissible",
            params: vec![par("q", 8.0, "[2, ∞]"), par("r", 8.0, "[2, ∞]")],
            min_n: 32,
            default_n: 64,
            check: |p| strichartz(p["q"], p["r"]),
            eval: s0k_controls_strichartz,
        },
        EstimateInfo {
            id: "s_gamma_embedding",
            name: "Embeddings of S^γ",
            statement: "‖φ‖_{L^∞_t H^γ} + ‖φ‖_{L^q_t L^r_x} ≲ ‖φ‖_{S^γ}",
            hypotheses: "(q, r) Strichartz admissible, 1 − 1/q − 2/r ≤ γ, (1 − 1/q − 2/r, r) ≠ (γ, ∞)",
            params: vec![par("gamma", 0.9, "ℝ"), par("q", 4.0, "[2, ∞]"), par("r", f64::INFINITY, "[2, ∞]")],
            min_n: 32,
            default_n: 64,
            check: |p| {
                finite(p, &["gamma"])?;
                let (g, q, r) = (p["gamma"], p["q"], p["r"]);
                strichartz(q, r)?;
                let s = 1.0 - 1.0 / q - 2.0 / r;
                require(s <= g + 1e-12, "need 1 - 1/q - 2/r <= gamma")?;
                require(!(r.is_infinite() && (s - g).abs() <= 1e-12), "excluded endpoint r = inf with 1 - 1/q = gamma")
            },
            eval: s_gamma_embedding,
        },
        EstimateInfo {
            id: "free_wave_cos_sin",
            name: "Free waves with H^γ data lie in S^γ",
            statement: "‖cos(t|∇|)f‖_{S^γ} + ‖sin(t|∇|)f‖_{S^γ} ≲ ‖f‖_{H^γ}",
            hypotheses: "γ ∈ ℝ, |I| finite",
            params: vec![par("gamma", 0.9, "ℝ")],
            min_n: 32,
            default_n: 64,
            check: |p| finite(p, &["gamma"]),
            eval: free_wave_cos_sin,
        },
        EstimateInfo {
            id: "free_wave_sin_over_grad",
            name: "Free waves with H^{γ−1} velocity lie in S^γ",
            statement: "‖|∇|⁻¹ sin(t|∇|) g‖_{S^γ} ≲ ‖g‖_{H^{γ−1}}",
            hypotheses: "γ ∈ ℝ, 0 ∈ I, |I| ≤ 1",
            params: vec![par("gamma", 0.9, "ℝ")],
            min_n: 32,
            default_n: 64,
            check: |p| finite(p, &["gamma"]),
            eval: free_wave_sin_over_grad,
        },
        EstimateInfo {
            id: "low_frequency_s0k",
            name: "Low-frequency S⁰_k bound",
            statement: "‖φ_k‖_{S⁰_k} ≲ ‖φ_k‖_{L^∞_t L²_x}",
            hypotheses: "k ≤ 0, |I| ≤ 1",
            params: vec![par("k", 0.0, "integer ≤ 0")],
            min_n: 16,
            default_n: 64,
            check: |p| require(integer(p["k"]) && p["k"] <= 0.0, "need an integer k <= 0"),
            eval: low_frequency_s0k,
        },
        EstimateInfo {
            id: "duhamel_energy",
            name: "Duhamel integrals in S^γ",
            statement: "‖∫₀ᵗ |∇|⁻¹sin((t−s)|∇|)F ds‖_{S^γ} ≲ ‖F‖_{L¹_t H^{γ−1}}; \
                        ‖∫₀ᵗ sin((t−s)|∇|)G ds‖_{S^γ} + ‖∫₀ᵗ cos((t−s)|∇|)G ds‖_{S^γ} ≲ ‖G‖_{L¹_t H^γ}",
            hypotheses: "0 ∈ I, |I| ≤ 1",
            params: vec![par("gamma", 0.9, "ℝ")],
            min_n: 32,
            default_n: 64,
            check: |p| finite(p, &["gamma"]),
            eval: duhamel_energy,
        },
        EstimateInfo {
            id: "bilinear_strichartz_hh",
            name: "Bilinear Strichartz for high-high interactions",
            statement: "‖|∇|^σ P_{k₀}(φ¹_{k₁}φ²_{k₂})‖_{L^{q/2}_t L^{r/2}_x} \
                        ≲ 2^{γk₁}‖φ¹_{k₁}‖_{S⁰_{k₁}} 2^{γk₂}‖φ²_{k₂}‖_{S⁰_{k₂}}, γ = 1 − 2/r − 1/q",
            hypotheses: "r < ∞, (q, r) Strichartz admissible, −2 + 4/r + 4/q < σ < 0, (k₀, k₁, k₂) high-high",
            params: vec![par("q", 6.0, "[2, ∞]"), par("r", 8.0, "[2, ∞)"), par("sigma", -0.5, "(−2 + 4/r + 4/q, 0)")],
            min_n: 128,
            default_n: 128,
            check: |p| {
                let (q, r, s) = (p["q"], p["r"], p["sigma"]);
                require(r.is_finite(), "need r < inf")?;
                strichartz(q, r)?;
                require(s < 0.0 && s > -2.0 + 4.0 / r + 4.0 / q, "need -2 + 4/r + 4/q < sigma < 0")
            },
            eval: bilinear_strichartz_hh,
        },
        EstimateInfo {
            id: "bilinear_hh_sum",
            name: "Summed high-high bilinear estimate",
            statement: "‖Σ_{HH} ⟨∇⟩^σ P_{k₀}(φ¹_{k₁}φ²_{k₂})‖_{L²_{t,x}} ≲ ‖φ¹‖_{L⁴_t Ḣ^{3/4}} ‖φ²‖_{S^σ}",
            hypotheses: "σ > −1/2",
            params: vec![par("sigma", 0.9, "(−1/2, ∞)")],
            min_n: 128,
            default_n: 128,
            check: |p| {
                finite(p, &["sigma"])?;
                require(p["sigma"] > -0.5, "need sigma > -1/2")
            },
            eval: bilinear_hh_sum,
        },
        EstimateInfo {
            id: "potential_energy_bilinear",
            name: "Bilinear bound for |∇|⁻¹(φ¹φ²) in L^∞_t Ḣ^β",
            statement: "‖|∇|⁻¹(φ¹φ²)‖_{L^∞_t Ḣ^β} ≲ ‖φ¹‖_{S^γ} ‖φ²‖_{S^{γ−1}}",
            hypotheses: "3/4 < γ < 1 and 0 < β ≤ 2(γ − 1/2), or γ = 1 and 0 < β < 1; |I| ≤ 1",
            params: vec![par("gamma", 0.9, "(3/4, 1]"), par("beta", 0.5, "(0, 2γ − 1]")],
            min_n: 32,
            default_n: 64,
            check: |p| {
                finite(p, &["gamma", "beta"])?;
                let (g, b) = (p["gamma"], p["beta"]);
                if g == 1.0 {
                    require(b > 0.0 && b < 1.0, "gamma = 1 needs 0 < beta < 1")
                } else {
                    require(g > 0.75 && g < 1.0, "need 3/4 < gamma < 1 (or gamma = 1)")?;
                    require(b > 0.0 && b <= 2.0 * (g - 0.5) + 1e-12, "need 0 < beta <= 2(gamma - 1/2)")
                }
            },
            eval: potential_energy_bilinear,
        },
        EstimateInfo {
            id: "potential_strichartz_bilinear",
            name: "Bilinear bounds for |∇|⁻¹(φ¹φ²) in L⁴_t Ḣ^{3/4} and L²_t L^∞_x",
            statement: "‖|∇|⁻¹(φ¹φ²)‖_{L⁴_t Ḣ^{3/4}} + ‖|∇|⁻¹(φ¹φ²)‖_{L²_t L^∞_x} ≲ ‖φ¹‖_{S^γ} ‖φ²‖_{S^{γ−1}}",
            hypotheses: "γ > 3/4, |I| ≤ 1",
            params: vec![par("gamma", 0.9, "(3/4, ∞)")],
            min_n: 32,
            default_n: 64,
            check: |p| {
                finite(p, &["gamma"])?;
                require(p["gamma"] > 0.75, "need gamma > 3/4")
            },
            eval: potential_strichartz_bilinear,
        },
        EstimateInfo {
            id: "wente_null_form",
            name: "Wente-type null-form estimate",
            statement: "‖(−Δ)⁻¹(∂₁(φ¹∂₂φ²) − ∂₂(φ¹∂₁φ²))‖_{L⁴_t Ḣ^β} ≲ ‖φ¹‖_{S^γ} ‖φ²‖_{S^γ}",
            hypotheses: "3/4 < γ < 7/4, 3/4 ≤ β ≤ 2(γ − 1/2) + 1/4, |I| ≤ 1",
            params: vec![par("gamma", 0.9, "(3/4, 7/4)"), par("beta", 1.05, "[3/4, 2γ − 3/4]")],
            min_n: 32,
            default_n: 64,
            check: |p| {
                finite(p, &["gamma", "beta"])?;
                let (g, b) = (p["gamma"], p["beta"]);
                require(g > 0.75 && g < 1.75, "need 3/4 < gamma < 7/4")?;
                require(b >= 0.75 && b <= 2.0 * (g - 0.5) + 0.25 + 1e-12, "need 3/4 <= beta <= 2(gamma - 1/2) + 1/4")
            },
            eval: wente_null_form,
        },
        EstimateInfo {
            id: "potential_trilinear",
            name: "Trilinear bound for |∇|⁻¹(Bφ¹φ²)",
            statement: "‖|∇|⁻¹(Bφ¹φ²)‖_{L^∞_t Ḣ^{1/2}} + ‖·‖_{L^∞_t Ḣ^{3/4}} + ‖·‖_{L^∞_t (Ḣ¹∩L^∞)} \
                        ≲ ‖B‖_{L^∞_t Ḣ^{1/2}} ‖φ¹‖_{S^γ} ‖φ²‖_{S^γ}",
            hypotheses: "γ > 3/4",
            params: vec![par("gamma", 0.9, "(3/4, ∞)")],
            min_n: 32,
            default_n: 64,
            check: |p| {
                finite(p, &["gamma"])?;
                require(p["gamma"] > 0.75, "need gamma > 3/4")
            },
            eval: potential_trilinear,
        },
        EstimateInfo {
            id: "field_bilinear",
            name: "Products with a potential in L²_t H^{γ−1} and L²_t H^γ",
            statement: "‖Bφ‖_{L²_t H^{γ−1}} ≲ (‖B‖_{L²_t L^∞} + ‖B‖_{L⁴_t Ḣ^{3/4}}) ‖φ‖_{S^{γ−1}}; \
                        ‖B₀φ‖_{L²_t H^γ} ≲ (‖B₀‖_{L²_t L^∞} + ‖B₀‖_{L⁴_t (Ḣ^{3/4}∩Ḣ^γ)}) ‖φ‖_{S^γ}",
            hypotheses: "3/4 < γ < 7/4, |I| ≤ 1",
            params: vec![par("gamma", 0.9, "(3/4, 7/4)")],
            min_n: 32,
            default_n: 64,
            check: |p| {
                finite(p, &["gamma"])?;
                require(p["gamma"] > 0.75 && p["gamma"] < 1.75, "need 3/4 < gamma < 7/4")
            },
            eval: field_bilinear,
        },
        EstimateInfo {
            id: "field_quintic",
            name: "Products with two potentials",
            statement: "‖B¹B²φ‖_{L^∞_t H^{γ−1}} ≲ ‖B¹‖_{L^∞_t Ḣ^{1/2}} ‖B²‖_{L^∞_t Ḣ^{1/2}} ‖φ‖_{S^γ} (γ < 1); \
                        ‖B¹B²φ‖_{L^∞_t L²} ≲ ‖B¹‖_{L^∞_t Ḣ^{1−β/2}} ‖B²‖_{L^∞_t Ḣ^{1−β/2}} ‖φ‖_{L^∞_t Ḣ^β} (γ = 1)",
            hypotheses: "3/4 < γ < 1, or γ = 1 with 0 < β < 1",
            params: vec![par("gamma", 0.9, "(3/4, 1]"), par("beta", 0.5, "(0, 1), used when γ = 1")],
            min_n: 32,
            default_n: 64,
            check: |p| {
                finite(p, &["gamma", "beta"])?;
                let (g, b) = (p["gamma"], p["beta"]);
                if g == 1.0 {
                    require(b > 0.0 && b < 1.0, "gamma = 1 needs 0 < beta < 1")
                } else {
                    require(g > 0.75 && g < 1.0, "need 3/4 < gamma < 1 (or gamma = 1)")
                }
            },
            eval: field_quintic,
        },
        EstimateInfo {
            id: "power_nonlinearity",
            name: "Products of N fields in L¹_t H^{γ−1}",
            statement: "‖Π_{j=1}^N φʲ‖_{L¹_t H^{γ−1}} ≲ |I|^α Π_j ‖φʲ‖_{S^γ}",
            hypotheses: "3/4 < γ ≤ 1; N integer with 1 ≤ N < 1 + 2/(1 − γ) if γ < 1, N ≥ 1 if γ = 1",
            params: vec![par("gamma", 0.9, "(3/4, 1]"), par("N", 3.0, "integer, 1 ≤ N < 1 + 2/(1 − γ)")],
            min_n: 32,
            default_n: 64,
            check: |p| {
                finite(p, &["gamma", "N"])?;
                let (g, n) = (p["gamma"], p["N"]);
                require(g > 0.75 && g <= 1.0, "need 3/4 < gamma <= 1")?;
                require(integer(n) && n >= 1.0, "N must be an integer >= 1")?;
                require(g == 1.0 || n < 1.0 + 2.0 / (1.0 - g) - 1e-9, "need N < 1 + 2/(1 - gamma)")
            },
            eval: power_nonlinearity,
        },
    ]
}

pub fn find(id: &str) -> Result<EstimateInfo, EstimateError> {
    list_estimates().into_iter().find(|e| e.id == id).ok_or_else(|| EstimateError::NotFound(id.to_string()))
}

fn bernstein(c: &Ctx, p: &Params) -> Parts {
    let q = p["p"];
    let (f, area) = c.m.disk_field();
    Ok(vec![(lp(&f, q), area.powf(0.5 - 1.0 / q) * f.l2_norm())])
}

fn sobolev_product(c: &Ctx, p: &Params) -> Parts {
    let f1 = c.m.field(Role::F1);
    let f2 = c.m.field(Role::F2);
    let prod = product(&[&f1, &f2]);
    Ok(vec![(hom(&prod, -p["beta0"]), hom(&f1, p["beta1"]) * hom(&f2, p["beta2"]))])
}

fn lp_basic(c: &Ctx, p: &Params) -> Parts {
    let q = p["p"];
    let f = c.m.field(Role::F1);
    let norm = lp(&f, q);
    let mut parts = Vec::new();
    let mut squares: Option<ScalarField> = None;
    for k in range(c).iter() {
        let fk = lp_project(&f, k)?;
        let nk = lp(&fk, q);
        parts.push((nk, norm));
        parts.push((lp(&lp_project_leq(&f, k), q), norm));
        if nk > 0.0 {
            let scale = 2f64.powi(k as i32);
            let grad = lp(&multiply(&fk, Symbol::abs_grad(1.0)), q);
            let brk = lp(&multiply(&fk, Symbol::Bracket(1.0)), q);
            let bscale = 2f64.powi(k.max(0) as i32);
            parts.extend([(grad, scale * nk), (scale * nk, grad), (brk, bscale * nk), (bscale * nk, brk)]);
        }
        let fine = fk.resample(c.grid().with_n(2 * c.grid().n)?).norm_sqr();
        squares = Some(match squares {
            None => fine,
            Some(s) => s.add(&fine),
        });
    }
    if q > 1.0 && q.is_finite() {
        if let Some(s) = squares {
            let sq = s.map(|z| Complex64::new(z.re.max(0.0).sqrt(), 0.0)).lp_norm(q);
            parts.extend([(sq, norm), (norm, sq)]);
        }
    }
    Ok(parts)
}

fn simple_convolution(c: &Ctx, p: &Params) -> Parts {
    let a = p["a"] as i64;
    let q = p["p"];
    let f = c.m.field(Role::F1);
    let r = range(c);
    let b: Vec<f64> = r.iter().map(|k| lp_project(&f, k).map(|x| x.l2_norm())).collect::<Result<_, _>>()?;
    let len = b.len() as i64;
    let sums: Vec<f64> = (-a..len + a)
        .map(|k| (k - a..=k + a).filter(|j| (0..len).contains(j)).map(|j| b[j as usize]).sum())
        .collect();
    Ok(vec![(seq_norm(&sums, q), seq_norm(&b, q))])
}

fn kt_strichartz(c: &Ctx, p: &Params) -> Parts {
    let (q, r) = (p["q"], p["r"]);
    let g = c.grid();
    let k = range(c).hi;
    let ell = k - p["k_minus_ell"] as i64;
    let fk = lp_project(&c.m.field(Role::F1), k)?;
    let vel = multiply(&fk, Symbol::abs_grad(1.0)).scale_complex(Complex64::new(0.0, p["sign"]));
    let series: Vec<ScalarField> = times().map(|t| half_wave(&fk, &vel, t).expect("same grid").0).collect();
    let cover = cube_cover(&g, ell, k)?;
    let lhs = lt(&square_function_norms(&series, &cover, r), q);
    let (iq, ir) = (1.0 / q, 1.0 / r);
    let rhs = 2f64.powf((1.0 - 2.0 * iq - 2.0 * ir) * (ell - k) as f64)
        * 2f64.powf((1.0 - iq - 2.0 * ir) * k as f64)
        * fk.l2_norm();
    Ok(vec![(lhs, rhs)])
}

fn s0k_controls_strichartz(c: &Ctx, p: &Params) -> Parts {
    let (q, r) = (p["q"], p["r"]);
    let (iq, ir) = (1.0 / q, 1.0 / r);
    let g = c.grid();
    let k = range(c).hi;
    let bands: Vec<ScalarField> =
        samples(c, Traj::Cos1).iter().map(|f| lp_project(f, k)).collect::<Result<_, _>>()?;
    let mut lhs: f64 = 0.0;
    for ell in lattice_scale(&g).min(k)..=k {
        let cover = cube_cover(&g, ell, k)?;
        let v = lt(&square_function_norms(&bands, &cover, r), q);
        let w = 2f64.powf(-(1.0 - 2.0 * iq - 2.0 * ir) * (ell - k) as f64) * 2f64.powf(-(1.0 - iq - 2.0 * ir) * k as f64);
        lhs = lhs.max(w * v);
    }
    Ok(vec![(lhs, c.s0k(Traj::Cos1, k)?)])
}

fn s_gamma_embedding(c: &Ctx, p: &Params) -> Parts {
    let (g, q, r) = (p["gamma"], p["q"], p["r"]);
    let series = samples(c, Traj::Cos1);
    let s = c.s(Traj::Cos1, g)?;
    let energy = max(&series.iter().map(|f| inh(f, g)).collect::<Vec<_>>());
    let strichartz = lt(&series.iter().map(|f| lp(f, r)).collect::<Vec<_>>(), q);
    Ok(vec![(energy, s), (strichartz, s)])
}

fn free_wave_cos_sin(c: &Ctx, p: &Params) -> Parts {
    let g = p["gamma"];
    let lhs = c.s(Traj::Cos1, g)? + c.s(Traj::Sin1, g)?;
    Ok(vec![(lhs, inh(&c.m.field(Role::F1), g))])
}

fn free_wave_sin_over_grad(c: &Ctx, p: &Params) -> Parts {
    let g = p["gamma"];
    Ok(vec![(c.s(Traj::Sin2, g)?, inh(&c.m.g2(), g - 1.0))])
}

fn low_frequency_s0k(c: &Ctx, p: &Params) -> Parts {
    let k = p["k"] as i64;
    let r = c.report(Traj::Cos1)?;
    let b = r
        .bands
        .iter()
        .find(|b| b.k == k)
        .ok_or_else(|| EstimateError::BadCase(format!("band {k} is below the lattice at n = {}", c.grid().n)))?;
    Ok(vec![(b.value, b.linf_l2)])
}

fn duhamel_energy(c: &Ctx, p: &Params) -> Parts {
    let g = p["gamma"];
    // |I| = 1 and |e^{iωs}| = 1, so the L¹_t norms are the static norms.
    let f = inh(&c.m.forcing_f(), g - 1.0);
    let h = inh(&c.m.forcing_g(), g);
    Ok(vec![
        (c.s(Traj::DuhamelF, g)?, f),
        (c.s(Traj::DuhamelGSin, g)? + c.s(Traj::DuhamelGCos, g)?, h),
    ])
}

fn bilinear_strichartz_hh(c: &Ctx, p: &Params) -> Parts {
    let (q, r, sigma) = (p["q"], p["r"], p["sigma"]);
    let k1 = range(c).hi;
    let k0 = k1 - 5;
    let gamma = 1.0 - 2.0 / r - 1.0 / q;
    let mut vals = Vec::new();
    for f in samples(c, Traj::Cos1) {
        let a = lp_project(&f, k1)?.to_physical();
        // φ² = conj φ¹; the low output modes are exact on the native grid.
        let out = multiply(&lp_project(&a.mul(&a.conj()), k0)?, sym_abs(sigma)).to_physical();
        vals.push(out.lp_norm(r / 2.0));
    }
    let s = 2f64.powf(gamma * k1 as f64) * c.s0k(Traj::Cos1, k1)?;
    Ok(vec![(lt(&vals, q / 2.0), s * s)])
}

fn bilinear_hh_sum(c: &Ctx, p: &Params) -> Parts {
    let sigma = p["sigma"];
    let r = range(c);
    let mut vals = Vec::new();
    let mut h34 = Vec::new();
    for f in samples(c, Traj::Cos1) {
        h34.push(hom(&f, 0.75));
        let bands: Vec<(i64, ScalarField)> =
            r.iter().map(|k| lp_project(&f, k).map(|b| (k, b.to_physical()))).collect::<Result<_, _>>()?;
        let mut total: Option<ScalarField> = None;
        for k0 in r.lo..=r.hi - 5 {
            let mut inner: Option<ScalarField> = None;
            for (k1, b1) in &bands {
                for (k2, b2) in &bands {
                    if classify_triple(k0, *k1, *k2).2 == 0.0 {
                        continue;
                    }
                    let term = b1.mul(&b2.conj());
                    inner = Some(match inner {
                        None => term,
                        Some(x) => x.add(&term),
                    });
                }
            }
            if let Some(x) = inner {
                let piece = lp_project(&x, k0)?;
                total = Some(match total {
                    None => piece,
                    Some(t) => t.add(&piece),
                });
            }
        }
        vals.push(total.map_or(0.0, |t| multiply(&t, Symbol::Bracket(sigma)).l2_norm()));
    }
    Ok(vec![(lt(&vals, 2.0), lt(&h34, 4.0) * c.s(Traj::Cos1, sigma)?)])
}

fn pairs(c: &Ctx) -> (Vec<ScalarField>, Vec<ScalarField>) {
    (samples(c, Traj::Cos1), samples(c, Traj::Sin2))
}

fn potential_energy_bilinear(c: &Ctx, p: &Params) -> Parts {
    let (g, b) = (p["gamma"], p["beta"]);
    let (u, v) = pairs(c);
    let vals: Vec<f64> = u.iter().zip(&v).map(|(x, y)| hom(&product(&[x, y]), b - 1.0)).collect();
    Ok(vec![(max(&vals), c.s(Traj::Cos1, g)? * c.s(Traj::Sin2, g - 1.0)?)])
}

fn potential_strichartz_bilinear(c: &Ctx, p: &Params) -> Parts {
    let g = p["gamma"];
    let (u, v) = pairs(c);
    let mut h = Vec::new();
    let mut inf = Vec::new();
    for (x, y) in u.iter().zip(&v) {
        let prod = product(&[x, y]);
        h.push(hom(&prod, -0.25));
        inf.push(abs_grad(&prod, -1.0).linf_norm());
    }
    let rhs = c.s(Traj::Cos1, g)? * c.s(Traj::Sin2, g - 1.0)?;
    Ok(vec![(lt(&h, 4.0), rhs), (lt(&inf, 2.0), rhs)])
}

fn wente_null_form(c: &Ctx, p: &Params) -> Parts {
    let (g, b) = (p["gamma"], p["beta"]);
    let (u, v) = pairs(c);
    let mut vals = Vec::new();
    for (x, y) in u.iter().zip(&v) {
        let d1 = multiply(y, Symbol::Deriv(Axis::X1));
        let d2 = multiply(y, Symbol::Deriv(Axis::X2));
        let q = multiply(&product(&[x, &d2]), Symbol::Deriv(Axis::X1))
            .sub(&multiply(&product(&[x, &d1]), Symbol::Deriv(Axis::X2)));
        vals.push(hom(&q, b - 2.0));
    }
    Ok(vec![(lt(&vals, 4.0), c.s(Traj::Cos1, g)? * c.s(Traj::Sin2, g)?)])
}

fn potential_trilinear(c: &Ctx, p: &Params) -> Parts {
    let g = p["gamma"];
    let (u, v) = pairs(c);
    let bs = samples(c, Traj::Real3);
    let (mut a, mut b, mut d, mut bn) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for ((x, y), w) in u.iter().zip(&v).zip(&bs) {
        let prod = product(&[w, x, y]);
        a.push(hom(&prod, -0.5));
        b.push(hom(&prod, -0.25));
        d.push(hom(&prod, 0.0) + abs_grad(&prod, -1.0).linf_norm());
        bn.push(hom(w, 0.5));
    }
    let lhs = max(&a) + max(&b) + max(&d);
    Ok(vec![(lhs, max(&bn) * c.s(Traj::Cos1, g)? * c.s(Traj::Sin2, g)?)])
}

fn field_bilinear(c: &Ctx, p: &Params) -> Parts {
    let g = p["gamma"];
    let (u, v) = pairs(c);
    let (b1, b0) = (samples(c, Traj::Real3), samples(c, Traj::Real4));
    let (mut l1, mut l2) = (Vec::new(), Vec::new());
    let (mut b1_inf, mut b1_h, mut b0_inf, mut b0_h, mut b0_g) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..u.len() {
        l1.push(inh(&product(&[&b1[i], &v[i]]), g - 1.0));
        l2.push(inh(&product(&[&b0[i], &u[i]]), g));
        b1_inf.push(sup(&b1[i]));
        b1_h.push(hom(&b1[i], 0.75));
        b0_inf.push(sup(&b0[i]));
        b0_h.push(hom(&b0[i], 0.75));
        b0_g.push(hom(&b0[i], g));
    }
    let r1 = (lt(&b1_inf, 2.0) + lt(&b1_h, 4.0)) * c.s(Traj::Sin2, g - 1.0)?;
    let r2 = (lt(&b0_inf, 2.0) + lt(&b0_h, 4.0) + lt(&b0_g, 4.0)) * c.s(Traj::Cos1, g)?;
    Ok(vec![(lt(&l1, 2.0), r1), (lt(&l2, 2.0), r2)])
}

fn field_quintic(c: &Ctx, p: &Params) -> Parts {
    let (g, beta) = (p["gamma"], p["beta"]);
    let u = samples(c, Traj::Cos1);
    let (b1, b2) = (samples(c, Traj::Real3), samples(c, Traj::Real4));
    let mut lhs = Vec::new();
    let (mut n1, mut n2, mut nphi) = (Vec::new(), Vec::new(), Vec::new());
    let endpoint = g == 1.0;
    let bs = if endpoint { 1.0 - 0.5 * beta } else { 0.5 };
    for i in 0..u.len() {
        let prod = product(&[&b1[i], &b2[i], &u[i]]);
        lhs.push(if endpoint { prod.l2_norm() } else { inh(&prod, g - 1.0) });
        n1.push(hom(&b1[i], bs));
        n2.push(hom(&b2[i], bs));
        nphi.push(hom(&u[i], beta));
    }
    let phi = if endpoint { max(&nphi) } else { c.s(Traj::Cos1, g)? };
    Ok(vec![(max(&lhs), max(&n1) * max(&n2) * phi)])
}

fn power_nonlinearity(c: &Ctx, p: &Params) -> Parts {
    let g = p["gamma"];
    let n = p["N"] as usize;
    let (u, v) = pairs(c);
    let vals: Vec<f64> = (0..u.len())
        .map(|i| {
            let factors: Vec<&ScalarField> = (0..n).map(|j| if j % 2 == 0 { &u[i] } else { &v[i] }).collect();
            inh(&product(&factors), g - 1.0)
        })
        .collect();
    let rhs = c.s(Traj::Cos1, g)?.powi(n.div_ceil(2) as i32) * c.s(Traj::Sin2, g)?.powi((n / 2) as i32);
    Ok(vec![(lt(&vals, 1.0), rhs)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::{EstimateCase, Lab};

    /// The Wente bound with `‖φ²‖_{S^{γ−1}}` on the right is off by one
    /// derivative: its ratio grows relative to the scaling-consistent form.
    fn wente_literal(c: &Ctx, p: &Params) -> Parts {
        let mut parts = wente_null_form(c, p)?;
        let g = p["gamma"];
        parts[0].1 = c.s(Traj::Cos1, g)? * c.s(Traj::Sin2, g - 1.0)?;
        Ok(parts)
    }

    #[test]
    fn wente_with_shifted_regularity_drifts() {
        let info = EstimateInfo { eval: wente_literal, ..find("wente_null_form").unwrap() };
        let case = EstimateCase { n: 32, ..EstimateCase::default_for("wente_null_form").unwrap() };
        let lab = Lab::new();
        let literal = lab.run_entry(&info, &case).unwrap();
        let fixed = lab.run(&case).unwrap();
        assert!(fixed.drift_factor < 1.0);
        assert!(literal.drift_factor > 1.0);
        assert!(literal.drift_factor > 1.5 * fixed.drift_factor);
    }
}
