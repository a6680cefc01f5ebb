//! Family-wide experiments over the twists 8d: second moments, the diagonal
//! main term, mollifier splits, value-distribution statistics, and the
//! auxiliary mean-value checks for character sums.
//!
//! Per-twist work runs on the current rayon pool; results are collected in
//! discriminant order and reduced with [`pairwise_sum`], so every report is
//! bit-identical whatever the number of threads.

use crate::arith::{self, primes_up_to, squarefree_flags};
use crate::bump::{Bump, TestFunction};
use crate::error::{Error, Result};
use crate::eulerprod::MomentConstant;
use crate::kernel::{certified_length, kernel_w_half, TwistEvaluator};
use crate::modform::EigenformCoefficients;
use crate::quadchar::{enumerate_twists, is_fundamental_discriminant, kronecker_symbol, TwistCharacter, TwistDiscriminant};
use crate::quadrature::integrate;
use crate::summation::pairwise_sum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

/// Truncation accuracy for L-values in the moment experiments.
pub const DEFAULT_EPS: f64 = 1e-9;
/// L-values below this in absolute value are left out of log statistics.
pub const ZERO_THRESHOLD: f64 = 1e-12;
/// Largest X accepted by [`prop31_check`].
pub const PROP31_MAX_X: f64 = 1e5;

/// Runs `f` over the twists in parallel, keeping discriminant order. The
/// first failing twist (in that order) is reported.
fn map_twists<T, F>(twists: &[TwistDiscriminant], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(TwistDiscriminant) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = twists
        .par_iter()
        .map(|&d| f(d).map_err(|e| Error::AtTwist { discriminant: d.value(), source: Box::new(e) }))
        .collect();
    results.into_iter().collect()
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 𝓛, 𝓜, 𝓥

/// The piecewise function 𝓛(z, x): log log x for |z| ≤ 1/log x, −log|z| up
/// to |z| = 1, and 0 beyond.
///
/// # Panics
/// If `x < 10`.
pub fn script_l(z: Complex64, x: f64) -> f64 {
    assert!(x >= 10.0, "script_l needs x >= 10, got {x}");
    let r = z.norm();
    let lx = x.ln();
    if r <= 1.0 / lx {
        lx.ln()
    } else if r <= 1.0 {
        -r.ln()
    } else {
        0.0
    }
}

/// 𝓜(z₁, z₂, x) = −½(𝓛(z₁, x) + 𝓛(z₂, x)).
pub fn script_m(z1: Complex64, z2: Complex64, x: f64) -> f64 {
    -0.5 * (script_l(z1, x) + script_l(z2, x))
}

/// 𝓥(z₁, z₂, x), the predicted variance of log|L(½+z₁)L(½+z₂)|.
pub fn script_v(z1: Complex64, z2: Complex64, x: f64) -> f64 {
    let l = |z: Complex64| script_l(z, x);
    let re = |z: Complex64| Complex64::new(2.0 * z.re, 0.0);
    0.5 * (l(2.0 * z1) + l(2.0 * z2) + l(re(z1)) + l(re(z2)) + 2.0 * l(z1 + z2) + 2.0 * l(z1 + z2.conj()))
}

/// Two shifts with 0 ≤ Re zᵢ ≤ 1/log X and |zᵢ| ≤ X.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftPair {
    z1: Complex64,
    z2: Complex64,
    #[serde(rename = "X")]
    x: f64,
}

impl ShiftPair {
    pub fn new(z1: Complex64, z2: Complex64, x: f64) -> Result<Self> {
        if !(x >= 10.0) || !x.is_finite() {
            return Err(Error::invalid(format!("X must be at least 10, got {x}")));
        }
        let re_max = 1.0 / x.ln();
        for z in [z1, z2] {
            if !(z.re >= 0.0 && z.re <= re_max) || !(z.norm() <= x) {
                return Err(Error::invalid(format!("shift {z} outside 0 <= Re z <= 1/log X = {re_max}, |z| <= X")));
            }
        }
        Ok(Self { z1, z2, x })
    }

    pub fn central(x: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), x)
    }

    pub fn z1(&self) -> Complex64 {
        self.z1
    }

    pub fn z2(&self) -> Complex64 {
        self.z2
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn script_m(&self) -> f64 {
        script_m(self.z1, self.z2, self.x)
    }

    pub fn script_v(&self) -> f64 {
        script_v(self.z1, self.z2, self.x)
    }

    fn is_central(&self) -> bool {
        self.z1 == Complex64::new(0.0, 0.0) && self.z2 == self.z1
    }
}

/// The root λ₀ ≈ 0.4912 of e^{−λ} = λ + λ²/2.
pub fn lambda0() -> f64 {
    static L: OnceLock<f64> = OnceLock::new();
    *L.get_or_init(|| {
        let f = |l: f64| (-l).exp() - l - 0.5 * l * l;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > 1e-15 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Parameters of the prime-sum majorant for log|L·L|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrhBoundParams {
    pub lambda0: f64,
    /// Length x of the prime sum.
    pub x_poly: f64,
}

impl GrhBoundParams {
    pub fn new(x_poly: f64) -> Result<Self> {
        if !(x_poly >= 10.0) || !x_poly.is_finite() {
            return Err(Error::invalid(format!("x_poly must be at least 10, got {x_poly}")));
        }
        Ok(Self { lambda0: lambda0(), x_poly })
    }

    /// The default length x = (log X)².
    pub fn for_family(x: f64) -> Result<Self> {
        Self::new(x.ln().powi(2))
    }
}

// ---------------------------------------------------------------------------
// Second moments

/// Σ L(½, f⊗χ_{8d})² over a family, against the prediction c·X·log X
/// (times ∫F for smoothed sums).
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    #[serde(rename = "X")]
    pub x: f64,
    pub n_discriminants: usize,
    #[serde(rename = "sum_L2")]
    pub sum_l2: f64,
    pub predicted: f64,
    pub ratio: f64,
    /// Largest number of Dirichlet terms used for any twist.
    pub max_truncation: usize,
    /// Not serialized, so reports of identical runs compare byte for byte.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Central values L(½, f⊗χ_{8d}) for every twist with 8d ≤ X.
pub fn central_values(x: f64, coeffs: &EigenformCoefficients, eps: f64) -> Result<Vec<crate::kernel::AfeValue>> {
    let twists = enumerate_twists(x)?;
    let ev = TwistEvaluator::new(coeffs);
    map_twists(&twists, |d| ev.central(d, eps))
}

/// Σ*_{8d ≤ X} L(½, f⊗χ_{8d})².
pub fn second_moment_sharp(
    x: f64,
    coeffs: &EigenformCoefficients,
    constant: &MomentConstant,
    eps: f64,
) -> Result<MomentReport> {
    let start = Instant::now();
    let values = central_values(x, coeffs, eps)?;
    let squares: Vec<f64> = values.iter().map(|v| v.value.re * v.value.re).collect();
    let sum_l2 = pairwise_sum(&squares);
    let predicted = constant.c * x * x.ln();
    Ok(MomentReport {
        x,
        n_discriminants: values.len(),
        sum_l2,
        predicted,
        ratio: sum_l2 / predicted,
        max_truncation: values.iter().map(|v| v.truncation).max().unwrap_or(0),
        wall_time: start.elapsed(),
    })
}

/// Σ* L(½, f⊗χ_{8d})² F(8d/X), predicted as (∫F)·c·X·log X.
pub fn second_moment_smoothed(
    x: f64,
    f: TestFunction,
    coeffs: &EigenformCoefficients,
    constant: &MomentConstant,
    eps: f64,
) -> Result<MomentReport> {
    let start = Instant::now();
    check_positive("X", x)?;
    let twists = enumerate_twists(x * f.support_end())?;
    let ev = TwistEvaluator::new(coeffs);
    let terms = map_twists(&twists, |d| {
        let w = f.eval(d.value() as f64 / x);
        if w == 0.0 {
            return Ok((0.0, 0));
        }
        let v = ev.central(d, eps)?;
        Ok((w * v.value.re * v.value.re, v.truncation))
    })?;
    let weighted: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let sum_l2 = pairwise_sum(&weighted);
    let predicted = f.integral() * constant.c * x * x.ln();
    Ok(MomentReport {
        x,
        n_discriminants: twists.len(),
        sum_l2,
        predicted,
        ratio: sum_l2 / predicted,
        max_truncation: terms.iter().map(|t| t.1).max().unwrap_or(0),
        wall_time: start.elapsed(),
    })
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

// ---------------------------------------------------------------------------
// Diagonal main term

/// Second weight in h(x, y, z) = F(8x/X)·W(y/U₁)·(second weight).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prop31Shape {
    /// W(z/U₂)
    Product,
    /// W(z/8x), pairing 𝓐_{U₁} with the central value itself
    Mollifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop31Params {
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "U1")]
    pub u1: f64,
    #[serde(rename = "U2")]
    pub u2: f64,
    pub f: TestFunction,
    pub shape: Prop31Shape,
    pub eps: f64,
}

impl Prop31Params {
    pub fn new(x: f64, u1: f64, u2: f64) -> Self {
        Self { x, u1, u2, f: TestFunction::new(Bump::BumpA), shape: Prop31Shape::Product, eps: DEFAULT_EPS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop31Check {
    /// Brute-force S(h) over all twists.
    pub lhs: f64,
    /// Diagonal main term over n₁n₂ = □.
    pub rhs: f64,
    pub rel_err: f64,
    pub n_discriminants: usize,
    pub n1_max: usize,
    pub n2_max: usize,
}

/// Brute force S(h) against the diagonal main term with h = F(8x/X) W(y/U₁) W(z/U₂).
pub fn prop31_check(x: f64, u1: f64, u2: f64, coeffs: &EigenformCoefficients) -> Result<Prop31Check> {
    prop31_check_with(&Prop31Params::new(x, u1, u2), coeffs)
}

/// S(h) = Σ*_{(d,2)=1} Σ_{n₁,n₂} λ(n₁)λ(n₂)(n₁n₂)^{−1/2} χ_{8d}(n₁n₂) h(d, n₁, n₂)
/// computed directly, against
/// (4X/π²) Σ_{n₁n₂=□, odd} λ(n₁)λ(n₂)(n₁n₂)^{−1/2} ∏_{p|n₁n₂} p/(p+1) · h₁(n₁, n₂)
/// with h₁(y, z) = ∫₀^∞ h(xX, y, z) dx.
pub fn prop31_check_with(params: &Prop31Params, coeffs: &EigenformCoefficients) -> Result<Prop31Check> {
    let Prop31Params { x, u1, u2, f, shape, eps } = *params;
    check_positive("X", x)?;
    check_positive("U1", u1)?;
    check_positive("U2", u2)?;
    if x > PROP31_MAX_X {
        return Err(Error::invalid(format!("X={x} exceeds the brute-force limit {PROP31_MAX_X}")));
    }
    if u1 * u2 > x * x {
        return Err(Error::Hypothesis(format!("U1·U2 = {} exceeds X² = {}", u1 * u2, x * x)));
    }
    let weight = coeffs.weight();

    let twists = enumerate_twists(x * f.support_end())?;
    let ev = TwistEvaluator::new(coeffs);
    let terms = map_twists(&twists, |d| {
        let w = f.eval(d.value() as f64 / x);
        if w == 0.0 {
            return Ok(0.0);
        }
        let a1 = ev.mollified(d, u1, eps)?.value.re;
        let a2 = match shape {
            Prop31Shape::Product => ev.mollified(d, u2, eps)?,
            Prop31Shape::Mollifier => ev.central(d, eps)?,
        }
        .value
        .re;
        // each 𝓐 carries a factor 2
        Ok(w * a1 * a2 / 4.0)
    })?;
    let lhs = pairwise_sum(&terms);

    let a = Complex64::new(weight as f64 / 2.0, 0.0);
    let (n1_max, _) = certified_length(a, 0.5, u1, eps)?;
    // W(z/(tX)) ≤ W(z/(bX)) for t below the support end b
    let u2_eff = match shape {
        Prop31Shape::Product => u2,
        Prop31Shape::Mollifier => x * f.support_end(),
    };
    let (n2_max, _) = certified_length(a, 0.5, u2_eff, eps)?;
    let needed = n1_max.max(n2_max);
    if needed > coeffs.n_max() {
        return Err(Error::Truncation { required: needed, available: coeffs.n_max() });
    }

    // g(n) = ∏_{p|n} p/(p+1)
    let mut g = vec![1.0f64; needed + 1];
    for p in primes_up_to(needed) {
        let r = p as f64 / (p as f64 + 1.0);
        for m in (p as usize..=needed).step_by(p as usize) {
            g[m] *= r;
        }
    }

    let f_integral = f.integral();
    let mut second_weight_cache: HashMap<usize, f64> = HashMap::new();
    let mut second_weight = |n2: usize| -> Result<f64> {
        match shape {
            Prop31Shape::Product => Ok(kernel_w_half(n2 as f64 / u2, weight) * f_integral / 8.0),
            Prop31Shape::Mollifier => {
                if let Some(&v) = second_weight_cache.get(&n2) {
                    return Ok(v);
                }
                // (1/8) ∫ F(t) W(n₂/(tX)) dt
                let v = integrate(
                    |t| if t <= 0.0 { 0.0 } else { f.eval(t) * kernel_w_half(n2 as f64 / (t * x), weight) },
                    0.0,
                    f.support_end(),
                    1e-15,
                )? / 8.0;
                second_weight_cache.insert(n2, v);
                Ok(v)
            }
        }
    };

    let sqf = squarefree_flags(n1_max.min(n2_max));
    let mut diag = Vec::new();
    for a in (1..=n1_max.min(n2_max)).step_by(2) {
        if !sqf[a] {
            continue;
        }
        for b in (1usize..).step_by(2) {
            let n1 = a * b * b;
            if n1 > n1_max {
                break;
            }
            let l1 = coeffs.get(n1);
            if l1 == 0.0 {
                continue;
            }
            let w1 = kernel_w_half(n1 as f64 / u1, weight);
            for c in (1usize..).step_by(2) {
                let n2 = a * c * c;
                if n2 > n2_max {
                    break;
                }
                let l2 = coeffs.get(n2);
                if l2 == 0.0 {
                    continue;
                }
                let local = g[n1] * g[n2] / g[arith::gcd(n1 as u64, n2 as u64) as usize];
                diag.push(l1 * l2 / (a * b * c) as f64 * local * w1 * second_weight(n2)?);
            }
        }
    }
    let rhs = 4.0 * x / (PI * PI) * pairwise_sum(&diag);
    Ok(Prop31Check {
        lhs,
        rhs,
        rel_err: (lhs - rhs).abs() / rhs.abs(),
        n_discriminants: twists.len(),
        n1_max,
        n2_max,
    })
}

// ---------------------------------------------------------------------------
// Mollified pieces 𝓐_U and 𝓑_U = L − 𝓐_U

/// Per twist: (F(8d/X), L(½), 𝓐_U(½)), skipping twists where F vanishes.
fn mollifier_terms(
    x: f64,
    u: f64,
    f: TestFunction,
    coeffs: &EigenformCoefficients,
    eps: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    check_positive("X", x)?;
    check_positive("U", u)?;
    if u > x {
        return Err(Error::invalid(format!("U={u} must not exceed X={x}")));
    }
    let twists = enumerate_twists(x * f.support_end())?;
    let ev = TwistEvaluator::new(coeffs);
    map_twists(&twists, |d| {
        let w = f.eval(d.value() as f64 / x);
        if w == 0.0 {
            return Ok((0.0, 0.0, 0.0));
        }
        let l = ev.central(d, eps)?.value.re;
        let a = ev.mollified(d, u, eps)?.value.re;
        Ok((w, l, a))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundReport {
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "U")]
    pub u: f64,
    /// Σ* L·𝓐_U·F
    pub sum_l_a: f64,
    /// Σ* 𝓐_U²·F
    pub sum_a2: f64,
    /// Σ* L²·F
    pub sum_l2: f64,
    /// (Σ L𝓐F)² / (Σ 𝓐²F · Σ L²F), at most 1 by Cauchy–Schwarz.
    pub ratio: f64,
}

/// How much of the smoothed second moment the Cauchy–Schwarz lower bound
/// (Σ L𝓐_U F)²/(Σ 𝓐_U² F) recovers.
pub fn lower_bound_ratio(
    x: f64,
    u: f64,
    f: TestFunction,
    coeffs: &EigenformCoefficients,
    eps: f64,
) -> Result<LowerBoundReport> {
    let terms = mollifier_terms(x, u, f, coeffs, eps)?;
    let sum_l_a = pairwise_sum(&terms.iter().map(|&(w, l, a)| w * l * a).collect::<Vec<_>>());
    let sum_a2 = pairwise_sum(&terms.iter().map(|&(w, _, a)| w * a * a).collect::<Vec<_>>());
    let sum_l2 = pairwise_sum(&terms.iter().map(|&(w, l, _)| w * l * l).collect::<Vec<_>>());
    if sum_a2 == 0.0 || sum_l2 == 0.0 {
        return Err(Error::Degenerate("mollified or central second moment vanishes".into()));
    }
    Ok(LowerBoundReport { x, u, sum_l_a, sum_a2, sum_l2, ratio: sum_l_a * sum_l_a / (sum_a2 * sum_l2) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbSplit {
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "U")]
    pub u: f64,
    /// Σ* 𝓐_U²·F
    #[serde(rename = "sumA2")]
    pub sum_a2: f64,
    /// Σ* 𝓑_U²·F
    #[serde(rename = "sumB2")]
    pub sum_b2: f64,
}

/// Smoothed second moments of 𝓐_U and of 𝓑_U = L − 𝓐_U.
pub fn ab_split_sizes(x: f64, u: f64, f: TestFunction, coeffs: &EigenformCoefficients, eps: f64) -> Result<AbSplit> {
    let terms = mollifier_terms(x, u, f, coeffs, eps)?;
    let sum_a2 = pairwise_sum(&terms.iter().map(|&(w, _, a)| w * a * a).collect::<Vec<_>>());
    let sum_b2 = pairwise_sum(&terms.iter().map(|&(w, l, a)| w * (l - a) * (l - a)).collect::<Vec<_>>());
    Ok(AbSplit { x, u, sum_a2, sum_b2 })
}

// ---------------------------------------------------------------------------
// Value distribution

/// The large-values bound in force at V, with implied constant 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    #[serde(rename = "V")]
    pub v: f64,
    /// 1, 2 or 3; `None` below the first regime.
    pub regime: Option<u8>,
    pub bound: Option<f64>,
}

/// The three-regime bound on N(V) evaluated with implied constant 1.
pub fn prop62_bound(v: f64, x: f64, script_v: f64) -> TailBound {
    let ll = x.ln().ln();
    let lll = ll.ln();
    let (regime, bound) = if v > script_v * lll / 16.0 {
        (Some(3), Some(x * (-v * v.ln() / 1025.0).exp()))
    } else if v > script_v {
        let t = 1.0 - 15.0 * v / (script_v * lll);
        (Some(2), Some(x * (-v * v / (2.0 * script_v) * t * t).exp()))
    } else if v >= 10.0 * ll.sqrt() {
        (Some(1), Some(x * (-v * v / (2.0 * script_v) * (1.0 - 25.0 / lll)).exp()))
    } else {
        (None, None)
    };
    TailBound { v, regime, bound }
}

/// Empirical statistics of log|L(½+z₁, f⊗χ_{8d}) L(½+z₂, f⊗χ_{8d})| over 8d ≤ X.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCounts {
    #[serde(rename = "X")]
    pub x: f64,
    pub shift: ShiftPair,
    /// (V, N(V)) with N(V) = #{d : log|L·L| ≥ V + 𝓜}.
    pub grid: Vec<(f64, u64)>,
    pub mean_emp: f64,
    /// Population variance.
    pub var_emp: f64,
    pub n_total: usize,
    /// Twists left out because an L-value was below [`ZERO_THRESHOLD`].
    pub n_excluded: usize,
    pub script_m: f64,
    pub script_v: f64,
    pub bounds: Vec<TailBound>,
    /// max over the grid of (N(V)/n) / exp(−V²/2𝓥): the implied constant of
    /// the Gaussian-shape bound fitted to the data.
    pub gaussian_constant: f64,
}

/// log|L(½+z₁)L(½+z₂)| for every twist with 8d ≤ X; `None` when a value is
/// numerically zero.
pub fn log_abs_products(
    shift: &ShiftPair,
    coeffs: &EigenformCoefficients,
    eps: f64,
) -> Result<Vec<(TwistDiscriminant, Option<f64>)>> {
    let twists = enumerate_twists(shift.x())?;
    let ev = TwistEvaluator::new(coeffs);
    let central = shift.is_central();
    map_twists(&twists, |d| {
        let (l1, l2) = if central {
            let l = ev.central(d, eps)?.value.norm();
            (l, l)
        } else {
            let l1 = ev.shifted(d, shift.z1(), eps)?.value.norm();
            let l2 = if shift.z2() == shift.z1() { l1 } else { ev.shifted(d, shift.z2(), eps)?.value.norm() };
            (l1, l2)
        };
        if l1 < ZERO_THRESHOLD || l2 < ZERO_THRESHOLD {
            Ok((d, None))
        } else {
            Ok((d, Some(l1.ln() + l2.ln())))
        }
    })
}

pub fn distribution_stats(shift: &ShiftPair, coeffs: &EigenformCoefficients, eps: f64) -> Result<TailCounts> {
    let x = shift.x();
    if x < 1e3 {
        return Err(Error::invalid(format!("distribution statistics need X >= 1000, got {x}")));
    }
    let logs = log_abs_products(shift, coeffs, eps)?;
    let values: Vec<f64> = logs.iter().filter_map(|(_, v)| *v).collect();
    let n = values.len();
    if n == 0 {
        return Err(Error::Degenerate("every L-value in the family vanished".into()));
    }
    let mean = pairwise_sum(&values) / n as f64;
    let var = pairwise_sum(&values.iter().map(|v| (v - mean) * (v - mean)).collect::<Vec<_>>()) / n as f64;
    let m = shift.script_m();
    let sv = shift.script_v();
    let v_max = (2.0 * sv).ceil().max(1.0) as u32;
    let grid: Vec<(f64, u64)> = (1..=v_max)
        .map(|v| {
            let v = v as f64;
            (v, values.iter().filter(|&&l| l >= v + m).count() as u64)
        })
        .collect();
    let bounds = grid.iter().map(|&(v, _)| prop62_bound(v, x, sv)).collect();
    let gaussian_constant = grid
        .iter()
        .map(|&(v, c)| (c as f64 / n as f64) / (-v * v / (2.0 * sv)).exp())
        .fold(0.0, f64::max);
    Ok(TailCounts {
        x,
        shift: *shift,
        grid,
        mean_emp: mean,
        var_emp: var,
        n_total: logs.len(),
        n_excluded: logs.len() - n,
        script_m: m,
        script_v: sv,
        bounds,
        gaussian_constant,
    })
}

// ---------------------------------------------------------------------------
// Dirichlet polynomial moments

/// Whether a violated hypothesis rejects the input or is only recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisPolicy {
    #[default]
    Enforce,
    ReportOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyMomentCheck {
    #[serde(rename = "X")]
    pub x: f64,
    pub y: f64,
    pub k: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub n_discriminants: usize,
    /// Whether y^k ≤ X^{1/2}/log X held.
    pub hypothesis_holds: bool,
}

/// Σ♭_{|d|≤X} |Σ_{2<p≤y} a(p)χ_d(p)p^{−1/2}|^{2k} against
/// X·(2k)!/(k!2^k)·(Σ_{p≤y} |a(p)|²/p)^k.
pub fn dirichlet_poly_moment_check(
    x: f64,
    y: f64,
    k: u32,
    a: &BTreeMap<u64, Complex64>,
    policy: HypothesisPolicy,
) -> Result<PolyMomentCheck> {
    check_positive("X", x)?;
    check_positive("y", y)?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if let Some(&p) = a.keys().find(|&&p| arith::factorize(p) != [(p, 1)]) {
        return Err(Error::invalid(format!("coefficient index {p} is not prime")));
    }
    let hypothesis_holds = y.powi(k as i32) <= x.sqrt() / x.ln();
    if !hypothesis_holds && policy == HypothesisPolicy::Enforce {
        return Err(Error::Hypothesis(format!("y^k = {} exceeds X^(1/2)/log X = {}", y.powi(k as i32), x.sqrt() / x.ln())));
    }
    let terms: Vec<(i64, Complex64)> = a
        .iter()
        .filter(|(&p, _)| p > 2 && p as f64 <= y)
        .map(|(&p, &c)| (p as i64, c / (p as f64).sqrt()))
        .collect();
    let xmax = x.floor() as i64;
    let discs: Vec<i64> = (-xmax..=xmax).filter(|&d| is_fundamental_discriminant(d)).collect();
    let powers: Vec<f64> = discs
        .par_iter()
        .map(|&d| {
            let s: Complex64 = terms.iter().map(|&(p, c)| c * kronecker_symbol(d, p) as f64).sum();
            s.norm_sqr().powi(k as i32)
        })
        .collect();
    let lhs = pairwise_sum(&powers);
    let pairings: f64 = (1..=k).map(|j| (2 * j - 1) as f64).product();
    let mass: f64 = a.iter().filter(|(&p, _)| p as f64 <= y).map(|(&p, c)| c.norm_sqr() / p as f64).sum();
    let rhs = x * pairings * mass.powi(k as i32);
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(PolyMomentCheck { x, y, k, lhs, rhs, ratio, n_discriminants: discs.len(), hypothesis_holds })
}

// ---------------------------------------------------------------------------
// Prime-sum majorant

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorantMargin {
    pub d: u64,
    /// Re Σ_{2<p≤x} λ(p)χ_d(p) p^{−1/2−λ₀/log x}(p^{−z₁}+p^{−z₂}) log(x/p)/log x
    pub prime_sum: f64,
    pub script_m: f64,
    /// 4 log X / log x
    pub length_term: f64,
    pub log_abs_l: f64,
    /// prime_sum + script_m + length_term − log_abs_l
    pub margin: f64,
}

/// The prime-sum majorant for log|L(½+z₁)L(½+z₂)| minus its actual value.
pub fn grh_majorant_margin(
    d: TwistDiscriminant,
    shift: &ShiftPair,
    params: &GrhBoundParams,
    coeffs: &EigenformCoefficients,
    eps: f64,
) -> Result<MajorantMargin> {
    let xp = params.x_poly;
    if xp > shift.x() {
        return Err(Error::invalid(format!("x_poly={xp} exceeds X={}", shift.x())));
    }
    let p_max = xp.floor() as usize;
    if p_max > coeffs.n_max() {
        return Err(Error::Truncation { required: p_max, available: coeffs.n_max() });
    }
    let chi = TwistCharacter::new(d);
    let lx = xp.ln();
    let mut terms = Vec::new();
    for p in primes_up_to(p_max).into_iter().filter(|&p| p > 2) {
        let c = chi.eval(p);
        if c == 0 {
            continue;
        }
        let pf = p as f64;
        let lp = pf.ln();
        let twist = (-shift.z1() * lp).exp() + (-shift.z2() * lp).exp();
        let amp = coeffs.get(p as usize) * c as f64 * pf.powf(-0.5 - params.lambda0 / lx) * (xp / pf).ln() / lx;
        terms.push(amp * twist.re);
    }
    let prime_sum = pairwise_sum(&terms);
    let ev = TwistEvaluator::new(coeffs);
    let log_abs_l = if shift.is_central() {
        2.0 * ev.central(d, eps)?.value.norm().ln()
    } else {
        ev.shifted(d, shift.z1(), eps)?.value.norm().ln() + ev.shifted(d, shift.z2(), eps)?.value.norm().ln()
    };
    let script_m = shift.script_m();
    let length_term = 4.0 * shift.x().ln() / lx;
    Ok(MajorantMargin {
        d: d.value(),
        prime_sum,
        script_m,
        length_term,
        log_abs_l,
        margin: prime_sum + script_m + length_term - log_abs_l,
    })
}

// ---------------------------------------------------------------------------
// Large sieve

/// Σ*_{m≤M odd} |Σ*_{n≤N} a_n (n/m)|² / ((M+N) Σ*|a_n|²), where `a[i]` is
/// a_{i+1} and only squarefree n and m take part.
pub fn large_sieve_ratio(m: usize, n: usize, a: &[Complex64]) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("M and N must be at least 1"));
    }
    if a.len() != n {
        return Err(Error::invalid(format!("expected {n} coefficients, got {}", a.len())));
    }
    let sqf = squarefree_flags(m.max(n));
    let support: Vec<(i64, Complex64)> =
        (1..=n).filter(|&i| sqf[i] && a[i - 1] != Complex64::new(0.0, 0.0)).map(|i| (i as i64, a[i - 1])).collect();
    let mass = pairwise_sum(&support.iter().map(|(_, c)| c.norm_sqr()).collect::<Vec<_>>());
    if mass == 0.0 {
        return Ok(0.0);
    }
    let moduli: Vec<i64> = (1..=m).step_by(2).filter(|&q| sqf[q]).map(|q| q as i64).collect();
    let rows: Vec<f64> = moduli
        .par_iter()
        .map(|&q| {
            let s: Complex64 = support.iter().map(|&(i, c)| c * kronecker_symbol(i, q) as f64).sum();
            s.norm_sqr()
        })
        .collect();
    Ok(pairwise_sum(&rows) / ((m + n) as f64 * mass))
}

// ---------------------------------------------------------------------------
// Shifted decorrelation

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecorrelationTable {
    #[serde(rename = "X")]
    pub x: f64,
    pub sigma: f64,
    pub t_values: Vec<f64>,
    /// values[i][j] = Σ|L(σ+it_i)L(σ+it_j)| / (X (log X)^{1/2})
    pub values: Vec<Vec<f64>>,
    pub n_discriminants: usize,
}

/// Normalized Σ_{8d≤X} |L(σ+it₁)L(σ+it₂)| for every pair from `t_values`.
pub fn shifted_decorrelation_scan(
    x: f64,
    sigma: f64,
    t_values: &[f64],
    coeffs: &EigenformCoefficients,
    eps: f64,
) -> Result<DecorrelationTable> {
    check_positive("X", x)?;
    if !(sigma >= 0.5 && sigma <= 0.5 + 1.0 / x.ln()) {
        return Err(Error::invalid(format!("sigma={sigma} outside [1/2, 1/2 + 1/log X]")));
    }
    if let Some(t) = t_values.iter().find(|t| !(t.abs() <= x)) {
        return Err(Error::invalid(format!("|t|={t} exceeds X")));
    }
    let twists = enumerate_twists(x)?;
    let ev = TwistEvaluator::new(coeffs);
    let rows = map_twists(&twists, |d| {
        t_values
            .iter()
            .map(|&t| Ok(ev.shifted(d, Complex64::new(sigma - 0.5, t), eps)?.value.norm()))
            .collect::<Result<Vec<f64>>>()
    })?;
    let norm = x * x.ln().sqrt();
    let k = t_values.len();
    let values = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| pairwise_sum(&rows.iter().map(|r| r[i] * r[j]).collect::<Vec<_>>()) / norm)
                .collect()
        })
        .collect();
    Ok(DecorrelationTable { x, sigma, t_values: t_values.to_vec(), values, n_discriminants: twists.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modform::expand_delta_coefficients;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn script_l_branches() {
        let x = std::f64::consts::E.powf(std::f64::consts::E);
        assert!((script_l(c(0.0, 0.0), x) - 1.0).abs() < 1e-14);
        assert!((script_l(c(0.5, 0.0), 1e10) - 2f64.ln()).abs() < 1e-15);
        assert!((script_l(c(0.0, 0.5), 1e10) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(script_l(c(2.0, 0.0), 1e10), 0.0);
        // continuous at |z| = 1/log x
        let x = 1e6f64;
        let r = 1.0 / x.ln();
        assert!((script_l(c(r * (1.0 + 1e-12), 0.0), x) - script_l(c(r, 0.0), x)).abs() < 1e-10);
    }

    #[test]
    fn script_m_v_at_zero() {
        let z = c(0.0, 0.0);
        let x = 1e5f64;
        let ll = x.ln().ln();
        assert!((script_m(z, z, x) + ll).abs() < 1e-14);
        assert!((script_v(z, z, x) - 4.0 * ll).abs() < 1e-14);
        // 𝓛(2 Re z₂) vanishes only once 2 Re z₂ ≥ 1
        assert!((script_v(z, c(1.0, 0.0), x) - ll).abs() < 1e-14);
    }

    #[test]
    fn lambda0_root() {
        let l = lambda0();
        assert!(((-l).exp() - l - l * l / 2.0).abs() < 1e-12);
        assert!((l - 0.4912).abs() < 1e-4);
    }

    #[test]
    fn shift_pair_validation() {
        assert!(ShiftPair::new(c(0.0, 3.0), c(0.05, -1.0), 1e5).is_ok());
        assert!(ShiftPair::new(c(-0.01, 0.0), c(0.0, 0.0), 1e5).is_err());
        assert!(ShiftPair::new(c(0.2, 0.0), c(0.0, 0.0), 1e5).is_err());
        assert!(ShiftPair::new(c(0.0, 2e5), c(0.0, 0.0), 1e5).is_err());
        assert!(ShiftPair::new(c(0.0, 0.0), c(0.0, 0.0), 5.0).is_err());
    }

    #[test]
    fn prop62_regimes() {
        // at X = 1e5 the first two regimes are empty
        let x = 1e5f64;
        let v = 4.0 * x.ln().ln();
        assert_eq!(prop62_bound(0.1, x, v).regime, None);
        assert_eq!(prop62_bound(3.0, x, v).regime, Some(3));
        let b = prop62_bound(3.0, x, v).bound.unwrap();
        assert!((b - x * (-3.0 * 3f64.ln() / 1025.0).exp()).abs() < 1e-6);
    }

    #[test]
    fn least_squares_exact_line() {
        let xs = [1.0, 2.0, 3.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.25 * x - 3.0).collect();
        assert!((least_squares_slope(&xs, &ys) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn single_twist_moment() {
        let coeffs = expand_delta_coefficients(2000).unwrap();
        let constant = MomentConstant::assemble(1.0, 1.0, 10_000, 0.0, 0.0);
        let r = second_moment_sharp(8.0, &coeffs, &constant, 1e-9).unwrap();
        assert_eq!(r.n_discriminants, 1);
        let l = crate::kernel::central_value(TwistDiscriminant::new(1).unwrap(), &coeffs, 1e-9).unwrap();
        assert_eq!(r.sum_l2, l.value.re * l.value.re);
    }

    #[test]
    fn truncation_error_names_twist() {
        let coeffs = expand_delta_coefficients(50).unwrap();
        let constant = MomentConstant::assemble(1.0, 1.0, 10_000, 0.0, 0.0);
        match second_moment_sharp(200.0, &coeffs, &constant, 1e-9) {
            Err(Error::AtTwist { discriminant, source }) => {
                let first = enumerate_twists(200.0)
                    .unwrap()
                    .into_iter()
                    .find(|d| crate::kernel::central_truncation(12, d.value() as f64, 1e-9).unwrap() > 50)
                    .unwrap();
                assert_eq!(discriminant, first.value());
                assert!(matches!(*source, Error::Truncation { .. }));
            }
            other => panic!("expected a per-twist truncation error, got {other:?}"),
        }
    }

    #[test]
    fn large_sieve_indicator() {
        let mut a = vec![c(0.0, 0.0); 30];
        a[0] = c(1.0, 0.0);
        let r = large_sieve_ratio(40, 30, &a).unwrap();
        let count = (1..=40).step_by(2).filter(|&m| arith::is_squarefree(m)).count() as f64;
        assert!((r - count / 70.0).abs() < 1e-15);
    }

    #[test]
    fn poly_moment_hypothesis() {
        let a: BTreeMap<u64, Complex64> = [(3, c(1.0, 0.0)), (5, c(1.0, 0.0))].into();
        assert!(matches!(
            dirichlet_poly_moment_check(1e4, 20.0, 2, &a, HypothesisPolicy::Enforce),
            Err(Error::Hypothesis(_))
        ));
        let r = dirichlet_poly_moment_check(1e4, 20.0, 2, &a, HypothesisPolicy::ReportOnly).unwrap();
        assert!(!r.hypothesis_holds);
        let bad: BTreeMap<u64, Complex64> = [(9, c(1.0, 0.0))].into();
        assert!(dirichlet_poly_moment_check(1e4, 5.0, 1, &bad, HypothesisPolicy::ReportOnly).is_err());
    }
}
