//! Smoothing kernels W_w(x) = Γ(a, 2πx)/Γ(a), a = w + (κ−1)/2, and the
//! approximate functional equation for L(s, f⊗χ_{8d}).

use crate::arith::divisor_bound_constant;
use crate::error::{Error, Result};
use crate::gamma::{gamma_q, gamma_q_real, ln_gamma, ln_gamma_real, near_gamma_pole};
use crate::modform::EigenformCoefficients;
use crate::quadchar::{TwistCharacter, TwistDiscriminant};
use crate::summation::{ComplexNeumaier, Neumaier};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Exponent δ in the divisor bound d(n) ≤ C_δ n^δ used for tail certification.
pub const DIVISOR_DELTA: f64 = 0.3;

fn c_delta() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| divisor_bound_constant(DIVISOR_DELTA))
}

/// W_{1/2}(x) = e^{−2πx} Σ_{j<κ/2} (2πx)^j/j!.
///
/// # Panics
/// If `weight` is not a positive even integer.
pub fn kernel_w_half(x: f64, weight: u32) -> f64 {
    assert!(weight >= 2 && weight % 2 == 0, "weight must be a positive even integer");
    let u = 2.0 * PI * x.max(0.0);
    if u > 1000.0 {
        return 0.0;
    }
    (-u).exp() * truncated_exp_poly(u, weight / 2)
}

/// Σ_{j<m} u^j/j! by Horner's rule.
#[inline]
fn truncated_exp_poly(u: f64, m: u32) -> f64 {
    let mut p = 1.0;
    for j in (1..m).rev() {
        p = 1.0 + p * u / j as f64;
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelParams {
    weight: u32,
    shift: Complex64,
}

impl KernelParams {
    pub fn new(weight: u32, shift: Complex64) -> Result<Self> {
        if weight == 0 || weight % 2 != 0 {
            return Err(Error::invalid(format!("weight must be a positive even integer, got {weight}")));
        }
        let p = Self { weight, shift };
        if !(p.gamma_parameter().re > 0.0) {
            return Err(Error::invalid(format!("Re(w + (κ−1)/2) must be positive, w={shift}")));
        }
        Ok(p)
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn shift(&self) -> Complex64 {
        self.shift
    }

    /// a = w + (κ−1)/2.
    pub fn gamma_parameter(&self) -> Complex64 {
        self.shift + (self.weight as f64 - 1.0) / 2.0
    }
}

/// W_w(x) = Q(w + (κ−1)/2, 2πx).
pub fn kernel_w_shift(x: f64, params: KernelParams) -> Result<Complex64> {
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("kernel argument must be non-negative, got {x}")));
    }
    gamma_q(params.gamma_parameter(), 2.0 * PI * x)
}

/// Upper bound for Σ_{n>N} d(n) n^{−σ'} |W_w(n/Q)| with a = w + (κ−1)/2.
///
/// Uses d(n) ≤ C_δ n^δ, |Γ(a, y)| ≤ Γ(Re a, y) and comparison with
/// ∫_N^∞ t^β Γ(σ, ct) dt (β = δ − σ', σ = Re a, c = 2π/Q), which has a
/// closed form in incomplete gammas. Returns `None` when the summand is not
/// yet decreasing at N, so the integral comparison is not valid.
pub fn certified_tail(a: Complex64, sigma_prime: f64, q: f64, n: usize) -> Result<Option<f64>> {
    let sigma = a.re;
    let beta = DIVISOR_DELTA - sigma_prime;
    let c = 2.0 * PI / q;
    let u = c * n as f64;
    if n == 0 || beta <= -1.0 || (beta > 0.0 && u < sigma - 1.0 + beta) {
        return Ok(None);
    }
    let nf = n as f64;
    let lead = (ln_gamma_real(sigma + beta + 1.0) - ln_gamma_real(sigma) - (beta + 1.0) * c.ln()).exp()
        * gamma_q_real(sigma + beta + 1.0, u)?;
    let integral = ((lead - nf.powf(beta + 1.0) * gamma_q_real(sigma, u)?) / (beta + 1.0)).max(0.0);
    // Γ(σ)/|Γ(a)| converts the regularized real-parameter bound
    let ratio = (ln_gamma_real(sigma) - ln_gamma(a).re).exp();
    Ok(Some(c_delta() * ratio * integral))
}

const MAX_TRUNCATION: usize = 1 << 40;

/// Smallest N ≥ 1 whose certified tail is below `target`, with that tail.
pub fn certified_length(a: Complex64, sigma_prime: f64, q: f64, target: f64) -> Result<(usize, f64)> {
    let ok = |n: usize| -> Result<Option<f64>> {
        Ok(certified_tail(a, sigma_prime, q, n)?.filter(|&t| t < target))
    };
    if let Some(t) = ok(1)? {
        return Ok((1, t));
    }
    let mut hi = 2usize;
    let hi_tail = loop {
        if let Some(t) = ok(hi)? {
            break t;
        }
        if hi >= MAX_TRUNCATION {
            return Err(Error::Convergence { what: "truncation search", iterations: hi });
        }
        hi *= 2;
    };
    let (mut lo, mut best) = (hi / 2, (hi, hi_tail));
    // invariant: lo fails, best.0 succeeds
    while best.0 - lo > 1 {
        let mid = lo + (best.0 - lo) / 2;
        match ok(mid)? {
            Some(t) => best = (mid, t),
            None => lo = mid,
        }
    }
    Ok(best)
}

/// A computed L-value or partial sum with its certified truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AfeValue {
    pub d: TwistDiscriminant,
    pub s: Complex64,
    pub value: Complex64,
    /// Number of Dirichlet terms used (the larger one for two-sum values).
    pub truncation: usize,
    /// Certified bound on |value − exact|.
    pub tail_bound: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

fn central_weight(coeffs: &EigenformCoefficients) -> Result<u32> {
    let k = coeffs.weight();
    if k % 4 != 0 {
        return Err(Error::invalid(format!(
            "central values need weight ≡ 0 mod 4 (weight {k} has root number −1 for positive twists)"
        )));
    }
    Ok(k)
}

/// Evaluator holding λ(n)/√n so that many twists can share one table.
///
/// The one-shot functions [`central_value`], [`shifted_value`] and
/// [`mollified_a`] compute the same quantities without the table and give
/// bit-identical results.
#[derive(Debug, Clone)]
pub struct TwistEvaluator<'a> {
    coeffs: &'a EigenformCoefficients,
    scaled: Option<Vec<f64>>,
}

#[inline]
fn scaled_coefficient(coeffs: &EigenformCoefficients, n: usize) -> f64 {
    coeffs.get(n) / (n as f64).sqrt()
}

impl<'a> TwistEvaluator<'a> {
    pub fn new(coeffs: &'a EigenformCoefficients) -> Self {
        let scaled =
            (0..=coeffs.n_max()).map(|n| if n == 0 { 0.0 } else { scaled_coefficient(coeffs, n) }).collect();
        Self { coeffs, scaled: Some(scaled) }
    }

    fn untabulated(coeffs: &'a EigenformCoefficients) -> Self {
        Self { coeffs, scaled: None }
    }

    #[inline]
    fn scaled(&self, n: usize) -> f64 {
        match &self.scaled {
            Some(t) => t[n],
            None => scaled_coefficient(self.coeffs, n),
        }
    }

    pub fn coeffs(&self) -> &EigenformCoefficients {
        self.coeffs
    }

    /// 2 Σ_n λ(n)χ_{8d}(n) n^{−1/2} W_{1/2}(n/U), truncated with certified tail < eps.
    pub fn mollified(&self, d: TwistDiscriminant, u: f64, eps: f64) -> Result<AfeValue> {
        check_eps(eps)?;
        let weight = central_weight(self.coeffs)?;
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::invalid(format!("U must be positive, got {u}")));
        }
        let a = Complex64::new(weight as f64 / 2.0, 0.0);
        let (n_trunc, tail) = certified_length(a, 0.5, u, eps / 2.0)?;
        if n_trunc > self.coeffs.n_max() {
            return Err(Error::Truncation { required: n_trunc, available: self.coeffs.n_max() });
        }
        let sum = match &self.scaled {
            Some(t) => twisted_sum_half(|n| t[n], d, u, weight / 2, n_trunc),
            None => twisted_sum_half(|n| scaled_coefficient(self.coeffs, n), d, u, weight / 2, n_trunc),
        };
        Ok(AfeValue {
            d,
            s: Complex64::new(0.5, 0.0),
            value: Complex64::new(2.0 * sum, 0.0),
            truncation: n_trunc,
            tail_bound: 2.0 * tail,
        })
    }

    /// L(½, f⊗χ_{8d}) = 2 Σ λ(n)χ_{8d}(n) n^{−1/2} W_{1/2}(n/8d).
    pub fn central(&self, d: TwistDiscriminant, eps: f64) -> Result<AfeValue> {
        self.mollified(d, d.value() as f64, eps)
    }

    /// L(½ + z, f⊗χ_{8d}) from both sums of the approximate functional equation.
    pub fn shifted(&self, d: TwistDiscriminant, z: Complex64, eps: f64) -> Result<AfeValue> {
        let plan = ShiftedPlan::new(self.coeffs.weight(), d.value() as f64, z, eps)?;
        let needed = plan.n1.max(plan.n2);
        if needed > self.coeffs.n_max() {
            return Err(Error::Truncation { required: needed, available: self.coeffs.n_max() });
        }
        let one = Complex64::new(1.0, 0.0);
        let a1 = self.twisted_sum_shift(d, plan.s, plan.p1, plan.n1)?;
        let a2 = self.twisted_sum_shift(d, one - plan.s, plan.p2, plan.n2)?;
        Ok(AfeValue {
            d,
            s: plan.s,
            value: a1 + plan.prefactor * a2,
            truncation: needed,
            tail_bound: plan.t1 + plan.prefactor.norm() * plan.t2,
        })
    }

    /// Σ_{n≤N} λ(n)χ_{8d}(n) n^{−s} W_w(n/8d) for complex s.
    fn twisted_sum_shift(&self, d: TwistDiscriminant, s: Complex64, p: KernelParams, n_trunc: usize) -> Result<Complex64> {
        let chi = TwistCharacter::new(d);
        let q = d.value() as f64;
        let mut acc = ComplexNeumaier::new();
        let t = Complex64::new(0.0, -s.im);
        for n in (1..=n_trunc).step_by(2) {
            let c = chi.eval(n as u64);
            if c == 0 {
                continue;
            }
            let nf = n as f64;
            // n^{−s} = n^{−1/2} · n^{−(Re s − 1/2)} · n^{−i Im s}
            let mag = self.scaled(n) * nf.powf(0.5 - s.re);
            let phase = (t * nf.ln()).exp();
            let w = kernel_w_shift(nf / q, p)?;
            acc.add(c as f64 * mag * phase * w);
        }
        Ok(acc.value())
    }
}

/// Truncation lengths and the functional-equation factor for L(½ + z) at conductor q.
struct ShiftedPlan {
    s: Complex64,
    p1: KernelParams,
    p2: KernelParams,
    prefactor: Complex64,
    n1: usize,
    t1: f64,
    n2: usize,
    t2: f64,
}

impl ShiftedPlan {
    fn new(weight: u32, q: f64, z: Complex64, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        let half_k = weight as f64 / 2.0;
        let s = Complex64::new(0.5, 0.0) + z;
        let lower = half_k - z;
        let upper = half_k + z;
        if near_gamma_pole(lower, 1e-12) || near_gamma_pole(upper, 1e-12) {
            return Err(Error::invalid(format!("gamma factor has a pole at z={z}")));
        }
        let p1 = KernelParams::new(weight, s)?;
        let p2 = KernelParams::new(weight, Complex64::new(1.0, 0.0) - s)?;
        // i^κ ε(8d) with ε = χ_{8d}(−1) = 1 for positive discriminants
        let root = if weight % 4 == 0 { 1.0 } else { -1.0 };
        let prefactor = root * ((-2.0 * z) * (q / (2.0 * PI)).ln() + ln_gamma(lower) - ln_gamma(upper)).exp();
        let (n1, t1) = certified_length(p1.gamma_parameter(), s.re, q, eps / 2.0)?;
        let (n2, t2) = if prefactor.norm() == 0.0 {
            (1, 0.0)
        } else {
            certified_length(p2.gamma_parameter(), 1.0 - s.re, q, eps / (2.0 * prefactor.norm()))?
        };
        Ok(Self { s, p1, p2, prefactor, n1, t1, n2, t2 })
    }
}

/// Number of coefficients a central value or 𝓐_U with conductor (or U) `q` needs.
pub fn central_truncation(weight: u32, q: f64, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    let a = Complex64::new(weight as f64 / 2.0, 0.0);
    Ok(certified_length(a, 0.5, q, eps / 2.0)?.0)
}

/// Number of coefficients L(½ + z) at conductor `q` needs.
pub fn shifted_truncation(weight: u32, q: f64, z: Complex64, eps: f64) -> Result<usize> {
    let plan = ShiftedPlan::new(weight, q, z, eps)?;
    Ok(plan.n1.max(plan.n2))
}

/// Σ_{n≤N, n odd} (λ(n)/√n) χ_{8d}(n) W_{1/2}(n/U), with the kernel's
/// exponential advanced multiplicatively and re-anchored periodically.
fn twisted_sum_half(scaled: impl Fn(usize) -> f64, d: TwistDiscriminant, u: f64, half_k: u32, n_trunc: usize) -> f64 {
    const ANCHOR_EVERY: usize = 64;
    let chi = TwistCharacter::new(d);
    let dd = d.d_odd() as usize;
    let jac = chi.jacobi_table();
    // sign[n mod 8] = (2/n)·(−1)^{[n ≡ d ≡ 3 mod 4]}
    let mut sign = [0.0f64; 8];
    for r in [1usize, 3, 5, 7] {
        let mut s = if r == 3 || r == 5 { -1.0 } else { 1.0 };
        if r % 4 == 3 && dd % 4 == 3 {
            s = -s;
        }
        sign[r] = s;
    }
    let step = 2.0 * PI / u;
    let ratio = (-2.0 * step).exp();
    let mut acc = Neumaier::new();
    let mut residue = 1 % dd;
    let mut expo = 0.0;
    for (i, n) in (1..=n_trunc).step_by(2).enumerate() {
        let x = step * n as f64;
        if i % ANCHOR_EVERY == 0 {
            expo = (-x).exp();
        } else {
            expo *= ratio;
        }
        let j = jac[residue];
        if j != 0 {
            let w = expo * truncated_exp_poly(x, half_k);
            acc.add(sign[n & 7] * j as f64 * scaled(n) * w);
        }
        residue += 2;
        while residue >= dd {
            residue -= dd;
        }
    }
    acc.value()
}

/// L(½, f⊗χ_{8d}) with certified truncation error below `eps`.
pub fn central_value(d: TwistDiscriminant, coeffs: &EigenformCoefficients, eps: f64) -> Result<AfeValue> {
    mollified_a(d, d.value() as f64, coeffs, eps)
}

/// L(½ + z, f⊗χ_{8d}) with certified truncation error below `eps`.
pub fn shifted_value(d: TwistDiscriminant, z: Complex64, coeffs: &EigenformCoefficients, eps: f64) -> Result<AfeValue> {
    TwistEvaluator::untabulated(coeffs).shifted(d, z, eps)
}

/// 𝓐_U(½; 8d) = 2 Σ λ(n)χ_{8d}(n) n^{−1/2} W_{1/2}(n/U).
pub fn mollified_a(d: TwistDiscriminant, u: f64, coeffs: &EigenformCoefficients, eps: f64) -> Result<AfeValue> {
    TwistEvaluator::untabulated(coeffs).mollified(d, u, eps)
}
