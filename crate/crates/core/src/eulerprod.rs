//! Euler products for the second-moment constant: the local factors of
//! Z(u, v), its completed form Z₂(u, v), L(1, sym² f), and
//! c = (2/π²) L(1, sym² f)³ Z₂(0, 0).

use crate::arith;
use crate::error::{Error, Result};
use crate::modform::EigenformCoefficients;
use crate::summation::ComplexNeumaier;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Smallest admissible real part of u and v.
pub const MIN_SHIFT_RE: f64 = -0.25 + 1e-6;
pub const MIN_Z2_CUTOFF: u64 = 1_000;
pub const MIN_CONSTANT_CUTOFF: u64 = 10_000;
/// Tail level at which a moment constant counts as fully converged.
pub const MOMENT_CONSTANT_TARGET: f64 = 1e-6;
/// Z₂ accuracy demanded when assembling the moment constant.
pub const CONSTANT_Z2_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFactorInput {
    p: u64,
    lambda_p: f64,
    u: Complex64,
    v: Complex64,
}

impl LocalFactorInput {
    pub fn new(p: u64, lambda_p: f64, u: Complex64, v: Complex64) -> Result<Self> {
        if p < 3 || arith::factorize(p) != [(p, 1)] {
            return Err(Error::invalid(format!("{p} is not an odd prime")));
        }
        if !(lambda_p.abs() <= 2.0) {
            return Err(Error::DeligneViolation { p, value: lambda_p });
        }
        check_shifts(u, v)?;
        Ok(Self { p, lambda_p, u, v })
    }
}

fn check_shifts(u: Complex64, v: Complex64) -> Result<()> {
    if !(u.re >= MIN_SHIFT_RE && v.re >= MIN_SHIFT_RE) {
        return Err(Error::invalid(format!("shifts need real part at least −1/4 + 1e-6, got u={u}, v={v}")));
    }
    Ok(())
}

#[inline]
fn p_pow(p: f64, s: Complex64) -> Complex64 {
    // p^{−s}
    (-s * p.ln()).exp()
}

/// The p-th factor of Z(u, v):
/// 1 + p/(p+1)·(½A₋(u)⁻¹A₋(v)⁻¹ + ½A₊(u)⁻¹A₊(v)⁻¹ − 1),
/// with A∓(w) = 1 ∓ λ(p)p^{−½−w} + p^{−1−2w}.
pub fn z_local_factor(input: LocalFactorInput) -> Result<Complex64> {
    let p = input.p as f64;
    let l = input.lambda_p;
    let half = Complex64::new(0.5, 0.0);
    let xu = p_pow(p, half + input.u);
    let xv = p_pow(p, half + input.v);
    let am_u = 1.0 - l * xu + xu * xu;
    let ap_u = 1.0 + l * xu + xu * xu;
    let am_v = 1.0 - l * xv + xv * xv;
    let ap_v = 1.0 + l * xv + xv * xv;
    for f in [am_u, ap_u, am_v, ap_v] {
        if f.norm() < 1e-300 {
            return Err(Error::Degenerate(format!("vanishing Hecke factor at p={}", input.p)));
        }
    }
    let bracket = 0.5 / (am_u * am_v) + 0.5 / (ap_u * ap_v) - 1.0;
    Ok(1.0 + p / (p + 1.0) * bracket)
}

/// (1 − α²p^{−s})⁻¹(1 − p^{−s})⁻¹(1 − β²p^{−s})⁻¹ with α + β = λ, αβ = 1.
pub fn sym2_local_factor(p: u64, lambda_p: f64, s: Complex64) -> Complex64 {
    let x = p_pow(p as f64, s);
    1.0 / ((1.0 - (lambda_p * lambda_p - 2.0) * x + x * x) * (1.0 - x))
}

/// The p = 2 part of Z₂: Z omits p = 2 but ζ and the three L(sym²) factors
/// include it, so their 2-factors enter Z₂ inverted.
pub fn z2_factor_at_two(lambda_2: f64, u: Complex64, v: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let zeta_inv = 1.0 - p_pow(2.0, one + u + v);
    zeta_inv
        / (sym2_local_factor(2, lambda_2, one + 2.0 * u)
            * sym2_local_factor(2, lambda_2, one + 2.0 * v)
            * sym2_local_factor(2, lambda_2, one + u + v))
}

/// The p-th factor of Z₂ for odd p.
pub fn z2_local_factor(input: LocalFactorInput) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let (p, l, u, v) = (input.p, input.lambda_p, input.u, input.v);
    let zeta_inv = 1.0 - p_pow(p as f64, one + u + v);
    Ok(z_local_factor(input)? * zeta_inv
        / (sym2_local_factor(p, l, one + 2.0 * u) * sym2_local_factor(p, l, one + 2.0 * v) * sym2_local_factor(p, l, one + u + v)))
}

fn prime_eigenvalue(coeffs: &EigenformCoefficients, p: u64) -> f64 {
    coeffs.get(p as usize)
}

fn check_cutoff(coeffs: &EigenformCoefficients, cutoff: u64, min: u64) -> Result<()> {
    if cutoff < min {
        return Err(Error::invalid(format!("prime cutoff must be at least {min}, got {cutoff}")));
    }
    if cutoff as usize > coeffs.n_max() {
        return Err(Error::Truncation { required: cutoff as usize, available: coeffs.n_max() });
    }
    Ok(())
}

/// A truncated Euler product with its estimated truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductValue {
    pub value: Complex64,
    pub tail_estimate: f64,
}

/// Z₂(u, v) truncated at primes p ≤ P.
///
/// The local factors are 1 + O(p^{−θ}) with θ = 2 + 4 min(0, Re u, Re v).
/// With C the largest |log factor|·p^θ over P/2 < p ≤ P, the tail of the log
/// is estimated by C Σ_{p>P} p^{−θ} ≈ C P^{1−θ}/((θ−1) log P). Fails if that
/// estimate is not below `tolerance`.
pub fn z2_value(
    u: Complex64,
    v: Complex64,
    coeffs: &EigenformCoefficients,
    prime_cutoff: u64,
    tolerance: f64,
) -> Result<ProductValue> {
    check_shifts(u, v)?;
    check_cutoff(coeffs, prime_cutoff, MIN_Z2_CUTOFF)?;
    let theta = 2.0 + 4.0 * 0f64.min(u.re).min(v.re);
    let mut log_sum = ComplexNeumaier::new();
    log_sum.add(z2_factor_at_two(prime_eigenvalue(coeffs, 2), u, v).ln());
    let mut c = 0.0f64;
    for p in arith::primes_up_to(prime_cutoff as usize).into_iter().skip(1) {
        let f = z2_local_factor(LocalFactorInput::new(p, prime_eigenvalue(coeffs, p), u, v)?)?;
        let lf = f.ln();
        log_sum.add(lf);
        if 2 * p > prime_cutoff {
            c = c.max(lf.norm() * (p as f64).powf(theta));
        }
    }
    let pc = prime_cutoff as f64;
    let log_tail = c * pc.powf(1.0 - theta) / ((theta - 1.0) * pc.ln());
    let value = log_sum.value().exp();
    let tail_estimate = value.norm() * log_tail.exp_m1();
    if !(tail_estimate < tolerance) {
        return Err(Error::CutoffTooSmall { cutoff: prime_cutoff, achieved: tail_estimate, required: tolerance });
    }
    Ok(ProductValue { value, tail_estimate })
}

fn sym2_log_product(coeffs: &EigenformCoefficients, primes: &[u64], s: Complex64) -> Complex64 {
    let mut acc = ComplexNeumaier::new();
    for &p in primes {
        acc.add(sym2_local_factor(p, prime_eigenvalue(coeffs, p), s).ln());
    }
    acc.value()
}

/// ∏_{p≤P} of the sym² local factors at s = 1, with the change between the
/// P/2 and P truncations reported as the tail estimate.
pub fn sym2_l_at_1(coeffs: &EigenformCoefficients, prime_cutoff: u64) -> Result<ProductValue> {
    check_cutoff(coeffs, prime_cutoff, MIN_Z2_CUTOFF)?;
    let primes = arith::primes_up_to(prime_cutoff as usize);
    let split = primes.partition_point(|&p| 2 * p <= prime_cutoff);
    let one = Complex64::new(1.0, 0.0);
    let head = sym2_log_product(coeffs, &primes[..split], one);
    let tail = sym2_log_product(coeffs, &primes[split..], one);
    let half = head.exp();
    let full = (head + tail).exp();
    Ok(ProductValue { value: full, tail_estimate: (full - half).norm() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentConstant {
    pub c: f64,
    #[serde(rename = "L1sym2")]
    pub l_sym2_at_1: f64,
    #[serde(rename = "Z2_00")]
    pub z2_at_00: f64,
    #[serde(rename = "cutoff")]
    pub prime_cutoff: u64,
    /// Estimated |error| of c from both truncated products.
    pub tail_estimate: f64,
}

impl MomentConstant {
    pub fn assemble(l_sym2_at_1: f64, z2_at_00: f64, prime_cutoff: u64, tail_l: f64, tail_z: f64) -> Self {
        let c = 2.0 / (PI * PI) * l_sym2_at_1.powi(3) * z2_at_00;
        let tail_estimate = c.abs() * (3.0 * tail_l / l_sym2_at_1.abs() + tail_z / z2_at_00.abs());
        Self { c, l_sym2_at_1, z2_at_00, prime_cutoff, tail_estimate }
    }

    /// Whether the combined tail estimate is below [`MOMENT_CONSTANT_TARGET`].
    pub fn meets_target(&self) -> bool {
        self.tail_estimate < MOMENT_CONSTANT_TARGET
    }
}

/// c = (2/π²) L(1, sym² f)³ Z₂(0, 0) from products over p ≤ P.
pub fn moment_constant(coeffs: &EigenformCoefficients, prime_cutoff: u64) -> Result<MomentConstant> {
    check_cutoff(coeffs, prime_cutoff, MIN_CONSTANT_CUTOFF)?;
    let zero = Complex64::new(0.0, 0.0);
    let l = sym2_l_at_1(coeffs, prime_cutoff)?;
    let z = z2_value(zero, zero, coeffs, prime_cutoff, CONSTANT_Z2_TOLERANCE)?;
    Ok(MomentConstant::assemble(l.value.re, z.value.re, prime_cutoff, l.tail_estimate, z.tail_estimate))
}
