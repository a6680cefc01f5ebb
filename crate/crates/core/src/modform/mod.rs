//! Normalized Hecke eigenvalues of full-level eigenforms, in particular the
//! weight-12 discriminant form Δ.

pub mod cache;
mod ntt;

use crate::arith::{self, SmallestPrimeFactor};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Normalized eigenvalues λ(1..=n_max) of a weight-`weight` eigenform.
///
/// Index 0 of the backing table is unused and holds 0.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenformCoefficients {
    weight: u32,
    lambda: Vec<f64>,
}

impl EigenformCoefficients {
    /// Wraps an arbitrary table `lambda[1..=n_max]` (with `lambda[0]` ignored).
    ///
    /// Only the weight and `lambda[1] = 1` are checked, so synthetic tables that
    /// are not genuinely Hecke-multiplicative can be used in experiments.
    pub fn from_table(weight: u32, mut lambda: Vec<f64>) -> Result<Self> {
        check_weight(weight)?;
        if lambda.len() < 2 {
            return Err(Error::invalid("coefficient table must contain lambda[1]"));
        }
        if lambda[1] != 1.0 {
            return Err(Error::invalid(format!("lambda[1] must be 1, got {}", lambda[1])));
        }
        lambda[0] = 0.0;
        Ok(Self { weight, lambda })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn n_max(&self) -> usize {
        self.lambda.len() - 1
    }

    /// λ(n) for `1 <= n <= n_max`.
    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.lambda[n]
    }

    /// The full table including the unused slot 0.
    #[inline]
    pub fn table(&self) -> &[f64] {
        &self.lambda
    }

    /// Copy restricted to `n <= n_max`.
    pub fn truncated(&self, n_max: usize) -> Result<Self> {
        if n_max == 0 || n_max > self.n_max() {
            return Err(Error::Truncation { required: n_max, available: self.n_max() });
        }
        Ok(Self { weight: self.weight, lambda: self.lambda[..=n_max].to_vec() })
    }

    /// λ(p) for every prime `p <= n_max`.
    pub fn prime_eigenvalues(&self) -> BTreeMap<u64, f64> {
        arith::primes_up_to(self.n_max()).into_iter().map(|p| (p, self.lambda[p as usize])).collect()
    }

    /// Worst-case violations of the Hecke-eigenform invariants over the table.
    pub fn invariant_report(&self) -> InvariantReport {
        let n_max = self.n_max();
        let spf = SmallestPrimeFactor::new(n_max);
        let d = arith::divisor_count_table(n_max);
        let l = &self.lambda;
        let mut report = InvariantReport {
            lambda1: l[1],
            max_deligne_excess: f64::NEG_INFINITY,
            max_multiplicative_error: 0.0,
            max_recursion_error: 0.0,
        };
        for n in 1..=n_max {
            report.max_deligne_excess = report.max_deligne_excess.max(l[n].abs() - d[n] as f64);
            if n == 1 {
                continue;
            }
            let p = spf.get(n) as usize;
            let mut pe = p;
            while (n / pe) % p == 0 {
                pe *= p;
            }
            let m = n / pe;
            if m > 1 {
                let prod = l[pe] * l[m];
                let scale = prod.abs().max(l[n].abs()).max(1e-300);
                report.max_multiplicative_error = report.max_multiplicative_error.max((l[n] - prod).abs() / scale);
            } else if pe > p {
                let rec = l[p] * l[pe / p] - l[pe / (p * p)];
                report.max_recursion_error = report.max_recursion_error.max((l[n] - rec).abs());
            }
        }
        report
    }
}

/// See [`EigenformCoefficients::invariant_report`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InvariantReport {
    pub lambda1: f64,
    /// max over n of |λ(n)| − d(n); non-positive when the bound holds.
    pub max_deligne_excess: f64,
    /// max relative error of λ(p^e m) = λ(p^e)λ(m) with p ∤ m.
    pub max_multiplicative_error: f64,
    /// max absolute error of λ(p^{j+1}) = λ(p)λ(p^j) − λ(p^{j−1}).
    pub max_recursion_error: f64,
}

impl InvariantReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lambda1 == 1.0
            && self.max_deligne_excess <= tol
            && self.max_multiplicative_error <= tol
            && self.max_recursion_error <= tol
    }
}

fn check_weight(weight: u32) -> Result<()> {
    if weight == 0 || weight % 2 != 0 {
        return Err(Error::invalid(format!("weight must be a positive even integer, got {weight}")));
    }
    Ok(())
}

/// Largest `n_max` for which every τ(n), n ≤ n_max, is guaranteed to fit the
/// signed 128-bit reconstruction (using |τ(n)| ≤ C_δ n^{11/2+δ}, δ = 0.3).
pub fn tau_expansion_limit() -> usize {
    let delta = 0.3;
    let c = arith::divisor_bound_constant(delta);
    let by_size = ((2f64.powi(126) / c).ln() / (5.5 + delta)).exp().floor() as usize;
    by_size.min(1usize << (ntt::MAX_LOG_LEN - 1))
}

/// τ(1..=n_max) exactly, by expanding q ∏(1 − qⁿ)²⁴. Index 0 holds 0.
pub fn tau_exact(n_max: usize) -> Result<Vec<i128>> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let limit = tau_expansion_limit();
    if n_max > limit {
        return Err(Error::Overflow { n_max, limit });
    }
    let mut tau = vec![0i128; n_max + 1];
    tau[1] = 1;
    if n_max == 1 {
        return Ok(tau);
    }
    // Euler's pentagonal series for ∏(1 − qⁿ), truncated to degree < n_max
    let len = n_max;
    let mut euler = vec![0i8; len];
    euler[0] = 1;
    for k in 1.. {
        let g1 = k * (3 * k - 1) / 2;
        if g1 >= len {
            break;
        }
        let sign = if k % 2 == 0 { 1 } else { -1 };
        euler[g1] = sign;
        let g2 = k * (3 * k + 1) / 2;
        if g2 < len {
            euler[g2] = sign;
        }
    }
    let residues: Vec<Vec<u32>> = ntt::MODULI.iter().map(|&p| ntt::pow24_mod(&euler, p)).collect();
    let check = ntt::pow24_mod(&euler, ntt::CHECK_MODULUS);
    let crt = ntt::Crt::new();
    for i in 0..len {
        let r: [u32; 5] = std::array::from_fn(|j| residues[j][i]);
        tau[i + 1] = crt.reconstruct(&r, check[i]).ok_or(Error::Reconstruction { n: i + 1 })?;
    }
    Ok(tau)
}

/// λ_Δ(n) = τ(n)/n^{11/2} for `1 <= n <= n_max`.
pub fn expand_delta_coefficients(n_max: usize) -> Result<EigenformCoefficients> {
    let tau = tau_exact(n_max)?;
    let mut lambda = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        let x = n as f64;
        lambda[n] = tau[n] as f64 / (x.powi(5) * x.sqrt());
    }
    lambda[1] = 1.0;
    Ok(EigenformCoefficients { weight: 12, lambda })
}

/// Fills λ(n) for composite n from prime eigenvalues by multiplicativity and
/// the Hecke recursion at prime powers.
pub fn coefficients_from_prime_eigenvalues(
    weight: u32,
    prime_lambdas: &BTreeMap<u64, f64>,
    n_max: usize,
) -> Result<EigenformCoefficients> {
    check_weight(weight)?;
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let spf = SmallestPrimeFactor::new(n_max);
    let mut lambda = vec![0.0; n_max + 1];
    lambda[1] = 1.0;
    for n in 2..=n_max {
        let p = spf.get(n) as usize;
        if p == n {
            let v = *prime_lambdas.get(&(p as u64)).ok_or(Error::MissingPrime(p as u64))?;
            if !(v.abs() <= 2.0) {
                return Err(Error::DeligneViolation { p: p as u64, value: v });
            }
            lambda[n] = v;
            continue;
        }
        let mut pe = p;
        while (n / pe) % p == 0 {
            pe *= p;
        }
        let m = n / pe;
        lambda[n] = if m > 1 {
            lambda[pe] * lambda[m]
        } else {
            lambda[p] * lambda[n / p] - lambda[n / (p * p)]
        };
    }
    Ok(EigenformCoefficients { weight, lambda })
}

/// d(n) for `0..=n_max` (index 0 holds 0).
pub fn divisor_counts(n_max: usize) -> Vec<u32> {
    arith::divisor_count_table(n_max)
}
