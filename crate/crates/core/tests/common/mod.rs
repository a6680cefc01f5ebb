//! Reference implementations used only by the tests. None of them share code
//! with the library beyond the public types.

#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;
use twm_core::modform::{expand_delta_coefficients, EigenformCoefficients};

/// Δ's coefficient table, expanded once per test binary.
pub fn delta(n_max: usize) -> EigenformCoefficients {
    static TABLE: OnceLock<EigenformCoefficients> = OnceLock::new();
    const SHARED: usize = 1 << 18;
    if n_max <= SHARED {
        TABLE.get_or_init(|| expand_delta_coefficients(SHARED).unwrap()).truncated(n_max).unwrap()
    } else {
        expand_delta_coefficients(n_max).unwrap()
    }
}

/// τ(1..=n_max) from q∏(1−qⁿ)^24 with schoolbook series products.
pub fn tau_schoolbook(n_max: usize) -> Vec<i128> {
    let len = n_max; // coefficients of q^0..q^{n_max−1}
    let mut euler = vec![0i128; len];
    euler[0] = 1;
    for n in 1..len {
        for j in (n..len).rev() {
            euler[j] -= euler[j - n];
        }
    }
    let mut power = vec![0i128; len];
    power[0] = 1;
    for _ in 0..24 {
        let mut next = vec![0i128; len];
        for (i, &a) in power.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in euler[..len - i].iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        power = next;
    }
    let mut tau = vec![0i128; n_max + 1];
    tau[1..].copy_from_slice(&power);
    tau
}

/// a^e mod m.
fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * a as u128 % m as u128) as u64;
        }
        a = (a as u128 * a as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Legendre symbol by Euler's criterion.
pub fn legendre(a: i64, p: u64) -> i32 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Kronecker symbol from the definition: factor n and multiply the local symbols.
pub fn kronecker_by_definition(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result = 1;
    if n < 0 && a < 0 {
        result = -1;
    }
    for p in prime_factors(n.unsigned_abs()) {
        let local = if p == 2 {
            match a.rem_euclid(8) {
                1 | 7 => 1,
                3 | 5 => -1,
                _ => 0,
            }
        } else {
            legendre(a, p)
        };
        result *= local;
    }
    result
}

/// ln Γ(z) for Re z > 0 by upward recurrence and the Stirling series.
pub fn ln_gamma_stirling(z: Complex64) -> Complex64 {
    // B_{2k}/(2k(2k−1))
    const COEFFS: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
    ];
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < 25.0 {
        shift += z.ln();
        z += 1.0;
    }
    let mut series = Complex64::new(0.0, 0.0);
    let z2 = z * z;
    let mut zp = z;
    for c in COEFFS {
        series += c / zp;
        zp *= z2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

/// W(x) = (1/2πi) ∫_{(c)} Γ(a+s)/Γ(a) (2πx)^{−s} ds/s by the trapezoid rule
/// on the vertical line Re s = c.
pub fn kernel_by_contour(a: Complex64, x: f64) -> Complex64 {
    let c = 1.0;
    let h = 0.02;
    let t_max = 120.0;
    let lg_a = ln_gamma_stirling(a);
    let log_2pix = (2.0 * PI * x).ln();
    let steps = (t_max / h) as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in -steps..=steps {
        let s = Complex64::new(c, j as f64 * h);
        let v = (ln_gamma_stirling(a + s) - lg_a - s * log_2pix).exp() / s;
        acc += v;
    }
    // ds = i dt, and 1/(2πi) · i = 1/(2π)
    acc * h / (2.0 * PI)
}

/// λ(p^j) for j = 0..=len from the Hecke recursion.
pub fn prime_power_eigenvalues(lambda_p: f64, len: usize) -> Vec<f64> {
    let mut out = vec![1.0, lambda_p];
    while out.len() <= len {
        let j = out.len();
        out.push(lambda_p * out[j - 1] - out[j - 2]);
    }
    out.truncate(len + 1);
    out
}

/// Σ_{j₁+j₂ even} λ(p^{j₁})λ(p^{j₂}) p^{−j₁(½+u)−j₂(½+v)} with the weight
/// p/(p+1) on every term but the constant one.
pub fn z_local_series(p: u64, lambda_p: f64, u: Complex64, v: Complex64) -> Complex64 {
    let terms = 240;
    let lam = prime_power_eigenvalues(lambda_p, terms);
    let pf = p as f64;
    let xu = Complex64::new(pf, 0.0).powc(-(0.5 + u));
    let xv = Complex64::new(pf, 0.0).powc(-(0.5 + v));
    let weight = pf / (pf + 1.0);
    let mut total = Complex64::new(0.0, 0.0);
    let mut pu = Complex64::new(1.0, 0.0);
    for j1 in 0..=terms {
        let mut pv = Complex64::new(1.0, 0.0);
        for j2 in 0..=terms {
            if (j1 + j2) % 2 == 0 {
                let w = if j1 + j2 == 0 { 1.0 } else { weight };
                total += w * lam[j1] * lam[j2] * pu * pv;
            }
            pv *= xv;
        }
        pu *= xu;
    }
    total
}

/// Local factor of L(s, sym²f) from ζ(2s) Σ_j λ(p^{2j}) p^{−js}.
pub fn sym2_local_series(p: u64, lambda_p: f64, s: Complex64) -> Complex64 {
    let terms = 200;
    let lam = prime_power_eigenvalues(lambda_p, 2 * terms);
    let x = Complex64::new(p as f64, 0.0).powc(-s);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut xp = Complex64::new(1.0, 0.0);
    for j in 0..=terms {
        sum += lam[2 * j] * xp;
        xp *= x;
    }
    sum / (1.0 - x * x)
}

/// G_k(n) straight from its definition with exact integer phase reduction.
pub fn gauss_sum_by_definition(k: i64, n: u64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for a in 0..n {
        let chi = kronecker_by_definition(a as i64, n as i64);
        if chi != 0 {
            let r = (a as i128 * k as i128).rem_euclid(n as i128) as f64;
            s += chi as f64 * Complex64::from_polar(1.0, 2.0 * PI * r / n as f64);
        }
    }
    let minus_one = kronecker_by_definition(-1, n as i64) as f64;
    let c = Complex64::new(0.5, -0.5) + minus_one * Complex64::new(0.5, 0.5);
    c * s
}

/// Fundamental discriminants by the definition: d ≡ 1 (mod 4) squarefree, or
/// d = 4m with m ≡ 2, 3 (mod 4) squarefree.
pub fn is_fundamental_by_definition(d: i64) -> bool {
    let squarefree = |m: i64| {
        let m = m.unsigned_abs();
        m != 0 && (2..).take_while(|p| p * p <= m).all(|p| m % (p * p) != 0)
    };
    if d.rem_euclid(4) == 1 {
        squarefree(d)
    } else if d % 4 == 0 {
        let m = d / 4;
        matches!(m.rem_euclid(4), 2 | 3) && squarefree(m)
    } else {
        false
    }
}
