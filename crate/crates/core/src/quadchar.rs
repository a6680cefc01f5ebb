//! Quadratic characters, fundamental discriminants, the Gauss-type sums
//! G_k(n), and a numerical check of the twisted Poisson summation formula.

use crate::arith::{self, phi_prime_power};
use crate::bump::Bump;
use crate::error::{Error, Result};
use crate::quadrature;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// The Kronecker symbol (a/n). Returns 0 for `a = n = 0`.
pub fn kronecker_symbol(a: i64, n: i64) -> i32 {
    const TAB2: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    let mut a = a as i128;
    let mut n = n as i128;
    if n == 0 {
        return (a.abs() == 1) as i32;
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let v = n.trailing_zeros();
    n >>= v;
    let mut k = if v % 2 == 0 { 1 } else { TAB2[(a & 7) as usize] };
    if n < 0 {
        n = -n;
        if a < 0 {
            k = -k;
        }
    }
    // n is now odd and positive
    loop {
        if a == 0 {
            return if n == 1 { k } else { 0 };
        }
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 {
            k *= TAB2[(n & 7) as usize];
        }
        if a & n & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = n % r;
        n = r;
    }
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 {
        return false;
    }
    let r = d.rem_euclid(4);
    if r == 1 {
        return arith::is_squarefree(d.unsigned_abs());
    }
    if r == 0 {
        let m = d / 4;
        let rm = m.rem_euclid(4);
        return (rm == 2 || rm == 3) && arith::is_squarefree(m.unsigned_abs());
    }
    false
}

/// A twist 8d with d odd, squarefree and positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TwistDiscriminant {
    d_odd: u64,
}

impl TwistDiscriminant {
    pub fn new(d_odd: u64) -> Result<Self> {
        if d_odd == 0 || d_odd % 2 == 0 || !arith::is_squarefree(d_odd) {
            return Err(Error::invalid(format!("d={d_odd} is not an odd squarefree positive integer")));
        }
        Ok(Self { d_odd })
    }

    pub fn d_odd(&self) -> u64 {
        self.d_odd
    }

    /// The fundamental discriminant 8d.
    pub fn value(&self) -> u64 {
        8 * self.d_odd
    }
}

/// All odd squarefree d with 8d ≤ X, ascending.
pub fn enumerate_twists(x: f64) -> Result<Vec<TwistDiscriminant>> {
    if !(x >= 8.0) || !x.is_finite() {
        return Err(Error::invalid(format!("X must be at least 8, got {x}")));
    }
    let dmax = (x / 8.0).floor() as usize;
    let flags = arith::squarefree_flags(dmax);
    Ok((1..=dmax).step_by(2).filter(|&d| flags[d]).map(|d| TwistDiscriminant { d_odd: d as u64 }).collect())
}

/// Fast evaluation of χ_{8d}(n) = (8d/n) for a fixed twist.
///
/// For odd n, (8d/n) = (2/n)(n/d)·(−1)^{[n ≡ d ≡ 3 mod 4]}, and (n/d) is read
/// from a table of residues mod d built from Legendre symbols of d's primes.
#[derive(Debug, Clone)]
pub struct TwistCharacter {
    d: u64,
    jacobi: Vec<i8>,
}

impl TwistCharacter {
    pub fn new(t: TwistDiscriminant) -> Self {
        let d = t.d_odd as usize;
        let mut jacobi = vec![1i8; d];
        if d > 1 {
            for (p, _) in arith::factorize(d as u64) {
                let p = p as usize;
                let mut legendre = vec![-1i8; p];
                legendre[0] = 0;
                for x in 1..=p / 2 {
                    legendre[x * x % p] = 1;
                }
                for (r, j) in jacobi.iter_mut().enumerate() {
                    *j *= legendre[r % p];
                }
            }
        }
        Self { d: t.d_odd, jacobi }
    }

    #[inline]
    pub fn eval(&self, n: u64) -> i32 {
        if n % 2 == 0 {
            return 0;
        }
        let mut s = self.jacobi[(n % self.d) as usize] as i32;
        if n % 8 == 3 || n % 8 == 5 {
            s = -s;
        }
        if n % 4 == 3 && self.d % 4 == 3 {
            s = -s;
        }
        s
    }

    pub fn d_odd(&self) -> u64 {
        self.d
    }

    /// Jacobi symbols (r/d) for `0 <= r < d`.
    pub fn jacobi_table(&self) -> &[i8] {
        &self.jacobi
    }

    /// χ(n) for `n = 0..len` as a dense table.
    pub fn table(&self, len: usize) -> Vec<i8> {
        (0..len as u64).map(|n| self.eval(n) as i8).collect()
    }
}

/// p-adic valuation of k, with k = 0 having infinite valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn of(k: i64, p: u64) -> Self {
        if k == 0 {
            return Valuation::Infinite;
        }
        let mut k = k.unsigned_abs();
        let mut a = 0;
        while k % p == 0 {
            k /= p;
            a += 1;
        }
        Valuation::Finite(a)
    }
}

fn check_odd_modulus(n: i64) -> Result<u64> {
    if n <= 0 || n % 2 == 0 {
        return Err(Error::invalid(format!("Gauss sums need an odd positive modulus, got n={n}")));
    }
    Ok(n as u64)
}

/// G_k(p^β) from the prime-power case table.
fn gauss_sum_prime_power(k: i64, p: u64, beta: u32) -> Complex64 {
    let real = |x: f64| Complex64::new(x, 0.0);
    match Valuation::of(k, p) {
        Valuation::Infinite => {
            if beta % 2 == 0 {
                real(phi_prime_power(p, beta) as f64)
            } else {
                real(0.0)
            }
        }
        Valuation::Finite(alpha) => {
            if beta <= alpha {
                if beta % 2 == 0 {
                    real(phi_prime_power(p, beta) as f64)
                } else {
                    real(0.0)
                }
            } else if beta == alpha + 1 {
                let pa = (p as f64).powi(alpha as i32);
                if beta % 2 == 0 {
                    real(-pa)
                } else {
                    let unit = k / p.pow(alpha) as i64;
                    real(kronecker_symbol(unit, p as i64) as f64 * pa * (p as f64).sqrt())
                }
            } else {
                real(0.0)
            }
        }
    }
}

/// G_k(n) by multiplicativity over the prime powers exactly dividing n.
pub fn gauss_sum_closed_form(k: i64, n: i64) -> Result<Complex64> {
    let n = check_odd_modulus(n)?;
    Ok(arith::factorize(n)
        .into_iter()
        .fold(Complex64::new(1.0, 0.0), |acc, (p, beta)| acc * gauss_sum_prime_power(k, p, beta)))
}

pub const BRUTEFORCE_MAX_MODULUS: u64 = 1_000_000;

/// G_k(n) by direct summation over residues a mod n.
pub fn gauss_sum_bruteforce(k: i64, n: i64) -> Result<Complex64> {
    let n = check_odd_modulus(n)?;
    if n > BRUTEFORCE_MAX_MODULUS {
        return Err(Error::invalid(format!("brute-force Gauss sum limited to n <= {BRUTEFORCE_MAX_MODULUS}")));
    }
    let kr = k.rem_euclid(n as i64) as u64;
    let mut re = crate::summation::Neumaier::new();
    let mut im = crate::summation::Neumaier::new();
    for a in 1..n {
        let chi = kronecker_symbol(a as i64, n as i64);
        if chi == 0 {
            continue;
        }
        let r = (a as u128 * kr as u128 % n as u128) as f64;
        let theta = 2.0 * PI * r / n as f64;
        re.add(chi as f64 * theta.cos());
        im.add(chi as f64 * theta.sin());
    }
    if n == 1 {
        // the single residue class a = 0 has (0/1) = 1
        re.add(1.0);
    }
    let s = Complex64::new(re.value(), im.value());
    // (1−i)/2 + (−1/n)(1+i)/2 is 1 when (−1/n) = 1 and −i otherwise
    let c = if kronecker_symbol(-1, n as i64) == 1 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, -1.0) };
    Ok(c * s)
}

/// Both sides of the twisted Poisson summation formula for one (n, Z, F).
#[derive(Debug, Clone, Serialize)]
pub struct PoissonCheck {
    pub n: u64,
    pub z: f64,
    pub function: Bump,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Largest |k| used on the dual side.
    pub k_max: u64,
}

const TRANSFORM_TOL: f64 = 1e-12;
const MAX_DUAL_K: u64 = 1 << 16;

/// Cos + sin transform of a catalog bump at ±y, computed from one complex
/// integral: with C + iS = ∫F(x)e(xy)dx, F̂(y) = C + S and F̂(−y) = C − S.
pub fn bump_transform_pair(f: Bump, y: f64) -> Result<(f64, f64)> {
    let w = 2.0 * PI * y;
    let v = quadrature::integrate(
        |x| Complex64::from_polar(f.eval(x), w * x),
        0.0,
        f.support_end(),
        TRANSFORM_TOL,
    )?;
    Ok((v.re + v.im, v.re - v.im))
}

/// Returns the two sides of the identity and |LHS − RHS|. The dual sum runs
/// up to the frequency where F̂ is negligible, and the last transform is
/// checked to be zero to quadrature accuracy.
pub fn poisson_identity_check(n: i64, z: f64, f: Bump) -> Result<PoissonCheck> {
    let n = check_odd_modulus(n)?;
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::invalid(format!("Z must be positive, got {z}")));
    }
    let ni = n as i64;
    let mut lhs = crate::summation::Neumaier::new();
    let dmax = (z * f.support_end()).ceil() as i64;
    for d in (1..=dmax).step_by(2) {
        let chi = kronecker_symbol(d, ni);
        if chi != 0 {
            lhs.add(chi as f64 * f.eval(d as f64 / z));
        }
    }
    let lhs = lhs.value();

    let scale = z / (2.0 * n as f64) * kronecker_symbol(2, ni) as f64;
    let mut transforms: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let mut term = |k: u64| -> Result<(f64, f64)> {
        let (plus, minus) = match transforms.get(&k) {
            Some(&v) => v,
            None => {
                let v = bump_transform_pair(f, k as f64 * z / (2.0 * n as f64))?;
                transforms.insert(k, v);
                v
            }
        };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let gp = gauss_sum_closed_form(k as i64, ni)?;
        let gm = gauss_sum_closed_form(-(k as i64), ni)?;
        let value = if k == 0 { gp * plus } else { sign * (gp * plus + gm * minus) };
        // G_k(n) is real or purely imaginary; the identity is between real numbers
        Ok((value.re, plus.abs() + minus.abs()))
    };

    // the dual sum stops where the transform has decayed below e^{−50}
    let k_max = (f.negligible_frequency() * 2.0 * n as f64 / z).ceil() as u64;
    if k_max > MAX_DUAL_K {
        return Err(Error::invalid(format!("dual sum needs {k_max} terms at n={n}, Z={z}")));
    }
    let mut rhs = crate::summation::Neumaier::new();
    let mut last = 0.0;
    for k in 0..=k_max {
        let (v, size) = term(k)?;
        rhs.add(v);
        last = size;
    }
    if last > 2.0 * TRANSFORM_TOL {
        return Err(Error::Convergence { what: "dual Poisson sum", iterations: k_max as usize });
    }
    let rhs = scale * rhs.value();
    Ok(PoissonCheck { n, z, function: f, lhs, rhs, residual: (lhs - rhs).abs(), k_max })
}
