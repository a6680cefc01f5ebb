//! Elementary sieves and factorization used throughout the crate.

/// All primes `p <= limit`, ascending.
pub fn primes_up_to(limit: usize) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::with_capacity(limit / 10 + 16);
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Smallest-prime-factor table for `0..=limit` (entries 0 and 1 are 0 and 1).
#[derive(Debug, Clone)]
pub struct SmallestPrimeFactor {
    spf: Vec<u32>,
}

impl SmallestPrimeFactor {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        if limit >= 1 {
            spf[1] = 1;
        }
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Self { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    #[inline]
    pub fn get(&self, n: usize) -> u32 {
        self.spf[n]
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    /// Prime-power factorization `[(p, e)]` of `1 <= n <= limit`.
    pub fn factorize(&self, mut n: usize) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        out
    }
}

/// Trial-division factorization, for one-off use on moderately sized inputs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize(n).iter().all(|&(_, e)| e == 1)
}

/// `flags[n]` is true iff n is squarefree, for `0..=limit` (0 is not).
pub fn squarefree_flags(limit: usize) -> Vec<bool> {
    let mut flags = vec![true; limit + 1];
    flags[0] = false;
    let mut p = 2usize;
    while p * p <= limit {
        let q = p * p;
        let mut j = q;
        while j <= limit {
            flags[j] = false;
            j += q;
        }
        p += 1;
    }
    flags
}

/// Number of divisors d(n) for `0..=limit` (index 0 holds 0).
pub fn divisor_count_table(limit: usize) -> Vec<u32> {
    let mut d = vec![0u32; limit + 1];
    for i in 1..=limit {
        let mut j = i;
        while j <= limit {
            d[j] += 1;
            j += i;
        }
    }
    d
}

/// Euler's totient of `p^e`.
pub fn phi_prime_power(p: u64, e: u32) -> u64 {
    if e == 0 {
        1
    } else {
        p.pow(e - 1) * (p - 1)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// The constant C_δ = sup_n d(n)/n^δ, as the finite Euler product
/// ∏_{p < 2^{1/δ}} max_e (e+1)/p^{eδ}.
pub fn divisor_bound_constant(delta: f64) -> f64 {
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    let limit = 2f64.powf(1.0 / delta).ceil() as usize;
    let mut c = 1.0;
    for p in primes_up_to(limit) {
        let pd = (p as f64).powf(delta);
        if pd >= 2.0 {
            continue;
        }
        let mut best = 1.0f64;
        let mut e = 1u32;
        loop {
            let v = (e + 1) as f64 / pd.powi(e as i32);
            if v < best {
                break;
            }
            best = v;
            e += 1;
        }
        c *= best;
    }
    c
}
