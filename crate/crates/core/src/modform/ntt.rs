//! Exact truncated power-series arithmetic over Z via number-theoretic
//! transforms modulo several word-size primes and Chinese remaindering.

/// Reconstruction moduli: all `< 2^31`, each with 2-adic order ≥ 23.
pub(crate) const MODULI: [u32; 5] = [998_244_353, 167_772_161, 469_762_049, 754_974_721, 2_013_265_921];
/// Independent modulus used only to verify each reconstructed coefficient.
pub(crate) const CHECK_MODULUS: u32 = 1_811_939_329;
/// Largest supported transform length (2-adic order of 998244353).
pub(crate) const MAX_LOG_LEN: u32 = 23;

/// Montgomery arithmetic modulo an odd prime `p < 2^31`.
#[derive(Debug, Clone, Copy)]
struct Mont {
    p: u32,
    neg_inv: u32,
    r2: u32,
}

impl Mont {
    fn new(p: u32) -> Self {
        let mut inv = p;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u32.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r2 = ((1u128 << 64) % p as u128) as u32;
        Self { p, neg_inv: inv.wrapping_neg(), r2 }
    }

    #[inline(always)]
    fn reduce(&self, t: u64) -> u32 {
        let m = (t as u32).wrapping_mul(self.neg_inv);
        let u = ((t + m as u64 * self.p as u64) >> 32) as u32;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    fn mul(&self, a: u32, b: u32) -> u32 {
        self.reduce(a as u64 * b as u64)
    }

    #[inline(always)]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn to_mont(&self, a: u32) -> u32 {
        self.reduce(a as u64 * self.r2 as u64)
    }

    fn from_mont(&self, a: u32) -> u32 {
        self.reduce(a as u64)
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn primitive_root(p: u32) -> u32 {
    let factors: Vec<u64> = crate::arith::factorize(p as u64 - 1).into_iter().map(|(q, _)| q).collect();
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g as u64, (p as u64 - 1) / q, p as u64) != 1))
        .expect("prime has a primitive root")
}

/// Transform plan for one prime and one power-of-two length.
pub(crate) struct Ntt {
    mont: Mont,
    n: usize,
    roots: Vec<u32>,
    inv_roots: Vec<u32>,
    n_inv: u32,
}

impl Ntt {
    pub(crate) fn new(p: u32, n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2);
        assert_eq!((p as u64 - 1) % n as u64, 0, "length {n} unsupported modulo {p}");
        let mont = Mont::new(p);
        let g = primitive_root(p) as u64;
        let w = pow_mod(g, (p as u64 - 1) / n as u64, p as u64);
        let w_inv = pow_mod(w, p as u64 - 2, p as u64);
        // roots[len + j] = ω_{2len}^j for len = 1, 2, 4, ..., n/2
        let mut roots = vec![0u32; n];
        let mut inv_roots = vec![0u32; n];
        let mut len = n / 2;
        let mut step = w;
        let mut step_inv = w_inv;
        while len >= 1 {
            let (ms, msi) = (mont.to_mont(step as u32), mont.to_mont(step_inv as u32));
            let (mut cur, mut cur_inv) = (mont.to_mont(1), mont.to_mont(1));
            for j in 0..len {
                roots[len + j] = cur;
                inv_roots[len + j] = cur_inv;
                cur = mont.mul(cur, ms);
                cur_inv = mont.mul(cur_inv, msi);
            }
            step = step * step % p as u64;
            step_inv = step_inv * step_inv % p as u64;
            len /= 2;
        }
        let n_inv = mont.to_mont(pow_mod(n as u64, p as u64 - 2, p as u64) as u32);
        Self { mont, n, roots, inv_roots, n_inv }
    }

    /// Decimation-in-frequency; natural order in, bit-reversed order out.
    fn forward(&self, a: &mut [u32]) {
        let m = &self.mont;
        let mut len = self.n / 2;
        while len >= 1 {
            let tw = &self.roots[len..2 * len];
            for block in a.chunks_exact_mut(2 * len) {
                let (lo, hi) = block.split_at_mut(len);
                for j in 0..len {
                    let u = lo[j];
                    let v = hi[j];
                    lo[j] = m.add(u, v);
                    hi[j] = m.mul(m.sub(u, v), tw[j]);
                }
            }
            len /= 2;
        }
    }

    /// Decimation-in-time inverse; bit-reversed order in, natural order out.
    fn inverse(&self, a: &mut [u32]) {
        let m = &self.mont;
        let mut len = 1;
        while len < self.n {
            let tw = &self.inv_roots[len..2 * len];
            for block in a.chunks_exact_mut(2 * len) {
                let (lo, hi) = block.split_at_mut(len);
                for j in 0..len {
                    let u = lo[j];
                    let v = m.mul(hi[j], tw[j]);
                    lo[j] = m.add(u, v);
                    hi[j] = m.sub(u, v);
                }
            }
            len *= 2;
        }
        for x in a.iter_mut() {
            *x = m.mul(*x, self.n_inv);
        }
    }

    fn transform_of(&self, poly: &[u32]) -> Vec<u32> {
        let mut a = vec![0u32; self.n];
        a[..poly.len()].copy_from_slice(poly);
        self.forward(&mut a);
        a
    }

    /// Pointwise product of two transforms, inverted and truncated to `len`.
    fn product_from_transforms(&self, fa: &[u32], fb: &[u32], len: usize) -> Vec<u32> {
        let m = &self.mont;
        let mut c: Vec<u32> = fa.iter().zip(fb).map(|(&x, &y)| m.mul(x, y)).collect();
        self.inverse(&mut c);
        c.truncate(len);
        c
    }
}

/// Residues modulo `p` of the first `len` coefficients of `series^24`,
/// where `series` has integer coefficients in {−1, 0, 1}.
pub(crate) fn pow24_mod(series: &[i8], p: u32) -> Vec<u32> {
    let len = series.len();
    let n = (2 * len - 1).next_power_of_two().max(2);
    let plan = Ntt::new(p, n);
    let m = &plan.mont;
    let one = m.to_mont(1);
    let minus_one = m.to_mont(p - 1);
    let e: Vec<u32> = series
        .iter()
        .map(|&c| match c {
            1 => one,
            -1 => minus_one,
            _ => 0,
        })
        .collect();
    let square = |a: &[u32]| {
        let fa = plan.transform_of(a);
        plan.product_from_transforms(&fa, &fa, len)
    };
    let e2 = square(&e);
    let e4 = square(&e2);
    let e8 = square(&e4);
    let f8 = plan.transform_of(&e8);
    let e16 = plan.product_from_transforms(&f8, &f8, len);
    let f16 = plan.transform_of(&e16);
    let e24 = plan.product_from_transforms(&f16, &f8, len);
    e24.into_iter().map(|x| m.from_mont(x)).collect()
}

/// Chinese remaindering of residues modulo [`MODULI`] into the signed
/// representative of least absolute value. Returns `None` when the value
/// disagrees with `check` modulo [`CHECK_MODULUS`].
pub(crate) struct Crt {
    inv: [[u64; 5]; 5],
    prefix_wrapped: [u128; 5],
    modulus_wrapped: u128,
}

impl Crt {
    pub(crate) fn new() -> Self {
        let mut inv = [[0u64; 5]; 5];
        for i in 0..5 {
            for j in 0..i {
                let mi = MODULI[i] as u64;
                inv[j][i] = pow_mod(MODULI[j] as u64 % mi, mi - 2, mi);
            }
        }
        let mut prefix_wrapped = [0u128; 5];
        let mut acc = 1u128;
        for i in 0..5 {
            prefix_wrapped[i] = acc;
            acc = acc.wrapping_mul(MODULI[i] as u128);
        }
        Self { inv, prefix_wrapped, modulus_wrapped: acc }
    }

    pub(crate) fn reconstruct(&self, residues: &[u32; 5], check: u32) -> Option<i128> {
        let mut digits = [0u64; 5];
        for i in 0..5 {
            let mi = MODULI[i] as u64;
            let mut t = residues[i] as u64;
            for j in 0..i {
                t = (t + mi - digits[j] % mi) % mi * self.inv[j][i] % mi;
            }
            digits[i] = t;
        }
        let mut x = 0u128;
        for i in 0..5 {
            x = x.wrapping_add((digits[i] as u128).wrapping_mul(self.prefix_wrapped[i]));
        }
        // x / M as a float decides whether the representative is negative
        let mut frac = 0.0f64;
        for i in 0..5 {
            let mut denom = 1.0f64;
            for &m in &MODULI[i..] {
                denom *= m as f64;
            }
            frac += digits[i] as f64 / denom;
        }
        if frac > 0.5 {
            x = x.wrapping_sub(self.modulus_wrapped);
        }
        let value = x as i128;
        let c = CHECK_MODULUS as i128;
        (value.rem_euclid(c) == check as i128).then_some(value)
    }
}
