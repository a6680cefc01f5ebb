//! Complex log-gamma (Lanczos, g = 7) and the regularized upper incomplete
//! gamma function Q(a, x) = Γ(a, x)/Γ(a) for complex a and real x ≥ 0.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(z)` for complex `z` away from the non-positive integers. The branch
/// of the imaginary part is not normalized; only `exp` of the result and
/// differences of nearby values are meaningful.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // reflection: Γ(z)Γ(1−z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + LN_SQRT_2PI + x.ln()
}

pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).re
}

/// True if `z` is within `tol` of a pole of Γ.
pub fn near_gamma_pole(z: Complex64, tol: f64) -> bool {
    z.re < 0.5 && z.im.abs() < tol && (z.re - z.re.round()).abs() < tol
}

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
pub const MAX_CF_ITERATIONS: usize = 10_000;

/// Regularized upper incomplete gamma Q(a, x) for `Re a > 0`, `x ≥ 0`.
///
/// Uses the power series for γ(a, x) when `x < |a| + 1` and the Lentz
/// continued fraction for Γ(a, x) otherwise.
pub fn gamma_q(a: Complex64, x: f64) -> Result<Complex64> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::invalid(format!("incomplete gamma argument x={x}")));
    }
    if x == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a.norm() + 1.0 {
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..MAX_CF_ITERATIONS {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.norm() < sum.norm() * EPS {
                return Ok(1.0 - sum * prefactor.exp());
            }
        }
        Err(Error::Convergence { what: "incomplete gamma series", iterations: MAX_CF_ITERATIONS })
    } else {
        let mut b = Complex64::new(x + 1.0, 0.0) - a;
        let mut c = Complex64::new(1.0 / TINY, 0.0);
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_CF_ITERATIONS {
            let an = -(i as f64) * (Complex64::new(i as f64, 0.0) - a);
            b += 2.0;
            d = an * d + b;
            if d.norm() < TINY {
                d = Complex64::new(TINY, 0.0);
            }
            c = b + an / c;
            if c.norm() < TINY {
                c = Complex64::new(TINY, 0.0);
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).norm() < EPS {
                return Ok(h * prefactor.exp());
            }
        }
        Err(Error::Convergence { what: "incomplete gamma continued fraction", iterations: MAX_CF_ITERATIONS })
    }
}

/// Real-parameter convenience wrapper around [`gamma_q`].
pub fn gamma_q_real(a: f64, x: f64) -> Result<f64> {
    Ok(gamma_q(Complex64::new(a, 0.0), x)?.re)
}
