mod common;

use common::{gauss_sum_by_definition, kronecker_by_definition};
use num_complex::Complex64;
use proptest::prelude::*;
use twm_core::bump::Bump;
use twm_core::quadchar::*;

#[test]
fn kronecker_matches_definition() {
    for a in -60..=60 {
        for n in -60..=60 {
            assert_eq!(kronecker_symbol(a, n), kronecker_by_definition(a, n), "({a}/{n})");
        }
    }
}

#[test]
fn kronecker_multiplicative_in_numerator() {
    for n in (1..=99).step_by(2) {
        for a in 1..=99 {
            for b in 1..=99 {
                assert_eq!(kronecker_symbol(a * b, n), kronecker_symbol(a, n) * kronecker_symbol(b, n));
            }
        }
    }
}

#[test]
fn twist_character_is_kronecker_8d() {
    for d in enumerate_twists(8.0 * 301.0).unwrap() {
        let chi = TwistCharacter::new(d);
        for n in 0..400u64 {
            assert_eq!(chi.eval(n), kronecker_by_definition(d.value() as i64, n as i64), "8d={} n={n}", d.value());
        }
    }
}

#[test]
fn twist_enumeration() {
    let t = enumerate_twists(8.0).unwrap();
    assert_eq!(t.len(), 1);
    assert_eq!(t[0].value(), 8);
    let t: Vec<u64> = enumerate_twists(200.0).unwrap().iter().map(|d| d.d_odd()).collect();
    assert_eq!(t, vec![1, 3, 5, 7, 11, 13, 15, 17, 19, 21, 23]);
    for d in enumerate_twists(4000.0).unwrap() {
        assert!(is_fundamental_discriminant(d.value() as i64));
    }
    assert!(enumerate_twists(7.9).is_err());
    assert!(TwistDiscriminant::new(9).is_err());
    assert!(TwistDiscriminant::new(4).is_err());
}

#[test]
fn fundamental_discriminant_count() {
    // 3/π² X of each sign, roughly
    let x = 20_000i64;
    let count = (-x..=x).filter(|&d| is_fundamental_discriminant(d)).count() as f64;
    let expected = 6.0 / (std::f64::consts::PI.powi(2)) * x as f64;
    assert!((count / expected - 1.0).abs() < 0.02, "{count} vs {expected}");
}

#[test]
fn gauss_sums_match_definition() {
    for n in (1..=151).step_by(2) {
        for k in -20..=20 {
            let want = gauss_sum_by_definition(k, n as u64);
            let closed = gauss_sum_closed_form(k, n).unwrap();
            let brute = gauss_sum_bruteforce(k, n).unwrap();
            assert!((closed - want).norm() < 1e-9 * (1.0 + n as f64), "k={k} n={n}: {closed} vs {want}");
            assert!((brute - want).norm() < 1e-9 * (1.0 + n as f64), "k={k} n={n}");
        }
    }
}

#[test]
fn gauss_sum_special_values() {
    // G_0(n) = φ(n) for square n, 0 otherwise
    assert_eq!(gauss_sum_closed_form(0, 9).unwrap(), Complex64::new(6.0, 0.0));
    assert_eq!(gauss_sum_closed_form(0, 15).unwrap(), Complex64::new(0.0, 0.0));
    // G_1(p) = √p for an odd prime
    for p in [3i64, 5, 7, 11, 13] {
        assert!((gauss_sum_closed_form(1, p).unwrap() - (p as f64).sqrt()).norm() < 1e-12);
    }
    assert!(gauss_sum_closed_form(1, 4).is_err());
    assert!(gauss_sum_bruteforce(1, -3).is_err());
}

#[test]
fn transforms_vanish_past_the_dual_cutoff() {
    for f in Bump::ALL {
        let y = f.negligible_frequency();
        let (plus, minus) = bump_transform_pair(f, y).unwrap();
        assert!(plus.abs() < 1e-13 && minus.abs() < 1e-13, "{f}: {plus} {minus}");
        // and the transform is still visible well below it
        let (near, _) = bump_transform_pair(f, y / 16.0).unwrap();
        assert!(near.abs() > 1e-12, "{f}: {near}");
    }
}

#[test]
fn poisson_identity_small_cases() {
    for f in Bump::ALL {
        for n in [1i64, 3, 15, 21] {
            let c = poisson_identity_check(n, 100.0, f).unwrap();
            assert!(c.residual < 1e-8, "{c:?}");
            assert!((c.lhs - c.rhs).abs() == c.residual);
        }
    }
}

proptest! {
    #[test]
    fn jacobi_is_periodic(a in -10_000i64..10_000, n in 0i64..500) {
        let n = 2 * n + 1;
        prop_assert_eq!(kronecker_symbol(a, n), kronecker_symbol(a + n, n));
    }

    #[test]
    fn kronecker_multiplicative_in_denominator(a in -500i64..500, m in 1i64..300, n in 1i64..300) {
        prop_assert_eq!(kronecker_symbol(a, m * n), kronecker_symbol(a, m) * kronecker_symbol(a, n));
    }

    #[test]
    fn closed_form_is_multiplicative(k in -200i64..200, m in 0i64..40, n in 0i64..40) {
        let (m, n) = (2 * m + 1, 2 * n + 1);
        prop_assume!(twm_core::arith::gcd(m as u64, n as u64) == 1);
        let gm = gauss_sum_closed_form(k, m).unwrap();
        let gn = gauss_sum_closed_form(k, n).unwrap();
        let gmn = gauss_sum_closed_form(k, m * n).unwrap();
        prop_assert!((gm * gn - gmn).norm() < 1e-9 * (1.0 + (m * n) as f64));
    }
}
