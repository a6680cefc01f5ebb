mod common;

use common::{delta, is_fundamental_by_definition, kronecker_by_definition};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use twm_core::bump::{Bump, TestFunction};
use twm_core::eulerprod::MomentConstant;
use twm_core::kernel::{central_value, central_truncation};
use twm_core::modform::EigenformCoefficients;
use twm_core::moments::*;
use twm_core::quadchar::TwistDiscriminant;
use twm_core::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn table_for(x: f64) -> EigenformCoefficients {
    delta(central_truncation(12, x, DEFAULT_EPS).unwrap() + 1)
}

fn unit_constant() -> MomentConstant {
    MomentConstant::assemble(1.0, PI * PI / 2.0, 10_000, 0.0, 0.0)
}

fn odd_squarefree_up_to(limit: u64) -> Vec<u64> {
    (1..=limit).step_by(2).filter(|&d| (3..).step_by(2).take_while(|p| p * p <= d).all(|p| d % (p * p) != 0)).collect()
}

#[test]
fn smoothed_moment_matches_independent_resummation() {
    let x = 800.0;
    let coeffs = table_for(2.0 * x);
    let f = TestFunction::new(Bump::BumpB);
    let report = second_moment_smoothed(x, f, &coeffs, &unit_constant(), DEFAULT_EPS).unwrap();
    // largest discriminants first, plain accumulation
    let mut total = 0.0;
    let ds = odd_squarefree_up_to((2.0 * x / 8.0) as u64);
    for &d in ds.iter().rev() {
        let l = central_value(TwistDiscriminant::new(d).unwrap(), &coeffs, DEFAULT_EPS).unwrap().value.re;
        total += f.eval(8.0 * d as f64 / x) * l * l;
    }
    assert!((report.sum_l2 - total).abs() < 1e-12 * total, "{} vs {total}", report.sum_l2);
    assert_eq!(report.n_discriminants, ds.len());
    assert!((report.predicted - f.integral() * x * x.ln()).abs() < 1e-9 * report.predicted);
}

#[test]
fn smoothed_moment_is_linear_in_the_test_function() {
    let x = 2000.0;
    let coeffs = table_for(x);
    let k = unit_constant();
    let f = TestFunction::new(Bump::BumpA);
    let a = second_moment_smoothed(x, f, &coeffs, &k, DEFAULT_EPS).unwrap();
    let b = second_moment_smoothed(x, f.scaled(2.0), &coeffs, &k, DEFAULT_EPS).unwrap();
    assert!((b.sum_l2 - 2.0 * a.sum_l2).abs() < 1e-12 * b.sum_l2);
    assert!((b.predicted - 2.0 * a.predicted).abs() < 1e-12 * b.predicted);
    assert!((b.ratio - a.ratio).abs() < 1e-12);
}

#[test]
fn sharp_moment_counts_and_grows() {
    let coeffs = table_for(4000.0);
    let k = unit_constant();
    let one = second_moment_sharp(8.0, &coeffs, &k, DEFAULT_EPS).unwrap();
    assert_eq!(one.n_discriminants, 1);
    let mut last = 0.0;
    for x in [100.0, 500.0, 1000.0, 4000.0] {
        let r = second_moment_sharp(x, &coeffs, &k, DEFAULT_EPS).unwrap();
        assert_eq!(r.n_discriminants, odd_squarefree_up_to((x / 8.0) as u64).len());
        assert!(r.sum_l2 >= last);
        last = r.sum_l2;
    }
    let values = central_values(1000.0, &coeffs, DEFAULT_EPS).unwrap();
    assert!(values.iter().all(|v| v.value.im == 0.0));
}

#[test]
fn failing_twist_is_named() {
    let coeffs = delta(30);
    let err = second_moment_sharp(1000.0, &coeffs, &unit_constant(), DEFAULT_EPS).unwrap_err();
    match &err {
        Error::AtTwist { discriminant, .. } => assert!(*discriminant >= 8),
        other => panic!("{other:?}"),
    }
    assert!(matches!(err.root(), Error::Truncation { .. }));
}

#[test]
fn least_squares_slope_of_a_line() {
    let xs = [1.0, 2.0, 4.0, 7.0];
    let ys: Vec<f64> = xs.iter().map(|x| 3.5 * x - 2.0).collect();
    assert!((least_squares_slope(&xs, &ys) - 3.5).abs() < 1e-14);
}

#[test]
fn diagonal_term_with_only_the_constant_coefficient() {
    // λ(1) = 1, λ(n) = 0 otherwise: S(h) counts odd squarefree d weighted by F
    // and the main term is its density (4/π²)·X/8·∫F.
    let mut lambda = vec![0.0; 20_001];
    lambda[1] = 1.0;
    let coeffs = EigenformCoefficients::from_table(12, lambda).unwrap();
    for x in [2e4, 1e5] {
        let r = prop31_check(x, x.sqrt(), x.sqrt(), &coeffs).unwrap();
        assert!(r.rel_err < 0.01, "X={x}: {r:?}");
    }
}

#[test]
fn diagonal_term_is_symmetric_in_the_lengths() {
    let x = 2e4;
    let coeffs = table_for(x);
    let a = prop31_check(x, 100.0, 400.0, &coeffs).unwrap();
    let b = prop31_check(x, 400.0, 100.0, &coeffs).unwrap();
    assert!((a.lhs - b.lhs).abs() < 1e-12 * a.lhs.abs());
    assert!((a.rhs - b.rhs).abs() < 1e-12 * a.rhs.abs());
    assert!(matches!(prop31_check(x, x, 2.0 * x, &coeffs), Err(Error::Hypothesis(_))));
    assert!(prop31_check(2e5, 10.0, 10.0, &coeffs).is_err());
}

#[test]
fn mollifier_ratio_and_split() {
    let x = 4000.0;
    let coeffs = table_for(2.0 * x);
    let f = TestFunction::new(Bump::BumpB);
    for u in [x.sqrt(), x.powf(0.75), x] {
        let lb = lower_bound_ratio(x, u, f, &coeffs, DEFAULT_EPS).unwrap();
        assert!(lb.ratio > 0.0 && lb.ratio <= 1.0 + 1e-12, "{lb:?}");
        let ab = ab_split_sizes(x, u, f, &coeffs, DEFAULT_EPS).unwrap();
        assert!(ab.sum_a2 >= 0.0 && ab.sum_b2 >= 0.0);
        assert_eq!(ab.sum_a2, lb.sum_a2);
        // Σ(L−𝓐)² = ΣL² − 2ΣL𝓐 + Σ𝓐²
        let expanded = lb.sum_l2 - 2.0 * lb.sum_l_a + lb.sum_a2;
        assert!((ab.sum_b2 - expanded).abs() < 1e-9 * lb.sum_l2);
    }
    assert!(lower_bound_ratio(x, 2.0 * x, f, &coeffs, DEFAULT_EPS).is_err());
}

#[test]
fn tail_bound_regimes() {
    let x = 1e30f64;
    let ll = x.ln().ln();
    let lll = ll.ln();
    let sv = 4.0 * ll;
    assert_eq!(prop62_bound(1.0, x, sv).regime, None);
    // with log log log X < 16 the middle range (𝓥, 𝓥·lll/16] is empty
    assert!(sv * lll / 16.0 < sv);
    let r3 = prop62_bound(sv * 1.01, x, sv);
    assert_eq!(r3.regime, Some(3));
    let v = r3.v;
    assert!((r3.bound.unwrap() - x * (-v * v.ln() / 1025.0).exp()).abs() < 1e-9 * x);
    let big = 1000.0;
    let r1 = prop62_bound(30.0, x, big);
    assert_eq!(r1.regime, Some(1));
    assert!((r1.bound.unwrap() - x * (-900.0 / (2.0 * big) * (1.0 - 25.0 / lll)).exp()).abs() < 1e-9 * x);
}

#[test]
fn distribution_statistics_are_consistent() {
    let x = 2000.0;
    let coeffs = table_for(x);
    let shift = ShiftPair::central(x).unwrap();
    let t = distribution_stats(&shift, &coeffs, DEFAULT_EPS).unwrap();
    let logs: Vec<f64> = log_abs_products(&shift, &coeffs, DEFAULT_EPS).unwrap().into_iter().filter_map(|(_, v)| v).collect();
    assert_eq!(logs.len(), t.n_total - t.n_excluded);
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
    assert!((t.mean_emp - mean).abs() < 1e-10 && (t.var_emp - var).abs() < 1e-9);
    assert!(t.grid.windows(2).all(|w| w[0].1 >= w[1].1));
    for &(v, count) in &t.grid {
        assert_eq!(count, logs.iter().filter(|&&l| l >= v + t.script_m).count() as u64);
    }
    assert_eq!(t.bounds.len(), t.grid.len());
    assert!(distribution_stats(&ShiftPair::central(500.0).unwrap(), &coeffs, DEFAULT_EPS).is_err());
}

#[test]
fn shift_pair_domain() {
    let x = 1e4f64;
    let edge = 1.0 / x.ln();
    assert!(ShiftPair::new(c(edge, 3.0), c(0.0, -x), x).is_ok());
    assert!(ShiftPair::new(c(-1e-3, 0.0), c(0.0, 0.0), x).is_err());
    assert!(ShiftPair::new(c(edge * 1.01, 0.0), c(0.0, 0.0), x).is_err());
    assert!(ShiftPair::new(c(0.0, 0.0), c(0.0, x + 1.0), x).is_err());
    assert!(ShiftPair::central(5.0).is_err());
}

fn draw_coefficients(rng: &mut ChaCha8Rng, primes: &[u64]) -> BTreeMap<u64, Complex64> {
    primes.iter().map(|&p| (p, Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))).collect()
}

#[test]
fn poly_moment_first_power_by_character_sums() {
    let x = 4000.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let primes = [3u64, 5, 7];
    let a = draw_coefficients(&mut rng, &primes);
    let r = dirichlet_poly_moment_check(x, 7.0, 1, &a, HypothesisPolicy::Enforce).unwrap();
    // |Σ a_p χ(p)/√p|² = Σ_{p,q} a_p ā_q χ(pq)/√(pq)
    let mut lhs = 0.0;
    let mut count = 0;
    for d in -4000i64..=4000 {
        if !is_fundamental_by_definition(d) {
            continue;
        }
        count += 1;
        for (&p, &ap) in &a {
            for (&q, &aq) in &a {
                let chi = kronecker_by_definition(d, (p * q) as i64) as f64;
                lhs += (ap * aq.conj()).re * chi / ((p * q) as f64).sqrt();
            }
        }
    }
    assert_eq!(r.n_discriminants, count);
    assert!((r.lhs - lhs).abs() < 1e-9 * lhs);
    let mass: f64 = primes.iter().map(|&p| 1.0 / p as f64).sum();
    assert!((r.rhs - x * mass).abs() < 1e-9 * r.rhs);
}

#[test]
fn poly_moment_homogeneity_and_hypothesis() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = draw_coefficients(&mut rng, &[3, 5, 7, 11]);
    let scaled: BTreeMap<u64, Complex64> = a.iter().map(|(&p, &v)| (p, v * 3.0)).collect();
    let r1 = dirichlet_poly_moment_check(5000.0, 11.0, 2, &a, HypothesisPolicy::ReportOnly).unwrap();
    let r3 = dirichlet_poly_moment_check(5000.0, 11.0, 2, &scaled, HypothesisPolicy::ReportOnly).unwrap();
    assert!((r3.lhs - 81.0 * r1.lhs).abs() < 1e-9 * r3.lhs);
    assert!((r3.ratio - r1.ratio).abs() < 1e-9);
    assert!(!r1.hypothesis_holds);
    assert!(matches!(
        dirichlet_poly_moment_check(5000.0, 11.0, 2, &a, HypothesisPolicy::Enforce),
        Err(Error::Hypothesis(_))
    ));
    let zero: BTreeMap<u64, Complex64> = [(3, c(0.0, 0.0)), (5, c(0.0, 0.0))].into();
    let z = dirichlet_poly_moment_check(5000.0, 5.0, 1, &zero, HypothesisPolicy::Enforce).unwrap();
    assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
    let composite: BTreeMap<u64, Complex64> = [(9, c(1.0, 0.0))].into();
    assert!(dirichlet_poly_moment_check(5000.0, 10.0, 1, &composite, HypothesisPolicy::Enforce).is_err());
}

#[test]
fn large_sieve_ratio_behaviour() {
    let (m, n) = (500, 500);
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let r = large_sieve_ratio(m, n, &a).unwrap();
        assert!(r > 0.0 && r <= 5.0, "seed {seed}: {r}");
        let neg: Vec<Complex64> = a.iter().map(|v| -v).collect();
        assert_eq!(large_sieve_ratio(m, n, &neg).unwrap(), r);
    }
    assert_eq!(large_sieve_ratio(10, 3, &[c(0.0, 0.0); 3]).unwrap(), 0.0);
    assert!(large_sieve_ratio(10, 3, &[c(1.0, 0.0); 2]).is_err());
    // a single coefficient at n = 1: every modulus contributes |a₁|²
    let mut one = vec![c(0.0, 0.0); 4];
    one[0] = c(2.0, 0.0);
    let odd_sqf = (1..=9).step_by(2).filter(|&q| q != 9).count() as f64;
    assert!((large_sieve_ratio(9, 4, &one).unwrap() - odd_sqf / 13.0).abs() < 1e-15);
}

#[test]
fn decorrelation_table_shape() {
    let x = 1000.0;
    let coeffs = delta(20_000);
    let ts = [0.0, 1.0, 5.0];
    let t = shifted_decorrelation_scan(x, 0.5, &ts, &coeffs, DEFAULT_EPS).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(t.values[i][j], t.values[j][i]);
            assert!(t.values[i][j] <= (t.values[i][i] * t.values[j][j]).sqrt() * (1.0 + 1e-12));
        }
    }
    let sharp = second_moment_sharp(x, &coeffs, &unit_constant(), DEFAULT_EPS).unwrap();
    assert!((t.values[0][0] * x * x.ln().sqrt() - sharp.sum_l2).abs() < 1e-8 * sharp.sum_l2);
    assert!(shifted_decorrelation_scan(x, 0.4, &ts, &coeffs, DEFAULT_EPS).is_err());
    assert!(shifted_decorrelation_scan(x, 0.5, &[2000.0], &coeffs, DEFAULT_EPS).is_err());
}

#[test]
fn majorant_length_term_shrinks_with_the_polynomial_length() {
    let x = 1e4;
    let coeffs = table_for(x);
    let shift = ShiftPair::central(x).unwrap();
    let d = TwistDiscriminant::new(5).unwrap();
    let mut last = f64::INFINITY;
    for xp in [20.0, 100.0, 1000.0] {
        let m = grh_majorant_margin(d, &shift, &GrhBoundParams::new(xp).unwrap(), &coeffs, DEFAULT_EPS).unwrap();
        assert!(m.length_term < last);
        last = m.length_term;
        let parts = m.prime_sum + m.script_m + m.length_term - m.log_abs_l;
        assert_eq!(m.margin, parts);
    }
    assert!(GrhBoundParams::new(5.0).is_err());
    let too_long = GrhBoundParams::new(2e4).unwrap();
    assert!(grh_majorant_margin(d, &shift, &too_long, &coeffs, DEFAULT_EPS).is_err());
}

proptest! {
    #[test]
    fn script_v_is_bounded(a in 0.0f64..0.1, b in -50.0f64..50.0, c2 in 0.0f64..0.1, e in -50.0f64..50.0, lx in 3.0f64..30.0) {
        let x = lx.exp();
        let edge = 1.0 / x.ln();
        let (z1, z2) = (c(a.min(edge), b), c(c2.min(edge), e));
        let v = script_v(z1, z2, x);
        let ll = x.ln().ln();
        prop_assert!(v >= 0.0 && v <= 4.0 * ll + 1e-12);
        let m = script_m(z1, z2, x);
        prop_assert!(m <= 0.0 && m >= -ll - 1e-12);
    }
}
