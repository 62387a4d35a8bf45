use std::f64::consts::PI;

use powtrig::measure::{
    expected_abs_sum, increment_growth_exponent, mc_estimate, wallis, wallis_identity_failure, WALLIS_EXACT_MAX,
};
use powtrig::Error;
use proptest::prelude::*;

/// Midpoint-rule ∫₀^{π/2} sinⁿx dx.
fn float_wallis(n: i32) -> f64 {
    let m = 200_000;
    let h = PI / 2.0 / m as f64;
    (0..m).map(|i| ((i as f64 + 0.5) * h).sin().powi(n)).sum::<f64>() * h
}

#[test]
fn small_values() {
    assert_eq!(wallis(5).exact.unwrap().rational, "8/15");
    assert_eq!(wallis(1).exact.unwrap().rational, "1");
    let w0 = wallis(0);
    assert!(w0.exact.as_ref().unwrap().times_pi);
    assert!((w0.value.mid_f64() - PI / 2.0).abs() < 1e-15);
    for n in [2, 3, 7, 10, 25] {
        assert!((wallis(n).value.mid_f64() - float_wallis(n as i32)).abs() < 1e-9, "n = {n}");
    }
}

#[test]
fn asymptotic_at_ten_thousand() {
    let n = 10_000u64;
    let v = (n as f64).sqrt() * wallis(n).value.mid_f64();
    assert!((v - (PI / 2.0).sqrt()).abs() < 1e-4 * (PI / 2.0).sqrt() * 10.0);
}

#[test]
fn identity_exact_to_ten_thousand() {
    assert_eq!(wallis_identity_failure(10_000), None);
}

#[test]
fn monotone_per_parity() {
    let limit = (PI / 2.0).sqrt();
    for parity in [0u64, 1] {
        let mut prev = None;
        for k in 1..200u64 {
            let n = 2 * k + parity;
            let v = (n as f64).sqrt() * wallis(n).value.mid_f64();
            // n·I_n² < n·I_n·I_{n-1} = π/2
            assert!(v < limit);
            if let Some(p) = prev {
                assert!(v > p, "n = {n}");
            }
            prev = Some(v);
        }
    }
    let big = 1_000_000u64;
    for n in [big, big + 1] {
        assert!(((n as f64).sqrt() * wallis(n).value.mid_f64() - limit).abs() < 1e-3);
    }
    assert!(wallis(WALLIS_EXACT_MAX + 1).exact.is_none());
}

#[test]
fn expected_sum_examples() {
    let v = expected_abs_sum(1.0, 1).unwrap();
    assert!((v.mid_f64() - 2.0 / PI).abs() < 1e-15);
    let s: f64 = (1..=40).map(|n| 2.0 * float_wallis(n) / PI / (n as f64).powf(0.7)).sum();
    assert!((expected_abs_sum(0.7, 40).unwrap().mid_f64() - s).abs() < 1e-8);
}

#[test]
fn increment_exponents_straddle_the_boundary() {
    let hi = increment_growth_exponent(0.6, 1000, 1 << 20).unwrap();
    let lo = increment_growth_exponent(0.4, 1000, 1 << 20).unwrap();
    assert!((hi + 1.1).abs() < 0.01 && (lo + 0.9).abs() < 0.01);
    assert!(((lo - hi) - 0.2).abs() < 0.01);
}

#[test]
fn monte_carlo_alpha_one() {
    let r = mc_estimate(1.0, 1000, 100, 11).unwrap();
    assert!(r.z_score.abs() <= 3.0, "{}", r.z_score);
    assert_eq!(r.theta_digits, 23);
    assert!(matches!(mc_estimate(1.0, 1000, 1, 11), Err(Error::Precondition(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn same_seed_same_report(seed in any::<u64>()) {
        let a = mc_estimate(0.8, 300, 30, seed).unwrap();
        let b = mc_estimate(0.8, 300, 30, seed).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn recurrence_holds(n in 2u64..3000) {
        let a = wallis(n).value;
        let b = wallis(n - 2).value.mul_u64(n - 1).div_u64(n);
        prop_assert!(a.overlaps(&b));
    }
}
