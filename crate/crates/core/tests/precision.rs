use num_bigint::BigInt;
use num_rational::BigRational;
use powtrig::angle::{AngleForm, NamedConstant};
use powtrig::precision::{reduce_angle, signed_term, term_magnitude, PrecisionBudget, SeriesKind};
use powtrig::BoundedReal;
use proptest::prelude::*;

fn budget() -> PrecisionBudget {
    PrecisionBudget::new(30, 1e-25).unwrap()
}

fn near(x: &BoundedReal, want: f64, tol: f64) -> bool {
    (x.mid_f64() - want).abs() <= tol + x.rad_f64()
}

#[test]
fn reduce_examples() {
    let r = reduce_angle(4, &AngleForm::rational(1, 2).unwrap(), &budget()).unwrap();
    assert!(r.frac_part.is_exact_zero());
    assert!(r.dist_to_half.contains_rational(&BigRational::new(1.into(), 2.into())));
    let r = reduce_angle(1, &AngleForm::rational(1, 3).unwrap(), &budget()).unwrap();
    assert!(r.dist_to_half.contains_rational(&BigRational::new(1.into(), 6.into())));
}

#[test]
fn truncated_sqrt2_radius() {
    // √2 to 40 places; frac(10⁶ θ) is pinned to within 10⁶·10⁻⁴⁰
    let theta = AngleForm::parse("1.4142135623730950488016887242096980785696").unwrap();
    let b = PrecisionBudget::new(60, 1e-30).unwrap();
    let r = reduce_angle(1_000_000, &theta, &b).unwrap();
    assert!(r.frac_part.rad_f64() <= 1e6 * 1e-40 * 1.01);
    // exact oracle: the digits span [d, d + 10⁻⁴⁰], so frac(10⁶ θ) spans [f, f + 10⁻³⁴]
    let f = BigRational::new(
        "5623730950488016887242096980785696".parse::<BigInt>().unwrap(),
        BigInt::from(10u32).pow(34),
    );
    let f_hi = &f + BigRational::new(1.into(), BigInt::from(10u32).pow(34));
    assert!(r.frac_part.lower().to_rational() <= f);
    assert!(r.frac_part.upper().to_rational() >= f_hi);
}

#[test]
fn term_examples() {
    let b = budget();
    let half = AngleForm::rational(1, 2).unwrap();
    let third = AngleForm::rational(1, 3).unwrap();
    assert!(term_magnitude(3, &half, SeriesKind::Sin, &b).unwrap().contains(&BoundedReal::one(64)));
    let quarter = BoundedReal::from_f64(0.25, 64);
    assert!(term_magnitude(2, &third, SeriesKind::Cos, &b).unwrap().overlaps(&quarter));
    let t = signed_term(3, &half, SeriesKind::Sin, 1.0, &b).unwrap();
    assert!(near(&t, -1.0 / 3.0, 1e-20));
    let t = signed_term(6, &half, SeriesKind::Cos, 1.0, &b).unwrap();
    assert!(near(&t, 1.0 / 6.0, 1e-20));
    let t = signed_term(5, &third, SeriesKind::Cos, 0.5, &b).unwrap();
    let oracle = 0.5f64.powi(5) / 5f64.sqrt();
    assert!(near(&t, oracle, 1e-15), "{t} vs {oracle}");
    assert!((oracle - 0.013975).abs() < 1e-6);
}

#[test]
fn quadruple_precision_contains() {
    let theta = AngleForm::named(NamedConstant::Sqrt2);
    let coarse = term_magnitude(100, &theta, SeriesKind::Cos, &PrecisionBudget::new(20, 1e-15).unwrap()).unwrap();
    let fine = term_magnitude(100, &theta, SeriesKind::Cos, &PrecisionBudget::new(80, 1e-15).unwrap()).unwrap();
    assert!(coarse.contains(&fine));
    let oracle = (std::f64::consts::PI * 100.0 * std::f64::consts::SQRT_2).cos().abs().powi(100);
    assert!(near(&coarse, oracle, 1e-9 * oracle.max(1e-300)));
}

#[test]
fn short_decimal_is_rejected_for_large_n() {
    let theta = AngleForm::parse("0.4142135623").unwrap();
    let r = term_magnitude(10_000_000, &theta, SeriesKind::Sin, &PrecisionBudget::new(20, 1e-6).unwrap());
    assert!(matches!(r, Err(powtrig::Error::PrecisionExhausted(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn magnitude_has_period_one(p in -200i64..200, q in 1i64..200, n in 1u64..5000) {
        let b = budget();
        let t = AngleForm::rational(p, q).unwrap();
        let t1 = AngleForm::rational(p + q, q).unwrap();
        for kind in [SeriesKind::Sin, SeriesKind::Cos] {
            let a = term_magnitude(n, &t, kind, &b).unwrap();
            let c = term_magnitude(n, &t1, kind, &b).unwrap();
            prop_assert!(a.overlaps(&c));
        }
    }

    #[test]
    fn signed_term_has_period_two(p in -200i64..200, q in 1i64..200, n in 1u64..5000) {
        let b = budget();
        let t = signed_term(n, &AngleForm::rational(p, q).unwrap(), SeriesKind::Sin, 0.7, &b).unwrap();
        let u = signed_term(n, &AngleForm::rational(p + 2 * q, q).unwrap(), SeriesKind::Sin, 0.7, &b).unwrap();
        prop_assert_eq!(t.mid_f64(), u.mid_f64());
        prop_assert_eq!(t.rad_f64(), u.rad_f64());
    }

    #[test]
    fn term_matches_float_oracle(p in 1i64..1000, q in 1i64..1000, n in 1u64..60, alpha in 0.05f64..1.0) {
        let b = budget();
        for kind in [SeriesKind::Sin, SeriesKind::Cos] {
            let t = signed_term(n, &AngleForm::rational(p, q).unwrap(), kind, alpha, &b).unwrap();
            let x = std::f64::consts::PI * (((n as i64 * p) % (2 * q)) as f64) / q as f64;
            let f = match kind { SeriesKind::Sin => x.sin(), SeriesKind::Cos => x.cos() };
            let oracle = f.powi(n as i32) / (n as f64).powf(alpha);
            prop_assert!((t.mid_f64() - oracle).abs() <= 1e-12 + t.rad_f64(), "{} vs {}", t, oracle);
        }
    }
}
