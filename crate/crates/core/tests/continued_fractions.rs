use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use powtrig::angle::{AngleForm, NamedConstant};
use powtrig::cf::{convergents, estimate_mu, estimate_mu_window, expand};
use proptest::prelude::*;

fn euclid(mut p: i64, mut q: i64) -> Vec<i64> {
    let mut out = Vec::new();
    while q != 0 {
        let a = p.div_euclid(q);
        out.push(a);
        let r = p - a * q;
        p = q;
        q = r;
    }
    out
}

#[test]
fn rational_matches_euclid() {
    let e = expand(&AngleForm::rational(355, 113).unwrap(), 10).unwrap();
    assert!(e.rational);
    let mut got = vec![e.a0.0.to_i64().unwrap()];
    got.extend(e.partial_quotients.iter().map(|b| b.0.to_i64().unwrap()));
    assert_eq!(got, euclid(355, 113));
}

#[test]
fn golden_convergents_are_fibonacci() {
    let e = expand(&AngleForm::named(NamedConstant::Golden), 25).unwrap();
    let c = convergents(&e);
    let (mut a, mut b) = (1u64, 1u64);
    for conv in &c {
        assert_eq!(conv.q.0.to_u64().unwrap(), a);
        let t = a + b;
        a = b;
        b = t;
    }
    let m = estimate_mu(&AngleForm::named(NamedConstant::Golden), 40).unwrap();
    assert!((m.mu_hat.unwrap() - 2.0).abs() < 0.05);
}

#[test]
fn liouville_truncation_has_large_mu() {
    // Σ_{j≤6} 10^{-j!} as an exact rational
    let mut v = BigRational::zero();
    let mut f = 1u32;
    for j in 1..=6u32 {
        f *= j;
        v += BigRational::new(1.into(), BigInt::from(10u32).pow(f));
    }
    let theta = AngleForm::rational(v.numer().clone(), v.denom().clone()).unwrap();
    let m = estimate_mu_window(&theta, 40, (30, 39)).unwrap();
    let mu = m.mu_hat.expect("the expansion runs past the window");
    assert!(mu > 5.0, "{mu}");
}

#[test]
fn e_pattern() {
    let e = expand(&AngleForm::named(NamedConstant::E), 30).unwrap();
    for (i, q) in e.partial_quotients.iter().enumerate() {
        let want = if i % 3 == 1 { 2 * (i as u64 / 3 + 1) } else { 1 };
        assert_eq!(q.0.to_u64().unwrap(), want, "index {i}");
    }
}

proptest! {
    #[test]
    fn euclid_oracle(p in -100_000i64..100_000, q in 1i64..100_000) {
        let e = expand(&AngleForm::rational(p, q).unwrap(), 200).unwrap();
        prop_assert!(e.rational);
        prop_assert_eq!(e.value(), BigRational::new(p.into(), q.into()));
    }

    #[test]
    fn convergents_sandwich_sqrt_like(a in 1u64..50, b in 1u64..50, c in 1u64..50) {
        let theta = AngleForm::parse(&format!("cf:[0; ({a},{b},{c})]")).unwrap();
        let e = expand(&theta, 12).unwrap();
        let conv = convergents(&e);
        for w in conv.windows(2) {
            // p_{k+1} q_k - p_k q_{k+1} = ±1
            let d = &w[1].p.0 * &w[0].q.0 - &w[0].p.0 * &w[1].q.0;
            prop_assert!(d == BigInt::from(1) || d == BigInt::from(-1));
        }
        prop_assert!(conv.iter().filter_map(|c| c.sandwich).all(|s| s));
    }
}
