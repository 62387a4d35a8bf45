use powtrig::classify::{classify, find_a0, ConvergenceClass};
use powtrig::precision::SeriesKind;
use proptest::prelude::*;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn base(kind: SeriesKind, a: i64, p: i64, q: i64) -> f64 {
    let x = std::f64::consts::PI * ((a * p).rem_euclid(2 * q)) as f64 / q as f64;
    match kind {
        SeriesKind::Sin => x.sin(),
        SeriesKind::Cos => x.cos(),
    }
}

/// Float evaluation of the bases over one period of 2q: unit bases give ±1 to
/// within rounding, every other base is at most cos(π/(2q)) in size.
fn float_oracle(kind: SeriesKind, p: i64, q: i64) -> ConvergenceClass {
    let mut units = 0;
    let mut total = 0.0;
    for a in 1..=2 * q {
        let b = base(kind, a, p, q);
        if (b.abs() - 1.0).abs() < 1e-9 {
            units += 1;
            total += b.powi(a as i32).round();
        }
    }
    if units == 0 {
        ConvergenceClass::ConvergesAbsolutely
    } else if total != 0.0 {
        ConvergenceClass::DivergesToPlusInfinity
    } else {
        ConvergenceClass::ConvergesConditionally
    }
}

#[test]
fn table_matches_float_oracle() {
    for q in 1..=40i64 {
        for p in -2 * q..=2 * q {
            if gcd(p, q) != 1 {
                continue;
            }
            for kind in [SeriesKind::Sin, SeriesKind::Cos] {
                assert_eq!(classify(kind, p, q).unwrap().class, float_oracle(kind, p, q), "{kind} {p}/{q}");
            }
        }
    }
}

#[test]
fn headline_classes() {
    use ConvergenceClass::*;
    assert_eq!(classify(SeriesKind::Sin, 1, 4).unwrap().class, DivergesToPlusInfinity);
    assert_eq!(classify(SeriesKind::Cos, 1, 3).unwrap().class, ConvergesConditionally);
    assert_eq!(classify(SeriesKind::Sin, 1, 3).unwrap().class, ConvergesAbsolutely);
    assert_eq!(classify(SeriesKind::Cos, 2, 3).unwrap().class, DivergesToPlusInfinity);
}

/// Smallest a in [1, 2q] whose base is a unit with a positive contribution.
fn brute_a0(kind: SeriesKind, p: i64, q: i64) -> Option<u64> {
    (1..=2 * q).find(|&a| {
        let b = base(kind, a, p, q);
        (b.abs() - 1.0).abs() < 1e-9 && match kind {
            SeriesKind::Sin => b > 0.0,
            SeriesKind::Cos => b < 0.0,
        }
    }).map(|a| a as u64)
}

#[test]
fn a0_matches_scan() {
    assert_eq!(find_a0(SeriesKind::Cos, 1, 3).unwrap(), Some(3));
    assert_eq!(find_a0(SeriesKind::Sin, 1, 2).unwrap(), Some(1));
    assert_eq!(find_a0(SeriesKind::Sin, 1, 4).unwrap(), Some(2));
    assert_eq!(classify(SeriesKind::Sin, 1, 2).unwrap().paired_residue, Some(3));
    assert_eq!(classify(SeriesKind::Sin, 1, 4).unwrap().a0, Some(2));
    for q in [2i64, 6, 10, 14] {
        for p in (1..2 * q).filter(|p| gcd(*p, q) == 1) {
            assert_eq!(find_a0(SeriesKind::Sin, p, q as u64).unwrap(), brute_a0(SeriesKind::Sin, p, q), "{p}/{q}");
        }
    }
    for q in [3i64, 5, 7, 9] {
        for p in (1..2 * q).step_by(2).filter(|p| gcd(*p, q) == 1) {
            assert_eq!(find_a0(SeriesKind::Cos, p, q as u64).unwrap(), brute_a0(SeriesKind::Cos, p, q), "{p}/{q}");
        }
    }
}

proptest! {
    #[test]
    fn class_has_period_two(p in -500i64..500, q in 1i64..500) {
        prop_assume!(gcd(p, q) == 1);
        for kind in [SeriesKind::Sin, SeriesKind::Cos] {
            prop_assert_eq!(classify(kind, p, q).unwrap().class, classify(kind, p + 2 * q, q).unwrap().class);
        }
    }

    #[test]
    fn reduction_is_transparent(p in -300i64..300, q in 1i64..300, g in 2i64..9) {
        prop_assume!(gcd(p, q) == 1);
        let a = classify(SeriesKind::Cos, p, q).unwrap();
        let b = classify(SeriesKind::Cos, p * g, q * g).unwrap();
        prop_assert_eq!(a.class, b.class);
        prop_assert_eq!(b.reduced_from, Some((p * g, q * g)));
    }

    #[test]
    fn large_q_matches_oracle(p in 1i64..5000, q in 1i64..400) {
        prop_assume!(gcd(p, q) == 1);
        for kind in [SeriesKind::Sin, SeriesKind::Cos] {
            prop_assert_eq!(classify(kind, p, q).unwrap().class, float_oracle(kind, p, q));
        }
    }
}
