//! Convergence classes of the two series at rational θ = p/q.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::Serialize;

use crate::ball::BoundedReal;
use crate::elementary::ln_sin_pi;
use crate::error::{Error, Result};
use crate::precision::SeriesKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceClass {
    DivergesToPlusInfinity,
    ConvergesConditionally,
    ConvergesAbsolutely,
}

/// Symbolic value of sin/cos at a multiple of π/12 that is one of the standard angles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactBase {
    Zero,
    Half,
    Sqrt2Over2,
    Sqrt3Over2,
    One,
}

impl ExactBase {
    pub fn label(self, negative: bool) -> String {
        let s = match self {
            ExactBase::Zero => return "0".into(),
            ExactBase::Half => "1/2",
            ExactBase::Sqrt2Over2 => "sqrt2/2",
            ExactBase::Sqrt3Over2 => "sqrt3/2",
            ExactBase::One => "1",
        };
        if negative {
            format!("-{s}")
        } else {
            s.into()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidueBase {
    /// Residue a in [1, 2q]; the sub-series runs over n = 2lq + a.
    pub a: u64,
    /// a·p mod 2q: the base is f(π t / q).
    pub t: u64,
    pub base: BoundedReal,
    /// Symbolic form when the angle is a standard one.
    pub exact: Option<String>,
    pub unit: bool,
    pub zero: bool,
    /// Sign of baseⁿ along n = 2lq + a; constant in l because n ≡ a (mod 2).
    pub sign_along_progression: i8,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitResidue {
    pub a: u64,
    pub base: i8,
    /// Sign of baseⁿ on n ≡ a (mod 2q); every term of the progression has this sign.
    pub sign_pattern: i8,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub kind: SeriesKind,
    pub p: i64,
    pub q: u64,
    /// Original input when it had to be reduced by a common factor.
    pub reduced_from: Option<(i64, i64)>,
    pub class: ConvergenceClass,
    pub rule: String,
    pub unit_residues: Vec<UnitResidue>,
    pub a0: Option<u64>,
    pub paired_residue: Option<u64>,
    pub alpha_range: &'static str,
}

pub const ALPHA_RANGE: &str = "(0, 1]";

/// Normalize p/q: reduce by the gcd (or refuse), force q > 0.
pub fn normalize(p: i64, q: i64, allow_reduce: bool) -> Result<(i64, u64, bool)> {
    if q == 0 {
        return Err(Error::ZeroDenominator(format!("{p}/{q}")));
    }
    let g = p.gcd(&q);
    if g != 1 && !allow_reduce {
        return Err(Error::NotReduced(p.to_string(), q.to_string()));
    }
    let s = q.signum();
    let (p, q) = (p / g * s, q / g * s);
    if q > (1i64 << 40) {
        return Err(Error::Precondition(format!("denominator {q} is too large for residue analysis")));
    }
    Ok((p, q as u64, g != 1))
}

fn p_mod(p: i64, m: u64) -> u64 {
    p.rem_euclid(m as i64) as u64
}

/// Exact base for angle π t / q when 12 t / q is an integer divisible by 2 or 3.
fn standard_base(kind: SeriesKind, t: u64, q: u64) -> Option<(ExactBase, bool)> {
    if (12 * t as u128) % q as u128 != 0 {
        return None;
    }
    // angle = j π / 12, shift cos to sin by a quarter turn
    let mut j = ((12 * t as u128) / q as u128) as u64 % 24;
    if kind == SeriesKind::Cos {
        j = (j + 6) % 24;
    }
    let neg = j > 12;
    let j = if neg { j - 12 } else { j };
    let j = j.min(12 - j);
    let b = match j {
        0 => ExactBase::Zero,
        2 => ExactBase::Half,
        3 => ExactBase::Sqrt2Over2,
        4 => ExactBase::Sqrt3Over2,
        6 => ExactBase::One,
        _ => return None,
    };
    Some((b, neg && b != ExactBase::Zero))
}

/// Distance of t/q to the nearest zero of f, so |f(π t/q)| = sin(π d).
fn base_distance(kind: SeriesKind, t: u64, q: u64) -> BigRational {
    let r = t % q;
    match kind {
        SeriesKind::Sin => BigRational::new(BigInt::from(r.min(q - r)), BigInt::from(q)),
        SeriesKind::Cos => {
            let twice = (2 * r as i128 - q as i128).unsigned_abs();
            BigRational::new(BigInt::from(twice), BigInt::from(2 * q))
        }
    }
}

/// Sign of f(π t / q) for t in [0, 2q).
fn base_sign(kind: SeriesKind, t: u64, q: u64) -> i8 {
    let (t, q) = (t as u128, q as u128);
    match kind {
        SeriesKind::Sin => {
            if t == 0 || t == q {
                0
            } else if t < q {
                1
            } else {
                -1
            }
        }
        SeriesKind::Cos => {
            let tt = 2 * t;
            if tt == q || tt == 3 * q {
                0
            } else if tt < q || tt > 3 * q {
                1
            } else {
                -1
            }
        }
    }
}

fn is_unit(kind: SeriesKind, t: u64, q: u64) -> bool {
    match kind {
        SeriesKind::Sin => 2 * (t % q) == q,
        SeriesKind::Cos => t % q == 0,
    }
}

pub fn residue_bases(kind: SeriesKind, p: i64, q: u64, prec: u32) -> Result<Vec<ResidueBase>> {
    let (p, q, _) = normalize(p, q as i64, true)?;
    let two_q = 2 * q;
    let pm = p_mod(p, two_q);
    let mut out = Vec::with_capacity(two_q as usize);
    for a in 1..=two_q {
        let t = ((a as u128 * pm as u128) % two_q as u128) as u64;
        let sign = base_sign(kind, t, q);
        let unit = is_unit(kind, t, q);
        let zero = sign == 0;
        let exact = standard_base(kind, t, q).map(|(b, neg)| b.label(neg));
        let base = if zero {
            BoundedReal::zero(prec)
        } else if unit {
            BoundedReal::from_i64(sign as i64, prec)
        } else {
            let d = base_distance(kind, t, q);
            let m = ln_sin_pi(&BoundedReal::from_rational(&d, prec + 16)).exp().with_prec(prec);
            if sign < 0 {
                -m
            } else {
                m
            }
        };
        let along = if zero {
            0
        } else if a % 2 == 0 {
            1
        } else {
            sign
        };
        out.push(ResidueBase { a, t, base, exact, unit, zero, sign_along_progression: along });
    }
    Ok(out)
}

/// Class from the per-period sum of unit-residue sign contributions.
pub fn classify_by_residues(kind: SeriesKind, p: i64, q: u64) -> Result<ConvergenceClass> {
    let (p, q, _) = normalize(p, q as i64, true)?;
    let two_q = 2 * q;
    let pm = p_mod(p, two_q);
    let mut units = 0;
    let mut total: i64 = 0;
    for a in 1..=two_q {
        let t = ((a as u128 * pm as u128) % two_q as u128) as u64;
        if is_unit(kind, t, q) {
            units += 1;
            total += if a % 2 == 0 { 1 } else { base_sign(kind, t, q) as i64 };
        }
    }
    Ok(if units == 0 {
        ConvergenceClass::ConvergesAbsolutely
    } else if total != 0 {
        ConvergenceClass::DivergesToPlusInfinity
    } else {
        ConvergenceClass::ConvergesConditionally
    })
}

fn class_rule(kind: SeriesKind, p: i64, q: u64) -> (ConvergenceClass, &'static str) {
    match kind {
        SeriesKind::Cos => {
            if p % 2 == 0 || q % 2 == 0 {
                (ConvergenceClass::DivergesToPlusInfinity, "p or q even")
            } else {
                (ConvergenceClass::ConvergesConditionally, "p and q both odd")
            }
        }
        SeriesKind::Sin => match q % 4 {
            1 | 3 => (ConvergenceClass::ConvergesAbsolutely, "q odd"),
            2 => (ConvergenceClass::ConvergesConditionally, "q = 2 mod 4"),
            _ => (ConvergenceClass::DivergesToPlusInfinity, "q = 0 mod 4"),
        },
    }
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

/// The residue solving the case-specific unit congruence, if that case applies.
pub fn find_a0(kind: SeriesKind, p: i64, q: u64) -> Result<Option<u64>> {
    let (p, q, _) = normalize(p, q as i64, true)?;
    let (target, modulus) = match kind {
        SeriesKind::Cos if p % 2 != 0 && q % 2 == 1 => (q, 2 * q),
        SeriesKind::Cos => return Ok(None),
        SeriesKind::Sin => match q % 4 {
            2 => (q / 2, 2 * q),
            0 => (q / 2, q),
            _ => return Ok(None),
        },
    };
    let inv = match mod_inverse(p_mod(p, modulus), modulus) {
        Some(i) => i,
        None => return Ok(None),
    };
    let a = ((target as u128 * inv as u128) % modulus as u128) as u64;
    Ok(Some(if a == 0 { modulus } else { a }))
}

pub fn classify(kind: SeriesKind, p: i64, q: i64) -> Result<ClassificationReport> {
    classify_with(kind, p, q, true)
}

pub fn classify_with(kind: SeriesKind, p: i64, q: i64, allow_reduce: bool) -> Result<ClassificationReport> {
    let (pr, qr, reduced) = normalize(p, q, allow_reduce)?;
    let (class, rule) = class_rule(kind, pr, qr);
    let two_q = 2 * qr;
    let pm = p_mod(pr, two_q);
    let mut unit_residues = Vec::new();
    for a in 1..=two_q {
        let t = ((a as u128 * pm as u128) % two_q as u128) as u64;
        if is_unit(kind, t, qr) {
            let b = base_sign(kind, t, qr);
            let pattern = if a % 2 == 0 { 1 } else { b };
            unit_residues.push(UnitResidue { a, base: b, sign_pattern: pattern });
        }
    }
    let a0 = find_a0(kind, pr, qr)?;
    let paired_residue = match (kind, a0) {
        (SeriesKind::Sin, Some(a)) if qr % 4 == 2 => Some(two_q - a),
        (SeriesKind::Cos, Some(_)) => Some(two_q),
        _ => None,
    };
    Ok(ClassificationReport {
        kind,
        p: pr,
        q: qr,
        reduced_from: if reduced { Some((p, q)) } else { None },
        class,
        rule: rule.to_string(),
        unit_residues,
        a0,
        paired_residue,
        alpha_range: ALPHA_RANGE,
    })
}
