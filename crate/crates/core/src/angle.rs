//! Input forms for the angle θ and their rational enclosures.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::ball::{BoundedReal, Dyadic};
use crate::elementary::pi;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedConstant {
    Sqrt2,
    Golden,
    E,
    PiReciprocal,
}

impl NamedConstant {
    pub fn name(self) -> &'static str {
        match self {
            NamedConstant::Sqrt2 => "sqrt2",
            NamedConstant::Golden => "golden",
            NamedConstant::E => "e",
            NamedConstant::PiReciprocal => "pi_reciprocal",
        }
    }

    /// Published irrationality exponent, where one is known exactly.
    pub fn known_mu(self) -> Option<f64> {
        match self {
            NamedConstant::Sqrt2 | NamedConstant::Golden | NamedConstant::E => Some(2.0),
            NamedConstant::PiReciprocal => None,
        }
    }

    pub fn is_algebraic(self) -> bool {
        matches!(self, NamedConstant::Sqrt2 | NamedConstant::Golden)
    }

    /// Dyadic enclosure `c ± 2^-bits` (or tighter).
    fn enclose(self, bits: u32) -> (BigRational, BigRational) {
        let b = bits as u64;
        match self {
            NamedConstant::Sqrt2 => {
                let s = (BigInt::from(2) << (2 * b)).sqrt();
                (BigRational::new(s, BigInt::one() << b), pow2_rat(-(bits as i64)))
            }
            NamedConstant::Golden => {
                let s = (BigInt::from(5) << (2 * b)).sqrt();
                let c = BigRational::new((BigInt::one() << b) + s, BigInt::one() << (b + 1));
                (c, pow2_rat(-(bits as i64)))
            }
            NamedConstant::E => ball_to_rational(&BoundedReal::one(bits + 16).exp()),
            NamedConstant::PiReciprocal => ball_to_rational(&(BoundedReal::one(bits + 16) / pi(bits + 16))),
        }
    }
}

/// What follows the listed partial quotients of a continued fraction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CfTail {
    /// The expansion ends: the value is rational.
    Finite,
    /// Unknown continuation (written with a trailing ellipsis).
    Open,
    /// The given block repeats forever.
    Periodic(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum AngleForm {
    Rational { p: BigIntStr, q: BigIntStr },
    Decimal { digits: String, stated_precision: u32 },
    ContinuedFraction { a0: BigIntStr, quotients: Vec<u64>, tail: CfTail },
    Named { constant: NamedConstant },
}

/// BigInt wrapper that serializes as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BigIntStr(pub BigInt);

impl Serialize for BigIntStr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

/// Rational enclosure of θ: the closed interval `[center - rad, center + rad]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaApprox {
    pub center: BigRational,
    pub rad: BigRational,
}

impl ThetaApprox {
    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn lo(&self) -> BigRational {
        &self.center - &self.rad
    }

    pub fn hi(&self) -> BigRational {
        &self.center + &self.rad
    }

    pub fn to_ball(&self, prec: u32) -> BoundedReal {
        let c = BoundedReal::from_rational(&self.center, prec);
        let r = BoundedReal::from_rational(&self.rad, 64).abs_upper();
        c.add_radius(r)
    }
}

fn pow2_rat(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << (e as u64))
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << ((-e) as u64))
    }
}

fn ball_to_rational(b: &BoundedReal) -> (BigRational, BigRational) {
    let rad = Dyadic::from_mag(b.radius()).map(|d| d.to_rational()).unwrap_or_else(|| BigRational::from_integer(BigInt::one()));
    (b.mid().to_rational(), rad)
}

impl AngleForm {
    pub fn rational(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self> {
        let (p, q) = (p.into(), q.into());
        if q.is_zero() {
            return Err(Error::ZeroDenominator(format!("{p}/{q}")));
        }
        let g = p.gcd(&q);
        let s = if q.is_negative() { -BigInt::one() } else { BigInt::one() };
        Ok(AngleForm::Rational { p: BigIntStr(&p / &g * &s), q: BigIntStr(&q / &g * &s) })
    }

    pub fn named(c: NamedConstant) -> Self {
        AngleForm::Named { constant: c }
    }

    pub fn parse(s: &str) -> Result<Self> {
        parse_angle(s)
    }

    /// The exact value when θ is rational by construction.
    pub fn exact_rational(&self) -> Option<BigRational> {
        match self {
            AngleForm::Rational { p, q } => Some(BigRational::new(p.0.clone(), q.0.clone())),
            AngleForm::ContinuedFraction { a0, quotients, tail: CfTail::Finite } => {
                let (p, q) = cf_value(&a0.0, quotients);
                Some(BigRational::new(p, q))
            }
            _ => None,
        }
    }

    /// True for forms whose value is only known to lie in an interval of fixed width.
    pub fn has_fixed_precision(&self) -> bool {
        matches!(self, AngleForm::Decimal { .. } | AngleForm::ContinuedFraction { tail: CfTail::Open, .. })
    }

    pub fn stated_precision(&self) -> Option<u32> {
        match self {
            AngleForm::Decimal { stated_precision, .. } => Some(*stated_precision),
            _ => None,
        }
    }

    pub fn named_constant(&self) -> Option<NamedConstant> {
        match self {
            AngleForm::Named { constant } => Some(*constant),
            _ => None,
        }
    }

    /// Rational enclosure of θ with radius at most `2^-bits` where the form allows it.
    pub fn approx(&self, bits: u32) -> ThetaApprox {
        match self {
            AngleForm::Rational { p, q } => ThetaApprox {
                center: BigRational::new(p.0.clone(), q.0.clone()),
                rad: BigRational::zero(),
            },
            AngleForm::Decimal { digits, stated_precision } => {
                let v: BigRational = decimal_value(digits);
                let half = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(*stated_precision) * 2);
                let center = if v.is_negative() { &v - &half } else { &v + &half };
                ThetaApprox { center, rad: half }
            }
            AngleForm::ContinuedFraction { a0, quotients, tail } => cf_approx(&a0.0, quotients, tail, bits),
            AngleForm::Named { constant } => {
                let (center, rad) = constant.enclose(bits);
                ThetaApprox { center, rad }
            }
        }
    }

    /// Partial quotients certified for this form (up to `k` of them, a0 first).
    pub fn known_quotients(&self, k: usize) -> Option<(BigInt, Vec<u64>, bool)> {
        match self {
            AngleForm::ContinuedFraction { a0, quotients, tail } => {
                let mut q: Vec<u64> = quotients.iter().copied().take(k).collect();
                let complete = match tail {
                    CfTail::Finite => true,
                    CfTail::Open => false,
                    CfTail::Periodic(block) => {
                        while q.len() < k && !block.is_empty() {
                            q.push(block[(q.len() - quotients.len()) % block.len()]);
                        }
                        true
                    }
                };
                Some((a0.0.clone(), q, complete))
            }
            _ => None,
        }
    }
}

impl FromStr for AngleForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_angle(s)
    }
}

impl fmt::Display for AngleForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleForm::Rational { p, q } => write!(f, "{}/{}", p.0, q.0),
            AngleForm::Decimal { digits, stated_precision } => write!(f, "{digits}~{stated_precision}"),
            AngleForm::ContinuedFraction { a0, quotients, tail } => {
                write!(f, "cf:[{};", a0.0)?;
                let mut parts: Vec<String> = quotients.iter().map(|q| q.to_string()).collect();
                match tail {
                    CfTail::Finite => {}
                    CfTail::Open => parts.push("...".into()),
                    CfTail::Periodic(b) => {
                        let inner: Vec<String> = b.iter().map(|q| q.to_string()).collect();
                        parts.push(format!("({})", inner.join(",")));
                    }
                }
                write!(f, "{}]", parts.join(","))
            }
            AngleForm::Named { constant } => write!(f, "const:{}", constant.name()),
        }
    }
}

fn decimal_value(digits: &str) -> BigRational {
    let neg = digits.starts_with('-');
    let body = digits.trim_start_matches(['-', '+']);
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let all = format!("{int}{frac}");
    let n: BigInt = all.parse().unwrap_or_default();
    let v = BigRational::new(n, BigInt::from(10u32).pow(frac.len() as u32));
    if neg {
        -v
    } else {
        v
    }
}

/// Numerator and denominator of [a0; a1, ..., ak].
pub fn cf_value(a0: &BigInt, quotients: &[u64]) -> (BigInt, BigInt) {
    let (mut p, mut q) = (BigInt::one(), BigInt::zero());
    let (mut pp, mut qq) = (a0.clone(), BigInt::one());
    for &a in quotients {
        let np = BigInt::from(a) * &pp + &p;
        let nq = BigInt::from(a) * &qq + &q;
        p = std::mem::replace(&mut pp, np);
        q = std::mem::replace(&mut qq, nq);
    }
    (pp, qq)
}

fn hull(a: BigRational, b: BigRational) -> ThetaApprox {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let two = BigRational::from_integer(BigInt::from(2));
    ThetaApprox { center: (&lo + &hi) / &two, rad: (hi - lo) / two }
}

fn cf_approx(a0: &BigInt, quotients: &[u64], tail: &CfTail, bits: u32) -> ThetaApprox {
    match tail {
        CfTail::Finite => {
            let (p, q) = cf_value(a0, quotients);
            ThetaApprox { center: BigRational::new(p, q), rad: BigRational::zero() }
        }
        CfTail::Open => {
            // the unknown tail t >= 1 puts θ between [..., ak] and [..., ak + 1]
            let (p, q) = cf_value(a0, quotients);
            let mut bumped = quotients.to_vec();
            match bumped.last_mut() {
                Some(last) => *last += 1,
                None => return hull(BigRational::from_integer(a0.clone()), BigRational::from_integer(a0 + 1)),
            }
            let (p2, q2) = cf_value(a0, &bumped);
            hull(BigRational::new(p, q), BigRational::new(p2, q2))
        }
        CfTail::Periodic(block) => {
            let mut qs = quotients.to_vec();
            let target = BigInt::one() << (bits as u64 + 2);
            loop {
                for &b in block {
                    qs.push(b);
                }
                let (_, q) = cf_value(a0, &qs);
                if &q * &q > target {
                    break;
                }
            }
            let (p1, q1) = cf_value(a0, &qs);
            qs.push(block[0]);
            let (p2, q2) = cf_value(a0, &qs);
            hull(BigRational::new(p1, q1), BigRational::new(p2, q2))
        }
    }
}

fn bad(s: &str, why: &str) -> Error {
    Error::InvalidAngle(format!("{s:?}: {why}"))
}

fn parse_angle(input: &str) -> Result<AngleForm> {
    let s = input.trim();
    if s.is_empty() {
        return Err(bad(input, "empty"));
    }
    if let Some(rest) = s.strip_prefix("const:") {
        let c = match rest.trim() {
            "sqrt2" => NamedConstant::Sqrt2,
            "golden" | "phi" => NamedConstant::Golden,
            "e" => NamedConstant::E,
            "pi_reciprocal" | "1/pi" | "inv_pi" => NamedConstant::PiReciprocal,
            other => return Err(bad(input, &format!("unknown constant {other:?}"))),
        };
        return Ok(AngleForm::named(c));
    }
    if let Some(rest) = s.strip_prefix("cf:") {
        return parse_cf(input, rest.trim());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = parse_int(input, p)?;
        let q: BigInt = parse_int(input, q)?;
        return AngleForm::rational(p, q);
    }
    if s.contains('.') || s.contains('~') {
        return parse_decimal(input, s);
    }
    AngleForm::rational(parse_int(input, s)?, 1)
}

fn parse_int(input: &str, t: &str) -> Result<BigInt> {
    let t = t.trim();
    let body = t.strip_prefix(['-', '+']).unwrap_or(t);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) || body.len() > 4096 {
        return Err(bad(input, &format!("{t:?} is not an integer")));
    }
    t.parse::<BigInt>().map_err(|_| bad(input, &format!("{t:?} is not an integer")))
}

fn strip_ellipsis(s: &str) -> (&str, bool) {
    if let Some(r) = s.strip_suffix('…') {
        (r, true)
    } else if let Some(r) = s.strip_suffix("...") {
        (r, true)
    } else {
        (s, false)
    }
}

fn parse_decimal(input: &str, s: &str) -> Result<AngleForm> {
    let (num, stated) = match s.split_once('~') {
        Some((n, p)) => {
            let p: u32 = p.trim().parse().map_err(|_| bad(input, "precision after '~' must be a positive integer"))?;
            (n.trim(), Some(p))
        }
        None => (s, None),
    };
    let (num, _) = strip_ellipsis(num);
    let (sign, body) = match num.strip_prefix('-') {
        Some(b) => ("-", b),
        None => ("", num.strip_prefix('+').unwrap_or(num)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let int = if int.is_empty() { "0" } else { int };
    if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad(input, "malformed decimal"));
    }
    if int.len() + frac.len() > 100_000 {
        return Err(bad(input, "too many digits"));
    }
    let stated = stated.unwrap_or(frac.len() as u32);
    if stated == 0 {
        return Err(bad(input, "stated precision must be at least 1"));
    }
    if (stated as usize) > frac.len() {
        return Err(bad(
            input,
            &format!("stated precision {stated} exceeds the {} fractional digits given", frac.len()),
        ));
    }
    // digits beyond the stated precision are dropped (truncation toward zero)
    let frac = &frac[..stated as usize];
    let int = int.trim_start_matches('0');
    let int = if int.is_empty() { "0" } else { int };
    Ok(AngleForm::Decimal { digits: format!("{sign}{int}.{frac}"), stated_precision: stated })
}

fn parse_cf(input: &str, s: &str) -> Result<AngleForm> {
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| bad(input, "continued fraction must be written [a0; a1, a2, ...]"))?;
    let (a0, rest) = match inner.split_once(';') {
        Some((a, r)) => (a, r.trim()),
        None => (inner, ""),
    };
    let a0 = parse_int(input, a0)?;
    let (rest, open) = strip_ellipsis(rest.trim());
    let rest = rest.trim().trim_end_matches(',').trim();
    let (head, period) = match rest.find('(') {
        Some(i) => {
            let block = rest[i..]
                .strip_prefix('(')
                .and_then(|b| b.strip_suffix(')'))
                .ok_or_else(|| bad(input, "periodic block must close the expansion"))?;
            (rest[..i].trim().trim_end_matches(','), Some(block))
        }
        None => (rest, None),
    };
    let parse_list = |t: &str| -> Result<Vec<u64>> {
        let t = t.trim();
        if t.is_empty() {
            return Ok(vec![]);
        }
        t.split(',')
            .map(|x| {
                let v: u64 = x.trim().parse().map_err(|_| bad(input, &format!("bad partial quotient {x:?}")))?;
                if v == 0 {
                    Err(bad(input, "partial quotients after a0 must be at least 1"))
                } else {
                    Ok(v)
                }
            })
            .collect()
    };
    let quotients = parse_list(head)?;
    if quotients.len() > 100_000 {
        return Err(bad(input, "too many partial quotients"));
    }
    let tail = match period {
        Some(b) => {
            if open {
                return Err(bad(input, "a periodic expansion cannot also be open"));
            }
            let block = parse_list(b)?;
            if block.is_empty() {
                return Err(bad(input, "empty periodic block"));
            }
            CfTail::Periodic(block)
        }
        None if open => CfTail::Open,
        None => CfTail::Finite,
    };
    Ok(AngleForm::ContinuedFraction { a0: BigIntStr(a0), quotients, tail })
}

/// Parse an interval "x1,x2" of rationals or decimals (taken as exact values).
pub fn parse_interval(s: &str) -> Result<(BigRational, BigRational)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("interval {s:?} must be written x1,x2")))?;
    Ok((parse_exact(a)?, parse_exact(b)?))
}

/// Parse an exact rational written as "p/q", an integer or a finite decimal.
pub fn parse_exact(t: &str) -> Result<BigRational> {
    let t = t.trim();
    let bad = || Error::Parse(format!("{t:?} is not an exact rational"));
    if let Some((p, q)) = t.split_once('/') {
        let p = parse_int(t, p).map_err(|_| bad())?;
        let q = parse_int(t, q).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::ZeroDenominator(t.to_string()));
        }
        return Ok(BigRational::new(p, q));
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
        || int.len() + frac.len() > 4096
    {
        return Err(bad());
    }
    let v = decimal_value(&format!("{}.{}", if int.is_empty() { "0" } else { int }, frac));
    Ok(if sign { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn rationals_are_reduced() {
        assert_eq!(AngleForm::parse("6/8").unwrap(), AngleForm::rational(3, 4).unwrap());
        assert_eq!(AngleForm::parse("1/-3").unwrap().to_string(), "-1/3");
        assert_eq!(AngleForm::parse("2/0"), Err(Error::ZeroDenominator("2/0".into())));
        assert_eq!(AngleForm::parse("5").unwrap().exact_rational(), Some(rat(5, 1)));
    }

    #[test]
    fn decimal_truncation_interval() {
        let a = AngleForm::parse("0.41421356237~5").unwrap();
        assert_eq!(a.to_string(), "0.41421~5");
        let ap = a.approx(0);
        assert_eq!(ap.lo(), rat(41421, 100_000));
        assert_eq!(ap.hi(), rat(41422, 100_000));
        let n = AngleForm::parse("-1.5~1").unwrap().approx(0);
        assert_eq!(n.lo(), rat(-16, 10));
        assert_eq!(n.hi(), rat(-15, 10));
        assert!(AngleForm::parse("0.4142…~40").is_err());
        assert!(AngleForm::parse("0.~0").is_err());
    }

    #[test]
    fn cf_forms() {
        let f = AngleForm::parse("cf:[1;2,2,2]").unwrap();
        assert_eq!(f.exact_rational(), Some(rat(17, 12)));
        let o = AngleForm::parse("cf:[1;2,2,2,…]").unwrap().approx(0);
        assert_eq!(o.lo(), rat(24, 17));
        assert_eq!(o.hi(), rat(17, 12));
        let p = AngleForm::parse("cf:[1;(2)]").unwrap();
        let ap = p.approx(100);
        let s2 = NamedConstant::Sqrt2.enclose(200).0;
        assert!(ap.lo() <= s2 && s2 <= ap.hi());
        assert!(ap.rad < pow2_rat(-100));
        assert_eq!(p.to_string(), "cf:[1;(2)]");
        assert!(AngleForm::parse("cf:[1;0,2]").is_err());
        assert!(AngleForm::parse("cf:1;2").is_err());
    }

    #[test]
    fn named_constants_enclose() {
        for c in [NamedConstant::Sqrt2, NamedConstant::Golden, NamedConstant::E, NamedConstant::PiReciprocal] {
            let a = AngleForm::named(c).approx(80);
            assert!(a.rad <= pow2_rat(-80), "{c:?}");
            let v = num_traits::ToPrimitive::to_f64(&a.center).unwrap();
            let expect = match c {
                NamedConstant::Sqrt2 => std::f64::consts::SQRT_2,
                NamedConstant::Golden => (1.0 + 5f64.sqrt()) / 2.0,
                NamedConstant::E => std::f64::consts::E,
                NamedConstant::PiReciprocal => std::f64::consts::FRAC_1_PI,
            };
            assert!((v - expect).abs() < 1e-15);
        }
        assert_eq!(AngleForm::parse("const:1/pi").unwrap(), AngleForm::named(NamedConstant::PiReciprocal));
        assert!(AngleForm::parse("const:tau").is_err());
    }

    #[test]
    fn interval_parsing() {
        assert_eq!(parse_interval("0.3,0.4").unwrap(), (rat(3, 10), rat(2, 5)));
        assert_eq!(parse_interval("0, 1").unwrap(), (rat(0, 1), rat(1, 1)));
        assert!(parse_interval("0;1").is_err());
        assert!(parse_interval("1/0,2").is_err());
    }
}
