//! Midpoint-radius enclosures over dyadic numbers.
//!
//! A [`BoundedReal`] is a ball `[m - r, m + r]` where the midpoint `m` is an
//! exact dyadic `man * 2^exp` with at most `prec` significant bits and the
//! radius `r` is a [`Mag`], a 30-bit upper bound that always rounds away
//! from zero. Every operation returns a ball that contains the exact result
//! for every choice of operands inside the input balls.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const MAG_BITS: u32 = 30;
const MAG_EXP_MAX: i64 = 1 << 60;
const MAG_EXP_MIN: i64 = -(1 << 60);
const INF_EXP: i64 = i64::MAX;

/// Non-negative upper bound `man * 2^exp` with a normalized 30-bit mantissa.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mag {
    man: u64,
    exp: i64,
}

impl Mag {
    pub const ZERO: Mag = Mag { man: 0, exp: 0 };
    pub const INF: Mag = Mag { man: 1, exp: INF_EXP };

    pub fn is_zero(&self) -> bool {
        self.man == 0
    }

    pub fn is_inf(&self) -> bool {
        self.exp == INF_EXP
    }

    fn make(man: u64, exp: i64, up: bool) -> Mag {
        if man == 0 {
            return Mag::ZERO;
        }
        if exp > MAG_EXP_MAX {
            return Mag::INF;
        }
        if exp < MAG_EXP_MIN {
            return if up {
                Mag { man: 1 << (MAG_BITS - 1), exp: MAG_EXP_MIN }
            } else {
                Mag::ZERO
            };
        }
        Mag { man, exp }
    }

    fn from_parts(m: u128, e: i64, up: bool) -> Mag {
        if m == 0 {
            return Mag::ZERO;
        }
        let bits = 128 - m.leading_zeros();
        if bits > MAG_BITS {
            let sh = bits - MAG_BITS;
            let mut man = (m >> sh) as u64;
            let mut exp = e.saturating_add(sh as i64);
            if up && m & ((1u128 << sh) - 1) != 0 {
                man += 1;
                if man == 1 << MAG_BITS {
                    man >>= 1;
                    exp = exp.saturating_add(1);
                }
            }
            Mag::make(man, exp, up)
        } else {
            let sh = MAG_BITS - bits;
            Mag::make((m << sh) as u64, e.saturating_sub(sh as i64), up)
        }
    }

    pub fn from_u128_up(m: u128, e: i64) -> Mag {
        Mag::from_parts(m, e, true)
    }

    pub fn from_u64(m: u64) -> Mag {
        Mag::from_parts(m as u128, 0, true)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Mag {
        Mag::make(1 << (MAG_BITS - 1), e.saturating_sub(MAG_BITS as i64 - 1), true)
    }

    /// Upper bound of a finite non-negative `f64` (NaN and infinities map to INF).
    pub fn from_f64_up(x: f64) -> Mag {
        if !x.is_finite() || x.is_nan() {
            return Mag::INF;
        }
        let (man, exp) = decode_f64(x.abs());
        Mag::from_parts(man as u128, exp, true)
    }

    fn from_biguint(m: &BigUint, e: i64, up: bool) -> Mag {
        let bits = m.bits();
        if bits == 0 {
            return Mag::ZERO;
        }
        if bits <= 64 {
            return Mag::from_parts(m.to_u64().unwrap_or(u64::MAX) as u128, e, up);
        }
        let sh = bits - 64;
        let top = (m >> sh).to_u64().unwrap_or(u64::MAX) as u128;
        let exact = m.trailing_zeros().map_or(true, |tz| tz >= sh);
        let top = if up && !exact { top + 1 } else { top };
        Mag::from_parts(top, e.saturating_add(sh as i64), up)
    }

    /// Upper bound of `|man| * 2^exp`.
    pub fn from_dyadic_up(man: &BigInt, exp: i64) -> Mag {
        Mag::from_biguint(man.magnitude(), exp, true)
    }

    /// Lower bound of `|man| * 2^exp`.
    pub fn from_dyadic_down(man: &BigInt, exp: i64) -> Mag {
        Mag::from_biguint(man.magnitude(), exp, false)
    }

    pub fn add(self, o: Mag) -> Mag {
        if self.is_inf() || o.is_inf() {
            return Mag::INF;
        }
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (a, b) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let d = a.exp - b.exp;
        if d > 90 {
            Mag::from_parts(a.man as u128 + 1, a.exp, true)
        } else {
            Mag::from_parts(((a.man as u128) << d) + b.man as u128, b.exp, true)
        }
    }

    pub fn mul(self, o: Mag) -> Mag {
        if self.is_zero() || o.is_zero() {
            return Mag::ZERO;
        }
        if self.is_inf() || o.is_inf() {
            return Mag::INF;
        }
        Mag::from_parts(self.man as u128 * o.man as u128, self.exp.saturating_add(o.exp), true)
    }

    pub fn mul_u64(self, k: u64) -> Mag {
        self.mul(Mag::from_u64(k))
    }

    /// Upper bound of `self^k` by repeated squaring.
    pub fn pow_u64(self, mut k: u64) -> Mag {
        let mut base = self;
        let mut acc = Mag::from_u64(1);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(base);
            }
        }
        acc
    }

    pub fn mul_2exp(self, k: i64) -> Mag {
        if self.is_zero() || self.is_inf() {
            return self;
        }
        Mag::make(self.man, self.exp.saturating_add(k), true)
    }

    /// Upper bound of `self / o`; INF when `o` is zero.
    pub fn div(self, o: Mag) -> Mag {
        if self.is_zero() {
            return Mag::ZERO;
        }
        if o.is_zero() || self.is_inf() {
            return Mag::INF;
        }
        if o.is_inf() {
            return Mag::ZERO;
        }
        let num = (self.man as u128) << 64;
        let den = o.man as u128;
        let (q, r) = num.div_rem(&den);
        let q = if r != 0 { q + 1 } else { q };
        Mag::from_parts(q, self.exp.saturating_sub(64).saturating_sub(o.exp), true)
    }

    /// Lower bound of `max(self - o, 0)`.
    pub fn sub_lower(self, o: Mag) -> Mag {
        if o.is_zero() {
            return self;
        }
        if self.is_inf() {
            return if o.is_inf() { Mag::ZERO } else { Mag::INF };
        }
        if o >= self {
            return Mag::ZERO;
        }
        // self > o, both normalized, hence self.exp >= o.exp
        let d = self.exp - o.exp;
        if d > 90 {
            Mag::from_parts(self.man as u128 - 1, self.exp, false)
        } else {
            Mag::from_parts(((self.man as u128) << d) - o.man as u128, o.exp, false)
        }
    }

    pub fn sqrt_up(self) -> Mag {
        self.sqrt_dir(true)
    }

    pub fn sqrt_down(self) -> Mag {
        self.sqrt_dir(false)
    }

    fn sqrt_dir(self, up: bool) -> Mag {
        if self.is_zero() || self.is_inf() {
            return self;
        }
        let (m, e) = if self.exp % 2 != 0 {
            ((self.man as u128) << 1, self.exp - 1)
        } else {
            (self.man as u128, self.exp)
        };
        let m = m << 64;
        let e = e - 64;
        let s = m.sqrt();
        let s = if up && s * s < m { s + 1 } else { s };
        Mag::from_parts(s, e / 2, up)
    }

    /// Upper bound of `e^self - 1`.
    pub fn expm1_up(self) -> Mag {
        if self.is_zero() {
            return Mag::ZERO;
        }
        if self <= Mag::pow2(-1) {
            // e^r - 1 <= r + r^2 for 0 <= r <= 1
            return self.add(self.mul(self));
        }
        let r = self.to_f64();
        if r > 700.0 {
            return Mag::INF;
        }
        Mag::from_f64_up(r.exp_m1() * (1.0 + 1e-12) + 1e-300)
    }

    /// Approximate value; rounds toward +inf for representable magnitudes.
    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if self.is_inf() {
            return f64::INFINITY;
        }
        ldexp(self.man as f64, self.exp)
    }

    /// `floor(log2(self))`-style exponent of the leading bit.
    pub fn top_exp(self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.exp + MAG_BITS as i64
        }
    }

    pub fn to_dyadic(self) -> Option<(BigInt, i64)> {
        if self.is_inf() {
            None
        } else {
            Some((BigInt::from(self.man), self.exp))
        }
    }

    /// Scientific notation, rounded upward in the last printed digit.
    pub fn to_sci_string(self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        if self.is_inf() {
            return "inf".into();
        }
        let l10 = (self.man as f64).log10() + self.exp as f64 * std::f64::consts::LOG10_2;
        let mut e10 = l10.floor();
        let mut mant = 10f64.powf(l10 - e10);
        mant = (mant * 1000.0 * (1.0 + 1e-12)).ceil() / 1000.0;
        if mant >= 10.0 {
            mant /= 10.0;
            e10 += 1.0;
        }
        format!("{mant:.3}e{}", e10 as i64)
    }
}

impl PartialOrd for Mag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mag {
    fn cmp(&self, o: &Self) -> Ordering {
        match (self.is_zero(), o.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        self.exp.cmp(&o.exp).then(self.man.cmp(&o.man))
    }
}

/// `x * 2^k` without intermediate overflow.
pub(crate) fn ldexp(mut x: f64, mut k: i64) -> f64 {
    while k > 1000 {
        x *= 2f64.powi(1000);
        k -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while k < -1000 {
        x *= 2f64.powi(-1000);
        k += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(k as i32)
}

/// Exact decomposition of a finite non-negative double as `man * 2^exp`.
pub(crate) fn decode_f64(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_field - 1075)
    }
}

pub(crate) fn floor_shr(m: &BigInt, s: u64) -> BigInt {
    if s == 0 {
        return m.clone();
    }
    if m.sign() != Sign::Minus {
        m >> s
    } else {
        let one = BigInt::one();
        -(((-m) + ((&one << s) - &one)) >> s)
    }
}

fn top_of(man: &BigInt, exp: i64) -> i64 {
    if man.is_zero() {
        i64::MIN
    } else {
        exp + man.bits() as i64
    }
}

/// Exact dyadic number `man * 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub man: BigInt,
    pub exp: i64,
}

impl Dyadic {
    pub fn new(man: BigInt, exp: i64) -> Self {
        Dyadic { man, exp }
    }

    pub fn zero() -> Self {
        Dyadic { man: BigInt::zero(), exp: 0 }
    }

    pub fn from_mag(m: Mag) -> Option<Self> {
        m.to_dyadic().map(|(man, exp)| Dyadic { man, exp })
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn sign(&self) -> Sign {
        self.man.sign()
    }

    fn aligned(&self, o: &Self) -> (BigInt, BigInt, i64) {
        let e = self.exp.min(o.exp);
        let a = &self.man << ((self.exp - e) as u64);
        let b = &o.man << ((o.exp - e) as u64);
        (a, b, e)
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(o);
        Dyadic { man: a + b, exp: e }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Dyadic { man: -&self.man, exp: self.exp }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << (self.exp as u64))
        } else {
            BigRational::new(self.man.clone(), BigInt::one() << ((-self.exp) as u64))
        }
    }

    pub fn to_f64(&self) -> f64 {
        mantissa_to_f64(&self.man, self.exp)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Self) -> Ordering {
        let (sa, sb) = (self.man.sign(), o.man.sign());
        if sa != sb {
            let rank = |s: Sign| match s {
                Sign::Minus => 0,
                Sign::NoSign => 1,
                Sign::Plus => 2,
            };
            return rank(sa).cmp(&rank(sb));
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        let (ta, tb) = (top_of(&self.man, self.exp), top_of(&o.man, o.exp));
        let mag_order = if ta != tb {
            ta.cmp(&tb)
        } else {
            let (a, b, _) = self.aligned(o);
            a.abs().cmp(&b.abs())
        };
        if sa == Sign::Minus {
            mag_order.reverse()
        } else {
            mag_order
        }
    }
}

pub(crate) fn mantissa_to_f64(man: &BigInt, exp: i64) -> f64 {
    if man.is_zero() {
        return 0.0;
    }
    let bits = man.bits();
    let (top, e) = if bits > 64 {
        let sh = bits - 64;
        ((man.magnitude() >> sh).to_u64().unwrap_or(u64::MAX), exp + sh as i64)
    } else {
        (man.magnitude().to_u64().unwrap_or(u64::MAX), exp)
    };
    let v = ldexp(top as f64, e);
    if man.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

/// Round `man * 2^exp` toward -inf to at most `prec` bits; returns the error bound.
fn round_mid(man: BigInt, exp: i64, prec: u32) -> (BigInt, i64, Mag) {
    let bits = man.bits();
    if bits <= prec as u64 {
        return (man, exp, Mag::ZERO);
    }
    let sh = bits - prec as u64;
    let exact = man.magnitude().trailing_zeros().map_or(true, |tz| tz >= sh);
    let m = floor_shr(&man, sh);
    let e = exp + sh as i64;
    let err = if exact { Mag::ZERO } else { Mag::pow2(e) };
    (m, e, err)
}

/// Enclosure `[mid - rad, mid + rad]` with dyadic midpoint.
#[derive(Clone, Debug)]
pub struct BoundedReal {
    man: BigInt,
    exp: i64,
    rad: Mag,
    prec: u32,
}

impl BoundedReal {
    pub fn zero(prec: u32) -> Self {
        BoundedReal { man: BigInt::zero(), exp: 0, rad: Mag::ZERO, prec }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(1, prec)
    }

    /// The whole real line: used when an operation has no finite enclosure.
    pub fn indeterminate(prec: u32) -> Self {
        BoundedReal { man: BigInt::zero(), exp: 0, rad: Mag::INF, prec }
    }

    pub fn from_dyadic(man: BigInt, exp: i64, prec: u32) -> Self {
        let (man, exp, err) = round_mid(man, exp, prec);
        BoundedReal { man, exp, rad: err, prec }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::from_dyadic(BigInt::from(v), 0, prec)
    }

    pub fn from_u64(v: u64, prec: u32) -> Self {
        Self::from_dyadic(BigInt::from(v), 0, prec)
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        Self::from_dyadic(v.clone(), 0, prec)
    }

    /// Exact value of a finite double (rounded only if `prec < 53`).
    pub fn from_f64(x: f64, prec: u32) -> Self {
        if !x.is_finite() {
            return Self::indeterminate(prec);
        }
        let (m, e) = decode_f64(x.abs());
        let m = if x < 0.0 { -BigInt::from(m) } else { BigInt::from(m) };
        Self::from_dyadic(m, e, prec)
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        Self::from_bigint(num, prec + 8) / Self::from_bigint(den, prec + 8)
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        if r.denom().is_one() {
            return Self::from_bigint(r.numer(), prec);
        }
        let mut out = Self::from_ratio(r.numer(), r.denom(), prec);
        out.prec = prec;
        out.round_to_prec()
    }

    pub fn pow2(k: i64, prec: u32) -> Self {
        BoundedReal { man: BigInt::one(), exp: k, rad: Mag::ZERO, prec }
    }

    /// Ball spanning the closed interval `[lo, hi]`.
    pub fn from_interval(lo: &Dyadic, hi: &Dyadic, prec: u32) -> Self {
        let sum = lo.add(hi);
        let half_width = hi.sub(lo);
        let rad = Mag::from_dyadic_up(&half_width.man, half_width.exp - 1);
        Self::from_dyadic(sum.man, sum.exp - 1, prec).add_radius(rad)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn radius(&self) -> Mag {
        self.rad
    }

    pub fn mid(&self) -> Dyadic {
        Dyadic::new(self.man.clone(), self.exp)
    }

    pub fn mid_mantissa(&self) -> (&BigInt, i64) {
        (&self.man, self.exp)
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.rad.is_inf()
    }

    pub fn mid_f64(&self) -> f64 {
        mantissa_to_f64(&self.man, self.exp)
    }

    pub fn rad_f64(&self) -> f64 {
        let r = self.rad.to_f64();
        if r == 0.0 && !self.rad.is_zero() {
            f64::from_bits(1)
        } else {
            r
        }
    }

    /// The exact midpoint as a radius-free ball at precision `prec`.
    pub fn mid_ball(&self, prec: u32) -> Self {
        Self::from_dyadic(self.man.clone(), self.exp, prec.max(self.man.bits() as u32))
            .with_prec(prec)
    }

    pub fn with_prec(mut self, prec: u32) -> Self {
        self.prec = prec;
        self.round_to_prec()
    }

    fn round_to_prec(self) -> Self {
        let BoundedReal { man, exp, rad, prec } = self;
        let (man, exp, err) = round_mid(man, exp, prec);
        BoundedReal { man, exp, rad: rad.add(err), prec }
    }

    pub fn add_radius(mut self, r: Mag) -> Self {
        self.rad = self.rad.add(r);
        self
    }

    /// Upper bound of `|x|` over the ball.
    pub fn abs_upper(&self) -> Mag {
        Mag::from_dyadic_up(&self.man, self.exp).add(self.rad)
    }

    /// Lower bound of `|x|` over the ball (zero if the ball contains zero).
    pub fn abs_lower(&self) -> Mag {
        Mag::from_dyadic_down(&self.man, self.exp).sub_lower(self.rad)
    }

    pub fn top_exp(&self) -> i64 {
        top_of(&self.man, self.exp)
    }

    pub fn lower(&self) -> Dyadic {
        match Dyadic::from_mag(self.rad) {
            Some(r) => self.mid().sub(&r),
            None => Dyadic::new(BigInt::from(-1) << 4096u32, 0),
        }
    }

    pub fn upper(&self) -> Dyadic {
        match Dyadic::from_mag(self.rad) {
            Some(r) => self.mid().add(&r),
            None => Dyadic::new(BigInt::one() << 4096u32, 0),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.man.sign() == Sign::Plus && !self.abs_lower().is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.man.sign() == Sign::Minus && !self.abs_lower().is_zero()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.is_exact_zero() || self.is_positive() || self.lower().sign() != Sign::Minus
    }

    pub fn is_exact_zero(&self) -> bool {
        self.man.is_zero() && self.rad.is_zero()
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    /// Certainly `self < o`.
    pub fn definitely_lt(&self, o: &Self) -> bool {
        self.upper() < o.lower()
    }

    pub fn definitely_gt(&self, o: &Self) -> bool {
        o.definitely_lt(self)
    }

    /// Whether `o` lies entirely inside `self`.
    pub fn contains(&self, o: &Self) -> bool {
        self.is_finite() && o.is_finite() && self.lower() <= o.lower() && o.upper() <= self.upper()
    }

    pub fn contains_dyadic(&self, d: &Dyadic) -> bool {
        self.lower() <= *d && *d <= self.upper()
    }

    pub fn contains_rational(&self, r: &BigRational) -> bool {
        self.is_finite() && self.lower().to_rational() <= *r && *r <= self.upper().to_rational()
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        self.lower() <= o.upper() && o.lower() <= self.upper()
    }

    pub fn mul_2exp(&self, k: i64) -> Self {
        BoundedReal { man: self.man.clone(), exp: self.exp + k, rad: self.rad.mul_2exp(k), prec: self.prec }
    }

    pub fn abs(&self) -> Self {
        if self.man.sign() == Sign::Minus {
            -self
        } else {
            self.clone()
        }
    }

    pub fn sqr(&self) -> Self {
        self * self
    }

    pub fn mul_u64(&self, k: u64) -> Self {
        self * &BoundedReal::from_u64(k, 64)
    }

    pub fn div_u64(&self, k: u64) -> Self {
        self / &BoundedReal::from_u64(k, 64)
    }

    fn add_impl(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        let rad = self.rad.add(o.rad);
        if o.man.is_zero() {
            return BoundedReal { man: self.man.clone(), exp: self.exp, rad, prec }.round_to_prec();
        }
        if self.man.is_zero() {
            return BoundedReal { man: o.man.clone(), exp: o.exp, rad, prec }.round_to_prec();
        }
        let (ta, tb) = (self.top_exp(), o.top_exp());
        let cutoff = ta.max(tb) - prec as i64 - 8;
        if tb < cutoff {
            let extra = Mag::from_dyadic_up(&o.man, o.exp);
            return BoundedReal { man: self.man.clone(), exp: self.exp, rad: rad.add(extra), prec }
                .round_to_prec();
        }
        if ta < cutoff {
            let extra = Mag::from_dyadic_up(&self.man, self.exp);
            return BoundedReal { man: o.man.clone(), exp: o.exp, rad: rad.add(extra), prec }
                .round_to_prec();
        }
        let e = self.exp.min(o.exp);
        let a = &self.man << ((self.exp - e) as u64);
        let b = &o.man << ((o.exp - e) as u64);
        BoundedReal { man: a + b, exp: e, rad, prec }.round_to_prec()
    }

    fn mul_impl(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        if self.rad.is_inf() || o.rad.is_inf() {
            return Self::indeterminate(prec);
        }
        let am = Mag::from_dyadic_up(&self.man, self.exp);
        let bm = Mag::from_dyadic_up(&o.man, o.exp);
        let rad = am.mul(o.rad).add(bm.mul(self.rad)).add(self.rad.mul(o.rad));
        BoundedReal { man: &self.man * &o.man, exp: self.exp + o.exp, rad, prec }.round_to_prec()
    }

    fn div_impl(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        let den_low = o.abs_lower();
        if den_low.is_zero() || self.rad.is_inf() {
            return Self::indeterminate(prec);
        }
        if self.man.is_zero() {
            return BoundedReal { man: BigInt::zero(), exp: 0, rad: self.rad.div(den_low), prec };
        }
        let (ba, bb) = (self.man.bits() as i64, o.man.bits() as i64);
        let k = (prec as i64 + 2 + bb - ba).max(0) as u64;
        let num = &self.man << k;
        let (q, r) = num.div_rem(&o.man);
        let qexp = self.exp - k as i64 - o.exp;
        let trunc = if r.is_zero() { Mag::ZERO } else { Mag::pow2(qexp) };
        let q_abs = Mag::from_dyadic_up(&q, qexp).add(trunc);
        let prop = self.rad.add(q_abs.mul(o.rad)).div(den_low);
        BoundedReal { man: q, exp: qexp, rad: trunc.add(prop), prec }.round_to_prec()
    }

    /// Decimal rendering of the midpoint with `digits` significant digits.
    pub fn mid_decimal(&self, digits: usize) -> String {
        dyadic_to_decimal(&self.man, self.exp, digits)
    }
}

pub(crate) fn dyadic_to_decimal(man: &BigInt, exp: i64, digits: usize) -> String {
    if man.is_zero() {
        return "0".into();
    }
    let digits = digits.max(1);
    let neg = man.sign() == Sign::Minus;
    let m = man.abs();
    let l10 = (m.bits() as f64 + exp as f64) * std::f64::consts::LOG10_2;
    let mut e10 = l10.floor() as i64;
    let render = |e10: i64| -> BigInt {
        // round(m * 2^exp * 10^(digits - 1 - e10))
        let k = digits as i64 - 1 - e10;
        let (mut num, mut den) = (m.clone(), BigInt::one());
        if exp >= 0 {
            num <<= exp as u64;
        } else {
            den <<= (-exp) as u64;
        }
        if k >= 0 {
            num *= BigInt::from(10u32).pow(k as u32);
        } else {
            den *= BigInt::from(10u32).pow((-k) as u32);
        }
        (num * 2 + &den) / (den * 2)
    };
    let mut q = render(e10);
    let limit = BigInt::from(10u32).pow(digits as u32);
    if q >= limit {
        e10 += 1;
        q = render(e10);
    } else if q < BigInt::from(10u32).pow(digits as u32 - 1) {
        e10 -= 1;
        q = render(e10);
    }
    let s = q.to_string();
    let (head, tail) = s.split_at(1);
    let body = if tail.is_empty() { head.to_string() } else { format!("{head}.{tail}") };
    format!("{}{}e{}", if neg { "-" } else { "" }, body, e10)
}

impl fmt::Display for BoundedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} +/- {}]", self.mid_decimal(20), self.rad.to_sci_string())
    }
}

impl serde::Serialize for BoundedReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BoundedReal", 4)?;
        st.serialize_field("mid", &self.mid_decimal(25))?;
        st.serialize_field("rad", &self.rad.to_sci_string())?;
        st.serialize_field("mid_f64", &self.mid_f64())?;
        st.serialize_field("rad_f64", &self.rad_f64())?;
        st.end()
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl $trait<&BoundedReal> for &BoundedReal {
            type Output = BoundedReal;
            fn $method(self, o: &BoundedReal) -> BoundedReal {
                self.$imp(o)
            }
        }
        impl $trait<BoundedReal> for BoundedReal {
            type Output = BoundedReal;
            fn $method(self, o: BoundedReal) -> BoundedReal {
                self.$imp(&o)
            }
        }
        impl $trait<&BoundedReal> for BoundedReal {
            type Output = BoundedReal;
            fn $method(self, o: &BoundedReal) -> BoundedReal {
                self.$imp(o)
            }
        }
        impl $trait<BoundedReal> for &BoundedReal {
            type Output = BoundedReal;
            fn $method(self, o: BoundedReal) -> BoundedReal {
                self.$imp(&o)
            }
        }
    };
}

impl BoundedReal {
    fn sub_impl(&self, o: &Self) -> Self {
        self.add_impl(&-o)
    }
}

forward_binop!(Add, add, add_impl);
forward_binop!(Sub, sub, sub_impl);
forward_binop!(Mul, mul, mul_impl);
forward_binop!(Div, div, div_impl);

impl Neg for &BoundedReal {
    type Output = BoundedReal;
    fn neg(self) -> BoundedReal {
        BoundedReal { man: -&self.man, exp: self.exp, rad: self.rad, prec: self.prec }
    }
}

impl Neg for BoundedReal {
    type Output = BoundedReal;
    fn neg(mut self) -> BoundedReal {
        self.man = -self.man;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn mag_rounds_up() {
        let m = Mag::from_u128_up((1u128 << 40) + 1, 0);
        assert!(m.to_f64() > (1u64 << 40) as f64);
        assert_eq!(Mag::pow2(-3).to_f64(), 0.125);
        let s = Mag::from_u64(3).add(Mag::from_u64(5));
        assert_eq!(s.to_f64(), 8.0);
        assert!(Mag::from_u64(2).div(Mag::from_u64(3)).to_f64() >= 2.0 / 3.0);
        assert_eq!(Mag::from_u64(5).sub_lower(Mag::from_u64(7)), Mag::ZERO);
        assert!(Mag::from_u64(2).sqrt_up().to_f64() >= std::f64::consts::SQRT_2);
        assert!(Mag::from_u64(2).sqrt_down().to_f64() <= std::f64::consts::SQRT_2);
    }

    #[test]
    fn division_encloses_exact_quotient() {
        let one = BoundedReal::one(64);
        let three = BoundedReal::from_i64(3, 64);
        let third = &one / &three;
        assert!(third.contains_rational(&q(1, 3)));
        assert!(third.rad_f64() < 1e-18);
    }

    #[test]
    fn tiny_addend_goes_to_radius() {
        let a = BoundedReal::one(64);
        let b = BoundedReal::pow2(-100_000, 64);
        let s = &a + &b;
        assert!(s.contains_dyadic(&Dyadic::new(BigInt::one(), 0)));
        assert!(s.rad_f64() > 0.0);
    }

    #[test]
    fn division_by_ball_containing_zero_is_indeterminate() {
        let z = BoundedReal::zero(64).add_radius(Mag::pow2(-10));
        assert!(!(BoundedReal::one(64) / z).is_finite());
    }

    #[test]
    fn decimal_rendering() {
        let x = BoundedReal::from_ratio(&BigInt::from(1), &BigInt::from(3), 128);
        assert_eq!(x.mid_decimal(5), "3.3333e-1");
        assert_eq!(BoundedReal::from_i64(-120, 64).mid_decimal(3), "-1.20e2");
        assert_eq!(BoundedReal::from_f64(9.9999, 64).mid_decimal(2), "1.0e1");
    }

    #[test]
    fn dyadic_ordering() {
        let a = Dyadic::new(BigInt::from(3), -1);
        let b = Dyadic::new(BigInt::from(1), 1);
        assert!(a < b);
        assert!(a.neg() > b.neg());
        assert_eq!(Dyadic::new(BigInt::from(4), -1), Dyadic::new(BigInt::from(4), -1));
        assert_eq!(a.cmp(&Dyadic::new(BigInt::from(6), -2)), Ordering::Equal);
    }

    #[test]
    fn floor_shift_rounds_down_for_negatives() {
        assert_eq!(floor_shr(&BigInt::from(-5), 1), BigInt::from(-3));
        assert_eq!(floor_shr(&BigInt::from(5), 1), BigInt::from(2));
    }
}
