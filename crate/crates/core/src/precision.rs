//! Reduction of nθ and evaluation of |sin(πnθ)|ⁿ and |cos(πnθ)|ⁿ.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::angle::AngleForm;
use crate::ball::{BoundedReal, Dyadic, Mag};
use crate::elementary::ln_sin_pi;
use crate::error::{Error, Result};

/// f64 just above π.
#[allow(clippy::approx_constant)]
const PI_UP: f64 = 3.1415927;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Sin,
    Cos,
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesKind::Sin => "sin",
            SeriesKind::Cos => "cos",
        })
    }
}

impl FromStr for SeriesKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sin" => Ok(SeriesKind::Sin),
            "cos" => Ok(SeriesKind::Cos),
            other => Err(Error::Parse(format!("unknown series kind {other:?}; expected sin or cos"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrecisionBudget {
    pub working_digits: u32,
    pub target_radius: f64,
}

impl PrecisionBudget {
    pub const MIN_DIGITS: u32 = 10;

    pub fn new(working_digits: u32, target_radius: f64) -> Result<Self> {
        if working_digits < Self::MIN_DIGITS {
            return Err(Error::Precondition(format!(
                "working_digits must be at least {}, got {working_digits}",
                Self::MIN_DIGITS
            )));
        }
        if !(target_radius > 0.0) || !target_radius.is_finite() {
            return Err(Error::Precondition(format!("target_radius must be positive, got {target_radius}")));
        }
        Ok(PrecisionBudget { working_digits, target_radius })
    }

    /// Digits for indices up to `n_max` with `output_digits` correct digits.
    pub fn for_range(n_max: u64, output_digits: u32) -> Self {
        let lost = (n_max.max(1) as f64).log10().ceil() as u32;
        let working_digits = (lost + output_digits + 10).max(Self::MIN_DIGITS);
        PrecisionBudget { working_digits, target_radius: 10f64.powi(-(output_digits as i32)) }
    }

    pub fn bits(&self) -> u32 {
        (self.working_digits as f64 * std::f64::consts::LOG2_10).ceil() as u32
    }

    pub fn target_bits(&self) -> u32 {
        (-self.target_radius.log2()).max(1.0).ceil() as u32
    }
}

impl Default for PrecisionBudget {
    fn default() -> Self {
        PrecisionBudget { working_digits: 40, target_radius: 1e-20 }
    }
}

/// nθ reduced modulo 2 together with the two distances the terms need.
#[derive(Clone, Debug, Serialize)]
pub struct ReducedAngle {
    pub frac_part: BoundedReal,
    pub dist_to_int: BoundedReal,
    pub dist_to_half: BoundedReal,
    pub exact: bool,
    /// nθ mod 2 as the closed interval `[turn_center ± turn_rad]`.
    #[serde(skip)]
    pub turn_center: BigRational,
    #[serde(skip)]
    pub turn_rad: BigRational,
}

impl ReducedAngle {
    pub fn distance(&self, kind: SeriesKind) -> &BoundedReal {
        match kind {
            SeriesKind::Sin => &self.dist_to_int,
            SeriesKind::Cos => &self.dist_to_half,
        }
    }

    /// Exact distance for rational θ.
    pub fn exact_distance(&self, kind: SeriesKind) -> Option<BigRational> {
        if !self.exact {
            return None;
        }
        let one = BigRational::one();
        let f = self.turn_center.clone() - self.turn_center.floor();
        Some(match kind {
            SeriesKind::Sin => f.clone().min(&one - &f),
            SeriesKind::Cos => (f - BigRational::new(1.into(), 2.into())).abs(),
        })
    }

    /// Sign of sin(πnθ) or cos(πnθ): Some(+1/-1/0) when decided.
    pub fn base_sign(&self, kind: SeriesKind) -> Option<i8> {
        sign_on_turn(kind, &self.turn_center, &self.turn_rad)
    }
}

fn sign_on_turn(kind: SeriesKind, c: &BigRational, r: &BigRational) -> Option<i8> {
    let half = BigRational::new(1.into(), 2.into());
    let crit: [BigRational; 3] = match kind {
        SeriesKind::Sin => [BigRational::zero(), BigRational::one(), BigRational::from_integer(2.into())],
        SeriesKind::Cos => [half.clone(), BigRational::new(3.into(), 2.into()), BigRational::new(5.into(), 2.into())],
    };
    let (lo, hi) = (c - r, c + r);
    if r.is_zero() && crit.iter().any(|p| p == c) {
        return Some(0);
    }
    if crit.iter().any(|p| &lo <= p && p <= &hi) {
        return None;
    }
    // reference point inside the interval decides the sign
    let x = c.clone();
    Some(match kind {
        SeriesKind::Sin => {
            if x < BigRational::one() {
                1
            } else {
                -1
            }
        }
        SeriesKind::Cos => {
            if x < half || x > BigRational::new(3.into(), 2.into()) {
                1
            } else {
                -1
            }
        }
    })
}

fn rational_mod2(x: &BigRational) -> BigRational {
    let two_den = x.denom() * 2u32;
    BigRational::new(x.numer().mod_floor(&two_den), x.denom().clone())
}

fn rat_to_ball(r: &BigRational, rad: &BigRational, prec: u32) -> BoundedReal {
    let b = BoundedReal::from_rational(r, prec);
    if rad.is_zero() {
        b
    } else {
        b.add_radius(BoundedReal::from_rational(rad, 64).abs_upper())
    }
}

fn bit_len(n: u64) -> u32 {
    64 - n.leading_zeros()
}

/// Bits of θ needed so that `n` times its error stays below `target`.
fn theta_bits(n: u64, budget: &PrecisionBudget) -> u32 {
    budget.bits().max(budget.target_bits() + 2) + bit_len(n) + 8
}

pub fn reduce_angle(n: u64, theta: &AngleForm, budget: &PrecisionBudget) -> Result<ReducedAngle> {
    if n == 0 {
        return Err(Error::InvalidN(0));
    }
    let prec = budget.bits() + 8;
    let nb = BigInt::from(n);
    if let Some(sp) = theta.stated_precision() {
        // n * 10^-sp <= target_radius, compared exactly
        let lhs = BigRational::new(nb.clone(), BigInt::from(10u32).pow(sp));
        let rhs = f64_to_rational(budget.target_radius);
        if lhs > rhs {
            return Err(Error::PrecisionExhausted(format!(
                "θ = {theta} carries {sp} decimal places, too few for n = {n} at target radius {:e}",
                budget.target_radius
            )));
        }
    }
    let approx = theta.approx(theta_bits(n, budget));
    let center = rational_mod2(&(&approx.center * BigRational::from_integer(nb.clone())));
    let rad = &approx.rad * BigRational::from_integer(nb);
    if !rad.is_zero() && rad > f64_to_rational(budget.target_radius) {
        return Err(Error::PrecisionExhausted(format!(
            "θ = {theta} is known only to within {:e}; n = {n} exceeds the target radius",
            approx.rad.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(build_reduced(center, rad, prec))
}

fn build_reduced(center: BigRational, rad: BigRational, prec: u32) -> ReducedAngle {
    let one = BigRational::one();
    let half = BigRational::new(1.into(), 2.into());
    let k = center.floor();
    let f = &center - &k;
    let frac_part = if (&f - &rad) >= BigRational::zero() && (&f + &rad) < one {
        rat_to_ball(&f, &rad, prec)
    } else {
        // the interval crosses an integer: fall back to [0, 1]
        BoundedReal::from_rational(&half, prec).add_radius(Mag::pow2(-1))
    };
    let dint = f.clone().min(&one - &f);
    let dhalf = (&f - &half).abs();
    ReducedAngle {
        frac_part,
        dist_to_int: rat_to_ball(&dint, &rad, prec),
        dist_to_half: rat_to_ball(&dhalf, &rad, prec),
        exact: rad.is_zero(),
        turn_center: center,
        turn_rad: rad,
    }
}

pub(crate) fn f64_to_rational(x: f64) -> BigRational {
    let (m, e) = crate::ball::decode_f64(x.abs());
    let v = Dyadic::new(BigInt::from(m), e).to_rational();
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// |f|ⁿ from the enclosure `d` of the distance with sin(πd) = |f|.
fn magnitude_from_distance(n: u64, d: &BoundedReal, exact: Option<&BigRational>, prec: u32) -> Result<BoundedReal> {
    let half = BigRational::new(1.into(), 2.into());
    if let Some(e) = exact {
        if *e == half {
            return Ok(BoundedReal::one(prec));
        }
        if e.is_zero() {
            return Ok(BoundedReal::zero(prec));
        }
    }
    let half_ball = BoundedReal::pow2(-1, prec);
    if !d.definitely_lt(&half_ball) {
        return Err(Error::PrecisionExhausted(format!(
            "distance enclosure {d} reaches the unit-magnitude point 1/2"
        )));
    }
    if !d.is_positive() {
        // sin(πd)ⁿ <= (πd)ⁿ on the part of the ball above zero
        let hi = d.abs_upper().mul(Mag::from_f64_up(PI_UP));
        let bound = hi.min(Mag::from_u64(1)).pow_u64(n);
        return Ok(BoundedReal::zero(prec).add_radius(bound));
    }
    let wp = prec + bit_len(n) + 8;
    let d = d.clone().with_prec(wp.max(d.prec()));
    let l = ln_sin_pi(&d).with_prec(wp);
    Ok((l * BoundedReal::from_u64(n, 64)).exp().with_prec(prec))
}

/// n^(-α) as an enclosure.
pub fn inv_pow(n: u64, alpha: f64, prec: u32) -> BoundedReal {
    let nb = BoundedReal::from_u64(n, prec.max(64));
    if alpha == 0.0 || n == 1 {
        BoundedReal::one(prec)
    } else if alpha == 1.0 {
        BoundedReal::one(prec) / nb
    } else if alpha == 0.5 {
        BoundedReal::one(prec) / nb.sqrt().with_prec(prec + 4)
    } else {
        (BoundedReal::from_f64(-alpha, prec + 8) * nb.with_prec(prec + 8).ln()).exp().with_prec(prec)
    }
}

pub fn term_magnitude(n: u64, theta: &AngleForm, kind: SeriesKind, budget: &PrecisionBudget) -> Result<BoundedReal> {
    let r = reduce_angle(n, theta, budget)?;
    let exact = r.exact_distance(kind);
    magnitude_from_distance(n, r.distance(kind), exact.as_ref(), budget.bits() + 8)
}

pub fn signed_term(
    n: u64,
    theta: &AngleForm,
    kind: SeriesKind,
    alpha: f64,
    budget: &PrecisionBudget,
) -> Result<BoundedReal> {
    if !alpha.is_finite() {
        return Err(Error::InvalidAlpha(alpha));
    }
    let r = reduce_angle(n, theta, budget)?;
    let exact = r.exact_distance(kind);
    let prec = budget.bits() + 8;
    let mag = magnitude_from_distance(n, r.distance(kind), exact.as_ref(), prec)?;
    let scaled = mag * inv_pow(n, alpha, prec);
    Ok(apply_sign(scaled, n, r.base_sign(kind)))
}

fn apply_sign(mag: BoundedReal, n: u64, base_sign: Option<i8>) -> BoundedReal {
    if n % 2 == 0 {
        return mag;
    }
    match base_sign {
        Some(s) if s < 0 => -mag,
        Some(_) => mag,
        None => {
            // sign unknown: the term lies in [-M, M]
            let m = mag.abs_upper();
            BoundedReal::zero(mag.prec()).add_radius(m)
        }
    }
}

/// Fixed-point scale of orbit points: one turn is 2^ORBIT_BITS.
pub const ORBIT_BITS: u32 = 126;
const ORBIT_MASK: u128 = (1u128 << (ORBIT_BITS + 1)) - 1;
const HALF_TURN: u128 = 1u128 << ORBIT_BITS;
const QUARTER: u128 = 1u128 << (ORBIT_BITS - 1);

/// Fixed-point orbit of nθ mod 2 at scale 2^126 for fast scans over n.
#[derive(Clone, Debug)]
pub struct Orbit {
    m: u128,
    err: u128,
}

/// nθ mod 2 at one index, in units of 2^-126, with its error in the same units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitPoint {
    pub x: u128,
    pub err: u128,
}

impl Orbit {
    /// Fails when the input cannot support indices up to `n_max`.
    pub fn new(theta: &AngleForm, n_max: u64) -> Result<Orbit> {
        let approx = theta.approx(ORBIT_BITS + 8);
        let scale = BigRational::from_integer(BigInt::one() << ORBIT_BITS);
        let c = rational_mod2(&approx.center) * &scale;
        let m = c.floor().to_integer();
        let frac_err = if c.is_integer() { 0u32 } else { 1 };
        let rad_ulps = (&approx.rad * &scale).ceil().to_integer() + frac_err;
        let m = m.to_u128().ok_or_else(|| Error::Precondition("orbit reduction overflow".into()))?;
        let err = rad_ulps
            .to_u128()
            .filter(|e| e.checked_mul(n_max as u128).map_or(false, |t| t < QUARTER >> 20))
            .ok_or_else(|| {
                Error::PrecisionExhausted(format!("θ = {theta} is too imprecise for indices up to {n_max}"))
            })?;
        Ok(Orbit { m, err })
    }

    pub fn at(&self, n: u64) -> OrbitPoint {
        OrbitPoint { x: self.m.wrapping_mul(n as u128) & ORBIT_MASK, err: self.err * n as u128 }
    }

    pub fn step(&self, p: OrbitPoint) -> OrbitPoint {
        OrbitPoint { x: (p.x + self.m) & ORBIT_MASK, err: p.err + self.err }
    }
}

impl OrbitPoint {
    fn frac(&self) -> u128 {
        self.x & (HALF_TURN - 1)
    }

    /// Distance in units of 2^-126: to the nearest integer (sin) or half-integer (cos).
    pub fn distance(&self, kind: SeriesKind) -> u128 {
        let f = self.frac();
        match kind {
            SeriesKind::Sin => f.min(HALF_TURN - f),
            SeriesKind::Cos => f.abs_diff(QUARTER),
        }
    }

    pub fn distance_ball(&self, kind: SeriesKind, prec: u32) -> BoundedReal {
        BoundedReal::from_dyadic(BigInt::from(self.distance(kind)), -(ORBIT_BITS as i64), prec.max(130))
            .add_radius(Mag::from_u128_up(self.err, -(ORBIT_BITS as i64)))
            .with_prec(prec)
    }

    /// Enclosure [lo, hi] of 1/2 - distance, in units of 2^-126.
    pub fn unit_gap_bounds(&self, kind: SeriesKind) -> (u128, u128) {
        let u = QUARTER - self.distance(kind).min(QUARTER);
        (u.saturating_sub(self.err), (u + self.err).min(QUARTER))
    }

    /// Lower bound of 1/2 - distance as f64 (for cheap magnitude bounds).
    pub fn gap_to_unit_lower(&self, kind: SeriesKind) -> f64 {
        let t = QUARTER.saturating_sub(self.distance(kind)).saturating_sub(self.err);
        crate::ball::ldexp(t as f64, -(ORBIT_BITS as i64)) * (1.0 - 1e-15)
    }

    pub fn base_sign(&self, kind: SeriesKind) -> Option<i8> {
        let (x, e) = (self.x, self.err);
        let crit: &[u128] = match kind {
            SeriesKind::Sin => &[0, HALF_TURN, 2 * HALF_TURN],
            SeriesKind::Cos => &[QUARTER, 3 * QUARTER],
        };
        let lo = x.wrapping_sub(e);
        let straddles = crit.iter().any(|&c| {
            if x >= e {
                lo <= c && c <= x + e
            } else {
                true
            }
        });
        if straddles {
            return None;
        }
        Some(match kind {
            SeriesKind::Sin => {
                if x < HALF_TURN {
                    1
                } else {
                    -1
                }
            }
            SeriesKind::Cos => {
                if x < QUARTER || x > 3 * QUARTER {
                    1
                } else {
                    -1
                }
            }
        })
    }
}

/// log2 upper bound of |f|ⁿ from a lower bound `t` on 1/2 - d.
///
/// Uses sin(π(1/2 - t)) = cos(πt) <= 1 - 4t² <= exp(-4t²).
pub fn magnitude_log2_bound(n: u64, t_lower: f64) -> f64 {
    if t_lower <= 0.0 {
        return 0.0;
    }
    -5.77 * n as f64 * t_lower * t_lower
}

#[derive(Clone, Debug)]
struct Residue {
    sign: i8,
    unit: bool,
    zero: bool,
    ln_mag: Option<BoundedReal>,
    ln_mag_upper: f64,
}

/// Sequential term evaluator with per-input caching.
pub struct TermEngine {
    kind: SeriesKind,
    alpha: f64,
    prec: u32,
    skip_log2: f64,
    source: Source,
}

enum Source {
    Residues { p: u64, q: u64, cache: Vec<OnceLock<Residue>> },
    Orbit(Orbit),
    Generic { theta: AngleForm, budget: PrecisionBudget },
}

impl TermEngine {
    /// `budget` fixes the working precision; terms below the per-term share of
    /// its target radius are replaced by a rigorous bound.
    pub fn new(theta: &AngleForm, kind: SeriesKind, alpha: f64, n_max: u64, budget: &PrecisionBudget) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidAlpha(alpha));
        }
        let prec = budget.bits() + 8;
        let skip_log2 = -(budget.target_bits() as f64) - (n_max.max(2) as f64).log2() - 4.0;
        let source = if let Some(r) = theta.exact_rational() {
            match (r.numer().mod_floor(&(r.denom() * 2u32)).to_u64(), r.denom().to_u64()) {
                (Some(p), Some(q)) if q <= 1 << 15 => {
                    Source::Residues { p, q, cache: (0..2 * q).map(|_| OnceLock::new()).collect() }
                }
                _ => Source::Generic { theta: theta.clone(), budget: *budget },
            }
        } else if budget.target_bits() + 2 * bit_len(n_max) <= 116 {
            match Orbit::new(theta, n_max) {
                Ok(o) => Source::Orbit(o),
                Err(_) => Source::Generic { theta: theta.clone(), budget: *budget },
            }
        } else {
            Source::Generic { theta: theta.clone(), budget: *budget }
        };
        if let Some(sp) = theta.stated_precision() {
            let lhs = BigRational::new(BigInt::from(n_max), BigInt::from(10u32).pow(sp));
            if lhs > f64_to_rational(budget.target_radius) {
                return Err(Error::PrecisionExhausted(format!(
                    "θ = {theta} carries {sp} decimal places, too few for N = {n_max}"
                )));
            }
        }
        Ok(TermEngine { kind, alpha, prec, skip_log2, source })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.source, Source::Residues { .. })
    }

    fn residue(&self, t: u64, q: u64, cache: &[OnceLock<Residue>]) -> Residue {
        cache[t as usize]
            .get_or_init(|| {
                let center = BigRational::new(BigInt::from(t), BigInt::from(q));
                let red = build_reduced(center, BigRational::zero(), self.prec + 16);
                let d = red.exact_distance(self.kind).unwrap_or_default();
                let half = BigRational::new(1.into(), 2.into());
                let sign = red.base_sign(self.kind).unwrap_or(0);
                if d == half {
                    return Residue { sign, unit: true, zero: false, ln_mag: None, ln_mag_upper: 0.0 };
                }
                if d.is_zero() {
                    return Residue { sign: 0, unit: false, zero: true, ln_mag: None, ln_mag_upper: f64::NEG_INFINITY };
                }
                let wp = self.prec + 80;
                let l = ln_sin_pi(&BoundedReal::from_rational(&d, wp));
                let up = l.upper().to_f64();
                Residue { sign, unit: false, zero: false, ln_mag_upper: up + up.abs() * 1e-12, ln_mag: Some(l) }
            })
            .clone()
    }

    /// The signed term f(πnθ)ⁿ / n^α.
    pub fn term(&self, n: u64) -> Result<BoundedReal> {
        self.eval(n, true)
    }

    /// The absolute term |f(πnθ)|ⁿ / n^α.
    pub fn abs_term(&self, n: u64) -> Result<BoundedReal> {
        self.eval(n, false)
    }

    fn eval(&self, n: u64, signed: bool) -> Result<BoundedReal> {
        if n == 0 {
            return Err(Error::InvalidN(0));
        }
        let prec = self.prec;
        match &self.source {
            Source::Residues { p, q, cache } => {
                let t = ((*p as u128 * n as u128) % (2 * *q as u128)) as u64;
                let r = self.residue(t, *q, cache);
                if r.zero {
                    return Ok(BoundedReal::zero(prec));
                }
                let sign = if signed && n % 2 == 1 { r.sign } else { 1 };
                if r.unit {
                    let v = inv_pow(n, self.alpha, prec);
                    return Ok(if sign < 0 { -v } else { v });
                }
                let bound = n as f64 * r.ln_mag_upper / std::f64::consts::LN_2 * (1.0 - 1e-12);
                if bound < self.skip_log2 {
                    return Ok(BoundedReal::zero(prec).add_radius(Mag::pow2(bound.ceil() as i64)));
                }
                let l = r.ln_mag.as_ref().expect("non-unit residue carries its logarithm");
                let wp = prec + bit_len(n) + 8;
                let ln_n = BoundedReal::from_u64(n, wp).ln();
                let expo = &(l.clone().with_prec(wp) * BoundedReal::from_u64(n, 64))
                    - &(BoundedReal::from_f64(self.alpha, wp) * ln_n);
                let v = expo.exp().with_prec(prec);
                Ok(if sign < 0 { -v } else { v })
            }
            Source::Orbit(o) => {
                let pt = o.at(n);
                self.eval_point(n, &pt, signed)
            }
            Source::Generic { theta, budget } => {
                let r = reduce_angle(n, theta, budget)?;
                let exact = r.exact_distance(self.kind);
                let d = r.distance(self.kind);
                if exact.is_none() {
                    let t = 0.5 - d.upper().to_f64();
                    let bound = magnitude_log2_bound(n, t * (1.0 - 1e-12));
                    if bound < self.skip_log2 {
                        return Ok(BoundedReal::zero(prec).add_radius(Mag::pow2(bound.ceil() as i64)));
                    }
                }
                let mag = magnitude_from_distance(n, d, exact.as_ref(), prec)?;
                let v = mag * inv_pow(n, self.alpha, prec);
                Ok(if signed { apply_sign(v, n, r.base_sign(self.kind)) } else { v })
            }
        }
    }

    /// Evaluate at an orbit point produced by the caller's own scan.
    pub fn eval_point(&self, n: u64, pt: &OrbitPoint, signed: bool) -> Result<BoundedReal> {
        let prec = self.prec;
        let bound = magnitude_log2_bound(n, pt.gap_to_unit_lower(self.kind));
        if bound < self.skip_log2 {
            return Ok(BoundedReal::zero(prec).add_radius(Mag::pow2(bound.ceil() as i64)));
        }
        let d = pt.distance_ball(self.kind, prec + 16);
        let mag = magnitude_from_distance(n, &d, None, prec)?;
        let v = mag * inv_pow(n, self.alpha, prec);
        Ok(if signed { apply_sign(v, n, pt.base_sign(self.kind)) } else { v })
    }

    pub fn orbit(&self) -> Option<&Orbit> {
        match &self.source {
            Source::Orbit(o) => Some(o),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::NamedConstant;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn budget() -> PrecisionBudget {
        PrecisionBudget::new(30, 1e-20).unwrap()
    }

    #[test]
    fn reduce_exact_examples() {
        let r = reduce_angle(4, &AngleForm::rational(1, 2).unwrap(), &budget()).unwrap();
        assert!(r.exact);
        assert_eq!(r.exact_distance(SeriesKind::Sin), Some(rat(0, 1)));
        assert_eq!(r.exact_distance(SeriesKind::Cos), Some(rat(1, 2)));
        let r = reduce_angle(1, &AngleForm::rational(1, 3).unwrap(), &budget()).unwrap();
        assert_eq!(r.exact_distance(SeriesKind::Cos), Some(rat(1, 6)));
    }

    #[test]
    fn decimal_precision_guard() {
        let th = AngleForm::parse("1.4142135623730950488016887242096980785696~40").unwrap();
        let b = PrecisionBudget::new(40, 1e-30).unwrap();
        let r = reduce_angle(1_000_000, &th, &b).unwrap();
        assert!(r.dist_to_int.rad_f64() <= 1e6 * 1e-40);
        let short = AngleForm::parse("1.41421~5").unwrap();
        assert!(matches!(reduce_angle(1000, &short, &b), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn term_examples() {
        let b = budget();
        let half = AngleForm::rational(1, 2).unwrap();
        let third = AngleForm::rational(1, 3).unwrap();
        let m = term_magnitude(3, &half, SeriesKind::Sin, &b).unwrap();
        assert!(m.is_exact() && m.contains_rational(&rat(1, 1)));
        let m = term_magnitude(2, &third, SeriesKind::Cos, &b).unwrap();
        assert!(m.contains_rational(&rat(1, 4)) && m.rad_f64() < 1e-25);
        let t = signed_term(3, &half, SeriesKind::Sin, 1.0, &b).unwrap();
        assert!(t.contains_rational(&rat(-1, 3)));
        let t = signed_term(6, &half, SeriesKind::Cos, 1.0, &b).unwrap();
        assert!(t.contains_rational(&rat(1, 6)));
        let t = signed_term(5, &third, SeriesKind::Cos, 0.5, &b).unwrap();
        assert!((t.mid_f64() - 0.5f64.powi(5) / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn engine_matches_direct_terms() {
        let b = budget();
        for theta in [AngleForm::rational(1, 3).unwrap(), AngleForm::named(NamedConstant::Golden)] {
            for kind in [SeriesKind::Sin, SeriesKind::Cos] {
                let eng = TermEngine::new(&theta, kind, 0.75, 1000, &PrecisionBudget::new(20, 1e-15).unwrap()).unwrap();
                for n in [1u64, 2, 3, 7, 50, 999] {
                    let a = eng.term(n).unwrap();
                    let d = signed_term(n, &theta, kind, 0.75, &b).unwrap();
                    assert!(a.overlaps(&d), "{theta} {kind} n={n}: {a} vs {d}");
                }
            }
        }
    }

    #[test]
    fn orbit_tracks_exact_reduction() {
        let th = AngleForm::named(NamedConstant::Sqrt2);
        let o = Orbit::new(&th, 1_000_000).unwrap();
        let mut pt = o.at(1);
        for n in 1..2000u64 {
            assert_eq!(pt, o.at(n));
            let r = reduce_angle(n, &th, &budget()).unwrap();
            let d = pt.distance_ball(SeriesKind::Cos, 140);
            assert!(d.overlaps(&r.dist_to_half));
            pt = o.step(pt);
        }
    }

    #[test]
    fn budget_policy() {
        let b = PrecisionBudget::for_range(1_000_000, 15);
        assert_eq!(b.working_digits, 31);
        assert!(PrecisionBudget::new(5, 1e-3).is_err());
    }
}
