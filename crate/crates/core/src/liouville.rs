//! Binary-expansion numbers ξ whose two series diverge, with exact exponent certificates.
//!
//! ν grows doubly exponentially: ν_3 already has a few hundred bits and ν_4 is
//! only representable as a sum of powers of two with big-integer exponents.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::angle::BigIntStr;
use crate::ball::BoundedReal;
use crate::elementary::{ln2, pi};
use crate::error::{Error, Result};
use crate::precision::SeriesKind;
use crate::series::{rate_certificate, uniform_aq, RateCertificate};
use crate::shells::least_squares;

/// A nonnegative integer Σ 2^e over a set of distinct big-integer exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseBinary {
    bits: BTreeSet<BigInt>,
}

impl SparseBinary {
    pub fn zero() -> Self {
        SparseBinary::default()
    }

    pub fn pow2(e: BigInt) -> Self {
        let mut s = SparseBinary::zero();
        s.add_pow2(e);
        s
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        assert!(!n.is_negative(), "SparseBinary holds nonnegative values");
        let mut s = SparseBinary::zero();
        for i in 0..n.bits() {
            if n.bit(i) {
                s.bits.insert(BigInt::from(i));
            }
        }
        s
    }

    pub fn from_u64(n: u64) -> Self {
        Self::from_bigint(&BigInt::from(n))
    }

    /// Adds 2^e with carries.
    pub fn add_pow2(&mut self, mut e: BigInt) {
        while self.bits.remove(&e) {
            e += 1;
        }
        self.bits.insert(e);
    }

    pub fn add(&self, o: &SparseBinary) -> SparseBinary {
        let mut s = self.clone();
        for e in &o.bits {
            s.add_pow2(e.clone());
        }
        s
    }

    pub fn shl(&self, k: &BigInt) -> SparseBinary {
        SparseBinary { bits: self.bits.iter().map(|e| e + k).collect() }
    }

    pub fn mul_u64(&self, c: u64) -> SparseBinary {
        let mut s = SparseBinary::zero();
        for i in 0..64 {
            if c >> i & 1 == 1 {
                s = s.add(&self.shl(&BigInt::from(i)));
            }
        }
        s
    }

    /// The value when it fits in `max_bits` bits.
    pub fn to_bigint(&self, max_bits: u64) -> Option<BigInt> {
        match self.bits.iter().next_back() {
            None => Some(BigInt::zero()),
            Some(top) if top < &BigInt::from(max_bits) => {
                Some(self.bits.iter().fold(BigInt::zero(), |acc, e| acc + (BigInt::one() << e.to_u64().unwrap())))
            }
            Some(_) => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &BigInt> {
        self.bits.iter()
    }
}

impl Ord for SparseBinary {
    fn cmp(&self, o: &Self) -> Ordering {
        self.bits.iter().rev().cmp(o.bits.iter().rev())
    }
}

impl PartialOrd for SparseBinary {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

const DECIMAL_BITS: u64 = 4096;

impl fmt::Display for SparseBinary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.to_bigint(DECIMAL_BITS) {
            return write!(f, "{v}");
        }
        let parts: Vec<String> = self.bits.iter().rev().map(|e| format!("2^{e}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for SparseBinary {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub const MAX_DEPTH: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct LiouvilleSchedule {
    pub interval: (String, String),
    pub u: BigIntStr,
    pub b: Vec<u64>,
    pub xi0: String,
    /// ξ_1 = p / 2^{ν_1} with p odd.
    pub xi1: String,
    pub nu: Vec<SparseBinary>,
    /// A_{2^{ν_k}} for k = 1..K-1, the values the recursion used.
    pub a_values: Vec<SparseBinary>,
    /// "exact" when A was computed from the residues, "bound_3q" when the analytic bound was used.
    pub a_sources: Vec<&'static str>,
}

impl LiouvilleSchedule {
    pub fn depth(&self) -> usize {
        self.nu.len()
    }

    /// ν_k as an exact integer (1-based), when it is small enough to hold.
    pub fn nu_exact(&self, k: usize) -> Option<BigInt> {
        self.nu.get(k.checked_sub(1)?)?.to_bigint(1 << 20)
    }

    /// Truncation ξ_k = ξ_0 + Σ_{i≤k} 2^{-ν_i} as an exact rational, while ν_k is small.
    pub fn xi_k(&self, k: usize) -> Option<BigRational> {
        let mut v = self.xi0_rational();
        for i in 1..=k {
            let nu = self.nu_exact(i)?.to_u64().filter(|&n| n <= 1 << 16)?;
            v += BigRational::new(BigInt::one(), BigInt::one() << nu);
        }
        Some(v)
    }

    fn xi0_rational(&self) -> BigRational {
        let mut v = BigRational::from_integer(self.u.0.clone());
        for &b in &self.b {
            v += BigRational::new(BigInt::one(), BigInt::one() << b);
        }
        v
    }
}

/// ξ_0 = u + Σ 2^{-b_i} on a dyadic grid at or above x1, and the least admissible ν_1.
fn choose_start(x1: &BigRational, x2: &BigRational) -> (BigInt, Vec<u64>, u64) {
    let width = (x2 - x1).to_f64().unwrap_or(0.0);
    let m_max = if width > 0.0 { (-width.log2()).ceil().max(0.0) as u64 + 4 } else { 64 };
    let mut best: Option<(u64, BigInt, Vec<u64>)> = None;
    for m in 0..=m_max.max(4) {
        let scale = BigRational::from_integer(BigInt::one() << m);
        let grid = (x1 * &scale).ceil().to_integer();
        let xi0 = BigRational::new(grid.clone(), BigInt::one() << m);
        if &xi0 >= x2 {
            continue;
        }
        let u = xi0.floor().to_integer();
        let frac: BigInt = &grid - (&u << m);
        let b: Vec<u64> = (1..=m).filter(|&i| frac.bit(m - i)).collect();
        let mut nu = b.last().map_or(2, |&l| (l + 1).max(2));
        while &xi0 + BigRational::new(BigInt::from(2), BigInt::one() << nu) >= *x2 {
            nu += 1;
        }
        if best.as_ref().map_or(true, |(n, _, _)| nu < *n) {
            best = Some((nu, u, b));
        }
    }
    let (nu, u, b) = best.expect("a nonempty interval contains grid points");
    (u, b, nu)
}

/// A_{2^ν} for the recursion: exact residue value for small q, 3q beyond.
fn a_for(nu: &SparseBinary) -> Result<(SparseBinary, &'static str)> {
    if let Some(n) = nu.to_bigint(64).and_then(|v| v.to_u64()) {
        if n <= 12 {
            let q = 1u64 << n;
            let a = uniform_aq(q)?;
            let source = if 2 * q <= 64 { "exact" } else { "bound_3q" };
            return Ok((SparseBinary::from_u64(a), source));
        }
    }
    let exp = nu.to_bigint(1 << 20).ok_or_else(|| {
        Error::Precondition("ν is too large to form A_{2^ν}; the depth cap prevents this".into())
    })?;
    // 3 · 2^ν
    Ok((SparseBinary::pow2(exp.clone()).add(&SparseBinary::pow2(exp + 1)), "bound_3q"))
}

fn next_nu(nu_k: &BigInt, a: &SparseBinary, k: usize) -> SparseBinary {
    // 2^{ν_k+2}(A + k + 4) + 2ν_k + 3
    let factor = a.add(&SparseBinary::from_u64(k as u64 + 4));
    let lead = factor.shl(&(nu_k + 2));
    lead.add(&SparseBinary::from_bigint(&(nu_k * 2 + 3)))
}

pub fn build_schedule(x1: &BigRational, x2: &BigRational, depth: usize) -> Result<LiouvilleSchedule> {
    if x1 >= x2 {
        return Err(Error::EmptyInterval(x1.to_string(), x2.to_string()));
    }
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::Precondition(format!("depth must be in 1..={MAX_DEPTH}, got {depth}")));
    }
    let (u, b, nu1) = choose_start(x1, x2);
    let mut nu = vec![SparseBinary::from_u64(nu1)];
    let mut a_values = Vec::new();
    let mut a_sources = Vec::new();
    for k in 1..depth {
        let nu_k = nu[k - 1].to_bigint(1 << 20).expect("ν_k below the depth cap is exact");
        let (a, source) = a_for(&nu[k - 1])?;
        nu.push(next_nu(&nu_k, &a, k));
        a_values.push(a);
        a_sources.push(source);
    }
    let mut s = LiouvilleSchedule {
        interval: (x1.to_string(), x2.to_string()),
        u: BigIntStr(u),
        b,
        xi0: String::new(),
        xi1: String::new(),
        nu,
        a_values,
        a_sources,
    };
    let xi0 = s.xi0_rational();
    let xi1 = s.xi_k(1).expect("ν_1 is small");
    s.xi0 = xi0.to_string();
    s.xi1 = xi1.to_string();
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceCertificate {
    pub k: usize,
    /// q = 2^{ν_k}; this is ν_k.
    pub q_exponent: SparseBinary,
    #[serde(rename = "A_q")]
    pub a_q: SparseBinary,
    /// log2 L = 2q(A_q + k + 4).
    pub l_exponent: SparseBinary,
    /// log2 N_k = 1 + ν_k + log2 L.
    pub n_exponent: SparseBinary,
    pub nu_next: SparseBinary,
    /// log2 of the bound on N_k² |ξ - ξ_k|: 2 log2 N_k + 1 - ν_{k+1}.
    pub slack_exponent: BigIntStr,
    /// The bound on N_k² |ξ - ξ_k| itself.
    pub slack: String,
    /// (1/q) ln L - A_q ≥ k + 4 for the truncation ξ_k.
    pub truncation_bound: u64,
    pub claimed_lower_bound: BoundedReal,
    pub lower_bound_exceeds_k: bool,
}

pub fn certify(schedule: &LiouvilleSchedule, k: usize) -> Result<DivergenceCertificate> {
    if k == 0 || k + 1 > schedule.depth() {
        return Err(Error::Precondition(format!(
            "certificate k = {k} needs ν_{} but the schedule has depth {}",
            k + 1,
            schedule.depth()
        )));
    }
    let nu_k = schedule.nu_exact(k).ok_or_else(|| Error::Precondition(format!("ν_{k} is not held exactly")))?;
    let a = &schedule.a_values[k - 1];
    let nu_next = &schedule.nu[k];
    let l_exp = a.add(&SparseBinary::from_u64(k as u64 + 4)).shl(&(&nu_k + 1));
    let n_exp = l_exp.add(&SparseBinary::from_bigint(&(&nu_k + 1)));
    let lhs = n_exp.shl(&BigInt::one()).add(&SparseBinary::from_u64(1));
    if &lhs != nu_next {
        return Err(Error::IdentityViolated(format!("2 log2 N_{k} + 1 = {lhs} but ν_{} = {nu_next}", k + 1)));
    }
    // geometric tail |ξ - ξ_k| ≤ 2·2^{-ν_{k+1}} needs ν strictly increasing
    if schedule.nu.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::IdentityViolated("ν is not strictly increasing".into()));
    }
    // (1/q) ln L - A = 2 ln2 (A + k + 4) - A ≥ k + 4 because 2 ln 2 > 1
    let two_ln2 = ln2(64).mul_2exp(1);
    if !two_ln2.definitely_gt(&BoundedReal::one(64)) {
        return Err(Error::IdentityViolated("2 ln 2 > 1 failed to certify".into()));
    }
    let prec = 128;
    let claimed = &BoundedReal::from_u64(k as u64 + 4, prec) - &pi(prec);
    let exceeds = claimed.definitely_gt(&BoundedReal::from_u64(k as u64, prec));
    if !exceeds {
        return Err(Error::IdentityViolated(format!("k + 4 - π does not exceed k = {k}")));
    }
    Ok(DivergenceCertificate {
        k,
        q_exponent: SparseBinary::from_bigint(&nu_k),
        a_q: a.clone(),
        l_exponent: l_exp,
        n_exponent: n_exp,
        nu_next: nu_next.clone(),
        slack_exponent: BigIntStr(BigInt::zero()),
        slack: "1".into(),
        truncation_bound: k as u64 + 4,
        claimed_lower_bound: claimed,
        lower_bound_exceeds_k: exceeds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoPoint {
    #[serde(rename = "L")]
    pub l: u64,
    pub sin: RateCertificate,
    pub cos: RateCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoReport {
    pub note: &'static str,
    pub q: u64,
    pub p: i64,
    #[serde(rename = "A_q")]
    pub a_q: u64,
    pub k_target: u64,
    pub n_budget: u64,
    pub points: Vec<DemoPoint>,
    /// Fitted slope of |S_{2qL}| against ln L; the bound predicts 1/q.
    pub slope_sin: f64,
    pub slope_cos: f64,
    pub exceeded: bool,
}

pub const DEMO_MAX_BUDGET: u64 = 100_000_000;

/// Partial sums at the rational truncation 1/q exceeding `k_target` within `n_budget` terms.
pub fn demo_divergence(q: u64, k_target: u64, n_budget: u64) -> Result<DemoReport> {
    if q % 4 != 0 || q == 0 {
        return Err(Error::Precondition(format!("q = {q} is not divisible by 4")));
    }
    if n_budget > DEMO_MAX_BUDGET {
        return Err(Error::Precondition(format!("N budget {n_budget} exceeds {DEMO_MAX_BUDGET}")));
    }
    let a_q = uniform_aq(q)?;
    let l_max = n_budget / (2 * q);
    let reach = if l_max >= 1 { (l_max as f64).ln() / q as f64 - a_q as f64 } else { f64::NEG_INFINITY };
    if reach <= k_target as f64 {
        return Err(Error::BudgetTooSmall(format!(
            "(1/{q}) ln({l_max}) - {a_q} = {reach:.4} does not exceed {k_target}"
        )));
    }
    let mut ls: Vec<u64> = std::iter::successors(Some(10u64), |l| l.checked_mul(10)).take_while(|&l| l < l_max).collect();
    ls.push(l_max);
    let mut points = Vec::new();
    for &l in &ls {
        let sin = rate_certificate(SeriesKind::Sin, 1, q, 1.0, l)?;
        let cos = rate_certificate(SeriesKind::Cos, 1, q, 1.0, l)?;
        points.push(DemoPoint { l, sin, cos });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.l as f64).ln()).collect();
    let fit = |f: &dyn Fn(&DemoPoint) -> f64| {
        let ys: Vec<f64> = points.iter().map(f).collect();
        if xs.len() >= 2 {
            least_squares(&xs, &ys).0
        } else {
            f64::NAN
        }
    };
    let slope_sin = fit(&|p| p.sin.observed.mid_f64());
    let slope_cos = fit(&|p| p.cos.observed.mid_f64());
    let last = points.last().expect("at least L_max");
    let target = BoundedReal::from_u64(k_target, 64);
    let exceeded = last.sin.observed.definitely_gt(&target) && last.cos.observed.definitely_gt(&target);
    Ok(DemoReport {
        note: "illustration at the rational truncation 1/q; the certificate for ξ itself is the exact exponent ledger",
        q,
        p: 1,
        a_q,
        k_target,
        n_budget,
        points,
        slope_sin,
        slope_cos,
        exceeded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn sparse_binary_arithmetic() {
        let a = SparseBinary::from_u64(7).add(&SparseBinary::from_u64(9));
        assert_eq!(a.to_bigint(64), Some(BigInt::from(16)));
        assert_eq!(SparseBinary::from_u64(5).mul_u64(3), SparseBinary::from_u64(15));
        assert!(SparseBinary::from_u64(8) > SparseBinary::from_u64(7));
        let huge = SparseBinary::pow2(BigInt::one() << 300);
        assert!(huge.to_string().starts_with("2^"));
    }

    #[test]
    fn unit_interval_schedule() {
        let s = build_schedule(&r(0, 1), &r(1, 1), 2).unwrap();
        assert_eq!(s.nu_exact(1), Some(BigInt::from(2)));
        assert_eq!(s.xi0, "0");
        assert_eq!(s.xi1, "1/4");
        assert_eq!(s.nu_exact(2), Some(BigInt::from(119)));
        let c = certify(&s, 1).unwrap();
        assert_eq!(c.l_exponent.to_string(), "56");
        assert_eq!(c.n_exponent.to_string(), "59");
    }

    #[test]
    fn narrow_interval_start() {
        let s = build_schedule(&r(3, 10), &r(4, 10), 1).unwrap();
        assert_eq!(s.xi0, "5/16");
        assert_eq!(s.b, vec![2, 4]);
        assert_eq!(s.nu_exact(1), Some(BigInt::from(5)));
    }

    #[test]
    fn deep_schedule_certifies() {
        let s = build_schedule(&r(0, 1), &r(1, 1), 4).unwrap();
        for k in 1..=3 {
            certify(&s, k).unwrap();
        }
        assert!(s.nu_exact(4).is_none());
        assert!(certify(&s, 4).is_err());
    }

    #[test]
    fn guards() {
        assert!(matches!(build_schedule(&r(1, 2), &r(1, 2), 1), Err(Error::EmptyInterval(..))));
        assert!(matches!(demo_divergence(4, 3, 1_000_000), Err(Error::BudgetTooSmall(_))));
        assert!(matches!(demo_divergence(6, 0, 1000), Err(Error::Precondition(_))));
    }
}
