//! Partial sums, residue-class decomposition for rational θ and the divergence-rate bound.

use std::sync::OnceLock;

use serde::Serialize;

use crate::angle::AngleForm;
use crate::ball::{BoundedReal, Mag};
use crate::classify::{self, residue_bases, ConvergenceClass, ResidueBase};
use crate::error::{Error, Result};
use crate::precision::{inv_pow, PrecisionBudget, SeriesKind, TermEngine};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMethod {
    Direct,
    ResidueAccelerated,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialSumResult {
    pub kind: SeriesKind,
    pub theta: String,
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub value: BoundedReal,
    pub terms_evaluated: u64,
    pub method: SumMethod,
    pub precision_bits: u32,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Running sum that folds pure-radius terms in without touching the midpoint.
pub(crate) struct Accumulator {
    sum: BoundedReal,
    extra: Mag,
}

impl Accumulator {
    pub(crate) fn new(prec: u32) -> Self {
        Accumulator { sum: BoundedReal::zero(prec), extra: Mag::ZERO }
    }

    pub(crate) fn push(&mut self, t: &BoundedReal) {
        if t.mid_mantissa().0.sign() == num_bigint::Sign::NoSign {
            self.extra = self.extra.add(t.radius());
        } else {
            self.sum = &self.sum + t;
        }
    }

    pub(crate) fn push_radius(&mut self, r: Mag) {
        self.extra = self.extra.add(r);
    }

    pub(crate) fn finish(self) -> BoundedReal {
        self.sum.add_radius(self.extra)
    }
}

/// Σ_{n=1}^{N} f(πnθ)ⁿ / n^α summed in ascending n.
pub fn partial_sum(
    kind: SeriesKind,
    theta: &AngleForm,
    alpha: f64,
    n: u64,
    budget: &PrecisionBudget,
) -> Result<PartialSumResult> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::InvalidN(0));
    }
    let engine = TermEngine::new(theta, kind, alpha, n, budget)?;
    let prec = budget.bits() + 8;
    let mut acc = Accumulator::new(prec);
    if let Some(orbit) = engine.orbit() {
        let mut pt = orbit.at(1);
        for k in 1..=n {
            acc.push(&engine.eval_point(k, &pt, true)?);
            pt = orbit.step(pt);
        }
    } else {
        for k in 1..=n {
            acc.push(&engine.term(k)?);
        }
    }
    Ok(PartialSumResult {
        kind,
        theta: theta.to_string(),
        alpha,
        n,
        value: acc.finish(),
        terms_evaluated: n,
        method: SumMethod::Direct,
        precision_bits: prec,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidueRecord {
    pub a: u64,
    pub base: BoundedReal,
    pub exact_base: Option<String>,
    /// base^{2q}, the ratio of consecutive magnitudes along the progression.
    pub ratio: BoundedReal,
    pub unit: bool,
    pub sub_sum: BoundedReal,
    /// Terms evaluated individually; the rest were covered by a geometric bound.
    pub terms_evaluated: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidueDecomposition {
    pub kind: SeriesKind,
    pub p: i64,
    pub q: u64,
    pub alpha: f64,
    /// Number of full periods: the decomposition covers n ≤ 2qL.
    pub periods: u64,
    pub records: Vec<ResidueRecord>,
    pub divergent_residues: Vec<u64>,
}

impl ResidueDecomposition {
    pub fn total(&self) -> BoundedReal {
        let prec = self.records.first().map_or(64, |r| r.sub_sum.prec());
        let mut acc = Accumulator::new(prec);
        for r in &self.records {
            acc.push(&r.sub_sum);
        }
        acc.finish()
    }
}

fn rational_engine(kind: SeriesKind, p: i64, q: u64, alpha: f64, n_max: u64, budget: &PrecisionBudget) -> Result<TermEngine> {
    TermEngine::new(&AngleForm::rational(p, q)?, kind, alpha, n_max, budget)
}

/// Upper bound on |b|^n / (1 - |b|^{2q}), the geometric tail from index n on.
fn geometric_tail(base: &BoundedReal, n: u64, q: u64) -> Mag {
    let b = base.abs_upper();
    let r = b.pow_u64(2 * q);
    let gap = Mag::from_u64(1).sub_lower(r);
    if gap.is_zero() {
        return Mag::INF;
    }
    b.pow_u64(n).div(gap)
}

fn divergent_units(bases: &[ResidueBase]) -> Vec<u64> {
    let total: i64 = bases.iter().filter(|b| b.unit).map(|b| b.sign_along_progression as i64).sum();
    if total == 0 {
        Vec::new()
    } else {
        bases.iter().filter(|b| b.unit).map(|b| b.a).collect()
    }
}

/// Per-residue sums over n = 2ql + a, l < L, so that together they cover n ≤ 2qL.
pub fn residue_decomposition(
    kind: SeriesKind,
    p: i64,
    q: u64,
    alpha: f64,
    periods: u64,
    budget: &PrecisionBudget,
) -> Result<ResidueDecomposition> {
    check_alpha(alpha)?;
    let (p, q, _) = classify::normalize(p, q as i64, true)?;
    let two_q = 2 * q;
    let n_max = two_q.saturating_mul(periods).max(1);
    let engine = rational_engine(kind, p, q, alpha, n_max, budget)?;
    let prec = budget.bits() + 8;
    let skip = Mag::pow2(-(budget.target_bits() as i64) - 64 - (n_max as f64).log2().ceil() as i64);
    let bases = residue_bases(kind, p, q, prec)?;
    let mut records = Vec::with_capacity(bases.len());
    for b in &bases {
        let mut acc = Accumulator::new(prec);
        let mut evaluated = 0;
        if !b.zero {
            for l in 0..periods {
                let n = two_q * l + b.a;
                if !b.unit {
                    let tail = geometric_tail(&b.base, n, q);
                    if tail < skip {
                        acc.push_radius(tail);
                        break;
                    }
                }
                acc.push(&engine.term(n)?);
                evaluated += 1;
            }
        }
        let ratio = if b.zero { BoundedReal::zero(prec) } else { pow_ball(&b.base, two_q) };
        records.push(ResidueRecord {
            a: b.a,
            base: b.base.clone(),
            exact_base: b.exact.clone(),
            ratio,
            unit: b.unit,
            sub_sum: acc.finish(),
            terms_evaluated: evaluated,
        });
    }
    Ok(ResidueDecomposition { kind, p, q, alpha, periods, records, divergent_residues: divergent_units(&bases) })
}

fn pow_ball(b: &BoundedReal, mut k: u64) -> BoundedReal {
    let mut acc = BoundedReal::one(b.prec());
    let mut base = b.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = &acc * &base;
        }
        base = base.sqr();
        k >>= 1;
    }
    acc
}

/// Partial sum for rational θ through the residue decomposition: full periods first,
/// then the leftover indices directly.
pub fn partial_sum_accelerated(
    kind: SeriesKind,
    p: i64,
    q: u64,
    alpha: f64,
    n: u64,
    budget: &PrecisionBudget,
) -> Result<PartialSumResult> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::InvalidN(0));
    }
    let (p, q, _) = classify::normalize(p, q as i64, true)?;
    let two_q = 2 * q;
    let periods = n / two_q;
    let dec = residue_decomposition(kind, p, q, alpha, periods, budget)?;
    let engine = rational_engine(kind, p, q, alpha, n, budget)?;
    let mut acc = Accumulator::new(budget.bits() + 8);
    acc.push(&dec.total());
    let mut evaluated: u64 = dec.records.iter().map(|r| r.terms_evaluated).sum();
    for k in two_q * periods + 1..=n {
        acc.push(&engine.term(k)?);
        evaluated += 1;
    }
    Ok(PartialSumResult {
        kind,
        theta: format!("{p}/{q}"),
        alpha,
        n,
        value: acc.finish(),
        terms_evaluated: evaluated,
        method: SumMethod::ResidueAccelerated,
        precision_bits: budget.bits() + 8,
    })
}

/// x^β for a positive integer x.
fn int_pow(x: u64, beta: f64, wp: u32) -> BoundedReal {
    if beta == 0.0 {
        return BoundedReal::one(wp);
    }
    (BoundedReal::from_u64(x, wp).ln() * BoundedReal::from_f64(beta, wp)).exp()
}

/// ∫_x^∞ [(2qt + a⁺)^{-α} - (2qt + a⁻)^{-α}] dt where `m` = 2qx (an integer).
fn pair_integral(m: u64, q: u64, a_plus: u64, a_minus: u64, alpha: f64, wp: u32) -> BoundedReal {
    let (hi, lo) = (m + a_minus, m + a_plus);
    if alpha == 1.0 {
        let r = BoundedReal::from_u64(hi, wp) / BoundedReal::from_u64(lo, wp);
        r.ln().div_u64(2 * q)
    } else {
        let beta = 1.0 - alpha;
        let diff = int_pow(hi, beta, wp) - int_pow(lo, beta, wp);
        diff / (BoundedReal::from_f64(beta, wp) * BoundedReal::from_u64(2 * q, wp))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AcceleratedValue {
    pub value: BoundedReal,
    /// Number of cancelling unit pairs summed before the integral tail.
    pub pair_cutoff: u64,
    pub tail: BoundedReal,
}

/// Full sum of a convergent series at θ = p/q, with enclosure width at most `tolerance`.
pub fn accelerated_value(kind: SeriesKind, p: i64, q: u64, alpha: f64, tolerance: f64) -> Result<BoundedReal> {
    Ok(accelerated_value_detail(kind, p, q, alpha, tolerance)?.value)
}

pub fn accelerated_value_detail(
    kind: SeriesKind,
    p: i64,
    q: u64,
    alpha: f64,
    tolerance: f64,
) -> Result<AcceleratedValue> {
    check_alpha(alpha)?;
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tolerance}")));
    }
    let report = classify::classify(kind, p, q as i64)?;
    if report.class == ConvergenceClass::DivergesToPlusInfinity {
        return Err(Error::DivergentInput(format!("{kind} series at θ = {p}/{q}")));
    }
    let (p, q) = (report.p, report.q);
    let two_q = 2 * q;
    let digits = ((-tolerance.log10()).ceil().max(0.0) as u32 + 12).max(20);
    let budget = PrecisionBudget::new(digits, tolerance * 1e-6)?;
    let wp = budget.bits() + 16;
    let engine = rational_engine(kind, p, q, alpha, u64::MAX >> 8, &budget)?;
    let bases = residue_bases(kind, p, q, wp)?;
    let share = Mag::from_f64_up(tolerance / (8.0 * two_q as f64));
    let mut acc = Accumulator::new(wp);

    for b in bases.iter().filter(|b| !b.unit && !b.zero) {
        let mut l = 0u64;
        loop {
            let n = two_q * l + b.a;
            let tail = geometric_tail(&b.base, n, q);
            if tail < share {
                acc.push_radius(tail);
                break;
            }
            acc.push(&engine.term(n)?);
            l += 1;
        }
    }

    let units: Vec<&ResidueBase> = bases.iter().filter(|b| b.unit).collect();
    let mut pair_cutoff = 0;
    let mut tail = BoundedReal::zero(wp);
    if !units.is_empty() {
        let a_plus = units.iter().find(|b| b.sign_along_progression > 0).map(|b| b.a);
        let a_minus = units.iter().find(|b| b.sign_along_progression < 0).map(|b| b.a);
        let (a_plus, a_minus) = match (a_plus, a_minus) {
            (Some(x), Some(y)) if units.len() == 2 => (x, y),
            _ => return Err(Error::CertificateFailed("unit residues do not form one cancelling pair".into())),
        };
        let mut l = 0u64;
        let mut target = 64u64;
        let half_tol = Mag::from_f64_up(tolerance / 2.0);
        loop {
            while l < target {
                let h = inv_pow(two_q * l + a_plus, alpha, wp) - inv_pow(two_q * l + a_minus, alpha, wp);
                acc.push(&h);
                l += 1;
            }
            // convexity of the pair sequence: Σ_{l≥L} h ∈ hull(I(L) + h(L)/2, I(L - 1/2))
            let m = two_q * l;
            let h_l = inv_pow(m + a_plus, alpha, wp) - inv_pow(m + a_minus, alpha, wp);
            let trap = pair_integral(m, q, a_plus, a_minus, alpha, wp) + h_l.mul_2exp(-1);
            let mid = pair_integral(m - q, q, a_plus, a_minus, alpha, wp);
            let lo = trap.lower().min(mid.lower());
            let hi = trap.upper().max(mid.upper());
            let width = hi.sub(&lo);
            if Mag::from_dyadic_up(&width.man, width.exp) < half_tol || l >= 1 << 40 {
                tail = BoundedReal::from_interval(&lo, &hi, wp);
                pair_cutoff = l;
                break;
            }
            target *= 2;
        }
        acc.push(&tail);
    }
    Ok(AcceleratedValue { value: acc.finish(), pair_cutoff, tail })
}

/// Certified bound on |Σ_{n>N} term| for a convergent rational case.
///
/// Unit terms alternate in sign with decreasing size, so their tail is at most the first
/// omitted one; the other residues contribute geometric tails.
pub fn certified_tail(kind: SeriesKind, p: i64, q: u64, alpha: f64, n: u64) -> Result<Mag> {
    check_alpha(alpha)?;
    let report = classify::classify(kind, p, q as i64)?;
    if report.class == ConvergenceClass::DivergesToPlusInfinity {
        return Err(Error::DivergentInput(format!("{kind} series at θ = {p}/{q}")));
    }
    let (p, q) = (report.p, report.q);
    let two_q = 2 * q;
    let bases = residue_bases(kind, p, q, 96)?;
    let mut total = Mag::ZERO;
    for b in bases.iter().filter(|b| !b.zero) {
        if b.unit {
            continue;
        }
        // first index above n in this progression
        let first = if b.a > n { b.a } else { b.a + two_q * ((n - b.a) / two_q + 1) };
        total = total.add(geometric_tail(&b.base, first, q));
    }
    if bases.iter().any(|b| b.unit) {
        total = total.add(inv_pow(n + 1, alpha, 64).abs_upper());
    }
    Ok(total)
}

/// Rigorous integer bound on Σ over non-unit residues of |base|^a / (1 - |base|^{2q}).
///
/// Exact up to q = 2^12; beyond that, for 4 | q, the bound 3q (each distance j/q to a
/// unit point occurs four times and contributes at most 1 + q/(7.8 j²)).
pub fn compute_aq(kind: SeriesKind, p: i64, q: u64) -> Result<u64> {
    let (p, q, _) = classify::normalize(p, q as i64, true)?;
    if q > 1 << 12 {
        if q % 4 == 0 {
            return Ok(3 * q);
        }
        return Err(Error::Precondition(format!("A_q for q = {q} needs 4 | q")));
    }
    let bases = residue_bases(kind, p, q, 96)?;
    let mut acc = Accumulator::new(96);
    for b in bases.iter().filter(|b| !b.unit && !b.zero) {
        let m = b.base.abs();
        let num = pow_ball(&m, b.a);
        let den = BoundedReal::one(96) - pow_ball(&m, 2 * q);
        acc.push(&(num / den));
    }
    let s = acc.finish().upper();
    let r = s.to_rational();
    let c = r.ceil().to_integer();
    Ok(num_traits::ToPrimitive::to_u64(&c).unwrap_or(u64::MAX).max(1))
}

/// A_q valid for every odd p and both kinds: the exact maximum when 2q ≤ 64, else 3q.
/// max over odd p and both kinds of A_q, exact while 2q ≤ 64 and 3q beyond.
pub fn uniform_aq(q: u64) -> Result<u64> {
    static EXACT: [OnceLock<u64>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    if q % 4 != 0 || q == 0 {
        return Err(Error::Precondition(format!("q = {q} is not divisible by 4")));
    }
    if 2 * q > 64 {
        return Ok(3 * q);
    }
    let slot = &EXACT[q.trailing_zeros() as usize - 2];
    if let Some(&v) = slot.get() {
        return Ok(v);
    }
    let mut best = 0;
    for p in (1..2 * q as i64).step_by(2) {
        for kind in [SeriesKind::Sin, SeriesKind::Cos] {
            best = best.max(compute_aq(kind, p, q)?);
        }
    }
    Ok(*slot.get_or_init(|| best))
}

#[derive(Clone, Debug, Serialize)]
pub struct RateCertificate {
    pub kind: SeriesKind,
    pub p: i64,
    pub q: u64,
    pub alpha: f64,
    #[serde(rename = "A_q")]
    pub a_q: u64,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub lower_bound: BoundedReal,
    pub observed: BoundedReal,
    pub holds: bool,
}

/// Checks |S_{2qL}| ≥ (1/q) ln L - A_q for θ = p/q with 4 | q.
pub fn rate_certificate(kind: SeriesKind, p: i64, q: u64, alpha: f64, l: u64) -> Result<RateCertificate> {
    check_alpha(alpha)?;
    let (p, q, _) = classify::normalize(p, q as i64, true)?;
    if q % 4 != 0 {
        return Err(Error::Precondition(format!("q = {q} is not divisible by 4")));
    }
    if l == 0 {
        return Err(Error::InvalidN(0));
    }
    let a_q = compute_aq(kind, p, q)?;
    let n = 2 * q * l;
    let budget = PrecisionBudget::for_range(n, 20);
    let s = partial_sum_accelerated(kind, p, q, alpha, n, &budget)?;
    let prec = budget.bits();
    let lower_bound = BoundedReal::from_u64(l, prec).ln().div_u64(q) - BoundedReal::from_u64(a_q, prec);
    let observed = s.value.abs();
    let holds = observed.lower() >= lower_bound.upper();
    if !holds {
        return Err(Error::CertificateFailed(format!(
            "|S_{n}| = {observed} is below (1/{q}) ln {l} - {a_q} = {lower_bound}"
        )));
    }
    Ok(RateCertificate { kind, p, q, alpha, a_q, l, n, lower_bound, observed, holds })
}
