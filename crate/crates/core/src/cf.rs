//! Continued fractions of θ, convergents and the empirical irrationality exponent.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::angle::{AngleForm, BigIntStr};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct ContinuedFractionExpansion {
    pub a0: BigIntStr,
    pub partial_quotients: Vec<BigIntStr>,
    /// Bits of the rational enclosure used; None when θ was exact or given as quotients.
    pub source_precision_bits: Option<u32>,
    /// The expansion terminated: θ is rational.
    pub rational: bool,
    /// Expansion stopped before the requested length because the input no longer
    /// determined the next quotient.
    pub truncated: bool,
    #[serde(skip)]
    interval: (BigRational, BigRational),
}

impl ContinuedFractionExpansion {
    pub fn len(&self) -> usize {
        self.partial_quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partial_quotients.is_empty()
    }

    /// Rational enclosure of θ that the quotients were certified against.
    pub fn interval(&self) -> (&BigRational, &BigRational) {
        (&self.interval.0, &self.interval.1)
    }

    /// p/q of the full listed expansion.
    pub fn value(&self) -> BigRational {
        let c = convergent_pairs(&self.a0.0, self.partial_quotients.iter().map(|b| &b.0));
        let (p, q) = c.last().cloned().expect("at least a0");
        BigRational::new(p, q)
    }
}

/// Quotients determined by every point of [lo, hi].
fn expand_interval(lo: &BigRational, hi: &BigRational, k: usize) -> (BigInt, Vec<BigInt>, bool, bool) {
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let a0 = lo.floor().to_integer();
    if hi.floor().to_integer() != a0 {
        return (a0, vec![], false, true);
    }
    let mut out = Vec::new();
    let mut cur = a0.clone();
    loop {
        let fl = &lo - BigRational::from_integer(cur.clone());
        let fh = &hi - BigRational::from_integer(cur.clone());
        if fl.is_zero() && fh.is_zero() {
            return (a0, out, true, false);
        }
        if out.len() >= k {
            return (a0, out, false, false);
        }
        if fl.is_zero() {
            // the interval touches an integer: the next quotient is unbounded
            return (a0, out, false, true);
        }
        let (nlo, nhi) = (fh.recip(), fl.recip());
        let a = nlo.floor().to_integer();
        if nhi.floor().to_integer() != a {
            return (a0, out, false, true);
        }
        out.push(a.clone());
        lo = nlo;
        hi = nhi;
        cur = a;
    }
}

pub fn expand(theta: &AngleForm, k: usize) -> Result<ContinuedFractionExpansion> {
    if let Some(v) = theta.exact_rational() {
        let (a0, qs, rational, _) = expand_interval(&v, &v, k);
        return Ok(ContinuedFractionExpansion {
            a0: BigIntStr(a0),
            partial_quotients: qs.into_iter().map(BigIntStr).collect(),
            source_precision_bits: None,
            rational,
            truncated: false,
            interval: (v.clone(), v),
        });
    }
    if let Some((a0, qs, complete)) = theta.known_quotients(k) {
        let approx = theta.approx(64 + 4 * k as u32);
        return Ok(ContinuedFractionExpansion {
            a0: BigIntStr(a0),
            truncated: !complete && qs.len() < k,
            partial_quotients: qs.into_iter().map(|q| BigIntStr(BigInt::from(q))).collect(),
            source_precision_bits: None,
            rational: false,
            interval: (approx.lo(), approx.hi()),
        });
    }
    let fixed = theta.has_fixed_precision();
    let mut bits = 64 + 4 * k as u32;
    loop {
        let approx = theta.approx(bits);
        let (lo, hi) = (approx.lo(), approx.hi());
        let (a0, qs, rational, undetermined) = expand_interval(&lo, &hi, k);
        if fixed || !undetermined || qs.len() >= k || bits > 1 << 22 {
            return Ok(ContinuedFractionExpansion {
                a0: BigIntStr(a0),
                partial_quotients: qs.into_iter().map(BigIntStr).collect(),
                source_precision_bits: if fixed { None } else { Some(bits) },
                rational,
                truncated: undetermined,
                interval: (lo, hi),
            });
        }
        bits *= 2;
    }
}

fn convergent_pairs<'a>(a0: &BigInt, qs: impl Iterator<Item = &'a BigInt>) -> Vec<(BigInt, BigInt)> {
    let mut out = vec![(a0.clone(), BigInt::one())];
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    for a in qs {
        let (p, q) = out.last().cloned().expect("nonempty");
        let np = a * &p + &p_prev;
        let nq = a * &q + &q_prev;
        p_prev = p;
        q_prev = q;
        out.push((np, nq));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Convergent {
    pub k: usize,
    pub p: BigIntStr,
    pub q: BigIntStr,
    /// 1/(q_k(q_{k+1}+q_k)) < |θ - p_k/q_k| ≤ 1/(q_k q_{k+1}) over the whole θ interval;
    /// None when the interval is too wide to decide or k is the last index.
    pub sandwich: Option<bool>,
}

pub fn convergents(expansion: &ContinuedFractionExpansion) -> Vec<Convergent> {
    let pairs = convergent_pairs(&expansion.a0.0, expansion.partial_quotients.iter().map(|b| &b.0));
    let (lo, hi) = expansion.interval();
    let mut out = Vec::with_capacity(pairs.len());
    for (k, (p, q)) in pairs.iter().enumerate() {
        let sandwich = pairs.get(k + 1).and_then(|(_, q_next)| {
            let c = BigRational::new(p.clone(), q.clone());
            let (d_lo, d_hi) = if &c < lo {
                (lo - &c, hi - &c)
            } else if &c > hi {
                (&c - hi, &c - lo)
            } else {
                return None;
            };
            let lower = BigRational::new(BigInt::one(), q * (q_next + q));
            let upper = BigRational::new(BigInt::one(), q * q_next);
            if d_lo > lower && d_hi <= upper {
                Some(true)
            } else if d_hi <= lower || d_lo > upper {
                Some(false)
            } else {
                None
            }
        });
        out.push(Convergent { k, p: BigIntStr(p.clone()), q: BigIntStr(q.clone()), sandwich });
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct MuEstimate {
    /// None when θ turned out rational.
    pub mu_hat: Option<f64>,
    pub rational: bool,
    pub window: (usize, usize),
    /// (k, ln q_{k+1} / ln q_k) over the window.
    pub ratios: Vec<(usize, f64)>,
    pub quotients_used: usize,
}

/// Default window [max(3, ⌈3K/4⌉), K-1]: late enough that small denominators do not dominate.
pub fn default_window(k: usize) -> (usize, usize) {
    (3.max((3 * k).div_ceil(4)), k.saturating_sub(1))
}

fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap_or(1.0).ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn estimate_mu(theta: &AngleForm, k: usize) -> Result<MuEstimate> {
    estimate_mu_window(theta, k, default_window(k))
}

pub fn estimate_mu_window(theta: &AngleForm, k: usize, window: (usize, usize)) -> Result<MuEstimate> {
    let exp = expand(theta, k)?;
    if exp.rational {
        return Ok(MuEstimate { mu_hat: None, rational: true, window, ratios: vec![], quotients_used: exp.len() });
    }
    if exp.len() < 3 {
        return Err(Error::InsufficientExpansion(format!("only {} partial quotients of {theta} are determined", exp.len())));
    }
    let pairs = convergent_pairs(&exp.a0.0, exp.partial_quotients.iter().map(|b| &b.0));
    let last = window.1.min(pairs.len() - 2);
    let first = window.0.max(1);
    let ratios: Vec<(usize, f64)> = (first..=last)
        .filter(|&i| pairs[i].1 > BigInt::one())
        .map(|i| (i, ln_big(&pairs[i + 1].1) / ln_big(&pairs[i].1)))
        .collect();
    if ratios.is_empty() {
        return Err(Error::InsufficientExpansion(format!(
            "window {window:?} is empty for the {} determined quotients of {theta}",
            exp.len()
        )));
    }
    let max = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(MuEstimate { mu_hat: Some(1.0 + max), rational: false, window: (first, last), ratios, quotients_used: exp.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::NamedConstant;

    fn nums(e: &ContinuedFractionExpansion) -> Vec<u64> {
        e.partial_quotients.iter().map(|b| b.0.to_u64().unwrap()).collect()
    }

    #[test]
    fn named_expansions() {
        let g = expand(&AngleForm::named(NamedConstant::Golden), 20).unwrap();
        assert_eq!(g.a0.0, BigInt::from(1));
        assert_eq!(nums(&g), vec![1; 20]);
        let s = expand(&AngleForm::named(NamedConstant::Sqrt2), 20).unwrap();
        assert_eq!(nums(&s), vec![2; 20]);
        let e = expand(&AngleForm::named(NamedConstant::E), 9).unwrap();
        assert_eq!(nums(&e), vec![1, 2, 1, 1, 4, 1, 1, 6, 1]);
    }

    #[test]
    fn rational_expansion() {
        let e = expand(&AngleForm::rational(355, 113).unwrap(), 30).unwrap();
        assert!(e.rational);
        assert_eq!(e.a0.0, BigInt::from(3));
        assert_eq!(nums(&e), vec![7, 16]);
        assert_eq!(e.value(), BigRational::new(355.into(), 113.into()));
    }

    #[test]
    fn sqrt2_convergents() {
        let e = expand(&AngleForm::named(NamedConstant::Sqrt2), 6).unwrap();
        let c = convergents(&e);
        let got: Vec<(i64, i64)> =
            c.iter().take(5).map(|c| (c.p.0.to_i64().unwrap(), c.q.0.to_i64().unwrap())).collect();
        assert_eq!(got, vec![(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)]);
        assert!(c.iter().take(6).all(|c| c.sandwich == Some(true)));
    }

    #[test]
    fn decimal_stops_when_undetermined() {
        let t = AngleForm::parse("0.4142135623~10").unwrap();
        let e = expand(&t, 50).unwrap();
        assert!(e.truncated);
        assert!(e.len() < 15);
        assert!(nums(&e).iter().all(|&q| q == 2));
    }

    #[test]
    fn mu_named() {
        let m = estimate_mu(&AngleForm::named(NamedConstant::Sqrt2), 30).unwrap();
        let mu = m.mu_hat.unwrap();
        assert!((mu - 2.0).abs() < 0.05, "{mu}");
    }
}
