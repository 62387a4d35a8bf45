//! Dyadic shells of the absolute series: indices n with 1 - ε ≤ |f(πnθ)| < 1 - ε/2, ε = 2^-s.
//!
//! With u = 1/2 - d the gap of the relevant distance to its unit point, |f| = cos(πu), so
//! shell s is U_{s+1} < u ≤ U_s where U_s = arccos(1 - 2^-s)/π. Shell 0 is the bulk |f| < 1/2.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::angle::AngleForm;
use crate::ball::{BoundedReal, Dyadic};
use crate::cf;
use crate::elementary::{acos_one_minus, pi};
use crate::error::{Error, Result};
use crate::precision::{reduce_angle, PrecisionBudget, SeriesKind, TermEngine, ORBIT_BITS};
use crate::series::{check_alpha, Accumulator};

#[derive(Clone, Debug, Serialize)]
pub struct ShellRecord {
    pub s: u32,
    pub epsilon: f64,
    pub kind: SeriesKind,
    pub theta: String,
    pub alpha: f64,
    pub members: Vec<u64>,
    pub shell_sum: BoundedReal,
    /// Upper bound on the part of the shell sum beyond N_max.
    pub tail_bound: f64,
    pub truncated: bool,
}

impl ShellRecord {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn gaps(&self) -> Vec<u64> {
        self.members.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn min_gap(&self) -> Option<u64> {
        self.members.windows(2).map(|w| w[1] - w[0]).min()
    }

    /// min over k of n_k / k (k counted from 1).
    pub fn min_normalized_gap(&self) -> Option<f64> {
        self.members.iter().enumerate().map(|(i, &n)| n as f64 / (i + 1) as f64).reduce(f64::min)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShellAnalysis {
    pub theta: String,
    pub kind: SeriesKind,
    pub alpha: f64,
    pub n_max: u64,
    pub records: Vec<ShellRecord>,
    /// Indices deeper than the last shell (|f| ≥ 1 - 2^-(s_max+1)).
    pub deep_count: u64,
    pub deep_sum: BoundedReal,
    /// Σ_{n ≤ N_max} |f|ⁿ / n^α accumulated independently of the shell split.
    pub total: BoundedReal,
    /// Indices whose shell needed a second, higher-precision reduction.
    pub escalations: u64,
}

struct Thresholds {
    /// floor/ceil of U_j · 2^126 for j = 0..=s_max+1
    fixed: Vec<(u128, u128)>,
    balls: Vec<BoundedReal>,
}

const THRESHOLD_BITS: u32 = 400;

fn to_fixed(d: &Dyadic, up: bool) -> u128 {
    let r = d.to_rational() * BigRational::from_integer(BigInt::one() << ORBIT_BITS);
    let v = if up { r.ceil() } else { r.floor() };
    v.to_integer().to_u128().unwrap_or(if up { u128::MAX } else { 0 })
}

fn thresholds(s_max: u32) -> Thresholds {
    let wp = THRESHOLD_BITS;
    let mut balls = vec![BoundedReal::pow2(-1, wp)];
    for j in 1..=s_max + 1 {
        let eps = BoundedReal::pow2(-(j as i64), wp + 16);
        balls.push((acos_one_minus(&eps) / pi(wp + 16)).with_prec(wp));
    }
    let fixed = balls.iter().map(|b| (to_fixed(&b.lower(), false), to_fixed(&b.upper(), true))).collect();
    Thresholds { fixed, balls }
}

/// Largest j with u ≤ U_j, or None when the enclosure does not decide it.
fn place_fixed(lo: u128, hi: u128, th: &Thresholds) -> Option<usize> {
    let mut j = 0;
    for (i, &(t_lo, t_hi)) in th.fixed.iter().enumerate().skip(1) {
        if hi < t_lo {
            j = i;
        } else if lo > t_hi {
            break;
        } else {
            return None;
        }
    }
    Some(j)
}

fn place_ball(u: &BoundedReal, th: &Thresholds) -> Option<usize> {
    let mut j = 0;
    for (i, t) in th.balls.iter().enumerate().skip(1) {
        if u.definitely_lt(t) {
            j = i;
        } else if u.definitely_gt(t) {
            break;
        } else {
            return None;
        }
    }
    Some(j)
}

fn escalate(n: u64, theta: &AngleForm, kind: SeriesKind, th: &Thresholds) -> Result<usize> {
    for digits in [60u32, 130] {
        let budget = PrecisionBudget::new(digits, 10f64.powi(-(digits as i32) + 12))?;
        let r = reduce_angle(n, theta, &budget)?;
        let u = &BoundedReal::pow2(-1, THRESHOLD_BITS) - r.distance(kind);
        if let Some(j) = place_ball(&u, th) {
            return Ok(j);
        }
    }
    Err(Error::PrecisionExhausted(format!("shell of n = {n} for θ = {theta} is not resolved at 130 digits")))
}

fn unit_gap_fixed(n: u64, theta: &AngleForm, kind: SeriesKind, budget: &PrecisionBudget) -> Result<(u128, u128)> {
    let r = reduce_angle(n, theta, budget)?;
    let d = r.distance(kind);
    let half = BoundedReal::pow2(-1, d.prec().max(64));
    let u = &half - d;
    let lo = if u.lower() < Dyadic::zero() { 0 } else { to_fixed(&u.lower(), false) };
    Ok((lo, to_fixed(&u.upper(), true)))
}

/// One pass over n ≤ N_max that splits the absolute series into shells 0..=s_max.
pub fn analyze_shells(
    theta: &AngleForm,
    kind: SeriesKind,
    alpha: f64,
    s_max: u32,
    n_max: u64,
    budget: &PrecisionBudget,
) -> Result<ShellAnalysis> {
    check_alpha(alpha)?;
    if theta.exact_rational().is_some() {
        return Err(Error::RationalInput(format!("{theta}: shells are degenerate for rational θ")));
    }
    if n_max == 0 {
        return Err(Error::InvalidN(0));
    }
    if s_max > 60 {
        return Err(Error::Precondition(format!("s_max = {s_max} is beyond the supported 60")));
    }
    let engine = TermEngine::new(theta, kind, alpha, n_max, budget)?;
    let th = thresholds(s_max);
    let prec = budget.bits() + 8;
    let shells = s_max as usize + 1;
    let mut members: Vec<Vec<u64>> = vec![Vec::new(); shells];
    let mut sums: Vec<Accumulator> = (0..=shells).map(|_| Accumulator::new(prec)).collect();
    let mut total = Accumulator::new(prec);
    let mut deep_count = 0u64;
    let mut escalations = 0u64;

    let mut visit = |n: u64, gap: (u128, u128), term: BoundedReal| -> Result<()> {
        let j = match place_fixed(gap.0, gap.1, &th) {
            Some(j) => j,
            None => {
                escalations += 1;
                escalate(n, theta, kind, &th)?
            }
        };
        if j < shells {
            members[j].push(n);
        } else {
            deep_count += 1;
        }
        sums[j.min(shells)].push(&term);
        total.push(&term);
        Ok(())
    };

    if let Some(orbit) = engine.orbit() {
        let mut pt = orbit.at(1);
        for n in 1..=n_max {
            let term = engine.eval_point(n, &pt, false)?;
            visit(n, pt.unit_gap_bounds(kind), term)?;
            pt = orbit.step(pt);
        }
    } else {
        for n in 1..=n_max {
            let term = engine.abs_term(n)?;
            visit(n, unit_gap_fixed(n, theta, kind, budget)?, term)?;
        }
    }

    let mut sums = sums.into_iter();
    let mut records = Vec::with_capacity(shells);
    for (s, m) in members.into_iter().enumerate() {
        let eps = (2f64).powi(-(s as i32));
        let shell_sum = sums.next().expect("one accumulator per shell").finish();
        let tail_bound = shell_tail_bound(eps, alpha, n_max);
        let truncated = tail_bound > 1e-6 * shell_sum.upper().to_f64().max(f64::MIN_POSITIVE);
        records.push(ShellRecord {
            s: s as u32,
            epsilon: eps,
            kind,
            theta: theta.to_string(),
            alpha,
            members: m,
            shell_sum,
            tail_bound,
            truncated,
        });
    }
    Ok(ShellAnalysis {
        theta: theta.to_string(),
        kind,
        alpha,
        n_max,
        records,
        deep_count,
        deep_sum: sums.next().expect("deep accumulator").finish(),
        total: total.finish(),
        escalations,
    })
}

/// Σ_{n>N} (1 - ε/2)ⁿ / n^α ≤ (1 - ε/2)^{N+1} / ((N+1)^α ε/2).
fn shell_tail_bound(eps: f64, alpha: f64, n_max: u64) -> f64 {
    let n = n_max as f64 + 1.0;
    let log = n * (-eps / 2.0).ln_1p() - alpha * n.ln() - (eps / 2.0).ln();
    log.exp() * (1.0 + 1e-9)
}

pub fn enumerate_shell(
    theta: &AngleForm,
    kind: SeriesKind,
    s: u32,
    n_max: u64,
    budget: &PrecisionBudget,
) -> Result<ShellRecord> {
    let mut a = analyze_shells(theta, kind, 1.0, s, n_max, budget)?;
    Ok(a.records.swap_remove(s as usize))
}

#[derive(Clone, Debug, Serialize)]
pub struct ShellSum {
    pub s: u32,
    pub shell_sum: BoundedReal,
    pub truncated: bool,
}

pub fn shell_sums(
    theta: &AngleForm,
    kind: SeriesKind,
    alpha: f64,
    s_max: u32,
    n_max: u64,
    budget: &PrecisionBudget,
) -> Result<Vec<ShellSum>> {
    let a = analyze_shells(theta, kind, alpha, s_max, n_max, budget)?;
    Ok(a.records.into_iter().map(|r| ShellSum { s: r.s, shell_sum: r.shell_sum, truncated: r.truncated }).collect())
}

/// Ordinary least squares fit y = slope·x + intercept.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Clone, Debug, Serialize)]
pub struct GapShell {
    pub s: u32,
    pub count: usize,
    pub min_normalized_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapFit {
    pub theta: String,
    pub kind: SeriesKind,
    pub n_max: u64,
    pub shells: Vec<GapShell>,
    /// Slope of ln(min_k n_k/k) against ln ε.
    pub exponent: f64,
    pub intercept: f64,
    pub mu_hat: Option<f64>,
    pub nu_expected: Option<f64>,
    /// "algebraic_default" (μ = 2) or "cf_estimate".
    pub nu_source: &'static str,
    /// exponent + ν: zero when the fit matches -ν.
    pub deviation: Option<f64>,
}

pub const MIN_SHELL_MEMBERS: usize = 5;

impl GapFit {
    pub fn from_analysis(theta: &AngleForm, a: &ShellAnalysis, s_lo: u32, s_hi: u32) -> Result<GapFit> {
        let shells: Vec<GapShell> = a
            .records
            .iter()
            .filter(|r| r.s >= s_lo && r.s <= s_hi && r.count() >= MIN_SHELL_MEMBERS)
            .map(|r| GapShell { s: r.s, count: r.count(), min_normalized_gap: r.min_normalized_gap().unwrap_or(0.0) })
            .collect();
        if shells.len() < 3 {
            return Err(Error::InsufficientData(format!(
                "only {} shells in [{s_lo}, {s_hi}] have at least {MIN_SHELL_MEMBERS} members below N = {}",
                shells.len(),
                a.n_max
            )));
        }
        let xs: Vec<f64> = shells.iter().map(|g| -(g.s as f64) * std::f64::consts::LN_2).collect();
        let ys: Vec<f64> = shells.iter().map(|g| g.min_normalized_gap.ln()).collect();
        let (exponent, intercept) = least_squares(&xs, &ys);
        let (mu_hat, nu_source) = match theta.named_constant() {
            Some(c) if c.is_algebraic() => (Some(2.0), "algebraic_default"),
            _ => (cf::estimate_mu(theta, 40).ok().and_then(|m| m.mu_hat), "cf_estimate"),
        };
        let nu_expected = mu_hat.filter(|&m| m > 1.0).map(|m| 1.0 / (2.0 * m - 2.0));
        Ok(GapFit {
            theta: theta.to_string(),
            kind: a.kind,
            n_max: a.n_max,
            shells,
            exponent,
            intercept,
            mu_hat,
            nu_expected,
            nu_source,
            deviation: nu_expected.map(|nu| exponent + nu),
        })
    }
}

pub fn fit_gap_exponent(
    theta: &AngleForm,
    kind: SeriesKind,
    s_range: (u32, u32),
    n_max: u64,
    budget: &PrecisionBudget,
) -> Result<GapFit> {
    let a = analyze_shells(theta, kind, 1.0, s_range.1, n_max, budget)?;
    GapFit::from_analysis(theta, &a, s_range.0, s_range.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::NamedConstant;

    #[test]
    fn first_thresholds() {
        let th = thresholds(3);
        let third = BigRational::new(1.into(), 3.into());
        assert!(th.balls[1].contains_rational(&third));
        assert!(th.balls.windows(2).all(|w| w[1].definitely_lt(&w[0])));
    }

    #[test]
    fn rational_rejected() {
        let b = PrecisionBudget::default();
        let e = analyze_shells(&AngleForm::rational(1, 3).unwrap(), SeriesKind::Cos, 1.0, 4, 100, &b);
        assert!(matches!(e, Err(Error::RationalInput(_))));
    }

    #[test]
    fn partition_counts() {
        let b = PrecisionBudget::default();
        let a = analyze_shells(&AngleForm::named(NamedConstant::Golden), SeriesKind::Cos, 1.0, 8, 5000, &b).unwrap();
        let c: usize = a.records.iter().map(|r| r.count()).sum();
        assert_eq!(c as u64 + a.deep_count, 5000);
        assert!(a.records.iter().all(|r| r.members.windows(2).all(|w| w[0] < w[1])));
    }
}
