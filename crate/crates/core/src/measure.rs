//! Wallis integrals, the expected absolute partial sum over uniform θ, and a seeded
//! Monte-Carlo check of it.
//!
//! Over one period |sin(πnθ)|ⁿ averages to 2I_n/π, so E[T_N] = Σ_{n≤N} 2I_n/(π n^α).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::angle::AngleForm;
use crate::ball::BoundedReal;
use crate::elementary::pi;
use crate::error::{Error, Result};
use crate::precision::{inv_pow, PrecisionBudget, SeriesKind, TermEngine};
use crate::series::{check_alpha, Accumulator};
use crate::shells::least_squares;

/// Largest n for which `wallis` also returns the exact rational form.
pub const WALLIS_EXACT_MAX: u64 = 1 << 14;
const WALLIS_PREC: u32 = 160;

#[derive(Clone, Debug, Serialize)]
pub struct WallisExact {
    /// I_n = rational · π when `times_pi`, else I_n = rational.
    pub rational: String,
    pub times_pi: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WallisValue {
    pub n: u64,
    pub exact: Option<WallisExact>,
    pub value: BoundedReal,
}

/// Unreduced r_n = num/den with I_n = (π/2) r_n for even n and I_n = r_n for odd n.
fn wallis_ratio(n: u64) -> (BigInt, BigInt) {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        num *= k - 1;
        den *= k;
        k += 2;
    }
    (num, den)
}

/// I_n = ∫₀^{π/2} sinⁿx dx.
pub fn wallis(n: u64) -> WallisValue {
    let prec = WALLIS_PREC;
    if n <= WALLIS_EXACT_MAX {
        let (num, den) = wallis_ratio(n);
        let even = n % 2 == 0;
        let r = if even { BigRational::new(num, den * 2) } else { BigRational::new(num, den) };
        let mut value = BoundedReal::from_rational(&r, prec + 16);
        if even {
            value = value * pi(prec + 16);
        }
        return WallisValue {
            n,
            exact: Some(WallisExact { rational: r.to_string(), times_pi: even }),
            value: value.with_prec(prec),
        };
    }
    WallisValue { n, exact: None, value: wallis_ball(n) }
}

fn wallis_ball(n: u64) -> BoundedReal {
    let wp = WALLIS_PREC + 32;
    let (mut v, mut k) = if n % 2 == 0 { (pi(wp).mul_2exp(-1), 2) } else { (BoundedReal::one(wp), 3) };
    while k <= n {
        v = (v.mul_u64(k - 1)).div_u64(k);
        k += 2;
    }
    v.with_prec(WALLIS_PREC)
}

/// First n ≤ n_max where n·I_n·I_{n-1} = π/2 fails as an exact identity, if any.
pub fn wallis_identity_failure(n_max: u64) -> Option<u64> {
    // n · r_n · r_{n-1} = 1 in the unreduced ratio form
    let mut r = [(BigInt::one(), BigInt::one()), (BigInt::one(), BigInt::one())];
    for n in 1..=n_max {
        if n >= 2 {
            let (num, den) = &mut r[(n % 2) as usize];
            *num *= n - 1;
            *den *= n;
        }
        let (a, b) = (&r[0], &r[1]);
        if BigInt::from(n) * &a.0 * &b.0 != &a.1 * &b.1 {
            return Some(n);
        }
    }
    None
}

/// Σ_{n=1}^{N} 2I_n / (π n^α).
pub fn expected_abs_sum(alpha: f64, n: u64) -> Result<BoundedReal> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::InvalidN(0));
    }
    let wp = WALLIS_PREC;
    // c_n = 2I_n/π: c_0 = 1, c_1 = 2/π, c_n = c_{n-2}(n-1)/n
    let mut c = [BoundedReal::one(wp), BoundedReal::from_u64(2, wp) / pi(wp)];
    let mut acc = Accumulator::new(wp);
    for k in 1..=n {
        let slot = (k % 2) as usize;
        if k >= 2 {
            c[slot] = c[slot].mul_u64(k - 1).div_u64(k);
        }
        acc.push(&(&c[slot] * &inv_pow(k, alpha, wp)));
    }
    Ok(acc.finish())
}

/// Fitted exponent of the increments 2I_n/(π n^α) in n over a geometric grid in [n_lo, n_hi].
pub fn increment_growth_exponent(alpha: f64, n_lo: u64, n_hi: u64) -> Result<f64> {
    check_alpha(alpha)?;
    if n_lo < 1 || n_hi < 2 * n_lo {
        return Err(Error::Precondition(format!("need 1 ≤ n_lo and n_hi ≥ 2·n_lo, got [{n_lo}, {n_hi}]")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut n = n_lo;
    while n <= n_hi {
        let c = (wallis(n).value.mid_f64() * 2.0 / std::f64::consts::PI) / (n as f64).powf(alpha);
        xs.push((n as f64).ln());
        ys.push(c.ln());
        n *= 2;
    }
    Ok(least_squares(&xs, &ys).0)
}

pub const MIN_SAMPLES: usize = 30;
pub const TAIL_THRESHOLD: f64 = 1e-3;
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3) seeded by seed_from_u64";

#[derive(Clone, Debug, Serialize)]
pub struct TailCensus {
    pub threshold: f64,
    /// Samples whose Σ_{N/2<n≤N} stays below the threshold.
    pub below: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloReport {
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub sample_count: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub theta_digits: u32,
    pub mean: f64,
    pub standard_error: f64,
    pub expected: BoundedReal,
    pub z_score: f64,
    /// Largest enclosure radius among the sampled T_N(θ).
    pub max_sample_radius: f64,
    pub tail_census: TailCensus,
}

/// Decimal digits carried by each sampled θ.
pub fn theta_digits(n: u64) -> u32 {
    (n.max(1) as f64).log10().ceil() as u32 + 20
}

fn sample_theta(rng: &mut ChaCha8Rng, digits: u32) -> AngleForm {
    let s: String = (0..digits).map(|_| char::from(b'0' + rng.gen_range(0..10u8))).collect();
    AngleForm::Decimal { digits: format!("0.{s}"), stated_precision: digits }
}

struct SampleValue {
    total: BoundedReal,
    tail: BoundedReal,
}

fn evaluate_sample(theta: &AngleForm, alpha: f64, n: u64, budget: &PrecisionBudget) -> Result<SampleValue> {
    let engine = TermEngine::new(theta, SeriesKind::Sin, alpha, n, budget)?;
    let prec = budget.bits() + 8;
    let mut head = Accumulator::new(prec);
    let mut tail = Accumulator::new(prec);
    let mut visit = |k: u64, t: BoundedReal| {
        if 2 * k > n {
            tail.push(&t);
        } else {
            head.push(&t);
        }
    };
    if let Some(orbit) = engine.orbit() {
        let mut pt = orbit.at(1);
        for k in 1..=n {
            visit(k, engine.eval_point(k, &pt, false)?);
            pt = orbit.step(pt);
        }
    } else {
        for k in 1..=n {
            visit(k, engine.abs_term(k)?);
        }
    }
    let tail = tail.finish();
    Ok(SampleValue { total: &head.finish() + &tail, tail })
}

/// Mean of T_N(θ) = Σ_{n≤N} |sin(πnθ)|ⁿ/n^α over seeded uniform θ against its exact expectation.
pub fn mc_estimate(alpha: f64, n: u64, samples: usize, seed: u64) -> Result<MonteCarloReport> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::InvalidN(0));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::Precondition(format!("samples = {samples} is below the minimum {MIN_SAMPLES}")));
    }
    let digits = theta_digits(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thetas: Vec<AngleForm> = (0..samples).map(|_| sample_theta(&mut rng, digits)).collect();
    let budget = PrecisionBudget::new(24, 1e-12)?;
    let values: Vec<SampleValue> =
        thetas.par_iter().map(|t| evaluate_sample(t, alpha, n, &budget)).collect::<Result<_>>()?;

    let xs: Vec<f64> = values.iter().map(|v| v.total.mid_f64()).collect();
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    let standard_error = (var / m).sqrt();
    let expected = expected_abs_sum(alpha, n)?;
    let z_score = (mean - expected.mid_f64()) / standard_error;
    let below = values.iter().filter(|v| v.tail.upper().to_f64() < TAIL_THRESHOLD).count();
    Ok(MonteCarloReport {
        alpha,
        n,
        sample_count: samples,
        seed,
        rng: RNG_NAME,
        theta_digits: digits,
        mean,
        standard_error,
        expected,
        z_score,
        max_sample_radius: values.iter().map(|v| v.total.rad_f64()).fold(0.0, f64::max),
        tail_census: TailCensus { threshold: TAIL_THRESHOLD, below, fraction: below as f64 / m },
    })
}
