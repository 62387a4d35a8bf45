//! Σ z^k / k^α near z = 1 and its Gamma-function asymptotic.
//!
//! The sum runs millions of terms for z close to 1, so the recurrence
//! t_k = t_{k-1} · z · (1 - 1/k)^α is carried in two-sided 120-bit fixed point:
//! every quantity is nonnegative, so lower and upper sequences round down and up
//! independently.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::ball::{BoundedReal, Dyadic};
use crate::error::{Error, Result};
use crate::precision::f64_to_rational;

const FB: u32 = 120;
const ONE: u128 = 1 << FB;
const MAX_TERMS: u64 = 1 << 34;

fn wide_mul(a: u128, b: u128) -> (u128, u128) {
    let (a1, a0) = (a >> 64, a & u64::MAX as u128);
    let (b1, b0) = (b >> 64, b & u64::MAX as u128);
    let lo = a0 * b0;
    let m1 = a1 * b0;
    let m2 = a0 * b1;
    let hi = a1 * b1;
    let (mid, c1) = m1.overflowing_add(m2);
    let (lo2, c2) = lo.overflowing_add(mid << 64);
    let hi = hi + (mid >> 64) + ((c1 as u128) << 64) + c2 as u128;
    (hi, lo2)
}

fn mul_down(a: u128, b: u128) -> u128 {
    let (hi, lo) = wide_mul(a, b);
    (hi << (128 - FB)) | (lo >> FB)
}

fn mul_up(a: u128, b: u128) -> u128 {
    let (hi, lo) = wide_mul(a, b);
    let r = (hi << (128 - FB)) | (lo >> FB);
    if lo & (ONE - 1) != 0 {
        r + 1
    } else {
        r
    }
}

/// (floor, ceil) of r · 2^120 for 0 ≤ r ≤ 1.
fn fixed(r: &BigRational) -> (u128, u128) {
    let s = r * BigRational::from_integer(BigInt::one() << FB);
    (s.floor().to_integer().to_u128().unwrap_or(0), s.ceil().to_integer().to_u128().unwrap_or(ONE))
}

/// Coefficients d_j with (1 - x)^α = 1 - Σ_{j≥1} d_j x^j; all d_j ∈ [0, 1] for α ∈ [0, 1].
fn binomial_coeffs(alpha: &BigRational, count: usize) -> Vec<(u128, u128)> {
    let mut out = Vec::with_capacity(count);
    let mut c = alpha.clone();
    for j in 1..=count {
        out.push(fixed(&c));
        // d_{j+1} = d_j (j - α) / (j + 1)
        let jr = BigRational::from_integer(BigInt::from(j));
        c = c * (&jr - alpha) / (jr + BigRational::one());
    }
    out
}

struct Ratio {
    coeffs: Vec<(u128, u128)>,
}

impl Ratio {
    /// Bounds on (1 - 1/k)^α for k ≥ 2.
    fn at(&self, k: u64) -> (u128, u128) {
        let x_lo = ONE / k as u128;
        let x_hi = x_lo + 1;
        let terms = ((124.0 / (k as f64).log2()).ceil() as usize).clamp(1, self.coeffs.len() - 1);
        let (mut s_lo, mut s_hi) = self.coeffs[terms - 1];
        for j in (0..terms - 1).rev() {
            s_lo = mul_down(s_lo, x_lo) + self.coeffs[j].0;
            s_hi = mul_up(s_hi, x_hi) + self.coeffs[j].1;
        }
        s_lo = mul_down(s_lo, x_lo);
        s_hi = mul_up(s_hi, x_hi);
        // tail Σ_{j>terms} d_j x^j ≤ x^{terms+1} / (1 - x) ≤ 2 x^{terms+1}
        let mut tail = x_hi;
        for _ in 0..terms {
            tail = mul_up(tail, x_hi);
        }
        let tail = 2 * tail + 1;
        (ONE.saturating_sub(s_hi + tail), ONE - s_lo.min(ONE))
    }
}

/// Σ_{k≥1} z^k / k^α for 0 < z < 1 and α ∈ [0, 1], enclosure width at most `tolerance`.
pub fn polylog_sum(z: f64, alpha: f64, tolerance: f64) -> Result<BoundedReal> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::Precondition(format!("z must lie in (0, 1), got {z}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tolerance}")));
    }
    let (z_lo, z_hi) = fixed(&f64_to_rational(z));
    let one_minus_z = ONE - z_hi;
    if one_minus_z == 0 {
        return Err(Error::Precondition("z is too close to 1".into()));
    }
    let ratio = Ratio { coeffs: binomial_coeffs(&f64_to_rational(alpha), 130) };
    let tol_fx = {
        let t = f64_to_rational(tolerance / 2.0) * BigRational::from_integer(BigInt::one() << FB);
        t.floor().to_integer().to_u128().unwrap_or(u128::MAX)
    };

    let (mut t_lo, mut t_hi) = (z_lo, z_hi);
    let mut sum_lo = BigInt::zero();
    let mut sum_hi = BigInt::zero();
    let (mut blk_lo, mut blk_hi) = (t_lo, t_hi);
    let mut k = 1u64;
    loop {
        // Σ_{j>k} z^j j^{-α} ≤ t_k · z / (1 - z)
        let num = mul_up(t_hi, z_hi);
        let cheap = num as f64 / one_minus_z as f64 * ONE as f64;
        let tail = if cheap > 2.0 * tol_fx as f64 { u128::MAX } else { tail_div(num, one_minus_z) };
        if tail <= tol_fx {
            sum_lo += blk_lo;
            sum_hi += blk_hi;
            sum_hi += tail;
            break;
        }
        if k >= MAX_TERMS {
            return Err(Error::PrecisionExhausted(format!("Σ z^k/k^α at z = {z} needs more than {MAX_TERMS} terms")));
        }
        k += 1;
        let (r_lo, r_hi) = ratio.at(k);
        t_lo = mul_down(mul_down(t_lo, z_lo), r_lo);
        t_hi = mul_up(mul_up(t_hi, z_hi), r_hi);
        blk_lo += t_lo;
        blk_hi += t_hi;
        if k % 64 == 0 {
            sum_lo += blk_lo;
            sum_hi += blk_hi;
            blk_lo = 0;
            blk_hi = 0;
        }
    }
    let lo = Dyadic::new(sum_lo, -(FB as i64));
    let hi = Dyadic::new(sum_hi, -(FB as i64));
    Ok(BoundedReal::from_interval(&lo, &hi, 140))
}

/// ceil(num · 2^120 / den) without overflow for num < 2^127.
fn tail_div(num: u128, den: u128) -> u128 {
    let q = BigInt::from(num) << FB;
    let d = BigInt::from(den);
    let (qq, r) = num_integer::Integer::div_rem(&q, &d);
    let v = if r.is_zero() { qq } else { qq + 1 };
    v.to_u128().unwrap_or(u128::MAX)
}

/// Γ(1 - α) (ln 1/z)^{α-1}.
pub fn gelfond_asymptotic(z: &BoundedReal, alpha: f64) -> Result<BoundedReal> {
    if !(alpha.is_finite() && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let prec = z.prec().max(64);
    let one = BoundedReal::one(prec);
    if !(z.is_positive() && z.definitely_lt(&one)) {
        return Err(Error::Precondition(format!("z must lie in (0, 1), got {z}")));
    }
    let wp = prec + 16;
    let l = -(z.clone().with_prec(wp).ln());
    let g = BoundedReal::from_f64(1.0 - alpha, wp).gamma();
    let p = (l.ln() * BoundedReal::from_f64(alpha - 1.0, wp)).exp();
    Ok((g * p).with_prec(prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_mul_matches_bigint() {
        let a = 0x1234_5678_9abc_def0_1122_3344_5566_7788u128;
        let b = 0x0fed_cba9_8765_4321_99aa_bbcc_ddee_ff00u128;
        let (hi, lo) = wide_mul(a, b);
        let full = (BigInt::from(hi) << 128) + BigInt::from(lo);
        assert_eq!(full, BigInt::from(a) * BigInt::from(b));
    }

    #[test]
    fn ln2_at_half() {
        let v = polylog_sum(0.5, 1.0, 1e-20).unwrap();
        assert!(v.contains(&crate::elementary::ln2(100)));
        assert!(v.rad_f64() < 1e-20);
    }

    #[test]
    fn ratio_bounds_contain_power() {
        let r = Ratio { coeffs: binomial_coeffs(&f64_to_rational(0.3), 130) };
        for k in [2u64, 3, 10, 1000, 1 << 20] {
            let (lo, hi) = r.at(k);
            let exact = (1.0 - 1.0 / k as f64).powf(0.3);
            let scale = ONE as f64;
            assert!(lo as f64 / scale <= exact * (1.0 + 1e-15) && hi as f64 / scale >= exact * (1.0 - 1e-15));
            assert!(hi - lo < 1 << 20);
        }
    }

    #[test]
    fn gelfond_unit_case() {
        let z = (-BoundedReal::one(128)).exp();
        let g = gelfond_asymptotic(&z, 0.0).unwrap();
        assert!(g.contains(&BoundedReal::one(128)));
    }
}
