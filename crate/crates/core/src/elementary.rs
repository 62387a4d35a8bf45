//! Enclosures of the handful of transcendental functions the series need.
//!
//! Each function evaluates at the exact midpoint with a few guard bits and
//! then widens the result by the input radius times a Lipschitz bound.

use std::collections::BTreeMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ball::{BoundedReal, Mag};

/// Just below 1/ln 2.
#[allow(clippy::approx_constant)]
const LOG2_E_DOWN: f64 = 1.4426;

type Cache = OnceLock<RwLock<BTreeMap<u32, BoundedReal>>>;

static PI_CACHE: Cache = OnceLock::new();
static LN2_CACHE: Cache = OnceLock::new();

fn cached(cache: &Cache, prec: u32, compute: fn(u32) -> BoundedReal) -> BoundedReal {
    let bucket = (prec / 64 + 1) * 64;
    let map = cache.get_or_init(|| RwLock::new(BTreeMap::new()));
    if let Some(v) = map.read().expect("constant cache poisoned").range(bucket..).next() {
        return v.1.clone().with_prec(prec);
    }
    let v = compute(bucket + 16);
    let mut w = map.write().expect("constant cache poisoned");
    w.entry(bucket).or_insert(v).clone().with_prec(prec)
}

fn negligible(term: &BoundedReal, wp: u32) -> bool {
    term.abs_upper() < Mag::pow2(-(wp as i64) - 2)
}

/// atan(1/k) by its alternating Taylor series.
fn atan_inv(k: u64, wp: u32) -> BoundedReal {
    let x = BoundedReal::one(wp).div_u64(k);
    let x2 = x.sqr();
    let mut power = x.clone();
    let mut sum = x;
    let mut j = 1u64;
    loop {
        power = &power * &x2;
        let term = power.div_u64(2 * j + 1);
        if negligible(&term, wp) {
            return sum.add_radius(term.abs_upper());
        }
        sum = if j % 2 == 1 { sum - term } else { sum + term };
        j += 1;
    }
}

fn compute_pi(wp: u32) -> BoundedReal {
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    let a = atan_inv(5, wp + 8).mul_2exp(4);
    let b = atan_inv(239, wp + 8).mul_2exp(2);
    (a - b).with_prec(wp)
}

fn compute_ln2(wp: u32) -> BoundedReal {
    // ln 2 = 2 atanh(1/3)
    atanh_series(&BoundedReal::one(wp + 8).div_u64(3), wp + 8).mul_2exp(1).with_prec(wp)
}

pub fn pi(prec: u32) -> BoundedReal {
    cached(&PI_CACHE, prec, compute_pi)
}

pub fn ln2(prec: u32) -> BoundedReal {
    cached(&LN2_CACHE, prec, compute_ln2)
}

/// Sum of z^(2j+1)/(2j+1) for |z| <= 1/3.
fn atanh_series(z: &BoundedReal, wp: u32) -> BoundedReal {
    let z2 = z.sqr();
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut j = 1u64;
    loop {
        power = &power * &z2;
        if negligible(&power, wp) {
            // remaining terms are bounded by a geometric series with ratio 1/9
            return sum.add_radius(power.abs_upper().mul_u64(2));
        }
        sum = sum + power.div_u64(2 * j + 1);
        j += 1;
    }
}

impl BoundedReal {
    pub fn exp(&self) -> BoundedReal {
        let prec = self.prec();
        if !self.is_finite() {
            return BoundedReal::indeterminate(prec);
        }
        let mf = self.mid_f64();
        if mf > 1e12 {
            return BoundedReal::indeterminate(prec);
        }
        if mf < -1e15 {
            // e^m <= 2^(m/ln 2); 1.4426 < 1/ln 2 keeps the bound upward
            let e2 = (mf * LOG2_E_DOWN).floor() as i64 + 1;
            let hi = (mf + self.rad_f64()) * LOG2_E_DOWN;
            let e2 = e2.max(hi.floor() as i64 + 1);
            return BoundedReal::zero(prec).add_radius(Mag::pow2(e2));
        }
        let wp = prec + 24;
        let m = self.mid_ball(wp + 64);
        let k = (mf / std::f64::consts::LN_2).round() as i64;
        let kbits = 64 - k.unsigned_abs().leading_zeros();
        let r = (&m - &(ln2(wp + kbits + 8) * BoundedReal::from_i64(k, 64))).with_prec(wp);
        let halvings = ((wp as f64).sqrt() / 2.0) as i64;
        let top = r.top_exp().max(-(wp as i64));
        let s = (halvings + top).max(0);
        let rr = r.mul_2exp(-s);
        let mut sum = BoundedReal::one(wp);
        let mut term = BoundedReal::one(wp);
        let mut j = 1u64;
        loop {
            term = (&term * &rr).div_u64(j);
            if negligible(&term, wp) {
                sum = sum.add_radius(term.abs_upper().mul_u64(2));
                break;
            }
            sum = sum + &term;
            j += 1;
        }
        for _ in 0..s {
            sum = sum.sqr();
        }
        let out = sum.mul_2exp(k);
        let widen = out.abs_upper().mul(self.radius().expm1_up());
        out.add_radius(widen).with_prec(prec)
    }

    /// Natural logarithm; indeterminate unless the ball is strictly positive.
    pub fn ln(&self) -> BoundedReal {
        let prec = self.prec();
        if !self.is_positive() || !self.is_finite() {
            return BoundedReal::indeterminate(prec);
        }
        let wp = prec + 24;
        let (man, exp) = self.mid_mantissa();
        let b = man.bits() as i64;
        // y = man / 2^b in [1/2, 1); move it into [1/sqrt2, sqrt2)
        let mut e = exp + b;
        let mut shift = -b;
        if (man * man) * 2u32 < (BigInt::one() << (2 * b as u64)) {
            e -= 1;
            shift += 1;
        }
        let y = BoundedReal::from_dyadic(man.clone(), shift, b as u32 + 2);
        let one = BoundedReal::one(wp);
        let z = (&y - &one).with_prec(wp) / (&y + &one).with_prec(wp);
        let mut out = atanh_series(&z, wp).mul_2exp(1);
        if e != 0 {
            let ebits = 64 - e.unsigned_abs().leading_zeros();
            out = out + ln2(wp + ebits + 8) * BoundedReal::from_i64(e, 64);
        }
        let widen = self.radius().div(self.abs_lower());
        out.add_radius(widen).with_prec(prec)
    }

    /// ln(1 + self), accurate when self is tiny.
    pub fn ln_1p(&self) -> BoundedReal {
        let prec = self.prec();
        if !self.is_finite() {
            return BoundedReal::indeterminate(prec);
        }
        let mf = self.mid_f64();
        if mf.abs() >= 0.25 {
            return (self + &BoundedReal::one(prec)).ln();
        }
        let one_plus = self + &BoundedReal::one(prec + 4);
        let low = one_plus.abs_lower();
        if low.is_zero() {
            return BoundedReal::indeterminate(prec);
        }
        let wp = prec + 24;
        let u = self.mid_ball(wp);
        let z = &u / &(&u + &BoundedReal::from_i64(2, wp));
        let out = atanh_series(&z, wp).mul_2exp(1);
        out.add_radius(self.radius().div(low)).with_prec(prec)
    }

    /// sin and cos of the exact midpoint plus the input radius.
    fn sin_cos(&self) -> (BoundedReal, BoundedReal) {
        let prec = self.prec();
        let mf = self.mid_f64();
        if !self.is_finite() || mf.abs() > 1e12 {
            let unit = BoundedReal::zero(prec).add_radius(Mag::from_u64(1));
            return (unit.clone(), unit);
        }
        let wp = prec + 16;
        let m = self.mid_ball(wp + 64);
        let k = (mf / std::f64::consts::FRAC_PI_2).round() as i64;
        let kbits = 64 - k.unsigned_abs().leading_zeros();
        let half_pi = pi(wp + kbits + 8).mul_2exp(-1);
        let r = (&m - &(half_pi * BoundedReal::from_i64(k, 64))).with_prec(wp);
        let r2 = r.sqr();
        let series = |start: BoundedReal, first: u64| {
            let mut sum = start.clone();
            let mut term = start;
            let mut j = first;
            let mut neg = true;
            loop {
                term = (&term * &r2).div_u64(j * (j + 1));
                if negligible(&term, wp) {
                    return sum.add_radius(term.abs_upper());
                }
                sum = if neg { sum - &term } else { sum + &term };
                neg = !neg;
                j += 2;
            }
        };
        let s = series(r.clone(), 2);
        let c = series(BoundedReal::one(wp), 1);
        let (s, c) = match k.rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        };
        let rad = self.radius();
        (s.add_radius(rad).with_prec(prec), c.add_radius(rad).with_prec(prec))
    }

    pub fn sin(&self) -> BoundedReal {
        self.sin_cos().0
    }

    pub fn cos(&self) -> BoundedReal {
        self.sin_cos().1
    }

    pub fn sqrt(&self) -> BoundedReal {
        let prec = self.prec();
        if !self.is_finite() || self.is_negative() {
            return BoundedReal::indeterminate(prec);
        }
        if !self.is_positive() {
            // ball touches zero: [0, sqrt(upper)]
            let hi = self.abs_upper().sqrt_up();
            return hi_half(hi, prec).add_radius(hi.mul_2exp(-1));
        }
        let (man, exp) = self.mid_mantissa();
        let bits = man.bits() as i64;
        let mut sh = (2 * (prec as i64 + 4) - bits).max(0);
        if (exp - sh).rem_euclid(2) != 0 {
            sh += 1;
        }
        let scaled = man << (sh as u64);
        let root = scaled.sqrt();
        let exact = &root * &root == scaled;
        let e = (exp - sh) / 2;
        let mut out = BoundedReal::from_dyadic(root, e, prec + 8);
        if !exact {
            out = out.add_radius(Mag::pow2(e));
        }
        let widen = self.radius().div(self.abs_lower().sqrt_down());
        out.add_radius(widen).with_prec(prec)
    }

    /// Arcsine on [0, 1); certified by bracketing with monotone sine checks.
    pub fn asin(&self) -> BoundedReal {
        let prec = self.prec();
        if !self.is_finite() {
            return BoundedReal::indeterminate(prec);
        }
        if self.is_negative() {
            return -(-self).asin();
        }
        let one = BoundedReal::one(prec);
        if !self.definitely_lt(&one) || self.lower().sign() == num_bigint::Sign::Minus {
            return BoundedReal::indeterminate(prec);
        }
        let wp = prec + 16;
        let y = self.mid_ball(wp + 8);
        let mut x = BoundedReal::from_f64(y.mid_f64().asin(), wp);
        let mut p = 48u32;
        loop {
            p = (2 * p).min(wp + 8);
            let xp = x.mid_ball(p);
            let (s, c) = xp.sin_cos();
            x = (&xp - &((&s - &y.mid_ball(p)) / c)).mid_ball(p);
            if p == wp + 8 {
                break;
            }
        }
        let x = x.mid_ball(wp);
        let slope = x.cos().abs_lower();
        let base = Mag::pow2(x.top_exp().max(-(wp as i64) * 4) - wp as i64 + 4);
        let mut delta = if slope.is_zero() {
            base
        } else {
            self.radius().div(slope).mul_u64(2).add(base)
        };
        let (ylo, yhi) = (self.lower(), self.upper());
        for _ in 0..24 {
            let d = BoundedReal::zero(wp).add_radius(delta);
            let lo = BoundedReal::from_dyadic(x.lower_with(&d).man, x.lower_with(&d).exp, wp + 64);
            let hi = BoundedReal::from_dyadic(x.upper_with(&d).man, x.upper_with(&d).exp, wp + 64);
            let (slo, shi) = (lo.sin(), hi.sin());
            if slo.upper() <= ylo && shi.lower() >= yhi {
                return x.add_radius(delta).with_prec(prec);
            }
            delta = delta.mul_u64(4);
        }
        BoundedReal::indeterminate(prec)
    }

    fn lower_with(&self, d: &BoundedReal) -> crate::ball::Dyadic {
        self.mid().sub(&d.upper())
    }

    fn upper_with(&self, d: &BoundedReal) -> crate::ball::Dyadic {
        self.mid().add(&d.upper())
    }

    /// self^e for real exponent via exp(e ln self); self must be positive.
    pub fn powf(&self, e: &BoundedReal) -> BoundedReal {
        (e * &self.ln()).exp()
    }

    /// Gamma function for positive arguments.
    pub fn gamma(&self) -> BoundedReal {
        let prec = self.prec();
        if !self.is_positive() || !self.is_finite() {
            return BoundedReal::indeterminate(prec);
        }
        if self.is_exact() {
            return gamma_exact(self, prec);
        }
        // Gamma is convex on (0, inf): its maximum over the ball sits at an endpoint
        let lo = self.lower();
        let hi = self.upper();
        let lo_b = BoundedReal::from_dyadic(lo.man.clone(), lo.exp, prec + 64);
        let hi_b = BoundedReal::from_dyadic(hi.man.clone(), hi.exp, prec + 64);
        let g_lo = gamma_exact(&lo_b, prec);
        let g_hi = gamma_exact(&hi_b, prec);
        let gmax = g_lo.abs_upper().max(g_hi.abs_upper());
        // |psi(x)| <= 1/x + ln(x + 1) + 1
        let xl = lo_b.abs_lower();
        let psi = Mag::from_u64(1).div(xl).add(Mag::from_f64_up(hi_b.mid_f64().ln_1p() * 1.01 + 1.01));
        let mid = gamma_exact(&self.mid_ball(prec + 8), prec);
        mid.add_radius(self.radius().mul(gmax).mul(psi))
    }
}

fn hi_half(hi: Mag, prec: u32) -> BoundedReal {
    match hi.to_dyadic() {
        Some((m, e)) => BoundedReal::from_dyadic(m, e - 1, prec + 32),
        None => BoundedReal::indeterminate(prec),
    }
}

static BERNOULLI: OnceLock<Vec<BigRational>> = OnceLock::new();
const BERNOULLI_COUNT: usize = 160;

/// B_{2k} for k = 0..BERNOULLI_COUNT.
fn bernoulli_even() -> &'static [BigRational] {
    BERNOULLI.get_or_init(|| {
        // Akiyama-Tanigawa
        let n = 2 * BERNOULLI_COUNT + 1;
        let mut a: Vec<BigRational> = Vec::with_capacity(n + 1);
        let mut out = Vec::with_capacity(BERNOULLI_COUNT + 1);
        for m in 0..=n {
            a.push(BigRational::new(BigInt::one(), BigInt::from(m as u64 + 1)));
            for j in (1..=m).rev() {
                let diff = &a[j - 1] - &a[j];
                a[j - 1] = diff * BigRational::from_integer(BigInt::from(j as u64));
            }
            if m % 2 == 0 {
                out.push(a[0].clone());
            }
        }
        out.truncate(BERNOULLI_COUNT + 1);
        out
    })
}

fn gamma_exact(x: &BoundedReal, prec: u32) -> BoundedReal {
    let wp = prec + 32;
    let xf = x.mid_f64();
    let z_min = wp as f64 / 6.0 + 12.0;
    let shift = if xf < z_min { (z_min - xf).ceil() as u64 } else { 0 };
    let x = x.mid_ball(wp);
    let z = &x + &BoundedReal::from_u64(shift, 64);
    let ln_z = z.ln();
    let half = BoundedReal::pow2(-1, wp);
    let two_pi = pi(wp).mul_2exp(1);
    let mut lg = &(&(&z - &half) * &ln_z) - &z;
    lg = lg + two_pi.ln().mul_2exp(-1);
    let bern = bernoulli_even();
    let zinv = BoundedReal::one(wp) / &z;
    let zinv2 = zinv.sqr();
    let mut zpow = zinv.clone();
    let mut done = false;
    for (k, b) in bern.iter().enumerate().skip(1) {
        let k = k as u64;
        let coeff = BoundedReal::from_rational(b, wp) / BoundedReal::from_u64(2 * k * (2 * k - 1), 64);
        let term = &coeff * &zpow;
        if k > 2 && negligible(&term, wp) {
            // the Stirling remainder is bounded by the first omitted term
            lg = lg.add_radius(term.abs_upper());
            done = true;
            break;
        }
        lg = lg + term;
        zpow = &zpow * &zinv2;
    }
    if !done {
        return BoundedReal::indeterminate(prec);
    }
    let mut g = lg.exp();
    if shift > 0 {
        let mut prod = x.clone();
        for i in 1..shift {
            prod = &prod * &(&x + &BoundedReal::from_u64(i, 64));
        }
        g = g / prod;
    }
    g.with_prec(prec)
}

/// ln(sin(pi d)) for d in (0, 1/2], keeping relative accuracy near d = 1/2.
pub fn ln_sin_pi(d: &BoundedReal) -> BoundedReal {
    let prec = d.prec();
    let wp = prec + 16;
    let p = pi(wp);
    if d.mid_f64() <= 0.25 {
        (&p * d).sin().ln()
    } else {
        // sin(pi d) = cos(pi t) = 1 - 2 sin^2(pi t / 2), t = 1/2 - d
        let t = &BoundedReal::pow2(-1, wp) - d;
        let s = (&p * &t).mul_2exp(-1).sin();
        (-s.sqr().mul_2exp(1)).ln_1p()
    }
}

/// arcsin(1 - eps) = pi/2 - 2 arcsin(sqrt(eps / 2)), for eps in (0, 1].
pub fn asin_one_minus(eps: &BoundedReal) -> BoundedReal {
    let prec = eps.prec();
    let inner = eps.mul_2exp(-1).sqrt().asin().mul_2exp(1);
    &pi(prec + 8).mul_2exp(-1) - &inner
}

/// arccos(1 - eps) = 2 arcsin(sqrt(eps / 2)).
pub fn acos_one_minus(eps: &BoundedReal) -> BoundedReal {
    eps.mul_2exp(-1).sqrt().asin().mul_2exp(1)
}

/// Exact rational square root when it exists.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Integer floor(log2 |x|) lower estimate from f64 (diagnostics only).
pub fn approx_log2(x: &BoundedReal) -> f64 {
    let (m, e) = x.mid_mantissa();
    if m.is_zero() {
        return f64::NEG_INFINITY;
    }
    let b = m.bits() as i64;
    let top = if b > 60 { m.magnitude() >> ((b - 60) as u64) } else { m.magnitude().clone() };
    let shift = (b - 60).max(0);
    top.to_f64().unwrap_or(1.0).log2() + (e + shift) as f64
}
