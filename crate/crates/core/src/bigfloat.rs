//! Fixed-point arbitrary-precision reals and complex numbers on BigInt.
//!
//! A [`BigFloat`] is man/2^bits; every operation keeps the scale, and the
//! caller chooses enough guard bits for its target precision (see
//! [`bits_for_digits`]). π comes from the Chudnovsky series with binary
//! splitting; a Machin-formula evaluation is kept alongside as an
//! independent cross-check for the test suite.

use crate::series::Q;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumericError {
    #[error("requested precision {requested} digits needs truncation {needed}, have {have}")]
    InsufficientTruncation { requested: u32, needed: i64, have: i64 },
    #[error("|q| = {qabs} is too large for series evaluation")]
    QTooLarge { qabs: String },
    #[error("denominator vanished during numeric evaluation")]
    NumericDivisionByZero,
    #[error("{0}")]
    Other(String),
}

/// Binary precision with a 20% + 32-bit guard for d decimal digits.
pub fn bits_for_digits(d: u32) -> u32 {
    let core = (d as f64 * std::f64::consts::LOG2_10).ceil() as u32;
    core + core / 5 + 32
}

/// Fixed-point real: value = man / 2^bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigFloat {
    man: BigInt,
    bits: u32,
}

impl BigFloat {
    pub fn zero(bits: u32) -> Self {
        BigFloat { man: BigInt::zero(), bits }
    }

    pub fn from_i64(v: i64, bits: u32) -> Self {
        BigFloat { man: BigInt::from(v) << bits, bits }
    }

    pub fn from_q(v: &Q, bits: u32) -> Self {
        BigFloat { man: (v.numer() << bits).div_floor(v.denom()), bits }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    pub fn neg(&self) -> Self {
        BigFloat { man: -self.man.clone(), bits: self.bits }
    }

    pub fn abs(&self) -> Self {
        BigFloat { man: self.man.abs(), bits: self.bits }
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.bits, o.bits);
        BigFloat { man: &self.man + &o.man, bits: self.bits }
    }

    pub fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!(self.bits, o.bits);
        BigFloat { man: &self.man - &o.man, bits: self.bits }
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.bits, o.bits);
        BigFloat { man: (&self.man * &o.man) >> self.bits, bits: self.bits }
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        BigFloat { man: &self.man * BigInt::from(k), bits: self.bits }
    }

    pub fn div(&self, o: &Self) -> Self {
        debug_assert_eq!(self.bits, o.bits);
        debug_assert!(!o.man.is_zero());
        BigFloat { man: (&self.man << self.bits).div_floor(&o.man), bits: self.bits }
    }

    pub fn recip(&self) -> Self {
        Self::from_i64(1, self.bits).div(self)
    }

    pub fn shr(&self, k: u32) -> Self {
        BigFloat { man: &self.man >> k, bits: self.bits }
    }

    pub fn cmp_abs(&self, o: &Self) -> std::cmp::Ordering {
        self.man.abs().cmp(&o.man.abs())
    }

    pub fn lt(&self, o: &Self) -> bool {
        self.man < o.man
    }

    /// Exact comparison |self| < 10^{-d}.
    pub fn abs_lt_pow10_neg(&self, d: u32) -> bool {
        self.man.abs() * BigInt::from(10u32).pow(d) < (BigInt::from(1) << self.bits)
    }

    /// Largest d ≤ cap with |self| < 10^{-d} (0 when |self| ≥ 1).
    pub fn neg_log10_floor(&self, cap: u32) -> u32 {
        let mut lo = 0;
        for d in 1..=cap {
            if self.abs_lt_pow10_neg(d) {
                lo = d;
            } else {
                break;
            }
        }
        lo
    }

    /// Floor as a BigInt (shift right is floor division for BigInt).
    pub fn floor_bigint(&self) -> BigInt {
        self.man.clone() >> self.bits
    }

    /// Floor of log2 |self|; None for zero. Useful for magnitude checks.
    pub fn log2_floor(&self) -> Option<i64> {
        if self.man.is_zero() {
            return None;
        }
        Some(self.man.bits() as i64 - 1 - self.bits as i64)
    }

    /// Newton-free square root via integer sqrt of man·2^bits; requires a
    /// nonnegative value.
    pub fn sqrt(&self) -> Self {
        debug_assert!(!self.man.is_negative());
        BigFloat { man: (&self.man << self.bits).sqrt(), bits: self.bits }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Self::from_i64(1, self.bits);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        if bits == self.bits {
            self.clone()
        } else if bits > self.bits {
            BigFloat { man: &self.man << (bits - self.bits), bits }
        } else {
            BigFloat { man: &self.man >> (self.bits - bits), bits }
        }
    }

    /// Decimal string with `digits` places after the point, rounded to
    /// nearest.
    pub fn to_decimal(&self, digits: u32) -> String {
        let neg = self.man.is_negative();
        let scaled = self.man.abs() * BigInt::from(10u32).pow(digits);
        let rounded = (scaled + (BigInt::from(1) << (self.bits - 1))) >> self.bits;
        let s = rounded.to_string();
        let (int_part, frac_part) = if s.len() > digits as usize {
            let split = s.len() - digits as usize;
            (s[..split].to_string(), s[split..].to_string())
        } else {
            ("0".to_string(), format!("{:0>width$}", s, width = digits as usize))
        };
        if digits == 0 {
            format!("{}{}", if neg { "-" } else { "" }, int_part)
        } else {
            format!("{}{}.{}", if neg { "-" } else { "" }, int_part, frac_part)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let l = self.man.bits() as i64;
        if l <= 52 {
            return self.man.to_f64().unwrap_or(0.0) / 2f64.powi(self.bits as i32);
        }
        let shift = l - 52;
        let top = (&self.man >> shift).to_f64().unwrap_or(0.0);
        top * 2f64.powi((shift - self.bits as i64) as i32)
    }
}

// ---------------------------------------------------------------------------
// π
// ---------------------------------------------------------------------------

/// Chudnovsky binary splitting over a..b (exclusive), b ≥ a ≥ 1.
fn chud_split(a: u64, b: u64) -> (BigInt, BigInt, BigInt) {
    if b == a + 1 {
        let k = a;
        let p = BigInt::from(6 * k - 5) * BigInt::from(2 * k - 1) * BigInt::from(6 * k - 1);
        let q = BigInt::from(k).pow(3) * BigInt::from(10_939_058_860_032_000u64);
        let mut t = &p * (BigInt::from(13_591_409u64) + BigInt::from(545_140_134u64) * BigInt::from(k));
        if k % 2 == 1 {
            t = -t;
        }
        (p, q, t)
    } else {
        let m = (a + b) / 2;
        let (p1, q1, t1) = chud_split(a, m);
        let (p2, q2, t2) = chud_split(m, b);
        (&p1 * &p2, &q1 * &q2, t1 * q2 + p1 * t2)
    }
}

/// π by the Chudnovsky series (14+ digits per term).
pub fn pi(bits: u32) -> BigFloat {
    let digits = (bits as f64 / std::f64::consts::LOG2_10) as u64;
    let terms = digits / 14 + 2;
    let wb = bits + 64;
    let (_, q, t) = chud_split(1, terms.max(2));
    // Σ = 13591409 + T/Q ; π = 426880·√10005 / Σ
    let qf = BigFloat { man: &q << wb, bits: wb };
    let tf = BigFloat { man: &t << wb, bits: wb };
    let sum = BigFloat::from_i64(13_591_409, wb).add(&tf.div(&qf));
    let root = BigFloat::from_i64(10_005, wb).sqrt();
    root.mul_i64(426_880).div(&sum).with_bits(bits)
}

/// π by Machin's formula, 16·atan(1/5) - 4·atan(1/239). Slower than
/// Chudnovsky; kept as an independent oracle for tests.
pub fn pi_machin(bits: u32) -> BigFloat {
    let wb = bits + 32;
    fn atan_inv(x: i64, bits: u32) -> BigFloat {
        let mut acc = BigInt::zero();
        let mut term = BigInt::from(1) << bits; // x^{-(2k+1)} scaled, starts at 1/x
        let x2 = BigInt::from(x) * BigInt::from(x);
        let mut k = 0u32;
        term = term / BigInt::from(x);
        loop {
            if term.is_zero() {
                break;
            }
            let contrib = &term / BigInt::from(2 * k + 1);
            if k % 2 == 0 {
                acc += contrib;
            } else {
                acc -= contrib;
            }
            term = term / &x2;
            k += 1;
        }
        BigFloat { man: acc, bits }
    }
    let a = atan_inv(5, wb).mul_i64(16);
    let b = atan_inv(239, wb).mul_i64(4);
    a.sub(&b).with_bits(bits)
}

// ---------------------------------------------------------------------------
// elementary functions
// ---------------------------------------------------------------------------

/// exp(x) by scaling x into [-1/4, 1/4], Taylor, and repeated squaring.
pub fn exp(x: &BigFloat) -> BigFloat {
    let bits = x.bits();
    let mag = x.log2_floor().unwrap_or(-(bits as i64));
    let j = (mag + 3).max(0) as u32;
    let wb = bits + j + 32;
    let xs = x.with_bits(wb).shr(j);
    let mut term = BigFloat::from_i64(1, wb);
    let mut acc = BigFloat::from_i64(1, wb);
    let mut n = 1i64;
    loop {
        term = term.mul(&xs);
        term = BigFloat { man: term.man.div_floor(&BigInt::from(n)), bits: wb };
        if term.man.is_zero() {
            break;
        }
        acc = acc.add(&term);
        n += 1;
    }
    for _ in 0..j {
        acc = acc.mul(&acc);
    }
    acc.with_bits(bits)
}

/// (cos θ, sin θ) with range reduction modulo 2π.
pub fn cos_sin(theta: &BigFloat) -> (BigFloat, BigFloat) {
    let bits = theta.bits();
    let wb = bits + 64;
    let two_pi = pi(wb).mul_i64(2);
    let t = theta.with_bits(wb);
    // k = round(θ/2π); BigInt >> is a floor division by 2^wb
    let k = (t.div(&two_pi).man + (BigInt::from(1) << (wb - 1))) >> wb;
    let reduced = t.sub(&two_pi.mul(&BigFloat { man: k << wb, bits: wb }));
    let x2 = reduced.mul(&reduced);
    let div_int = |f: BigFloat, d: i64| BigFloat { man: f.man.div_floor(&BigInt::from(d)), bits: wb };
    // cos = Σ (-1)^n x^{2n} / (2n)!
    let mut cos = BigFloat::from_i64(1, wb);
    let mut term = BigFloat::from_i64(1, wb);
    let mut n = 1i64;
    loop {
        term = div_int(term.mul(&x2), (2 * n - 1) * (2 * n));
        if term.man.is_zero() {
            break;
        }
        if n % 2 == 1 {
            cos = cos.sub(&term);
        } else {
            cos = cos.add(&term);
        }
        n += 1;
    }
    // sin = x · Σ (-1)^n x^{2n} / (2n+1)!
    let mut h = BigFloat::from_i64(1, wb);
    let mut term = BigFloat::from_i64(1, wb);
    let mut n = 1i64;
    loop {
        term = div_int(term.mul(&x2), (2 * n) * (2 * n + 1));
        if term.man.is_zero() {
            break;
        }
        if n % 2 == 1 {
            h = h.sub(&term);
        } else {
            h = h.add(&term);
        }
        n += 1;
    }
    let sin = reduced.mul(&h);
    (cos.with_bits(bits), sin.with_bits(bits))
}

/// Complex fixed-point number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Complex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Complex {
    pub fn zero(bits: u32) -> Self {
        Complex { re: BigFloat::zero(bits), im: BigFloat::zero(bits) }
    }

    pub fn from_real(re: BigFloat) -> Self {
        let bits = re.bits();
        Complex { re, im: BigFloat::zero(bits) }
    }

    pub fn bits(&self) -> u32 {
        self.re.bits()
    }

    pub fn add(&self, o: &Self) -> Self {
        Complex { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Complex { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> Self {
        Complex { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn conj(&self) -> Self {
        Complex { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Complex {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn scale(&self, k: &BigFloat) -> Self {
        Complex { re: self.re.mul(k), im: self.im.mul(k) }
    }

    pub fn norm_sqr(&self) -> BigFloat {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn abs(&self) -> BigFloat {
        self.norm_sqr().sqrt()
    }

    pub fn div(&self, o: &Self) -> Result<Self, NumericError> {
        let n = o.norm_sqr();
        if n.is_zero() {
            return Err(NumericError::NumericDivisionByZero);
        }
        let t = self.mul(&o.conj());
        Ok(Complex { re: t.re.div(&n), im: t.im.div(&n) })
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Complex::from_real(BigFloat::from_i64(1, self.bits()));
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let r = self.abs();
        let two = BigFloat::from_i64(2, self.bits());
        let re = r.add(&self.re).div(&two).sqrt();
        let mut im = r.sub(&self.re).div(&two).sqrt();
        if self.im.is_negative() {
            im = im.neg();
        }
        Complex { re, im }
    }
}

/// e^{2πiτ} for τ = re + i·im with im > 0: e^{-2π·im}·(cos 2π·re + i sin 2π·re).
pub fn exp_2pi_i_tau(re: &BigFloat, im: &BigFloat) -> Complex {
    let bits = re.bits();
    let two_pi = pi(bits).mul_i64(2);
    let radius = exp(&two_pi.mul(im).neg());
    let (c, s) = cos_sin(&two_pi.mul(re));
    Complex { re: c.mul(&radius), im: s.mul(&radius) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::q;

    const PI_50: &str = "3.14159265358979323846264338327950288419716939937511";

    #[test]
    fn chudnovsky_matches_literature_digits() {
        let p = pi(bits_for_digits(50));
        assert_eq!(p.to_decimal(50), PI_50);
    }

    #[test]
    fn chudnovsky_matches_machin_to_120_digits() {
        let bits = bits_for_digits(120);
        let a = pi(bits);
        let b = pi_machin(bits);
        assert!(a.sub(&b).abs_lt_pow10_neg(118), "two pi routes disagree");
    }

    #[test]
    fn sqrt_two() {
        let bits = bits_for_digits(50);
        let r = BigFloat::from_i64(2, bits).sqrt();
        assert_eq!(
            r.to_decimal(50),
            "1.41421356237309504880168872420969807856967187537695"
        );
    }

    #[test]
    fn exp_one() {
        let bits = bits_for_digits(40);
        let e = exp(&BigFloat::from_i64(1, bits));
        assert_eq!(e.to_decimal(40), "2.7182818284590452353602874713526624977572");
    }

    #[test]
    fn cos_sin_pythagoras_and_euler() {
        let bits = bits_for_digits(45);
        let theta = BigFloat::from_q(&q(7, 3), bits);
        let (c, s) = cos_sin(&theta);
        let one = BigFloat::from_i64(1, bits);
        assert!(c.mul(&c).add(&s.mul(&s)).sub(&one).abs_lt_pow10_neg(42));
        // e^{iπ} = -1
        let (cp, sp) = cos_sin(&pi(bits));
        assert!(cp.add(&one).abs_lt_pow10_neg(42));
        assert!(sp.abs_lt_pow10_neg(42));
    }

    #[test]
    fn cos_sin_range_reduction() {
        let bits = bits_for_digits(40);
        let theta = BigFloat::from_q(&q(1, 7), bits);
        let big = theta.add(&pi(bits).mul_i64(6));
        let (c1, s1) = cos_sin(&theta);
        let (c2, s2) = cos_sin(&big);
        assert!(c1.sub(&c2).abs_lt_pow10_neg(37));
        assert!(s1.sub(&s2).abs_lt_pow10_neg(37));
    }

    #[test]
    fn complex_ops() {
        let bits = bits_for_digits(40);
        let z = Complex { re: BigFloat::from_i64(3, bits), im: BigFloat::from_i64(4, bits) };
        assert_eq!(z.abs().to_decimal(5), "5.00000");
        let w = z.mul(&z.div(&z).unwrap());
        assert!(w.sub(&z).abs().abs_lt_pow10_neg(37));
        let r = z.sqrt();
        assert!(r.mul(&r).sub(&z).abs().abs_lt_pow10_neg(36));
        // principal branch: nonnegative real part
        assert!(!r.re.is_negative());
    }

    #[test]
    fn q_exponential_magnitude() {
        // τ = i → |q| = e^{-2π} ≈ 0.00186744
        let bits = bits_for_digits(40);
        let qv = exp_2pi_i_tau(&BigFloat::zero(bits), &BigFloat::from_i64(1, bits));
        assert!(qv.im.abs_lt_pow10_neg(38));
        let expect = "0.0018674427317079888144302129348";
        assert_eq!(qv.re.to_decimal(31), expect);
    }

    #[test]
    fn decimal_formatting() {
        let bits = 64;
        assert_eq!(BigFloat::from_q(&q(-1, 8), bits).to_decimal(3), "-0.125");
        assert_eq!(BigFloat::from_i64(42, bits).to_decimal(0), "42");
        assert_eq!(BigFloat::from_q(&q(1, 3), bits).to_decimal(6), "0.333333");
    }

    #[test]
    fn exact_pow10_comparison() {
        let bits = 128;
        let tiny = BigFloat::from_q(&q(1, 1_000_000_007), bits);
        assert!(tiny.abs_lt_pow10_neg(9));
        assert!(!tiny.abs_lt_pow10_neg(10));
        assert_eq!(tiny.neg_log10_floor(40), 9);
    }
}
