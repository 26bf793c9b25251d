//! Exact arithmetic in quadratic and biquadratic extensions of Q.
//!
//! [`QuadSurd`] is p + q√m with m squarefree (possibly negative, so i√7 is
//! representable). [`BiQuad`] is the real field Q(√a, √b) needed when the
//! series-constant formulas mix two radicals; [`CxBiQuad`] adjoins i on top
//! of it.

use crate::series::{qi, Q};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SurdError {
    #[error("radicand must be nonzero")]
    ZeroRadicand,
    #[error("values lie in different quadratic fields ({0} vs {1})")]
    FieldMismatch(i64, i64),
    #[error("division by zero surd")]
    DivisionByZero,
    #[error("value does not reduce to a single quadratic field: {0}")]
    NotQuadratic(String),
    #[error("nonzero imaginary part where a real value was required: {0}")]
    NotReal(String),
}

/// Extracts the largest square factor: n = s²·f with f squarefree; returns
/// (s, f), keeping the sign on f.
fn squarefree_decompose(n: i64) -> (i64, i64) {
    debug_assert!(n != 0);
    let mut f = n.abs();
    let mut s = 1i64;
    let mut d = 2i64;
    while d * d <= f {
        while f % (d * d) == 0 {
            f /= d * d;
            s *= d;
        }
        d += 1;
    }
    (s, f * n.signum())
}

/// p + q√m with p, q rational and m squarefree. m = 1 with q = 0 encodes a
/// rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadSurd {
    p: Q,
    q: Q,
    m: i64,
}

impl QuadSurd {
    /// p + q√m; m is reduced to its squarefree part (√12 becomes 2√3).
    pub fn new(p: Q, q: Q, m: i64) -> Result<Self, SurdError> {
        if m == 0 {
            return Err(SurdError::ZeroRadicand);
        }
        let (s, f) = squarefree_decompose(m);
        let q = q * qi(s);
        if q.is_zero() || f == 1 {
            let p = if f == 1 { p + q } else { p };
            return Ok(QuadSurd { p, q: Q::zero(), m: 1 });
        }
        Ok(QuadSurd { p, q, m: f })
    }

    pub fn rational(p: Q) -> Self {
        QuadSurd { p, q: Q::zero(), m: 1 }
    }

    pub fn from_ints(p: i64, q: i64, m: i64) -> Result<Self, SurdError> {
        Self::new(qi(p), qi(q), m)
    }

    pub fn zero() -> Self {
        Self::rational(Q::zero())
    }

    pub fn one() -> Self {
        Self::rational(Q::one())
    }

    pub fn rational_part(&self) -> &Q {
        &self.p
    }

    pub fn surd_part(&self) -> &Q {
        &self.q
    }

    /// Squarefree radicand (1 for rationals).
    pub fn radicand(&self) -> i64 {
        self.m
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.m > 0 || self.q.is_zero()
    }

    fn same_field(&self, other: &Self) -> Result<i64, SurdError> {
        if self.is_rational() {
            return Ok(other.m);
        }
        if other.is_rational() || self.m == other.m {
            return Ok(self.m);
        }
        Err(SurdError::FieldMismatch(self.m, other.m))
    }

    pub fn add(&self, other: &Self) -> Result<Self, SurdError> {
        let m = self.same_field(other)?;
        Ok(QuadSurd { p: &self.p + &other.p, q: &self.q + &other.q, m }.canonical())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SurdError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        QuadSurd { p: -self.p.clone(), q: -self.q.clone(), m: self.m }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SurdError> {
        let m = self.same_field(other)?;
        let p = &self.p * &other.p + &self.q * &other.q * qi(m);
        let q = &self.p * &other.q + &self.q * &other.p;
        Ok(QuadSurd { p, q, m }.canonical())
    }

    pub fn conj(&self) -> Self {
        QuadSurd { p: self.p.clone(), q: -self.q.clone(), m: self.m }.canonical()
    }

    /// Field norm p² - m·q², a rational.
    pub fn norm(&self) -> Q {
        &self.p * &self.p - &self.q * &self.q * qi(self.m)
    }

    pub fn inv(&self) -> Result<Self, SurdError> {
        let n = self.norm();
        if n.is_zero() {
            return Err(SurdError::DivisionByZero);
        }
        Ok(QuadSurd { p: &self.p / &n, q: -&self.q / &n, m: self.m }.canonical())
    }

    pub fn div(&self, other: &Self) -> Result<Self, SurdError> {
        self.mul(&other.inv()?)
    }

    pub fn scale(&self, k: &Q) -> Self {
        QuadSurd { p: &self.p * k, q: &self.q * k, m: self.m }.canonical()
    }

    pub fn pow(&self, n: u32) -> Result<Self, SurdError> {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    fn canonical(mut self) -> Self {
        if self.q.is_zero() {
            self.m = 1;
        }
        self
    }

    /// Minimal polynomial over Z, primitive with positive leading
    /// coefficient, as ascending coefficients: [c, b, a] means aX² + bX + c
    /// (two entries when the value is rational).
    pub fn minimal_polynomial(&self) -> Vec<BigInt> {
        if self.is_rational() {
            let den = self.p.denom().clone();
            let num = self.p.numer().clone();
            let g = num.gcd(&den);
            let g = if g.is_zero() { BigInt::one() } else { g };
            return vec![-(num / &g), den / g];
        }
        // X² - 2pX + (p² - m·q²)
        let b = -(&self.p + &self.p);
        let c = self.norm();
        let l = b.denom().lcm(c.denom());
        let a = l.clone();
        let bb = b.numer() * (&l / b.denom());
        let cc = c.numer() * (&l / c.denom());
        let g = a.gcd(&bb).gcd(&cc);
        vec![cc / &g, bb / &g, a / g]
    }

    /// Numeric value split as (real, imaginary); imaginary is zero when
    /// m > 0.
    pub fn to_bigfloat(&self, bits: u32) -> (crate::bigfloat::BigFloat, crate::bigfloat::BigFloat) {
        use crate::bigfloat::BigFloat;
        let p = BigFloat::from_q(&self.p, bits);
        if self.q.is_zero() {
            return (p, BigFloat::zero(bits));
        }
        let root = BigFloat::from_i64(self.m.abs(), bits).sqrt();
        let qv = BigFloat::from_q(&self.q, bits).mul(&root);
        if self.m > 0 {
            (p.add(&qv), BigFloat::zero(bits))
        } else {
            (p, qv)
        }
    }

    pub fn to_complex(&self, bits: u32) -> crate::bigfloat::Complex {
        let (re, im) = self.to_bigfloat(bits);
        crate::bigfloat::Complex { re, im }
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            return write!(f, "{}", self.p);
        }
        let root = if self.m < 0 {
            format!("i*sqrt({})", -self.m)
        } else {
            format!("sqrt({})", self.m)
        };
        let qa = self.q.abs();
        let qs = if qa.is_one() { root } else { format!("{qa}*{root}") };
        if self.p.is_zero() {
            write!(f, "{}{}", if self.q.is_negative() { "-" } else { "" }, qs)
        } else {
            write!(f, "{} {} {}", self.p, if self.q.is_negative() { "-" } else { "+" }, qs)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SurdWire {
    p: String,
    q: String,
    m: i64,
}

impl Serialize for QuadSurd {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SurdWire { p: self.p.to_string(), q: self.q.to_string(), m: self.m }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadSurd {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = SurdWire::deserialize(d)?;
        let p = Q::from_str(&w.p).map_err(|e| D::Error::custom(format!("bad p: {e}")))?;
        let q = Q::from_str(&w.q).map_err(|e| D::Error::custom(format!("bad q: {e}")))?;
        QuadSurd::new(p, q, w.m).map_err(D::Error::custom)
    }
}

/// Element of the real biquadratic field Q(√a, √b), a ≠ b squarefree > 1:
/// co[0] + co[1]√a + co[2]√b + co[3]√c, where c is the squarefree part of
/// ab and √a·√b = g√c with ab = g²c. Since a and b are squarefree, g
/// divides both, so a/g and b/g below are integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiQuad {
    a: i64,
    b: i64,
    c: i64,
    g: i64,
    co: [Q; 4],
}

impl BiQuad {
    /// The zero element of Q(√a, √b).
    pub fn field(a: i64, b: i64) -> Result<Self, SurdError> {
        if a == b || a <= 1 || b <= 1 {
            return Err(SurdError::NotQuadratic(format!(
                "biquadratic generators must be distinct and > 1 (got {a}, {b})"
            )));
        }
        let (sa, fa) = squarefree_decompose(a);
        let (sb, fb) = squarefree_decompose(b);
        if sa != 1 || sb != 1 {
            return Err(SurdError::NotQuadratic(format!("generators must be squarefree: {a}, {b}")));
        }
        let (g, c) = squarefree_decompose(fa * fb);
        Ok(BiQuad { a: fa, b: fb, c, g, co: std::array::from_fn(|_| Q::zero()) })
    }

    pub fn from_rational(&self, p: Q) -> Self {
        let mut out = self.clone();
        out.co = [p, Q::zero(), Q::zero(), Q::zero()];
        out
    }

    /// Embeds p + q√m; m must be one of 1, a, b, c.
    pub fn embed(&self, s: &QuadSurd) -> Result<Self, SurdError> {
        let mut out = self.from_rational(s.p.clone());
        if s.q.is_zero() {
            return Ok(out);
        }
        let slot = if s.m == self.a {
            1
        } else if s.m == self.b {
            2
        } else if s.m == self.c {
            3
        } else {
            return Err(SurdError::FieldMismatch(s.m, self.a));
        };
        out.co[slot] = s.q.clone();
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.co.iter().all(Q::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..4 {
            out.co[i] = &self.co[i] + &o.co[i];
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..4 {
            out.co[i] = &self.co[i] - &o.co[i];
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for i in 0..4 {
            out.co[i] = -self.co[i].clone();
        }
        out
    }

    /// Basis products: (√a)² = a, (√b)² = b, (√c)² = c, √a√b = g√c,
    /// √a√c = (a/g)√b, √b√c = (b/g)√a.
    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!((self.a, self.b), (o.a, o.b));
        let [x0, x1, x2, x3] = &self.co;
        let [y0, y1, y2, y3] = &o.co;
        let a_over_g = qi(self.a / self.g);
        let b_over_g = qi(self.b / self.g);
        let c0 = x0 * y0 + (x1 * y1) * qi(self.a) + (x2 * y2) * qi(self.b) + (x3 * y3) * qi(self.c);
        let c1 = x0 * y1 + x1 * y0 + (x2 * y3 + x3 * y2) * &b_over_g;
        let c2 = x0 * y2 + x2 * y0 + (x1 * y3 + x3 * y1) * &a_over_g;
        let c3 = x0 * y3 + x3 * y0 + (x1 * y2 + x2 * y1) * qi(self.g);
        let mut out = self.clone();
        out.co = [c0, c1, c2, c3];
        out
    }

    fn conj_a(&self) -> Self {
        let mut out = self.clone();
        out.co[1] = -out.co[1].clone();
        out.co[3] = -out.co[3].clone();
        out
    }

    fn conj_b(&self) -> Self {
        let mut out = self.clone();
        out.co[2] = -out.co[2].clone();
        out.co[3] = -out.co[3].clone();
        out
    }

    pub fn inv(&self) -> Result<Self, SurdError> {
        if self.is_zero() {
            return Err(SurdError::DivisionByZero);
        }
        // z·z̄_a lies in Q(√b); multiplying by its √b-conjugate gives the
        // rational norm
        let za = self.conj_a();
        let n = self.mul(&za);
        let nb = n.conj_b();
        let full = n.mul(&nb);
        debug_assert!(full.co[1].is_zero() && full.co[2].is_zero() && full.co[3].is_zero());
        let r = full.co[0].clone();
        if r.is_zero() {
            return Err(SurdError::DivisionByZero);
        }
        let mut out = za.mul(&nb);
        for i in 0..4 {
            out.co[i] = &out.co[i] / &r;
        }
        Ok(out)
    }

    pub fn div(&self, o: &Self) -> Result<Self, SurdError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn scale(&self, k: &Q) -> Self {
        let mut out = self.clone();
        for i in 0..4 {
            out.co[i] = &self.co[i] * k;
        }
        out
    }

    /// Collapses to a QuadSurd when at most one radical component is
    /// present.
    pub fn to_quadsurd(&self) -> Result<QuadSurd, SurdError> {
        let present: Vec<usize> = (1..4).filter(|&i| !self.co[i].is_zero()).collect();
        match present.len() {
            0 => Ok(QuadSurd::rational(self.co[0].clone())),
            1 => {
                let i = present[0];
                let m = [0, self.a, self.b, self.c][i];
                QuadSurd::new(self.co[0].clone(), self.co[i].clone(), m)
            }
            _ => Err(SurdError::NotQuadratic(format!("{:?}", self.co))),
        }
    }
}

/// re + i·im over a shared real biquadratic field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CxBiQuad {
    pub re: BiQuad,
    pub im: BiQuad,
}

impl CxBiQuad {
    pub fn real(re: BiQuad) -> Self {
        let im = re.from_rational(Q::zero());
        CxBiQuad { re, im }
    }

    pub fn new(re: BiQuad, im: BiQuad) -> Self {
        CxBiQuad { re, im }
    }

    pub fn i_times(&self) -> Self {
        CxBiQuad { re: self.im.neg(), im: self.re.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        CxBiQuad { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CxBiQuad { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> Self {
        CxBiQuad { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        CxBiQuad { re, im }
    }

    pub fn inv(&self) -> Result<Self, SurdError> {
        let n = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        let ninv = n.inv()?;
        Ok(CxBiQuad { re: self.re.mul(&ninv), im: self.im.mul(&ninv).neg() })
    }

    pub fn div(&self, o: &Self) -> Result<Self, SurdError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn scale(&self, k: &Q) -> Self {
        CxBiQuad { re: self.re.scale(k), im: self.im.scale(k) }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = CxBiQuad::real(self.re.from_rational(Q::one()));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Fails unless the imaginary part vanishes identically.
    pub fn expect_real(&self) -> Result<BiQuad, SurdError> {
        if !self.im.is_zero() {
            return Err(SurdError::NotReal(format!("{:?}", self.im)));
        }
        Ok(self.re.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::q;

    #[test]
    fn squarefree_normalization() {
        let s = QuadSurd::from_ints(0, 1, 12).unwrap();
        assert_eq!(s.radicand(), 3);
        assert_eq!(s.surd_part(), &qi(2));
        let t = QuadSurd::from_ints(1, 1, -8).unwrap();
        assert_eq!(t.radicand(), -2);
        assert_eq!(t.surd_part(), &qi(2));
        let u = QuadSurd::from_ints(1, 3, 4).unwrap();
        assert!(u.is_rational());
        assert_eq!(u.rational_part(), &qi(7));
    }

    #[test]
    fn inverse_of_table_style_value() {
        // (12 + 3√17)^{-1} = (-4 + √17)/3
        let v = QuadSurd::from_ints(12, 3, 17).unwrap().inv().unwrap();
        assert_eq!(v, QuadSurd::new(q(-4, 3), q(1, 3), 17).unwrap());
        let back = v.mul(&QuadSurd::from_ints(12, 3, 17).unwrap()).unwrap();
        assert_eq!(back, QuadSurd::one());
    }

    #[test]
    fn field_mismatch_is_an_error() {
        let a = QuadSurd::from_ints(0, 1, 2).unwrap();
        let b = QuadSurd::from_ints(0, 1, 3).unwrap();
        assert!(matches!(a.add(&b), Err(SurdError::FieldMismatch(2, 3))));
        let r = QuadSurd::rational(qi(5));
        assert_eq!(a.add(&r).unwrap().radicand(), 2);
    }

    #[test]
    fn minimal_polynomials() {
        let r = QuadSurd::rational(q(-1, 21));
        assert_eq!(r.minimal_polynomial(), vec![BigInt::from(1), BigInt::from(21)]);
        // (-4 + √17)/3 is a root of 9X² + 24X - 1
        let v = QuadSurd::new(q(-4, 3), q(1, 3), 17).unwrap();
        assert_eq!(
            v.minimal_polynomial(),
            vec![BigInt::from(-1), BigInt::from(24), BigInt::from(9)]
        );
    }

    #[test]
    fn biquad_mul_table() {
        // Q(√17, √34): √17·√34 = 17√2
        let f = BiQuad::field(17, 34).unwrap();
        let s17 = f.embed(&QuadSurd::from_ints(0, 1, 17).unwrap()).unwrap();
        let s34 = f.embed(&QuadSurd::from_ints(0, 1, 34).unwrap()).unwrap();
        assert_eq!(
            s17.mul(&s34).to_quadsurd().unwrap(),
            QuadSurd::from_ints(0, 17, 2).unwrap()
        );
        assert_eq!(s17.mul(&s17).to_quadsurd().unwrap(), QuadSurd::rational(qi(17)));
        let s2 = f.embed(&QuadSurd::from_ints(0, 1, 2).unwrap()).unwrap();
        assert_eq!(s2.mul(&s34).to_quadsurd().unwrap(), QuadSurd::from_ints(0, 2, 17).unwrap());
    }

    #[test]
    fn biquad_inverse() {
        let f = BiQuad::field(11, 17).unwrap();
        let z = f
            .from_rational(qi(3))
            .add(&f.embed(&QuadSurd::from_ints(0, 2, 11).unwrap()).unwrap())
            .add(&f.embed(&QuadSurd::from_ints(0, -1, 17).unwrap()).unwrap())
            .add(&f.embed(&QuadSurd::from_ints(0, 5, 187).unwrap()).unwrap());
        assert_eq!(z.mul(&z.inv().unwrap()), f.from_rational(qi(1)));
    }

    #[test]
    fn complex_layer() {
        let f = BiQuad::field(11, 17).unwrap();
        let one = CxBiQuad::real(f.from_rational(qi(1)));
        let z = CxBiQuad::new(f.from_rational(qi(1)), f.from_rational(qi(2)));
        assert!(z.mul(&z.inv().unwrap()).sub(&one).is_zero());
        let i = one.i_times();
        assert!(i.mul(&i).add(&one).is_zero());
    }

    #[test]
    fn surd_json_round_trip() {
        let s = QuadSurd::new(q(-1025, 1), qi(-252), 17).unwrap().inv().unwrap();
        let js = serde_json::to_string(&s).unwrap();
        let back: QuadSurd = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
