//! Truncated Laurent–Puiseux series in q with exact rational coefficients.
//!
//! A [`QSeries`] carries its own truncation order: arithmetic never claims
//! precision beyond what its inputs support. Exponents are rationals with a
//! single shared denominator `denom` per series (the only fractional
//! exponents in this crate come from q^{1/4} theta series and q^{1/n}
//! rescaling, so `denom` stays tiny).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// Exact rational coefficient type used everywhere in the crate.
pub type Q = BigRational;

/// Convenience constructor for small rationals.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Convenience constructor for small integers as rationals.
pub fn qi(n: i64) -> Q {
    Q::from(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("truncation order must be positive (got {0})")]
    InvalidTruncation(i64),
    #[error("division by a series that is zero to its truncation order")]
    DivisionByZero,
    #[error("logarithmic derivative of a series that is zero to its truncation order")]
    LogOfZero,
    #[error("square root needs an even leading exponent (got q^({num}/{den}))")]
    OddLeadingExponent { num: i64, den: i64 },
    #[error("square root needs a square leading coefficient (got {0})")]
    NonSquareLeading(String),
    #[error("signed substitution requires integer exponents (denom 1, got {0})")]
    SignedRescaleDenom(i64),
    #[error("rescale factor must be positive")]
    NonPositiveRescale,
    #[error("series truncation {have} is below the requested order {want}")]
    InsufficientOrder { have: i64, want: i64 },
}

/// Truncated series Σ c_e q^{e/denom}, e = val .. trunc-1, known modulo
/// q^{trunc/denom}. `coeffs[i]` is the coefficient of q^{(val+i)/denom}.
///
/// The zero series (to its truncation order) is represented with
/// `val == trunc` and an empty coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    denom: i64,
    val: i64,
    trunc: i64,
    coeffs: Vec<Q>,
}

impl QSeries {
    /// The zero series known modulo q^trunc.
    pub fn zero(trunc: i64) -> Self {
        QSeries { denom: 1, val: trunc, trunc, coeffs: Vec::new() }
    }

    /// The constant series 1 + O(q^trunc).
    pub fn one(trunc: i64) -> Self {
        Self::monomial(Q::one(), 0, trunc)
    }

    /// c · q^exp + O(q^trunc) with integer exponent.
    pub fn monomial(c: Q, exp: i64, trunc: i64) -> Self {
        if c.is_zero() || exp >= trunc {
            return Self::zero(trunc);
        }
        let mut coeffs = vec![Q::zero(); (trunc - exp) as usize];
        coeffs[0] = c;
        QSeries { denom: 1, val: exp, trunc, coeffs }
    }

    /// Builds a series from integer-exponent (exponent, coefficient) pairs.
    pub fn from_terms(terms: &[(i64, Q)], trunc: i64) -> Self {
        let mut acc = Self::zero(trunc);
        for (e, c) in terms {
            acc = acc.add(&Self::monomial(c.clone(), *e, trunc));
        }
        acc
    }

    /// Raw constructor for callers that already hold a dense window.
    pub fn from_raw(denom: i64, val: i64, trunc: i64, coeffs: Vec<Q>) -> Self {
        debug_assert!(denom >= 1);
        debug_assert_eq!(coeffs.len(), (trunc - val).max(0) as usize);
        QSeries { denom, val, trunc, coeffs }.normalized()
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    /// Lowest stored exponent numerator (meaningful only when nonzero).
    pub fn val(&self) -> i64 {
        self.val
    }

    /// Exponent numerator bound: the series is known modulo q^{trunc/denom}.
    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    /// Truncation order as a rational exponent.
    pub fn trunc_order(&self) -> Q {
        q(self.trunc, self.denom)
    }

    /// Coefficient of q^{e/denom}.
    pub fn coeff(&self, e: i64) -> Q {
        let i = e - self.val;
        if i >= 0 && (i as usize) < self.coeffs.len() {
            self.coeffs[i as usize].clone()
        } else {
            Q::zero()
        }
    }

    /// Coefficient of the integer power q^n (must have denom dividing n·denom).
    pub fn coeff_int(&self, n: i64) -> Q {
        self.coeff(n * self.denom)
    }

    /// Exponent numerator of the first nonzero coefficient, or None if the
    /// series vanishes identically to its truncation order.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.val + i as i64)
    }

    /// Valuation as a rational exponent.
    pub fn valuation_order(&self) -> Option<Q> {
        self.valuation().map(|v| q(v, self.denom))
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    fn normalized(mut self) -> Self {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => {
                self.coeffs.clear();
                self.val = self.trunc;
            }
            Some(k) if k > 0 => {
                self.coeffs.drain(..k);
                self.val += k as i64;
            }
            _ => {}
        }
        // reduce the shared exponent denominator by the gcd of all nonzero
        // exponents; the truncation boundary floors (knowledge modulo
        // q^{7/2} implies knowledge modulo q^3)
        if self.denom > 1 {
            if self.coeffs.is_empty() {
                self.trunc = self.trunc.div_euclid(self.denom);
                self.val = self.trunc;
                self.denom = 1;
                return self;
            }
            let mut g = self.denom.gcd(&self.val);
            for (i, c) in self.coeffs.iter().enumerate() {
                if g == 1 {
                    break;
                }
                if !c.is_zero() {
                    g = g.gcd(&(self.val + i as i64));
                }
            }
            if g > 1 {
                let new_trunc = self.trunc.div_euclid(g);
                let val = self.val;
                let mut out = Vec::with_capacity(self.coeffs.len() / g as usize + 1);
                for (i, c) in std::mem::take(&mut self.coeffs).into_iter().enumerate() {
                    let e = val + i as i64;
                    if e % g == 0 && e / g < new_trunc {
                        out.push(c);
                    } else {
                        debug_assert!(c.is_zero() || e / g >= new_trunc);
                    }
                }
                self.denom /= g;
                self.val /= g;
                self.trunc = new_trunc;
                self.coeffs = out;
                self.coeffs.resize((self.trunc - self.val).max(0) as usize, Q::zero());
            }
        }
        self
    }

    /// Rewrites both series over the least common exponent denominator.
    fn unify(&self, other: &Self) -> (Self, Self) {
        if self.denom == other.denom {
            return (self.clone(), other.clone());
        }
        let l = self.denom.lcm(&other.denom);
        (self.stretch(l / self.denom), other.stretch(l / other.denom))
    }

    fn stretch(&self, k: i64) -> Self {
        if k == 1 {
            return self.clone();
        }
        let mut coeffs = vec![Q::zero(); self.coeffs.len().saturating_sub(1) * k as usize + usize::from(!self.coeffs.is_empty())];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k as usize] = c.clone();
        }
        QSeries { denom: self.denom * k, val: self.val * k, trunc: self.trunc * k, coeffs }
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = -std::mem::take(c);
        }
        out
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return Self::zero(self.trunc).stretchy_zero(self.denom);
        }
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = std::mem::take(c) * k;
        }
        out
    }

    fn stretchy_zero(mut self, denom: i64) -> Self {
        self.denom = denom;
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let (f, g) = self.unify(other);
        let t = f.trunc.min(g.trunc);
        let v = f.effective_val(t).min(g.effective_val(t));
        let mut coeffs = vec![Q::zero(); (t - v).max(0) as usize];
        for (i, c) in f.coeffs.iter().enumerate() {
            let e = f.val + i as i64;
            if e < t {
                coeffs[(e - v) as usize] += c;
            }
        }
        for (i, c) in g.coeffs.iter().enumerate() {
            let e = g.val + i as i64;
            if e < t {
                coeffs[(e - v) as usize] += c;
            }
        }
        QSeries { denom: f.denom, val: v, trunc: t, coeffs }.normalized()
    }

    fn effective_val(&self, t: i64) -> i64 {
        if self.coeffs.is_empty() {
            t
        } else {
            self.val.min(t)
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Product; the result is known modulo min(t_f + v_g, t_g + v_f).
    pub fn mul(&self, other: &Self) -> Self {
        let (f, g) = self.unify(other);
        if f.is_zero() || g.is_zero() {
            // a factor that vanishes to order t kills everything below t + other's val
            let t = (f.trunc + g.effective_val(g.trunc)).min(g.trunc + f.effective_val(f.trunc));
            return QSeries { denom: f.denom, val: t, trunc: t, coeffs: Vec::new() };
        }
        let t = (f.trunc + g.val).min(g.trunc + f.val);
        let v = f.val + g.val;
        let n = (t - v) as usize;
        // convolve over a common integer denominator: one gcd per output
        // coefficient instead of one per partial product
        let fd = lcm_denoms(&f.coeffs);
        let gd = lcm_denoms(&g.coeffs);
        let fi = scaled_ints(&f.coeffs, &fd);
        let gi = scaled_ints(&g.coeffs, &gd);
        let mut acc = vec![BigInt::zero(); n];
        for (i, a) in fi.iter().enumerate() {
            if a.is_zero() || i >= n {
                continue;
            }
            let jmax = (n - i).min(gi.len());
            for (j, b) in gi[..jmax].iter().enumerate() {
                if !b.is_zero() {
                    acc[i + j] += a * b;
                }
            }
        }
        let den = fd * gd;
        let coeffs = acc.into_iter().map(|x| Q::new(x, den.clone())).collect();
        QSeries { denom: f.denom, val: v, trunc: t, coeffs }.normalized()
    }

    /// Multiplicative inverse by leading-term recursion. The inverse of
    /// q^v·u is q^{-v}·u^{-1}, known modulo q^{trunc - 2v}.
    pub fn inv(&self) -> Result<Self, SeriesError> {
        let f = self.clone().normalized();
        if f.is_zero() {
            return Err(SeriesError::DivisionByZero);
        }
        let n = (f.trunc - f.val) as usize;
        let a = &f.coeffs;
        let mut b = vec![Q::zero(); n];
        let lead = a[0].recip();
        b[0] = lead.clone();
        for k in 1..n {
            let mut s = Q::zero();
            for j in 1..=k.min(a.len() - 1) {
                if !a[j].is_zero() && !b[k - j].is_zero() {
                    s += &a[j] * &b[k - j];
                }
            }
            b[k] = -s * &lead;
        }
        Ok(QSeries { denom: f.denom, val: -f.val, trunc: f.trunc - 2 * f.val, coeffs: b }.normalized())
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        Ok(self.mul(&other.inv()?))
    }

    /// Integer power (negative allowed when invertible).
    pub fn pow(&self, n: i64) -> Result<Self, SeriesError> {
        if n == 0 {
            return Ok(Self::one(self.trunc).stretchy_zero_like(self));
        }
        let (base, e) = if n < 0 { (self.inv()?, (-n) as u64) } else { (self.clone(), n as u64) };
        let mut result: Option<QSeries> = None;
        let mut sq = base;
        let mut e = e;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => sq.clone(),
                    Some(r) => r.mul(&sq),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            sq = sq.mul(&sq);
        }
        Ok(result.unwrap())
    }

    fn stretchy_zero_like(mut self, other: &Self) -> Self {
        // q^0 truncation bookkeeping for pow(0): keep the caller's order
        self.trunc = other.trunc / other.denom.max(1);
        if self.coeffs.len() as i64 > self.trunc {
            self.coeffs.truncate(self.trunc.max(0) as usize);
        } else {
            self.coeffs.resize(self.trunc.max(0) as usize, Q::zero());
        }
        if !self.coeffs.is_empty() {
            self.coeffs[0] = Q::one();
        }
        self
    }

    /// q d/dq applied termwise: c q^{e/D} ↦ c·(e/D) q^{e/D}.
    pub fn theta_q(&self) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if !c.is_zero() {
                *c = std::mem::take(c) * q(self.val + i as i64, self.denom);
            }
        }
        out.normalized()
    }

    /// θ_q log f = (θ_q f)/f; exact, with constant term val/denom.
    pub fn theta_q_log(&self) -> Result<Self, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::LogOfZero);
        }
        self.theta_q().div(self)
    }

    /// Square root with positive leading coefficient unless `negative_branch`.
    pub fn sqrt(&self, negative_branch: bool) -> Result<Self, SeriesError> {
        let f = self.clone().normalized();
        if f.is_zero() {
            return Ok(f);
        }
        if f.val % 2 != 0 {
            return Err(SeriesError::OddLeadingExponent { num: f.val, den: f.denom });
        }
        let lead = &f.coeffs[0];
        let root = rational_sqrt(lead)
            .ok_or_else(|| SeriesError::NonSquareLeading(lead.to_string()))?;
        let b0 = if negative_branch { -root } else { root };
        let n = (f.trunc - f.val) as usize;
        let mut b = vec![Q::zero(); n];
        b[0] = b0.clone();
        let twice = qi(2) * &b0;
        for k in 1..n {
            let mut s = Q::zero();
            for i in 1..k {
                if !b[i].is_zero() && !b[k - i].is_zero() {
                    s += &b[i] * &b[k - i];
                }
            }
            b[k] = (f.coeffs.get(k).cloned().unwrap_or_else(Q::zero) - s) / &twice;
        }
        // sqrt(q^{2m} u) = q^m sqrt(u), known modulo q^{t - m}
        Ok(QSeries { denom: f.denom, val: f.val / 2, trunc: f.trunc - f.val / 2, coeffs: b }.normalized())
    }

    /// Substitutes q ↦ q^k for a positive rational k, exactly.
    pub fn rescale(&self, k: &Q) -> Result<Self, SeriesError> {
        if !k.is_positive() {
            return Err(SeriesError::NonPositiveRescale);
        }
        self.rescale_signed(k, false)
    }

    /// Substitutes q ↦ -q^k (for `negate`); requires integer exponents so
    /// (-1)^e is well defined. Used for branches like x((τ+1)/2).
    pub fn rescale_signed(&self, k: &Q, negate: bool) -> Result<Self, SeriesError> {
        if negate && self.denom != 1 {
            return Err(SeriesError::SignedRescaleDenom(self.denom));
        }
        let a = k.numer().to_string().parse::<i64>().map_err(|_| SeriesError::NonPositiveRescale)?;
        let b = k.denom().to_string().parse::<i64>().map_err(|_| SeriesError::NonPositiveRescale)?;
        if a <= 0 || b <= 0 {
            return Err(SeriesError::NonPositiveRescale);
        }
        // exponent e/D ↦ e·a/(D·b)
        let mut out_coeffs = vec![Q::zero(); self.coeffs.len().saturating_sub(1) * a as usize + usize::from(!self.coeffs.is_empty())];
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = self.val + i as i64;
            let sign = negate && e % 2 != 0;
            out_coeffs[i * a as usize] = if sign { -c.clone() } else { c.clone() };
        }
        Ok(QSeries {
            denom: self.denom * b,
            val: self.val * a,
            trunc: self.trunc * a,
            coeffs: out_coeffs,
        }
        .normalized())
    }

    /// Keeps every coefficient whose integer exponent is divisible by m and
    /// divides the exponent by m: Σ c_{mj} q^j. Requires integer exponents.
    pub fn sift(&self, m: i64) -> Result<Self, SeriesError> {
        if self.denom != 1 {
            return Err(SeriesError::SignedRescaleDenom(self.denom));
        }
        debug_assert!(m >= 1);
        let first = num_integer::Integer::div_ceil(&self.val, &m);
        let t = num_integer::Integer::div_ceil(&self.trunc, &m);
        let mut coeffs = vec![Q::zero(); (t - first).max(0) as usize];
        for j in first..t {
            coeffs[(j - first) as usize] = self.coeff(j * m);
        }
        QSeries { denom: 1, val: first, trunc: t, coeffs }.normalize_ok()
    }

    fn normalize_ok(self) -> Result<Self, SeriesError> {
        Ok(self.normalized())
    }

    /// Restricts to a lower truncation order (integer exponent units).
    pub fn truncated(&self, trunc: i64) -> Self {
        let t = trunc * self.denom;
        if t >= self.trunc {
            return self.clone();
        }
        let mut out = self.clone();
        out.trunc = t;
        let keep = (t - out.val).max(0) as usize;
        out.coeffs.truncate(keep);
        out.normalized()
    }

    /// Errors unless the series is known at least modulo q^want.
    pub fn require_order(&self, want: i64) -> Result<(), SeriesError> {
        if self.trunc < want * self.denom {
            return Err(SeriesError::InsufficientOrder { have: self.trunc / self.denom, want });
        }
        Ok(())
    }

    /// Iterator over (exponent numerator, coefficient) of nonzero terms.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Q)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.val + i as i64, c))
    }
}

fn lcm_denoms(cs: &[Q]) -> BigInt {
    let mut l = BigInt::one();
    for c in cs {
        if !c.is_zero() {
            l = l.lcm(c.denom());
        }
    }
    l
}

fn scaled_ints(cs: &[Q], l: &BigInt) -> Vec<BigInt> {
    cs.iter().map(|c| c.numer() * (l / c.denom())).collect()
}

fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

/// ∏_{n ≥ 1, n mod m ∈ offsets} (1 - q^n)^{sign}, truncated. An offset equal
/// to m selects the multiples of m. Building block for every eta-type and
/// (a;q^m)_∞ product in the crate.
pub fn pochhammer_block(offsets: &[i64], modulus: i64, sign: i32, trunc: i64) -> Result<QSeries, SeriesError> {
    if trunc <= 0 {
        return Err(SeriesError::InvalidTruncation(trunc));
    }
    debug_assert!(modulus >= 1);
    let offs: Vec<bool> = {
        let mut v = vec![false; modulus as usize];
        for &o in offsets {
            v[(o % modulus) as usize] = true;
        }
        v
    };
    let n = trunc as usize;
    let mut c = vec![BigInt::zero(); n];
    c[0] = BigInt::one();
    for k in 1..n {
        if !offs[k % modulus as usize] {
            continue;
        }
        if sign >= 0 {
            // multiply by (1 - q^k)
            for e in (0..n - k).rev() {
                if !c[e].is_zero() {
                    let t = c[e].clone();
                    c[e + k] -= t;
                }
            }
        } else {
            // multiply by 1/(1 - q^k) = Σ q^{jk}
            for e in 0..n - k {
                if !c[e].is_zero() {
                    let t = c[e].clone();
                    c[e + k] += t;
                }
            }
        }
    }
    Ok(QSeries { denom: 1, val: 0, trunc, coeffs: c.into_iter().map(Q::from).collect() }.normalized())
}

/// An eta-quotient shape q^{qshift} ∏ (q^m; q^m)_∞^e, kept as data so CLI
/// output can describe the products it expands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaQuotientSpec {
    /// (m, e) meaning (q^m; q^m)_∞^e.
    pub factors: Vec<(i64, i32)>,
    /// Leading exponent; denominator divides 24·lcm(m).
    pub qshift: (i64, i64),
}

impl EtaQuotientSpec {
    pub fn expand(&self, trunc: i64) -> Result<QSeries, SeriesError> {
        let mut acc = QSeries::one(trunc);
        for &(m, e) in &self.factors {
            let block = pochhammer_block(&[m], m, 1, trunc)?;
            acc = acc.mul(&block.pow(e as i64)?);
        }
        let (sn, sd) = self.qshift;
        let shift = q(sn, sd);
        if shift.is_zero() {
            return Ok(acc);
        }
        // multiply by q^{sn/sd}: stretch then slide the exponent window
        let stretched = acc.stretch(sd.try_into().unwrap_or(1));
        let num = sn;
        Ok(QSeries {
            denom: stretched.denom,
            val: stretched.val + num,
            trunc: stretched.trunc + num,
            coeffs: stretched.coeffs,
        }
        .normalized())
    }
}

/// The lattice sum Σ_{m,n} ((-1)^m - (-1)^n) q^{(n² + 17m²)/4} with the
/// cutoff |m|,|n| ≤ ceil(2√trunc)+1; omitted terms cannot touch exponents
/// below trunc.
pub fn theta_lattice_17(trunc: i64) -> QSeries {
    let t4 = 4 * trunc;
    let cut = ((4 * trunc) as f64).sqrt() as i64 + 2;
    let mut map = std::collections::BTreeMap::<i64, i64>::new();
    for m in -cut..=cut {
        for n in -cut..=cut {
            let c = (if m % 2 == 0 { 1 } else { -1 }) - (if n % 2 == 0 { 1 } else { -1 });
            if c == 0 {
                continue;
            }
            let e = n * n + 17 * m * m;
            if e < t4 {
                *map.entry(e).or_insert(0) += c;
            }
        }
    }
    let val = *map.keys().next().unwrap_or(&t4);
    let mut coeffs = vec![Q::zero(); (t4 - val) as usize];
    for (e, c) in map {
        coeffs[(e - val) as usize] = qi(c);
    }
    QSeries { denom: 4, val, trunc: t4, coeffs }.normalized()
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms().take(24) {
            if first {
                first = false;
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            let show_coeff = !a.is_one() || e == 0;
            if show_coeff {
                write!(f, "{a}")?;
            }
            if e != 0 {
                if show_coeff {
                    write!(f, "*")?;
                }
                if self.denom == 1 {
                    if e == 1 {
                        write!(f, "q")?;
                    } else {
                        write!(f, "q^{e}")?;
                    }
                } else {
                    write!(f, "q^({}/{})", e, self.denom)?;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        if self.denom == 1 {
            write!(f, " + O(q^{})", self.trunc)
        } else {
            write!(f, " + O(q^({}/{}))", self.trunc, self.denom)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct QSeriesWire {
    denom: i64,
    val: i64,
    trunc: i64,
    coeffs: Vec<String>,
}

impl Serialize for QSeries {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QSeriesWire {
            denom: self.denom,
            val: self.val,
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = QSeriesWire::deserialize(d)?;
        if w.denom < 1 {
            return Err(D::Error::custom("denom must be >= 1"));
        }
        if w.coeffs.len() as i64 != (w.trunc - w.val).max(0) {
            return Err(D::Error::custom("coeffs length must equal trunc - val"));
        }
        let coeffs = w
            .coeffs
            .iter()
            .map(|s| Q::from_str(s).map_err(|e| D::Error::custom(format!("bad rational {s:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QSeries { denom: w.denom, val: w.val, trunc: w.trunc, coeffs }.normalized())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(trunc: i64) -> QSeries {
        QSeries::from_terms(
            &(0..trunc).map(|e| (e, Q::one())).collect::<Vec<_>>(),
            trunc,
        )
    }

    #[test]
    fn euler_product_matches_brute_multiplication() {
        // (q;q)_∞ truncated: multiply twelve factors by hand
        let mut brute = QSeries::one(13);
        for n in 1..13 {
            brute = brute.mul(&QSeries::from_terms(&[(0, qi(1)), (n, qi(-1))], 13));
        }
        let block = pochhammer_block(&[1], 1, 1, 13).unwrap();
        assert_eq!(block, brute);
        // 1 - q - q^2 + q^5 + q^7 - q^12
        for (e, c) in [(0, 1), (1, -1), (2, -1), (5, 1), (7, 1), (12, -1)] {
            assert_eq!(block.coeff(e), qi(c), "coefficient of q^{e}");
        }
        assert_eq!(block.coeff(3), qi(0));
    }

    #[test]
    fn euler_product_matches_pentagonal_series_to_100() {
        let block = pochhammer_block(&[1], 1, 1, 100).unwrap();
        let mut expect = QSeries::zero(100);
        let mut k = -20i64;
        while k <= 20 {
            if k != 0 {
                let e = k * (3 * k - 1) / 2;
                if (0..100).contains(&e) {
                    let sign = if k % 2 == 0 { 1 } else { -1 };
                    expect = expect.add(&QSeries::monomial(qi(sign), e, 100));
                }
            }
            k += 1;
        }
        expect = expect.add(&QSeries::one(100));
        assert!(block.sub(&expect).is_zero());
    }

    #[test]
    fn empty_offsets_give_one() {
        let p = pochhammer_block(&[], 6, 1, 20).unwrap();
        assert_eq!(p, QSeries::one(20));
    }

    #[test]
    fn pochhammer_rejects_bad_truncation() {
        assert!(matches!(
            pochhammer_block(&[1], 1, 1, 0),
            Err(SeriesError::InvalidTruncation(0))
        ));
    }

    #[test]
    fn geometric_inverse() {
        // (1-q) * (1+q+q^2+...) = 1
        let f = QSeries::from_terms(&[(0, qi(1)), (1, qi(-1))], 40);
        let p = f.mul(&geometric(40));
        assert!(p.sub(&QSeries::one(40)).is_zero());
        assert!(f.inv().unwrap().sub(&geometric(38)).truncated(38).is_zero());
    }

    #[test]
    fn division_by_zero_series_fails() {
        let z = QSeries::zero(10);
        assert!(matches!(QSeries::one(10).div(&z), Err(SeriesError::DivisionByZero)));
    }

    #[test]
    fn theta_q_log_power_rule() {
        // θ_q log q^2 = 2
        let f = QSeries::monomial(qi(5), 2, 30);
        let t = f.theta_q_log().unwrap();
        assert!(t.sub(&QSeries::monomial(qi(2), 0, 20)).is_zero());
    }

    #[test]
    fn theta_q_log_of_one_minus_q() {
        // θ_q log(1-q) = -q/(1-q) = -q - q^2 - q^3 - ...
        let f = QSeries::from_terms(&[(0, qi(1)), (1, qi(-1))], 30);
        let t = f.theta_q_log().unwrap();
        let expect = geometric(29).mul(&QSeries::monomial(qi(-1), 1, 30));
        assert!(t.sub(&expect).truncated(28).is_zero());
    }

    #[test]
    fn sqrt_of_perfect_square() {
        let f = QSeries::from_terms(&[(0, qi(1)), (1, qi(2)), (2, qi(1))], 30);
        let r = f.sqrt(false).unwrap();
        assert!(r.sub(&QSeries::from_terms(&[(0, qi(1)), (1, qi(1))], 30)).is_zero());
    }

    #[test]
    fn sqrt_of_one_minus_4q_is_binomial_series() {
        let f = QSeries::from_terms(&[(0, qi(1)), (1, qi(-4))], 24);
        let r = f.sqrt(false).unwrap();
        // oracle: (1-4q)^{1/2} coefficients binom(1/2,n)(-4)^n computed by
        // the multiplicative recurrence, independently of the sqrt routine
        let mut c = Q::one();
        for n in 0..24i64 {
            assert_eq!(r.coeff(n), c, "coefficient of q^{n}");
            let half = q(1, 2) - qi(n);
            c = c * half / qi(n + 1) * qi(-4);
        }
        // spot-check the Catalan pattern: c_n = -2·Cat(n-1)
        assert_eq!(r.coeff(1), qi(-2));
        assert_eq!(r.coeff(2), qi(-2));
        assert_eq!(r.coeff(3), qi(-4));
        assert_eq!(r.coeff(4), qi(-10));
    }

    #[test]
    fn sqrt_branch_and_errors() {
        let f = QSeries::from_terms(&[(0, qi(1)), (1, qi(2)), (2, qi(1))], 10);
        let r = f.sqrt(true).unwrap();
        assert_eq!(r.coeff(0), qi(-1));
        let odd = QSeries::monomial(qi(1), 1, 10);
        assert!(matches!(odd.sqrt(false), Err(SeriesError::OddLeadingExponent { .. })));
        let nonsq = QSeries::monomial(qi(2), 0, 10);
        assert!(matches!(nonsq.sqrt(false), Err(SeriesError::NonSquareLeading(_))));
    }

    #[test]
    fn rescale_examples() {
        let f = QSeries::from_terms(&[(1, qi(1)), (2, qi(1))], 10);
        let r2 = f.rescale(&qi(2)).unwrap();
        assert_eq!(r2.coeff_int(2), qi(1));
        assert_eq!(r2.coeff_int(4), qi(1));
        assert_eq!(r2.trunc() / r2.denom(), 20);
        let rh = f.rescale(&q(1, 2)).unwrap();
        assert_eq!(rh.denom(), 2);
        assert_eq!(rh.coeff(1), qi(1)); // q^{1/2}
        // signed: q -> -q^{1/2}
        let rs = f.rescale_signed(&q(1, 2), true).unwrap();
        assert_eq!(rs.coeff(1), qi(-1));
        assert_eq!(rs.coeff(2), qi(1));
    }

    #[test]
    fn sift_picks_residues() {
        let f = QSeries::from_terms(&[(-2, qi(7)), (0, qi(1)), (3, qi(4)), (4, qi(5))], 9);
        let s = f.sift(2).unwrap();
        assert_eq!(s.coeff(-1), qi(7));
        assert_eq!(s.coeff(0), qi(1));
        assert_eq!(s.coeff(2), qi(5));
        assert!(s.coeff(1).is_zero());
    }

    #[test]
    fn truncation_tracks_minimum() {
        let f = QSeries::one(10);
        let g = QSeries::one(5);
        assert_eq!(f.add(&g).trunc(), 5);
        assert_eq!(f.mul(&g).trunc(), 5);
    }

    #[test]
    fn denominator_reduces_after_normalization() {
        let f = QSeries::from_terms(&[(1, qi(1))], 6).rescale(&q(2, 4)).unwrap();
        assert_eq!(f.denom(), 2);
        let g = f.mul(&f);
        assert_eq!(g.denom(), 1, "q^{{1/2}}·q^{{1/2}} has integer exponents");
    }

    #[test]
    fn json_round_trip_matches_schema() {
        let f = QSeries::from_terms(&[(1, q(1, 3)), (2, qi(-7))], 4)
            .rescale(&q(1, 2))
            .unwrap();
        let js = serde_json::to_value(&f).unwrap();
        assert_eq!(js["denom"], 2);
        assert!(js["coeffs"].as_array().unwrap().iter().all(|c| c.is_string()));
        let back: QSeries = serde_json::from_value(js).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn eta_quotient_spec_expands() {
        // q^{2} (q^17;q^17)^3 (q;q)^{-3} is the s-shape
        let spec = EtaQuotientSpec { factors: vec![(17, 3), (1, -3)], qshift: (2, 1) };
        let s = spec.expand(12).unwrap();
        assert_eq!(s.valuation(), Some(2));
        assert_eq!(s.coeff(2), qi(1));
        assert_eq!(s.coeff(3), qi(3));
        assert_eq!(s.coeff(4), qi(9));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_series(max_terms: usize) -> impl Strategy<Value = QSeries> {
            proptest::collection::vec(-6i64..=6, 1..max_terms).prop_map(|cs| {
                let t = cs.len() as i64 + 1;
                let mut f = QSeries::monomial(qi(1), 0, t);
                for (i, c) in cs.into_iter().enumerate() {
                    f = f.add(&QSeries::monomial(qi(c), i as i64 + 1, t));
                }
                f
            })
        }

        proptest! {
            #[test]
            fn theta_q_log_is_additive(f in small_series(8), g in small_series(8)) {
                let lhs = f.mul(&g).theta_q_log().unwrap();
                let rhs = f.theta_q_log().unwrap().add(&g.theta_q_log().unwrap());
                prop_assert!(lhs.sub(&rhs).is_zero());
            }

            #[test]
            fn sqrt_squares_back(f in small_series(8)) {
                let sq = f.mul(&f);
                let r = sq.sqrt(false).unwrap();
                prop_assert!(r.mul(&r).sub(&sq).is_zero());
            }

            #[test]
            fn mul_then_div_round_trips(f in small_series(6), g in small_series(6)) {
                let h = f.mul(&g).div(&g).unwrap();
                let d = h.sub(&f);
                prop_assert!(d.is_zero());
            }

            #[test]
            fn json_round_trip(f in small_series(6)) {
                let s = serde_json::to_string(&f).unwrap();
                let back: QSeries = serde_json::from_str(&s).unwrap();
                prop_assert_eq!(back, f);
            }
        }
    }
}
