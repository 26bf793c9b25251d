//! The holonomic coefficient sequence A_n of the series z = Σ A_n x^n, its
//! radius of convergence, and the independent cross-checks: solving the
//! composition coefficientwise, and the level-5 closed form a(n).

use crate::catalog::{IdentityReport, ModularCatalog};
use crate::series::{q, qi, QSeries, Q};
use crate::Result;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffSource {
    /// Six-term recurrence with polynomial coefficients.
    Recurrence,
    /// Closed-form binomial sum (level-5 sequence a(n)).
    ClosedForm,
    /// Solved coefficientwise from z = Σ A_n x^n.
    Composition,
}

/// Exact coefficient sequence with provenance. Values are rationals; every
/// observed value is integral, which is reported but never assumed.
#[derive(Debug, Clone, Serialize)]
pub struct CoeffSequence {
    pub source: CoeffSource,
    #[serde(serialize_with = "crate::recurrence::serialize_q_slice")]
    pub values: Vec<Q>,
}

pub(crate) fn serialize_q_slice<S: serde::Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

impl CoeffSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every entry has denominator 1.
    pub fn all_integral(&self) -> bool {
        self.values.iter().all(|v| v.denom().is_one())
    }
}

fn p3(a: i64, b: i64, c: i64, d: i64, n: i64) -> BigInt {
    let n = BigInt::from(n);
    let nn = &n * &n;
    let nnn = &nn * &n;
    BigInt::from(a) * nnn + BigInt::from(b) * nn + BigInt::from(c) * n + BigInt::from(d)
}

/// A_0 .. A_n from the recurrence
///   0 = (n+1)^3 A_{n+1} + (-19n^3-24n^2-14n-3) A_n
///       - 3(5n^3+27n^2-8n+4) A_{n-1} + (101n^3-300n^2+213n-52) A_{n-2}
///       - 3(55n^3-267n^2+491n-305) A_{n-3} + 3(n-3)(101n^2-297n+253) A_{n-4}
///       - 9(n-4)(n-3)(37n-66) A_{n-5} + 127(n-5)(n-4)(n-3) A_{n-6}
/// with A_0 = 2 and A_{-1..-6} = 0.
pub fn gen_a(count: usize) -> CoeffSequence {
    let mut values: Vec<Q> = Vec::with_capacity(count + 1);
    values.push(qi(2));
    let get = |values: &[Q], i: i64| -> Q {
        if i >= 0 {
            values[i as usize].clone()
        } else {
            Q::zero()
        }
    };
    for n in 0..count as i64 {
        let mut s = Q::zero();
        s += get(&values, n) * Q::from(p3(-19, -24, -14, -3, n));
        s += get(&values, n - 1) * Q::from(-3 * p3(5, 27, -8, 4, n));
        s += get(&values, n - 2) * Q::from(p3(101, -300, 213, -52, n));
        s += get(&values, n - 3) * Q::from(-3 * p3(55, -267, 491, -305, n));
        s += get(&values, n - 4) * Q::from(BigInt::from(3 * (n - 3)) * p3(0, 101, -297, 253, n));
        s += get(&values, n - 5) * Q::from(BigInt::from(-9 * (n - 4) * (n - 3)) * BigInt::from(37 * n - 66));
        s += get(&values, n - 6) * Q::from(BigInt::from(127 * (n - 5) * (n - 4)) * BigInt::from(n - 3));
        let cube = BigInt::from(n + 1).pow(3);
        values.push(-s / Q::from(cube));
    }
    CoeffSequence { source: CoeffSource::Recurrence, values }
}

/// Solves z = Σ A_n x^n coefficientwise: x has valuation 1 with leading
/// coefficient 1/2, so the system is triangular. Independent of the
/// recurrence; used as its acceptance oracle.
pub fn solve_a_by_composition(cat: &ModularCatalog, count: usize) -> Result<CoeffSequence> {
    let t = count as i64 + 2;
    let z = cat.series("z", t)?;
    let x = cat.series("x", t)?;
    let mut residual = z;
    let mut xpow = QSeries::one(t);
    let mut values = Vec::with_capacity(count + 1);
    for n in 0..=count as i64 {
        let lead = xpow.coeff_int(n);
        let a = residual.coeff_int(n) / lead;
        residual = residual.sub(&xpow.scale(&a));
        values.push(a);
        if n < count as i64 {
            xpow = xpow.mul(&x);
        }
    }
    Ok(CoeffSequence { source: CoeffSource::Composition, values })
}

/// Checks z - Σ_{n ≤ order} A_n x^n = O(q^order); x has valuation 1, so the
/// discarded tail cannot reach below q^order.
pub fn verify_composition(cat: &ModularCatalog, order: i64) -> Result<IdentityReport> {
    let t = order + 2;
    let z = cat.series("z", t)?;
    let x = cat.series("x", t)?;
    let a = gen_a(order as usize);
    // Horner from the top: (((A_N x + A_{N-1}) x + ...) x + A_0)
    let mut acc = QSeries::monomial(a.values[order as usize].clone(), 0, t);
    for n in (0..order as usize).rev() {
        acc = acc.mul(&x).add(&QSeries::monomial(a.values[n].clone(), 0, t));
    }
    let residual = z.sub(&acc).truncated(order);
    let val = residual.valuation_order().map(|v| v.to_string());
    Ok(IdentityReport {
        name: "z-composition".into(),
        claim: "z = sum_n A_n x^n (A_n from the six-term recurrence)".into(),
        requested_order: order,
        checked_order: residual.trunc() / residual.denom(),
        pass: val.is_none(),
        residual_valuation: val,
    })
}

/// The convergence-radius polynomial 127x^4 + 48x^3 + 66x^2 + 16x - 1.
pub fn radius_polynomial() -> [i64; 5] {
    [-1, 16, 66, 48, 127]
}

pub fn radius_polynomial_eval(x: &Q) -> Q {
    let c = radius_polynomial();
    let mut acc = Q::zero();
    for k in (0..c.len()).rev() {
        acc = acc * x + qi(c[k]);
    }
    acc
}

/// The positive real root of the radius polynomial, by bisection in exact
/// rational arithmetic, to within 10^-digits.
pub fn radius(digits: u32) -> Q {
    let mut lo = Q::zero(); // p(0) = -1 < 0
    let mut hi = q(6, 100); // p(0.06) > 0
    debug_assert!(radius_polynomial_eval(&hi).is_positive());
    let eps = Q::new(BigInt::one(), BigInt::from(10u32).pow(digits));
    while &hi - &lo > eps {
        let mid = (&lo + &hi) / qi(2);
        if radius_polynomial_eval(&mid).is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / qi(2)
}

fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Level-5 closed form a(n) = C(2n,n) Σ_j C(n,j)^2 C(n+j,j).
pub fn level5_a(count: usize) -> CoeffSequence {
    let values = (0..=count as i64)
        .map(|n| {
            let mut s = BigInt::zero();
            for j in 0..=n {
                let b = binomial(n, j);
                s += &b * &b * binomial(n + j, j);
            }
            Q::from(binomial(2 * n, n) * s)
        })
        .collect();
    CoeffSequence { source: CoeffSource::ClosedForm, values }
}
