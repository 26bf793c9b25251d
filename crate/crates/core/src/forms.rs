//! Integral binary quadratic forms, CM points, and the exact matrix checks
//! behind the singular-value table.

use crate::series::{q, Q};
use crate::surd::{QuadSurd, SurdError};
use crate::Result;
use num_integer::Integer;
use serde::Serialize;

/// ax² + bxy + cy² with negative discriminant; names the CM point
/// τ(a,b,c) = (-b + √d)/(2a).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BQForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl BQForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        BQForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0 && self.discriminant() < 0
    }

    /// |b| ≤ a ≤ c with b ≥ 0 when |b| = a or a = c.
    pub fn is_reduced(&self) -> bool {
        let BQForm { a, b, c } = *self;
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    /// Classical reduction to the unique reduced representative.
    pub fn reduce(&self) -> BQForm {
        debug_assert!(self.is_positive_definite());
        let mut f = *self;
        loop {
            // normalize: -a < b <= a
            let a2 = 2 * f.a;
            let mut b = f.b % a2;
            if b > f.a {
                b -= a2;
            }
            if b <= -f.a {
                b += a2;
            }
            let c = (b * b - f.discriminant()) / (4 * f.a);
            f = BQForm { a: f.a, b, c };
            if f.a > f.c {
                f = BQForm { a: f.c, b: -f.b, c: f.a };
                continue;
            }
            if (f.a == f.c || f.b.abs() == f.a) && f.b < 0 {
                f = BQForm { a: f.a, b: -f.b, c: f.c };
            }
            break;
        }
        debug_assert!(f.is_reduced());
        debug_assert_eq!(f.discriminant(), self.discriminant());
        f
    }

    /// τ(a,b,c) = (-b + √d)/(2a) as an exact element of Q(√d).
    pub fn tau_exact(&self) -> Result<QuadSurd> {
        Ok(QuadSurd::new(q(-self.b, 2 * self.a), q(1, 2 * self.a), self.discriminant())
            .map_err(crate::Error::from)?)
    }

    /// τ numerically as (re, im) = (-b/2a, √|d|/2a).
    pub fn tau_numeric(&self, bits: u32) -> (crate::bigfloat::BigFloat, crate::bigfloat::BigFloat) {
        use crate::bigfloat::BigFloat;
        let re = BigFloat::from_q(&q(-self.b, 2 * self.a), bits);
        let im = BigFloat::from_i64(-self.discriminant(), bits)
            .sqrt()
            .div(&BigFloat::from_i64(2 * self.a, bits));
        (re, im)
    }
}

/// All primitive reduced forms of discriminant d < 0 (one per class).
pub fn reduced_forms(d: i64) -> Vec<BQForm> {
    debug_assert!(d < 0);
    let mut out = Vec::new();
    if d.rem_euclid(4) > 1 {
        return out;
    }
    let mut b = d.rem_euclid(2);
    while b * b <= -d / 3 {
        let rhs = (b * b - d) / 4;
        for a in b.max(1)..=rhs {
            if a * a > rhs {
                break;
            }
            if rhs % a != 0 {
                continue;
            }
            let c = rhs / a;
            for bb in [b, -b] {
                let f = BQForm { a, b: bb, c };
                if f.is_reduced() && f.is_primitive() && !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        b += 2;
    }
    out.sort_by_key(|f| (f.a, f.b, f.c));
    out
}

/// Class number h(d) for d < 0.
pub fn class_number(d: i64) -> usize {
    reduced_forms(d).len()
}

/// 2x2 integer matrix acting by Möbius transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GL2 {
    pub m: [[i64; 2]; 2],
}

impl GL2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        GL2 { m: [[a, b], [c, d]] }
    }

    pub fn det(&self) -> i64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn content(&self) -> i64 {
        self.m[0][0].gcd(&self.m[0][1]).gcd(&self.m[1][0]).gcd(&self.m[1][1])
    }

    /// Primitive with lower-left entry divisible by 17: membership in the
    /// degree-n level-17 matrix set.
    pub fn in_delta_star_17(&self) -> bool {
        self.m[1][0] % 17 == 0 && self.content() == 1
    }

    pub fn mul(&self, o: &GL2) -> GL2 {
        let a = &self.m;
        let b = &o.m;
        GL2 {
            m: [
                [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
                [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
            ],
        }
    }

    /// Möbius action on an exact quadratic irrationality.
    pub fn act(&self, tau: &QuadSurd) -> std::result::Result<QuadSurd, SurdError> {
        let [[a, b], [c, d]] = self.m;
        let bi = |v: i64| QuadSurd::rational(Q::from(num_bigint::BigInt::from(v)));
        let num = tau.scale(&Q::from(num_bigint::BigInt::from(a))).add(&bi(b))?;
        let den = tau.scale(&Q::from(num_bigint::BigInt::from(c))).add(&bi(d))?;
        num.div(&den)
    }
}

/// The Fricke involution τ ↦ -1/(17τ), exactly.
pub fn fricke_17(tau: &QuadSurd) -> std::result::Result<QuadSurd, SurdError> {
    tau.scale(&crate::series::qi(17)).inv().map(|t| t.neg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::qi;

    #[test]
    fn reduction_examples() {
        assert_eq!(BQForm::new(1, 0, 1).reduce(), BQForm::new(1, 0, 1));
        let f = BQForm::new(2, 2, 3).reduce();
        assert_eq!(f, BQForm::new(2, 2, 3));
        assert_eq!(f.discriminant(), -20);
        assert!(BQForm::new(17, 17, 25).is_reduced());
        assert_eq!(BQForm::new(17, 17, 25).discriminant(), -1411);
        let g = BQForm::new(17, -34, 19).reduce();
        assert!(g.is_reduced());
        assert_eq!(g.discriminant(), -136);
        assert_eq!(g, BQForm::new(2, 0, 17));
    }

    #[test]
    fn reduction_brute_force_oracle() {
        // the reduced form minimizes (a, |b|) over the class; explore the
        // class by S and T^{±1} moves and compare
        let f = BQForm::new(17, -17, 7);
        let r = f.reduce();
        let mut best = (i64::MAX, i64::MAX);
        let mut stack = vec![f];
        let mut seen = std::collections::HashSet::new();
        while let Some(g) = stack.pop() {
            if !seen.insert((g.a, g.b, g.c)) || seen.len() > 4000 {
                continue;
            }
            if g.a > 0 {
                best = best.min((g.a, g.b.abs()));
            }
            if g.a.abs() < 2000 && g.c.abs() < 2000 {
                stack.push(BQForm::new(g.a, g.b + 2 * g.a, g.a + g.b + g.c));
                stack.push(BQForm::new(g.a, g.b - 2 * g.a, g.a - g.b + g.c));
                stack.push(BQForm::new(g.c, -g.b, g.a));
            }
        }
        assert_eq!((r.a, r.b.abs()), best);
    }

    #[test]
    fn class_numbers() {
        assert_eq!(class_number(-3), 1);
        assert_eq!(class_number(-4), 1);
        assert_eq!(class_number(-23), 3);
        assert_eq!(class_number(-187), 2);
        assert_eq!(class_number(-136), 4);
    }

    #[test]
    fn tau_exact_examples() {
        // τ(17,-34,19) = 1 + i√34/17
        let t = BQForm::new(17, -34, 19).tau_exact().unwrap();
        assert_eq!(t.rational_part(), &qi(1));
        assert_eq!(t.surd_part(), &q(1, 17));
        assert_eq!(t.radicand(), -34);
        let i = BQForm::new(1, 0, 1).tau_exact().unwrap();
        assert_eq!(i.rational_part(), &qi(0));
        assert_eq!(i.radicand(), -1);
        // τ(17,-17,7) = (17 + i√187)/34
        let t = BQForm::new(17, -17, 7).tau_exact().unwrap();
        assert_eq!(t.rational_part(), &q(1, 2));
        assert_eq!(t.surd_part(), &q(1, 34));
        assert_eq!(t.radicand(), -187);
    }

    #[test]
    fn moebius_and_fricke_exact() {
        // (-1, 1; 17, -19) sends τ(17,-34,19) to -1/(17τ)
        let tau = BQForm::new(17, -34, 19).tau_exact().unwrap();
        let g = GL2::new(-1, 1, 17, -19);
        assert_eq!(g.det(), 2);
        assert!(g.in_delta_star_17());
        assert_eq!(g.act(&tau).unwrap(), fricke_17(&tau).unwrap());
    }
}
