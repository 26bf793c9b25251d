//! Singular values of x at CM points: high-precision evaluation, exact
//! certification of the eleven tabulated values, the matrix table behind
//! their modular-equation degrees, and per-discriminant scans.

use crate::bigfloat::{bits_for_digits, exp_2pi_i_tau, BigFloat, Complex, NumericError};
use crate::catalog::ModularCatalog;
use crate::forms::{fricke_17, reduced_forms, BQForm, GL2};
use crate::modeq::{diagonal, eval_poly_surd};
use crate::recurrence::radius;
use crate::series::{q, QSeries};
use crate::surd::QuadSurd;
use crate::Result;
use num_traits::Zero;
use serde::Serialize;

/// Result of a numeric x(τ) evaluation.
#[derive(Debug, Clone)]
pub struct EvalX {
    pub value: Complex,
    /// Heuristic bound on the series truncation error (the certified
    /// comparisons are anchored by exact algebraic checks, not this bound).
    pub tail_bound: f64,
    pub trunc_used: i64,
    /// True when z(q) ≈ 0 forced the derivative-ratio fallback (elliptic
    /// points, where x is a removable 0/0).
    pub elliptic_fallback: bool,
}

fn eval_qseries(f: &QSeries, qv: &Complex) -> Complex {
    debug_assert_eq!(f.denom(), 1);
    let bits = qv.bits();
    // Horner on the dense window, then multiply by q^val
    let mut acc = Complex::zero(bits);
    let t = f.trunc();
    let mut e = t - 1;
    loop {
        acc = acc.mul(qv);
        let c = f.coeff(e);
        if !c.is_zero() {
            acc = acc.add(&Complex::from_real(BigFloat::from_q(&c, bits)));
        }
        if e == f.val() {
            break;
        }
        e -= 1;
    }
    debug_assert!(f.val() >= 0);
    acc.mul(&qv.powi(f.val() as u32))
}

/// Evaluates x(τ) = Ω(q)/z(q) at q = e^{2πiτ} by summing the weight-two
/// expansions, whose coefficients grow only polynomially (the single
/// x-series has a finite radius and is useless near the elliptic points).
/// Falls back to θ_qΩ/θ_qz when z(q) vanishes.
pub fn eval_x(cat: &ModularCatalog, tau_re: &BigFloat, tau_im: &BigFloat, digits: u32) -> Result<EvalX> {
    let bits = bits_for_digits(digits + 10);
    let qv = exp_2pi_i_tau(&tau_re.with_bits(bits), &tau_im.with_bits(bits));
    let qabs = qv.abs();
    let qabs_f = qabs.to_f64();
    if qabs_f > 0.75 {
        return Err(NumericError::QTooLarge { qabs: qabs.to_decimal(6) }.into());
    }
    // truncation from the geometric tail, with slack for the polynomial
    // coefficient growth of weight-two forms
    let needed = ((digits as f64 + 12.0) * std::f64::consts::LN_10 / -qabs_f.ln()).ceil() as i64 + 40;
    let trunc = needed.max(40);
    let omega = cat.series("omega", trunc)?;
    let z = cat.series("z", trunc)?;
    let zv = eval_qseries(&z, &qv);
    let ov = eval_qseries(&omega, &qv);
    // |coef| ≤ B·n² over the computed window gives tail ≤ B Σ_{n>T} n²|q|^n
    let tail_bound = {
        let mut b: f64 = 1.0;
        for (e, c) in z.terms().chain(omega.terms()) {
            let cf = c.numer().to_string().parse::<f64>().unwrap_or(f64::MAX)
                / c.denom().to_string().parse::<f64>().unwrap_or(1.0);
            if e > 0 {
                b = b.max(cf.abs() / (e * e) as f64);
            }
        }
        let t = trunc as f64;
        let ratio = qabs_f * ((t + 2.0) / (t + 1.0)).powi(2);
        b * (t + 1.0) * (t + 1.0) * qabs_f.powf(t + 1.0) / (1.0 - ratio)
    };
    let tiny = {
        // |z(q)| below ~half precision means we are at a zero of z
        let mut t = BigFloat::from_i64(1, bits);
        t = t.shr(bits / 2);
        zv.abs().lt(&t)
    };
    if tiny {
        let theta_om = eval_qseries(&omega.theta_q(), &qv);
        let theta_z = eval_qseries(&z.theta_q(), &qv);
        let value = theta_om.div(&theta_z).map_err(crate::Error::from)?;
        return Ok(EvalX { value, tail_bound, trunc_used: trunc, elliptic_fallback: true });
    }
    let value = ov.div(&zv).map_err(crate::Error::from)?;
    Ok(EvalX { value, tail_bound, trunc_used: trunc, elliptic_fallback: false })
}

/// Numeric w(τ) = (2/z)·θ_q log x = 2(θ_qΩ/Ω - θ_qz/z)/z.
pub fn eval_w(cat: &ModularCatalog, tau_re: &BigFloat, tau_im: &BigFloat, digits: u32) -> Result<Complex> {
    let bits = bits_for_digits(digits + 10);
    let qv = exp_2pi_i_tau(&tau_re.with_bits(bits), &tau_im.with_bits(bits));
    let qabs_f = qv.abs().to_f64();
    if qabs_f > 0.7 {
        return Err(NumericError::QTooLarge { qabs: qv.abs().to_decimal(6) }.into());
    }
    let trunc = (((digits as f64 + 12.0) * std::f64::consts::LN_10 / -qabs_f.ln()).ceil() as i64 + 40).max(40);
    let omega = cat.series("omega", trunc)?;
    let z = cat.series("z", trunc)?;
    let ov = eval_qseries(&omega, &qv);
    let zv = eval_qseries(&z, &qv);
    let tov = eval_qseries(&omega.theta_q(), &qv);
    let tzv = eval_qseries(&z.theta_q(), &qv);
    let log_deriv = tov.div(&ov).map_err(crate::Error::from)?.sub(&tzv.div(&zv).map_err(crate::Error::from)?);
    let two = Complex::from_real(BigFloat::from_i64(2, bits));
    two.mul(&log_deriv).div(&zv).map_err(crate::Error::from)
}

/// One row of the singular-value table: discriminant, CM form, exact
/// claimed value, and the modular-equation degree its certificate uses.
#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub d: i64,
    pub form: BQForm,
    pub claimed: QuadSurd,
    pub n: i64,
}

fn inv_surd(p: i64, qq: i64, m: i64) -> QuadSurd {
    QuadSurd::from_ints(p, qq, m).unwrap().inv().unwrap()
}

/// The eleven certified singular values inside the radius of convergence,
/// ordered by discriminant.
pub fn table1() -> Vec<Table1Row> {
    vec![
        Table1Row { d: -1411, form: BQForm::new(17, 17, 25), claimed: inv_surd(-1025, -252, 17), n: 59 },
        Table1Row { d: -1003, form: BQForm::new(17, 17, 19), claimed: inv_surd(-345, -84, 17), n: 19 },
        Table1Row { d: -595, form: BQForm::new(17, -17, 13), claimed: inv_surd(-90, -21, 17), n: 13 },
        Table1Row { d: -427, form: BQForm::new(17, -27, 17), claimed: inv_surd(30, 33, -7), n: 107 },
        Table1Row { d: -427, form: BQForm::new(17, -41, 31), claimed: inv_surd(30, -33, -7), n: 107 },
        Table1Row { d: -408, form: BQForm::new(17, -34, 23), claimed: inv_surd(55, 24, 2), n: 23 },
        Table1Row { d: -408, form: BQForm::new(34, -68, 37), claimed: inv_surd(55, -24, 2), n: 23 },
        Table1Row { d: -340, form: BQForm::new(17, -34, 22), claimed: inv_surd(29, 4, 85), n: 5 },
        Table1Row { d: -323, form: BQForm::new(17, -17, 9), claimed: inv_surd(-22, -7, 17), n: 19 },
        Table1Row { d: -187, form: BQForm::new(17, -17, 7), claimed: QuadSurd::rational(q(-1, 21)), n: 7 },
        Table1Row { d: -136, form: BQForm::new(17, -34, 19), claimed: inv_surd(12, 3, 17), n: 2 },
    ]
}

/// Certificate for one singular value.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub form: BQForm,
    pub d: i64,
    pub n: i64,
    pub claimed: QuadSurd,
    /// Polynomial with the claimed value as an exact root (ascending
    /// integer coefficients).
    pub certificate_poly: Vec<String>,
    /// True when that polynomial is an irreducible factor of the stored
    /// diagonal Ψ_n(X,X) (n ∈ {2,3}); otherwise it is the value's minimal
    /// polynomial.
    pub poly_is_diagonal_factor: bool,
    /// |x(τ) - claimed| as a decimal.
    pub numeric_residual: String,
    pub digits_matched: u32,
    pub elliptic_fallback: bool,
    pub pass: bool,
}

/// Certifies one claimed evaluation: (i) the claimed value is an exact root
/// of the certificate polynomial (a diagonal factor of Ψ_n when available,
/// its minimal polynomial otherwise), and (ii) the numeric evaluation
/// matches to the requested tolerance.
pub fn certify_value(
    cat: &ModularCatalog,
    form: &BQForm,
    claimed: &QuadSurd,
    n: i64,
    digits: u32,
    tolerance_digits: u32,
) -> Result<Certificate> {
    let (poly, is_factor) = match diagonal(n) {
        Ok(diag) => match diag.factor_vanishing_at(claimed) {
            Some(f) => (f.clone(), true),
            None => (claimed.minimal_polynomial(), false),
        },
        Err(_) => (claimed.minimal_polynomial(), false),
    };
    let root_check = eval_poly_surd(&poly, claimed)?;
    let exact_ok = root_check.is_zero();
    let (tre, tim) = form.tau_numeric(bits_for_digits(digits + 10));
    let ev = eval_x(cat, &tre, &tim, digits)?;
    let target = claimed.to_complex(ev.value.bits());
    let resid = ev.value.sub(&target).abs();
    let matched = resid.neg_log10_floor(digits);
    let pass = exact_ok && matched >= tolerance_digits;
    Ok(Certificate {
        form: *form,
        d: form.discriminant(),
        n,
        claimed: claimed.clone(),
        certificate_poly: poly.iter().map(|c| c.to_string()).collect(),
        poly_is_diagonal_factor: is_factor,
        numeric_residual: resid.to_decimal(digits.min(50)),
        digits_matched: matched,
        elliptic_fallback: ev.elliptic_fallback,
        pass,
    })
}

/// Certifies all eleven table rows at the stated tolerance (40 digits at
/// evaluation precision 60), plus the boundary value x(τ(17,-8,1)) = 1 via
/// the (X - 1) factor of the degree-2 diagonal.
pub fn certify_table1(cat: &ModularCatalog) -> Result<Vec<Certificate>> {
    let mut out = Vec::new();
    for row in table1() {
        out.push(certify_value(cat, &row.form, &row.claimed, row.n, 60, 40)?);
    }
    // the elliptic value: certified by the (X-1) factor and a softer
    // numeric match (the q-series sits at the edge of its disc there)
    out.push(certify_value(cat, &BQForm::new(17, -8, 1), &QuadSurd::one(), 2, 60, 35)?);
    Ok(out)
}

/// One row of the matrix table: the element of Δ_n*(17) that maps τ to its
/// Fricke image (or fixes it), and a Γ₀(17)-equivalent upper-triangular
/// representative.
#[derive(Debug, Clone, Serialize)]
pub struct Table2Row {
    pub form: BQForm,
    pub gamma: GL2,
    pub upper: GL2,
    /// True when γ fixes τ; false when it sends τ to -1/(17τ).
    pub fixes_tau: bool,
}

pub fn table2() -> Vec<Table2Row> {
    let r = |f: BQForm, g: GL2, u: GL2, fixes: bool| Table2Row { form: f, gamma: g, upper: u, fixes_tau: fixes };
    vec![
        r(BQForm::new(17, 17, 25), GL2::new(-1, -2, 17, -25), GL2::new(1, 2, 0, 59), false),
        r(BQForm::new(17, 17, 19), GL2::new(1, 0, 17, 19), GL2::new(1, 0, 0, 19), false),
        r(BQForm::new(17, -17, 13), GL2::new(-1, 0, 17, -13), GL2::new(1, 0, 0, 13), false),
        r(BQForm::new(17, -27, 17), GL2::new(13, -17, 17, -14), GL2::new(1, 81, 0, 107), true),
        r(BQForm::new(17, -41, 31), GL2::new(20, -31, 17, -21), GL2::new(1, 68, 0, 107), true),
        r(BQForm::new(17, -34, 23), GL2::new(-1, 0, 34, -23), GL2::new(1, 0, 0, 23), false),
        r(BQForm::new(34, -68, 37), GL2::new(-2, 1, 51, -37), GL2::new(1, 11, 0, 23), false),
        r(BQForm::new(17, -34, 22), GL2::new(-1, 1, 17, -22), GL2::new(1, 4, 0, 5), false),
        r(BQForm::new(17, -17, 9), GL2::new(-2, 1, 17, -18), GL2::new(1, 9, 0, 19), false),
        r(BQForm::new(17, -17, 7), GL2::new(-1, 0, 17, -7), GL2::new(1, 0, 0, 7), false),
        r(BQForm::new(17, -34, 19), GL2::new(-1, 1, 17, -19), GL2::new(1, 1, 0, 2), false),
        r(BQForm::new(17, -8, 1), GL2::new(3, -1, 17, -5), GL2::new(1, 1, 0, 2), true),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2RowReport {
    pub form: BQForm,
    pub n: i64,
    pub gamma_in_delta_star: bool,
    pub determinant_matches: bool,
    pub upper_triangular_valid: bool,
    /// Exact Möbius check: γτ equals τ (dagger rows) or -1/(17τ).
    pub moebius_ok: bool,
    /// g ∈ Γ₀(17) with γ = g·upper, when it exists.
    pub coset_witness: Option<GL2>,
    pub pass: bool,
}

/// Verifies every matrix-table row: determinant, Δ_n*(17) membership,
/// upper-triangular shape, the exact Möbius action on τ in Q(√d), and the
/// explicit Γ₀(17) factor relating γ to its upper-triangular
/// representative.
pub fn verify_table2() -> Result<Vec<Table2RowReport>> {
    use num_integer::Integer;
    let mut out = Vec::new();
    for row in table2() {
        let n = row.upper.m[0][0] * row.upper.m[1][1];
        let det_ok = row.gamma.det() == n && row.upper.det() == n;
        let in_delta = row.gamma.in_delta_star_17();
        let [[al, be], [ga, de]] = row.upper.m;
        let upper_ok = ga == 0 && al > 0 && de > 0 && (0..de).contains(&be)
            && al.gcd(&be).gcd(&de) == 1;
        let tau = row.form.tau_exact()?;
        let image = row.gamma.act(&tau).map_err(crate::Error::from)?;
        let moebius_ok = if row.fixes_tau {
            image == tau
        } else {
            image == fricke_17(&tau).map_err(crate::Error::from)?
        };
        // γ·upper^{-1} must land in Γ₀(17); upper^{-1} = adj/n
        let adj = GL2::new(de, -be, 0, al);
        let prod = row.gamma.mul(&adj);
        let integral = prod.m.iter().flatten().all(|e| e % n == 0);
        let witness = if integral {
            let g = GL2::new(prod.m[0][0] / n, prod.m[0][1] / n, prod.m[1][0] / n, prod.m[1][1] / n);
            if g.det() == 1 && g.m[1][0] % 17 == 0 {
                Some(g)
            } else {
                None
            }
        } else {
            None
        };
        let pass = det_ok && in_delta && upper_ok && moebius_ok && witness.is_some();
        out.push(Table2RowReport {
            form: row.form,
            n,
            gamma_in_delta_star: in_delta,
            determinant_matches: det_ok,
            upper_triangular_valid: upper_ok,
            moebius_ok,
            coset_witness: witness,
            pass,
        });
    }
    Ok(out)
}

/// One sampled point of a discriminant scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub form: BQForm,
    /// None for the form's own CM point; Some(k) for the coset translate
    /// -1/(τ+k), evaluated through its Fricke partner (τ+k)/17.
    pub translate: Option<i64>,
    pub x_re: String,
    pub x_im: String,
    pub inside_radius: bool,
    /// Index into the certified list when the value matches numerically.
    pub matches_certified: Option<usize>,
}

/// Scans one discriminant: every reduced form, translated through the 18
/// Γ₀(17) coset representatives, with numeric x and a flag for matches
/// against the certified degree-≤2 list.
pub fn class_scan(cat: &ModularCatalog, d: i64, digits: u32) -> Result<Vec<ScanPoint>> {
    let bits = bits_for_digits(digits + 10);
    let rho = BigFloat::from_q(&radius(40), bits);
    let known = table1();
    let mut out = Vec::new();
    for form in reduced_forms(d) {
        let (re0, im0) = form.tau_numeric(bits);
        // the identity coset, plus F_k = -1/(τ+k) for k = -8..8; x(F_k τ) =
        // x((τ+k)/17) by Fricke invariance, which keeps |q| manageable
        let mut points: Vec<(Option<i64>, BigFloat, BigFloat)> = vec![(None, re0.clone(), im0.clone())];
        for k in -8..=8i64 {
            let re = re0.add(&BigFloat::from_i64(k, bits)).div(&BigFloat::from_i64(17, bits));
            let im = im0.div(&BigFloat::from_i64(17, bits));
            points.push((Some(k), re, im));
        }
        for (translate, re, im) in points {
            let ev = eval_x(cat, &re, &im, digits)?;
            let xabs = ev.value.abs();
            let inside = xabs.lt(&rho);
            let mut matched = None;
            for (i, row) in known.iter().enumerate() {
                let target = row.claimed.to_complex(ev.value.bits());
                if ev.value.sub(&target).abs().neg_log10_floor(digits) >= digits.saturating_sub(8).max(8) {
                    matched = Some(i);
                    break;
                }
            }
            out.push(ScanPoint {
                form,
                translate,
                x_re: ev.value.re.to_decimal(digits.min(40)),
                x_im: ev.value.im.to_decimal(digits.min(40)),
                inside_radius: inside,
                matches_certified: matched,
            });
        }
    }
    Ok(out)
}

/// The Table-1 discriminants, deduplicated, for scan-style acceptance runs.
pub fn table1_discriminants() -> Vec<i64> {
    let mut ds: Vec<i64> = table1().iter().map(|r| r.d).collect();
    ds.dedup();
    ds
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_at_sqrt_2_17_matches_theorem_value() {
        // x(i√(2/17)) = -4/3 + √17/3, tested to 40 digits
        let cat = ModularCatalog::new();
        let bits = bits_for_digits(60);
        let re = BigFloat::zero(bits);
        let im = BigFloat::from_q(&q(2, 17), bits).sqrt();
        let ev = eval_x(&cat, &re, &im, 50).unwrap();
        let target = inv_surd(12, 3, 17).to_complex(ev.value.bits());
        assert!(ev.value.sub(&target).abs().abs_lt_pow10_neg(40), "residual too large");
        assert!(!ev.elliptic_fallback);
        assert!(ev.tail_bound < 1e-45);
    }

    #[test]
    fn x_at_d187_is_minus_one_over_21() {
        let cat = ModularCatalog::new();
        let f = BQForm::new(17, -17, 7);
        let (re, im) = f.tau_numeric(bits_for_digits(55));
        let ev = eval_x(&cat, &re, &im, 45).unwrap();
        let target = QuadSurd::rational(q(-1, 21)).to_complex(ev.value.bits());
        assert!(ev.value.sub(&target).abs().abs_lt_pow10_neg(40));
    }

    #[test]
    fn x_at_elliptic_point_is_one() {
        let cat = ModularCatalog::new();
        let f = BQForm::new(17, -8, 1);
        let (re, im) = f.tau_numeric(bits_for_digits(50));
        let ev = eval_x(&cat, &re, &im, 40).unwrap();
        assert!(ev.elliptic_fallback, "z(q) vanishes at the elliptic point");
        let one = Complex::from_real(BigFloat::from_i64(1, ev.value.bits()));
        assert!(ev.value.sub(&one).abs().abs_lt_pow10_neg(35));
    }

    #[test]
    fn w_at_d187_matches_exact_branch() {
        let cat = ModularCatalog::new();
        let f = BQForm::new(17, -17, 7);
        let (re, im) = f.tau_numeric(bits_for_digits(50));
        let w = eval_w(&cat, &re, &im, 40).unwrap();
        let target = QuadSurd::new(crate::series::qi(0), q(136, 441), 17)
            .unwrap()
            .to_complex(w.bits());
        assert!(w.sub(&target).abs().abs_lt_pow10_neg(35), "w(τ) = +136√17/441");
    }

    #[test]
    fn fricke_invariance_numeric() {
        // x(τ) = x(-1/(17τ)) for a generic point
        let cat = ModularCatalog::new();
        let bits = bits_for_digits(55);
        let re = BigFloat::from_q(&q(1, 5), bits);
        let im = BigFloat::from_q(&q(7, 10), bits);
        let a = eval_x(&cat, &re, &im, 45).unwrap().value;
        // -1/(17τ) = -conj(τ)/(17|τ|²)
        let norm = re.mul(&re).add(&im.mul(&im)).mul_i64(17);
        let re2 = re.neg().div(&norm);
        let im2 = im.div(&norm);
        let b = eval_x(&cat, &re2, &im2, 45).unwrap().value;
        assert!(a.sub(&b).abs().abs_lt_pow10_neg(40), "Fricke invariance violated");
    }

    #[test]
    fn gamma0_invariance_numeric() {
        let cat = ModularCatalog::new();
        let bits = bits_for_digits(55);
        let re = BigFloat::from_q(&q(-1, 7), bits);
        let im = BigFloat::from_q(&q(4, 5), bits);
        let base = eval_x(&cat, &re, &im, 45).unwrap().value;
        // τ + 1
        let shifted = eval_x(&cat, &re.add(&BigFloat::from_i64(1, bits)), &im, 45).unwrap().value;
        assert!(base.sub(&shifted).abs().abs_lt_pow10_neg(40));
        // γ = (1,0;17,1): τ' = τ/(17τ+1)
        let denom_re = re.mul_i64(17).add(&BigFloat::from_i64(1, bits));
        let denom_im = im.mul_i64(17);
        let nrm = denom_re.mul(&denom_re).add(&denom_im.mul(&denom_im));
        let re2 = re.mul(&denom_re).add(&im.mul(&denom_im)).div(&nrm);
        let im2 = im.mul(&denom_re).sub(&re.mul(&denom_im)).div(&nrm);
        let moved = eval_x(&cat, &re2, &im2, 45).unwrap().value;
        assert!(base.sub(&moved).abs().abs_lt_pow10_neg(38));
    }

    #[test]
    fn certify_the_n2_row() {
        let cat = ModularCatalog::new();
        let row = &table1()[10];
        assert_eq!(row.d, -136);
        let cert = certify_value(&cat, &row.form, &row.claimed, row.n, 60, 40).unwrap();
        assert!(cert.pass, "{cert:?}");
        assert!(cert.poly_is_diagonal_factor, "9X²+24X-1 is a diagonal factor");
        assert_eq!(cert.certificate_poly, vec!["-1", "24", "9"]);
    }

    #[test]
    fn table2_rows_all_verify() {
        let reports = verify_table2().unwrap();
        assert_eq!(reports.len(), 12);
        for r in &reports {
            assert!(r.pass, "{r:?}");
        }
        // spot-check the dagger determinant: 13·(-14) + 17·17 = 107
        let dag = reports.iter().find(|r| r.form == BQForm::new(17, -27, 17)).unwrap();
        assert_eq!(dag.n, 107);
        // and the (17,17,25) row has αδ = 59
        let f59 = reports.iter().find(|r| r.form == BQForm::new(17, 17, 25)).unwrap();
        assert_eq!(f59.n, 59);
    }

    #[test]
    fn scan_d3_finds_nothing_inside_radius() {
        let cat = ModularCatalog::new();
        let pts = class_scan(&cat, -3, 25).unwrap();
        assert_eq!(pts.len(), 18, "h(-3) = 1: one form, 18 coset points");
        assert!(pts.iter().all(|p| p.matches_certified.is_none()));
        assert!(pts.iter().all(|p| !p.inside_radius || p.x_im.contains("0.000")));
    }

    #[test]
    fn scan_d187_contains_the_table_value() {
        let cat = ModularCatalog::new();
        let pts = class_scan(&cat, -187, 30).unwrap();
        // h(-187) = 2 → 36 points, at least one matching -1/21
        assert_eq!(pts.len(), 36);
        let hit = pts.iter().find(|p| p.matches_certified == Some(9));
        assert!(hit.is_some(), "expected a point matching -1/21");
    }
}
