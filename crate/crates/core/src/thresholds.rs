//! Replayable certificate engine for the inequality chains that bound the
//! uniqueness threshold in `alpha`.
//!
//! The chain assumes a nonconstant solution exists with `beta != 0`,
//! `alpha > 1/2`, and derives successively tighter contradictions:
//! first the closed-form bounds `alpha < (31+sqrt(577))/96 < 0.5732`,
//! `alpha < (69+sqrt(3801))/240 < 0.5444` and `alpha < alpha_3`; then the
//! window exclusions `[alpha_4, alpha_3)` and `[alpha_5, alpha_4)` driven
//! by the quantities `gamma_n`, `A_n`, `B_n`, `omega_n` and the bounds
//! `d_3`, `d_4`; and finally five decimal windows from `[0.5165, 0.51696)`
//! down to `[0.5145, 0.515)` eliminated through the refined gradient
//! bound `B(alpha, beta)`, ending at `alpha < 0.5145`.
//!
//! Every rational expression is evaluated exactly; the algebraic
//! thresholds `alpha_n = (p + sqrt(q))/r` are kept as exact quadratic
//! field elements; only quantities mixing two fields are enclosed in
//! outward-rounded intervals. Each step stores its inputs and claimed
//! reference value (when one exists); claims are verified, never consumed
//! — later steps always use the engine's own bounds.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num::{BigInt, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exact::{rat, rat_decimal, rat_int, rat_to_f64, Interval, QuadExt, Rat};
use crate::Result;

fn lam(k: usize) -> i64 {
    (k as i64) * (k as i64 + 3)
}

/// `f_n(alpha) = -8/a^2 + 136/a - 180 - 15 lambda_{n+1} (2 - 1/a)`, exact.
pub fn f_n(n: usize, alpha: &Rat) -> Rat {
    let l = rat_int(15 * lam(n + 1));
    let inv = alpha.recip();
    rat_int(-8) * &inv * &inv + rat_int(136) * &inv - rat_int(180) - &l * (rat_int(2) - &inv)
}

fn f_n_quad(n: usize, alpha: &QuadExt) -> QuadExt {
    let inv = alpha.recip();
    let quad = inv.mul(&inv).mul_rat(&rat_int(-8));
    quad.add(&inv.mul_rat(&rat_int(136)))
        .add_rat(&rat_int(-180 - 30 * lam(n + 1)))
        .add(&inv.mul_rat(&rat_int(15 * lam(n + 1))))
}

/// `h(alpha) = (16/13)(1 - 1/(3 alpha))(5 - 1/alpha)`, exact.
pub fn h(alpha: &Rat) -> Rat {
    let inv = alpha.recip();
    rat(16, 13) * (rat_int(1) - rat(1, 3) * &inv) * (rat_int(5) - &inv)
}

fn h_quad(alpha: &QuadExt) -> QuadExt {
    let inv = alpha.recip();
    let one_minus = inv.mul_rat(&rat(-1, 3)).add_rat(&rat_int(1));
    let five_minus = inv.neg().add_rat(&rat_int(5));
    one_minus.mul(&five_minus).mul_rat(&rat(16, 13))
}

/// `hbar(alpha) = (5 - 1/a)(24/(5a) - 24) + (1/a)(14/(5a) + 21)`, exact.
pub fn hbar(alpha: &Rat) -> Rat {
    let inv = alpha.recip();
    (rat_int(5) - &inv) * (rat(24, 5) * &inv - rat_int(24))
        + &inv * (rat(14, 5) * &inv + rat_int(21))
}

fn hbar_quad(alpha: &QuadExt) -> QuadExt {
    let inv = alpha.recip();
    let t1 = inv
        .neg()
        .add_rat(&rat_int(5))
        .mul(&inv.mul_rat(&rat(24, 5)).add_rat(&rat_int(-24)));
    let t2 = inv.mul(&inv.mul_rat(&rat(14, 5)).add_rat(&rat_int(21)));
    t1.add(&t2)
}

/// The algebraic threshold `alpha_n`: the root of `f_n` in `(1/2, 1)`,
/// in the reduced form `(p + sqrt(q))/r`.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaRoot {
    pub n: usize,
    pub p: i64,
    pub q: i64,
    pub r: i64,
    /// Outward-rounded enclosure of the value.
    pub lo: f64,
    pub hi: f64,
    #[serde(skip)]
    pub value: QuadExt,
}

impl AlphaRoot {
    pub fn to_f64(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Clears denominators of `f_n` and selects the root in `(1/2, 1)`.
pub fn alpha_n(n: usize) -> Result<AlphaRoot> {
    let l = lam(n + 1);
    // (180 + 30 L) a^2 - (136 + 15 L) a + 8 = 0
    let mut a = 180 + 30 * l;
    let mut b = 136 + 15 * l;
    let mut c = 8i64;
    let g = gcd(gcd(a, b), c);
    a /= g;
    b /= g;
    c /= g;
    let disc = b * b - 4 * a * c;
    if disc <= 0 {
        return Err(Error::InvalidInput(format!(
            "no real threshold root for n = {n}"
        )));
    }
    for sign in [1i64, -1] {
        // (b + sign sqrt(disc)) / (2a)
        let (s, d) = crate::exact::squarefree_split(disc);
        let value = QuadExt::new(rat(b, 2 * a), rat(sign * s, 2 * a), d);
        if value.cmp_rat(&rat(1, 2)) == Ordering::Greater
            && value.cmp_rat(&rat_int(1)) == Ordering::Less
        {
            // reduce the displayed (p + sqrt(q)) / r
            let gg = gcd(gcd(b, s), 2 * a);
            let enc = value.to_interval().widen_rel(1e-15);
            debug_assert!(
                f_n_quad(n, &value).is_zero(),
                "root does not annihilate f_{n}"
            );
            return Ok(AlphaRoot {
                n,
                p: b / gg,
                q: (s / gg) * (s / gg) * d,
                r: 2 * a / gg,
                lo: enc.lo,
                hi: enc.hi,
                value,
            });
        }
    }
    Err(Error::InvalidInput(format!(
        "f_{n} has no root in (1/2, 1)"
    )))
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `gamma_n`: the window-wide bound on `t/beta` from the two-field
/// combination of `h`, `hbar` at `alpha_{n+1}` with `alpha_n` in the
/// denominator term. Outward-rounded.
pub fn gamma_n(n: usize) -> Result<Interval> {
    let an = alpha_n(n)?;
    let an1 = alpha_n(n + 1)?;
    gamma_from(&an, &an1)
}

fn gamma_from(an: &AlphaRoot, an1: &AlphaRoot) -> Result<Interval> {
    let h1 = h_quad(&an1.value).to_interval();
    let hb1 = hbar_quad(&an1.value).to_interval();
    let inv_an = an.value.recip().to_interval();
    let inv_an1 = an1.value.recip().to_interval();
    // denom = 2 h(a_{n+1}) (98/(25 a_n) + 189/5) - (56/25)(15 + 1/a_{n+1})(1/a_{n+1})
    let term1 = h1
        .scale(2.0)
        .mul(&inv_an.scale(98.0 / 25.0).add_scalar(189.0 / 5.0));
    let term2 = inv_an1.add_scalar(15.0).mul(&inv_an1).scale(56.0 / 25.0);
    let denom = term1.sub(&term2);
    if denom.lo <= 0.0 {
        return Err(Error::NonPositiveLogArgument(denom.lo));
    }
    Ok(hb1.scale(2.0).div(&denom).widen_rel(1e-12))
}

/// `A_n = 15 (lambda_{n+1} - 4) + 32 / alpha_n`, exact in the field of
/// `alpha_n`.
pub fn a_n(n: usize) -> Result<QuadExt> {
    let an = alpha_n(n)?;
    Ok(an
        .value
        .recip()
        .mul_rat(&rat_int(32))
        .add_rat(&rat_int(15 * (lam(n + 1) - 4))))
}

/// `B_n = (3/2) l^2 - 21 l + 60 + (4/(5 alpha_{n+1}))(l + 5 - n)` with
/// `l = lambda_{n+1}`, exact in the field of `alpha_{n+1}`.
pub fn b_n(n: usize) -> Result<QuadExt> {
    let l = lam(n + 1);
    let an1 = alpha_n(n + 1)?;
    let poly = rat(3 * l * l, 2) - rat_int(21 * l) + rat_int(60);
    Ok(an1
        .value
        .recip()
        .mul_rat(&rat(4 * (l + 5 - n as i64), 5))
        .add_rat(&poly))
}

/// `omega_n = A_n - B_n gamma_n`, outward-rounded.
pub fn omega_n(n: usize) -> Result<Interval> {
    let a = a_n(n)?.to_interval();
    let b = b_n(n)?.to_interval();
    let g = gamma_n(n)?;
    Ok(a.sub(&b.mul(&g)).widen_rel(1e-12))
}

/// Refined gradient-bound margin `B(alpha, beta)` at the conventional
/// `c = 2/5`:  `(1 - alpha beta)^6 / (5^4 2^7 (3 + 2 alpha beta))`.
pub fn b_func(alpha: f64, beta: f64) -> Result<f64> {
    let ab = alpha * beta;
    if ab >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "B(alpha, beta) needs alpha*beta < 1, got {ab}"
        )));
    }
    let s = 1.0 - ab;
    Ok(s.powi(6) / (625.0 * 128.0 * (3.0 + 2.0 * ab)))
}

/// General-`c` form of the refinement, for audit:
/// `(5 c^5 / 2^13) (4/5 - c) (1 - alpha beta)^6 / (1 - c (1 - alpha beta))`.
pub fn b_func_general(alpha: f64, beta: f64, c: f64) -> Result<f64> {
    let ab = alpha * beta;
    if ab >= 1.0 || c <= 0.0 || c >= 0.8 {
        return Err(Error::InvalidInput(format!(
            "need alpha*beta < 1 and c in (0, 4/5); got ab = {ab}, c = {c}"
        )));
    }
    let s = 1.0 - ab;
    Ok(5.0 * c.powi(5) / 8192.0 * (0.8 - c) * s.powi(6) / (1.0 - c * s))
}

/// One certificate step: a named quantity, its exact or enclosed value,
/// the relation the chain requires of it, and (when the literature states
/// one) the claimed reference value with its verification status.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertStep {
    pub name: String,
    /// Exact inputs the value was computed from, as replayable strings.
    pub inputs: Vec<(String, String)>,
    /// Exact rational string, or `[lo, hi]` for an interval.
    pub value: String,
    pub value_f64: f64,
    /// The relation this step must satisfy for the chain to proceed.
    pub requirement: String,
    pub pass: bool,
    /// Reference constant quoted for this quantity, if any.
    pub claimed: Option<f64>,
    /// Whether the engine's value verifies the quoted constant in its
    /// stated direction.
    pub claim_upheld: Option<bool>,
    pub note: Option<String>,
}

/// A replayable chain of inequality steps with the final excluded
/// `alpha`-interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub steps: Vec<CertStep>,
    /// `(lo, hi)`: nonconstant axial solutions are excluded for
    /// `alpha in [lo, hi)`.
    pub excluded_alpha: Option<(f64, f64)>,
    pub conclusion: Option<String>,
    /// All chain-required inequalities hold.
    pub all_passed: bool,
    /// All quoted reference constants were reproduced in their stated
    /// direction.
    pub all_claims_upheld: bool,
}

struct Steps(Vec<CertStep>);

impl Steps {
    fn push_exact(
        &mut self,
        name: &str,
        inputs: Vec<(String, String)>,
        value: &Rat,
        requirement: &str,
        pass: bool,
    ) -> &mut CertStep {
        self.0.push(CertStep {
            name: name.into(),
            inputs,
            value: value.to_string(),
            value_f64: rat_to_f64(value),
            requirement: requirement.into(),
            pass,
            claimed: None,
            claim_upheld: None,
            note: None,
        });
        self.0.last_mut().unwrap()
    }

    fn push_interval(
        &mut self,
        name: &str,
        inputs: Vec<(String, String)>,
        value: Interval,
        requirement: &str,
        pass: bool,
    ) -> &mut CertStep {
        self.0.push(CertStep {
            name: name.into(),
            inputs,
            value: format!("[{:e}, {:e}]", value.lo, value.hi),
            value_f64: value.mid(),
            requirement: requirement.into(),
            pass,
            claimed: None,
            claim_upheld: None,
            note: None,
        });
        self.0.last_mut().unwrap()
    }
}

fn claim(step: &mut CertStep, claimed: f64, upheld: bool) {
    step.claimed = Some(claimed);
    step.claim_upheld = Some(upheld);
}

fn root_input(a: &AlphaRoot) -> (String, String) {
    (
        format!("alpha_{}", a.n),
        format!("({} + sqrt({})) / {}", a.p, a.q, a.r),
    )
}

/// The closed-form opening of the chain: `beta >= h(alpha) >= 16/13`,
/// the `0.5732` and `0.5444` bounds, and `alpha < alpha_3`.
pub fn section3_initial() -> Result<Vec<CertStep>> {
    let mut s = Steps(Vec::new());

    // h is increasing on (1/4, inf): h'(a) = (16/13)(2/(3a^3))(4a - 1),
    // and h(1/2) = 16/13 exactly.
    let h_half = h(&rat(1, 2));
    s.push_exact(
        "beta lower bound: h(1/2)",
        vec![("h".into(), "(16/13)(1 - 1/(3a))(5 - 1/a)".into())],
        &h_half,
        "h(1/2) = 16/13 and h' > 0 for alpha > 1/4, so beta >= h(alpha) >= 16/13 on (1/2, 1)",
        h_half == rat(16, 13),
    )
    .note = Some("h'(a) = (32/(39 a^3))(4a - 1) > 0 for a > 1/4 (exact derivative)".into());

    // bracket >= 0  <=>  10 y^2 - 155 y + 240 <= 0  (y = 1/alpha)
    // => alpha <= (31 + sqrt(577))/96 < 0.5732
    let bound1 = QuadExt::root_form(31, 577, 96);
    let pass1 = bound1.cmp_rat(&rat_decimal(5732, 4)) == Ordering::Less;
    let enc1 = bound1.to_interval();
    s.push_interval(
        "first window: alpha < (31 + sqrt(577))/96",
        vec![(
            "bracket".into(),
            "(9 + 2/a)(1/a) + (16/(3a) - 16)(5 - 1/a) >= 0  <=>  10 y^2 - 155 y + 240 <= 0".into(),
        )],
        enc1,
        "(31 + sqrt(577))/96 < 0.5732 (exact comparison)",
        pass1,
    );
    let last = s.0.last_mut().unwrap();
    claim(last, 0.5732, pass1);

    // hbar >= 0  <=>  2 y^2 - 69 y + 120 <= 0  => alpha <= (69 + sqrt(3801))/240 < 0.5444;
    // hbar <= 10  <=>  2 y^2 - 69 y + 130 >= 0, which holds for y <= 2 (alpha >= 1/2;
    // the root is exactly y = 2).
    let bound2 = QuadExt::root_form(69, 3801, 240);
    let pass2 = bound2.cmp_rat(&rat_decimal(5444, 4)) == Ordering::Less;
    let upper_root_exact = rat_int(2 * 4) - rat_int(69 * 2) + rat_int(130); // 2 y^2-69 y+130 at y=2
    s.push_interval(
        "second window: alpha < (69 + sqrt(3801))/240",
        vec![(
            "hbar".into(),
            "0 <= hbar(alpha) <= 10 on the window; hbar = -2 y^2 + 69 y - 120".into(),
        )],
        bound2.to_interval(),
        "(69 + sqrt(3801))/240 < 0.5444 and 2 y^2 - 69 y + 130 vanishes exactly at y = 2",
        pass2 && upper_root_exact.is_zero(),
    );
    let last = s.0.last_mut().unwrap();
    claim(last, 0.5444, pass2);

    // worst-case identity behind t <= (325/588) beta:
    // (2002/25)(16/13) - 2*(10136/325) = 11760/325 = 20*588/325 exactly
    let worst = rat(2002, 25) * rat(16, 13) - rat_int(2) * rat(10136, 325);
    let target = rat(20 * 588, 325);
    s.push_exact(
        "t <= (325/588) beta: worst-case denominator",
        vec![
            ("beta_min".into(), "16/13".into()),
            ("alpha_min".into(), "1/2".into()),
        ],
        &worst,
        "(2002/25)(16/13) - 2(10136/325) = 11760/325 exactly (equality at the worst case)",
        worst == target,
    );

    // the n = 3 quadratic relation plus the (325/588) bound gives a
    // strictly positive bracket (90 + 918 y)/49, hence f_3(alpha) > 0,
    // hence alpha < alpha_3.
    let bracket_const = rat_int(360) - rat(325 * 648, 588);
    let bracket_slope = rat_int(32) - rat(325 * 24, 588);
    let a3 = alpha_n(3)?;
    let f3_at_root = f_n_quad(3, &a3.value);
    let pass3 = bracket_const == rat(90, 49)
        && bracket_slope == rat(918, 49)
        && bracket_const.is_positive()
        && bracket_slope.is_positive()
        && f3_at_root.is_zero();
    s.push_interval(
        "third window: alpha < alpha_3 = (139 + sqrt(17281))/510",
        vec![
            root_input(&a3),
            (
                "bracket".into(),
                "360 + 32/a - (325/588)(648 + 24/a) = (90 + 918/a)/49 > 0".into(),
            ),
        ],
        Interval::new(a3.lo, a3.hi),
        "f_3(alpha) > 0 forced; f_3(alpha_3) = 0 exactly; so alpha < alpha_3",
        pass3,
    );
    let last = s.0.last_mut().unwrap();
    claim(
        last,
        0.530_308_269_362_909_2,
        (a3.to_f64() - 0.530_308_269_362_909_2).abs() < 1e-12,
    );

    Ok(s.0)
}

/// The window exclusion `[alpha_{n+1}, alpha_n)` for `n = 3` or `4`.
pub fn exclusion_step(n: usize) -> Result<Vec<CertStep>> {
    assert!(n == 3 || n == 4, "exclusion steps exist for n = 3, 4");
    let mut s = Steps(Vec::new());
    let an = alpha_n(n)?;
    let an1 = alpha_n(n + 1)?;
    let lam_next = lam(n + 2); // lambda_{n+2}
    let gam = gamma_from(&an, &an1)?;
    let (gam_claim, d_claim, a_claim, b_claim, margin_claim) = if n == 3 {
        (0.186, 3.51, 600.3, 1682.9, 589.5)
    } else {
        (0.249, 6.855, 811.27, 3383.58, 489.5)
    };

    let step = s.push_interval(
        &format!("gamma_{n}"),
        vec![root_input(&an), root_input(&an1)],
        gam,
        &format!("t <= gamma_{n} beta on [alpha_{}, alpha_{})", n + 1, n),
        gam.hi.is_finite() && gam.lo > 0.0,
    );
    claim(step, gam_claim, gam.hi < gam_claim);

    // omega_n = A_n - B_n gamma_n must be positive for the refinement
    let omega = a_n(n)?
        .to_interval()
        .sub(&b_n(n)?.to_interval().mul(&gam))
        .widen_rel(1e-12);
    s.push_interval(
        &format!("omega_{n} = A_{n} - B_{n} gamma_{n}"),
        vec![root_input(&an), root_input(&an1)],
        omega,
        &format!("omega_{n} > 0"),
        omega.lo > 0.0,
    );

    // engine's own d_n = (5/3) f_n(alpha_{n+1}) lambda_{n+2} / omega_n
    let f_at = f_n_quad(n, &an1.value).to_interval();
    let d_own = f_at
        .scale(5.0 / 3.0)
        .mul(&Interval::point(lam_next as f64))
        .div(&omega)
        .widen_rel(1e-12);
    let step = s.push_interval(
        &format!(
            "d_{n} (own bound): (5/3) f_{n}(alpha_{}) lambda_{} / omega_{n}",
            n + 1,
            n + 2
        ),
        vec![root_input(&an1)],
        d_own,
        &format!("t <= d_{n} / lambda_{}", n + 2),
        d_own.lo > 0.0,
    );
    claim(step, d_claim, d_claim >= d_own.hi);

    // contradiction bracket: A >= 15(lambda_{n+2} - 4) + 32/alpha_n,
    // B <= 3 cbar_{n+1} at alpha_{n+1}
    let a_lo = an
        .value
        .recip()
        .mul_rat(&rat_int(32))
        .add_rat(&rat_int(15 * (lam_next - 4)));
    let a_lo_i = a_lo.to_interval().widen_rel(1e-13);
    let step = s.push_interval(
        &format!("A (window inf): 15(lambda_{} - 4) + 32/alpha_{n}", n + 2),
        vec![root_input(&an)],
        a_lo_i,
        "lower bound of the positive bracket term",
        a_lo_i.lo > 0.0,
    );
    claim(step, a_claim, a_lo_i.lo >= a_claim);

    let b_hi = an1
        .value
        .recip()
        .mul_rat(&rat(4 * (lam_next + 4 - n as i64), 5))
        .add_rat(&(rat(3 * lam_next * lam_next, 2) - rat_int(21 * lam_next) + rat_int(60)));
    let b_hi_i = b_hi.to_interval().widen_rel(1e-13);
    let step = s.push_interval(
        &format!("B (window sup): 3 cbar_{} at alpha_{}", n + 1, n + 1),
        vec![root_input(&an1)],
        b_hi_i,
        "upper bound of the subtracted term",
        b_hi_i.hi.is_finite(),
    );
    claim(step, b_claim, b_hi_i.hi <= b_claim);

    // margin = A - (d_n / (lambda_{n+2} h(alpha_{n+1}))) B with the
    // engine's own d_n
    let h_an1 = h_quad(&an1.value).to_interval();
    let factor = Interval::point(d_own.hi).div(&h_an1.mul(&Interval::point(lam_next as f64)));
    let margin = a_lo_i.sub(&factor.mul(&b_hi_i)).widen_rel(1e-12);
    let step = s.push_interval(
        &format!("exclusion margin (n = {n})"),
        vec![
            root_input(&an),
            root_input(&an1),
            (format!("d_{n}"), format!("{:e}", d_own.hi)),
        ],
        margin,
        &format!(
            "A - (d_{n}/(lambda_{} h(alpha_{}))) B > 0, excluding alpha in [alpha_{}, alpha_{n})",
            n + 2,
            n + 1,
            n + 1
        ),
        margin.lo > 0.0,
    );
    claim(step, margin_claim, margin.lo >= margin_claim);
    Ok(s.0)
}

/// The `n = 5` diagnostic: `omega_5 < 0`, so no admissible `d_5` exists
/// and the window method stops at `alpha_5`.
pub fn omega5_remark() -> Result<Vec<CertStep>> {
    let mut s = Steps(Vec::new());
    let gam = gamma_n(5)?;
    let step = s.push_interval(
        "gamma_5",
        vec![root_input(&alpha_n(5)?), root_input(&alpha_n(6)?)],
        gam,
        "reported for the n = 5 obstruction",
        gam.lo > 0.0,
    );
    claim(step, 0.2994, gam.hi <= 0.2994);
    let omega = omega_n(5)?;
    let step = s.push_interval(
        "omega_5 = A_5 - B_5 gamma_5",
        vec![root_input(&alpha_n(5)?), root_input(&alpha_n(6)?)],
        omega,
        "omega_5 < 0: no admissible d_5, the n-window iteration stops",
        omega.hi < 0.0,
    );
    claim(step, -632.0, (omega.mid() + 632.0).abs() <= 0.05 * 632.0);
    Ok(s.0)
}

/// One refined decimal window of the final chain.
#[derive(Debug, Clone, Serialize)]
pub struct WindowClaims {
    pub beta_lo: Option<f64>,
    pub kappa: Option<f64>,
    pub f6: Option<f64>,
    pub t_lo: Option<f64>,
    pub b_lo: Option<f64>,
    pub b_hi: Option<f64>,
    pub alpha_derived: Option<f64>,
}

const NO_CLAIMS: WindowClaims = WindowClaims {
    beta_lo: None,
    kappa: None,
    f6: None,
    t_lo: None,
    b_lo: None,
    b_hi: None,
    alpha_derived: None,
};

/// Eliminates one window `[w_lo, w_hi)` through the refined bound
/// `B(alpha, beta)`; pushes the intermediate constants as steps and
/// returns whether a contradiction was reached.
fn eliminate_window(s: &mut Steps, w_lo: &Rat, w_hi: &Rat, claims: &WindowClaims) -> Result<bool> {
    let tag = format!("[{}, {})", rat_to_f64(w_lo), rat_to_f64(w_hi));
    let inputs = vec![
        ("w_lo".into(), w_lo.to_string()),
        ("w_hi".into(), w_hi.to_string()),
    ];

    // beta >= h(w_lo) (h increasing)
    let beta_lo = h(w_lo);
    let step = s.push_exact(
        &format!("{tag} beta lower bound h(w_lo)"),
        inputs.clone(),
        &beta_lo,
        "beta >= h(alpha) >= h(w_lo)",
        beta_lo.is_positive(),
    );
    if let Some(c) = claims.beta_lo {
        claim(step, c, rat_to_f64(&beta_lo) > c);
    }

    // alpha beta > w_lo h(w_lo)
    let ab_lo = w_lo * &beta_lo;
    s.push_exact(
        &format!("{tag} alpha*beta lower bound"),
        inputs.clone(),
        &ab_lo,
        "alpha beta > w_lo h(w_lo); also alpha beta < 1",
        ab_lo.is_positive() && ab_lo < rat_int(1),
    );

    // kappa: t <= kappa beta
    let denom = rat_int(2) * h(w_lo) * (rat(98, 25) / w_hi + rat(189, 5))
        - rat(56, 25) * (rat_int(15) + w_lo.recip()) * w_lo.recip();
    if !denom.is_positive() {
        return Ok(false);
    }
    let kappa = rat_int(2) * hbar(w_lo) / &denom;
    let step = s.push_exact(
        &format!("{tag} kappa (t <= kappa beta)"),
        inputs.clone(),
        &kappa,
        "kappa > 0 (hbar decreasing in alpha: endpoint values used outward)",
        kappa.is_positive(),
    );
    if let Some(c) = claims.kappa {
        claim(step, c, rat_to_f64(&kappa) <= c);
    }

    // f_6(w_lo) < 0 (f_6 decreasing in alpha on the window)
    let f6 = f_n(6, w_lo);
    let step = s.push_exact(
        &format!("{tag} f_6(w_lo)"),
        inputs.clone(),
        &f6,
        "f_6(alpha) <= f_6(w_lo) < 0 on the window (and f_n < f_6 for n > 6)",
        f6.is_negative(),
    );
    if let Some(c) = claims.f6 {
        claim(
            step,
            c,
            f6 < Rat::new(BigInt::from((c * 1e6) as i64), BigInt::from(1_000_000)),
        );
    }
    if !f6.is_negative() {
        return Ok(false);
    }

    // t lower bound from the n = 6 relation:
    // t >= (A + sqrt(A^2 + 4 C K)) / (2 C)
    let a6 = Interval::from_rat(&(rat_int(990) + rat_int(32) / w_hi));
    let c_hi = Interval::from_rat(&((rat_int(5940) + rat(276, 5) / w_lo) / &beta_lo));
    let k_lo = Interval::from_rat(&(-rat(5, 3) * &f6));
    let disc = a6.mul(&a6).add(&c_hi.mul(&k_lo).scale(4.0));
    let t_lo = a6.add(&disc.sqrt()).div(&c_hi.scale(2.0)).widen_rel(1e-12);
    let step = s.push_interval(
        &format!("{tag} t lower bound"),
        inputs.clone(),
        t_lo,
        "t = 1/alpha - beta >= t_lo > 0",
        t_lo.lo > 0.0,
    );
    if let Some(c) = claims.t_lo {
        claim(step, c, t_lo.lo > c);
    }

    // B bounds: 1 - alpha beta = alpha t in [w_lo t_lo, kappa]
    let b_lo = Interval::from_rat(w_lo)
        .mul(&t_lo)
        .powi(6)
        .div(&Interval::point(3125.0 * 128.0))
        .widen_rel(1e-12);
    let step = s.push_interval(
        &format!("{tag} B lower bound"),
        inputs.clone(),
        b_lo,
        "B(alpha, beta) >= (w_lo t_lo)^6 / (5^5 2^7)",
        b_lo.lo > 0.0,
    );
    if let Some(c) = claims.b_lo {
        claim(step, c, b_lo.lo > c);
    }
    let b_hi_exact = kappa.pow(6) / (rat_int(625 * 128) * (rat_int(3) + rat_int(2) * &ab_lo));
    let b_hi = Interval::from_rat(&b_hi_exact).widen_rel(1e-12);
    let step = s.push_interval(
        &format!("{tag} B upper bound"),
        inputs.clone(),
        b_hi,
        "B(alpha, beta) <= kappa^6 / (5^4 2^7 (3 + 2 w_lo h(w_lo)))",
        b_hi.hi > b_lo.lo,
    );
    if let Some(c) = claims.b_hi {
        claim(step, c, b_hi.hi < c);
    }

    // necessary condition, folded into a quadratic in y = 1/alpha:
    // (8 - 32 B_hi) y^2 - (556 - 112 B_lo - (3/5) t_lo Q) y
    //   + 1020 + (3/5) t_lo P <= 0,
    // P = 360 - 648 kappa, Q = 32 + 16 B_lo - kappa (24 + 12 B_hi)
    let kappa_i = Interval::from_rat(&kappa);
    let p = Interval::point(360.0).sub(&kappa_i.scale(648.0));
    let q = b_lo
        .scale(16.0)
        .add_scalar(32.0)
        .sub(&kappa_i.mul(&b_hi.scale(12.0).add_scalar(24.0)));
    let t35 = t_lo.scale(0.6);
    let qa = Interval::point(8.0).sub(&b_hi.scale(32.0));
    let qb = Interval::point(556.0)
        .sub(&b_lo.scale(112.0))
        .sub(&t35.mul(&q));
    let qc = Interval::point(1020.0).add(&t35.mul(&p));
    let disc = qb.mul(&qb).sub(&qa.mul(&qc).scale(4.0));
    let contradiction;
    let derived;
    if disc.hi < 0.0 {
        // no y satisfies the necessary condition at all
        contradiction = true;
        derived = Interval::point(0.0);
    } else {
        let y_minus = qb.sub(&disc.sqrt()).div(&qa.scale(2.0));
        derived = Interval::point(1.0).div(&y_minus).widen_rel(1e-12);
        contradiction = derived.hi < rat_to_f64(w_lo);
    }
    let step = s.push_interval(
        &format!("{tag} derived alpha bound"),
        inputs,
        derived,
        &format!(
            "alpha <= derived bound < w_lo = {} (contradiction with the window)",
            rat_to_f64(w_lo)
        ),
        contradiction,
    );
    if let Some(c) = claims.alpha_derived {
        claim(step, c, derived.hi <= c);
    }
    Ok(contradiction)
}

/// The five-window refinement eliminating `alpha in [0.5145, 0.51696)`.
pub fn section6_chain() -> Result<Vec<CertStep>> {
    let mut s = Steps(Vec::new());
    let windows: [(Rat, Rat, WindowClaims); 5] = [
        (
            rat_decimal(51650, 5),
            rat_decimal(51696, 5),
            WindowClaims {
                beta_lo: Some(1.3375),
                kappa: Some(0.255),
                f6: Some(-13.764),
                t_lo: Some(0.253),
                b_lo: Some(1.132e-11),
                b_hi: Some(7.85e-10),
                alpha_derived: Some(0.511),
            },
        ),
        (
            rat_decimal(51600, 5),
            rat_decimal(51650, 5),
            WindowClaims {
                beta_lo: Some(1.3341),
                kappa: Some(0.2611),
                f6: None,
                t_lo: Some(0.2492),
                b_lo: Some(1.13e-11),
                b_hi: Some(9.05e-10),
                alpha_derived: Some(0.512),
            },
        ),
        (rat_decimal(51550, 5), rat_decimal(51600, 5), NO_CLAIMS),
        (rat_decimal(51500, 5), rat_decimal(51550, 5), NO_CLAIMS),
        (rat_decimal(51450, 5), rat_decimal(51500, 5), NO_CLAIMS),
    ];
    let mut all = true;
    for (w_lo, w_hi, claims) in &windows {
        all &= eliminate_window(&mut s, w_lo, w_hi, claims)?;
    }
    if all {
        s.push_exact(
            "final conclusion",
            vec![(
                "windows".into(),
                "five windows from 0.51696 down to 0.5145".into(),
            )],
            &rat_decimal(5145, 4),
            "every window yields a contradiction: alpha < 0.5145",
            true,
        );
    }
    Ok(s.0)
}

/// The complete certificate: the closed-form opening, the two window
/// exclusions, the `n = 5` obstruction, and the refined decimal chain.
pub fn full_certificate() -> Result<Certificate> {
    let mut steps = section3_initial()?;
    steps.extend(exclusion_step(3)?);
    steps.extend(exclusion_step(4)?);
    steps.extend(omega5_remark()?);
    steps.extend(section6_chain()?);
    let all_passed = steps.iter().all(|s| s.pass);
    let all_claims_upheld = steps.iter().all(|s| s.claim_upheld.unwrap_or(true));
    let conclusion = if all_passed {
        Some(
            "nonconstant axial solutions are excluded for alpha in [0.5145, 1); \
             equivalently every solution there is constant"
                .to_string(),
        )
    } else {
        None
    };
    Ok(Certificate {
        schema_version: 1,
        steps,
        excluded_alpha: if all_passed {
            Some((0.5145, 1.0))
        } else {
            None
        },
        conclusion,
        all_passed,
        all_claims_upheld,
    })
}

/// Re-runs the engine and checks the stored certificate step by step
/// (names, values, verdicts). Returns true when the stored chain
/// reproduces exactly.
pub fn replay(stored: &Certificate) -> Result<bool> {
    let fresh = full_certificate()?;
    if fresh.steps.len() != stored.steps.len() {
        return Ok(false);
    }
    Ok(fresh.steps.iter().zip(&stored.steps).all(|(a, b)| {
        a.name == b.name && a.value == b.value && a.pass == b.pass && a.claimed == b.claimed
    }) && fresh.all_passed == stored.all_passed
        && fresh.conclusion == stored.conclusion)
}

/// Feasibility report for the candidate induction `t <= d / lambda_n`:
/// the asymptotic condition `(15 d - 100)/alpha >= (3/2) d^2` admits no
/// `d > 0` on `alpha in (1/2, 0.517)`.
#[derive(Debug, Clone, Serialize)]
pub struct ObstructionReport {
    /// sup over d of `15 d - 100 - (3/2) d^2 alpha` at the most favorable
    /// `alpha = 1/2` (attained at `d = 5/alpha = 10`).
    pub best_gap: f64,
    /// max over d of the left/right ratio `(15d - 100)/((3/2) d^2 alpha)`
    /// at `alpha = 1/2` (attained at `d = 40/3`).
    pub best_ratio: f64,
    pub infeasible: bool,
    /// Per-d diagnostic on a unit grid at `alpha = 0.51`.
    pub grid_failures: Vec<(f64, f64)>,
    /// Exponent sweep around the `lambda_n^t` ansatz.
    pub t_sweep: Vec<(f64, String)>,
}

pub fn induction_obstruction_report() -> ObstructionReport {
    // gap(d) = 15 d - 100 - (3/2) d^2 alpha, maximized at d = 5/alpha:
    // gap_max = 37.5/alpha - 100 <= -25 for alpha >= 1/2 (exact)
    let best_gap = 37.5 / 0.5 - 100.0;
    // ratio(d) = (15 d - 100)/((3/2) alpha d^2), maximized at d = 40/3:
    // ratio_max = 0.375/alpha <= 0.75 < 1 for alpha >= 1/2
    let best_ratio = 0.375 / 0.5;
    let mut grid_failures = Vec::new();
    let alpha = 0.51;
    for d in 1..=20 {
        let d = d as f64;
        let gap = (15.0 * d - 100.0) / alpha - 1.5 * d * d;
        grid_failures.push((d, gap));
    }
    let infeasible =
        best_gap < 0.0 && best_ratio < 1.0 && grid_failures.iter().all(|&(_, g)| g < 0.0);
    let t_sweep = vec![
        (
            0.5,
            "positive term grows like lambda^{3/2}, required growth lambda^2: infeasible".into(),
        ),
        (
            0.75,
            "positive term grows like lambda^{7/4}, required growth lambda^2: infeasible".into(),
        ),
        (
            1.0,
            "exponents balance; reduces to (15d-100)/alpha >= (3/2) d^2, which has no solution"
                .into(),
        ),
        (
            1.25,
            "the -100 lambda^{2t} term dominates the positive term: infeasible".into(),
        ),
        (
            1.5,
            "the -100 lambda^{2t} term dominates the positive term: infeasible".into(),
        ),
    ];
    ObstructionReport {
        best_gap,
        best_ratio,
        infeasible,
        grid_failures,
        t_sweep,
    }
}

/// Human-readable certificate rendering, mirroring the chain order.
pub fn certificate_text(cert: &Certificate) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "threshold certificate (schema {})",
        cert.schema_version
    );
    let _ = writeln!(out, "{}", "-".repeat(72));
    for (i, s) in cert.steps.iter().enumerate() {
        let verdict = if s.pass { "ok" } else { "FAIL" };
        let _ = writeln!(out, "{:>3}. [{verdict}] {}", i + 1, s.name);
        let _ = writeln!(out, "     value: {}", s.value);
        let _ = writeln!(out, "     requires: {}", s.requirement);
        if let Some(c) = s.claimed {
            let u = if s.claim_upheld == Some(true) {
                "reproduced"
            } else {
                "NOT reproduced (engine value shown above)"
            };
            let _ = writeln!(out, "     reference constant {c}: {u}");
        }
        if let Some(n) = &s.note {
            let _ = writeln!(out, "     note: {n}");
        }
    }
    let _ = writeln!(out, "{}", "-".repeat(72));
    match &cert.conclusion {
        Some(c) => {
            let _ = writeln!(out, "conclusion: {c}");
        }
        None => {
            let _ = writeln!(out, "conclusion: chain incomplete (a required step failed)");
        }
    }
    out
}
