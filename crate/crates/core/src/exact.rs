//! Exact rational arithmetic, quadratic field extensions `Q(sqrt(d))`,
//! and outward-rounded f64 intervals.
//!
//! The certificate engine computes every rational expression exactly,
//! keeps algebraic thresholds as `(p + sqrt(q))/r` with exact sign
//! arithmetic, and falls back to directed-rounded intervals only where a
//! value genuinely mixes two quadratic fields.

use std::cmp::Ordering;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};

/// Exact rational.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `n / 10^digits`, for decimal window endpoints.
pub fn rat_decimal(n: i64, digits: u32) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(10i64.pow(digits)))
}

/// Directed next float towards +infinity.
pub fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

/// Directed next float towards -infinity.
pub fn next_down(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits - 1)
    } else {
        f64::from_bits(bits + 1)
    }
}

/// Closed f64 interval with outward rounding after every operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    fn outward(lo: f64, hi: f64) -> Self {
        Self::new(next_down(lo), next_up(hi))
    }

    /// Encloses an exact rational (conversion may round either way).
    pub fn from_rat(r: &Rat) -> Self {
        let v = rat_to_f64(r);
        Self::outward(v, v)
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Widens relatively; certificate enclosures carry at least `rel`
    /// slack so that replay on other hardware cannot flip a comparison.
    pub fn widen_rel(&self, rel: f64) -> Self {
        let m = rel * self.lo.abs().max(self.hi.abs()).max(1e-300);
        Self::new(self.lo - m, self.hi + m)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::outward(self.lo + o.lo, self.hi + o.hi)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::outward(self.lo - o.hi, self.hi - o.lo)
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.hi, -self.lo)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        Self::outward(
            c.iter().cloned().fold(f64::INFINITY, f64::min),
            c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    pub fn div(&self, o: &Self) -> Self {
        assert!(
            o.lo > 0.0 || o.hi < 0.0,
            "division by an interval containing zero: [{}, {}]",
            o.lo,
            o.hi
        );
        let c = [
            self.lo / o.lo,
            self.lo / o.hi,
            self.hi / o.lo,
            self.hi / o.hi,
        ];
        Self::outward(
            c.iter().cloned().fold(f64::INFINITY, f64::min),
            c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    pub fn sqrt(&self) -> Self {
        assert!(self.lo >= 0.0, "sqrt of negative interval");
        Self::outward(self.lo.sqrt(), self.hi.sqrt())
    }

    /// Integer power (nonnegative exponent).
    pub fn powi(&self, e: u32) -> Self {
        let mut r = Interval::point(1.0);
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn scale(&self, s: f64) -> Self {
        self.mul(&Interval::point(s))
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        self.add(&Interval::point(s))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lo, self.hi)
    }
}

/// Rational to f64 (within one ulp; callers wrap in an [`Interval`]).
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back through a quotient of f64-range parts
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Strips square factors: returns `(s, q)` with `n = s^2 q`, `q` squarefree.
pub fn squarefree_split(n: i64) -> (i64, i64) {
    assert!(n > 0);
    let mut s = 1i64;
    let mut q = n;
    let mut p = 2i64;
    while p * p <= q {
        while q % (p * p) == 0 {
            q /= p * p;
            s *= p;
        }
        p += 1;
    }
    (s, q)
}

/// Exact element `a + b sqrt(d)` of a real quadratic field (`d > 1`
/// squarefree).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadExt {
    pub a: Rat,
    pub b: Rat,
    pub d: i64,
}

impl QuadExt {
    pub fn new(a: Rat, b: Rat, d: i64) -> Self {
        debug_assert!(d > 1, "degenerate extension d = {d}");
        Self { a, b, d }
    }

    pub fn from_rat(a: Rat, d: i64) -> Self {
        Self::new(a, Rat::zero(), d)
    }

    /// `(p + sqrt(q))/r` where `q = s^2 d`.
    pub fn root_form(p: i64, q: i64, r: i64) -> Self {
        let (s, d) = squarefree_split(q);
        Self::new(rat(p, r), rat(s, r), d)
    }

    fn same_field(&self, o: &Self) -> bool {
        self.d == o.d || self.b.is_zero() || o.b.is_zero()
    }

    fn field_of(&self, o: &Self) -> i64 {
        if self.b.is_zero() {
            o.d
        } else {
            self.d
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert!(self.same_field(o), "mixed fields {} vs {}", self.d, o.d);
        Self::new(&self.a + &o.a, &self.b + &o.b, self.field_of(o))
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert!(self.same_field(o), "mixed fields {} vs {}", self.d, o.d);
        Self::new(&self.a - &o.a, &self.b - &o.b, self.field_of(o))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert!(self.same_field(o), "mixed fields {} vs {}", self.d, o.d);
        let d = Rat::from_integer(BigInt::from(self.field_of(o)));
        Self::new(
            &self.a * &o.a + &self.b * &o.b * &d,
            &self.a * &o.b + &self.b * &o.a,
            self.field_of(o),
        )
    }

    pub fn recip(&self) -> Self {
        let d = Rat::from_integer(BigInt::from(self.d));
        let denom = &self.a * &self.a - &self.b * &self.b * &d;
        assert!(!denom.is_zero(), "inverting zero");
        Self::new(&self.a / &denom, -&self.b / &denom, self.d)
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn add_rat(&self, r: &Rat) -> Self {
        Self::new(&self.a + r, self.b.clone(), self.d)
    }

    pub fn mul_rat(&self, r: &Rat) -> Self {
        Self::new(&self.a * r, &self.b * r, self.d)
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.a, -&self.b, self.d)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign of `a + b sqrt(d)`.
    pub fn sign(&self) -> Ordering {
        let sa = self.a.cmp(&Rat::zero());
        let sb = self.b.cmp(&Rat::zero());
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            _ => {
                // opposite signs: compare a^2 against b^2 d
                let lhs = &self.a * &self.a;
                let rhs = &self.b * &self.b * Rat::from_integer(BigInt::from(self.d));
                match lhs.cmp(&rhs) {
                    Ordering::Equal => Ordering::Equal,
                    Ordering::Greater => sa,
                    Ordering::Less => sb,
                }
            }
        }
    }

    /// Exact comparison against a rational.
    pub fn cmp_rat(&self, r: &Rat) -> Ordering {
        self.sub(&Self::from_rat(r.clone(), self.d)).sign()
    }

    /// Outward-rounded f64 enclosure.
    pub fn to_interval(&self) -> Interval {
        let sq = Interval::from_rat(&Rat::from_integer(BigInt::from(self.d))).sqrt();
        Interval::from_rat(&self.a).add(&Interval::from_rat(&self.b).mul(&sq))
    }

    pub fn to_f64(&self) -> f64 {
        self.to_interval().mid()
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {} sqrt({})", self.a, self.b, self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_arith_outward() {
        let a = Interval::point(1.0).div(&Interval::point(3.0));
        assert!(a.lo < 1.0 / 3.0 && a.hi > 1.0 / 3.0 || (a.lo <= 1.0 / 3.0 && a.hi >= 1.0 / 3.0));
        assert!(a.width() > 0.0);
        let b = a.mul(&Interval::point(3.0));
        assert!(b.lo <= 1.0 && 1.0 <= b.hi);
    }

    #[test]
    fn squarefree() {
        assert_eq!(squarefree_split(17281), (1, 17281));
        assert_eq!(squarefree_split(31096), (26, 46)); // 31096 = 2^2 13^2 46
        assert_eq!(squarefree_split(276496), (4, 17281));
        assert_eq!(squarefree_split(18), (3, 2));
    }

    #[test]
    fn quadext_roots_and_signs() {
        // alpha_3 = (139 + sqrt(17281))/510 solves 255 a^2 - 139 a + 2 = 0
        let a3 = QuadExt::root_form(139, 17281, 510);
        let lhs = a3
            .mul(&a3)
            .mul_rat(&rat_int(255))
            .sub(&a3.mul_rat(&rat_int(139)))
            .add_rat(&rat_int(2));
        assert!(lhs.is_zero(), "quadratic not annihilated: {lhs}");
        assert_eq!(a3.cmp_rat(&rat(1, 2)), Ordering::Greater);
        assert_eq!(a3.cmp_rat(&rat_int(1)), Ordering::Less);
        let enc = a3.to_interval();
        assert!(enc.lo <= 0.530_308_27 && 0.530_308_26 <= enc.hi);
        // exact decimal comparisons
        assert_eq!(a3.cmp_rat(&rat_decimal(5303, 4)), Ordering::Greater);
        assert_eq!(a3.cmp_rat(&rat_decimal(5304, 4)), Ordering::Less);
    }

    #[test]
    fn quadext_recip_roundtrip() {
        let x = QuadExt::new(rat(3, 7), rat(-2, 5), 7774);
        let prod = x.mul(&x.recip());
        assert!(prod.sub(&QuadExt::from_rat(rat_int(1), 7774)).is_zero());
    }
}
