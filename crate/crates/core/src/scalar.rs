//! Numeric field abstraction shared by the LP, polytope and network code.
//!
//! Two implementations exist: [`Rational`] (exact, zero tolerance) and `f64`
//! (comparisons against a fixed feasibility tolerance). Everything above this
//! module is written once, generically.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Rational = num_rational::BigRational;

/// Feasibility tolerance for floating point comparisons.
pub const FEAS_TOL: f64 = 1e-9;

/// Optimality tolerance for floating point reduced costs.
pub const OPT_TOL: f64 = 1e-8;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True for exact arithmetic.
    const EXACT: bool;

    /// Comparison slack; zero in exact mode.
    fn tol() -> Self;

    /// Slack for reduced-cost sign tests in the simplex method.
    fn opt_tol() -> Self {
        Self::tol()
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("i64 fits every scalar")
    }

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Parse a decimal literal (`-1.25`, `3e-2`) or a fraction `p/q`.
    fn parse_literal(text: &str) -> Option<Self>;

    /// Canonical text form: integers plain, fractions as `p/q` (exact mode),
    /// shortest round-trip decimal (float mode).
    fn literal(&self) -> String;

    fn is_finite_value(&self) -> bool {
        true
    }

    /// Positive factor that brings a (not all-zero) row to canonical scale.
    fn row_scale(coeffs: &[Self]) -> Self;

    fn to_rational(&self) -> Rational;

    fn from_rational(value: &Rational) -> Self;

    fn near_zero(&self) -> bool {
        self.abs() <= Self::tol()
    }

    /// `self > other` beyond tolerance.
    fn gt_tol(&self, other: &Self) -> bool {
        self.clone() - other.clone() > Self::tol()
    }

    /// `self < other` beyond tolerance.
    fn lt_tol(&self, other: &Self) -> bool {
        other.clone() - self.clone() > Self::tol()
    }

    /// `self <= other` up to tolerance.
    fn le_tol(&self, other: &Self) -> bool {
        !self.gt_tol(other)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).near_zero()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tol() -> Self {
        FEAS_TOL
    }

    fn opt_tol() -> Self {
        OPT_TOL
    }

    fn parse_literal(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            if d == 0.0 {
                return None;
            }
            return Some(n / d).filter(|v| v.is_finite());
        }
        text.parse::<f64>().ok().filter(|v| v.is_finite())
    }

    fn literal(&self) -> String {
        if self.fract() == 0.0 && self.abs() < 1e15 {
            format!("{}", *self as i64)
        } else {
            format!("{}", self)
        }
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn row_scale(coeffs: &[Self]) -> Self {
        1.0 / coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }

    fn from_rational(value: &Rational) -> Self {
        value.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn tol() -> Self {
        Rational::zero()
    }

    fn parse_literal(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n = parse_decimal(n.trim())?;
            let d = parse_decimal(d.trim())?;
            if d.is_zero() {
                return None;
            }
            return Some(n / d);
        }
        parse_decimal(text)
    }

    fn literal(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn near_zero(&self) -> bool {
        self.is_zero()
    }

    fn gt_tol(&self, other: &Self) -> bool {
        self > other
    }

    fn row_scale(coeffs: &[Self]) -> Self {
        let lcm = coeffs.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let gcd = coeffs
            .iter()
            .filter(|r| !r.is_zero())
            .map(|r| (r * Rational::from_integer(lcm.clone())).to_integer().abs())
            .fold(BigInt::zero(), |acc, n| acc.gcd(&n));
        Rational::new(lcm, gcd)
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn lt_tol(&self, other: &Self) -> bool {
        self < other
    }
}

/// Exact parse of a decimal literal with optional exponent.
fn parse_decimal(text: &str) -> Option<Rational> {
    if text.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], i32::from_str(&text[pos + 1..]).ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigInt::from_str(if all_digits.is_empty() { "0" } else { &all_digits }).ok()?;
    if negative {
        value = -value;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let result = if scale >= 0 {
        Rational::from_integer(value * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(value, num_traits::pow(ten, (-scale) as usize))
    };
    Some(result)
}

/// Scale a row of coefficients (and its right-hand side) by a positive factor
/// into canonical form.
///
/// Exact mode: coefficients become coprime integers. Float mode: the largest
/// coefficient magnitude becomes 1. All-zero rows are returned unchanged.
pub fn normalize_row<S: Scalar>(coeffs: &mut [S], rhs: &mut S) {
    if coeffs.iter().all(|c| c.is_zero()) {
        return;
    }
    let factor = S::row_scale(coeffs);
    for c in coeffs.iter_mut() {
        *c = c.clone() * factor.clone();
    }
    *rhs = rhs.clone() * factor;
}

/// Convert between scalar types; exact when both sides are exact.
pub fn convert<A: Scalar, B: Scalar>(value: &A) -> B {
    B::from_rational(&value.to_rational())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(Rational::parse_literal("0.5"), Some(q(1, 2)));
        assert_eq!(Rational::parse_literal("-6.5"), Some(q(-13, 2)));
        assert_eq!(Rational::parse_literal("1e-3"), Some(q(1, 1000)));
        assert_eq!(Rational::parse_literal("2.5E2"), Some(q(250, 1)));
        assert_eq!(Rational::parse_literal("1/3"), Some(q(1, 3)));
        assert_eq!(Rational::parse_literal(" -4 / 6 "), Some(q(-2, 3)));
        assert_eq!(Rational::parse_literal(".25"), Some(q(1, 4)));
        assert_eq!(Rational::parse_literal("1/0"), None);
        assert_eq!(Rational::parse_literal("abc"), None);
        assert_eq!(Rational::parse_literal(""), None);
        assert_eq!(f64::parse_literal("1/4"), Some(0.25));
        assert_eq!(f64::parse_literal("inf"), None);
    }

    #[test]
    fn literal_round_trip() {
        for r in [q(1, 3), q(-7, 2), q(5, 1), q(0, 1)] {
            assert_eq!(Rational::parse_literal(&r.literal()), Some(r));
        }
        assert_eq!(q(13, 30).literal(), "13/30");
        assert_eq!(0.45f64.literal(), "0.45");
        assert_eq!(3.0f64.literal(), "3");
    }

    #[test]
    fn exact_normalization_gives_coprime_integers() {
        let mut row = vec![q(1, 3), q(-1, 3), q(0, 1)];
        let mut rhs = q(2, 1);
        normalize_row(&mut row, &mut rhs);
        assert_eq!(row, vec![q(1, 1), q(-1, 1), q(0, 1)]);
        assert_eq!(rhs, q(6, 1));

        let mut row = vec![q(2, 5), q(4, 5)];
        let mut rhs = q(1, 1);
        normalize_row(&mut row, &mut rhs);
        assert_eq!(row, vec![q(1, 1), q(2, 1)]);
        assert_eq!(rhs, q(5, 2));
    }

    #[test]
    fn float_normalization_scales_to_unit_max() {
        let mut row = vec![0.5, -2.0];
        let mut rhs = 4.0;
        normalize_row(&mut row, &mut rhs);
        assert_eq!(row, vec![0.25, -1.0]);
        assert_eq!(rhs, 2.0);
    }
}
