//! Numeric kinds used throughout the crate.
//!
//! Every algorithm is generic over [`Scalar`]. Two instantiations exist:
//! [`Rational`] for exact decisions and `f64` for noisy data, where every
//! equality test is replaced by a spread-versus-tolerance comparison.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{
    CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, FromPrimitive, Num, One, Signed, ToPrimitive,
    Zero,
};

/// Arithmetic required by the weight algorithms.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
{
    /// `true` when arithmetic is exact and a zero tolerance is meaningful.
    const EXACT: bool;

    /// Parses a decimal (`-1.25`, `3e-2`) or fraction (`7/3`) literal.
    fn parse_value(text: &str) -> Option<Self>;

    /// Converts a sampled float into this kind. Rationals snap to a 1/1000
    /// grid so generated weights have short exact decimal expansions.
    fn from_grid(x: f64) -> Self;

    /// Lossless text form: `p/q` for rationals, shortest round-trip for floats.
    fn exact_text(&self) -> String;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    /// Integers `k·v` sharing one positive scale `k`, when every value is a
    /// small exact fraction. Lets hot loops run in machine integers.
    fn scaled_integers(_values: &[&Self]) -> Option<(Vec<i64>, Self)> {
        None
    }

    fn half(&self) -> Self {
        self.clone() / Self::two()
    }

    fn from_count(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize fits the scalar kind")
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn parse_value(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((p, q)) = text.split_once('/') {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            if q == 0.0 {
                return None;
            }
            return Some(p / q);
        }
        let v: f64 = text.parse().ok()?;
        v.is_finite().then_some(v)
    }

    fn from_grid(x: f64) -> Self {
        x
    }

    fn exact_text(&self) -> String {
        format!("{self}")
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Small(Ratio<i128>),
    Big(BigRational),
}

/// Exact rational number.
///
/// Values whose numerator and denominator fit in `i128` are kept inline;
/// any operation that would overflow is redone in arbitrary precision and
/// the result is shrunk back when it fits again.
#[derive(Clone, Debug)]
pub struct Rational(Repr);

fn fits(v: i128) -> bool {
    v != i128::MIN
}

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(Repr::Small(Ratio::new(numer as i128, denom as i128)))
    }

    pub fn from_integer(v: i64) -> Self {
        Rational(Repr::Small(Ratio::from_integer(v as i128)))
    }

    pub fn from_big(v: BigRational) -> Self {
        let shrunk = match (v.numer().to_i128(), v.denom().to_i128()) {
            (Some(n), Some(d)) if fits(n) && fits(d) => Some(Ratio::new_raw(n, d)),
            _ => None,
        };
        match shrunk {
            Some(r) => Rational(Repr::Small(r)),
            None => Rational(Repr::Big(v)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(r) => BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_integer(),
            Repr::Big(b) => b.is_integer(),
        }
    }

    fn small(r: Ratio<i128>) -> Self {
        if fits(*r.numer()) && fits(*r.denom()) {
            Rational(Repr::Small(r))
        } else {
            Self::from_big(BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())))
        }
    }

    fn binop(
        &self,
        rhs: &Self,
        small: impl FnOnce(&Ratio<i128>, &Ratio<i128>) -> Option<Ratio<i128>>,
        big: impl FnOnce(BigRational, BigRational) -> BigRational,
    ) -> Self {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(r) = small(a, b) {
                return Self::small(r);
            }
        }
        Self::from_big(big(self.to_big(), rhs.to_big()))
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Self) -> Self {
        self.binop(&rhs, |a, b| a.checked_add(b), |a, b| a + b)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Self) -> Self {
        self.binop(&rhs, |a, b| a.checked_sub(b), |a, b| a - b)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Self) -> Self {
        self.binop(&rhs, |a, b| a.checked_mul(b), |a, b| a * b)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by zero");
        self.binop(&rhs, |a, b| a.checked_div(b), |a, b| a / b)
    }
}

impl Rem for Rational {
    type Output = Rational;
    fn rem(self, rhs: Self) -> Self {
        Self::from_big(self.to_big() % rhs.to_big())
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Self {
        match self.0 {
            Repr::Small(r) => Self::small(-r),
            Repr::Big(b) => Self::from_big(-b),
        }
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational(Repr::Small(Ratio::zero()))
    }
    fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_zero(),
            Repr::Big(b) => b.is_zero(),
        }
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational(Repr::Small(Ratio::one()))
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Rational {}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Small and Big never hold the same value, so hashing the big form is consistent.
        let b = self.to_big();
        b.numer().hash(state);
        b.denom().hash(state);
    }
}

impl Num for Rational {
    type FromStrRadixErr = ParseRationalError;
    fn from_str_radix(text: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(ParseRationalError(text.to_string()));
        }
        text.parse()
    }
}

impl Signed for Rational {
    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn abs_sub(&self, other: &Self) -> Self {
        if self <= other {
            Self::zero()
        } else {
            self.clone() - other.clone()
        }
    }
    fn signum(&self) -> Self {
        match self.cmp(&Self::zero()) {
            Ordering::Less => -Self::one(),
            Ordering::Equal => Self::zero(),
            Ordering::Greater => Self::one(),
        }
    }
    fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_positive(),
            Repr::Big(b) => b.is_positive(),
        }
    }
    fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_negative(),
            Repr::Big(b) => b.is_negative(),
        }
    }
}

impl FromPrimitive for Rational {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Self::from_integer(n))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Self::small(Ratio::from_integer(n as i128)))
    }
    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Self::from_big)
    }
}

impl ToPrimitive for Rational {
    fn to_i64(&self) -> Option<i64> {
        if !self.is_integer() {
            return None;
        }
        self.to_big().numer().to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        if !self.is_integer() {
            return None;
        }
        self.to_big().numer().to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        match &self.0 {
            Repr::Small(r) => {
                let (n, d) = (*r.numer(), *r.denom());
                if n.unsigned_abs() < (1u128 << 53) && d < (1i128 << 53) {
                    Some(n as f64 / d as f64)
                } else {
                    self.to_big().to_f64()
                }
            }
            Repr::Big(b) => b.to_f64(),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(r) => write!(f, "{r}"),
            Repr::Big(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        parse_rational(text).ok_or_else(|| ParseRationalError(text.to_string()))
    }
}

fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::from_big(BigRational::new(p, q)));
    }

    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(at) => (&body[..at], body[at + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(Rational::from_big(value))
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn parse_value(text: &str) -> Option<Self> {
        parse_rational(text)
    }

    fn from_grid(x: f64) -> Self {
        Rational::new((x * 1000.0).round() as i64, 1000)
    }

    fn scaled_integers(values: &[&Self]) -> Option<(Vec<i64>, Self)> {
        const LIMIT: i128 = 1 << 40;
        let mut scale: i128 = 1;
        for v in values {
            let Repr::Small(r) = &v.0 else { return None };
            scale = num_integer::Integer::lcm(&scale, r.denom());
            if scale > LIMIT {
                return None;
            }
        }
        let ints = values
            .iter()
            .map(|v| match &v.0 {
                Repr::Small(r) => {
                    let k = r.numer().checked_mul(&(scale / r.denom()))?;
                    (k.abs() < LIMIT).then_some(k as i64)
                }
                Repr::Big(_) => None,
            })
            .collect::<Option<Vec<i64>>>()?;
        Some((ints, Rational::from_integer(scale as i64)))
    }

    fn exact_text(&self) -> String {
        self.to_string()
    }
}

/// Midpoint of `[lo, hi]`.
pub fn midrange<T: Scalar>(lo: &T, hi: &T) -> T {
    (lo.clone() + hi.clone()).half()
}

/// Running minimum and maximum of a stream of values.
#[derive(Debug, Clone)]
pub struct Range<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Range<T> {
    pub fn new(v: T) -> Self {
        Range { lo: v.clone(), hi: v }
    }

    pub fn push(&mut self, v: T) {
        if v < self.lo {
            self.lo = v;
        } else if v > self.hi {
            self.hi = v;
        }
    }

    pub fn spread(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }

    pub fn mid(&self) -> T {
        midrange(&self.lo, &self.hi)
    }
}

/// Formats `x` with `digits` significant digits, `%g` style, trailing zeros trimmed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits.saturating_sub(1), x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn parses_decimal_and_fraction_forms() {
        assert_eq!(Rational::parse_value("3.0"), Some(q(3, 1)));
        assert_eq!(Rational::parse_value("-1.25"), Some(q(-5, 4)));
        assert_eq!(Rational::parse_value("7/3"), Some(q(7, 3)));
        assert_eq!(Rational::parse_value("1.5e-3"), Some(q(3, 2000)));
        assert_eq!(Rational::parse_value("2E2"), Some(q(200, 1)));
        assert_eq!(Rational::parse_value(".5"), Some(q(1, 2)));
        assert_eq!(Rational::parse_value("1/0"), None);
        assert_eq!(Rational::parse_value("abc"), None);
        assert_eq!(Rational::parse_value("1.2.3"), None);
        assert_eq!(f64::parse_value("1/4"), Some(0.25));
    }

    #[test]
    fn overflow_promotes_and_shrinks_back() {
        let big = Rational::from_integer(i64::MAX) * Rational::from_integer(i64::MAX);
        let bigger = big.clone() * big.clone();
        assert!(matches!(bigger.0, Repr::Big(_)));
        let back = bigger / big.clone();
        assert!(matches!(back.0, Repr::Small(_)));
        assert_eq!(back, big);
    }

    #[test]
    fn mixed_representations_compare_by_value() {
        let huge = Rational::from_integer(i64::MAX).to_big() * BigRational::from_integer(BigInt::from(u128::MAX));
        let huge = Rational::from_big(huge);
        assert!(huge > Rational::from_integer(1));
        assert!(-huge.clone() < Rational::zero());
        assert_eq!(huge.clone() - huge, Rational::zero());
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(7.0, 12), "7");
        assert_eq!(format_significant(0.1, 12), "0.1");
        assert_eq!(format_significant(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_significant(-2.5, 12), "-2.5");
        assert_eq!(format_significant(1.5e-9, 12), "1.5e-9");
        assert_eq!(format_significant(123456789012345.0, 12), "1.23456789012e14");
    }
}
