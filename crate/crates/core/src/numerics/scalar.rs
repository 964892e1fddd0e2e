//! Arithmetic backends shared by the model, solver and learning code.
//!
//! Exact rationals back the solver and the hardness verifiers; `f64` backs
//! simulation. The only semantic difference between the two is how ties are
//! detected: rationals compare exactly, floats within [`FLOAT_TIE_TOL`].

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number with arbitrary-precision numerator and denominator.
pub type Rational = BigRational;

/// Absolute tolerance used to detect ties in float mode.
pub const FLOAT_TIE_TOL: f64 = 1e-9;

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Tolerance below which two values count as tied. Zero for exact backends.
    fn tie_tol() -> Self;

    /// Tolerance for normalization checks (row sums, total mass).
    fn sum_tol() -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Converts a float. Exact for rationals (every finite `f64` is a dyadic rational).
    fn from_f64(x: f64) -> Self;

    fn as_f64(&self) -> f64;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// `a >= b` up to the backend tie tolerance.
    fn ge_tol(a: &Self, b: &Self) -> bool {
        a.clone() + Self::tie_tol() >= *b
    }

    /// `a == b` up to the backend tie tolerance.
    fn tie(a: &Self, b: &Self) -> bool {
        (a.clone() - b.clone()).abs() <= Self::tie_tol()
    }

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    fn tie_tol() -> Self {
        FLOAT_TIE_TOL
    }

    fn sum_tol() -> Self {
        1e-12
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

impl Scalar for Rational {
    fn tie_tol() -> Self {
        Rational::zero()
    }

    fn sum_tol() -> Self {
        Rational::zero()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).expect("finite float")
    }

    fn as_f64(&self) -> f64 {
        // Direct conversion overflows for huge numerators; scale through the ratio.
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                let bits = self.numer().bits().max(self.denom().bits()) as i64 - 900;
                let shift = bits.max(0) as usize;
                let n = (self.numer() >> shift).to_f64().unwrap_or(0.0);
                let d = (self.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
                n / d
            }
        }
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn ge_tol(a: &Self, b: &Self) -> bool {
        a >= b
    }

    fn tie(a: &Self, b: &Self) -> bool {
        a == b
    }
}

/// Exact rational `num/den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

/// Inner product over two equally long slices.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Parses exact rationals from `"3/7"`, `"-0.125"`, `"1e-3"` or `"2"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().ok()?
    };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}
