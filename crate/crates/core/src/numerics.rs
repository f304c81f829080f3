//! Number representations and tolerance-aware comparisons.
//!
//! Every algorithm in the crate is generic over [`Real`]. Two implementations
//! ship: `f64` (the default, compared with tolerances) and [`Rational`]
//! (arbitrary precision, compared exactly). The tolerances of a
//! [`NumericContext`] are plain values of the representation, so exact mode is
//! simply the case `epsilon = feastol = 0`.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Which arithmetic a problem is processed with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NumericMode {
    Float64,
    Rational,
}

impl NumericMode {
    pub fn name(self) -> &'static str {
        match self {
            NumericMode::Float64 => "float",
            NumericMode::Rational => "rational",
        }
    }
}

impl std::str::FromStr for NumericMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "float" | "float64" | "double" | "f64" => Ok(NumericMode::Float64),
            "rational" | "exact" => Ok(NumericMode::Rational),
            other => Err(format!("unknown numeric mode `{other}`")),
        }
    }
}

/// Arithmetic used by the presolver. Operations are by value; `f64` is `Copy`
/// and rationals are cheap enough to clone for the problem sizes involved.
pub trait Real:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: NumericMode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Exact for rationals (every finite double is a dyadic rational).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn floor(&self) -> Self;
    fn ceil(&self) -> Self;
    fn round(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// `Some(n)` when the value is exactly the integer `n` and fits.
    fn to_i64_exact(&self) -> Option<i64>;
    /// Parses decimal literals (`-1.25`, `3e-2`) and, as an extension, `p/q`.
    fn parse(s: &str) -> Option<Self>;
    /// Lossless textual form, parseable by [`Real::parse`].
    fn to_exact_string(&self) -> String;
    fn encode(&self, out: &mut Vec<u8>);
    fn decode(input: &mut &[u8]) -> Option<Self>;

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

impl Real for f64 {
    const MODE: NumericMode = NumericMode::Float64;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn ceil(&self) -> Self {
        f64::ceil(*self)
    }
    fn round(&self) -> Self {
        f64::round(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_i64_exact(&self) -> Option<i64> {
        if self.fract() == 0.0 && f64::abs(*self) < 9.007_199_254_740_992e15 {
            Some(*self as i64)
        } else {
            None
        }
    }
    fn parse(s: &str) -> Option<Self> {
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            return if q == 0.0 { None } else { Some(p / q) };
        }
        let v: f64 = s.trim().parse().ok()?;
        v.is_finite().then_some(v)
    }
    fn to_exact_string(&self) -> String {
        format_f64(*self)
    }
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn decode(input: &mut &[u8]) -> Option<Self> {
        if input.len() < 8 {
            return None;
        }
        let (head, rest) = input.split_at(8);
        *input = rest;
        Some(f64::from_le_bytes(head.try_into().ok()?))
    }
}

/// Shortest round-trip text for a double; integers print without a fraction.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.fract() == 0.0 && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    format!("{v:?}")
}

impl Real for Rational {
    const MODE: NumericMode = NumericMode::Rational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(Zero::zero)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            if Signed::is_negative(self) {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn floor(&self) -> Self {
        BigRational::floor(self)
    }
    fn ceil(&self) -> Self {
        BigRational::ceil(self)
    }
    fn round(&self) -> Self {
        BigRational::round(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_i64_exact(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }
    fn parse(s: &str) -> Option<Self> {
        parse_rational(s.trim())
    }
    fn to_exact_string(&self) -> String {
        format_rational(self)
    }
    fn encode(&self, out: &mut Vec<u8>) {
        let text = format!("{}/{}", self.numer(), self.denom());
        out.extend_from_slice(&(text.len() as u32).to_le_bytes());
        out.extend_from_slice(text.as_bytes());
    }
    fn decode(input: &mut &[u8]) -> Option<Self> {
        if input.len() < 4 {
            return None;
        }
        let len = u32::from_le_bytes(input[..4].try_into().ok()?) as usize;
        if input.len() < 4 + len {
            return None;
        }
        let text = std::str::from_utf8(&input[4..4 + len]).ok()?;
        let value = parse_rational(text)?;
        *input = &input[4 + len..];
        Some(value)
    }
}

fn parse_rational(s: &str) -> Option<Rational> {
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p.trim())?;
        let q = parse_rational(q.trim())?;
        if Zero::is_zero(&q) {
            return None;
        }
        return Some(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Terminating decimals are written as decimals, everything else as `p/q`.
fn format_rational(v: &Rational) -> String {
    if v.is_integer() {
        return v.numer().to_string();
    }
    let mut denom = v.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while denom.is_multiple_of(&two) {
        denom /= &two;
        twos += 1;
    }
    while denom.is_multiple_of(&five) {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() || twos.max(fives) > 40 {
        return format!("{}/{}", v.numer(), v.denom());
    }
    let digits = twos.max(fives);
    let scaled = v * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let mut n = scaled.to_integer();
    let negative = Signed::is_negative(&n);
    if negative {
        n = -n;
    }
    let mut s = n.to_string();
    if s.len() <= digits {
        s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
    }
    let (int_part, frac_part) = s.split_at(s.len() - digits);
    format!("{}{}.{}", if negative { "-" } else { "" }, int_part, frac_part)
}

/// Tolerances and mode used for every comparison in a presolve run.
#[derive(Clone, Debug)]
pub struct NumericContext<R> {
    pub epsilon: R,
    pub feastol: R,
    pub hugeval: R,
    pub mode: NumericMode,
}

impl<R: Real> Default for NumericContext<R> {
    fn default() -> Self {
        match R::MODE {
            NumericMode::Float64 => NumericContext {
                epsilon: R::from_f64(1e-9),
                feastol: R::from_f64(1e-6),
                hugeval: R::from_f64(1e8),
                mode: NumericMode::Float64,
            },
            NumericMode::Rational => NumericContext::exact(),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ContextError {
    #[error("tolerances must be non-negative with epsilon <= feastol")]
    Tolerances,
    #[error("rational mode requires zero tolerances")]
    InexactRational,
    #[error("hugeval must be positive")]
    Hugeval,
}

impl<R: Real> NumericContext<R> {
    pub fn exact() -> Self {
        NumericContext {
            epsilon: R::zero(),
            feastol: R::zero(),
            hugeval: R::from_f64(1e8),
            mode: R::MODE,
        }
    }

    pub fn with_tolerances(epsilon: R, feastol: R, hugeval: R) -> Result<Self, ContextError> {
        let ctx = NumericContext {
            epsilon,
            feastol,
            hugeval,
            mode: R::MODE,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<(), ContextError> {
        if self.epsilon.is_negative() || self.feastol.is_negative() || self.epsilon > self.feastol
        {
            return Err(ContextError::Tolerances);
        }
        if self.mode == NumericMode::Rational
            && (!self.epsilon.is_zero() || !self.feastol.is_zero())
        {
            return Err(ContextError::InexactRational);
        }
        if !self.hugeval.is_positive() {
            return Err(ContextError::Hugeval);
        }
        Ok(())
    }

    fn scale(a: &R, b: &R) -> R {
        R::max_of(&R::one(), &R::max_of(&a.abs(), &b.abs()))
    }

    fn within(&self, diff: R, a: &R, b: &R, tol: &R) -> bool {
        if tol.is_zero() {
            return diff.is_zero();
        }
        diff.abs() <= tol.clone() * Self::scale(a, b)
    }

    /// `|a - b| <= epsilon * max(1, |a|, |b|)`.
    pub fn approx_eq(&self, a: &R, b: &R) -> bool {
        self.within(a.clone() - b.clone(), a, b, &self.epsilon)
    }

    pub fn is_eq(&self, a: &R, b: &R) -> bool {
        self.approx_eq(a, b)
    }

    /// `a` is at most `b` up to epsilon.
    pub fn is_le(&self, a: &R, b: &R) -> bool {
        a <= b || self.approx_eq(a, b)
    }

    /// `a` is strictly smaller than `b` by more than epsilon.
    pub fn is_lt(&self, a: &R, b: &R) -> bool {
        !self.is_le(b, a)
    }

    pub fn is_ge(&self, a: &R, b: &R) -> bool {
        self.is_le(b, a)
    }

    pub fn is_gt(&self, a: &R, b: &R) -> bool {
        self.is_lt(b, a)
    }

    pub fn is_zero(&self, a: &R) -> bool {
        self.approx_eq(a, &R::zero())
    }

    pub fn is_feas_eq(&self, a: &R, b: &R) -> bool {
        self.within(a.clone() - b.clone(), a, b, &self.feastol)
    }

    pub fn is_feas_le(&self, a: &R, b: &R) -> bool {
        a <= b || self.is_feas_eq(a, b)
    }

    pub fn is_feas_lt(&self, a: &R, b: &R) -> bool {
        !self.is_feas_le(b, a)
    }

    pub fn is_feas_ge(&self, a: &R, b: &R) -> bool {
        self.is_feas_le(b, a)
    }

    pub fn is_feas_gt(&self, a: &R, b: &R) -> bool {
        self.is_feas_lt(b, a)
    }

    /// Distance to the nearest integer is at most `feastol` (absolute).
    pub fn is_integral(&self, v: &R) -> bool {
        let diff = (v.clone() - v.round()).abs();
        diff <= self.feastol
    }

    /// Floor that treats values within `feastol` below an integer as that integer.
    pub fn feas_floor(&self, v: &R) -> R {
        (v.clone() + self.feastol.clone()).floor()
    }

    pub fn feas_ceil(&self, v: &R) -> R {
        (v.clone() - self.feastol.clone()).ceil()
    }

    pub fn is_huge(&self, v: &R) -> bool {
        v.abs() >= self.hugeval
    }
}

/// A value that is finite or one of the two infinities.
#[derive(Clone, Debug, PartialEq)]
pub enum ExtendedValue<R> {
    NegInf,
    Finite(R),
    PosInf,
}

impl<R: Real> ExtendedValue<R> {
    pub fn finite(&self) -> Option<&R> {
        match self {
            ExtendedValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedValue::Finite(_))
    }

    pub fn lower(bound: Option<R>) -> Self {
        bound.map_or(ExtendedValue::NegInf, ExtendedValue::Finite)
    }

    pub fn upper(bound: Option<R>) -> Self {
        bound.map_or(ExtendedValue::PosInf, ExtendedValue::Finite)
    }

    /// Interval-arithmetic sum; `None` for the forbidden `+inf + -inf`.
    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        use ExtendedValue::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Some(Finite(a.clone() + b.clone())),
            (PosInf, NegInf) | (NegInf, PosInf) => None,
            (PosInf, _) | (_, PosInf) => Some(PosInf),
            (NegInf, _) | (_, NegInf) => Some(NegInf),
        }
    }

    /// Product with a finite scalar; infinities flip with a negative factor.
    /// Zero times infinity is taken as zero (a zero coefficient contributes nothing).
    pub fn scale(&self, factor: &R) -> Self {
        use ExtendedValue::*;
        if factor.is_zero() {
            return Finite(R::zero());
        }
        match self {
            Finite(a) => Finite(a.clone() * factor.clone()),
            PosInf if factor.is_negative() => NegInf,
            NegInf if factor.is_negative() => PosInf,
            other => other.clone(),
        }
    }
}

impl<R: Real> PartialOrd for ExtendedValue<R> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        use ExtendedValue::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (NegInf, NegInf) | (PosInf, PosInf) => Some(Equal),
            (NegInf, _) | (_, PosInf) => Some(Less),
            (PosInf, _) | (_, NegInf) => Some(Greater),
        }
    }
}

impl<R: Real> Display for ExtendedValue<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::NegInf => write!(f, "-inf"),
            ExtendedValue::PosInf => write!(f, "inf"),
            ExtendedValue::Finite(v) => write!(f, "{}", v.to_exact_string()),
        }
    }
}

/// Greatest common divisor of two non-negative integers.
pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.abs().gcd(&b.abs())
}
