use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Round;
use rug::ops::NegAssign;
use rug::Float;

use super::MplaError;

/// Arbitrary-precision real number.
///
/// The mantissa precision travels with the value. Binary operations round
/// to the larger of the two operand precisions.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct MpScalar(Float);

/// Number of decimal digits that identify a value of `bits` mantissa bits.
pub fn decimal_digits(bits: u32) -> usize {
    (bits as f64 * 0.302).ceil() as usize + 2
}

impl MpScalar {
    pub fn zero(prec: u32) -> Self {
        MpScalar(Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        MpScalar(Float::with_val(prec, 1))
    }

    pub fn from_i64(prec: u32, v: i64) -> Self {
        MpScalar(Float::with_val(prec, v))
    }

    pub fn from_f64(prec: u32, v: f64) -> Self {
        MpScalar(Float::with_val(prec, v))
    }

    /// Exact ratio `num / den` rounded once to `prec` bits.
    pub fn ratio(prec: u32, num: i64, den: i64) -> Self {
        let n = Float::with_val(prec, num);
        MpScalar(Float::with_val(prec, n / den))
    }

    /// `2^exp` at the given precision.
    pub fn pow2(prec: u32, exp: i32) -> Self {
        let mut f = Float::with_val(prec, 1);
        f <<= exp;
        MpScalar(f)
    }

    pub fn from_float(f: Float) -> Self {
        MpScalar(f)
    }

    /// Parses a decimal literal such as `-2.5e-3`.
    pub fn parse(prec: u32, text: &str) -> Result<Self, MplaError> {
        Self::parse_exact(prec, text).map(|(v, _)| v)
    }

    /// Parses a decimal literal and reports whether rounding was needed.
    pub fn parse_exact(prec: u32, text: &str) -> Result<(Self, bool), MplaError> {
        let t = text.trim();
        let parsed = Float::parse(t).map_err(|_| MplaError::Parse(t.to_string()))?;
        let (f, ord) = Float::with_val_round(prec, parsed, Round::Nearest);
        if !f.is_finite() {
            return Err(MplaError::NonFinite);
        }
        Ok((MpScalar(f), ord == Ordering::Equal))
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Value rounded to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        MpScalar(Float::with_val(prec, &self.0))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        MpScalar(self.0.clone().abs())
    }

    pub fn sqrt(&self) -> Self {
        MpScalar(self.0.clone().sqrt())
    }

    pub fn square(&self) -> Self {
        MpScalar(self.0.clone().square())
    }

    pub fn recip(&self) -> Self {
        MpScalar(self.0.clone().recip())
    }

    pub fn ln(&self) -> Self {
        MpScalar(self.0.clone().ln())
    }

    pub fn max(&self, other: &Self) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn min(&self, other: &Self) -> Self {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// `self + a*b` with a single rounding.
    pub fn add_mul(&mut self, a: &MpScalar, b: &MpScalar) {
        self.0 += &a.0 * &b.0;
    }

    /// `self - a*b` with a single rounding.
    pub fn sub_mul(&mut self, a: &MpScalar, b: &MpScalar) {
        self.0 -= &a.0 * &b.0;
    }

    /// Scientific decimal string with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        format!("{:.*e}", digits.saturating_sub(1), self.0)
    }

    /// Decimal string long enough to round-trip at the current precision.
    pub fn to_decimal_full(&self) -> String {
        self.to_decimal(decimal_digits(self.prec()))
    }

    /// Decimal exponent estimate; `None` for zero.
    pub fn log10_abs(&self) -> Option<f64> {
        if self.0.is_zero() {
            return None;
        }
        let (mant, exp) = self.0.to_f64_exp();
        Some(mant.abs().log10() + exp as f64 * std::f64::consts::LOG10_2)
    }

    fn prec_of(a: &Float, b: &Float) -> u32 {
        a.prec().max(b.prec())
    }
}

impl fmt::Debug for MpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal(24))
    }
}

impl fmt::Display for MpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "{}", self.to_decimal(p)),
            None => write!(f, "{}", self.to_decimal(20)),
        }
    }
}

/// Serializes as a round-trip decimal string.
impl serde::Serialize for MpScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal_full())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl<'a> $tr<&'a MpScalar> for &'a MpScalar {
            type Output = MpScalar;
            fn $m(self, rhs: &'a MpScalar) -> MpScalar {
                let p = MpScalar::prec_of(&self.0, &rhs.0);
                MpScalar(Float::with_val(p, (&self.0).$m(&rhs.0)))
            }
        }
        impl $tr<MpScalar> for MpScalar {
            type Output = MpScalar;
            fn $m(self, rhs: MpScalar) -> MpScalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a MpScalar> for MpScalar {
            type Output = MpScalar;
            fn $m(self, rhs: &'a MpScalar) -> MpScalar {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<MpScalar> for &'a MpScalar {
            type Output = MpScalar;
            fn $m(self, rhs: MpScalar) -> MpScalar {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for MpScalar {
    type Output = MpScalar;
    fn neg(mut self) -> MpScalar {
        self.0.neg_assign();
        self
    }
}

impl Neg for &MpScalar {
    type Output = MpScalar;
    fn neg(self) -> MpScalar {
        -(self.clone())
    }
}

impl AddAssign<&MpScalar> for MpScalar {
    fn add_assign(&mut self, rhs: &MpScalar) {
        if rhs.prec() > self.prec() {
            self.0.set_prec(rhs.prec());
        }
        self.0 += &rhs.0;
    }
}

impl SubAssign<&MpScalar> for MpScalar {
    fn sub_assign(&mut self, rhs: &MpScalar) {
        if rhs.prec() > self.prec() {
            self.0.set_prec(rhs.prec());
        }
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&MpScalar> for MpScalar {
    fn mul_assign(&mut self, rhs: &MpScalar) {
        if rhs.prec() > self.prec() {
            self.0.set_prec(rhs.prec());
        }
        self.0 *= &rhs.0;
    }
}

impl AddAssign<MpScalar> for MpScalar {
    fn add_assign(&mut self, rhs: MpScalar) {
        *self += &rhs;
    }
}

impl SubAssign<MpScalar> for MpScalar {
    fn sub_assign(&mut self, rhs: MpScalar) {
        *self -= &rhs;
    }
}
