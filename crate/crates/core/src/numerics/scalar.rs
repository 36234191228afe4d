use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default binary precision of the float backend, in bits.
pub const DEFAULT_PRECISION: u32 = 256;
/// Smallest accepted float precision (IEEE double).
pub const MIN_PRECISION: u32 = 53;

/// Arithmetic backend for iteration: exact rationals or fixed-precision binary floats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    Rational,
    Float { precision: u32 },
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Float {
            precision: DEFAULT_PRECISION,
        }
    }
}

impl Backend {
    /// Float backend at `precision` bits; rejects anything below 53.
    pub fn float(precision: u32) -> Result<Self> {
        if precision < MIN_PRECISION {
            return Err(Error::Domain(format!(
                "float precision {precision} below minimum {MIN_PRECISION}"
            )));
        }
        Ok(Backend::Float { precision })
    }

    pub fn precision(&self) -> Option<u32> {
        match self {
            Backend::Rational => None,
            Backend::Float { precision } => Some(*precision),
        }
    }

    /// Precision to use for irrational quantities (square roots, cosines) under this backend.
    pub fn working_precision(&self) -> u32 {
        self.precision().unwrap_or(DEFAULT_PRECISION)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Rational => "rational",
            Backend::Float { .. } => "float",
        }
    }

    /// Convert a scalar into this backend. Floats become exact rationals under `Rational`.
    pub fn convert(&self, x: &Scalar) -> Scalar {
        match (self, x) {
            (Backend::Rational, Scalar::Exact(_)) => x.clone(),
            (Backend::Rational, Scalar::Float(f)) => Scalar::Exact(
                f.to_rational()
                    .expect("non-finite float cannot become a rational"),
            ),
            (Backend::Float { precision }, _) => Scalar::Float(x.to_float(*precision)),
        }
    }

    pub fn int(&self, v: i64) -> Scalar {
        self.convert(&Scalar::from(v))
    }

    pub fn ratio(&self, num: i64, den: i64) -> Scalar {
        self.convert(&Scalar::ratio(num, den))
    }

    pub fn zero(&self) -> Scalar {
        self.int(0)
    }

    pub fn one(&self) -> Scalar {
        self.int(1)
    }
}

/// A real number under one of the two backends.
///
/// Mixed operations promote to `Float` at the float operand's precision.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Rational),
    Float(Float),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Rational::new())
    }

    pub fn one() -> Self {
        Scalar::Exact(Rational::from(1))
    }

    /// Exact rational `num/den`. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(Rational::from((num, den)))
    }

    pub fn from_f64(x: f64, precision: u32) -> Self {
        Scalar::Float(Float::with_val(precision, x))
    }

    pub fn pi(precision: u32) -> Self {
        Scalar::Float(Float::with_val(precision, Constant::Pi))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Float precision, `None` for exact values.
    pub fn precision(&self) -> Option<u32> {
        match self {
            Scalar::Exact(_) => None,
            Scalar::Float(f) => Some(f.prec()),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    /// Nearest `f64` (rug's rational conversion truncates, so round through a 53-bit float).
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => Float::with_val(53, r).to_f64(),
            Scalar::Float(f) => f.to_f64(),
        }
    }

    /// Value as a float of `precision` bits (rounded if exact).
    pub fn to_float(&self, precision: u32) -> Float {
        match self {
            Scalar::Exact(r) => Float::with_val(precision, r),
            Scalar::Float(f) => Float::with_val(precision, f),
        }
    }

    /// Value as a float; exact values use `fallback` bits, floats keep their own precision.
    pub fn float_or(&self, fallback: u32) -> Float {
        match self {
            Scalar::Exact(r) => Float::with_val(fallback, r),
            Scalar::Float(f) => f.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => *r == 0,
            Scalar::Float(f) => f.is_zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Scalar::Exact(_) => true,
            Scalar::Float(f) => f.is_finite(),
        }
    }

    /// Sign relative to zero; `None` for NaN.
    pub fn sign(&self) -> Option<Ordering> {
        match self {
            Scalar::Exact(r) => Some(r.cmp0()),
            Scalar::Float(f) => f.cmp0(),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Some(Ordering::Greater)
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Some(Ordering::Less)
    }

    pub fn abs(&self) -> Self {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.clone().abs()),
            Scalar::Float(f) => Scalar::Float(f.clone().abs()),
        }
    }

    /// Reciprocal; division by an exact zero is a domain error.
    pub fn recip(&self) -> Result<Self> {
        match self {
            Scalar::Exact(r) if *r == 0 => Err(Error::Domain("reciprocal of zero".into())),
            Scalar::Exact(r) => Ok(Scalar::Exact(r.clone().recip())),
            Scalar::Float(f) => Ok(Scalar::Float(f.clone().recip())),
        }
    }

    /// Checked division: an exact zero divisor is a domain error rather than a panic.
    pub fn checked_div(&self, rhs: &Scalar) -> Result<Self> {
        if rhs.is_exact() && rhs.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(self / rhs)
    }

    /// Integer power; negative exponents require a non-zero base.
    pub fn powi(&self, e: i32) -> Result<Self> {
        if e < 0 {
            return self.recip()?.powi(-e);
        }
        let e = e as u32;
        Ok(match self {
            Scalar::Exact(r) => {
                use rug::ops::Pow;
                let num: Integer = r.numer().clone().pow(e);
                let den: Integer = r.denom().clone().pow(e);
                Scalar::Exact(Rational::from((num, den)))
            }
            Scalar::Float(f) => {
                use rug::ops::Pow;
                Scalar::Float(f.clone().pow(e))
            }
        })
    }

    /// Square root. Exact perfect squares stay exact; otherwise a float at `fallback` bits
    /// (or the operand's own precision).
    pub fn sqrt(&self, fallback: u32) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::Domain("square root of a negative number".into()));
        }
        if let Scalar::Exact(r) = self {
            let (n, d) = (r.numer(), r.denom());
            if n.is_perfect_square() && d.is_perfect_square() {
                let rn = Integer::from(n.sqrt_ref());
                let rd = Integer::from(d.sqrt_ref());
                return Ok(Scalar::Exact(Rational::from((rn, rd))));
            }
        }
        Ok(Scalar::Float(self.float_or(fallback).sqrt()))
    }

    pub fn ln(&self, fallback: u32) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::Domain("logarithm of a non-positive number".into()));
        }
        Ok(Scalar::Float(self.float_or(fallback).ln()))
    }

    pub fn exp(&self, fallback: u32) -> Self {
        Scalar::Float(self.float_or(fallback).exp())
    }

    pub fn cos(&self, fallback: u32) -> Self {
        Scalar::Float(self.float_or(fallback).cos())
    }

    pub fn sin(&self, fallback: u32) -> Self {
        Scalar::Float(self.float_or(fallback).sin())
    }

    /// `self += a * b`, fused for floats.
    pub fn mul_add_assign(&mut self, a: &Scalar, b: &Scalar) {
        match (&mut *self, a, b) {
            (Scalar::Float(s), Scalar::Float(x), Scalar::Float(y)) => {
                *s += x * y;
            }
            (Scalar::Exact(s), Scalar::Exact(x), Scalar::Exact(y)) => {
                if !x.is_zero_ratio() && !y.is_zero_ratio() {
                    *s += Rational::from(x * y);
                }
            }
            _ => {
                let prod = a * b;
                *self += &prod;
            }
        }
    }

    /// Scientific-notation string with `digits` significant digits (exact values rounded).
    pub fn to_sci(&self, digits: usize) -> String {
        let digits = digits.max(1);
        let f = match self {
            Scalar::Exact(r) => Float::with_val(DEFAULT_PRECISION.max(4 * digits as u32), r),
            Scalar::Float(f) => f.clone(),
        };
        if f.is_zero() {
            return "0".to_string();
        }
        format!("{:.*e}", digits - 1, f)
    }

    /// Shortest faithful text form: `p/q` for exact values, scientific for floats.
    pub fn to_plain(&self) -> String {
        match self {
            Scalar::Exact(r) => r.to_string(),
            Scalar::Float(f) => {
                let digits = ((f.prec() as f64) * std::f64::consts::LOG10_2).ceil() as usize;
                self.to_sci(digits)
            }
        }
    }
}

trait ZeroRatio {
    fn is_zero_ratio(&self) -> bool;
}

impl ZeroRatio for Rational {
    fn is_zero_ratio(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_plain())
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Exact(Rational::from(v))
    }
}

impl From<i32> for Scalar {
    fn from(v: i32) -> Self {
        Scalar::Exact(Rational::from(v))
    }
}

impl From<u32> for Scalar {
    fn from(v: u32) -> Self {
        Scalar::Exact(Rational::from(v))
    }
}

impl From<u64> for Scalar {
    fn from(v: u64) -> Self {
        Scalar::Exact(Rational::from(v))
    }
}

impl From<usize> for Scalar {
    fn from(v: usize) -> Self {
        Scalar::Exact(Rational::from(v as u64))
    }
}

impl From<Integer> for Scalar {
    fn from(v: Integer) -> Self {
        Scalar::Exact(Rational::from(v))
    }
}

impl From<Rational> for Scalar {
    fn from(v: Rational) -> Self {
        Scalar::Exact(v)
    }
}

impl From<Float> for Scalar {
    fn from(v: Float) -> Self {
        Scalar::Float(v)
    }
}

#[derive(Clone, Copy)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

fn binop(a: &Scalar, b: &Scalar, op: Op) -> Scalar {
    match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => Scalar::Exact(match op {
            Op::Add => Rational::from(x + y),
            Op::Sub => Rational::from(x - y),
            Op::Mul => Rational::from(x * y),
            Op::Div => {
                assert!(y.cmp0() != Ordering::Equal, "exact division by zero");
                Rational::from(x / y)
            }
        }),
        (Scalar::Float(x), Scalar::Float(y)) => {
            let prec = x.prec().max(y.prec());
            Scalar::Float(match op {
                Op::Add => Float::with_val(prec, x + y),
                Op::Sub => Float::with_val(prec, x - y),
                Op::Mul => Float::with_val(prec, x * y),
                Op::Div => Float::with_val(prec, x / y),
            })
        }
        (Scalar::Float(x), Scalar::Exact(y)) => {
            let yf = Scalar::Float(Float::with_val(x.prec(), y));
            binop(a, &yf, op)
        }
        (Scalar::Exact(x), Scalar::Float(y)) => {
            let xf = Scalar::Float(Float::with_val(y.prec(), x));
            binop(&xf, b, op)
        }
    }
}

macro_rules! impl_binop {
    ($tr:ident, $method:ident, $op:expr, $atr:ident, $amethod:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                binop(self, rhs, $op)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                binop(self, &rhs, $op)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                binop(&self, rhs, $op)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                binop(&self, &rhs, $op)
            }
        }
        impl $atr<&Scalar> for Scalar {
            fn $amethod(&mut self, rhs: &Scalar) {
                match (&mut *self, rhs) {
                    (Scalar::Exact(x), Scalar::Exact(y)) => match $op {
                        Op::Add => *x += y,
                        Op::Sub => *x -= y,
                        Op::Mul => *x *= y,
                        Op::Div => {
                            assert!(y.cmp0() != Ordering::Equal, "exact division by zero");
                            *x /= y
                        }
                    },
                    (Scalar::Float(x), Scalar::Float(y)) if x.prec() >= y.prec() => match $op {
                        Op::Add => *x += y,
                        Op::Sub => *x -= y,
                        Op::Mul => *x *= y,
                        Op::Div => *x /= y,
                    },
                    _ => {
                        let r = binop(self, rhs, $op);
                        *self = r;
                    }
                }
            }
        }
        impl $atr<Scalar> for Scalar {
            fn $amethod(&mut self, rhs: Scalar) {
                $atr::$amethod(self, &rhs)
            }
        }
    };
}

impl_binop!(Add, add, Op::Add, AddAssign, add_assign);
impl_binop!(Sub, sub, Op::Sub, SubAssign, sub_assign);
impl_binop!(Mul, mul, Op::Mul, MulAssign, mul_assign);
impl_binop!(Div, div, Op::Div, DivAssign, div_assign);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(x), Scalar::Exact(y)) => x.partial_cmp(y),
            (Scalar::Float(x), Scalar::Float(y)) => x.partial_cmp(y),
            (Scalar::Float(x), Scalar::Exact(y)) => x.partial_cmp(y),
            (Scalar::Exact(x), Scalar::Float(y)) => y.partial_cmp(x).map(Ordering::reverse),
        }
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        let mut acc = Scalar::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

/// Dot product `Σ a_i b_i`, starting from an exact zero.
pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Scalar::zero();
    for (x, y) in a.iter().zip(b) {
        acc.mul_add_assign(x, y);
    }
    acc
}
