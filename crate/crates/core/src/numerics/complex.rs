use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rug::Float;

use crate::error::{Error, Result};
use crate::numerics::Scalar;

/// Complex number over float-backend reals.
#[derive(Clone, Debug)]
pub struct ComplexScalar {
    re: Float,
    im: Float,
}

impl ComplexScalar {
    pub fn new(re: Float, im: Float) -> Self {
        let prec = re.prec().max(im.prec());
        ComplexScalar {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    /// Build from two scalars; exact parts are rounded to `precision` bits.
    pub fn from_parts(re: &Scalar, im: &Scalar, precision: u32) -> Self {
        ComplexScalar::new(re.float_or(precision), im.float_or(precision))
    }

    pub fn real(x: &Scalar, precision: u32) -> Self {
        ComplexScalar::from_parts(x, &Scalar::zero(), precision)
    }

    pub fn zero(precision: u32) -> Self {
        ComplexScalar::new(Float::new(precision), Float::new(precision))
    }

    /// `e^{iφ}`.
    pub fn cis(phi: &Scalar, precision: u32) -> Self {
        let p = phi.float_or(precision);
        let (s, c) = p.sin_cos(Float::new(precision));
        ComplexScalar::new(c, s)
    }

    pub fn precision(&self) -> u32 {
        self.re.prec()
    }

    pub fn re(&self) -> Scalar {
        Scalar::Float(self.re.clone())
    }

    pub fn im(&self) -> Scalar {
        Scalar::Float(self.im.clone())
    }

    pub fn re_float(&self) -> &Float {
        &self.re
    }

    pub fn im_float(&self) -> &Float {
        &self.im
    }

    pub fn conj(&self) -> Self {
        ComplexScalar::new(self.re.clone(), -self.im.clone())
    }

    /// Modulus `|z|`.
    pub fn abs(&self) -> Scalar {
        let mut h = self.re.clone();
        h.hypot_mut(&self.im);
        Scalar::Float(h)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let f = s.float_or(self.precision());
        ComplexScalar::new(
            Float::with_val(self.precision(), &self.re * &f),
            Float::with_val(self.precision(), &self.im * &f),
        )
    }

    /// Reports an error if either part is NaN or infinite.
    pub fn check_finite(&self) -> Result<()> {
        if self.re.is_finite() && self.im.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain("non-finite complex value".into()))
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// `self += a * b`.
    pub fn mul_add_assign(&mut self, a: &ComplexScalar, b: &ComplexScalar) {
        let p = a * b;
        self.re += &p.re;
        self.im += &p.im;
    }
}

impl fmt::Display for ComplexScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}{:+e}i", self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for &ComplexScalar {
    type Output = ComplexScalar;
    fn add(self, rhs: &ComplexScalar) -> ComplexScalar {
        let p = self.precision().max(rhs.precision());
        ComplexScalar::new(
            Float::with_val(p, &self.re + &rhs.re),
            Float::with_val(p, &self.im + &rhs.im),
        )
    }
}

impl Sub for &ComplexScalar {
    type Output = ComplexScalar;
    fn sub(self, rhs: &ComplexScalar) -> ComplexScalar {
        let p = self.precision().max(rhs.precision());
        ComplexScalar::new(
            Float::with_val(p, &self.re - &rhs.re),
            Float::with_val(p, &self.im - &rhs.im),
        )
    }
}

impl Mul for &ComplexScalar {
    type Output = ComplexScalar;
    fn mul(self, rhs: &ComplexScalar) -> ComplexScalar {
        let p = self.precision().max(rhs.precision());
        let rr = Float::with_val(p, &self.re * &rhs.re);
        let ii = Float::with_val(p, &self.im * &rhs.im);
        let ri = Float::with_val(p, &self.re * &rhs.im);
        let ir = Float::with_val(p, &self.im * &rhs.re);
        ComplexScalar::new(rr - ii, ri + ir)
    }
}

impl Neg for &ComplexScalar {
    type Output = ComplexScalar;
    fn neg(self) -> ComplexScalar {
        ComplexScalar::new(-self.re.clone(), -self.im.clone())
    }
}
