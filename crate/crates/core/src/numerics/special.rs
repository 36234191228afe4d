use rug::float::Constant;
use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::numerics::{Scalar, DEFAULT_PRECISION};

/// Default cap on the number of hypergeometric series terms.
pub const HYP2F1_MAX_TERMS: usize = 10_000;

/// Exact binomial coefficient C(n, k); zero when k > n.
pub fn binomial(n: u64, k: u64) -> Integer {
    if k > n {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n as u32, k as u32))
}

/// k-th Catalan number C(2k, k)/(k + 1).
pub fn catalan(k: u64) -> Integer {
    let b = binomial(2 * k, k);
    Integer::from(b.div_exact_ref(&Integer::from(k + 1)))
}

/// Gauss hypergeometric 2F1(a, b; c; z) for |z| < 1.
///
/// Summed in floats at the largest precision among the arguments (256 bits if all exact),
/// stopping once a term falls below epsilon times the partial sum while the term ratio is
/// contracting.
pub fn hyp2f1(a: &Scalar, b: &Scalar, c: &Scalar, z: &Scalar) -> Result<Scalar> {
    hyp2f1_with_cap(a, b, c, z, HYP2F1_MAX_TERMS)
}

pub fn hyp2f1_with_cap(
    a: &Scalar,
    b: &Scalar,
    c: &Scalar,
    z: &Scalar,
    max_terms: usize,
) -> Result<Scalar> {
    if z.abs() >= Scalar::one() {
        return Err(Error::Domain("hyp2f1 requires |z| < 1".into()));
    }
    if let Some(r) = c.as_rational() {
        if *r.denom() == 1 && *r.numer() <= 0 {
            return Err(Error::Domain(
                "hyp2f1 parameter c is a non-positive integer".into(),
            ));
        }
    }
    let prec = [a, b, c, z]
        .iter()
        .filter_map(|s| s.precision())
        .max()
        .unwrap_or(DEFAULT_PRECISION);
    let a = a.to_float(prec);
    let b = b.to_float(prec);
    let c = c.to_float(prec);
    let z = z.to_float(prec);
    if c.is_integer() && c <= 0 {
        return Err(Error::Domain(
            "hyp2f1 parameter c is a non-positive integer".into(),
        ));
    }
    let eps = Float::with_val(prec, Float::i_exp(1, 1 - prec as i32));
    let mut term = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 1);
    for k in 0..max_terms {
        let kf = k as u32;
        let num = Float::with_val(prec, &a + kf) * Float::with_val(prec, &b + kf);
        let den = Float::with_val(prec, &c + kf) * Float::with_val(prec, kf + 1);
        let ratio = num / den * &z;
        term *= &ratio;
        sum += &term;
        if term.is_zero() {
            return Ok(Scalar::Float(sum));
        }
        let small = term.clone().abs() < Float::with_val(prec, &eps * &sum).abs();
        if small && ratio.clone().abs() < 1 {
            return Ok(Scalar::Float(sum));
        }
        if !sum.is_finite() {
            return Err(Error::Domain("hyp2f1 partial sum overflowed".into()));
        }
    }
    Err(Error::Convergence {
        iterations: max_terms,
        best_estimate: sum.to_f64(),
    })
}

/// Γ(t + 3/2) / Γ(t + 3) for integer t ≥ 0, from Γ(3/2)/Γ(3) = √π/4 and the
/// ratio recurrence (t + 3/2)/(t + 3).
pub fn gamma_ratio_3half_3(t: u64, precision: u32) -> Scalar {
    let pi = Float::with_val(precision, Constant::Pi);
    let mut g = pi.sqrt() / 4u32;
    for s in 0..t {
        // (s + 3/2)/(s + 3) = (2s + 3)/(2s + 6)
        g *= 2 * s + 3;
        g /= 2 * s + 6;
    }
    Scalar::Float(g)
}
