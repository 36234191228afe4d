use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexScalar, Scalar};
use crate::transfer::{stationary_left_vector, Rates, TransferMatrix};

/// Origin of an eigensystem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSource {
    AnalyticObc,
    AnalyticPbc,
    Extended,
}

/// Eigenvalues with optional right/left eigenvectors, normalized so `l_k · r_k = 1`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<ComplexScalar>,
    pub right: Option<Vec<Vec<ComplexScalar>>>,
    pub left: Option<Vec<Vec<ComplexScalar>>>,
    /// `(k, 0)` for the open chain, `(j, k)` for the periodic chain, `(0, 0)` for the fixed point.
    pub labels: Vec<(usize, usize)>,
    pub source: EigenSource,
    pub precision: u32,
}

fn cvec_apply(a: &TransferMatrix, x: &[ComplexScalar]) -> Result<Vec<ComplexScalar>> {
    let re: Vec<Scalar> = x.iter().map(|z| z.re()).collect();
    let im: Vec<Scalar> = x.iter().map(|z| z.im()).collect();
    let (yr, yi) = if x.len() == a.dim() {
        (a.matvec(&re)?, a.matvec(&im)?)
    } else {
        // vectors supported on the transient states only
        let s = a.absorbing_structure();
        (a.transient_matvec(&s, &re)?, a.transient_matvec(&s, &im)?)
    };
    let p = x.first().map(|z| z.precision()).unwrap_or(64);
    Ok(yr
        .iter()
        .zip(&yi)
        .map(|(r, i)| ComplexScalar::from_parts(r, i, p))
        .collect())
}

fn bilinear(l: &[ComplexScalar], r: &[ComplexScalar]) -> ComplexScalar {
    let p = l.first().map(|z| z.precision()).unwrap_or(64);
    let mut acc = ComplexScalar::zero(p);
    for (a, b) in l.iter().zip(r) {
        acc.mul_add_assign(a, b);
    }
    acc
}

fn inf_norm(x: &[ComplexScalar]) -> Float {
    let p = x.first().map(|z| z.precision()).unwrap_or(64);
    let mut m = Float::new(p);
    for z in x {
        let a = z.abs().float_or(p);
        if a > m {
            m = a;
        }
    }
    m
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest relative residual `‖A r − λ r‖∞ / ‖r‖∞` over stored right vectors.
    /// Vectors shorter than `A` are taken to live on its transient states.
    pub fn max_residual(&self, a: &TransferMatrix) -> Result<f64> {
        let right = self
            .right
            .as_ref()
            .ok_or_else(|| Error::Domain("eigensystem has no right vectors".into()))?;
        let mut worst = 0.0f64;
        for (lam, r) in self.eigenvalues.iter().zip(right) {
            let ar = cvec_apply(a, r)?;
            let diff: Vec<ComplexScalar> = ar.iter().zip(r).map(|(x, y)| x - &(lam * y)).collect();
            let num = inf_norm(&diff);
            let den = inf_norm(r);
            if den.is_zero() {
                return Err(Error::Domain("zero eigenvector".into()));
            }
            worst = worst.max(Float::with_val(num.prec(), &num / &den).to_f64());
        }
        Ok(worst)
    }

    /// Largest `|l_j · r_k − δ_jk|` over all stored pairs (bilinear, no conjugation).
    pub fn max_biorthogonality_defect(&self) -> Result<f64> {
        let (Some(left), Some(right)) = (&self.left, &self.right) else {
            return Err(Error::Domain("eigensystem lacks left or right vectors".into()));
        };
        let mut worst = 0.0f64;
        for (j, l) in left.iter().enumerate() {
            for (k, r) in right.iter().enumerate() {
                let mut z = bilinear(l, r).to_c64();
                if j == k {
                    z -= 1.0;
                }
                worst = worst.max(z.norm());
            }
        }
        Ok(worst)
    }

    /// Largest eigenvalue magnitude, skipping magnitudes within `2^{-prec/2}` of 1.
    pub fn lambda2(&self) -> Option<Scalar> {
        let tol = Float::with_val(self.precision, Float::i_exp(1, -(self.precision as i32) / 2));
        self.eigenvalues
            .iter()
            .map(|z| z.abs())
            .filter(|m| {
                let d = (m - &Scalar::one()).abs().float_or(self.precision);
                d > tol
            })
            .max_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
    }
}

fn real(x: Float) -> ComplexScalar {
    let p = x.prec();
    ComplexScalar::new(x, Float::new(p))
}

/// Analytic eigensystem of the (n−1)×(n−1) tridiagonal Toeplitz block of the open chain:
/// `λ_k = δ + 2√(στ) cos(kπ/n)`, `[r_k]_j = (σ/τ)^{j/2} sin(kjπ/n)`,
/// `[l_k]_j = (2/n)(τ/σ)^{j/2} sin(kjπ/n)`.
pub fn obc_eigensystem(n: usize, rates: &Rates, precision: u32) -> Result<EigenSystem> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} must be >= 2")));
    }
    let st = &rates.sigma * &rates.tau;
    if st.is_zero() {
        return Err(Error::DefectiveCase);
    }
    let p = precision;
    let delta = rates.delta.to_float(p);
    let two_sqrt = Float::with_val(p, st.to_float(p).sqrt() * 2u32);
    let ratio_sqrt = (rates.sigma.to_float(p) / rates.tau.to_float(p)).sqrt();
    let inv_ratio_sqrt = Float::with_val(p, ratio_sqrt.recip_ref());
    let pi = Float::with_val(p, rug::float::Constant::Pi);
    let nf = n as u32;
    let dim = n - 1;
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut right = Vec::with_capacity(dim);
    let mut left = Vec::with_capacity(dim);
    let mut labels = Vec::with_capacity(dim);
    for k in 1..n {
        let angle = Float::with_val(p, &pi * k as u32) / nf;
        eigenvalues.push(real(Float::with_val(p, &delta + &two_sqrt * angle.cos())));
        let mut rv = Vec::with_capacity(dim);
        let mut lv = Vec::with_capacity(dim);
        let mut up = Float::with_val(p, 1);
        let mut down = Float::with_val(p, 2) / nf;
        for j in 1..n {
            up *= &ratio_sqrt;
            down *= &inv_ratio_sqrt;
            let s = (Float::with_val(p, &pi * (k * j) as u32) / nf).sin();
            rv.push(real(Float::with_val(p, &up * &s)));
            lv.push(real(Float::with_val(p, &down * &s)));
        }
        right.push(rv);
        left.push(lv);
        labels.push((k, 0));
    }
    Ok(EigenSystem {
        eigenvalues,
        right: Some(right),
        left: Some(left),
        labels,
        source: EigenSource::AnalyticObc,
        precision,
    })
}

/// Extend transient eigenpairs to the full matrix `A` (open or periodic chain):
/// right vectors gain the component `(b·r_k)/(λ_k − 1)`, left vectors gain 0, and the
/// fixed point `(e_last, 1)` is appended with the stationary left vector.
pub fn extend_to_a(eig: &EigenSystem, a: &TransferMatrix) -> Result<EigenSystem> {
    if !matches!(
        a,
        TransferMatrix::ObcFull { .. } | TransferMatrix::PbcBlockCirculant(_)
    ) {
        return Err(Error::Domain(
            "extension applies to open or periodic chain matrices".into(),
        ));
    }
    let (Some(right), Some(left)) = (&eig.right, &eig.left) else {
        return Err(Error::Domain("extension needs eigenvectors".into()));
    };
    let p = eig.precision;
    let dim = a.dim();
    let last = dim - 1;
    if right.first().map(|r| r.len()) != Some(last) {
        return Err(Error::DimensionMismatch {
            expected: last,
            found: right.first().map(|r| r.len()).unwrap_or(0),
        });
    }
    let b: Vec<ComplexScalar> = (0..last)
        .map(|j| ComplexScalar::real(&a.entry(last, j), p))
        .collect();
    let tol = Float::with_val(p, Float::i_exp(1, 10 - p as i32));
    let one = ComplexScalar::real(&Scalar::one(), p);
    let mut new_right = Vec::with_capacity(right.len() + 1);
    let mut new_left = Vec::with_capacity(left.len() + 1);
    for (idx, (lam, r)) in eig.eigenvalues.iter().zip(right).enumerate() {
        let denom = lam - &one;
        if denom.abs().float_or(p) <= tol {
            return Err(Error::DegenerateExtension { index: idx });
        }
        let num = bilinear(&b, r);
        let dd = Float::with_val(
            p,
            denom.re_float() * denom.re_float() + denom.im_float() * denom.im_float(),
        );
        let conj = denom.conj();
        let q = &num * &conj;
        let comp = ComplexScalar::new(
            Float::with_val(p, q.re_float() / &dd),
            Float::with_val(p, q.im_float() / &dd),
        );
        let mut rr = r.clone();
        rr.push(comp);
        new_right.push(rr);
        let mut ll = left[idx].clone();
        ll.push(ComplexScalar::zero(p));
        new_left.push(ll);
    }
    let mut fixed_r = vec![ComplexScalar::zero(p); dim];
    fixed_r[last] = one.clone();
    let stat = stationary_left_vector(a)?;
    let fixed_l: Vec<ComplexScalar> = stat.iter().map(|x| ComplexScalar::real(x, p)).collect();
    new_right.push(fixed_r);
    new_left.push(fixed_l);
    let mut eigenvalues = eig.eigenvalues.clone();
    eigenvalues.push(one);
    let mut labels = eig.labels.clone();
    labels.push((0, 0));
    Ok(EigenSystem {
        eigenvalues,
        right: Some(new_right),
        left: Some(new_left),
        labels,
        source: EigenSource::Extended,
        precision: p,
    })
}

/// Eigenvalues `λ_{j,k} = δ²(cos(πj/n) + cos(πk/n))²` of the periodic block-circulant part,
/// for `j = 1..n−1`, `k = 1..n`, without eigenvectors.
pub fn pbc_eigenvalues(n: usize, q: u32, precision: u32) -> Result<EigenSystem> {
    pbc_eigen(n, q, precision, false)
}

/// As [`pbc_eigenvalues`], with the analytic right/left eigenvectors
/// `(√2 q^{±2m}/n) e^{±2πikl/n} e^{±πikm/n} sin(jmπ/n)` (block `l`, in-block index `m`).
pub fn pbc_eigensystem(n: usize, q: u32, precision: u32) -> Result<EigenSystem> {
    pbc_eigen(n, q, precision, true)
}

fn pbc_eigen(n: usize, q: u32, precision: u32, vectors: bool) -> Result<EigenSystem> {
    if n < 3 {
        return Err(Error::Domain(format!("n = {n} must be >= 3")));
    }
    let rates = Rates::from_q(q)?;
    let p = precision;
    let delta2 = rates.delta.to_float(p).square();
    let pi = Float::with_val(p, rug::float::Constant::Pi);
    let nf = n as u32;
    let m_dim = n - 1;
    let cos_pi = |a: usize| (Float::with_val(p, &pi * a as u32) / nf).cos();
    let mut eigenvalues = Vec::with_capacity(n * m_dim);
    let mut labels = Vec::with_capacity(n * m_dim);
    let mut right = Vec::new();
    let mut left = Vec::new();
    let pref = Float::with_val(p, 2).sqrt() / nf;
    let q2 = Float::with_val(p, q * q);
    for k in 1..=n {
        for j in 1..n {
            let s = Float::with_val(p, cos_pi(j) + cos_pi(k));
            eigenvalues.push(real(Float::with_val(p, &delta2 * s.square())));
            labels.push((j, k));
            if !vectors {
                continue;
            }
            let mut rv = Vec::with_capacity(n * m_dim);
            let mut lv = Vec::with_capacity(n * m_dim);
            for l in 1..=n {
                let mut qpow = Float::with_val(p, 1);
                for m in 1..n {
                    qpow *= &q2;
                    let amp = Float::with_val(p, &pref * (Float::with_val(p, &pi * (j * m) as u32) / nf).sin());
                    // phase 2πkl/n + πkm/n = πk(2l + m)/n
                    let phase = Float::with_val(p, &pi * (k * (2 * l + m)) as u32) / nf;
                    let (sn, cs) = phase.sin_cos(Float::new(p));
                    let ra = Float::with_val(p, &amp * &qpow);
                    let la = Float::with_val(p, &amp / &qpow);
                    rv.push(ComplexScalar::new(
                        Float::with_val(p, &ra * &cs),
                        Float::with_val(p, &ra * &sn),
                    ));
                    lv.push(ComplexScalar::new(
                        Float::with_val(p, &la * &cs),
                        -Float::with_val(p, &la * &sn),
                    ));
                }
            }
            right.push(rv);
            left.push(lv);
        }
    }
    Ok(EigenSystem {
        eigenvalues,
        right: vectors.then_some(right),
        left: vectors.then_some(left),
        labels,
        source: EigenSource::AnalyticPbc,
        precision,
    })
}

/// Largest non-unit eigenvalue magnitude of the open-chain matrix: `δ + 2√(στ) cos(π/n)`.
pub fn obc_lambda2(n: usize, rates: &Rates, precision: u32) -> Result<Scalar> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} must be >= 2")));
    }
    let p = precision;
    let st = (&rates.sigma * &rates.tau).to_float(p).sqrt();
    let pi = Float::with_val(p, rug::float::Constant::Pi);
    let c = (pi / n as u32).cos();
    Ok(Scalar::Float(Float::with_val(
        p,
        rates.delta.to_float(p) + Float::with_val(p, st * 2u32) * c,
    )))
}

/// Largest periodic-chain eigenvalue, `δ²(1 + cos(π/n))²`, taken from the analytic set.
pub fn pbc_lambda2(n: usize, q: u32, precision: u32) -> Result<Scalar> {
    pbc_eigenvalues(n, q, precision)?
        .lambda2()
        .ok_or_else(|| Error::Domain("empty spectrum".into()))
}
