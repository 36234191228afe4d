use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::banded::BandedC64;

/// Small dense complex matrix in double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.n + j] = z;
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        CMat {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn to_banded(&self) -> BandedC64 {
        BandedC64::from_dense(&self.rows())
    }
}

fn rates_f64(q: u32) -> (f64, f64, f64) {
    let q2 = f64::from(q * q);
    let den = (1.0 + q2) * (1.0 + q2);
    (2.0 * q2 / den, 1.0 / den, q2 * q2 / den)
}

fn check(n: usize, q: u32, k: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!("n = {n} must be >= 3")));
    }
    if q < 2 {
        return Err(Error::Domain(format!("q = {q} must be >= 2")));
    }
    if k < 1 || k > n {
        return Err(Error::Domain(format!("momentum k = {k} outside 1..={n}")));
    }
    Ok(())
}

/// Coefficients `(d₋₂, d₋₁, d₀, d₁, d₂)` of the k-th Fourier block (before the στ prefactor).
///
/// `d₁ = (2/q²)(1 + e^{−iθ})`, which is what the block structure `C + e^{iθ}U + e^{−iθ}D` gives.
pub fn pbc_fourier_coefficients(n: usize, q: u32, k: usize) -> Result<[Complex64; 5]> {
    check(n, q, k)?;
    let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
    let e = Complex64::from_polar(1.0, theta);
    let q2 = f64::from(q * q);
    let one = Complex64::new(1.0, 0.0);
    Ok([
        e * q2 * q2,
        (one + e) * (2.0 * q2),
        Complex64::new(2.0 * theta.cos(), 0.0),
        (one + e.conj()) * (2.0 / q2),
        e.conj() / (q2 * q2),
    ])
}

/// The (n−1)×(n−1) pentadiagonal block `T_k` of the block-Fourier-transformed periodic
/// transfer matrix, `θ = 2πk/n`, including the στ prefactor.
pub fn pbc_fourier_block(n: usize, q: u32, k: usize) -> Result<CMat> {
    let [dm2, dm1, d0, d1, d2] = pbc_fourier_coefficients(n, q, k)?;
    let (_, tau, sigma) = rates_f64(q);
    let st = sigma * tau;
    let m = n - 1;
    let mut t = CMat::zeros(m);
    for i in 0..m {
        let corner = i == 0 || i == m - 1;
        t.set(i, i, (d0 + if corner { 3.0 } else { 4.0 }) * st);
        if i + 1 < m {
            t.set(i, i + 1, d1 * st);
            t.set(i + 1, i, dm1 * st);
        }
        if i + 2 < m {
            t.set(i, i + 2, d2 * st);
            t.set(i + 2, i, dm2 * st);
        }
    }
    Ok(t)
}

/// Commuting tridiagonal factors `(Ã_k, B̃_k)` with `T_k = στ Ã_k B̃_k`.
///
/// Ã: sub `q⁴e^{iθ}`, diagonal `q²(1+e^{iθ})`, super 1.
/// B̃: sub 1, diagonal `q⁻²(1+e^{−iθ})`, super `q⁻⁴e^{−iθ}`.
pub fn pbc_fourier_factors(n: usize, q: u32, k: usize) -> Result<(CMat, CMat)> {
    let (c1, a1, b1, c2, a2, b2) = factor_symbols(q, k as f64 / n as f64);
    check(n, q, k)?;
    let m = n - 1;
    let tri = |c: Complex64, a: Complex64, b: Complex64| {
        let mut t = CMat::zeros(m);
        for i in 0..m {
            t.set(i, i, a);
            if i + 1 < m {
                t.set(i, i + 1, b);
                t.set(i + 1, i, c);
            }
        }
        t
    };
    Ok((tri(c1, a1, b1), tri(c2, a2, b2)))
}

/// `(c₁, a₁, b₁, c₂, a₂, b₂)` at momentum fraction `k/n`.
pub(crate) fn factor_symbols(
    q: u32,
    k_over_n: f64,
) -> (Complex64, Complex64, Complex64, Complex64, Complex64, Complex64) {
    let theta = 2.0 * std::f64::consts::PI * k_over_n;
    let e = Complex64::from_polar(1.0, theta);
    let q2 = f64::from(q * q);
    let one = Complex64::new(1.0, 0.0);
    (
        e * (q2 * q2),
        (one + e) * q2,
        one,
        one,
        (one + e.conj()) / q2,
        e.conj() / (q2 * q2),
    )
}

/// Every Fourier block as a band matrix, k = 1..=n.
pub fn pbc_fourier_blocks_banded(n: usize, q: u32) -> Result<Vec<BandedC64>> {
    (1..=n)
        .map(|k| pbc_fourier_block(n, q, k).map(|b| b.to_banded()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_k_equals_n_is_real() {
        let [dm2, dm1, d0, d1, d2] = pbc_fourier_coefficients(7, 2, 7).unwrap();
        for d in [dm2, dm1, d0, d1, d2] {
            assert!(d.im.abs() < 1e-12);
        }
        assert!((d0.re - 2.0).abs() < 1e-15);
        let t = pbc_fourier_block(7, 2, 7).unwrap();
        assert!(t.data.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn factors_commute_and_reproduce_block() {
        for n in [4usize, 9, 16] {
            for q in [2u32, 3] {
                for k in 1..=n {
                    let (a, b) = pbc_fourier_factors(n, q, k).unwrap();
                    let comm = a.mul(&b).sub(&b.mul(&a));
                    assert!(comm.norm_inf() < 1e-12, "n={n} q={q} k={k}");
                    let (_, tau, sigma) = rates_f64(q);
                    let prod = a.mul(&b).scale(Complex64::new(sigma * tau, 0.0));
                    let t = pbc_fourier_block(n, q, k).unwrap();
                    assert!(prod.sub(&t).norm_inf() < 1e-12, "n={n} q={q} k={k}");
                }
            }
        }
    }

    #[test]
    fn invalid_momentum() {
        assert!(pbc_fourier_block(5, 2, 0).is_err());
        assert!(pbc_fourier_block(5, 2, 6).is_err());
        assert!(pbc_fourier_block(2, 2, 1).is_err());
    }
}
