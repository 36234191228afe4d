use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex band matrix with `kl` sub- and `ku` super-diagonals, stored row-wise with room
/// for the `kl` extra super-diagonals that partial pivoting creates.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedC64 {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row `i` holds columns `i − kl ..= i + ku + kl`, at offset `j + kl − i`.
    data: Vec<Complex64>,
}

impl BandedC64 {
    fn width(kl: usize, ku: usize) -> usize {
        2 * kl + ku + 1
    }

    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandedC64 {
            n,
            kl,
            ku,
            data: vec![Complex64::new(0.0, 0.0); n * Self::width(kl, ku)],
        }
    }

    /// Band matrix from an entry function; entries outside the band are ignored.
    pub fn from_fn(n: usize, kl: usize, ku: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n, kl, ku);
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Dense input with inferred bandwidths.
    pub fn from_dense(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let (mut kl, mut ku) = (0, 0);
        for (i, row) in rows.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                if *z != Complex64::new(0.0, 0.0) {
                    if i > j {
                        kl = kl.max(i - j);
                    } else {
                        ku = ku.max(j - i);
                    }
                }
            }
        }
        Self::from_fn(n, kl, ku, |i, j| rows[i][j])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * Self::width(self.kl, self.ku) + (j + self.kl - i)
    }

    fn in_storage(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku + self.kl && i < self.n && j < self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_storage(i, j) {
            self.data[self.idx(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn set(&mut self, i: usize, j: usize, z: Complex64) {
        let k = self.idx(i, j);
        self.data[k] = z;
    }

    /// `z I − A`.
    pub fn shifted(&self, z: Complex64) -> Self {
        let mut m = self.clone();
        for v in m.data.iter_mut() {
            *v = -*v;
        }
        for i in 0..self.n {
            let k = m.idx(i, i);
            m.data[k] += z;
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// LU factorization with partial pivoting. `None` if an exactly zero pivot appears.
    pub fn lu(&self) -> Option<BandedLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut a = self.clone();
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a.get(k, k).norm();
            for i in k + 1..=last_row {
                let v = a.get(i, k).norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return None;
            }
            piv[k] = p;
            let last_col = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (x, y) = (a.get(k, j), a.get(p, j));
                    a.set(k, j, y);
                    a.set(p, j, x);
                }
            }
            let inv = 1.0 / a.get(k, k);
            for i in k + 1..=last_row {
                let l = a.get(i, k) * inv;
                if l == Complex64::new(0.0, 0.0) {
                    a.set(i, k, l);
                    continue;
                }
                a.set(i, k, l);
                for j in k + 1..=last_col {
                    let v = a.get(i, j) - l * a.get(k, j);
                    a.set(i, j, v);
                }
            }
        }
        Some(BandedLu { lu: a, piv })
    }
}

/// Packed LU factors of a band matrix (LAPACK `gbtrf` layout).
#[derive(Clone, Debug)]
pub struct BandedLu {
    lu: BandedC64,
    piv: Vec<usize>,
}

impl BandedLu {
    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        let a = &self.lu;
        let n = a.n;
        let (kl, ku) = (a.kl, a.ku);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= a.get(i, k) * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + ku + kl).min(n - 1) {
                s -= a.get(i, j) * b[j];
            }
            b[i] = s / a.get(i, i);
        }
    }

    /// Solve `Aᴴ x = b` in place.
    pub fn solve_adjoint(&self, b: &mut [Complex64]) {
        let a = &self.lu;
        let n = a.n;
        let (kl, ku) = (a.kl, a.ku);
        // Uᴴ w = b
        for i in 0..n {
            let mut s = b[i];
            let lo = i.saturating_sub(ku + kl);
            for j in lo..i {
                s -= a.get(j, i).conj() * b[j];
            }
            b[i] = s / a.get(i, i).conj();
        }
        // apply (P_k L_k)^{-H} in reverse order
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                s -= a.get(i, k).conj() * b[i];
            }
            b[k] = s;
            b.swap(k, self.piv[k]);
        }
    }
}

/// Controls for inverse iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaMinOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SigmaMinOptions {
    fn default() -> Self {
        SigmaMinOptions {
            rel_tol: 1e-10,
            max_iter: 300,
        }
    }
}

fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Smallest singular value of `z I − A` by inverse iteration on `(zI−A)ᴴ(zI−A)`.
///
/// The estimate `1/‖(zI−A)^{-H} x‖` (unit `x`) decreases monotonically to σ_min;
/// iteration stops when successive estimates agree to `rel_tol`. An exactly singular
/// shift returns 0.
pub fn sigma_min(a: &BandedC64, z: Complex64, opts: SigmaMinOptions) -> Result<f64> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    let Some(lu) = a.shifted(z).lu() else {
        return Ok(0.0);
    };
    // deterministic, generic start vector
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = (i as f64 + 1.0) * 0.618_033_988_749_895;
            Complex64::new(1.0 + t.fract(), (2.0 * t).fract() - 0.5)
        })
        .collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut prev = f64::INFINITY;
    for _ in 0..opts.max_iter {
        lu.solve_adjoint(&mut x);
        let ny = norm2(&x);
        if !ny.is_finite() {
            return Ok(0.0);
        }
        let est = 1.0 / ny;
        lu.solve(&mut x);
        let nw = norm2(&x);
        if !nw.is_finite() || nw == 0.0 {
            return Ok(0.0);
        }
        x.iter_mut().for_each(|v| *v /= nw);
        if (prev - est).abs() <= opts.rel_tol * est {
            return Ok(est.max(0.0));
        }
        prev = est;
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        best_estimate: prev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn toeplitz(n: usize) -> BandedC64 {
        BandedC64::from_fn(n, 1, 1, |i, j| {
            if i == j {
                c(0.32, 0.0)
            } else if j == i + 1 {
                c(0.04, 0.0)
            } else {
                c(0.64, 0.0)
            }
        })
    }

    fn dense_mul(a: &[Vec<Complex64>], x: &[Complex64]) -> Vec<Complex64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
            .collect()
    }

    #[test]
    fn lu_solves_with_pivoting() {
        let m = BandedC64::from_fn(6, 2, 1, |i, j| {
            c((i * 3 + j) as f64 % 5.0 - 1.0, (i as f64 - j as f64) * 0.3)
        });
        let d = m.to_dense();
        let x_true: Vec<Complex64> = (0..6).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let mut b = dense_mul(&d, &x_true);
        m.lu().unwrap().solve(&mut b);
        for (u, v) in b.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-12);
        }
        // adjoint
        let dh: Vec<Vec<Complex64>> = (0..6)
            .map(|i| (0..6).map(|j| d[j][i].conj()).collect())
            .collect();
        let mut b = dense_mul(&dh, &x_true);
        m.lu().unwrap().solve_adjoint(&mut b);
        for (u, v) in b.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn sigma_min_at_eigenvalue_is_small() {
        let n = 12;
        let lam = 0.32 + 2.0 * (0.64f64 * 0.04).sqrt() * (std::f64::consts::PI / n as f64).cos();
        let s = sigma_min(&toeplitz(n - 1), c(lam, 0.0), SigmaMinOptions::default()).unwrap();
        assert!(s < 1e-8, "{s}");
    }

    #[test]
    fn sigma_min_far_away_is_large() {
        let a = toeplitz(20);
        let z = c(a.norm_inf() + 1.0, 0.5);
        let s = sigma_min(&a, z, SigmaMinOptions::default()).unwrap();
        assert!(s >= 1.0);
    }

    #[test]
    fn sigma_min_of_diagonal() {
        let a = BandedC64::from_fn(5, 0, 0, |i, _| c(i as f64, 0.0));
        let s = sigma_min(&a, c(2.3, 0.0), SigmaMinOptions::default()).unwrap();
        assert!((s - 0.3).abs() < 1e-9);
    }
}
