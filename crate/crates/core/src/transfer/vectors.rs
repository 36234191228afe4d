use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::numerics::{Backend, Scalar};

/// Where a vector pair came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    OtocObc { j: usize },
    /// `physical_sink` is false for the variant whose last `p` component is zeroed.
    OtocPbc { j: usize, physical_sink: bool },
    ExpLocalized { mu: Scalar },
    RandomStochastic { seed: u64 },
    Custom,
}

/// Left vector `p` and right vector `v` of `O(t) = p·Aᵗ·v`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPair {
    pub p: Vec<Scalar>,
    pub v: Vec<Scalar>,
    pub provenance: Provenance,
}

impl VectorPair {
    pub fn custom(p: Vec<Scalar>, v: Vec<Scalar>) -> Result<Self> {
        if p.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                found: v.len(),
            });
        }
        Ok(VectorPair {
            p,
            v,
            provenance: Provenance::Custom,
        })
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn to_backend(&self, backend: Backend) -> VectorPair {
        VectorPair {
            p: self.p.iter().map(|x| backend.convert(x)).collect(),
            v: self.v.iter().map(|x| backend.convert(x)).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// OTOC vectors for the open chain of `n` spins: `v = (q⁴/(q⁴−1), 0, …)` and
    /// `p_k = 1` for `k ≥ ⌈j/2⌉` (1-based domain width).
    pub fn otoc_obc(n: usize, q: u32, j: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("n = {n} must be >= 2")));
        }
        if q < 2 {
            return Err(Error::Domain(format!("q = {q} must be >= 2")));
        }
        if j < 1 || j > 2 * n {
            return Err(Error::Domain(format!("target j = {j} outside 1..={}", 2 * n)));
        }
        let q4 = i64::from(q).pow(4);
        let mut v = vec![Scalar::zero(); n];
        v[0] = Scalar::ratio(q4, q4 - 1);
        let threshold = j.div_ceil(2);
        let p = (1..=n)
            .map(|k| {
                if k >= threshold {
                    Scalar::one()
                } else {
                    Scalar::zero()
                }
            })
            .collect();
        Ok(VectorPair {
            p,
            v,
            provenance: Provenance::OtocObc { j },
        })
    }

    /// OTOC vectors for the periodic chain: dimension `n(n−1)+1`,
    /// `v_1 = q²`, `v_{(n−1)²+1} = q²`, `v_{(n−1)²} = q⁴` and
    /// `p_{(n−1)(i−1)+k} = 1` for `k` from `(j−i+1) mod (n−1)` (0 read as n−1) to n−1.
    pub fn otoc_pbc(n: usize, q: u32, j: usize) -> Result<Self> {
        Self::otoc_pbc_with_sink(n, q, j, true)
    }

    /// As [`VectorPair::otoc_pbc`], with the sink component of `p` set to 0 when
    /// `physical_sink` is false.
    pub fn otoc_pbc_with_sink(n: usize, q: u32, j: usize, physical_sink: bool) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("n = {n} must be >= 3")));
        }
        if q < 2 {
            return Err(Error::Domain(format!("q = {q} must be >= 2")));
        }
        if j < 1 || j > n {
            return Err(Error::Domain(format!("target j = {j} outside 1..={n}")));
        }
        let m = n - 1;
        let dim = n * m + 1;
        let q2 = i64::from(q).pow(2);
        let mut v = vec![Scalar::zero(); dim];
        v[0] = Scalar::from(q2);
        v[m * m] = Scalar::from(q2);
        v[m * m - 1] = Scalar::from(q2 * q2);
        let mut p = vec![Scalar::zero(); dim];
        for i in 1..=n {
            let mut start = (j as i64 - i as i64 + 1).rem_euclid(m as i64) as usize;
            if start == 0 {
                start = m;
            }
            for k in start..=m {
                p[m * (i - 1) + k - 1] = Scalar::one();
            }
        }
        if physical_sink {
            p[dim - 1] = Scalar::one();
        }
        Ok(VectorPair {
            p,
            v,
            provenance: Provenance::OtocPbc { j, physical_sink },
        })
    }

    /// `p_k = μ^{−k}` (k = 1..dim) and `v = e_1`.
    pub fn exp_localized(dim: usize, mu: &Scalar) -> Result<Self> {
        if !mu.is_positive() {
            return Err(Error::Domain(format!("mu = {mu} must be > 0")));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        let inv = mu.recip()?;
        let mut p = Vec::with_capacity(dim);
        let mut w = inv.clone();
        for _ in 0..dim {
            p.push(w.clone());
            w *= &inv;
        }
        let mut v = vec![Scalar::zero(); dim];
        v[0] = Scalar::one();
        Ok(VectorPair {
            p,
            v,
            provenance: Provenance::ExpLocalized { mu: mu.clone() },
        })
    }

    /// Pair the given `p` with a random non-negative `v` whose entries sum to exactly 1.
    pub fn random_stochastic(p: Vec<Scalar>, seed: u64) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        let v = random_simplex_point(p.len(), seed);
        Ok(VectorPair {
            p,
            v,
            provenance: Provenance::RandomStochastic { seed },
        })
    }

    /// Open chain: `p_k = 1 − δ_{k,n}` with a random stochastic `v`.
    pub fn random_obc(n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("n = {n} must be >= 2")));
        }
        let mut p = vec![Scalar::one(); n];
        p[n - 1] = Scalar::zero();
        Self::random_stochastic(p, seed)
    }

    /// Periodic chain: OTOC `p` with the sink weight zeroed and a random stochastic `v`.
    pub fn random_pbc(n: usize, q: u32, j: usize, seed: u64) -> Result<Self> {
        let base = Self::otoc_pbc_with_sink(n, q, j, false)?;
        Self::random_stochastic(base.p, seed)
    }
}

/// Exact rational point of the simplex: integer weights in `[1, 2³²)` normalized by their sum.
pub fn random_simplex_point(dim: usize, seed: u64) -> Vec<Scalar> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<u64> = (0..dim).map(|_| rng.gen_range(1..(1u64 << 32))).collect();
    let total: Integer = w.iter().map(|&x| Integer::from(x)).sum();
    w.into_iter()
        .map(|x| Scalar::Exact(Rational::from((Integer::from(x), total.clone()))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[Scalar]) -> Vec<i64> {
        v.iter().map(|x| x.to_f64() as i64).collect()
    }

    #[test]
    fn obc_otoc_examples() {
        let a = VectorPair::otoc_obc(4, 2, 2).unwrap();
        assert_eq!(a.v[0], Scalar::ratio(16, 15));
        assert_eq!(ints(&a.p), vec![1, 1, 1, 1]);
        let b = VectorPair::otoc_obc(4, 2, 8).unwrap();
        assert_eq!(ints(&b.p), vec![0, 0, 0, 1]);
        // odd j rounds the width threshold up
        let c = VectorPair::otoc_obc(4, 2, 3).unwrap();
        assert_eq!(ints(&c.p), vec![0, 1, 1, 1]);
        assert!(VectorPair::otoc_obc(4, 2, 9).is_err());
        assert!(VectorPair::otoc_obc(4, 2, 0).is_err());
    }

    #[test]
    fn pbc_otoc_v_pattern() {
        let a = VectorPair::otoc_pbc(3, 2, 1).unwrap();
        assert_eq!(a.dim(), 7);
        let nz: Vec<(usize, i64)> = a
            .v
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| (i + 1, x.to_f64() as i64))
            .collect();
        assert_eq!(nz, vec![(1, 4), (4, 16), (5, 4)]);
        assert_eq!(a.p[6], Scalar::one());
        let b = VectorPair::otoc_pbc_with_sink(3, 2, 1, false).unwrap();
        assert!(b.p[6].is_zero());
        assert_eq!(a.p[..6], b.p[..6]);
    }

    #[test]
    fn pbc_otoc_p_pattern_literal() {
        // n=4, j=4: blocks i=1..4 start at (4-i+1) mod 3 -> 1,0->3,2,1
        let a = VectorPair::otoc_pbc(4, 2, 4).unwrap();
        let p = ints(&a.p);
        assert_eq!(p[0..3], [1, 1, 1]);
        assert_eq!(p[3..6], [0, 0, 1]);
        assert_eq!(p[6..9], [0, 1, 1]);
        assert_eq!(p[9..12], [1, 1, 1]);
        assert_eq!(p[12], 1);
    }

    #[test]
    fn random_v_sums_to_one_exactly() {
        for seed in 0..20 {
            let pair = VectorPair::random_obc(17, seed).unwrap();
            let s: Scalar = pair.v.iter().cloned().sum();
            assert_eq!(s, Scalar::one());
            assert!(pair.v.iter().all(|x| x.is_positive()));
        }
        assert_eq!(
            VectorPair::random_obc(5, 3).unwrap(),
            VectorPair::random_obc(5, 3).unwrap()
        );
    }

    #[test]
    fn exp_localized_weights() {
        let pair = VectorPair::exp_localized(3, &Scalar::from(2)).unwrap();
        assert_eq!(pair.p, vec![Scalar::ratio(1, 2), Scalar::ratio(1, 4), Scalar::ratio(1, 8)]);
        assert!(VectorPair::exp_localized(3, &Scalar::zero()).is_err());
    }
}
