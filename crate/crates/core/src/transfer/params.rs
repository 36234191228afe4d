use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Backend, Scalar};

/// Boundary condition / model family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Obc,
    Pbc,
    MarkovWalk,
    Jordan,
    Custom,
}

/// Gate rates: stay (δ), move left (τ), move right (σ).
#[derive(Clone, Debug, PartialEq)]
pub struct Rates {
    pub delta: Scalar,
    pub tau: Scalar,
    pub sigma: Scalar,
}

impl Rates {
    /// Rates of the Haar-random brickwork circuit with local dimension `q`, exact.
    pub fn from_q(q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::Domain(format!("local dimension q={q} must be >= 2")));
        }
        let q2 = i64::from(q) * i64::from(q);
        let den = (1 + q2) * (1 + q2);
        Ok(Rates {
            delta: Scalar::ratio(2 * q2, den),
            tau: Scalar::ratio(1, den),
            sigma: Scalar::ratio(q2 * q2, den),
        })
    }

    pub fn new(delta: Scalar, tau: Scalar, sigma: Scalar) -> Result<Self> {
        for (name, x) in [("delta", &delta), ("tau", &tau), ("sigma", &sigma)] {
            if x.is_negative() || !x.is_finite() {
                return Err(Error::Domain(format!("rate {name} = {x} must be >= 0")));
            }
        }
        Ok(Rates { delta, tau, sigma })
    }

    pub fn sum(&self) -> Scalar {
        &(&self.delta + &self.tau) + &self.sigma
    }

    /// True if δ+τ+σ = 1 exactly, or within a few ulps for floats.
    pub fn is_stochastic(&self) -> bool {
        let s = self.sum();
        match s.precision() {
            None => s == Scalar::one(),
            Some(p) => {
                let tol = Scalar::from_f64(2f64.powi(-(p as i32) + 4), p);
                (&s - &Scalar::one()).abs() <= tol
            }
        }
    }

    pub fn to_backend(&self, backend: Backend) -> Rates {
        Rates {
            delta: backend.convert(&self.delta),
            tau: backend.convert(&self.tau),
            sigma: backend.convert(&self.sigma),
        }
    }
}

/// Parameters of one model instance.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub boundary: Boundary,
    /// Number of spins (OBC/PBC), bulk sites (walk) or matrix dimension (Jordan).
    pub n: usize,
    /// Local dimension if the rates came from it.
    pub q: Option<u32>,
    pub rates: Rates,
    pub mu: Option<Scalar>,
    /// Target site for OTOC vectors.
    pub j: Option<usize>,
}

impl ModelParams {
    pub fn qudit(boundary: Boundary, n: usize, q: u32) -> Result<Self> {
        Ok(ModelParams {
            boundary,
            n,
            q: Some(q),
            rates: Rates::from_q(q)?,
            mu: None,
            j: None,
        })
    }

    pub fn explicit(boundary: Boundary, n: usize, rates: Rates) -> Self {
        ModelParams {
            boundary,
            n,
            q: None,
            rates,
            mu: None,
            j: None,
        }
    }

    pub fn with_mu(mut self, mu: Scalar) -> Result<Self> {
        if !mu.is_positive() {
            return Err(Error::Domain(format!("mu = {mu} must be > 0")));
        }
        self.mu = Some(mu);
        Ok(self)
    }

    pub fn with_target(mut self, j: usize) -> Self {
        self.j = Some(j);
        self
    }

    pub(crate) fn require_q(&self) -> Result<u32> {
        self.q
            .ok_or_else(|| Error::Domain("this model requires an integer local dimension q".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q2_rates() {
        let r = Rates::from_q(2).unwrap();
        assert_eq!(r.delta, Scalar::ratio(8, 25));
        assert_eq!(r.tau, Scalar::ratio(1, 25));
        assert_eq!(r.sigma, Scalar::ratio(16, 25));
        assert!(r.is_stochastic());
        assert!(r.to_backend(Backend::default()).is_stochastic());
    }

    #[test]
    fn rates_sum_to_one_for_all_q() {
        for q in 2..20 {
            assert_eq!(Rates::from_q(q).unwrap().sum(), Scalar::one());
        }
        assert!(Rates::from_q(1).is_err());
    }

    #[test]
    fn negative_rate_rejected() {
        assert!(Rates::new(Scalar::from(-1), Scalar::zero(), Scalar::zero()).is_err());
    }

    #[test]
    fn mu_must_be_positive() {
        let p = ModelParams::qudit(Boundary::Obc, 4, 2).unwrap();
        assert!(p.clone().with_mu(Scalar::zero()).is_err());
        assert!(p.with_mu(Scalar::ratio(27, 20)).is_ok());
    }
}
