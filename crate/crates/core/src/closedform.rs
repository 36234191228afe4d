//! Closed-form and semi-analytic evaluations of `O(t)`, used as oracles for iteration.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{binomial, catalan, gamma_ratio_3half_3, hyp2f1, Scalar, DEFAULT_PRECISION};
use crate::transfer::{Rates, VectorPair};

/// Shape of the convolution `C(r) = Σ_k p_{k+r} v_k` between the initial vectors.
#[derive(Clone, Debug, PartialEq)]
pub enum ProfileKind {
    Constant,
    Exponential { mu: Scalar },
    Tabulated,
}

/// `C(r)` for `r = 0..values.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvolutionProfile {
    pub kind: ProfileKind,
    pub values: Vec<Scalar>,
}

impl ConvolutionProfile {
    /// `C ≡ 1` up to `r_max`.
    pub fn constant(r_max: usize) -> Self {
        ConvolutionProfile {
            kind: ProfileKind::Constant,
            values: vec![Scalar::one(); r_max + 1],
        }
    }

    /// `C(r) = μ^{−r}` up to `r_max`, exact for rational μ.
    pub fn exponential(mu: &Scalar, r_max: usize) -> Result<Self> {
        if !mu.is_positive() {
            return Err(Error::Domain(format!("mu = {mu} must be > 0")));
        }
        let inv = mu.recip()?;
        let mut values = Vec::with_capacity(r_max + 1);
        let mut w = Scalar::one();
        for _ in 0..=r_max {
            values.push(w.clone());
            w *= &inv;
        }
        Ok(ConvolutionProfile {
            kind: ProfileKind::Exponential { mu: mu.clone() },
            values,
        })
    }

    pub fn tabulated(values: Vec<Scalar>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty convolution table".into()));
        }
        Ok(ConvolutionProfile {
            kind: ProfileKind::Tabulated,
            values,
        })
    }

    /// Profile of a given vector pair under the lower shift: `C(r) = Σ_k p_{k+r} v_k`.
    pub fn from_pair(pair: &VectorPair) -> Result<Self> {
        let n = pair.dim();
        let values = (0..n)
            .map(|r| {
                (0..n - r).fold(Scalar::zero(), |mut acc, k| {
                    acc.mul_add_assign(&pair.p[k + r], &pair.v[k]);
                    acc
                })
            })
            .collect();
        Self::tabulated(values)
    }

    /// Vector pair of dimension `dim` realising this profile: `p_k = C(k−1)`, `v = e₁`.
    pub fn realize(&self, dim: usize) -> Result<VectorPair> {
        if dim == 0 || dim > self.values.len() {
            return Err(Error::Domain(format!(
                "cannot realise dimension {dim} from {} profile values",
                self.values.len()
            )));
        }
        let mut v = vec![Scalar::zero(); dim];
        v[0] = Scalar::one();
        VectorPair::custom(self.values[..dim].to_vec(), v)
    }

    pub fn get(&self, r: usize) -> Option<&Scalar> {
        self.values.get(r)
    }
}

/// `O(t) = Σ_{r=0}^{min(t,n−1)} C(t,r) δ^{t−r} σ^r C(r)` for the two-diagonal matrix.
pub fn jordan_closed(
    t: usize,
    n: usize,
    delta: &Scalar,
    sigma: &Scalar,
    profile: &ConvolutionProfile,
) -> Result<Scalar> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let r_max = t.min(n - 1);
    if profile.values.len() <= r_max {
        return Err(Error::Domain(format!(
            "profile has {} values, need {}",
            profile.values.len(),
            r_max + 1
        )));
    }
    let mut acc = Scalar::zero();
    for r in 0..=r_max {
        let w = Scalar::from(binomial(t as u64, r as u64))
            * delta.powi((t - r) as i32)?
            * sigma.powi(r as i32)?;
        acc.mul_add_assign(&w, &profile.values[r]);
    }
    Ok(acc)
}

/// Probability that the walk started at the leftmost bulk site sits in the left bath at
/// time `t` (infinite bulk):
/// `r₁(t) = τ Σ_{T<t} Σ_k Cat(k) (τσ)^k δ^{T−2k} C(T,2k)`.
pub fn r1_catalan(t: usize, delta: &Scalar, tau: &Scalar, sigma: &Scalar) -> Result<Scalar> {
    let ts = tau * sigma;
    let mut total = Scalar::zero();
    for big_t in 0..t {
        let mut inner = Scalar::zero();
        for k in 0..=big_t / 2 {
            let w = Scalar::from(catalan(k as u64) * binomial(big_t as u64, 2 * k as u64))
                * ts.powi(k as i32)?;
            inner.mul_add_assign(&w, &delta.powi((big_t - 2 * k) as i32)?);
        }
        total += inner;
    }
    Ok(tau * &total)
}

fn q2_hyp(b_num: u64, c: u64, t: usize, precision: u32) -> Result<Float> {
    // ₂F₁(1, b_num/2 + t, c + t; 16/25)
    let b = Scalar::Float(Float::with_val(precision, b_num + 2 * t as u64) / 2u32);
    let c = Scalar::from(c + t as u64);
    let z = Scalar::ratio(16, 25);
    Ok(hyp2f1(&Scalar::Float(Float::with_val(precision, 1)), &b, &c, &z)?.float_or(precision))
}

/// OBC OTOC for `q = 2`:
/// `1 + (64/(375√π)) (16/25)^t Γ(3/2+t)/Γ(3+t) ₂F₁(1, 3/2+t; 3+t; 16/25)`.
///
/// Equals `(16/15)(1 − r₁(t))`, so `O(0) = 16/15` and `O(∞) = 1`.
pub fn otoc_closed_q2(t: usize, precision: u32) -> Result<Scalar> {
    let p = precision;
    let f = q2_hyp(3, 3, t, p)?;
    let g = gamma_ratio_3half_3(t as u64, p).float_or(p);
    let sqrt_pi = Float::with_val(p, Constant::Pi).sqrt();
    let pref = Float::with_val(p, 64u32) / Float::with_val(p, &sqrt_pi * 375u32);
    let pow = Float::with_val(p, 16u32) / 25u32;
    let pow = pow.pow(t as u32);
    let tail = pref * pow * g * f;
    Ok(Scalar::Float(tail + 1u32))
}

/// Ratio `₂F₁(1, 5/2+t; 4+t; 16/25) / ₂F₁(1, 3/2+t; 3+t; 16/25)` of the rate formula.
pub fn hyp_ratio_q2(t: usize, precision: u32) -> Result<Scalar> {
    let num = q2_hyp(5, 4, t, precision)?;
    let den = q2_hyp(3, 3, t, precision)?;
    Ok(Scalar::Float(num / den))
}

/// `λ_eff(t) = (16/25) ((3/2+t)/(3+t)) · hyp_ratio_q2(t)`.
pub fn rate_closed_q2(t: usize, precision: u32) -> Result<Scalar> {
    let r = hyp_ratio_q2(t, precision)?.float_or(precision);
    let frac = Float::with_val(precision, 2 * t as u64 + 3) / (2 * t as u64 + 6);
    Ok(Scalar::Float(r * frac * 16u32 / 25u32))
}

/// How the inner sum over sites in [`spectral_sum_obc_with`] is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSum {
    #[default]
    Direct,
    Closed,
}

struct ObcSpectralData {
    p: u32,
    lambdas: Vec<Float>,
    sines: Vec<Float>,
    coses: Vec<Float>,
    sqrt_rho: Float,
}

fn obc_spectral_data(n: usize, rates: &Rates, precision: u32) -> Result<ObcSpectralData> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} must be >= 2")));
    }
    if !(rates.sigma.is_positive() && rates.tau.is_positive()) {
        return Err(Error::Domain("need σ > 0 and τ > 0".into()));
    }
    let p = precision;
    let pi = Float::with_val(p, Constant::Pi);
    let st2 = Float::with_val(p, (&rates.sigma * &rates.tau).to_float(p).sqrt() * 2u32);
    let delta = rates.delta.to_float(p);
    let (mut lambdas, mut sines, mut coses) = (Vec::new(), Vec::new(), Vec::new());
    for h in 1..n {
        let ang = Float::with_val(p, &pi * h as u32) / n as u32;
        let (s, c) = ang.sin_cos(Float::new(p));
        lambdas.push(Float::with_val(p, &delta + &st2 * &c));
        sines.push(s);
        coses.push(c);
    }
    let sqrt_rho = (rates.sigma.to_float(p) / rates.tau.to_float(p)).sqrt();
    Ok(ObcSpectralData {
        p,
        lambdas,
        sines,
        coses,
        sqrt_rho,
    })
}

/// `Σ_{k=1}^{n−1} (σ/τ)^{k/2} sin(hkπ/n)` summed term by term.
pub fn inner_sum_direct(h: usize, n: usize, rates: &Rates, precision: u32) -> Result<Scalar> {
    let d = obc_spectral_data(n, rates, precision)?;
    Ok(Scalar::Float(direct_inner(&d, h, n)))
}

fn direct_inner(d: &ObcSpectralData, h: usize, n: usize) -> Float {
    let p = d.p;
    let pi = Float::with_val(p, Constant::Pi);
    let mut acc = Float::new(p);
    let mut w = Float::with_val(p, 1);
    for k in 1..n {
        w *= &d.sqrt_rho;
        let s = (Float::with_val(p, &pi * (h * k) as u64) / n as u32).sin();
        acc += Float::with_val(p, &w * &s);
    }
    acc
}

/// Closed form of the inner sum:
/// `√ρ (1 − (−1)^h ρ^{n/2}) sin(hπ/n) / (1 + ρ − 2√ρ cos(hπ/n))`, `ρ = σ/τ`.
pub fn inner_sum_closed(h: usize, n: usize, rates: &Rates, precision: u32) -> Result<Scalar> {
    let d = obc_spectral_data(n, rates, precision)?;
    if h == 0 || h >= n {
        return Err(Error::Domain(format!("h = {h} outside 1..{n}")));
    }
    Ok(Scalar::Float(closed_inner(&d, h, n)))
}

fn closed_inner(d: &ObcSpectralData, h: usize, n: usize) -> Float {
    let p = d.p;
    let rho = Float::with_val(p, d.sqrt_rho.square_ref());
    let rho_half_n = Float::with_val(p, d.sqrt_rho.clone().pow(n as u32));
    let sign = if h % 2 == 0 { -1i32 } else { 1 };
    let num = Float::with_val(p, &rho_half_n * sign) + 1u32;
    let num = num * &d.sqrt_rho * &d.sines[h - 1];
    let den = Float::with_val(p, &rho + 1u32) - Float::with_val(p, &d.sqrt_rho * &d.coses[h - 1]) * 2u32;
    num / den
}

/// `⟨1|Tᵗ|e₁⟩` for the OBC Toeplitz block from its spectral decomposition
/// `(2/n) Σ_h λ_h^t √(τ/σ) sin(hπ/n) Σ_k (σ/τ)^{k/2} sin(hkπ/n)`.
pub fn spectral_sum_obc(t: usize, n: usize, rates: &Rates, precision: u32) -> Result<Scalar> {
    spectral_sum_obc_with(t, n, rates, precision, InnerSum::Direct)
}

pub fn spectral_sum_obc_with(
    t: usize,
    n: usize,
    rates: &Rates,
    precision: u32,
    inner: InnerSum,
) -> Result<Scalar> {
    let d = obc_spectral_data(n, rates, precision)?;
    let p = d.p;
    let mut acc = Float::new(p);
    for h in 1..n {
        let s = match inner {
            InnerSum::Direct => direct_inner(&d, h, n),
            InnerSum::Closed => closed_inner(&d, h, n),
        };
        let lt = Float::with_val(p, d.lambdas[h - 1].clone().pow(t as u32));
        acc += lt * &d.sines[h - 1] * s;
    }
    let out = acc * 2u32 / n as u32 / &d.sqrt_rho;
    Ok(Scalar::Float(out))
}

/// Probes of the leading-term cancellation for the OBC Toeplitz block with `p = 1`,
/// `v = e₁`, `λ_ps = δ + σ + τ`, `ρ = σ/τ`:
///
/// - the `(−1)^h` part of the one-sum form,
///   `L(t) = −(2τ ρ^{n/2}/n) Σ_h (−1)^h λ_h^t sin²(hπ/n)/(λ_ps − λ_h)`, divided by
///   its infinite-size limit `1 − τ/σ`;
/// - the interior sum `I_k = Σ_h (−1)^h sin²(hπ/n) (λ_h/λ_ps)^k` at `k = t`.
pub fn leading_term_checks(
    n: usize,
    rates: &Rates,
    t: usize,
    precision: u32,
) -> Result<(Scalar, Scalar)> {
    if rates.sigma <= rates.tau {
        return Err(Error::Domain("leading-term probes need σ > τ".into()));
    }
    let d = obc_spectral_data(n, rates, precision)?;
    let p = d.p;
    let lps = rates.sum().to_float(p);
    let mut lead = Float::new(p);
    let mut interior = Float::new(p);
    for h in 1..n {
        let lam = &d.lambdas[h - 1];
        let s2 = Float::with_val(p, d.sines[h - 1].square_ref());
        let sign = if h % 2 == 0 { 1i32 } else { -1 };
        let gap = Float::with_val(p, &lps - lam);
        let lt = Float::with_val(p, lam.clone().pow(t as u32));
        lead += Float::with_val(p, &lt * &s2) / &gap * sign;
        let ratio = Float::with_val(p, lam / &lps).pow(t as u32);
        interior += ratio * &s2 * sign;
    }
    let rho_half_n = Float::with_val(p, d.sqrt_rho.clone().pow(n as u32));
    let tau = rates.tau.to_float(p);
    let pref = Float::with_val(p, &tau * &rho_half_n) * 2u32 / n as u32;
    let lead = -(lead * pref);
    let limit = Float::with_val(p, 1u32) - tau / rates.sigma.to_float(p);
    Ok((Scalar::Float(lead / limit), Scalar::Float(interior)))
}

/// `λ(μ) = δ + σ/μ + τμ`, the decay rate selected by `p_k ∝ μ^{−k}`.
pub fn lambda_mu(rates: &Rates, mu: &Scalar) -> Result<Scalar> {
    if !mu.is_positive() {
        return Err(Error::Domain(format!("mu = {mu} must be > 0")));
    }
    Ok(&(&rates.delta + &rates.sigma.checked_div(mu)?) + &(&rates.tau * mu))
}

/// Default precision for the closed forms when the caller has no preference.
pub const CLOSEDFORM_PRECISION: u32 = DEFAULT_PRECISION;
