//! Effective decay rates, phantom plateaus and transition times.

use serde::{Deserialize, Serialize};

use crate::closedform::lambda_mu;
use crate::error::{Error, Result};
use crate::numerics::{Backend, Scalar};
use crate::spectral::{obc_lambda2, pbc_lambda2};
use crate::transfer::{
    build, build_toeplitz, iterate_with_backend, Boundary, DecaySeries, ModelParams, Rates,
    VectorPair,
};

/// Entries with `|O(t) − O(∞)|` at or below this are not used as denominators.
pub const DEFAULT_FLOOR: f64 = 1e-60;
/// Plateau window length used when the caller has no preference.
pub const DEFAULT_WINDOW: usize = 10;
/// Tolerance of the ordering verdict.
pub const ORDERING_TOLERANCE: f64 = 0.02;

/// Flattest stretch of the effective rate.
#[derive(Clone, Debug, PartialEq)]
pub struct Plateau {
    /// Geometric mean of λ_eff over the window.
    pub rate: Scalar,
    pub t_start: usize,
    /// Inclusive.
    pub t_end: usize,
    /// `max − min` of `ln λ_eff` over the window.
    pub flatness: f64,
}

/// Reference rates attached to a profile.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct References {
    pub lambda2: Option<Scalar>,
    pub lambda_ps: Option<Scalar>,
    pub lambda_mu: Option<Scalar>,
}

/// `λ_eff(t) = (O(t+1) − O(∞)) / (O(t) − O(∞))` where defined.
#[derive(Clone, Debug, PartialEq)]
pub struct RateProfile {
    pub rates: Vec<(usize, Scalar)>,
    /// Times dropped because `|O(t) − O(∞)|` was below the floor.
    pub omitted: Vec<usize>,
    /// System size of the underlying matrix.
    pub horizon: usize,
    pub plateau: Option<Plateau>,
    pub t_c: Option<f64>,
    pub references: References,
}

impl RateProfile {
    pub fn rate_at(&self, t: usize) -> Option<&Scalar> {
        self.rates
            .binary_search_by_key(&t, |(s, _)| *s)
            .ok()
            .map(|i| &self.rates[i].1)
    }

    /// Last defined rate, i.e. the latest-time estimate.
    pub fn last(&self) -> Option<&(usize, Scalar)> {
        self.rates.last()
    }
}

pub fn effective_rate(series: &DecaySeries) -> RateProfile {
    effective_rate_with_floor(series, DEFAULT_FLOOR)
}

pub fn effective_rate_with_floor(series: &DecaySeries, floor: f64) -> RateProfile {
    let decay: Vec<Scalar> = (0..series.values.len()).map(|t| series.decay_part(t)).collect();
    let mut rates = Vec::new();
    let mut omitted = Vec::new();
    for t in 0..decay.len().saturating_sub(1) {
        let (a, b) = (&decay[t], &decay[t + 1]);
        if a.abs().to_f64() <= floor || b.abs().to_f64() <= floor {
            omitted.push(t);
            continue;
        }
        match b.checked_div(a) {
            Ok(r) => rates.push((t, r)),
            Err(_) => omitted.push(t),
        }
    }
    RateProfile {
        rates,
        omitted,
        horizon: series.system_size,
        plateau: None,
        t_c: None,
        references: References::default(),
    }
}

/// Flattest `window`-step stretch of λ_eff with `t ∈ [window, horizon]`; phantom plateaus
/// last until `t ∼ n`.
pub fn plateau_rate(profile: &RateProfile, window: usize) -> Result<Plateau> {
    plateau_rate_within(profile, window, window, profile.horizon)
}

/// Flattest `window`-step stretch lying inside `[lo, hi]` (inclusive).
pub fn plateau_rate_within(
    profile: &RateProfile,
    window: usize,
    lo: usize,
    hi: usize,
) -> Result<Plateau> {
    if window < 5 {
        return Err(Error::Domain(format!("window = {window} must be >= 5")));
    }
    let pts: Vec<&(usize, Scalar)> = profile
        .rates
        .iter()
        .filter(|(t, _)| *t >= lo && *t <= hi)
        .collect();
    let mut best: Option<(f64, usize)> = None;
    for start in 0..pts.len() {
        let end = start + window - 1;
        if end >= pts.len() {
            break;
        }
        // consecutive times with positive rates only
        if pts[end].0 - pts[start].0 != window - 1 {
            continue;
        }
        let logs: Option<Vec<f64>> = pts[start..=end]
            .iter()
            .map(|(_, r)| r.is_positive().then(|| r.to_f64().ln()))
            .collect();
        let Some(logs) = logs else { continue };
        let mx = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mn = logs.iter().cloned().fold(f64::INFINITY, f64::min);
        let flat = mx - mn;
        if best.is_none_or(|(f, _)| flat < f) {
            best = Some((flat, start));
        }
    }
    let (flatness, start) = best.ok_or_else(|| {
        Error::Estimation(format!(
            "no admissible window of {window} consecutive positive rates in [{lo}, {hi}]"
        ))
    })?;
    let stretch = &pts[start..start + window];
    let first = &stretch[0].1;
    let rate = if stretch.iter().all(|(_, r)| r == first) {
        first.clone()
    } else {
        let prec = stretch
            .iter()
            .filter_map(|(_, r)| r.precision())
            .max()
            .unwrap_or(crate::numerics::DEFAULT_PRECISION);
        let mut sum = Scalar::zero();
        for (_, r) in stretch {
            sum += r.ln(prec)?;
        }
        (sum.checked_div(&Scalar::from(window))?).exp(prec)
    };
    Ok(Plateau {
        rate,
        t_start: stretch[0].0,
        t_end: stretch[window - 1].0,
        flatness,
    })
}

/// First time after `t_min` at which λ_eff drops below `threshold`, interpolated linearly
/// between the bracketing integer steps. `None` if there is no crossing.
pub fn transition_time_after(profile: &RateProfile, threshold: &Scalar, t_min: usize) -> Option<f64> {
    let th = threshold.to_f64();
    let mut prev: Option<(usize, f64)> = None;
    for (t, r) in profile.rates.iter().filter(|(t, _)| *t >= t_min) {
        let x = r.to_f64();
        if x < th {
            return Some(match prev {
                Some((tp, xp)) if tp + 1 == *t && xp > x => tp as f64 + (xp - th) / (xp - x),
                _ => *t as f64,
            });
        }
        prev = Some((*t, x));
    }
    None
}

/// Smallest `t` with `λ_eff(t) < threshold`, linearly interpolated.
pub fn transition_time(profile: &RateProfile, threshold: &Scalar) -> Option<f64> {
    transition_time_after(profile, threshold, 0)
}

/// Vector-pair recipe for [`compare_report`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairKind {
    /// OTOC vectors with target site `j` (source `i = n` for the periodic chain).
    Otoc { j: usize },
    /// `p_k = μ^{−k}`, `v = e₁`; μ is taken from the model parameters.
    ExpLocalized,
    /// `p_k = 1 − δ_{k,n}` (open) or OTOC `p` with zeroed sink (periodic), random `v`.
    RandomStochastic { seed: u64 },
}

/// Relative position of the measured phantom rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingVerdict {
    /// λ_ph ≈ λ₂.
    EqualLow,
    /// λ_ph ≈ λ_ps.
    EqualHigh,
    /// λ₂ < λ_ph < λ_ps.
    Strict,
    Below,
    Above,
}

impl OrderingVerdict {
    pub fn classify(lambda2: f64, lambda_ph: f64, lambda_ps: f64, tol: f64) -> Self {
        if (lambda_ph - lambda2).abs() <= tol {
            OrderingVerdict::EqualLow
        } else if (lambda_ph - lambda_ps).abs() <= tol {
            OrderingVerdict::EqualHigh
        } else if lambda_ph < lambda2 {
            OrderingVerdict::Below
        } else if lambda_ph > lambda_ps {
            OrderingVerdict::Above
        } else {
            OrderingVerdict::Strict
        }
    }

    /// Whether `λ₂ − tol ≤ λ_ph ≤ λ_ps + tol`.
    pub fn is_consistent(self) -> bool {
        !matches!(self, OrderingVerdict::Below | OrderingVerdict::Above)
    }
}

/// Settings for [`compare_report`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareOptions {
    pub backend: Backend,
    /// Iteration horizon as a multiple of the system size.
    pub horizon_factor: usize,
    pub window: usize,
    pub threshold: Option<f64>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            backend: Backend::Float { precision: 256 },
            horizon_factor: 3,
            window: DEFAULT_WINDOW,
            threshold: None,
        }
    }
}

/// Analytic references and measured rates for one model and vector pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub boundary: Boundary,
    pub n: usize,
    pub q: Option<u32>,
    pub pair: PairKind,
    pub lambda2: f64,
    pub lambda_ps: f64,
    pub lambda_mu: Option<f64>,
    pub lambda_ph: f64,
    pub plateau_window: (usize, usize),
    pub late_rate: Option<f64>,
    pub t_c: Option<f64>,
    pub threshold: Option<f64>,
    pub verdict: OrderingVerdict,
    pub t_max: usize,
    pub backend: Backend,
}

/// Largest non-unit eigenvalue magnitude and the pseudospectral edge of the model matrix
/// (with μ applied when the pair is exponentially localised).
pub fn reference_rates(params: &ModelParams, pair: &PairKind, precision: u32) -> Result<References> {
    let r = &params.rates;
    let n = params.n;
    let mu = match pair {
        PairKind::ExpLocalized => Some(
            params
                .mu
                .clone()
                .ok_or_else(|| Error::Domain("exp-localised pair needs mu".into()))?,
        ),
        _ => None,
    };
    let lmu = match &mu {
        Some(m) => Some(lambda_mu(r, m)?),
        None => None,
    };
    let (l2, lps) = match params.boundary {
        Boundary::Obc => (obc_lambda2(n, r, precision)?, r.sum()),
        Boundary::MarkovWalk => (obc_lambda2(n + 1, r, precision)?, r.sum()),
        Boundary::Pbc => {
            let s = r.sum();
            (pbc_lambda2(n, params.require_q()?, precision)?, &s * &s)
        }
        Boundary::Jordan => (r.delta.clone(), &r.delta + &r.sigma),
        Boundary::Custom => {
            return Err(Error::Domain("no analytic references for custom matrices".into()))
        }
    };
    let lps = match (&lmu, params.boundary) {
        (Some(l), Boundary::Obc | Boundary::MarkovWalk) => l.clone(),
        (Some(_), Boundary::Jordan) => {
            &r.delta + &r.sigma.checked_div(mu.as_ref().expect("mu set"))?
        }
        _ => lps,
    };
    Ok(References {
        lambda2: Some(l2),
        lambda_ps: Some(lps),
        lambda_mu: lmu,
    })
}

/// The vector pair described by `kind` for this model.
pub fn build_pair(params: &ModelParams, kind: &PairKind) -> Result<VectorPair> {
    let n = params.n;
    match (params.boundary, kind) {
        (Boundary::Obc, PairKind::Otoc { j }) => VectorPair::otoc_obc(n, params.require_q()?, *j),
        (Boundary::Pbc, PairKind::Otoc { j }) => VectorPair::otoc_pbc(n, params.require_q()?, *j),
        (Boundary::Obc, PairKind::RandomStochastic { seed }) => VectorPair::random_obc(n, *seed),
        (Boundary::Pbc, PairKind::RandomStochastic { seed }) => {
            VectorPair::random_pbc(n, params.require_q()?, 1, *seed)
        }
        (Boundary::Obc | Boundary::Jordan, PairKind::ExpLocalized) => {
            let mu = params
                .mu
                .as_ref()
                .ok_or_else(|| Error::Domain("exp-localised pair needs mu".into()))?;
            VectorPair::exp_localized(n, mu)
        }
        (b, k) => Err(Error::Domain(format!("pair {k:?} is not defined for {b:?}"))),
    }
}

/// Iterate the model with the requested pair, measure λ_ph (flattest window), the late
/// rate and optionally `t_c`, and classify against λ₂ and λ_ps.
pub fn compare_report(
    params: &ModelParams,
    pair: &PairKind,
    opts: &CompareOptions,
) -> Result<CompareReport> {
    let prec = opts.backend.working_precision();
    let refs = reference_rates(params, pair, prec)?;
    let vp = build_pair(params, pair)?;
    // exp-localised pairs act on the bare matrix; μ only selects p
    let mut plain = params.clone();
    if matches!(pair, PairKind::ExpLocalized) {
        plain.mu = None;
    }
    let a = build(&plain)?;
    let t_max = opts.horizon_factor.max(1) * a.system_size();
    let series = iterate_with_backend(&a, &vp, t_max, true, opts.backend)?;
    let mut profile = effective_rate(&series);
    let plateau = plateau_rate(&profile, opts.window)?;
    let threshold = opts.threshold.map(|x| Scalar::from_f64(x, prec));
    profile.t_c = threshold
        .as_ref()
        .and_then(|th| transition_time_after(&profile, th, plateau.t_start));
    let l2 = refs.lambda2.as_ref().map(Scalar::to_f64).unwrap_or(f64::NAN);
    let lps = refs.lambda_ps.as_ref().map(Scalar::to_f64).unwrap_or(f64::NAN);
    let lph = plateau.rate.to_f64();
    let verdict = OrderingVerdict::classify(l2, lph, lps, ORDERING_TOLERANCE);
    let report = CompareReport {
        boundary: params.boundary,
        n: params.n,
        q: params.q,
        pair: pair.clone(),
        lambda2: l2,
        lambda_ps: lps,
        lambda_mu: refs.lambda_mu.as_ref().map(Scalar::to_f64),
        lambda_ph: lph,
        plateau_window: (plateau.t_start, plateau.t_end),
        late_rate: profile.last().map(|(_, r)| r.to_f64()),
        t_c: profile.t_c,
        threshold: opts.threshold,
        verdict,
        t_max,
        backend: opts.backend,
    };
    profile.plateau = Some(plateau);
    profile.references = refs;
    Ok(report)
}

/// Iterate a bare tridiagonal Toeplitz block with `p_k ∝ μ^{−k}` normalised to `Σ p = 1`
/// and `v = e₁`. Used for the Hermitian finite-size comparison.
pub fn toeplitz_exp_series(
    dim: usize,
    rates: &Rates,
    mu: &Scalar,
    t_max: usize,
    backend: Backend,
) -> Result<DecaySeries> {
    let a = build_toeplitz(dim, rates)?;
    let mut pair = VectorPair::exp_localized(dim, mu)?;
    let total: Scalar = pair.p.iter().cloned().sum();
    for x in pair.p.iter_mut() {
        *x = x.checked_div(&total)?;
    }
    iterate_with_backend(&a, &pair, t_max, false, backend)
}
