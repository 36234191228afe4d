use num_complex::Complex64;
use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexScalar, Scalar};
use crate::spectral::banded::{sigma_min, BandedC64, SigmaMinOptions};
use crate::spectral::fourier::{factor_symbols, pbc_fourier_blocks_banded};
use crate::transfer::{Rates, TransferMatrix};

/// Operator whose pseudospectrum is sampled: a single band matrix, or a set of Fourier
/// blocks whose smallest singular value is the minimum over blocks.
#[derive(Clone, Debug)]
pub enum PseudoOperator {
    Banded(BandedC64),
    Blocks(Vec<BandedC64>),
}

fn c64(x: &Scalar) -> Complex64 {
    Complex64::new(x.to_f64(), 0.0)
}

impl PseudoOperator {
    /// Transient part `T` of a transfer matrix (the whole matrix if nothing is absorbing).
    /// Periodic chains are reduced to their n Fourier blocks.
    pub fn transient(a: &TransferMatrix) -> Result<Self> {
        match a {
            TransferMatrix::PbcBlockCirculant(p) => {
                Ok(PseudoOperator::Blocks(pbc_fourier_blocks_banded(p.n, p.q)?))
            }
            TransferMatrix::ObcFull { inner } => Ok(PseudoOperator::Banded(BandedC64::from_fn(
                inner.dim,
                1,
                1,
                |i, j| c64(&inner.entry(i, j)),
            ))),
            TransferMatrix::MarkovWalk(w) => Ok(PseudoOperator::Banded(BandedC64::from_fn(
                w.bulk,
                1,
                1,
                |i, j| c64(&a.entry(i + 1, j + 1)),
            ))),
            TransferMatrix::TridiagToeplitz(t) | TransferMatrix::TwoDiagonal(t) => Ok(
                PseudoOperator::Banded(BandedC64::from_fn(t.dim, 1, 1, |i, j| c64(&t.entry(i, j)))),
            ),
            TransferMatrix::Rescaled(r) => {
                let t = &r.effective;
                Ok(PseudoOperator::Banded(BandedC64::from_fn(t.dim, 1, 1, |i, j| {
                    c64(&t.entry(i, j))
                })))
            }
            TransferMatrix::Custom(_) => {
                let s = a.absorbing_structure();
                let rows: Vec<Vec<Complex64>> = s
                    .transient
                    .iter()
                    .map(|&i| s.transient.iter().map(|&j| c64(&a.entry(i, j))).collect())
                    .collect();
                Ok(PseudoOperator::Banded(BandedC64::from_dense(&rows)))
            }
        }
    }

    /// The transient block of a periodic chain as one (dense-band) matrix, without the
    /// Fourier reduction. Intended for cross-checks at small n.
    pub fn pbc_direct(a: &TransferMatrix) -> Result<Self> {
        let TransferMatrix::PbcBlockCirculant(p) = a else {
            return Err(Error::Domain("expected a periodic-chain matrix".into()));
        };
        let dim = p.n * (p.n - 1);
        if dim > 2000 {
            return Err(Error::Domain(format!("direct operator of dimension {dim} too large")));
        }
        let rows: Vec<Vec<Complex64>> = (0..dim)
            .map(|i| (0..dim).map(|j| c64(&a.entry(i, j))).collect())
            .collect();
        Ok(PseudoOperator::Banded(BandedC64::from_dense(&rows)))
    }

    pub fn sigma_min(&self, z: Complex64, opts: SigmaMinOptions) -> Result<f64> {
        match self {
            PseudoOperator::Banded(b) => sigma_min(b, z, opts),
            PseudoOperator::Blocks(bs) => {
                let mut best = f64::INFINITY;
                for b in bs {
                    best = best.min(sigma_min(b, z, opts)?);
                }
                Ok(best)
            }
        }
    }
}

/// Rectangular lattice in the complex plane; both axes include their end points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for GridRegion {
    fn default() -> Self {
        GridRegion {
            re_min: -0.2,
            re_max: 1.2,
            im_min: -0.8,
            im_max: 0.8,
            n_re: 201,
            n_im: 201,
        }
    }
}

impl GridRegion {
    pub fn with_resolution(mut self, n_re: usize, n_im: usize) -> Self {
        self.n_re = n_re;
        self.n_im = n_im;
        self
    }

    pub fn len(&self) -> usize {
        self.n_re * self.n_im
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point with flat index `idx = i_im * n_re + i_re`.
    pub fn point(&self, idx: usize) -> Complex64 {
        let (i_im, i_re) = (idx / self.n_re, idx % self.n_re);
        let lerp = |lo: f64, hi: f64, i: usize, n: usize| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        Complex64::new(
            lerp(self.re_min, self.re_max, i_re, self.n_re),
            lerp(self.im_min, self.im_max, i_im, self.n_im),
        )
    }
}

/// σ_min sampled on a grid together with the ε-membership flags.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudospectrumField {
    pub region: GridRegion,
    pub epsilon: f64,
    /// Row-major over (imag, real).
    pub sigma_min: Vec<f64>,
    pub in_set: Vec<bool>,
    /// Points where inverse iteration hit its cap; the best estimate is still stored.
    pub failures: Vec<(usize, String)>,
}

impl PseudospectrumField {
    pub fn flagged_points(&self) -> Vec<Complex64> {
        (0..self.region.len())
            .filter(|&i| self.in_set[i])
            .map(|i| self.region.point(i))
            .collect()
    }

    /// Largest real part among flagged points.
    pub fn rightmost_flagged(&self) -> Option<f64> {
        self.flagged_points()
            .into_iter()
            .map(|z| z.re)
            .fold(None, |m, x| Some(m.map_or(x, |m: f64| m.max(x))))
    }
}

/// Sample `σ_min(zI − A)` over `region` and flag points with `σ_min ≤ ε`.
/// Each point is independent, so the field does not depend on the thread schedule.
pub fn pseudospectrum_grid(
    op: &PseudoOperator,
    epsilon: f64,
    region: GridRegion,
) -> Result<PseudospectrumField> {
    if region.n_re < 2 || region.n_im < 2 {
        return Err(Error::Domain("grid resolution must be at least 2 per axis".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain("epsilon must be positive".into()));
    }
    let opts = SigmaMinOptions::default();
    let results: Vec<(f64, Option<String>)> = (0..region.len())
        .into_par_iter()
        .map(|i| match op.sigma_min(region.point(i), opts) {
            Ok(s) => (s, None),
            Err(Error::Convergence { best_estimate, .. }) => (
                best_estimate,
                Some(format!("no convergence, estimate {best_estimate:e}")),
            ),
            Err(e) => (f64::NAN, Some(e.to_string())),
        })
        .collect();
    let mut sigma = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, (s, err)) in results.into_iter().enumerate() {
        sigma.push(s);
        if let Some(e) = err {
            failures.push((i, e));
        }
    }
    let in_set = sigma.iter().map(|&s| s <= epsilon).collect();
    Ok(PseudospectrumField {
        region,
        epsilon,
        sigma_min: sigma,
        in_set,
        failures,
    })
}

/// Closed curve samples `z(φ)` for `φ = 2πi/samples`, `i = 0..=samples`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSamples {
    pub phi: Vec<f64>,
    pub points: Vec<Complex64>,
    /// Largest real value on the curve (exact when the inputs are).
    pub real_max: Scalar,
}

/// Symbol curve `δ + τμ e^{iφ} + (σ/μ) e^{−iφ}` of the (rescaled) open-chain Toeplitz block.
pub fn obc_pseudo_curve(rates: &Rates, mu: Option<&Scalar>, samples: usize) -> Result<CurveSamples> {
    if samples < 2 {
        return Err(Error::Domain("need at least 2 curve samples".into()));
    }
    let one = Scalar::one();
    let mu = mu.unwrap_or(&one);
    if !mu.is_positive() {
        return Err(Error::Domain(format!("mu = {mu} must be > 0")));
    }
    let tau = &rates.tau * mu;
    let sigma = rates.sigma.checked_div(mu)?;
    let real_max = &(&rates.delta + &tau) + &sigma;
    let (d, t, s) = (rates.delta.to_f64(), tau.to_f64(), sigma.to_f64());
    let mut phi = Vec::with_capacity(samples + 1);
    let mut points = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let f = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
        let e = Complex64::from_polar(1.0, f);
        phi.push(f);
        points.push(d + e * t + e.conj() * s);
    }
    Ok(CurveSamples {
        phi,
        points,
        real_max,
    })
}

/// Distance from `z` to the filled ellipse with centre `c` and semi-axes `a` (real) and
/// `b` (imaginary); zero inside.
pub fn ellipse_distance(c: f64, a: f64, b: f64, z: Complex64) -> f64 {
    let (x, y) = (z.re - c, z.im);
    if a <= 0.0 {
        return z.norm();
    }
    if b <= 0.0 {
        let xc = x.clamp(-a, a);
        return ((x - xc).powi(2) + y * y).sqrt();
    }
    if (x / a).powi(2) + (y / b).powi(2) <= 1.0 {
        return 0.0;
    }
    // dense boundary scan refined around the best sample
    let n = 2048;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let d = ((x - a * t.cos()).powi(2) + (y - b * t.sin()).powi(2)).sqrt();
        if d < best.0 {
            best = (d, t);
        }
    }
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut lo = best.1 - step;
    let mut hi = best.1 + step;
    let dist = |t: f64| ((x - a * t.cos()).powi(2) + (y - b * t.sin()).powi(2)).sqrt();
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if dist(m1) < dist(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    dist(0.5 * (lo + hi)).min(best.0)
}

/// Conjectured large-n pseudospectral curve of the periodic chain at momentum fraction
/// `k/n` and angle `φ`: `στ (c₁e^{iφ}+a₁+b₁e^{−iφ})(c₂e^{iφ}+a₂+b₂e^{−iφ})`.
pub fn pbc_pseudo_conjecture(
    q: u32,
    k_over_n: &Scalar,
    phi: &Scalar,
    precision: u32,
) -> Result<ComplexScalar> {
    if q < 2 {
        return Err(Error::Domain(format!("q = {q} must be >= 2")));
    }
    if k_over_n.is_negative() || *k_over_n > Scalar::one() {
        return Err(Error::Domain("k/n must lie in [0, 1]".into()));
    }
    let p = precision;
    let two_pi = Float::with_val(p, rug::float::Constant::Pi) * 2u32;
    let phi_f = phi.float_or(p);
    if phi_f < 0 || phi_f > two_pi {
        return Err(Error::Domain("phi must lie in [0, 2π]".into()));
    }
    let theta = Scalar::Float(Float::with_val(p, &two_pi * k_over_n.float_or(p)));
    let e_theta = ComplexScalar::cis(&theta, p);
    let e_phi = ComplexScalar::cis(phi, p);
    let e_mphi = e_phi.conj();
    let one = ComplexScalar::real(&Scalar::one(), p);
    let q2 = Scalar::from(u64::from(q) * u64::from(q));
    let q4 = &q2 * &q2;
    let inv_q2 = q2.recip()?;
    let inv_q4 = q4.recip()?;
    let c1 = e_theta.scale(&q4);
    let a1 = (&one + &e_theta).scale(&q2);
    let b1 = one.clone();
    let c2 = one.clone();
    let a2 = (&one + &e_theta.conj()).scale(&inv_q2);
    let b2 = e_theta.conj().scale(&inv_q4);
    let f1 = &(&(&c1 * &e_phi) + &a1) + &(&b1 * &e_mphi);
    let f2 = &(&(&c2 * &e_phi) + &a2) + &(&b2 * &e_mphi);
    let rates = Rates::from_q(q)?;
    let st = &rates.sigma * &rates.tau;
    let out = (&f1 * &f2).scale(&st);
    out.check_finite()?;
    Ok(out)
}

/// Union over `k/n ∈ [0,1]` of the closed conjecture curves, sampled in double precision.
#[derive(Clone, Debug)]
pub struct ConjectureRegion {
    pub curves: Vec<Vec<Complex64>>,
    boxes: Vec<(f64, f64, f64, f64)>,
}

impl ConjectureRegion {
    pub fn new(q: u32, n_k: usize, n_phi: usize) -> Result<Self> {
        if n_k < 1 || n_phi < 3 {
            return Err(Error::Domain("need n_k >= 1 and n_phi >= 3".into()));
        }
        let (_, tau, sigma) = {
            let r = Rates::from_q(q)?;
            (r.delta.to_f64(), r.tau.to_f64(), r.sigma.to_f64())
        };
        let st = sigma * tau;
        let mut curves = Vec::with_capacity(n_k + 1);
        for ik in 0..=n_k {
            let kn = ik as f64 / n_k as f64;
            let (c1, a1, b1, c2, a2, b2) = factor_symbols(q, kn);
            let curve: Vec<Complex64> = (0..=n_phi)
                .map(|i| {
                    let f = 2.0 * std::f64::consts::PI * i as f64 / n_phi as f64;
                    let e = Complex64::from_polar(1.0, f);
                    (c1 * e + a1 + b1 * e.conj()) * (c2 * e + a2 + b2 * e.conj()) * st
                })
                .collect();
            curves.push(curve);
        }
        let boxes = curves
            .iter()
            .map(|c| {
                c.iter().fold(
                    (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
                    |(a, b, cc, d), z| (a.min(z.re), b.max(z.re), cc.min(z.im), d.max(z.im)),
                )
            })
            .collect();
        Ok(ConjectureRegion { curves, boxes })
    }

    fn winding(curve: &[Complex64], z: Complex64) -> i32 {
        let mut w = 0;
        for seg in curve.windows(2) {
            let (a, b) = (seg[0] - z, seg[1] - z);
            if a.im <= 0.0 {
                if b.im > 0.0 && a.re * b.im - a.im * b.re > 0.0 {
                    w += 1;
                }
            } else if b.im <= 0.0 && a.re * b.im - a.im * b.re < 0.0 {
                w -= 1;
            }
        }
        w
    }

    fn seg_dist(a: Complex64, b: Complex64, z: Complex64) -> f64 {
        let ab = b - a;
        let l2 = ab.norm_sqr();
        let t = if l2 == 0.0 {
            0.0
        } else {
            (((z - a) * ab.conj()).re / l2).clamp(0.0, 1.0)
        };
        (a + ab * t - z).norm()
    }

    /// Distance to the region (zero inside a curve or on it).
    pub fn distance(&self, z: Complex64) -> f64 {
        let mut best = f64::INFINITY;
        for (curve, &(x0, x1, y0, y1)) in self.curves.iter().zip(&self.boxes) {
            let bx = (x0 - z.re).max(z.re - x1).max(0.0);
            let by = (y0 - z.im).max(z.im - y1).max(0.0);
            if bx.hypot(by) >= best {
                continue;
            }
            if bx == 0.0 && by == 0.0 && Self::winding(curve, z) != 0 {
                return 0.0;
            }
            for seg in curve.windows(2) {
                best = best.min(Self::seg_dist(seg[0], seg[1], z));
            }
        }
        best
    }

    /// Largest real part over all sampled curves.
    pub fn real_max(&self) -> f64 {
        self.boxes.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max)
    }
}
