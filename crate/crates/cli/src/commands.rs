use std::collections::BTreeMap;
use std::fmt;

use anyhow::{anyhow, Result};
use serde_json::Value;

use phantom_core::analysis::{
    compare_report, effective_rate, CompareOptions, PairKind, RateProfile,
};
use phantom_core::closedform::{jordan_closed, lambda_mu, r1_catalan, ConvolutionProfile};
use phantom_core::spectral::{
    obc_eigensystem, obc_lambda2, pbc_eigenvalues, pbc_lambda2, pseudospectrum_grid, GridRegion,
    PseudoOperator,
};
use phantom_core::transfer::{
    build, build_jordan, iterate_with_backend, simulate_walk, DecaySeries,
};
use phantom_core::{Backend, Boundary, ModelParams, Rates, Scalar, VectorPair};

use crate::args::{BackendKind, Command, Global, Model, PairArg, Size};
use crate::figures;
use crate::output::{Dataset, Meta};

/// Bad flag values detected after parsing; mapped to the usage exit code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

/// Exact value of `"a/b"`, `"1.35"` or `"2"`.
pub fn parse_ratio(s: &str) -> Result<Scalar> {
    let bad = || usage(format!("cannot parse '{s}' as a rational number"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Scalar::ratio(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let neg = int.starts_with('-');
    let digits = format!("{}{frac}", int.trim_start_matches(['-', '+']));
    let num: i64 = digits.parse().map_err(|_| bad())?;
    let den = 10i64.pow(frac.len() as u32);
    Ok(Scalar::ratio(if neg { -num } else { num }, den))
}

pub struct Ctx {
    pub global: Global,
    pub config: Value,
}

impl Ctx {
    pub fn backend(&self) -> Result<Backend> {
        match self.global.backend {
            BackendKind::Rational => Ok(Backend::Rational),
            BackendKind::Float => Backend::float(self.global.precision).map_err(|e| usage(e.to_string())),
        }
    }

    pub fn meta(&self) -> Meta {
        Meta {
            tool: "phantom".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            backend: match self.global.backend {
                BackendKind::Rational => "rational".into(),
                BackendKind::Float => "float".into(),
            },
            precision: self.global.precision,
            seed: self.global.seed,
            config: self.config.clone(),
            references: BTreeMap::new(),
        }
    }

    pub fn prec(&self) -> u32 {
        self.global.precision
    }
}

pub fn qudit(boundary: Boundary, n: usize, q: u32) -> Result<ModelParams> {
    ModelParams::qudit(boundary, n, q).map_err(|e| usage(e.to_string()))
}

pub fn rates_q(q: u32) -> Result<Rates> {
    Rates::from_q(q).map_err(|e| usage(e.to_string()))
}

/// Rows `t, observable, deflated, lambda_eff` for one series.
pub fn series_rows(ds: &mut Dataset, series: &DecaySeries, prof: &RateProfile) {
    for t in 0..series.values.len() {
        let rate = prof.rate_at(t).map(|r| r.to_f64()).unwrap_or(f64::NAN);
        ds.push(vec![
            t.into(),
            series.observable(t).to_f64().into(),
            series.decay_part(t).to_f64().into(),
            rate.into(),
        ]);
    }
}

pub const SERIES_COLUMNS: [&str; 4] = ["t", "observable", "deflated", "lambda_eff"];

fn otoc(ctx: &Ctx, boundary: Boundary, size: &Size, j: usize) -> Result<Vec<Dataset>> {
    let params = qudit(boundary, size.n, size.q)?;
    let pair = match boundary {
        Boundary::Pbc => VectorPair::otoc_pbc(size.n, size.q, j),
        _ => VectorPair::otoc_obc(size.n, size.q, j),
    }
    .map_err(|e| usage(e.to_string()))?;
    let a = build(&params)?;
    let t_max = size.t_max.unwrap_or(3 * size.n);
    let series = iterate_with_backend(&a, &pair, t_max, true, ctx.backend()?)?;
    let prof = effective_rate(&series);
    let name = format!("{}_n{}_q{}", ctx.config["command"].as_str().unwrap_or("otoc"), size.n, size.q);
    let mut ds = Dataset::table(name, ctx.meta(), SERIES_COLUMNS.to_vec());
    let rates = &params.rates;
    match boundary {
        Boundary::Pbc => {
            let s = rates.sum();
            ds.reference("lambda2", pbc_lambda2(size.n, size.q, ctx.prec())?.to_f64());
            ds.reference("lambda_ps", (&s * &s).to_f64());
        }
        _ => {
            ds.reference("lambda2", obc_lambda2(size.n, rates, ctx.prec())?.to_f64());
            ds.reference("lambda_ps", rates.sum().to_f64());
        }
    }
    ds.reference("o_infinity", series.o_infinity.to_f64());
    series_rows(&mut ds, &series, &prof);
    Ok(vec![ds])
}

fn random_walk(ctx: &Ctx, size: &Size, trials: usize) -> Result<Vec<Dataset>> {
    let rates = rates_q(size.q)?;
    let t_max = size.t_max.unwrap_or(20);
    let est = simulate_walk(
        size.n,
        rates.delta.to_f64(),
        rates.tau.to_f64(),
        rates.sigma.to_f64(),
        t_max,
        trials,
        ctx.global.seed,
    )
    .map_err(|e| usage(e.to_string()))?;
    let mut ds = Dataset::table(
        format!("random-walk_m{}_q{}", size.n, size.q),
        ctx.meta(),
        vec!["t", "r1_exact", "r1_mc", "std_err"],
    );
    for t in 0..=t_max {
        let exact = r1_catalan(t, &rates.delta, &rates.tau, &rates.sigma)?.to_f64();
        let mc = est.r1[t];
        let se = (mc * (1.0 - mc) / trials as f64).sqrt();
        ds.push(vec![t.into(), exact.into(), mc.into(), se.into()]);
    }
    Ok(vec![ds])
}

fn jordan(ctx: &Ctx, n: usize, delta: &str, sigma: &str, mu: &str, t_max: Option<usize>) -> Result<Vec<Dataset>> {
    let (d, s, mu) = (parse_ratio(delta)?, parse_ratio(sigma)?, parse_ratio(mu)?);
    let t_max = t_max.unwrap_or(n.saturating_sub(1));
    let a = build_jordan(n, &d, &s).map_err(|e| usage(e.to_string()))?;
    let profile = ConvolutionProfile::exponential(&mu, t_max.max(n - 1)).map_err(|e| usage(e.to_string()))?;
    let pair = profile.realize(n)?;
    let series = iterate_with_backend(&a, &pair, t_max, false, ctx.backend()?)?;
    let prof = effective_rate(&series);
    let mut ds = Dataset::table(format!("jordan_n{n}"), ctx.meta(), vec!["t", "iterated", "closed", "lambda_eff"]);
    ds.reference("delta_plus_sigma_over_mu", (&d + &s.checked_div(&mu)?).to_f64());
    for t in 0..=t_max {
        let closed = jordan_closed(t, n, &d, &s, &profile)?;
        let rate = prof.rate_at(t).map(|r| r.to_f64()).unwrap_or(f64::NAN);
        ds.push(vec![
            t.into(),
            series.observable(t).to_f64().into(),
            closed.to_f64().into(),
            rate.into(),
        ]);
    }
    Ok(vec![ds])
}

pub fn rescaled_dataset(ctx: &Ctx, name: String, size: &Size, mu: &Scalar) -> Result<Dataset> {
    let params = qudit(Boundary::Obc, size.n, size.q)?;
    let a = build(&params)?;
    let pair = VectorPair::exp_localized(size.n, mu).map_err(|e| usage(e.to_string()))?;
    let t_max = size.t_max.unwrap_or(2 * size.n);
    let series = iterate_with_backend(&a, &pair, t_max, true, ctx.backend()?)?;
    let prof = effective_rate(&series);
    let mut ds = Dataset::table(name, ctx.meta(), SERIES_COLUMNS.to_vec());
    ds.reference("lambda2", obc_lambda2(size.n, &params.rates, ctx.prec())?.to_f64());
    ds.reference("lambda_mu", lambda_mu(&params.rates, mu)?.to_f64());
    ds.reference("lambda_ps", params.rates.sum().to_f64());
    series_rows(&mut ds, &series, &prof);
    Ok(ds)
}

fn spectrum(ctx: &Ctx, model: Model, size: &Size) -> Result<Vec<Dataset>> {
    let sys = match model {
        Model::Obc => obc_eigensystem(size.n, &rates_q(size.q)?, ctx.prec()),
        Model::Pbc => pbc_eigenvalues(size.n, size.q, ctx.prec()),
    }
    .map_err(|e| usage(e.to_string()))?;
    let tag = match model {
        Model::Obc => "obc",
        Model::Pbc => "pbc",
    };
    let mut ds = Dataset::table(
        format!("spectrum_{tag}_n{}_q{}", size.n, size.q),
        ctx.meta(),
        vec!["index", "label_a", "label_b", "re", "im"],
    );
    for (i, (z, (a, b))) in sys.eigenvalues.iter().zip(&sys.labels).enumerate() {
        let c = z.to_c64();
        ds.push(vec![i.into(), (*a).into(), (*b).into(), c.re.into(), c.im.into()]);
    }
    Ok(vec![ds])
}

pub fn pseudo_dataset(ctx: &Ctx, name: String, model: Model, n: usize, q: u32, eps: f64, grid: usize) -> Result<Dataset> {
    let boundary = match model {
        Model::Obc => Boundary::Obc,
        Model::Pbc => Boundary::Pbc,
    };
    let a = build(&qudit(boundary, n, q)?)?;
    let op = PseudoOperator::transient(&a)?;
    let region = GridRegion::default().with_resolution(grid, grid);
    let field = pseudospectrum_grid(&op, eps, region).map_err(|e| match e {
        phantom_core::Error::Domain(m) => usage(m),
        other => anyhow!(other),
    })?;
    let mut ds = Dataset::table(name, ctx.meta(), vec!["re", "im", "sigma_min", "in_set"]);
    if let Some(x) = field.rightmost_flagged() {
        ds.reference("rightmost_flagged", x);
    }
    ds.reference("failed_points", field.failures.len() as f64);
    for i in 0..field.region.len() {
        let z = field.region.point(i);
        ds.push(vec![z.re.into(), z.im.into(), field.sigma_min[i].into(), field.in_set[i].into()]);
    }
    Ok(ds)
}

fn rates_report(
    ctx: &Ctx,
    model: Model,
    size: &Size,
    pair: PairArg,
    mu: &str,
    threshold: Option<f64>,
    window: usize,
    horizon: usize,
) -> Result<Vec<Dataset>> {
    let boundary = match model {
        Model::Obc => Boundary::Obc,
        Model::Pbc => Boundary::Pbc,
    };
    let mut params = qudit(boundary, size.n, size.q)?;
    let kind = match pair {
        PairArg::Otoc => PairKind::Otoc { j: 1 },
        PairArg::Random => PairKind::RandomStochastic { seed: ctx.global.seed },
        PairArg::Exp => {
            params = params.with_mu(parse_ratio(mu)?).map_err(|e| usage(e.to_string()))?;
            PairKind::ExpLocalized
        }
    };
    let opts = CompareOptions {
        backend: ctx.backend()?,
        horizon_factor: horizon,
        window,
        threshold,
    };
    let report = compare_report(&params, &kind, &opts).map_err(|e| match e {
        phantom_core::Error::Domain(m) => usage(m),
        other => anyhow!(other),
    })?;
    let tag = match model {
        Model::Obc => "obc",
        Model::Pbc => "pbc",
    };
    Ok(vec![Dataset {
        name: format!("rates_{tag}_n{}_q{}", size.n, size.q),
        meta: ctx.meta(),
        body: crate::output::Body::Record(serde_json::to_value(&report)?),
    }])
}

pub fn run(ctx: &Ctx, cmd: &Command) -> Result<Vec<Dataset>> {
    match cmd {
        Command::ObcOtoc { size, j } => otoc(ctx, Boundary::Obc, size, *j),
        Command::PbcOtoc { size, j } => otoc(ctx, Boundary::Pbc, size, *j),
        Command::RandomWalk { size, trials } => random_walk(ctx, size, *trials),
        Command::Jordan { n, delta, sigma, mu, t_max } => jordan(ctx, *n, delta, sigma, mu, *t_max),
        Command::Rescaled { size, mu } => {
            let mu = parse_ratio(mu)?;
            Ok(vec![rescaled_dataset(ctx, format!("rescaled_n{}_q{}", size.n, size.q), size, &mu)?])
        }
        Command::Spectrum { model, size } => spectrum(ctx, *model, size),
        Command::Pseudospectrum { model, size, eps, grid } => {
            let tag = match model {
                Model::Obc => "obc",
                Model::Pbc => "pbc",
            };
            let name = format!("pseudospectrum_{tag}_n{}_q{}", size.n, size.q);
            Ok(vec![pseudo_dataset(ctx, name, *model, size.n, size.q, *eps, *grid)?])
        }
        Command::Rates { model, size, pair, mu, threshold, window, horizon } => {
            rates_report(ctx, *model, size, *pair, mu, *threshold, *window, *horizon)
        }
        Command::Figure { number, n, q, t_max, grid } => figures::figure(ctx, *number, *n, *q, *t_max, *grid),
    }
}
