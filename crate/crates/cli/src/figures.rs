//! Datasets behind the eight figures, at desk-scale default sizes.

use anyhow::Result;

use phantom_core::analysis::{effective_rate, plateau_rate, toeplitz_exp_series};
use phantom_core::closedform::{hyp_ratio_q2, lambda_mu, otoc_closed_q2, rate_closed_q2};
use phantom_core::spectral::{obc_pseudo_curve, pbc_lambda2, ConjectureRegion};
use phantom_core::transfer::{build, build_markov_walk, iterate_with_backend};
use phantom_core::{Boundary, Rates, Scalar, VectorPair};

use crate::args::{Model, Size};
use crate::commands::{pseudo_dataset, qudit, rates_q, rescaled_dataset, usage, Ctx};
use crate::output::{Cell, Dataset};

pub fn figure(ctx: &Ctx, number: u8, n: Option<usize>, q: u32, t_max: Option<usize>, grid: usize) -> Result<Vec<Dataset>> {
    match number {
        1 => pbc_sizes(ctx, n.unwrap_or(40), q, t_max),
        2 => two_pairs(ctx, Boundary::Pbc, n.unwrap_or(40), q, t_max),
        3 => two_pairs(ctx, Boundary::Obc, n.unwrap_or(40), q, t_max),
        4 => arbitrary(ctx, n.unwrap_or(40), q, t_max),
        5 => walk_matrix(ctx, n.unwrap_or(4), q),
        6 => pbc_pseudo(ctx, n.unwrap_or(40), q, grid),
        7 => hermitian(ctx, n.unwrap_or(50), t_max),
        8 => ratio(ctx, t_max.unwrap_or(40)),
        _ => Err(usage(format!("no figure {number}"))),
    }
}

fn pbc_sizes(ctx: &Ctx, n: usize, q: u32, t_max: Option<usize>) -> Result<Vec<Dataset>> {
    let sizes = [n / 2, n, 3 * n / 2];
    let horizon = t_max.unwrap_or(3 * sizes[2]);
    let mut ds = Dataset::table("figure1", ctx.meta(), vec!["n", "t", "deflated", "lambda_eff"]);
    for &m in &sizes {
        let params = qudit(Boundary::Pbc, m, q)?;
        let pair = VectorPair::otoc_pbc(m, q, 1).map_err(|e| usage(e.to_string()))?;
        let s = iterate_with_backend(&build(&params)?, &pair, horizon, true, ctx.backend()?)?;
        let prof = effective_rate(&s);
        if let Ok(p) = plateau_rate(&prof, 10) {
            ds.reference(&format!("lambda_ph_n{m}"), p.rate.to_f64());
        }
        ds.reference(&format!("lambda2_n{m}"), pbc_lambda2(m, q, ctx.prec())?.to_f64());
        for t in 0..=horizon {
            let r = prof.rate_at(t).map(|r| r.to_f64()).unwrap_or(f64::NAN);
            ds.push(vec![m.into(), t.into(), s.decay_part(t).to_f64().into(), r.into()]);
        }
    }
    let sum = rates_q(q)?.sum();
    ds.reference("lambda_ps", (&sum * &sum).to_f64());
    Ok(vec![ds])
}

fn two_pairs(ctx: &Ctx, boundary: Boundary, n: usize, q: u32, t_max: Option<usize>) -> Result<Vec<Dataset>> {
    let params = qudit(boundary, n, q)?;
    let a = build(&params)?;
    let seed = ctx.global.seed;
    let (otoc, random, name) = match boundary {
        Boundary::Pbc => (VectorPair::otoc_pbc(n, q, 1), VectorPair::random_pbc(n, q, 1, seed), "figure2"),
        _ => (VectorPair::otoc_obc(n, q, 1), VectorPair::random_obc(n, seed), "figure3"),
    };
    let (otoc, random) = (otoc.map_err(|e| usage(e.to_string()))?, random.map_err(|e| usage(e.to_string()))?);
    let horizon = t_max.unwrap_or(3 * n);
    let backend = ctx.backend()?;
    let so = iterate_with_backend(&a, &otoc, horizon, true, backend)?;
    let sr = iterate_with_backend(&a, &random, horizon, true, backend)?;
    let (po, pr) = (effective_rate(&so), effective_rate(&sr));
    let mut ds = Dataset::table(
        name,
        ctx.meta(),
        vec!["t", "otoc_deflated", "random_deflated", "otoc_rate", "random_rate"],
    );
    let r = &params.rates;
    let bulk = (&r.delta + &(&Scalar::from(2) * &(&r.sigma * &r.tau).sqrt(ctx.prec())?)).to_f64();
    match boundary {
        Boundary::Pbc => {
            ds.reference("lambda_ph", bulk * bulk);
            ds.reference("lambda2", pbc_lambda2(n, q, ctx.prec())?.to_f64());
            let s = r.sum();
            ds.reference("lambda_ps", (&s * &s).to_f64());
        }
        _ => {
            ds.reference("lambda2_bulk", bulk);
            ds.reference("lambda_ps", r.sum().to_f64());
        }
    }
    for t in 0..=horizon {
        let rate = |p: &phantom_core::RateProfile| p.rate_at(t).map(|x| x.to_f64()).unwrap_or(f64::NAN);
        ds.push(vec![
            t.into(),
            so.decay_part(t).to_f64().into(),
            sr.decay_part(t).to_f64().into(),
            rate(&po).into(),
            rate(&pr).into(),
        ]);
    }
    Ok(vec![ds])
}

fn arbitrary(ctx: &Ctx, n: usize, q: u32, t_max: Option<usize>) -> Result<Vec<Dataset>> {
    let mu = Scalar::ratio(27, 20);
    let size = Size { n, q, t_max };
    let decay = rescaled_dataset(ctx, "figure4a".into(), &size, &mu)?;
    let rates = rates_q(q)?;
    let mut curves = Dataset::table("figure4b", ctx.meta(), vec!["mu", "phi", "re", "im"]);
    for m in [Scalar::one(), mu, Scalar::from(2), Scalar::from(4)] {
        let c = obc_pseudo_curve(&rates, Some(&m), 256)?;
        curves.reference(&format!("real_max_mu{}", m.to_f64()), c.real_max.to_f64());
        for (phi, z) in c.phi.iter().zip(&c.points) {
            curves.push(vec![m.to_f64().into(), (*phi).into(), z.re.into(), z.im.into()]);
        }
    }
    Ok(vec![decay, curves])
}

fn walk_matrix(ctx: &Ctx, m: usize, q: u32) -> Result<Vec<Dataset>> {
    let a = build_markov_walk(m, &rates_q(q)?).map_err(|e| usage(e.to_string()))?;
    let mut ds = Dataset::table("figure5", ctx.meta(), vec!["row", "col", "value"]);
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let v = a.entry(i, j);
            if !v.is_zero() {
                ds.push(vec![i.into(), j.into(), Cell::Text(v.to_plain())]);
            }
        }
    }
    Ok(vec![ds])
}

fn pbc_pseudo(ctx: &Ctx, n: usize, q: u32, grid: usize) -> Result<Vec<Dataset>> {
    let field = pseudo_dataset(ctx, "figure6a".into(), Model::Pbc, n, q, 1e-5, grid)?;
    let region = ConjectureRegion::new(q, 64, 128)?;
    let mut ds = Dataset::table("figure6b", ctx.meta(), vec!["k_index", "phi_index", "re", "im"]);
    ds.reference("real_max", region.real_max());
    for (k, curve) in region.curves.iter().enumerate() {
        for (j, z) in curve.iter().enumerate() {
            ds.push(vec![k.into(), j.into(), z.re.into(), z.im.into()]);
        }
    }
    Ok(vec![field, ds])
}

fn hermitian(ctx: &Ctx, n_max: usize, t_max: Option<usize>) -> Result<Vec<Dataset>> {
    let rates = Rates::new(Scalar::ratio(8, 25), Scalar::ratio(1, 5), Scalar::ratio(1, 5))?;
    let mu = Scalar::ratio(2, 5);
    let horizon = t_max.unwrap_or(40);
    let mut ds = Dataset::table("figure7", ctx.meta(), vec!["n", "t", "observable"]);
    ds.reference("lambda_mu", lambda_mu(&rates, &mu)?.to_f64());
    ds.reference("caption_value", 0.85);
    let mut m = 10;
    while m <= n_max {
        let s = toeplitz_exp_series(m, &rates, &mu, horizon, ctx.backend()?)?;
        if let Ok(p) = plateau_rate(&effective_rate(&s), 10) {
            ds.reference(&format!("lambda_ph_n{m}"), p.rate.to_f64());
        }
        for t in 0..=horizon {
            ds.push(vec![m.into(), t.into(), s.observable(t).to_f64().into()]);
        }
        m += 10;
    }
    Ok(vec![ds])
}

fn ratio(ctx: &Ctx, t_max: usize) -> Result<Vec<Dataset>> {
    let p = ctx.prec();
    let mut ds = Dataset::table("figure8", ctx.meta(), vec!["t", "hyp_ratio", "lambda_eff", "otoc"]);
    ds.reference("lambda2_limit", 16.0 / 25.0);
    for t in 0..=t_max {
        ds.push(vec![
            t.into(),
            hyp_ratio_q2(t, p)?.to_f64().into(),
            rate_closed_q2(t, p)?.to_f64().into(),
            otoc_closed_q2(t, p)?.to_f64().into(),
        ]);
    }
    Ok(vec![ds])
}
