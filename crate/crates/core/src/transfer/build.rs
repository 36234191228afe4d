use crate::error::{Error, Result};
use crate::numerics::Scalar;
use crate::transfer::matrix::{
    pbc_blocks, MarkovWalkMatrix, PbcAbsorption, PbcMatrix, RescaledMatrix, Toeplitz3,
    TransferMatrix,
};
use crate::transfer::params::{Boundary, ModelParams, Rates};

fn expect_boundary(params: &ModelParams, b: Boundary) -> Result<()> {
    if params.boundary != b {
        return Err(Error::Domain(format!(
            "expected boundary {b:?}, got {:?}",
            params.boundary
        )));
    }
    Ok(())
}

/// Tridiagonal Toeplitz matrix with diagonal δ, super τ, sub σ.
pub fn build_toeplitz(dim: usize, rates: &Rates) -> Result<TransferMatrix> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    Ok(TransferMatrix::TridiagToeplitz(Toeplitz3 {
        dim,
        diag: rates.delta.clone(),
        sup: rates.tau.clone(),
        sub: rates.sigma.clone(),
    }))
}

/// Open chain of `n` spins: inner Toeplitz of dimension n−1 plus the sink row (0,…,σ,1).
pub fn build_obc(params: &ModelParams) -> Result<TransferMatrix> {
    expect_boundary(params, Boundary::Obc)?;
    if params.n < 2 {
        return Err(Error::Domain(format!("n = {} must be >= 2", params.n)));
    }
    let r = &params.rates;
    Ok(TransferMatrix::ObcFull {
        inner: Toeplitz3 {
            dim: params.n - 1,
            diag: r.delta.clone(),
            sup: r.tau.clone(),
            sub: r.sigma.clone(),
        },
    })
}

/// Periodic chain of `n` spins with the default (mass-conserving) sink row.
pub fn build_pbc(params: &ModelParams) -> Result<TransferMatrix> {
    build_pbc_with(params, PbcAbsorption::default())
}

/// Periodic chain with an explicit choice of the width-(n−1) sink entry.
pub fn build_pbc_with(params: &ModelParams, absorption: PbcAbsorption) -> Result<TransferMatrix> {
    expect_boundary(params, Boundary::Pbc)?;
    let n = params.n;
    if n < 3 {
        return Err(Error::Domain(format!("n = {n} must be >= 3")));
    }
    let q = params.require_q()?;
    let r = &params.rates;
    let (c, u, d) = pbc_blocks(n, r);
    let m = n - 1;
    let mut b_block = vec![Scalar::zero(); m];
    b_block[m - 2] = &r.sigma * &r.sigma;
    let ds = &r.delta * &r.sigma;
    b_block[m - 1] = match absorption {
        PbcAbsorption::MassConserving => &ds + &r.sigma,
        PbcAbsorption::AsPrinted => {
            let q2 = Scalar::from(i64::from(q) * i64::from(q));
            &ds + &(&q2 * &r.sigma)
        }
    };
    Ok(TransferMatrix::PbcBlockCirculant(PbcMatrix {
        n,
        q,
        c,
        u,
        d,
        b_block,
        absorption,
    }))
}

/// Biased walk on `m` bulk sites between two absorbing baths (state 0 and m+1).
pub fn build_markov_walk(m: usize, rates: &Rates) -> Result<TransferMatrix> {
    if m == 0 {
        return Err(Error::Domain("walk needs at least one bulk site".into()));
    }
    if !rates.is_stochastic() {
        return Err(Error::Domain(format!(
            "walk rates must sum to 1, got {}",
            rates.sum()
        )));
    }
    Ok(TransferMatrix::MarkovWalk(MarkovWalkMatrix {
        bulk: m,
        rates: rates.clone(),
    }))
}

/// Transposed Jordan-type matrix: δ on the diagonal, σ on the sub-diagonal.
pub fn build_jordan(dim: usize, delta: &Scalar, sigma: &Scalar) -> Result<TransferMatrix> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    Ok(TransferMatrix::TwoDiagonal(Toeplitz3 {
        dim,
        diag: delta.clone(),
        sup: Scalar::zero(),
        sub: sigma.clone(),
    }))
}

/// Similarity `D⁻¹ T D` with `D_kk = μ^k`: super-diagonal scales by μ, sub-diagonal by 1/μ.
pub fn rescale(t: &TransferMatrix, mu: &Scalar) -> Result<TransferMatrix> {
    if !mu.is_positive() {
        return Err(Error::Domain(format!("mu = {mu} must be > 0")));
    }
    let base = match t {
        TransferMatrix::TridiagToeplitz(b) | TransferMatrix::TwoDiagonal(b) => b,
        _ => {
            return Err(Error::Domain(
                "rescale applies to tridiagonal Toeplitz or two-diagonal matrices".into(),
            ))
        }
    };
    let effective = Toeplitz3 {
        dim: base.dim,
        diag: base.diag.clone(),
        sup: &base.sup * mu,
        sub: base.sub.checked_div(mu)?,
    };
    Ok(TransferMatrix::Rescaled(RescaledMatrix {
        base: Box::new(t.clone()),
        mu: mu.clone(),
        effective,
    }))
}

/// Build the matrix selected by `params.boundary` (Jordan uses δ and σ; Custom is rejected).
pub fn build(params: &ModelParams) -> Result<TransferMatrix> {
    let m = match params.boundary {
        Boundary::Obc => build_obc(params)?,
        Boundary::Pbc => build_pbc(params)?,
        Boundary::MarkovWalk => build_markov_walk(params.n, &params.rates)?,
        Boundary::Jordan => build_jordan(params.n, &params.rates.delta, &params.rates.sigma)?,
        Boundary::Custom => {
            return Err(Error::Domain(
                "custom matrices are constructed from explicit entries".into(),
            ))
        }
    };
    match &params.mu {
        Some(mu) if matches!(m, TransferMatrix::TwoDiagonal(_)) => rescale(&m, mu),
        _ => Ok(m),
    }
}
