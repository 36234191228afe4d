use crate::error::{Error, Result};
use crate::numerics::{dot, Backend, Scalar};
use crate::transfer::matrix::TransferMatrix;
use crate::transfer::vectors::VectorPair;

/// `O(t)` for `t = 0..=t_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecaySeries {
    /// Indexed by `t`. Holds `O(t) − O(∞)` when `deflated`, else `O(t)`.
    pub values: Vec<Scalar>,
    pub o_infinity: Scalar,
    pub deflated: bool,
    pub backend: Backend,
    /// System size of the generating matrix (horizon for plateau searches).
    pub system_size: usize,
}

impl DecaySeries {
    pub fn t_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Scalar)> {
        self.values.iter().enumerate()
    }

    /// `O(t) − O(∞)`.
    pub fn decay_part(&self, t: usize) -> Scalar {
        if self.deflated {
            self.values[t].clone()
        } else {
            &self.values[t] - &self.o_infinity
        }
    }

    /// `O(t)`.
    pub fn observable(&self, t: usize) -> Scalar {
        if self.deflated {
            &self.values[t] + &self.o_infinity
        } else {
            self.values[t].clone()
        }
    }
}

/// Row vector `l` with `l A = l` and `l_last = 1`: the absorption probability into the
/// last absorbing state (sink for OBC/PBC, right bath for the walk).
pub fn stationary_left_vector(a: &TransferMatrix) -> Result<Vec<Scalar>> {
    match a {
        TransferMatrix::ObcFull { .. }
        | TransferMatrix::PbcBlockCirculant(_)
        | TransferMatrix::MarkovWalk(_) => a.committor(a.dim() - 1),
        _ => Err(Error::Domain(
            "stationary left vector is defined for OBC, PBC and walk matrices".into(),
        )),
    }
}

/// `O(∞) = Σ_a p_a (l_a · v)` over absorbing states `a`; zero if there are none.
pub fn o_infinity(a: &TransferMatrix, pair: &VectorPair) -> Result<Scalar> {
    let s = a.absorbing_structure();
    let mut acc = Scalar::zero();
    for &k in &s.absorbing {
        if pair.p[k].is_zero() {
            continue;
        }
        let l = a.committor(k)?;
        acc.mul_add_assign(&pair.p[k], &dot(&l, &pair.v));
    }
    Ok(acc)
}

fn infer_backend(a: &TransferMatrix, pair: &VectorPair) -> Backend {
    let prec = pair
        .v
        .iter()
        .chain(pair.p.iter())
        .chain((0..a.dim().min(3)).map(|i| a.entry(i, i)).collect::<Vec<_>>().iter())
        .filter_map(|x| x.precision())
        .max();
    match prec {
        Some(p) => Backend::Float { precision: p },
        None => Backend::Rational,
    }
}

/// Iterate `O(t) = p·Aᵗ·v` for `t = 0..=t_max` with structured products.
///
/// With `deflate`, the absorbing components are projected out first: the stored series is
/// `p̃·Tᵗ·v_T` with `p̃ = p_T − Σ_a p_a l_{a,T}`, which equals `O(t) − O(∞)` exactly and
/// never subtracts nearly equal numbers.
pub fn iterate_series(
    a: &TransferMatrix,
    pair: &VectorPair,
    t_max: usize,
    deflate: bool,
) -> Result<DecaySeries> {
    let dim = a.dim();
    for len in [pair.p.len(), pair.v.len()] {
        if len != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: len,
            });
        }
    }
    let backend = infer_backend(a, pair);
    let o_inf = o_infinity(a, pair)?;
    let mut values = Vec::with_capacity(t_max + 1);
    if deflate {
        let s = a.absorbing_structure();
        let mut p_t: Vec<Scalar> = s.transient.iter().map(|&i| pair.p[i].clone()).collect();
        for &k in &s.absorbing {
            if pair.p[k].is_zero() {
                continue;
            }
            let l = a.committor(k)?;
            let neg = -pair.p[k].clone();
            for (slot, &i) in p_t.iter_mut().zip(&s.transient) {
                slot.mul_add_assign(&neg, &l[i]);
            }
        }
        let mut x: Vec<Scalar> = s.transient.iter().map(|&i| pair.v[i].clone()).collect();
        for t in 0..=t_max {
            values.push(dot(&p_t, &x));
            if t < t_max {
                x = a.transient_matvec(&s, &x)?;
            }
        }
    } else {
        let mut x = pair.v.clone();
        for t in 0..=t_max {
            values.push(dot(&pair.p, &x));
            if t < t_max {
                x = a.matvec(&x)?;
            }
        }
    }
    Ok(DecaySeries {
        values,
        o_infinity: o_inf,
        deflated: deflate,
        backend,
        system_size: a.system_size(),
    })
}

/// Convert matrix and vectors to `backend`, then iterate.
pub fn iterate_with_backend(
    a: &TransferMatrix,
    pair: &VectorPair,
    t_max: usize,
    deflate: bool,
    backend: Backend,
) -> Result<DecaySeries> {
    let mut s = iterate_series(
        &a.to_backend(backend),
        &pair.to_backend(backend),
        t_max,
        deflate,
    )?;
    s.backend = backend;
    Ok(s)
}
