use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, solve_dense, solve_tridiagonal, Backend, Scalar};
use crate::transfer::params::Rates;

/// Largest dimension `to_dense` will materialize.
pub const DENSE_LIMIT: usize = 64;

/// Tridiagonal Toeplitz matrix: `diag` on the diagonal, `sup` above, `sub` below.
#[derive(Clone, Debug, PartialEq)]
pub struct Toeplitz3 {
    pub dim: usize,
    pub diag: Scalar,
    pub sup: Scalar,
    pub sub: Scalar,
}

impl Toeplitz3 {
    pub fn entry(&self, i: usize, j: usize) -> Scalar {
        if i == j {
            self.diag.clone()
        } else if j == i + 1 {
            self.sup.clone()
        } else if i == j + 1 {
            self.sub.clone()
        } else {
            Scalar::zero()
        }
    }

    fn apply(&self, x: &[Scalar]) -> Vec<Scalar> {
        let n = self.dim;
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = &self.diag * &x[i];
            if i + 1 < n && !self.sup.is_zero() {
                acc.mul_add_assign(&self.sup, &x[i + 1]);
            }
            if i > 0 && !self.sub.is_zero() {
                acc.mul_add_assign(&self.sub, &x[i - 1]);
            }
            y.push(acc);
        }
        y
    }

    fn transposed(&self) -> Toeplitz3 {
        Toeplitz3 {
            dim: self.dim,
            diag: self.diag.clone(),
            sup: self.sub.clone(),
            sub: self.sup.clone(),
        }
    }

    fn to_backend(&self, b: Backend) -> Toeplitz3 {
        Toeplitz3 {
            dim: self.dim,
            diag: b.convert(&self.diag),
            sup: b.convert(&self.sup),
            sub: b.convert(&self.sub),
        }
    }
}

/// Square banded block stored by diagonals; `diags[k] = (offset, values)` holds
/// entries `(i, i + offset)` for every valid `i` in increasing row order.
#[derive(Clone, Debug, PartialEq)]
pub struct BandBlock {
    pub dim: usize,
    pub diags: Vec<(isize, Vec<Scalar>)>,
}

impl BandBlock {
    fn constant(dim: usize, bands: &[(isize, Scalar)]) -> BandBlock {
        let diags = bands
            .iter()
            .filter(|(o, _)| o.unsigned_abs() < dim)
            .map(|(o, v)| (*o, vec![v.clone(); dim - o.unsigned_abs()]))
            .collect();
        BandBlock { dim, diags }
    }

    fn row_of(offset: isize, k: usize) -> usize {
        if offset >= 0 {
            k
        } else {
            k + offset.unsigned_abs()
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Scalar {
        let off = j as isize - i as isize;
        for (o, vals) in &self.diags {
            if *o == off {
                let k = if off >= 0 { i } else { j };
                return vals[k].clone();
            }
        }
        Scalar::zero()
    }

    /// `y += B x`.
    fn apply_acc(&self, x: &[Scalar], y: &mut [Scalar]) {
        for (o, vals) in &self.diags {
            for (k, v) in vals.iter().enumerate() {
                let i = Self::row_of(*o, k);
                let j = (i as isize + o) as usize;
                y[i].mul_add_assign(v, &x[j]);
            }
        }
    }

    /// `y += Bᵀ x`.
    fn apply_transpose_acc(&self, x: &[Scalar], y: &mut [Scalar]) {
        for (o, vals) in &self.diags {
            for (k, v) in vals.iter().enumerate() {
                let i = Self::row_of(*o, k);
                let j = (i as isize + o) as usize;
                y[j].mul_add_assign(v, &x[i]);
            }
        }
    }

    fn to_backend(&self, b: Backend) -> BandBlock {
        BandBlock {
            dim: self.dim,
            diags: self
                .diags
                .iter()
                .map(|(o, v)| (*o, v.iter().map(|x| b.convert(x)).collect()))
                .collect(),
        }
    }
}

/// Choice of the width-(n−1) absorption entry of the periodic-chain sink row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PbcAbsorption {
    /// `σ(1 + δ)`: the widest column then conserves mass like every interior column.
    #[default]
    MassConserving,
    /// `δσ + q²σ`, the literal printed form.
    AsPrinted,
}

/// Periodic-chain transfer matrix: n×n circulant of (n−1)×(n−1) blocks plus a sink.
#[derive(Clone, Debug, PartialEq)]
pub struct PbcMatrix {
    pub n: usize,
    pub q: u32,
    pub c: BandBlock,
    pub u: BandBlock,
    pub d: BandBlock,
    /// One block's worth of the absorption row; repeated for every block.
    pub b_block: Vec<Scalar>,
    pub absorption: PbcAbsorption,
}

impl PbcMatrix {
    pub fn block_dim(&self) -> usize {
        self.n - 1
    }

    fn transient_dim(&self) -> usize {
        self.n * (self.n - 1)
    }

    fn entry(&self, i: usize, j: usize) -> Scalar {
        let m = self.block_dim();
        let last = self.transient_dim();
        if i == last {
            return if j == last {
                Scalar::one()
            } else {
                self.b_block[j % m].clone()
            };
        }
        if j == last {
            return Scalar::zero();
        }
        let (r, a) = (i / m, i % m);
        let (c, b) = (j / m, j % m);
        let n = self.n;
        if c == r {
            self.c.entry(a, b)
        } else if c == (r + 1) % n {
            self.u.entry(a, b)
        } else if c == (r + n - 1) % n {
            self.d.entry(a, b)
        } else {
            Scalar::zero()
        }
    }

    fn apply(&self, x: &[Scalar]) -> Vec<Scalar> {
        let m = self.block_dim();
        let n = self.n;
        let last = self.transient_dim();
        let mut y = vec![Scalar::zero(); last + 1];
        for r in 0..n {
            let (head, tail) = y.split_at_mut((r + 1) * m);
            let _ = tail;
            let yr = &mut head[r * m..];
            let right = (r + 1) % n;
            let left = (r + n - 1) % n;
            self.c.apply_acc(&x[r * m..(r + 1) * m], yr);
            self.u.apply_acc(&x[right * m..(right + 1) * m], yr);
            self.d.apply_acc(&x[left * m..(left + 1) * m], yr);
        }
        let mut s = x[last].clone();
        for (k, xk) in x[..last].iter().enumerate() {
            let b = &self.b_block[k % m];
            if !b.is_zero() {
                s.mul_add_assign(b, xk);
            }
        }
        y[last] = s;
        y
    }

    fn apply_transpose(&self, x: &[Scalar]) -> Vec<Scalar> {
        let m = self.block_dim();
        let n = self.n;
        let last = self.transient_dim();
        let mut y = vec![Scalar::zero(); last + 1];
        for c in 0..n {
            let yc = &mut y[c * m..(c + 1) * m];
            let from_u = (c + n - 1) % n;
            let from_d = (c + 1) % n;
            self.c.apply_transpose_acc(&x[c * m..(c + 1) * m], yc);
            self.u
                .apply_transpose_acc(&x[from_u * m..(from_u + 1) * m], yc);
            self.d
                .apply_transpose_acc(&x[from_d * m..(from_d + 1) * m], yc);
            for (k, yk) in yc.iter_mut().enumerate() {
                if !self.b_block[k].is_zero() {
                    yk.mul_add_assign(&self.b_block[k], &x[last]);
                }
            }
        }
        y[last] = x[last].clone();
        y
    }

    /// Sum of the three block types, C + U + D.
    pub fn block_sum_entry(&self, a: usize, b: usize) -> Scalar {
        &(&self.c.entry(a, b) + &self.u.entry(a, b)) + &self.d.entry(a, b)
    }

    fn to_backend(&self, bk: Backend) -> PbcMatrix {
        PbcMatrix {
            n: self.n,
            q: self.q,
            c: self.c.to_backend(bk),
            u: self.u.to_backend(bk),
            d: self.d.to_backend(bk),
            b_block: self.b_block.iter().map(|x| bk.convert(x)).collect(),
            absorption: self.absorption,
        }
    }
}

/// Biased random walk on `bulk` sites with absorbing baths at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovWalkMatrix {
    pub bulk: usize,
    pub rates: Rates,
}

impl MarkovWalkMatrix {
    fn inner(&self) -> Toeplitz3 {
        Toeplitz3 {
            dim: self.bulk,
            diag: self.rates.delta.clone(),
            sup: self.rates.tau.clone(),
            sub: self.rates.sigma.clone(),
        }
    }

    fn entry(&self, i: usize, j: usize) -> Scalar {
        let m = self.bulk;
        if j == 0 || j == m + 1 {
            return if i == j { Scalar::one() } else { Scalar::zero() };
        }
        if i + 1 == j {
            self.rates.tau.clone()
        } else if i == j {
            self.rates.delta.clone()
        } else if i == j + 1 {
            self.rates.sigma.clone()
        } else {
            Scalar::zero()
        }
    }

    fn apply(&self, x: &[Scalar]) -> Vec<Scalar> {
        let m = self.bulk;
        let (d, t, s) = (&self.rates.delta, &self.rates.tau, &self.rates.sigma);
        let mut y = Vec::with_capacity(m + 2);
        let mut left = x[0].clone();
        left.mul_add_assign(t, &x[1]);
        y.push(left);
        for i in 1..=m {
            let mut acc = d * &x[i];
            if i > 1 {
                acc.mul_add_assign(s, &x[i - 1]);
            }
            if i < m {
                acc.mul_add_assign(t, &x[i + 1]);
            }
            y.push(acc);
        }
        let mut right = x[m + 1].clone();
        right.mul_add_assign(s, &x[m]);
        y.push(right);
        y
    }

    fn apply_transpose(&self, x: &[Scalar]) -> Vec<Scalar> {
        let m = self.bulk;
        let (d, t, s) = (&self.rates.delta, &self.rates.tau, &self.rates.sigma);
        let mut y = Vec::with_capacity(m + 2);
        y.push(x[0].clone());
        for j in 1..=m {
            let mut acc = d * &x[j];
            acc.mul_add_assign(t, &x[j - 1]);
            acc.mul_add_assign(s, &x[j + 1]);
            y.push(acc);
        }
        y.push(x[m + 1].clone());
        y
    }
}

/// `D⁻¹ T D` with `D = diag(μ^k)` for a tridiagonal Toeplitz or two-diagonal `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaledMatrix {
    pub base: Box<TransferMatrix>,
    pub mu: Scalar,
    /// The resulting Toeplitz matrix: super `τμ`, sub `σ/μ`.
    pub effective: Toeplitz3,
}

/// Dense row-major matrix for small custom cases and test oracles.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<Scalar>,
}

impl DenseMatrix {
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(DenseMatrix { dim, data })
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.dim + j]
    }
}

/// Every transfer matrix handled by the crate. Products are computed from the
/// structural parameters; nothing above `DENSE_LIMIT` is ever materialized.
#[derive(Clone, Debug, PartialEq)]
pub enum TransferMatrix {
    TridiagToeplitz(Toeplitz3),
    ObcFull { inner: Toeplitz3 },
    PbcBlockCirculant(PbcMatrix),
    MarkovWalk(MarkovWalkMatrix),
    TwoDiagonal(Toeplitz3),
    Rescaled(RescaledMatrix),
    Custom(DenseMatrix),
}

/// Split of the state space into transient and absorbing (unit-column) states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbsorbingStructure {
    pub transient: Vec<usize>,
    pub absorbing: Vec<usize>,
}

impl TransferMatrix {
    pub fn dim(&self) -> usize {
        match self {
            TransferMatrix::TridiagToeplitz(t) | TransferMatrix::TwoDiagonal(t) => t.dim,
            TransferMatrix::ObcFull { inner } => inner.dim + 1,
            TransferMatrix::PbcBlockCirculant(p) => p.transient_dim() + 1,
            TransferMatrix::MarkovWalk(w) => w.bulk + 2,
            TransferMatrix::Rescaled(r) => r.effective.dim,
            TransferMatrix::Custom(d) => d.dim,
        }
    }

    /// Physical system size: spins for OBC/PBC, bulk sites for the walk, else the dimension.
    pub fn system_size(&self) -> usize {
        match self {
            TransferMatrix::ObcFull { inner } => inner.dim + 1,
            TransferMatrix::PbcBlockCirculant(p) => p.n,
            TransferMatrix::MarkovWalk(w) => w.bulk,
            _ => self.dim(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Scalar {
        match self {
            TransferMatrix::TridiagToeplitz(t) | TransferMatrix::TwoDiagonal(t) => t.entry(i, j),
            TransferMatrix::ObcFull { inner } => {
                let last = inner.dim;
                if i == last {
                    if j == last {
                        Scalar::one()
                    } else if j + 1 == last {
                        inner.sub.clone()
                    } else {
                        Scalar::zero()
                    }
                } else if j == last {
                    Scalar::zero()
                } else {
                    inner.entry(i, j)
                }
            }
            TransferMatrix::PbcBlockCirculant(p) => p.entry(i, j),
            TransferMatrix::MarkovWalk(w) => w.entry(i, j),
            TransferMatrix::Rescaled(r) => r.effective.entry(i, j),
            TransferMatrix::Custom(d) => d.get(i, j).clone(),
        }
    }

    /// Dense rows; refuses dimensions above `DENSE_LIMIT`.
    pub fn to_dense(&self) -> Result<Vec<Vec<Scalar>>> {
        let n = self.dim();
        if n > DENSE_LIMIT {
            return Err(Error::Domain(format!(
                "refusing to materialize a {n}x{n} matrix (limit {DENSE_LIMIT})"
            )));
        }
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j)).collect())
            .collect())
    }

    fn check_len(&self, x: &[Scalar]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `A x`.
    pub fn matvec(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        self.check_len(x)?;
        Ok(match self {
            TransferMatrix::TridiagToeplitz(t) | TransferMatrix::TwoDiagonal(t) => t.apply(x),
            TransferMatrix::ObcFull { inner } => {
                let m = inner.dim;
                let mut y = inner.apply(&x[..m]);
                let mut s = x[m].clone();
                s.mul_add_assign(&inner.sub, &x[m - 1]);
                y.push(s);
                y
            }
            TransferMatrix::PbcBlockCirculant(p) => p.apply(x),
            TransferMatrix::MarkovWalk(w) => w.apply(x),
            TransferMatrix::Rescaled(r) => r.effective.apply(x),
            TransferMatrix::Custom(d) => (0..d.dim)
                .map(|i| dot(&d.data[i * d.dim..(i + 1) * d.dim], x))
                .collect(),
        })
    }

    /// `x A` (row vector times matrix), returned as a vector.
    pub fn vecmat(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        self.check_len(x)?;
        Ok(match self {
            TransferMatrix::TridiagToeplitz(t) | TransferMatrix::TwoDiagonal(t) => {
                t.transposed().apply(x)
            }
            TransferMatrix::ObcFull { inner } => {
                let m = inner.dim;
                let mut y = inner.transposed().apply(&x[..m]);
                y[m - 1].mul_add_assign(&inner.sub, &x[m]);
                y.push(x[m].clone());
                y
            }
            TransferMatrix::PbcBlockCirculant(p) => p.apply_transpose(x),
            TransferMatrix::MarkovWalk(w) => w.apply_transpose(x),
            TransferMatrix::Rescaled(r) => r.effective.transposed().apply(x),
            TransferMatrix::Custom(d) => (0..d.dim)
                .map(|j| {
                    let col: Vec<Scalar> = (0..d.dim).map(|i| d.get(i, j).clone()).collect();
                    dot(&col, x)
                })
                .collect(),
        })
    }

    /// Convert every stored entry to `backend`.
    pub fn to_backend(&self, backend: Backend) -> TransferMatrix {
        match self {
            TransferMatrix::TridiagToeplitz(t) => {
                TransferMatrix::TridiagToeplitz(t.to_backend(backend))
            }
            TransferMatrix::TwoDiagonal(t) => TransferMatrix::TwoDiagonal(t.to_backend(backend)),
            TransferMatrix::ObcFull { inner } => TransferMatrix::ObcFull {
                inner: inner.to_backend(backend),
            },
            TransferMatrix::PbcBlockCirculant(p) => {
                TransferMatrix::PbcBlockCirculant(p.to_backend(backend))
            }
            TransferMatrix::MarkovWalk(w) => TransferMatrix::MarkovWalk(MarkovWalkMatrix {
                bulk: w.bulk,
                rates: w.rates.to_backend(backend),
            }),
            TransferMatrix::Rescaled(r) => TransferMatrix::Rescaled(RescaledMatrix {
                base: Box::new(r.base.to_backend(backend)),
                mu: backend.convert(&r.mu),
                effective: r.effective.to_backend(backend),
            }),
            TransferMatrix::Custom(d) => TransferMatrix::Custom(DenseMatrix {
                dim: d.dim,
                data: d.data.iter().map(|x| backend.convert(x)).collect(),
            }),
        }
    }

    /// Transient/absorbing split. Absorbing states are exactly the unit columns `A e_a = e_a`.
    pub fn absorbing_structure(&self) -> AbsorbingStructure {
        let n = self.dim();
        let absorbing: Vec<usize> = match self {
            TransferMatrix::ObcFull { .. } | TransferMatrix::PbcBlockCirculant(_) => vec![n - 1],
            TransferMatrix::MarkovWalk(_) => vec![0, n - 1],
            TransferMatrix::Custom(d) => (0..n)
                .filter(|&a| {
                    (0..n).all(|i| {
                        let e = d.get(i, a);
                        if i == a {
                            *e == Scalar::one()
                        } else {
                            e.is_zero()
                        }
                    })
                })
                .collect(),
            _ => vec![],
        };
        let transient = (0..n).filter(|i| !absorbing.contains(i)).collect();
        AbsorbingStructure {
            transient,
            absorbing,
        }
    }

    /// Transient block applied to a transient-coordinate vector: `T x_T`.
    pub fn transient_matvec(&self, s: &AbsorbingStructure, x_t: &[Scalar]) -> Result<Vec<Scalar>> {
        if x_t.len() != s.transient.len() {
            return Err(Error::DimensionMismatch {
                expected: s.transient.len(),
                found: x_t.len(),
            });
        }
        match self {
            TransferMatrix::ObcFull { inner } => return Ok(inner.apply(x_t)),
            TransferMatrix::MarkovWalk(w) => return Ok(w.inner().apply(x_t)),
            _ => {}
        }
        if s.absorbing.is_empty() {
            return self.matvec(x_t);
        }
        let mut full = vec![Scalar::zero(); self.dim()];
        for (k, &i) in s.transient.iter().enumerate() {
            full[i] = x_t[k].clone();
        }
        let y = self.matvec(&full)?;
        Ok(s.transient.iter().map(|&i| y[i].clone()).collect())
    }

    /// Row `a` restricted to transient columns.
    fn absorption_row(&self, s: &AbsorbingStructure, a: usize) -> Vec<Scalar> {
        s.transient.iter().map(|&j| self.entry(a, j)).collect()
    }

    /// Absorption probability ("committor") into state `a`, as a full row vector:
    /// transient part solves `l_T (I − T) = B_a`, with 1 at `a` and 0 at other absorbing states.
    pub fn committor(&self, a: usize) -> Result<Vec<Scalar>> {
        let s = self.absorbing_structure();
        if !s.absorbing.contains(&a) {
            return Err(Error::Domain(format!("state {a} is not absorbing")));
        }
        let b = self.absorption_row(&s, a);
        let l_t = match self {
            TransferMatrix::ObcFull { inner } => solve_i_minus_t_left(inner, &b)?,
            TransferMatrix::MarkovWalk(w) => solve_i_minus_t_left(&w.inner(), &b)?,
            TransferMatrix::PbcBlockCirculant(p) => {
                let m = p.block_dim();
                let mat: Vec<Vec<Scalar>> = (0..m)
                    .map(|col| {
                        (0..m)
                            .map(|row| {
                                let e = p.block_sum_entry(row, col);
                                if row == col {
                                    &Scalar::one() - &e
                                } else {
                                    -e
                                }
                            })
                            .collect()
                    })
                    .collect();
                let ell = solve_dense(mat, p.b_block.clone())?;
                (0..p.n).flat_map(|_| ell.iter().cloned()).collect()
            }
            _ => {
                let nt = s.transient.len();
                let mat: Vec<Vec<Scalar>> = (0..nt)
                    .map(|c| {
                        (0..nt)
                            .map(|r| {
                                let e = self.entry(s.transient[r], s.transient[c]);
                                if r == c {
                                    &Scalar::one() - &e
                                } else {
                                    -e
                                }
                            })
                            .collect()
                    })
                    .collect();
                solve_dense(mat, b)?
            }
        };
        let mut l = vec![Scalar::zero(); self.dim()];
        for (k, &i) in s.transient.iter().enumerate() {
            l[i] = l_t[k].clone();
        }
        l[a] = Scalar::one();
        Ok(l)
    }
}

/// Solve `l (I − T) = b` for a tridiagonal Toeplitz `T`, i.e. `(I − T)ᵀ l = b`.
fn solve_i_minus_t_left(t: &Toeplitz3, b: &[Scalar]) -> Result<Vec<Scalar>> {
    let m = t.dim;
    let diag = vec![&Scalar::one() - &t.diag; m];
    let sub = vec![-t.sup.clone(); m.saturating_sub(1)];
    let sup = vec![-t.sub.clone(); m.saturating_sub(1)];
    solve_tridiagonal(&sub, &diag, &sup, b)
}

pub(crate) fn pbc_blocks(n: usize, rates: &Rates) -> (BandBlock, BandBlock, BandBlock) {
    let m = n - 1;
    let (d, t, s) = (&rates.delta, &rates.tau, &rates.sigma);
    let ts = t * s;
    let mut c = BandBlock::constant(
        m,
        &[
            (0, &Scalar::from(4) * &ts),
            (1, d * t),
            (-1, d * s),
        ],
    );
    let corner = &Scalar::from(3) * &ts;
    if let Some((_, diag)) = c.diags.iter_mut().find(|(o, _)| *o == 0) {
        diag[0] = corner.clone();
        diag[m - 1] = corner;
    }
    let u = BandBlock::constant(m, &[(0, ts.clone()), (-1, d * s), (-2, s * s)]);
    let dn = BandBlock::constant(m, &[(0, ts), (1, d * t), (2, t * t)]);
    (c, u, dn)
}
