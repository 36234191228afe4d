use crate::error::{Error, Result};
use crate::numerics::Scalar;

/// Solve `M x = rhs` for a dense row-major `M` by Gaussian elimination with partial pivoting.
///
/// Exact inputs give exact solutions. A zero pivot is reported as `Error::Singular`
/// with the ratio of extreme pivot magnitudes as a crude condition estimate.
pub fn solve_dense(mut m: Vec<Vec<Scalar>>, mut rhs: Vec<Scalar>) -> Result<Vec<Scalar>> {
    let n = rhs.len();
    if m.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.len(),
        });
    }
    if let Some(row) = m.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: row.len(),
        });
    }
    let mut pivmax = 0.0f64;
    let mut pivmin = f64::INFINITY;
    for col in 0..n {
        let mut best = col;
        let mut best_abs = m[col][col].abs();
        for r in col + 1..n {
            let a = m[r][col].abs();
            if a > best_abs {
                best = r;
                best_abs = a;
            }
        }
        if best_abs.is_zero() {
            return Err(Error::Singular {
                reason: format!("zero pivot in column {col}"),
                condition_estimate: f64::INFINITY,
            });
        }
        let pa = best_abs.to_f64();
        pivmax = pivmax.max(pa);
        pivmin = pivmin.min(pa);
        m.swap(col, best);
        rhs.swap(col, best);
        let inv = m[col][col].recip()?;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] * &inv;
            let neg = -factor;
            let (top, bottom) = m.split_at_mut(r);
            let pivot_row = &top[col];
            let row = &mut bottom[0];
            for c in col..n {
                if !pivot_row[c].is_zero() {
                    row[c].mul_add_assign(&neg, &pivot_row[c]);
                }
            }
            let pr = rhs[col].clone();
            rhs[r].mul_add_assign(&neg, &pr);
        }
    }
    let mut x = vec![Scalar::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i].clone();
        for j in i + 1..n {
            if !m[i][j].is_zero() {
                s -= &(&m[i][j] * &x[j]);
            }
        }
        x[i] = s.checked_div(&m[i][i])?;
    }
    if pivmin > 0.0 && pivmax / pivmin > 1e300 {
        return Err(Error::Singular {
            reason: "pivot ratio exceeds double range".into(),
            condition_estimate: pivmax / pivmin,
        });
    }
    Ok(x)
}

/// Solve a tridiagonal system with sub-diagonal `sub` (len n-1), diagonal `diag` (len n)
/// and super-diagonal `sup` (len n-1). Uses the Thomas algorithm and falls back to
/// pivoted elimination if a pivot vanishes.
pub fn solve_tridiagonal(
    sub: &[Scalar],
    diag: &[Scalar],
    sup: &[Scalar],
    rhs: &[Scalar],
) -> Result<Vec<Scalar>> {
    let n = diag.len();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rhs.len(),
        });
    }
    if n == 0 {
        return Ok(vec![]);
    }
    if sub.len() + 1 != n || sup.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n.saturating_sub(1),
            found: sub.len().min(sup.len()),
        });
    }
    let mut c = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    let mut ok = true;
    for i in 0..n {
        let mut den = diag[i].clone();
        let mut num = rhs[i].clone();
        if i > 0 {
            let cprev: &Scalar = &c[i - 1];
            let dprev: &Scalar = &d[i - 1];
            den -= &(&sub[i - 1] * cprev);
            num -= &(&sub[i - 1] * dprev);
        }
        if den.is_zero() {
            ok = false;
            break;
        }
        let inv = den.recip()?;
        c.push(if i + 1 < n {
            &sup[i] * &inv
        } else {
            Scalar::zero()
        });
        d.push(num * &inv);
    }
    if !ok {
        let mut m = vec![vec![Scalar::zero(); n]; n];
        for i in 0..n {
            m[i][i] = diag[i].clone();
            if i + 1 < n {
                m[i][i + 1] = sup[i].clone();
                m[i + 1][i] = sub[i].clone();
            }
        }
        return solve_dense(m, rhs.to_vec());
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let t = &c[i] * &x[i + 1];
        x[i] -= &t;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn dense_exact_solution() {
        let m = vec![
            vec![s(2, 1), s(1, 1), s(0, 1)],
            vec![s(1, 1), s(3, 1), s(1, 1)],
            vec![s(0, 1), s(1, 1), s(4, 1)],
        ];
        let x_true = vec![s(1, 2), s(-1, 3), s(5, 7)];
        let rhs: Vec<Scalar> = m
            .iter()
            .map(|r| crate::numerics::dot(r, &x_true))
            .collect();
        let x = solve_dense(m, rhs).unwrap();
        assert_eq!(x, x_true);
    }

    #[test]
    fn dense_needs_pivoting() {
        let m = vec![vec![s(0, 1), s(1, 1)], vec![s(1, 1), s(0, 1)]];
        let x = solve_dense(m, vec![s(3, 1), s(4, 1)]).unwrap();
        assert_eq!(x, vec![s(4, 1), s(3, 1)]);
    }

    #[test]
    fn dense_singular() {
        let m = vec![vec![s(1, 1), s(2, 1)], vec![s(2, 1), s(4, 1)]];
        assert!(matches!(
            solve_dense(m, vec![s(1, 1), s(1, 1)]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let n = 7;
        let sub: Vec<Scalar> = (0..n - 1).map(|i| s(i as i64 + 1, 3)).collect();
        let sup: Vec<Scalar> = (0..n - 1).map(|i| s(2, i as i64 + 2)).collect();
        let diag: Vec<Scalar> = (0..n).map(|i| s(5 + i as i64, 2)).collect();
        let rhs: Vec<Scalar> = (0..n).map(|i| s(i as i64 - 3, 1)).collect();
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        let mut m = vec![vec![Scalar::zero(); n]; n];
        for i in 0..n {
            m[i][i] = diag[i].clone();
            if i + 1 < n {
                m[i][i + 1] = sup[i].clone();
                m[i + 1][i] = sub[i].clone();
            }
        }
        assert_eq!(x, solve_dense(m, rhs).unwrap());
    }

    #[test]
    fn tridiagonal_zero_pivot_falls_back() {
        let x = solve_tridiagonal(
            &[s(1, 1)],
            &[s(0, 1), s(0, 1)],
            &[s(1, 1)],
            &[s(2, 1), s(5, 1)],
        )
        .unwrap();
        assert_eq!(x, vec![s(5, 1), s(2, 1)]);
    }
}
