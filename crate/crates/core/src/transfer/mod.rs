//! Transfer matrices, initial vectors and iteration of `O(t) = p·Aᵗ·v`.

mod build;
mod iterate;
mod matrix;
mod params;
mod vectors;
mod walk;

pub use build::{
    build, build_jordan, build_markov_walk, build_obc, build_pbc, build_pbc_with, build_toeplitz,
    rescale,
};
pub use iterate::{
    iterate_series, iterate_with_backend, o_infinity, stationary_left_vector, DecaySeries,
};
pub use matrix::{
    AbsorbingStructure, BandBlock, DenseMatrix, MarkovWalkMatrix, PbcAbsorption, PbcMatrix,
    RescaledMatrix, Toeplitz3, TransferMatrix, DENSE_LIMIT,
};
pub use params::{Boundary, ModelParams, Rates};
pub use vectors::{random_simplex_point, Provenance, VectorPair};
pub use walk::{simulate_walk, WalkEstimate};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dot, Backend, Scalar};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn dense_matvec(m: &[Vec<Scalar>], x: &[Scalar]) -> Vec<Scalar> {
        m.iter().map(|row| dot(row, x)).collect()
    }

    fn dense_vecmat(m: &[Vec<Scalar>], x: &[Scalar]) -> Vec<Scalar> {
        (0..m.len())
            .map(|j| {
                let col: Vec<Scalar> = m.iter().map(|row| row[j].clone()).collect();
                dot(&col, x)
            })
            .collect()
    }

    fn obc(n: usize) -> TransferMatrix {
        build_obc(&ModelParams::qudit(Boundary::Obc, n, 2).unwrap()).unwrap()
    }

    fn pbc(n: usize, q: u32) -> TransferMatrix {
        build_pbc(&ModelParams::qudit(Boundary::Pbc, n, q).unwrap()).unwrap()
    }

    fn all_small_variants() -> Vec<TransferMatrix> {
        let rates = Rates::from_q(2).unwrap();
        let t = build_toeplitz(6, &rates).unwrap();
        let jordan = build_jordan(5, &r(1, 3), &r(2, 3)).unwrap();
        vec![
            t.clone(),
            obc(7),
            pbc(3, 2),
            pbc(4, 3),
            build_markov_walk(6, &rates).unwrap(),
            jordan.clone(),
            rescale(&t, &r(27, 20)).unwrap(),
            rescale(&jordan, &r(3, 2)).unwrap(),
        ]
    }

    #[test]
    fn obc_dense_examples() {
        let a = obc(3).to_dense().unwrap();
        let expect = vec![
            vec![r(8, 25), r(1, 25), r(0, 1)],
            vec![r(16, 25), r(8, 25), r(0, 1)],
            vec![r(0, 1), r(16, 25), r(1, 1)],
        ];
        assert_eq!(a, expect);
        let a2 = obc(2).to_dense().unwrap();
        assert_eq!(a2, vec![vec![r(8, 25), r(0, 1)], vec![r(16, 25), r(1, 1)]]);
        let a9 = obc(9).to_dense().unwrap();
        assert_eq!(&a9[0][0] + &a9[1][0], r(24, 25));
        assert!(build_obc(&ModelParams::qudit(Boundary::Obc, 1, 2).unwrap()).is_err());
    }

    #[test]
    fn pbc_blocks_example() {
        let a = pbc(3, 2);
        assert_eq!(a.dim(), 7);
        let d = a.to_dense().unwrap();
        let ts = r(16, 625);
        assert_eq!(d[0][0], &Scalar::from(3) * &ts);
        assert_eq!(d[0][1], r(8, 625));
        assert_eq!(d[1][0], r(128, 625));
        assert_eq!(d[1][1], &Scalar::from(3) * &ts);
        assert!(build_pbc(&ModelParams::qudit(Boundary::Pbc, 2, 2).unwrap()).is_err());
    }

    #[test]
    fn pbc_sink_row_variants() {
        for n in 3..7 {
            let p = ModelParams::qudit(Boundary::Pbc, n, 2).unwrap();
            let printed = build_pbc_with(&p, PbcAbsorption::AsPrinted).unwrap();
            let last = printed.dim() - 1;
            let rt = Rates::from_q(2).unwrap();
            let ds = &rt.delta * &rt.sigma;
            assert_eq!(printed.entry(last, n - 2), &ds + &(&Scalar::from(4) * &rt.sigma));
            assert_eq!(printed.entry(last, n - 3), &rt.sigma * &rt.sigma);
            let conserving = pbc(n, 2);
            assert_eq!(conserving.entry(last, n - 2), &ds + &rt.sigma);
        }
    }

    #[test]
    fn pbc_mass_conserving_column_sums() {
        // Widths 1 and 2 lose mass to the empty domain; every wider column sums to one.
        for (n, q) in [(4, 2), (5, 2), (6, 3), (7, 5)] {
            let a = pbc(n, q);
            let rt = Rates::from_q(q).unwrap();
            let (d, t, s) = (&rt.delta, &rt.tau, &rt.sigma);
            let tt = t * t;
            let leak0 = &(&tt + &(&Scalar::from(2) * &(d * t))) + &(t * s);
            let dense = a.to_dense().unwrap();
            for j in 0..a.dim() {
                let col: Scalar = dense.iter().map(|row| row[j].clone()).sum();
                let expect = if j == a.dim() - 1 {
                    Scalar::one()
                } else {
                    match j % (n - 1) {
                        0 => &Scalar::one() - &leak0,
                        1 => &Scalar::one() - &tt,
                        _ => Scalar::one(),
                    }
                };
                assert_eq!(col, expect, "n={n} q={q} column {j}");
            }
        }
    }

    #[test]
    fn markov_walk_examples() {
        let rates = Rates::from_q(2).unwrap();
        let a = build_markov_walk(1, &rates).unwrap().to_dense().unwrap();
        assert_eq!(
            a,
            vec![
                vec![r(1, 1), r(1, 25), r(0, 1)],
                vec![r(0, 1), r(8, 25), r(0, 1)],
                vec![r(0, 1), r(16, 25), r(1, 1)],
            ]
        );
        let a4 = build_markov_walk(4, &rates).unwrap();
        let d = a4.to_dense().unwrap();
        // bulk site 2: left with tau, stay with delta, right with sigma
        assert_eq!(d[1][2], r(1, 25));
        assert_eq!(d[2][2], r(8, 25));
        assert_eq!(d[3][2], r(16, 25));
        for j in 0..6 {
            let s: Scalar = d.iter().map(|row| row[j].clone()).sum();
            assert_eq!(s, Scalar::one());
        }
        let bad = Rates::new(r(1, 2), r(1, 2), r(1, 2)).unwrap();
        assert!(build_markov_walk(3, &bad).is_err());
    }

    #[test]
    fn jordan_examples() {
        let j = build_jordan(3, &Scalar::zero(), &Scalar::one()).unwrap();
        let d = j.to_dense().unwrap();
        assert_eq!(d[1][0], Scalar::one());
        assert_eq!(d[2][1], Scalar::one());
        assert!(d[0].iter().all(|x| x.is_zero()));
        let mut x = vec![r(3, 1), r(-2, 1), r(5, 7)];
        for _ in 0..3 {
            x = j.matvec(&x).unwrap();
        }
        assert!(x.iter().all(|e| e.is_zero()));
        let h = build_jordan(2, &r(1, 2), &r(1, 2)).unwrap().to_dense().unwrap();
        assert_eq!(h, vec![vec![r(1, 2), r(0, 1)], vec![r(1, 2), r(1, 2)]]);
    }

    #[test]
    fn rescale_examples() {
        let rates = Rates::from_q(2).unwrap();
        let t = build_toeplitz(8, &rates).unwrap();
        let same = rescale(&t, &Scalar::one()).unwrap();
        assert_eq!(same.to_dense().unwrap(), t.to_dense().unwrap());
        let s = rescale(&t, &r(27, 20)).unwrap();
        if let TransferMatrix::Rescaled(m) = &s {
            assert_eq!(m.effective.sup, r(27, 500));
            assert!((m.effective.sub.to_f64() - 0.474074).abs() < 1e-6);
        } else {
            panic!("expected rescaled variant");
        }
        assert!(rescale(&t, &Scalar::zero()).is_err());
        assert!(rescale(&obc(4), &Scalar::one()).is_err());
    }

    #[test]
    fn rescale_equals_similarity_transform() {
        let rates = Rates::from_q(3).unwrap();
        let t = build_toeplitz(6, &rates).unwrap();
        let mu = r(5, 3);
        let s = rescale(&t, &mu).unwrap().to_dense().unwrap();
        let td = t.to_dense().unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let scale = mu.powi(j as i32 - i as i32).unwrap();
                assert_eq!(s[i][j], &td[i][j] * &scale);
            }
        }
    }

    #[test]
    fn structured_products_match_dense() {
        for a in all_small_variants() {
            let d = a.to_dense().unwrap();
            let x: Vec<Scalar> = (0..a.dim()).map(|i| r(i as i64 * 7 % 11 - 4, 3)).collect();
            assert_eq!(a.matvec(&x).unwrap(), dense_matvec(&d, &x), "{a:?}");
            assert_eq!(a.vecmat(&x).unwrap(), dense_vecmat(&d, &x), "{a:?}");
        }
    }

    #[test]
    fn sink_is_fixed_point() {
        for a in [obc(5), pbc(4, 2), pbc(5, 3)] {
            let mut e = vec![Scalar::zero(); a.dim()];
            *e.last_mut().unwrap() = Scalar::one();
            assert_eq!(a.matvec(&e).unwrap(), e);
        }
    }

    #[test]
    fn matvec_rejects_wrong_dimension() {
        assert!(obc(4).matvec(&[Scalar::one()]).is_err());
        let pair = VectorPair::otoc_obc(5, 2, 2).unwrap();
        assert!(iterate_series(&obc(4), &pair, 3, false).is_err());
    }

    #[test]
    fn stationary_vector_walk_split() {
        let rates = Rates::from_q(2).unwrap();
        let w = build_markov_walk(1, &rates).unwrap();
        let left = w.committor(0).unwrap();
        assert_eq!(left[1], r(1, 17));
        let l = stationary_left_vector(&w).unwrap();
        assert_eq!(l[1], r(16, 17));
        assert_eq!(l[2], Scalar::one());
    }

    #[test]
    fn stationary_vector_is_fixed_point() {
        for a in [
            obc(9),
            pbc(5, 2),
            build_markov_walk(7, &Rates::from_q(3).unwrap()).unwrap(),
        ] {
            let l = stationary_left_vector(&a).unwrap();
            assert_eq!(*l.last().unwrap(), Scalar::one());
            assert_eq!(a.vecmat(&l).unwrap(), l);
            let x: Vec<Scalar> = (0..a.dim()).map(|i| r((i * i) as i64 % 13, 5)).collect();
            assert_eq!(dot(&l, &a.matvec(&x).unwrap()), dot(&l, &x));
        }
        assert!(stationary_left_vector(&build_toeplitz(3, &Rates::from_q(2).unwrap()).unwrap()).is_err());
    }

    #[test]
    fn obc_otoc_first_steps() {
        let a = obc(4);
        let pair = VectorPair::otoc_obc(4, 2, 2).unwrap();
        let s = iterate_series(&a, &pair, 3, false).unwrap();
        assert_eq!(s.values[0], r(16, 15));
        assert_eq!(s.values[1], &r(16, 15) * &r(24, 25));
        assert_eq!(s.t_max(), 3);
    }

    #[test]
    fn jordan_shift_register_empties() {
        let j = build_jordan(3, &Scalar::zero(), &Scalar::one()).unwrap();
        let pair = VectorPair::custom(
            vec![Scalar::one(); 3],
            vec![Scalar::one(), Scalar::zero(), Scalar::zero()],
        )
        .unwrap();
        let s = iterate_series(&j, &pair, 4, false).unwrap();
        let v: Vec<i64> = s.values.iter().map(|x| x.to_f64() as i64).collect();
        assert_eq!(v, vec![1, 1, 1, 0, 0]);
    }

    #[test]
    fn deflated_and_plain_agree_exactly() {
        let cases: Vec<(TransferMatrix, VectorPair)> = vec![
            (obc(8), VectorPair::otoc_obc(8, 2, 5).unwrap()),
            (obc(8), VectorPair::random_obc(8, 11).unwrap()),
            (pbc(4, 2), VectorPair::otoc_pbc(4, 2, 3).unwrap()),
            (pbc(5, 2), VectorPair::random_pbc(5, 2, 5, 4).unwrap()),
            (
                build_markov_walk(6, &Rates::from_q(2).unwrap()).unwrap(),
                VectorPair::random_stochastic(vec![Scalar::one(); 8], 3).unwrap(),
            ),
        ];
        for (a, pair) in cases {
            let plain = iterate_series(&a, &pair, 25, false).unwrap();
            let defl = iterate_series(&a, &pair, 25, true).unwrap();
            assert_eq!(plain.o_infinity, defl.o_infinity);
            for t in 0..=25 {
                assert_eq!(plain.values[t], defl.observable(t), "t={t}");
            }
        }
    }

    #[test]
    fn obc_bulk_equivalence_before_boundary() {
        let n = 10;
        let a = obc(n);
        let rates = Rates::from_q(2).unwrap();
        let t_mat = build_toeplitz(n - 1, &rates).unwrap();
        let mut v = vec![Scalar::zero(); n];
        v[0] = Scalar::one();
        v[1] = r(1, 2);
        let mut p: Vec<Scalar> = (0..n).map(|k| r(k as i64 + 1, 7)).collect();
        p[n - 1] = Scalar::zero();
        let full = iterate_series(&a, &VectorPair::custom(p.clone(), v.clone()).unwrap(), n - 3, false)
            .unwrap();
        let bulk = iterate_series(
            &t_mat,
            &VectorPair::custom(p[..n - 1].to_vec(), v[..n - 1].to_vec()).unwrap(),
            n - 3,
            false,
        )
        .unwrap();
        assert_eq!(full.values, bulk.values);
    }

    #[test]
    fn walk_matches_obc_after_dropping_left_bath() {
        // Walk with bulk m = n−1: dropping the left bath leaves exactly the OBC matrix.
        let n = 9;
        let rates = Rates::from_q(2).unwrap();
        let w = build_markov_walk(n - 1, &rates).unwrap();
        let a = obc(n);
        let v_obc: Vec<Scalar> = VectorPair::random_obc(n, 5).unwrap().v;
        let mut v_w = vec![Scalar::zero()];
        v_w.extend(v_obc.iter().cloned());
        let mut p_w = vec![Scalar::one(); n + 1];
        p_w[0] = Scalar::zero();
        let p_obc = vec![Scalar::one(); n];
        let sw = iterate_series(&w, &VectorPair::custom(p_w, v_w).unwrap(), 30, false).unwrap();
        let so = iterate_series(&a, &VectorPair::custom(p_obc, v_obc).unwrap(), 30, false).unwrap();
        assert_eq!(sw.values, so.values);
    }

    #[test]
    fn float_backend_tracks_rational() {
        let a = pbc(6, 2);
        let pair = VectorPair::otoc_pbc(6, 2, 4).unwrap();
        let exact = iterate_series(&a, &pair, 20, true).unwrap();
        let fl = iterate_with_backend(&a, &pair, 20, true, Backend::default()).unwrap();
        assert_eq!(fl.backend, Backend::default());
        assert_eq!(exact.backend, Backend::Rational);
        for t in 0..=20 {
            let e = &exact.values[t];
            let rel = (&(e - &fl.values[t]) / e).abs();
            assert!(rel.to_f64() < 1e-70, "t={t}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn walk_conserves_probability(m in 1usize..8, seed in 0u64..1000, q in 2u32..5) {
            let w = build_markov_walk(m, &Rates::from_q(q).unwrap()).unwrap();
            let mut x = random_simplex_point(m + 2, seed);
            for _ in 0..10 {
                x = w.matvec(&x).unwrap();
                let s: Scalar = x.iter().cloned().sum();
                prop_assert_eq!(s, Scalar::one());
            }
        }

        #[test]
        fn deflation_is_exact(n in 3usize..12, seed in 0u64..1000) {
            let a = obc(n);
            let pair = VectorPair::random_obc(n, seed).unwrap();
            let plain = iterate_series(&a, &pair, 12, false).unwrap();
            let defl = iterate_series(&a, &pair, 12, true).unwrap();
            for t in 0..=12 {
                prop_assert_eq!(&plain.values[t], &defl.observable(t));
            }
        }

        #[test]
        fn products_match_dense(n in 3usize..6, q in 2u32..4, seed in 0u64..1000) {
            let a = pbc(n, q);
            let d = a.to_dense().unwrap();
            let x = random_simplex_point(a.dim(), seed);
            prop_assert_eq!(a.matvec(&x).unwrap(), dense_matvec(&d, &x));
            prop_assert_eq!(a.vecmat(&x).unwrap(), dense_vecmat(&d, &x));
        }
    }
}
