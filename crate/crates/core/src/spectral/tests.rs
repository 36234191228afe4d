use nalgebra::DMatrix;
use num_complex::Complex64;

use super::*;
use crate::numerics::Scalar;
use crate::transfer::{build_obc, build_pbc, build_toeplitz, Boundary, ModelParams, Rates};

const P: u32 = 128;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sorted_re(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn real_dense(a: &crate::transfer::TransferMatrix, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| a.entry(idx[i], idx[j]).to_f64())
}

#[test]
fn obc_eigensystem_residual_and_biorthogonality() {
    for q in [2u32, 3] {
        let rates = Rates::from_q(q).unwrap();
        for n in [3usize, 8, 17] {
            let eig = obc_eigensystem(n, &rates, P).unwrap();
            let t = build_toeplitz(n - 1, &rates).unwrap();
            assert!(eig.max_residual(&t).unwrap() < 1e-30, "q={q} n={n}");
            assert!(eig.max_biorthogonality_defect().unwrap() < 1e-30, "q={q} n={n}");
        }
    }
}

#[test]
fn obc_eigenvalues_match_dense_oracle() {
    let rates = Rates::from_q(2).unwrap();
    let n = 12;
    let a = build_obc(&ModelParams::qudit(Boundary::Obc, n, 2).unwrap()).unwrap();
    let idx: Vec<usize> = (0..n - 1).collect();
    let oracle = sorted_re(
        real_dense(&a, &idx)
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .collect(),
    );
    let ours = sorted_re(
        obc_eigensystem(n, &rates, P)
            .unwrap()
            .eigenvalues
            .iter()
            .map(|z| z.to_c64().re)
            .collect(),
    );
    for (x, y) in oracle.iter().zip(&ours) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
    let l2 = obc_lambda2(n, &rates, P).unwrap().to_f64();
    assert!((l2 - ours.last().unwrap()).abs() < 1e-15);
}

#[test]
fn obc_lambda2_value() {
    // q = 2, n = 20: 8/25 + (8/25) cos(π/20)
    let l2 = obc_lambda2(20, &Rates::from_q(2).unwrap(), P).unwrap().to_f64();
    let expect = 0.32 + 0.32 * (std::f64::consts::PI / 20.0).cos();
    assert!((l2 - expect).abs() < 1e-15);
    assert!((l2 - 0.636_060_6).abs() < 1e-6);
}

#[test]
fn defective_when_a_rate_vanishes() {
    let r = Rates::new(Scalar::ratio(1, 2), Scalar::zero(), Scalar::ratio(1, 2)).unwrap();
    assert!(matches!(
        obc_eigensystem(5, &r, P),
        Err(crate::Error::DefectiveCase)
    ));
}

#[test]
fn extension_to_full_obc_matrix() {
    let n = 9;
    let a = build_obc(&ModelParams::qudit(Boundary::Obc, n, 2).unwrap()).unwrap();
    let eig = obc_eigensystem(n, &Rates::from_q(2).unwrap(), P).unwrap();
    let ext = extend_to_a(&eig, &a).unwrap();
    assert_eq!(ext.len(), n);
    assert_eq!(ext.source, EigenSource::Extended);
    assert!(ext.max_residual(&a).unwrap() < 1e-30);
    assert!(ext.max_biorthogonality_defect().unwrap() < 1e-30);
    assert!((ext.eigenvalues.last().unwrap().to_c64() - c(1.0, 0.0)).norm() < 1e-30);
}

#[test]
fn extension_rejects_other_matrices() {
    let rates = Rates::from_q(2).unwrap();
    let t = build_toeplitz(4, &rates).unwrap();
    let eig = obc_eigensystem(5, &rates, P).unwrap();
    assert!(extend_to_a(&eig, &t).is_err());
}

#[test]
fn pbc_eigenvalues_match_trace_moments() {
    // the transient block is highly degenerate and non-normal, so a dense eigen-solver is
    // unreliable; compare power sums with traces of matrix powers instead
    for (n, q) in [(4usize, 2u32), (5, 2), (5, 3), (7, 2)] {
        let a = build_pbc(&ModelParams::qudit(Boundary::Pbc, n, q).unwrap()).unwrap();
        let idx: Vec<usize> = (0..n * (n - 1)).collect();
        let m = real_dense(&a, &idx);
        let ours: Vec<f64> = pbc_eigenvalues(n, q, P)
            .unwrap()
            .eigenvalues
            .iter()
            .map(|z| z.to_c64().re)
            .collect();
        assert_eq!(ours.len(), idx.len());
        let mut pow = DMatrix::<f64>::identity(idx.len(), idx.len());
        for k in 1..=6 {
            pow = &pow * &m;
            let tr = pow.trace();
            let sum: f64 = ours.iter().map(|x| x.powi(k)).sum();
            assert!((tr - sum).abs() < 1e-12 * tr.abs().max(1e-3), "n={n} q={q} k={k}: {tr} vs {sum}");
        }
    }
}

#[test]
fn pbc_eigenvalues_are_singular_shifts() {
    let (n, q) = (5usize, 2u32);
    let a = build_pbc(&ModelParams::qudit(Boundary::Pbc, n, q).unwrap()).unwrap();
    let direct = PseudoOperator::pbc_direct(&a).unwrap();
    let PseudoOperator::Banded(b) = &direct else {
        panic!("expected a band operator")
    };
    let rows = b.to_dense();
    for z in pbc_eigenvalues(n, q, P).unwrap().eigenvalues {
        assert!(dense_sigma_min(&rows, z.to_c64()) < 1e-6, "{}", z.to_c64());
    }
}

#[test]
fn pbc_eigenvectors_are_eigenvectors() {
    for (n, q) in [(4usize, 2u32), (6, 2), (5, 3)] {
        let a = build_pbc(&ModelParams::qudit(Boundary::Pbc, n, q).unwrap()).unwrap();
        let eig = pbc_eigensystem(n, q, P).unwrap();
        assert!(eig.max_residual(&a).unwrap() < 1e-30, "n={n} q={q}");
    }
}

#[test]
fn pbc_lambda2_value() {
    let n = 10;
    let l2 = pbc_lambda2(n, 2, P).unwrap().to_f64();
    let d = 0.32f64;
    let expect = d * d * (1.0 + (std::f64::consts::PI / n as f64).cos()).powi(2);
    assert!((l2 - expect).abs() < 1e-15);
}

#[test]
fn pbc_extension_is_consistent() {
    let (n, q) = (4usize, 2u32);
    let a = build_pbc(&ModelParams::qudit(Boundary::Pbc, n, q).unwrap()).unwrap();
    let ext = extend_to_a(&pbc_eigensystem(n, q, P).unwrap(), &a).unwrap();
    assert!(ext.max_residual(&a).unwrap() < 1e-30);
}

fn dense_sigma_min(rows: &[Vec<Complex64>], z: Complex64) -> f64 {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            z - rows[i][j]
        } else {
            -rows[i][j]
        }
    });
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn sigma_min_matches_dense_svd() {
    let n = 16;
    let a = build_obc(&ModelParams::qudit(Boundary::Obc, n, 2).unwrap()).unwrap();
    let op = PseudoOperator::transient(&a).unwrap();
    let PseudoOperator::Banded(b) = &op else {
        panic!("expected a band operator")
    };
    let rows = b.to_dense();
    for z in [c(0.32, 0.0), c(0.5, 0.2), c(-0.1, 0.4), c(1.0, 0.0), c(0.3, -0.6)] {
        let ours = op.sigma_min(z, SigmaMinOptions::default()).unwrap();
        let oracle = dense_sigma_min(&rows, z);
        assert!((ours - oracle).abs() <= 1e-8 * oracle.max(1e-12), "z={z}: {ours} vs {oracle}");
    }
}

#[test]
fn fourier_reduction_matches_direct_operator() {
    let n = 5;
    let a = build_pbc(&ModelParams::qudit(Boundary::Pbc, n, 2).unwrap()).unwrap();
    let blocks = PseudoOperator::transient(&a).unwrap();
    let direct = PseudoOperator::pbc_direct(&a).unwrap();
    for z in [c(0.1, 0.05), c(0.4, 0.3), c(-0.05, -0.2)] {
        let s1 = blocks.sigma_min(z, SigmaMinOptions::default()).unwrap();
        let s2 = direct.sigma_min(z, SigmaMinOptions::default()).unwrap();
        assert!((s1 - s2).abs() <= 1e-8 * s2, "z={z}: {s1} vs {s2}");
    }
}

#[test]
fn grid_geometry() {
    let g = GridRegion::default();
    assert_eq!(g.len(), 201 * 201);
    assert_eq!(g.point(0), c(-0.2, -0.8));
    let last = g.point(g.len() - 1);
    assert!((last - c(1.2, 0.8)).norm() < 1e-15);
    let mid = g.point(100 * 201 + 100);
    assert!((mid - c(0.5, 0.0)).norm() < 1e-15);
}

#[test]
fn obc_grid_flags_spectrum_and_stays_inside_ellipse() {
    let n = 40;
    let a = build_obc(&ModelParams::qudit(Boundary::Obc, n, 2).unwrap()).unwrap();
    let op = PseudoOperator::transient(&a).unwrap();
    let region = GridRegion::default().with_resolution(41, 41);
    let field = pseudospectrum_grid(&op, 1e-4, region).unwrap();
    assert!(field.failures.is_empty());
    // the grid point nearest δ is deep inside the pseudospectrum of the non-normal block
    let centre = (0..region.len())
        .min_by(|&i, &j| {
            let d = |k: usize| (region.point(k) - c(0.32, 0.0)).norm();
            d(i).partial_cmp(&d(j)).unwrap()
        })
        .unwrap();
    assert!(field.in_set[centre]);
    for z in field.flagged_points() {
        assert!(ellipse_distance(0.32, 0.68, 0.60, z) < 0.05, "{z}");
    }
    // far corner is outside
    assert!(!field.in_set[0]);
}

#[test]
fn grid_is_deterministic() {
    let a = build_obc(&ModelParams::qudit(Boundary::Obc, 10, 2).unwrap()).unwrap();
    let op = PseudoOperator::transient(&a).unwrap();
    let r = GridRegion::default().with_resolution(9, 7);
    let f1 = pseudospectrum_grid(&op, 1e-2, r).unwrap();
    let f2 = pseudospectrum_grid(&op, 1e-2, r).unwrap();
    assert_eq!(f1, f2);
}

#[test]
fn grid_rejects_bad_input() {
    let a = build_obc(&ModelParams::qudit(Boundary::Obc, 6, 2).unwrap()).unwrap();
    let op = PseudoOperator::transient(&a).unwrap();
    assert!(pseudospectrum_grid(&op, 0.0, GridRegion::default()).is_err());
    assert!(pseudospectrum_grid(&op, 1e-3, GridRegion::default().with_resolution(1, 5)).is_err());
}

#[test]
fn obc_curve_real_max_is_exact() {
    let rates = Rates::from_q(2).unwrap();
    let curve = obc_pseudo_curve(&rates, None, 64).unwrap();
    assert_eq!(curve.real_max, Scalar::one());
    assert_eq!(curve.points.len(), 65);
    assert!((curve.points[0] - c(1.0, 0.0)).norm() < 1e-15);
    // rescaled: δ + σ/μ + τμ
    let mu = Scalar::from(4);
    let curve = obc_pseudo_curve(&rates, Some(&mu), 64).unwrap();
    assert_eq!(curve.real_max, Scalar::ratio(8, 25) + Scalar::ratio(4, 25) + Scalar::ratio(4, 25));
    assert!(obc_pseudo_curve(&rates, Some(&Scalar::zero()), 64).is_err());
}

#[test]
fn ellipse_distance_cases() {
    assert_eq!(ellipse_distance(0.0, 2.0, 1.0, c(0.5, 0.5)), 0.0);
    assert!((ellipse_distance(0.0, 2.0, 1.0, c(3.0, 0.0)) - 1.0).abs() < 1e-12);
    assert!((ellipse_distance(0.0, 2.0, 1.0, c(0.0, -3.0)) - 2.0).abs() < 1e-12);
    // degenerate ellipse is a segment
    assert!((ellipse_distance(0.0, 1.0, 0.0, c(0.5, 0.3)) - 0.3).abs() < 1e-12);
}

#[test]
fn pbc_conjecture_at_zero_momentum_and_angle() {
    let z = pbc_pseudo_conjecture(2, &Scalar::zero(), &Scalar::zero(), P).unwrap();
    let w = z.to_c64();
    assert!((w - c(1.0, 0.0)).norm() < 1e-30);
    for q in [3u32, 5] {
        let z = pbc_pseudo_conjecture(q, &Scalar::zero(), &Scalar::zero(), P)
            .unwrap()
            .to_c64();
        assert!((z - c(1.0, 0.0)).norm() < 1e-15, "q={q}");
    }
    assert!(pbc_pseudo_conjecture(2, &Scalar::ratio(3, 2), &Scalar::zero(), P).is_err());
    assert!(pbc_pseudo_conjecture(1, &Scalar::zero(), &Scalar::zero(), P).is_err());
}

#[test]
fn conjecture_region_contains_curve_points() {
    let region = ConjectureRegion::new(2, 32, 128).unwrap();
    assert!((region.real_max() - 1.0).abs() < 1e-12);
    assert_eq!(region.distance(c(0.0, 0.0)), 0.0);
    assert!(region.distance(c(2.0, 0.0)) > 0.9);
    let z = pbc_pseudo_conjecture(2, &Scalar::ratio(1, 4), &Scalar::ratio(1, 3), P)
        .unwrap()
        .to_c64();
    assert!(region.distance(z) < 1e-2);
}
