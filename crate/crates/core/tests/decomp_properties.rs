//! Randomized properties of the factorization stack: orthonormal factors,
//! faithful reconstruction, the operator / Frobenius / nuclear norm chain,
//! and the PSD square root. Inputs are generated from the library's own
//! counter-based streams so every failure replays from its seed.

use polarmix::decomp::{norms, psd_sqrt, reduced_svd, sym_eig};
use polarmix::matrix::Matrix;
use polarmix::rng::{RngStream, StreamDomain};
use polarmix::tol;
use proptest::prelude::*;

fn random_matrix(seed: u64, rows: usize, cols: usize) -> Matrix<f64> {
    let rng = RngStream::new(seed);
    let mut stream = rng.at(StreamDomain::ProblemData, 0, 0);
    Matrix::from_fn(rows, cols, |_, _| stream.next_gaussian())
}

/// Worst entry of `U^T U - I`.
fn gram_defect(u: &Matrix<f64>) -> f64 {
    let g = u.transpose().matmul(u).unwrap();
    let mut worst = 0.0_f64;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g.get(i, j) - target).abs());
        }
    }
    worst
}

const SHAPES: [(usize, usize); 12] = [
    (1, 1),
    (2, 2),
    (3, 2),
    (2, 3),
    (4, 4),
    (5, 3),
    (3, 5),
    (6, 6),
    (1, 4),
    (4, 1),
    (6, 2),
    (5, 5),
];

#[test]
fn svd_factors_are_orthonormal_and_reconstruct() {
    for seed in 0..1000u64 {
        let (rows, cols) = SHAPES[(seed as usize) % SHAPES.len()];
        let m = random_matrix(seed, rows, cols);
        let svd = reduced_svd(&m, None).unwrap();

        let mut prev = f64::INFINITY;
        for &s in &svd.singular_values {
            assert!(s > 0.0, "seed {seed}: nonpositive singular value {s}");
            assert!(s <= prev, "seed {seed}: singular values not sorted");
            prev = s;
        }
        assert!(gram_defect(&svd.u) <= tol::ORTHO, "seed {seed}: U");
        assert!(gram_defect(&svd.v) <= tol::ORTHO, "seed {seed}: V");

        let err = svd.reconstruct().distance(&m).unwrap();
        let budget = tol::ORTHO * (1.0 + m.frobenius_norm());
        assert!(err <= budget, "seed {seed}: reconstruction {err}");
    }
}

#[test]
fn norm_chain_operator_frobenius_nuclear() {
    for seed in 1000..2000u64 {
        let (rows, cols) = SHAPES[(seed as usize) % SHAPES.len()];
        let m = random_matrix(seed, rows, cols);
        let ns = norms(&m).unwrap();
        let rank = reduced_svd(&m, None).unwrap().rank();
        let slack = 1e-12 * (1.0 + ns.nuclear);
        assert!(ns.operator <= ns.frobenius + slack, "seed {seed}");
        assert!(ns.frobenius <= ns.nuclear + slack, "seed {seed}");
        assert!(
            ns.nuclear <= (rank as f64).sqrt() * ns.frobenius + slack,
            "seed {seed}: nuclear {} vs sqrt(r) fro {}",
            ns.nuclear,
            (rank as f64).sqrt() * ns.frobenius,
        );
    }
}

#[test]
fn rank_one_products_have_one_singular_value() {
    for seed in 0..200u64 {
        let u = random_matrix(seed * 2 + 1, 5, 1);
        let v = random_matrix(seed * 2 + 2, 4, 1);
        let outer = Matrix::from_fn(5, 4, |i, j| u.get(i, 0) * v.get(j, 0));
        let svd = reduced_svd(&outer, None).unwrap();
        assert_eq!(svd.rank(), 1, "seed {seed}");
        let expect = u.frobenius_norm() * v.frobenius_norm();
        assert!(
            (svd.singular_values[0] - expect).abs() <= 1e-12 * (1.0 + expect),
            "seed {seed}"
        );
    }
}

#[test]
fn symmetric_eigendecomposition_reconstructs() {
    for seed in 0..1000u64 {
        let n = 2 + (seed as usize) % 5;
        let a = random_matrix(seed.wrapping_add(77), n, n);
        let s = Matrix::from_fn(n, n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)));
        let (e, q) = sym_eig(&s).unwrap();

        for w in e.windows(2) {
            assert!(w[0] >= w[1], "seed {seed}: eigenvalues not sorted");
        }
        assert!(gram_defect(&q) <= tol::ORTHO, "seed {seed}: Q");

        let rebuilt = Matrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| e[k] * q.get(i, k) * q.get(j, k)).sum()
        });
        let err = rebuilt.distance(&s).unwrap();
        assert!(err <= tol::ORTHO * (1.0 + s.frobenius_norm()), "seed {seed}: {err}");

        let trace: f64 = (0..n).map(|i| s.get(i, i)).sum();
        let esum: f64 = e.iter().sum();
        assert!((trace - esum).abs() <= 1e-10 * (1.0 + trace.abs()), "seed {seed}");
    }
}

#[test]
fn psd_sqrt_squares_back() {
    for seed in 0..300u64 {
        let n = 2 + (seed as usize) % 4;
        let a = random_matrix(seed.wrapping_add(31), n, n);
        let s = a.matmul(&a.transpose()).unwrap();
        let b = psd_sqrt(&s).unwrap();
        assert_eq!(b, b.transpose(), "seed {seed}: root not symmetric");
        let err = b.matmul(&b).unwrap().distance(&s).unwrap();
        assert!(
            err <= tol::PSD_SQRT_RESID * (1.0 + s.frobenius_norm()),
            "seed {seed}: {err}"
        );
    }
}

#[test]
fn indefinite_input_is_rejected_by_psd_sqrt() {
    let s = Matrix::<f64>::diag(&[2.0, -0.5]);
    assert!(psd_sqrt(&s).is_err());
}

proptest! {
    #[test]
    fn singular_values_survive_transposition(seed in 0u64..5000) {
        let m = random_matrix(seed, 4, 3);
        let a = reduced_svd(&m, None).unwrap();
        let b = reduced_svd(&m.transpose(), None).unwrap();
        prop_assert_eq!(a.rank(), b.rank());
        for (x, y) in a.singular_values.iter().zip(&b.singular_values) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x));
        }
    }

    #[test]
    fn singular_values_scale_linearly(seed in 0u64..5000, c in -8.0f64..8.0) {
        prop_assume!(c.abs() > 1e-3);
        let m = random_matrix(seed, 3, 4);
        let base = reduced_svd(&m, None).unwrap();
        let scaled = reduced_svd(&m.scale(c), None).unwrap();
        prop_assert_eq!(base.rank(), scaled.rank());
        for (x, y) in base.singular_values.iter().zip(&scaled.singular_values) {
            prop_assert!((c.abs() * x - y).abs() <= 1e-9 * (1.0 + y));
        }
    }

    #[test]
    fn nuclear_norm_satisfies_triangle_inequality(sa in 0u64..3000, sb in 3000u64..6000) {
        let a = random_matrix(sa, 4, 4);
        let b = random_matrix(sb, 4, 4);
        let joint = norms(&a.add(&b).unwrap()).unwrap().nuclear;
        let split = norms(&a).unwrap().nuclear + norms(&b).unwrap().nuclear;
        prop_assert!(joint <= split + 1e-9 * (1.0 + split));
    }
}
