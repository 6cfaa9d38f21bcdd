//! Randomized checks of the matrix-sign lemmas the step analysis rests on:
//! the alignment identity `<H, msgn(H)> = nuclear(H)`, unit operator norm,
//! `sqrt(rank)` Frobenius norm, the perturbed descent pairing
//! `<G, msgn(H)> >= nuclear(G) - 2 nuclear(G - H)`, positive-scale
//! invariance, and the banded behavior of the quintic Newton-Schulz
//! approximation.

use polarmix::decomp::{norms, reduced_svd};
use polarmix::matrix::Matrix;
use polarmix::polar::{msgn_exact, msgn_newton_schulz, NS_DEFAULT_ITERS};
use polarmix::rng::{RngStream, StreamDomain};

fn random_matrix(seed: u64, rows: usize, cols: usize) -> Matrix<f64> {
    let rng = RngStream::new(seed);
    let mut stream = rng.at(StreamDomain::ProblemData, 0, 0);
    Matrix::from_fn(rows, cols, |_, _| stream.next_gaussian())
}

/// `U diag(sv) V^T` with orthonormal factors harvested from the SVD of a
/// random matrix, giving full control over the spectrum.
fn with_spectrum(seed: u64, rows: usize, cols: usize, sv: &[f64]) -> Matrix<f64> {
    assert!(sv.len() <= rows.min(cols));
    let probe = random_matrix(seed, rows, cols);
    let f = reduced_svd(&probe, None).unwrap();
    Matrix::from_fn(rows, cols, |i, j| {
        sv.iter()
            .enumerate()
            .map(|(k, &s)| s * f.u.get(i, k) * f.v.get(j, k))
            .sum()
    })
}

const SHAPES: [(usize, usize); 8] = [
    (2, 2),
    (3, 2),
    (2, 3),
    (4, 4),
    (5, 3),
    (3, 5),
    (6, 4),
    (5, 5),
];

#[test]
fn alignment_identity_and_norms() {
    for seed in 0..1000u64 {
        let (rows, cols) = SHAPES[(seed as usize) % SHAPES.len()];
        let h = random_matrix(seed, rows, cols);
        let s = msgn_exact(&h, None).unwrap();
        let nuc = norms(&h).unwrap().nuclear;

        let inner = h.inner_product(&s).unwrap();
        assert!(
            (inner - nuc).abs() <= 1e-10 * (1.0 + nuc),
            "seed {seed}: <H, msgn(H)> = {inner} vs nuclear {nuc}"
        );

        let sn = norms(&s).unwrap();
        assert!((sn.operator - 1.0).abs() <= 1e-10, "seed {seed}: op {}", sn.operator);
        let rank = reduced_svd(&h, None).unwrap().rank() as f64;
        assert!(
            (sn.frobenius - rank.sqrt()).abs() <= 1e-10 * rank.sqrt(),
            "seed {seed}: fro {} vs sqrt(rank) {}",
            sn.frobenius,
            rank.sqrt()
        );
    }
}

#[test]
fn descent_pairing_survives_perturbation() {
    // <G, msgn(H)> >= nuclear(G) - 2 nuclear(G - H): polarizing a stale or
    // inexact direction still pays out most of the nuclear norm.
    const DELTAS: [f64; 4] = [0.01, 0.5, 2.0, 25.0];
    for seed in 0..1000u64 {
        let (rows, cols) = SHAPES[(seed as usize) % SHAPES.len()];
        let g = random_matrix(seed, rows, cols);
        let delta = DELTAS[(seed as usize / SHAPES.len()) % DELTAS.len()];
        let h = g.add(&random_matrix(seed + 50_000, rows, cols).scale(delta)).unwrap();
        let s = msgn_exact(&h, None).unwrap();

        let lhs = g.inner_product(&s).unwrap();
        let g_nuc = norms(&g).unwrap().nuclear;
        let gap = norms(&g.sub(&h).unwrap()).unwrap().nuclear;
        assert!(
            lhs >= g_nuc - 2.0 * gap - 1e-9 * (1.0 + g_nuc),
            "seed {seed}: {lhs} < {g_nuc} - 2 * {gap}"
        );
    }
}

#[test]
fn positive_scaling_leaves_msgn_fixed() {
    const SCALES: [f64; 4] = [1e-6, 0.5, 3.0, 1e6];
    for seed in 0..250u64 {
        let (rows, cols) = SHAPES[(seed as usize) % SHAPES.len()];
        let h = random_matrix(seed, rows, cols);
        let s = msgn_exact(&h, None).unwrap();
        for c in SCALES {
            let sc = msgn_exact(&h.scale(c), None).unwrap();
            assert!(sc.distance(&s).unwrap() <= 1e-9, "seed {seed}, scale {c}");
        }
        let neg = msgn_exact(&h.scale(-1.0), None).unwrap();
        assert!(neg.add(&s).unwrap().frobenius_norm() <= 1e-9, "seed {seed}");
    }
}

#[test]
fn rank_deficient_inputs_polarize_on_their_range() {
    for seed in 0..200u64 {
        // Rank one: msgn is the unit outer product, Frobenius norm 1.
        let u = random_matrix(seed * 3 + 1, 5, 1);
        let v = random_matrix(seed * 3 + 2, 4, 1);
        let outer = Matrix::from_fn(5, 4, |i, j| u.get(i, 0) * v.get(j, 0));
        let s1 = msgn_exact(&outer, None).unwrap();
        assert!((norms(&s1).unwrap().frobenius - 1.0).abs() <= 1e-8, "seed {seed}");
        let expect = outer.scale(1.0 / (u.frobenius_norm() * v.frobenius_norm()));
        assert!(s1.distance(&expect).unwrap() <= 1e-8, "seed {seed}");

        // Rank two via a thin product: Frobenius norm sqrt(2), operator 1.
        let left = random_matrix(seed * 3 + 3, 5, 2);
        let right = random_matrix(seed * 3 + 4, 2, 4);
        let prod = left.matmul(&right).unwrap();
        let s2 = msgn_exact(&prod, None).unwrap();
        let n2 = norms(&s2).unwrap();
        assert!((n2.frobenius - 2.0_f64.sqrt()).abs() <= 1e-6, "seed {seed}");
        assert!((n2.operator - 1.0).abs() <= 1e-8, "seed {seed}");
        let inner = prod.inner_product(&s2).unwrap();
        let nuc = norms(&prod).unwrap().nuclear;
        assert!((inner - nuc).abs() <= 1e-9 * (1.0 + nuc), "seed {seed}");
    }
}

#[test]
fn zero_matrix_polarizes_to_zero() {
    let z = Matrix::<f64>::zeros(3, 4);
    assert_eq!(msgn_exact(&z, None).unwrap(), z);
}

#[test]
fn newton_schulz_stays_in_band_and_keeps_direction() {
    // With the pinned quintic coefficients the singular values do not
    // converge to 1; they land in an oscillation band. What the iteration
    // does guarantee, for spectra bounded away from zero, is (a) all
    // singular values of the output in a fixed band, (b) the exact polar
    // factor of the output matching the exact polar factor of the input,
    // and (c) most of the nuclear norm paid out by the pairing.
    for seed in 0..200u64 {
        let n = 2 + (seed as usize) % 3;
        let scale = 10f64.powi((seed as i32 % 5) - 2);
        let rng = RngStream::new(seed ^ 0xabcd);
        let mut stream = rng.at(StreamDomain::ProblemData, 1, 1);
        let sv: Vec<f64> = (0..n)
            .map(|_| scale * (0.3 + 0.7 * stream.next_uniform()))
            .collect();
        let h = with_spectrum(seed, n + 1, n, &sv);

        let approx = msgn_newton_schulz(&h, NS_DEFAULT_ITERS).unwrap();
        let spectrum = reduced_svd(&approx, None).unwrap().singular_values;
        assert_eq!(spectrum.len(), n, "seed {seed}");
        for &s in &spectrum {
            assert!((0.55..=1.35).contains(&s), "seed {seed}: band escape {s}");
        }

        let exact = msgn_exact(&h, None).unwrap();
        let realigned = msgn_exact(&approx, None).unwrap();
        assert!(
            realigned.distance(&exact).unwrap() <= 1e-8,
            "seed {seed}: direction drift"
        );

        let inner = h.inner_product(&approx).unwrap();
        let nuc = norms(&h).unwrap().nuclear;
        assert!(inner >= 0.55 * nuc, "seed {seed}: pairing {inner} vs {nuc}");
    }
}
