//! Primal-dual consensus backbones.
//!
//! The iteration `X' = A (C X - alpha S) - B Y`, `Y' = Y + B X'` is
//! parameterized by three polynomials of the mixing matrix `W`:
//!
//! * exact diffusion: `A = C = W`, `B = (I - W^2)^{1/2}`
//! * one-step dual correction: `A = C = (I + W)/2`, `B = ((I - W)/2)^{1/2}`
//! * adapt-then-combine tracking: `A = C = W`, `B = I - W`
//!
//! All three commute with `W`, keep `A` and `C` doubly stochastic, and give
//! `B` the consensus direction as exact null space, which is what makes the
//! dual term vanish on averages.
//!
//! Stability of the disagreement dynamics reduces per non-unit eigenmode
//! `w` of `W` to the 2x2 block `[[a c - b2, -1], [b2, 1]]` built from the
//! mode's eigenvalues of `A`, `C`, and `B^2`. The largest spectral radius
//! over modes, `gamma_hat`, must stay below 1. It is computed numerically
//! from the constructed matrices rather than from per-family closed forms;
//! measured values (e.g. `gamma_hat = lambda` for exact diffusion on a
//! ring) are what the report command prints.

use crate::decomp::{psd_sqrt, reduced_svd, sym_eig};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{fl, Scalar};
use crate::tol;
use crate::topology::MixingMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackboneKind {
    /// Exact diffusion / D2.
    ExactDiffusion,
    /// EXTRA-style one-step correction.
    Extra,
    /// Gradient-tracking (adapt-then-combine) form.
    AtcTracking,
}

/// Constructed backbone matrices for one mixing matrix.
#[derive(Debug, Clone)]
pub struct SudaBackbone<T> {
    pub kind: BackboneKind,
    pub a: Matrix<T>,
    pub c: Matrix<T>,
    pub b: Matrix<T>,
    /// `B * B` as actually computed; the disagreement analysis uses this
    /// product, not a symbolic target.
    pub b_sq: Matrix<T>,
}

/// Per-eigenmode stability data.
#[derive(Debug, Clone, Copy)]
pub struct DeviationMode<T> {
    /// Eigenvalue of `W` for this mode.
    pub w: T,
    /// Rayleigh quotients of `A`, `C`, `B^2` on the mode.
    pub a: T,
    pub c: T,
    pub b_sq: T,
    /// Spectral radius of the mode's 2x2 deviation block.
    pub radius: T,
}

/// Spectrum of the disagreement dynamics: one entry per non-unit mode.
#[derive(Debug, Clone)]
pub struct DeviationSpectrum<T> {
    pub modes: Vec<DeviationMode<T>>,
    /// `max` of the mode radii; 0 when there are no non-unit modes.
    pub gamma_hat: T,
}

pub fn build_backbone<T: Scalar>(
    kind: BackboneKind,
    mixing: &MixingMatrix<T>,
) -> Result<SudaBackbone<T>> {
    let w = mixing.matrix();
    let n = w.rows();
    let id = Matrix::<T>::identity(n);
    let half = fl::<T>(0.5);

    let (a, c, b) = match kind {
        BackboneKind::ExactDiffusion => {
            let target = id.sub(&w.matmul(w)?)?;
            (w.clone(), w.clone(), psd_sqrt(&target)?)
        }
        BackboneKind::Extra => {
            let avg = Matrix::from_fn(n, n, |i, j| {
                half * (w.get(i, j) + if i == j { T::one() } else { T::zero() })
            });
            let target = Matrix::from_fn(n, n, |i, j| {
                half * ((if i == j { T::one() } else { T::zero() }) - w.get(i, j))
            });
            (avg.clone(), avg, psd_sqrt(&target)?)
        }
        BackboneKind::AtcTracking => {
            let b = id.sub(w)?;
            (w.clone(), w.clone(), b)
        }
    };
    let b_sq = b.matmul(&b)?;
    let bk = SudaBackbone { kind, a, c, b, b_sq };
    validate_backbone(&bk, mixing)?;
    Ok(bk)
}

/// Structural checks shared by every family: `A`, `C` doubly stochastic;
/// `B 1 = 0` with the rest of `B`'s spectrum bounded away from zero;
/// `A`, `C`, `B^2` commute with `W`.
fn validate_backbone<T: Scalar>(bk: &SudaBackbone<T>, mixing: &MixingMatrix<T>) -> Result<()> {
    let w = mixing.matrix();
    let n = w.rows();
    let stoch = fl::<T>(tol::STOCHASTIC);
    for (name, m) in [("A", &bk.a), ("C", &bk.c)] {
        for i in 0..n {
            let mut row = T::zero();
            let mut col = T::zero();
            for j in 0..n {
                row += m.get(i, j);
                col += m.get(j, i);
            }
            if (row - T::one()).abs() > stoch || (col - T::one()).abs() > stoch {
                return Err(Error::InvalidConfig(format!(
                    "backbone factor {name} is not doubly stochastic"
                )));
            }
        }
    }

    let ones = Matrix::from_fn(n, 1, |_, _| T::one());
    let b_ones = bk.b.matmul(&ones)?;
    if b_ones.frobenius_norm() > fl::<T>(tol::CONSENSUS_NULL) {
        return Err(Error::InvalidConfig(
            "dual factor B does not annihilate consensus".into(),
        ));
    }
    if n > 1 {
        let svd = reduced_svd(&bk.b, None)?;
        let nonzero = svd.singular_values.len();
        if nonzero + 1 < n {
            return Err(Error::InvalidConfig(
                "dual factor B has extra null directions".into(),
            ));
        }
        if let Some(&smallest) = svd.singular_values.last() {
            if nonzero == n - 1 && smallest <= fl::<T>(tol::B_SECOND_SV_MIN) {
                return Err(Error::InvalidConfig(
                    "dual factor B is nearly singular off consensus".into(),
                ));
            }
        }
    }

    let budget = fl::<T>(tol::COMMUTE);
    for (name, m) in [("A", &bk.a), ("C", &bk.c), ("B^2", &bk.b_sq)] {
        let mw = m.matmul(w)?;
        let wm = w.matmul(m)?;
        if mw.distance(&wm)? > budget {
            return Err(Error::InvalidConfig(format!(
                "backbone factor {name} does not commute with W"
            )));
        }
    }
    Ok(())
}

/// Numerical spectrum of the per-mode deviation blocks.
///
/// Eigenvectors of `W` diagonalize `A`, `C`, `B^2` simultaneously (they
/// commute), so each non-unit mode contributes the block
/// `[[a c - b2, -1], [b2, 1]]` whose radius follows from its trace and
/// determinant.
#[allow(clippy::needless_range_loop)] // eigenvalue and eigenvector column walk together
pub fn deviation_spectrum<T: Scalar>(
    bk: &SudaBackbone<T>,
    mixing: &MixingMatrix<T>,
) -> Result<DeviationSpectrum<T>> {
    let (eigenvalues, q) = sym_eig(mixing.matrix())?;
    let n = eigenvalues.len();
    // Perron mode: the leading eigenvalue (1 for a valid mixing matrix).
    let mut modes = Vec::with_capacity(n.saturating_sub(1));
    let mut gamma_hat = T::zero();
    for idx in 1..n {
        let w_mode = eigenvalues[idx];
        let qcol = Matrix::from_fn(n, 1, |i, _| q.get(i, idx));
        let ray = |m: &Matrix<T>| -> Result<T> {
            qcol.inner_product(&m.matmul(&qcol)?)
        };
        let a = ray(&bk.a)?;
        let c = ray(&bk.c)?;
        let b_sq = ray(&bk.b_sq)?;
        let radius = block_radius(a, c, b_sq);
        gamma_hat = gamma_hat.max(radius);
        modes.push(DeviationMode {
            w: w_mode,
            a,
            c,
            b_sq,
            radius,
        });
    }
    Ok(DeviationSpectrum { modes, gamma_hat })
}

/// Spectral radius of `[[a c - b2, -1], [b2, 1]]` from trace/determinant:
/// real roots `(tr +- sqrt(disc)) / 2`, complex pair modulus `sqrt(det)`.
fn block_radius<T: Scalar>(a: T, c: T, b_sq: T) -> T {
    let two = fl::<T>(2.0);
    let four = fl::<T>(4.0);
    let tr = a * c - b_sq + T::one();
    let det = a * c;
    let disc = tr * tr - four * det;
    if disc >= T::zero() {
        let root = disc.sqrt();
        ((tr + root) / two).abs().max(((tr - root) / two).abs())
    } else {
        det.max(T::zero()).sqrt()
    }
}
