//! Dense factorizations: reduced SVD, symmetric eigendecomposition, and the
//! PSD square root built on it.
//!
//! Shapes stay small (both dimensions at most a few dozen), so both
//! factorizations use Jacobi iterations: slower than blocked LAPACK-style
//! algorithms but simple, dependency-free, and accurate to near machine
//! precision, which the polar-factor identities downstream rely on.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{fl, Scalar};
use crate::tol;

/// Reduced singular value decomposition `M = U diag(s) V^T` with `U` of
/// shape `m x r`, `V` of shape `n x r`, and `s` strictly positive in
/// descending order. `r` is the numerical rank.
#[derive(Debug, Clone)]
pub struct SvdResult<T> {
    pub u: Matrix<T>,
    pub singular_values: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> SvdResult<T> {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U diag(s) V^T`; the zero matrix of the original shape when rank 0.
    pub fn reconstruct(&self) -> Matrix<T> {
        let r = self.rank();
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = Matrix::zeros(m, n);
        for k in 0..r {
            let s = self.singular_values[k];
            for i in 0..m {
                let us = self.u.get(i, k) * s;
                for j in 0..n {
                    let v = out.get(i, j) + us * self.v.get(j, k);
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

/// Rotation threshold for both Jacobi loops: pairs closer than this
/// (relative to their own scale) are treated as already converged.
fn jacobi_eps<T: Scalar>() -> T {
    let eps10 = T::epsilon() * fl(10.0);
    eps10.max(fl(1e-15))
}

/// Reduced SVD by one-sided Jacobi.
///
/// The rotation sweep runs on whichever side gives the fewer columns, i.e.
/// on `M` when `m >= n` and on `M^T` otherwise, so the Gram updates stay on
/// the smaller dimension. `rank_rel` is the relative cutoff factor: singular
/// values at or below `rank_rel * s_max` are dropped. `None` selects the
/// default `RANK_REL * max(m, n)`.
#[allow(clippy::needless_range_loop)] // paired column access mirrors the rotations
pub fn reduced_svd<T: Scalar>(m: &Matrix<T>, rank_rel: Option<T>) -> Result<SvdResult<T>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::InvalidInput("svd of empty matrix".into()));
    }
    if !m.is_all_finite() {
        return Err(Error::InvalidInput("svd of non-finite matrix".into()));
    }
    let rel = match rank_rel {
        Some(r) => {
            if r < T::zero() || !r.is_finite() {
                return Err(Error::InvalidInput("rank cutoff must be >= 0".into()));
            }
            r
        }
        None => fl::<T>(tol::RANK_REL) * fl(m.rows().max(m.cols()) as f64),
    };

    let transposed = m.rows() < m.cols();
    let work = if transposed { m.transpose() } else { m.clone() };
    let (a, b) = (work.rows(), work.cols());

    // Column-major working copies: `cols` is rotated toward mutual
    // orthogonality, `vcols` accumulates the same rotations from identity.
    let mut cols: Vec<Vec<T>> = (0..b).map(|j| work.column_vec(j)).collect();
    let mut vcols: Vec<Vec<T>> = (0..b)
        .map(|j| {
            let mut e = vec![T::zero(); b];
            e[j] = T::one();
            e
        })
        .collect();

    let eps = jacobi_eps::<T>();
    for _ in 0..tol::JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..b {
            for q in (p + 1)..b {
                let mut app = T::zero();
                let mut aqq = T::zero();
                let mut apq = T::zero();
                for i in 0..a {
                    let x = cols[p][i];
                    let y = cols[q][i];
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                if apq.abs() <= eps * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (fl::<T>(2.0) * apq);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..a {
                    let x = cols[p][i];
                    let y = cols[q][i];
                    cols[p][i] = c * x - s * y;
                    cols[q][i] = s * x + c * y;
                }
                for i in 0..b {
                    let x = vcols[p][i];
                    let y = vcols[q][i];
                    vcols[p][i] = c * x - s * y;
                    vcols[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(T, usize)> = cols
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let mut acc = T::zero();
            for &v in col {
                acc += v * v;
            }
            (acc.sqrt(), j)
        })
        .collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());

    let s_max = order.first().map(|&(s, _)| s).unwrap_or_else(T::zero);
    let cutoff = rel * s_max;
    let kept: Vec<(T, usize)> = order.into_iter().filter(|&(s, _)| s > cutoff).collect();
    let r = kept.len();

    let mut left = Matrix::zeros(a, r);
    let mut right = Matrix::zeros(b, r);
    let mut singular_values = Vec::with_capacity(r);
    for (k, &(s, j)) in kept.iter().enumerate() {
        singular_values.push(s);
        for i in 0..a {
            left.set(i, k, cols[j][i] / s);
        }
        for i in 0..b {
            right.set(i, k, vcols[j][i]);
        }
    }

    let (u, v) = if transposed { (right, left) } else { (left, right) };
    Ok(SvdResult {
        u,
        singular_values,
        v,
    })
}

/// Symmetric eigendecomposition `S = Q diag(e) Q^T` by cyclic two-sided
/// Jacobi. Eigenvalues come back in descending order with matching columns
/// of `Q`. Input asymmetry beyond `SYM_REL * frobenius` is rejected; below
/// that it is symmetrized away before iterating.
pub fn sym_eig<T: Scalar>(s: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    let n = s.rows();
    if n == 0 || s.cols() != n {
        return Err(Error::Shape(format!(
            "sym_eig needs square input, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if !s.is_all_finite() {
        return Err(Error::InvalidInput("sym_eig of non-finite matrix".into()));
    }
    let norm = s.frobenius_norm();
    let asym = s.sub(&s.transpose())?.frobenius_norm();
    if asym > fl::<T>(tol::SYM_REL) * norm.max(T::one()) {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric: asymmetry {asym}"
        )));
    }

    let mut a = Matrix::from_fn(n, n, |i, j| {
        (s.get(i, j) + s.get(j, i)) / fl::<T>(2.0)
    });
    let mut q = Matrix::<T>::identity(n);

    let off_target = {
        let spec = fl::<T>(tol::JACOBI_EIG_OFF);
        let floor = T::epsilon() * fl(8.0);
        spec.max(floor) * norm
    };
    let eps = jacobi_eps::<T>();

    for _ in 0..tol::JACOBI_MAX_SWEEPS {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let v = a.get(i, j);
                    off += v * v;
                }
            }
        }
        if off.sqrt() <= off_target {
            break;
        }
        for p in 0..n {
            for qi in (p + 1)..n {
                let apq = a.get(p, qi);
                let app = a.get(p, p);
                let aqq = a.get(qi, qi);
                if apq.abs() <= eps * (app.abs() * aqq.abs()).sqrt().max(T::epsilon()) {
                    continue;
                }
                let theta = (aqq - app) / (fl::<T>(2.0) * apq);
                let t = if theta >= T::zero() {
                    T::one() / (theta + (T::one() + theta * theta).sqrt())
                } else {
                    -T::one() / (-theta + (T::one() + theta * theta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let sn = c * t;
                // Similarity rotation in the (p, q) plane.
                a.set(p, p, app - t * apq);
                a.set(qi, qi, aqq + t * apq);
                a.set(p, qi, T::zero());
                a.set(qi, p, T::zero());
                for k in 0..n {
                    if k != p && k != qi {
                        let akp = a.get(k, p);
                        let akq = a.get(k, qi);
                        a.set(k, p, c * akp - sn * akq);
                        a.set(p, k, c * akp - sn * akq);
                        a.set(k, qi, sn * akp + c * akq);
                        a.set(qi, k, sn * akp + c * akq);
                    }
                }
                for k in 0..n {
                    let qkp = q.get(k, p);
                    let qkq = q.get(k, qi);
                    q.set(k, p, c * qkp - sn * qkq);
                    q.set(k, qi, sn * qkp + c * qkq);
                }
            }
        }
    }

    let mut order: Vec<(T, usize)> = (0..n).map(|i| (a.get(i, i), i)).collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let eigenvalues: Vec<T> = order.iter().map(|&(e, _)| e).collect();
    let mut qq = Matrix::zeros(n, n);
    for (k, &(_, j)) in order.iter().enumerate() {
        for i in 0..n {
            qq.set(i, k, q.get(i, j));
        }
    }
    Ok((eigenvalues, qq))
}

/// Symmetric PSD square root `B` with `B B = S`.
///
/// Eigenvalues below `PSD_FLOOR` reject the input; eigenvalues within the
/// relative snap band (`PSD_EIGEN_SNAP`) of zero, positive or negative, are
/// treated as exactly zero so that structural null spaces of `S` survive as
/// exact null spaces of the root.
#[allow(clippy::needless_range_loop)]
pub fn psd_sqrt<T: Scalar>(s: &Matrix<T>) -> Result<Matrix<T>> {
    let (eigenvalues, q) = sym_eig(s)?;
    let floor = fl::<T>(tol::PSD_FLOOR);
    let e_max = eigenvalues.first().copied().unwrap_or_else(T::zero);
    let snap = fl::<T>(tol::PSD_EIGEN_SNAP) * e_max.max(T::one());
    let mut roots = Vec::with_capacity(eigenvalues.len());
    for &e in &eigenvalues {
        if e < floor {
            return Err(Error::NotPsd(e.to_f64().unwrap_or(f64::NAN)));
        }
        roots.push(if e <= snap { T::zero() } else { e.sqrt() });
    }
    let n = q.rows();
    let mut b = Matrix::<T>::zeros(n, n);
    for k in 0..n {
        let r = roots[k];
        if r == T::zero() {
            continue;
        }
        for i in 0..n {
            let qik = q.get(i, k) * r;
            for j in 0..n {
                let v = b.get(i, j) + qik * q.get(j, k);
                b.set(i, j, v);
            }
        }
    }
    // Squash rounding asymmetry so the result is symmetric to the last bit.
    Ok(Matrix::from_fn(n, n, |i, j| {
        (b.get(i, j) + b.get(j, i)) / fl::<T>(2.0)
    }))
}

/// Frobenius, operator, and nuclear norms of one matrix. The latter two are
/// read off the reduced SVD and share its rank cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms<T> {
    pub frobenius: T,
    pub operator: T,
    pub nuclear: T,
}

pub fn norms<T: Scalar>(m: &Matrix<T>) -> Result<Norms<T>> {
    let svd = reduced_svd(m, None)?;
    let operator = svd.singular_values.first().copied().unwrap_or_else(T::zero);
    let mut nuclear = T::zero();
    for &s in &svd.singular_values {
        nuclear += s;
    }
    Ok(Norms {
        frobenius: m.frobenius_norm(),
        operator,
        nuclear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> Matrix<f64> {
        Matrix::from_vec(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn svd_of_diag_3_2() {
        let m = Matrix::diag(&[3.0_f64, 2.0]);
        let svd = reduced_svd(&m, None).unwrap();
        assert_eq!(svd.rank(), 2);
        assert!((svd.singular_values[0] - 3.0).abs() < 1e-12);
        assert!((svd.singular_values[1] - 2.0).abs() < 1e-12);
        // Factors are signed permutations of the identity here.
        assert!(svd.reconstruct().distance(&m).unwrap() < 1e-12);
    }

    #[test]
    fn svd_of_zero_matrix_has_rank_zero() {
        let m = Matrix::<f64>::zeros(3, 2);
        let svd = reduced_svd(&m, None).unwrap();
        assert_eq!(svd.rank(), 0);
        assert_eq!(svd.u.shape(), (3, 0));
        assert_eq!(svd.v.shape(), (2, 0));
        assert_eq!(svd.reconstruct(), m);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut m = Matrix::<f64>::zeros(2, 2);
        m.set(0, 0, f64::NAN);
        assert!(matches!(
            reduced_svd(&m, None),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn svd_wide_matrix_runs_on_transposed_side() {
        let m = mat(2, 5, &[1.0, 0.0, 2.0, -1.0, 0.5, 0.0, 3.0, 1.0, 0.0, -2.0]);
        let svd = reduced_svd(&m, None).unwrap();
        assert!(svd.rank() <= 2);
        assert!(svd.reconstruct().distance(&m).unwrap() < 1e-10);
        let utu = svd.u.transpose().matmul(&svd.u).unwrap();
        let vtv = svd.v.transpose().matmul(&svd.v).unwrap();
        let id = Matrix::<f64>::identity(svd.rank());
        assert!(utu.distance(&id).unwrap() < 1e-12);
        assert!(vtv.distance(&id).unwrap() < 1e-12);
    }

    #[test]
    fn rank_cutoff_drops_tiny_directions() {
        let m = Matrix::diag(&[1.0_f64, 1e-13]);
        let svd = reduced_svd(&m, None).unwrap();
        assert_eq!(svd.rank(), 1);
        let svd_keep = reduced_svd(&m, Some(1e-15)).unwrap();
        assert_eq!(svd_keep.rank(), 2);
    }

    #[test]
    fn sym_eig_ring_mixing_n4() {
        // Ring with lazy weight 0.25: circulant eigenvalues
        // 0.5 + 0.5 cos(2 pi k / 4) = 1, 0.5, 0.5, 0.
        let w = mat(
            4,
            4,
            &[
                0.5, 0.25, 0.0, 0.25, //
                0.25, 0.5, 0.25, 0.0, //
                0.0, 0.25, 0.5, 0.25, //
                0.25, 0.0, 0.25, 0.5,
            ],
        );
        let (e, q) = sym_eig(&w).unwrap();
        let expect = [1.0, 0.5, 0.5, 0.0];
        for (got, want) in e.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "eigenvalue {got} vs {want}");
        }
        // Independent check: each claimed eigenvalue is a root of the
        // characteristic polynomial evaluated by cofactor expansion.
        for &lambda in &expect {
            let shifted = Matrix::from_fn(4, 4, |i, j| {
                w.get(i, j) - if i == j { lambda } else { 0.0 }
            });
            assert!(det_cofactor(&shifted).abs() < 1e-12);
        }
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(qtq.distance(&Matrix::identity(4)).unwrap() < 1e-12);
    }

    #[test]
    fn sym_eig_rank_one_projector() {
        let third: f64 = 1.0 / 3.0;
        let j = Matrix::from_fn(3, 3, |_, _| third);
        let (e, _) = sym_eig(&j).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!(e[1].abs() < 1e-12);
        assert!(e[2].abs() < 1e-12);
    }

    #[test]
    fn sym_eig_rejects_asymmetric() {
        let m = mat(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(sym_eig(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn psd_sqrt_of_projector_is_projector() {
        // I - J is idempotent, so it equals its own PSD square root.
        let n = 4;
        let p = Matrix::from_fn(n, n, |i, j| {
            (if i == j { 1.0 } else { 0.0 }) - 1.0 / n as f64
        });
        let b = psd_sqrt(&p).unwrap();
        assert!(b.distance(&p).unwrap() < 1e-10);
        assert!(b.matmul(&b).unwrap().distance(&p).unwrap() < 1e-10);
    }

    #[test]
    fn psd_sqrt_rejects_negative_direction() {
        let m = Matrix::diag(&[1.0_f64, -0.5]);
        assert!(matches!(psd_sqrt(&m), Err(Error::NotPsd(_))));
    }

    #[test]
    fn psd_sqrt_commutes_with_input() {
        let s = mat(
            3,
            3,
            &[
                2.0, 0.3, 0.1, //
                0.3, 1.5, -0.2, //
                0.1, -0.2, 1.0,
            ],
        );
        let b = psd_sqrt(&s).unwrap();
        let comm = b
            .matmul(&s)
            .unwrap()
            .sub(&s.matmul(&b).unwrap())
            .unwrap();
        assert!(comm.frobenius_norm() < tol::PSD_SQRT_RESID * s.frobenius_norm());
    }

    #[test]
    fn norms_of_known_diag() {
        let m = Matrix::diag(&[3.0_f64, 2.0]);
        let n = norms(&m).unwrap();
        assert!((n.operator - 3.0).abs() < 1e-12);
        assert!((n.nuclear - 5.0).abs() < 1e-12);
        assert!((n.frobenius - 13.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn norms_vanish_only_at_zero() {
        let z = Matrix::<f64>::zeros(2, 3);
        let n = norms(&z).unwrap();
        assert_eq!(
            (n.frobenius, n.operator, n.nuclear),
            (0.0, 0.0, 0.0)
        );
        let tiny = Matrix::from_vec(2, 3, vec![0.0, 0.0, 1e-30, 0.0, 0.0, 0.0]).unwrap();
        assert!(norms(&tiny).unwrap().operator > 0.0);
    }

    /// Plain cofactor-expansion determinant; test oracle only, fine for n <= 6.
    fn det_cofactor(m: &Matrix<f64>) -> f64 {
        let n = m.rows();
        if n == 1 {
            return m.get(0, 0);
        }
        let mut det = 0.0;
        for j in 0..n {
            let minor = Matrix::from_fn(n - 1, n - 1, |r, c| {
                m.get(r + 1, if c < j { c } else { c + 1 })
            });
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            det += sign * m.get(0, j) * det_cofactor(&minor);
        }
        det
    }
}
