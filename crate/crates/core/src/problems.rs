//! Test problems with nuclear-norm-Lipschitz gradients.
//!
//! Each problem defines per-node objectives `f_i` over matrices of a fixed
//! shape, with `f = (1/N) sum_i f_i`, plus a stochastic first-order oracle
//! addressed through the counter-based stream. `lipschitz_nuclear` bounds
//! `nuclear(grad f(X) - grad f(Y)) <= L operator(X - Y)`.
//!
//! Three families:
//!
//! * `matrix_logistic`: two nodes pulling along one rank-one direction
//!   `U = u v^T` with opposite signs, `f_1 = a log(1 + e^{<U, X>})` and
//!   `f_2 = b log(1 + e^{-<U, X>})`. Deterministic. At `X = 0` every
//!   individual gradient keeps its sign no matter the iterate history of
//!   the other node, which is what defeats sign averaging without
//!   tracking.
//! * `transverse_quadratic`: `f(X) = x_1^2 / 2` on 2x1 iterates, oracle
//!   noise `+-sigma` confined to the second coordinate. The polarized
//!   oracle has closed-form dynamics, used by the speedup comparison.
//! * `hetero_quadratic`: `f_i(X) = ||X - T_i||_F^2 / 2` with node targets
//!   drawn once from the problem-data stream and Gaussian oracle noise of
//!   total standard deviation `sigma` spread over the entries.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{RngStream, StreamDomain};
use crate::scalar::{fl, Scalar};

#[derive(Debug, Clone)]
pub enum Problem<T> {
    MatrixLogistic {
        a: T,
        b: T,
        /// Unit vectors defining the rank-one direction `u v^T`.
        u: Vec<T>,
        v: Vec<T>,
    },
    TransverseQuadratic {
        n_nodes: usize,
        sigma: T,
    },
    HeteroQuadratic {
        targets: Vec<Matrix<T>>,
        sigma: T,
    },
}

/// Numerically stable `log(1 + e^t)`.
fn softplus<T: Scalar>(t: T) -> T {
    if t > T::zero() {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Numerically stable logistic `1 / (1 + e^{-t})`.
fn logistic<T: Scalar>(t: T) -> T {
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

pub fn build_matrix_logistic<T: Scalar>(a: T, b: T, u: &[T], v: &[T]) -> Result<Problem<T>> {
    if a <= T::zero() || b <= T::zero() {
        return Err(Error::InvalidInput("logistic weights must be positive".into()));
    }
    if u.is_empty() || v.is_empty() {
        return Err(Error::InvalidInput("direction vectors must be nonempty".into()));
    }
    let unit = |x: &[T]| {
        let mut acc = T::zero();
        for &e in x {
            acc += e * e;
        }
        (acc.sqrt() - T::one()).abs() <= fl(1e-12)
    };
    if !unit(u) || !unit(v) {
        return Err(Error::InvalidInput("direction vectors must be unit".into()));
    }
    Ok(Problem::MatrixLogistic {
        a,
        b,
        u: u.to_vec(),
        v: v.to_vec(),
    })
}

pub fn build_transverse_quadratic<T: Scalar>(n_nodes: usize, sigma: T) -> Result<Problem<T>> {
    if n_nodes == 0 {
        return Err(Error::InvalidInput("need at least one node".into()));
    }
    if sigma < T::zero() || !sigma.is_finite() {
        return Err(Error::InvalidInput("sigma must have a finite value >= 0".into()));
    }
    Ok(Problem::TransverseQuadratic { n_nodes, sigma })
}

/// Targets are `spread` times standard normal entries, drawn from the
/// problem-data domain of `seed` so they are independent of run seeds.
pub fn build_hetero_quadratic<T: Scalar>(
    seed: u64,
    n_nodes: usize,
    rows: usize,
    cols: usize,
    spread: T,
    sigma: T,
) -> Result<Problem<T>> {
    if n_nodes == 0 || rows == 0 || cols == 0 {
        return Err(Error::InvalidInput("empty problem dimensions".into()));
    }
    if spread < T::zero() || sigma < T::zero() {
        return Err(Error::InvalidInput("spread and sigma must be >= 0".into()));
    }
    let rng = RngStream::new(seed);
    let targets = (0..n_nodes)
        .map(|i| {
            let mut stream = rng.at(StreamDomain::ProblemData, i as u64, 0);
            Matrix::from_fn(rows, cols, |_, _| {
                spread * fl::<T>(stream.next_gaussian())
            })
        })
        .collect();
    Ok(Problem::HeteroQuadratic { targets, sigma })
}

impl<T: Scalar> Problem<T> {
    pub fn n_nodes(&self) -> usize {
        match self {
            Problem::MatrixLogistic { .. } => 2,
            Problem::TransverseQuadratic { n_nodes, .. } => *n_nodes,
            Problem::HeteroQuadratic { targets, .. } => targets.len(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Problem::MatrixLogistic { u, v, .. } => (u.len(), v.len()),
            Problem::TransverseQuadratic { .. } => (2, 1),
            Problem::HeteroQuadratic { targets, .. } => targets[0].shape(),
        }
    }

    /// The rank-one direction for the logistic family.
    pub fn direction(&self) -> Option<Matrix<T>> {
        match self {
            Problem::MatrixLogistic { u, v, .. } => {
                Some(Matrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j]))
            }
            _ => None,
        }
    }

    fn check_shape(&self, x: &Matrix<T>) -> Result<()> {
        if x.shape() != self.shape() {
            return Err(Error::Shape(format!(
                "iterate shape {:?}, problem expects {:?}",
                x.shape(),
                self.shape()
            )));
        }
        Ok(())
    }

    /// Global objective `f(X) = (1/N) sum_i f_i(X)`.
    pub fn objective(&self, x: &Matrix<T>) -> Result<T> {
        self.check_shape(x)?;
        match self {
            Problem::MatrixLogistic { a, b, .. } => {
                let t = self.direction().unwrap().inner_product(x)?;
                Ok((*a * softplus(t) + *b * softplus(-t)) / fl(2.0))
            }
            Problem::TransverseQuadratic { .. } => {
                let x1 = x.get(0, 0);
                Ok(x1 * x1 / fl(2.0))
            }
            Problem::HeteroQuadratic { targets, .. } => {
                let mut acc = T::zero();
                for t in targets {
                    let d = x.distance(t)?;
                    acc += d * d / fl(2.0);
                }
                Ok(acc / fl(targets.len() as f64))
            }
        }
    }

    /// Exact gradient of node `i`'s objective at `x`.
    pub fn local_gradient(&self, node: usize, x: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_shape(x)?;
        if node >= self.n_nodes() {
            return Err(Error::InvalidInput(format!("node {node} out of range")));
        }
        match self {
            Problem::MatrixLogistic { a, b, .. } => {
                let dir = self.direction().unwrap();
                let t = dir.inner_product(x)?;
                // grad f_1 = a logistic(t) U, grad f_2 = -b logistic(-t) U:
                // positive and negative multiples of U at every point.
                let coeff = if node == 0 {
                    *a * logistic(t)
                } else {
                    -*b * logistic(-t)
                };
                Ok(dir.scale(coeff))
            }
            Problem::TransverseQuadratic { .. } => {
                let mut g = Matrix::zeros(2, 1);
                g.set(0, 0, x.get(0, 0));
                Ok(g)
            }
            Problem::HeteroQuadratic { targets, .. } => x.sub(&targets[node]),
        }
    }

    /// Exact gradient of the global objective.
    pub fn full_gradient(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let n = self.n_nodes();
        let mut acc = self.local_gradient(0, x)?;
        for i in 1..n {
            acc = acc.add(&self.local_gradient(i, x)?)?;
        }
        Ok(acc.scale(T::one() / fl(n as f64)))
    }

    /// One stochastic gradient draw for `(node, iteration)`. Deterministic
    /// in the address: repeated calls return bitwise identical matrices.
    pub fn sample_oracle(
        &self,
        node: usize,
        x: &Matrix<T>,
        iteration: u64,
        rng: &RngStream,
    ) -> Result<Matrix<T>> {
        self.check_shape(x)?;
        if node >= self.n_nodes() {
            return Err(Error::InvalidInput(format!("node {node} out of range")));
        }
        match self {
            Problem::MatrixLogistic { .. } => self.local_gradient(node, x),
            Problem::TransverseQuadratic { sigma, .. } => {
                let mut stream = rng.at(StreamDomain::Oracle, node as u64, iteration);
                let mut g = Matrix::zeros(2, 1);
                g.set(0, 0, x.get(0, 0));
                g.set(1, 0, *sigma * fl::<T>(stream.next_sign()));
                Ok(g)
            }
            Problem::HeteroQuadratic { targets, sigma } => {
                let (rows, cols) = targets[node].shape();
                let mut stream = rng.at(StreamDomain::Oracle, node as u64, iteration);
                // Per-entry sd sigma / sqrt(m n): total noise variance sigma^2.
                let entry_sd = *sigma / fl::<T>((rows * cols) as f64).sqrt();
                let grad = self.local_gradient(node, x)?;
                Ok(Matrix::from_fn(rows, cols, |i, j| {
                    grad.get(i, j) + entry_sd * fl::<T>(stream.next_gaussian())
                }))
            }
        }
    }

    /// Nuclear-norm Lipschitz constant of the gradients: rank-one families
    /// get their curvature bound, quadratics get `min(m, n)` (the nuclear
    /// norm of a difference of gradients is at most rank times its operator
    /// norm, and gradients differ by `X - Y` exactly).
    pub fn lipschitz_nuclear(&self) -> T {
        match self {
            Problem::MatrixLogistic { a, b, .. } => a.max(*b) / fl(4.0),
            Problem::TransverseQuadratic { .. } => T::one(),
            Problem::HeteroQuadratic { targets, .. } => {
                let (m, n) = targets[0].shape();
                fl(m.min(n) as f64)
            }
        }
    }
}
