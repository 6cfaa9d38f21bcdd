//! Communication graphs and gossip mixing matrices.
//!
//! A mixing matrix `W` is symmetric, doubly stochastic, nonnegative, and
//! primitive; its contraction factor is `lambda = rho(W - J)` where
//! `J = (1/N) 1 1^T`. Consensus-based methods contract disagreement by
//! `lambda` per round, so `lambda < 1` is enforced at construction.

use crate::decomp::sym_eig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{fl, Scalar};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Ring,
    Line,
    Star,
    Complete,
}

/// Undirected simple connected graph on `n` nodes.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds one of the standard topologies. The ring needs at least three
    /// nodes to be simple; the others need two.
    pub fn standard(kind: GraphKind, n: usize) -> Result<Self> {
        let min = match kind {
            GraphKind::Ring => 3,
            _ => 2,
        };
        if n < min {
            return Err(Error::InvalidConfig(format!(
                "{kind:?} graph needs at least {min} nodes, got {n}"
            )));
        }
        let edges = match kind {
            GraphKind::Ring => (0..n).map(|i| (i, (i + 1) % n)).collect(),
            GraphKind::Line => (0..n - 1).map(|i| (i, i + 1)).collect(),
            GraphKind::Star => (1..n).map(|i| (0, i)).collect(),
            GraphKind::Complete => {
                let mut e = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        e.push((i, j));
                    }
                }
                e
            }
        };
        Ok(Self { n, edges })
    }

    /// Arbitrary edge list. Rejects self-loops, out-of-range endpoints,
    /// duplicate edges, and disconnected graphs.
    pub fn custom(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig("graph needs at least 2 nodes".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidConfig(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidConfig(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidConfig(format!("duplicate edge ({a}, {b})")));
            }
        }
        let g = Self {
            n,
            edges: edges.to_vec(),
        };
        if !g.is_connected() {
            return Err(Error::InvalidConfig("graph is disconnected".into()));
        }
        Ok(g)
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Weight rule turning a graph into a mixing matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixingScheme<T> {
    /// `W = (1 - d rho) I + rho A` for a `d`-regular graph; requires
    /// `0 < rho` and `d rho <= 1`.
    Lazy { rho: T },
    /// `W_ij = 1 / (1 + max(d_i, d_j))` on edges, diagonal takes the rest.
    /// Works on any connected graph.
    Metropolis,
}

/// Validated mixing matrix with its contraction factor cached.
#[derive(Debug, Clone)]
pub struct MixingMatrix<T> {
    w: Matrix<T>,
    lambda: T,
}

impl<T: Scalar> MixingMatrix<T> {
    /// Wraps an explicit matrix, enforcing every structural invariant:
    /// symmetry, nonnegativity, unit row/column sums, primitivity (checked
    /// through positivity of `((W + I)/2)^N`), and `lambda < 1`.
    pub fn from_matrix(w: Matrix<T>) -> Result<Self> {
        let n = w.rows();
        if n == 0 || w.cols() != n {
            return Err(Error::Shape(format!(
                "mixing matrix must be square, got {}x{}",
                w.rows(),
                w.cols()
            )));
        }
        let sym_budget = fl::<T>(tol::STOCHASTIC);
        if w.sub(&w.transpose())?.frobenius_norm() > sym_budget {
            return Err(Error::InvalidConfig("mixing matrix is not symmetric".into()));
        }
        for i in 0..n {
            let mut row = T::zero();
            for j in 0..n {
                let v = w.get(i, j);
                if v < T::zero() {
                    return Err(Error::InvalidConfig(format!(
                        "negative weight at ({i}, {j})"
                    )));
                }
                row += v;
            }
            if (row - T::one()).abs() > sym_budget {
                return Err(Error::InvalidConfig(format!(
                    "row {i} sums to {row}, expected 1"
                )));
            }
        }
        // Primitivity: lazy self-loops make ((W + I)/2)^N strictly positive
        // exactly when the support graph is connected.
        let half = fl::<T>(0.5);
        let base = Matrix::from_fn(n, n, |i, j| {
            half * (w.get(i, j) + if i == j { T::one() } else { T::zero() })
        });
        let mut power = base.clone();
        for _ in 1..n {
            power = power.matmul(&base)?;
        }
        if power.data().iter().any(|&v| v <= T::zero()) {
            return Err(Error::InvalidConfig(
                "mixing matrix support is not primitive (graph disconnected?)".into(),
            ));
        }
        let lambda = spectral_gap_factor(&w)?;
        if lambda >= T::one() {
            return Err(Error::InvalidConfig(format!(
                "contraction factor {lambda} is not below 1"
            )));
        }
        Ok(Self { w, lambda })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.w
    }

    /// `rho(W - J)`, the per-round disagreement contraction factor.
    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn n_nodes(&self) -> usize {
        self.w.rows()
    }
}

/// Builds the weight matrix for a graph under the given scheme and
/// validates it as a [`MixingMatrix`].
pub fn build_mixing<T: Scalar>(graph: &Graph, scheme: MixingScheme<T>) -> Result<MixingMatrix<T>> {
    let n = graph.n_nodes();
    let degrees = graph.degrees();
    let w = match scheme {
        MixingScheme::Lazy { rho } => {
            if rho <= T::zero() || !rho.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "lazy weight rho must be positive, got {rho}"
                )));
            }
            let d = degrees[0];
            if degrees.iter().any(|&di| di != d) {
                return Err(Error::InvalidConfig(
                    "lazy weights need a regular graph; use metropolis instead".into(),
                ));
            }
            let d_rho = fl::<T>(d as f64) * rho;
            if d_rho > T::one() {
                return Err(Error::InvalidConfig(format!(
                    "lazy weight rho = {rho} exceeds 1/degree for degree {d}"
                )));
            }
            let mut w = Matrix::zeros(n, n);
            for i in 0..n {
                w.set(i, i, T::one() - d_rho);
            }
            for &(a, b) in graph.edges() {
                w.set(a, b, rho);
                w.set(b, a, rho);
            }
            w
        }
        MixingScheme::Metropolis => {
            let mut w = Matrix::zeros(n, n);
            for &(a, b) in graph.edges() {
                let v = T::one() / fl::<T>(1.0 + degrees[a].max(degrees[b]) as f64);
                w.set(a, b, v);
                w.set(b, a, v);
            }
            for i in 0..n {
                let mut off = T::zero();
                for j in 0..n {
                    if j != i {
                        off += w.get(i, j);
                    }
                }
                w.set(i, i, T::one() - off);
            }
            w
        }
    };
    MixingMatrix::from_matrix(w)
}

/// `rho(W - J)` for a symmetric stochastic matrix, with no further
/// validation; `MixingMatrix` construction is the validating path.
pub fn spectral_gap_factor<T: Scalar>(w: &Matrix<T>) -> Result<T> {
    let n = w.rows();
    let inv_n = T::one() / fl::<T>(n as f64);
    let centered = Matrix::from_fn(n, n, |i, j| w.get(i, j) - inv_n);
    let (eigenvalues, _) = sym_eig(&centered)?;
    Ok(eigenvalues
        .iter()
        .fold(T::zero(), |acc, &e| acc.max(e.abs())))
}
