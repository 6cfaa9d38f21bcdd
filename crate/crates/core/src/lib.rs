//! Deterministic desk-scale simulator for decentralized Muon-style
//! optimization over communication graphs.
//!
//! The library builds up from dense matrix primitives (Jacobi SVD and
//! eigensolver, PSD square root, the matrix sign `msgn`) through gossip
//! mixing matrices and primal-dual consensus backbones to a stepping
//! engine with momentum and gradient tracking, plus the flat baselines it
//! is compared against. Everything is deterministic: randomness flows
//! through counter-based streams addressed by `(seed, node, iteration,
//! draw)`, so identical configurations replay bit-for-bit.
//!
//! The numeric core is generic over the scalar type; the aliases below fix
//! `f64`, which is what the documented tolerances assume.

pub mod backbone;
pub mod decomp;
pub mod engine;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod polar;
pub mod problems;
pub mod rng;
pub mod scalar;
pub mod stack;
pub mod tol;
pub mod topology;

pub use error::{Error, Result};

/// Double-precision aliases; the CLI and test suites work in these.
pub type Mat = matrix::Matrix<f64>;
pub type Svd = decomp::SvdResult<f64>;
pub type Mixing = topology::MixingMatrix<f64>;
pub type Backbone = backbone::SudaBackbone<f64>;
pub type Prob = problems::Problem<f64>;
pub type Sched = engine::Schedule<f64>;
pub type Rec = metrics::TraceRecord<f64>;
