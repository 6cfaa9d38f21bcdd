//! Central tolerance record.
//!
//! Every numeric threshold used by the library or asserted by its tests is
//! defined here once, so the two can never drift apart. All values are
//! calibrated for `f64`; at lower precision the factorization loops fall
//! back to machine-epsilon-scaled thresholds.

/// Relative off-diagonal threshold for the cyclic Jacobi eigensolver:
/// iteration stops once `off(S) <= JACOBI_EIG_OFF * frobenius(S)`.
pub const JACOBI_EIG_OFF: f64 = 1e-14;

/// Hard cap on Jacobi sweeps; hit only on pathological input.
pub const JACOBI_MAX_SWEEPS: usize = 60;

/// Default relative rank cutoff factor for the reduced SVD. Singular values
/// at or below `RANK_REL * max(rows, cols) * s_max` count as zero.
pub const RANK_REL: f64 = 1e-10;

/// Allowed asymmetry, relative to the Frobenius norm, for inputs that must
/// be symmetric.
pub const SYM_REL: f64 = 1e-10;

/// Eigenvalues of a nominally PSD matrix may undershoot zero by at most
/// this much before the matrix is rejected; values in `[PSD_FLOOR, 0)` are
/// clamped to zero.
pub const PSD_FLOOR: f64 = -1e-10;

/// Eigenvalues within `PSD_EIGEN_SNAP * max(e_max, 1)` of zero are treated
/// as exactly zero by the PSD square root. Without the snap, a structurally
/// zero eigenvalue that rounds to `+1e-16` would contribute a spurious
/// `1e-8`-sized direction to the root (square root amplifies noise near
/// zero), which is fatal when that direction is supposed to be a null
/// space.
pub const PSD_EIGEN_SNAP: f64 = 1e-12;

/// Factor-quality budget for orthonormality and square-root residuals.
pub const ORTHO: f64 = 1e-10;
pub const PSD_SQRT_RESID: f64 = 1e-8;

/// Row/column-sum budget for stochastic matrices.
pub const STOCHASTIC: f64 = 1e-12;

/// Budgets for backbone structure: `B 1 = 0`, commutation with `W`, and the
/// smallest non-consensus singular value of `B` staying away from zero.
pub const CONSENSUS_NULL: f64 = 1e-10;
pub const COMMUTE: f64 = 1e-10;
pub const B_SECOND_SV_MIN: f64 = 1e-10;

/// Exact structural identities of the iteration (mean dynamics, dual-mean
/// annihilation, tracking-mean equality, tracking contraction) must hold to
/// this residual on live runs.
pub const STRUCTURAL: f64 = 1e-10;

/// Slack for the consensus-mismatch inequality, which composes a nuclear
/// norm with a Lipschitz bound and is therefore given a looser budget.
pub const MISMATCH: f64 = 1e-8;

/// Mean polarized step may exceed unit operator norm only by this much.
pub const POLAR_OP_EXCESS: f64 = 1e-10;

/// Iterate entries beyond this magnitude (or non-finite) abort a run.
pub const BLOWUP: f64 = 1e12;

/// Newton-Schulz pre-normalization divides by `frobenius * NS_NORM_PAD` so
/// the top singular value starts strictly inside the attraction region.
pub const NS_NORM_PAD: f64 = 1.01;
