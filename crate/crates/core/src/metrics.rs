//! Run instrumentation.
//!
//! A snapshot is taken per recorded iterate; structural residuals are
//! computed per step and quantify identities that hold exactly (up to
//! rounding) for the iteration, independent of problem or schedule:
//!
//! * the mean iterate follows `xbar' = xbar - alpha sbar`;
//! * the dual term `B Y` averages to zero across nodes;
//! * the tracking mean equals the momentum mean;
//! * tracking disagreement contracts at least by `lambda` per round;
//! * the mean-vs-average gradient mismatch is controlled by consensus
//!   error times the Lipschitz constant over `sqrt(N)`.

use crate::decomp::norms;
use crate::engine::{Engine, RunState};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::problems::Problem;
use crate::scalar::{fl, Scalar};
use crate::stack;

/// One row of a run trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord<T> {
    pub k: u64,
    /// Objective at the mean iterate.
    pub f_bar: T,
    /// Nuclear norm of the full gradient at the mean iterate.
    pub grad_nuc: T,
    /// Running mean of `grad_nuc` over rows 0..=k.
    pub run_avg_grad_nuc: T,
    /// Frobenius norm of the iterate deviation stack.
    pub consensus_fro: T,
    /// Frobenius norm of the tracker deviation stack.
    pub tracking_dev_fro: T,
    /// Distance between the tracker mean and the full gradient at the mean
    /// iterate.
    pub avg_track_err_fro: T,
    /// Operator norm of the mean polarized step (0 for the initial row,
    /// where no step has been taken).
    pub mean_polar_op: T,
}

/// Captures one snapshot and folds `grad_nuc` into the caller's running
/// sum, from which the running average is derived.
pub fn snapshot<T: Scalar>(
    state: &RunState<T>,
    problem: &Problem<T>,
    s_bar: Option<&Matrix<T>>,
    grad_nuc_sum: &mut T,
) -> Result<TraceRecord<T>> {
    let x_bar = stack::block_mean(&state.x)?;
    let f_bar = problem.objective(&x_bar)?;
    let grad = problem.full_gradient(&x_bar)?;
    let grad_nuc = norms(&grad)?.nuclear;
    *grad_nuc_sum += grad_nuc;
    let run_avg_grad_nuc = *grad_nuc_sum / fl((state.k + 1) as f64);
    let h_bar = stack::block_mean(&state.h)?;
    Ok(TraceRecord {
        k: state.k,
        f_bar,
        grad_nuc,
        run_avg_grad_nuc,
        consensus_fro: stack::deviation_frobenius(&state.x)?,
        tracking_dev_fro: stack::deviation_frobenius(&state.h)?,
        avg_track_err_fro: h_bar.distance(&grad)?,
        mean_polar_op: match s_bar {
            Some(s) => norms(s)?.operator,
            None => T::zero(),
        },
    })
}

/// Residuals of the per-step structural identities. Inequality-style
/// checks are reported as slack (`lhs - rhs`), so anything at or below the
/// rounding budget passes.
#[derive(Debug, Clone, Copy)]
pub struct StepResiduals<T> {
    /// `|| xbar' - (xbar - alpha sbar) ||_F`
    pub avg_dynamics: T,
    /// `|| mean_i (B Y)_i ||_F`; backbone variants only.
    pub dual_mean: Option<T>,
    /// `|| hbar' - mbar' ||_F`
    pub tracking_mean: T,
    /// `|| Htilde' ||_F - lambda || Htilde + Mtilde' - Mtilde ||_F`;
    /// variants that mix the tracker only.
    pub contraction_slack: Option<T>,
    /// `nuclear(grad f(xbar) - mean_i grad f_i(x_i)) -
    ///  (L / sqrt(N)) || Xtilde ||_F`, evaluated before the step.
    pub mismatch_slack: T,
}

pub fn step_residuals<T: Scalar>(
    engine: &Engine<'_, T>,
    prev: &RunState<T>,
    next: &RunState<T>,
    s_bar: &Matrix<T>,
) -> Result<StepResiduals<T>> {
    let problem = engine.problem();
    let alpha = engine.schedule().alpha();
    let n = problem.n_nodes();

    let x_bar_prev = stack::block_mean(&prev.x)?;
    let x_bar_next = stack::block_mean(&next.x)?;
    let predicted = x_bar_prev.sub(&s_bar.scale(alpha))?;
    let avg_dynamics = x_bar_next.distance(&predicted)?;

    let dual_mean = match engine.backbone() {
        Some(bk) => {
            let by = stack::mix_apply(&bk.b, &prev.y)?;
            Some(stack::block_mean(&by)?.frobenius_norm())
        }
        None => None,
    };

    let h_bar = stack::block_mean(&next.h)?;
    let m_bar = stack::block_mean(&next.m)?;
    let tracking_mean = h_bar.distance(&m_bar)?;

    let contraction_slack = if engine.variant().mixes_tracking() {
        let lambda = engine.mixing().expect("validated").lambda();
        let h_dev_next = stack::deviation_frobenius(&next.h)?;
        let carried: Result<Vec<Matrix<T>>> = prev
            .h
            .iter()
            .zip(next.m.iter().zip(&prev.m))
            .map(|(hi, (mn, mo))| hi.add(&mn.sub(mo)?))
            .collect();
        let carried_dev = stack::deviation_frobenius(&carried?)?;
        Some(h_dev_next - lambda * carried_dev)
    } else {
        None
    };

    let mut local_sum: Option<Matrix<T>> = None;
    for (i, xi) in prev.x.iter().enumerate() {
        let gi = problem.local_gradient(i, xi)?;
        local_sum = Some(match local_sum {
            Some(acc) => acc.add(&gi)?,
            None => gi,
        });
    }
    let local_mean = local_sum
        .ok_or_else(|| Error::InvalidInput("empty state".into()))?
        .scale(T::one() / fl(n as f64));
    let grad_at_mean = problem.full_gradient(&x_bar_prev)?;
    let mismatch = norms(&grad_at_mean.sub(&local_mean)?)?.nuclear;
    let bound = problem.lipschitz_nuclear() / fl::<T>(n as f64).sqrt()
        * stack::deviation_frobenius(&prev.x)?;
    let mismatch_slack = mismatch - bound;

    Ok(StepResiduals {
        avg_dynamics,
        dual_mean,
        tracking_mean,
        contraction_slack,
        mismatch_slack,
    })
}

/// Scalar summary of one trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary<T> {
    pub final_grad_nuc: T,
    pub best_grad_nuc: T,
    pub final_run_avg_grad_nuc: T,
    pub max_consensus_fro: T,
    pub blew_up: bool,
}

pub fn summarize<T: Scalar>(trace: &crate::engine::Trace<T>) -> Result<Summary<T>> {
    let records = &trace.records;
    let last = records
        .last()
        .ok_or_else(|| Error::InvalidInput("empty trace".into()))?;
    let mut best = last.grad_nuc;
    let mut max_consensus = T::zero();
    for r in records {
        best = best.min(r.grad_nuc);
        max_consensus = max_consensus.max(r.consensus_fro);
    }
    Ok(Summary {
        final_grad_nuc: last.grad_nuc,
        best_grad_nuc: best,
        final_run_avg_grad_nuc: last.run_avg_grad_nuc,
        max_consensus_fro: max_consensus,
        blew_up: trace.blowup.is_some(),
    })
}

/// Mean and population standard deviation of a sample.
pub fn mean_and_pstd<T: Scalar>(values: &[T]) -> Result<(T, T)> {
    if values.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    let n = fl::<T>(values.len() as f64);
    let mut mean = T::zero();
    for &v in values {
        mean += v;
    }
    mean = mean / n;
    let mut var = T::zero();
    for &v in values {
        let d = v - mean;
        var += d * d;
    }
    var = var / n;
    Ok((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_std_uses_n_not_n_minus_one() {
        let (mean, pstd) = mean_and_pstd(&[1.0_f64, 2.0, 3.0, 4.0]).unwrap();
        assert!((mean - 2.5).abs() < 1e-15);
        // Population variance of {1,2,3,4} is 1.25.
        assert!((pstd - 1.25_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_sample_is_rejected() {
        assert!(mean_and_pstd::<f64>(&[]).is_err());
    }
}
