//! Helpers for per-node block stacks.
//!
//! A stack is one matrix per node, all of the same shape. Mixing acts
//! block-wise: row `i` of `W` weights the blocks into node `i`'s new block.
//! Reductions run in fixed node order; the mean uses pairwise summation,
//! which is exact when a power-of-two number of identical blocks is
//! averaged (the degenerate consensus case some counterexamples rely on).

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{fl, Scalar};

pub fn check_uniform<T: Scalar>(blocks: &[Matrix<T>]) -> Result<(usize, usize)> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::InvalidInput("empty block stack".into()))?;
    let shape = first.shape();
    if blocks.iter().any(|b| b.shape() != shape) {
        return Err(Error::Shape("ragged block stack".into()));
    }
    Ok(shape)
}

fn pairwise_sum<T: Scalar>(blocks: &[Matrix<T>]) -> Matrix<T> {
    match blocks.len() {
        1 => blocks[0].clone(),
        n => {
            let (lo, hi) = blocks.split_at(n / 2);
            pairwise_sum(lo).add(&pairwise_sum(hi)).expect("uniform stack")
        }
    }
}

pub fn block_mean<T: Scalar>(blocks: &[Matrix<T>]) -> Result<Matrix<T>> {
    check_uniform(blocks)?;
    let n = fl::<T>(blocks.len() as f64);
    Ok(pairwise_sum(blocks).map(|v| v / n))
}

/// `out_i = sum_j W_ij blocks_j`.
pub fn mix_apply<T: Scalar>(w: &Matrix<T>, blocks: &[Matrix<T>]) -> Result<Vec<Matrix<T>>> {
    let (rows, cols) = check_uniform(blocks)?;
    if w.rows() != blocks.len() || w.cols() != blocks.len() {
        return Err(Error::Shape(format!(
            "mixing {}x{} against {} blocks",
            w.rows(),
            w.cols(),
            blocks.len()
        )));
    }
    let mut out = Vec::with_capacity(blocks.len());
    for i in 0..blocks.len() {
        let mut acc = Matrix::zeros(rows, cols);
        for (j, block) in blocks.iter().enumerate() {
            let wij = w.get(i, j);
            if wij == T::zero() {
                continue;
            }
            acc = acc.add(&block.scale(wij))?;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Blocks minus their mean.
pub fn deviations<T: Scalar>(blocks: &[Matrix<T>]) -> Result<Vec<Matrix<T>>> {
    let mean = block_mean(blocks)?;
    blocks.iter().map(|b| b.sub(&mean)).collect()
}

/// Frobenius norm of the whole stack seen as one tall matrix.
pub fn stack_frobenius<T: Scalar>(blocks: &[Matrix<T>]) -> T {
    let mut acc = T::zero();
    for b in blocks {
        let f = b.frobenius_norm();
        acc += f * f;
    }
    acc.sqrt()
}

/// Frobenius norm of the deviation part, i.e. the consensus error.
pub fn deviation_frobenius<T: Scalar>(blocks: &[Matrix<T>]) -> Result<T> {
    Ok(stack_frobenius(&deviations(blocks)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_identical_power_of_two_stack_is_exact() {
        let b = Matrix::from_vec(2, 1, vec![0.1, -0.7]).unwrap();
        for n in [1usize, 2, 4, 8, 64, 256] {
            let stack: Vec<_> = (0..n).map(|_| b.clone()).collect();
            let mean = block_mean(&stack).unwrap();
            assert_eq!(mean, b, "n = {n}");
        }
    }

    #[test]
    fn mix_with_doubly_stochastic_preserves_mean() {
        let w = Matrix::from_vec(2, 2, vec![0.6, 0.4, 0.4, 0.6]).unwrap();
        let stack = vec![
            Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
            Matrix::from_vec(2, 2, vec![-1.0, 0.5, 2.0, -3.0]).unwrap(),
        ];
        let mixed = mix_apply(&w, &stack).unwrap();
        let before = block_mean(&stack).unwrap();
        let after = block_mean(&mixed).unwrap();
        assert!(before.distance(&after).unwrap() < 1e-15);
    }

    #[test]
    fn deviation_norm_is_zero_at_consensus() {
        let b = Matrix::from_vec(1, 2, vec![3.0, -1.0]).unwrap();
        let stack = vec![b.clone(), b.clone(), b.clone(), b];
        assert_eq!(deviation_frobenius(&stack).unwrap(), 0.0);
    }

    #[test]
    fn ragged_stacks_are_rejected() {
        let stack = vec![Matrix::<f64>::zeros(2, 2), Matrix::<f64>::zeros(2, 3)];
        assert!(block_mean(&stack).is_err());
    }
}
