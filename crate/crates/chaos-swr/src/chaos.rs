//! Evaluation of the order-2 sign chaos `sum_{i != j} s_i s_j a_ij`.
//!
//! The same formula serves balanced vectors (sampling without replacement)
//! and unconstrained i.i.d. sign paths. Summation runs in fixed row-major
//! order so outputs are bit-stable across runs and worker counts.

use crate::coeff::CoefficientMatrix;
use crate::error::{Error, Result};

/// `sum_{i != j} signs[i] * signs[j] * a_ij`.
///
/// The diagonal is structurally zero, so the inner loop may include `j == i`
/// without affecting the value.
pub fn eval_chaos(a: &CoefficientMatrix, signs: &[i8]) -> Result<f64> {
    let n = a.n();
    if signs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: signs.len(),
        });
    }
    let mut acc = 0.0;
    for i in 0..n {
        let row = a.row(i);
        let mut inner = 0.0;
        for j in 0..n {
            inner += row[j] * f64::from(signs[j]);
        }
        acc += f64::from(signs[i]) * inner;
    }
    Ok(acc)
}

/// Elementwise `eval_chaos` over a batch of draws, order preserved. Any
/// length mismatch aborts the whole batch.
pub fn eval_chaos_batch<'a, I>(a: &CoefficientMatrix, draws: I) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a [i8]>,
{
    draws.into_iter().map(|s| eval_chaos(a, s)).collect()
}
