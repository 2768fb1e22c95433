//! Thresholding rules shared by the solvers and the adaptive choice of the
//! regularisation weight from a sparsity prior `r`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::DenseVector;

/// Indices of `z` sorted by decreasing magnitude, ties by increasing index.
pub fn magnitude_order(z: &DenseVector) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&i, &j| match z[j].abs().total_cmp(&z[i].abs()) {
        Ordering::Equal => i.cmp(&j),
        other => other,
    });
    idx
}

/// `|z|_(k)`, the k-th largest magnitude (1-based); 0 past the end.
pub fn kth_magnitude(z: &DenseVector, order: &[usize], k: usize) -> f64 {
    match k.checked_sub(1).and_then(|i| order.get(i)) {
        Some(&i) => z[i].abs(),
        None => 0.0,
    }
}

fn check_sparsity(r: usize, n: usize) -> Result<()> {
    if r >= 1 && r < n {
        Ok(())
    } else {
        Err(Error::SparsityOutOfRange { r, lower: 1, n })
    }
}

/// `sign(z_i) * max(|z_i| - tau, 0)`.
pub fn soft_threshold(z: &DenseVector, tau: f64) -> DenseVector {
    z.map(|v| {
        let shrunk = v.abs() - tau;
        if shrunk > 0.0 {
            shrunk.copysign(v)
        } else {
            0.0
        }
    })
}

/// Keep the `r` largest-magnitude entries (ties to the lower index) and zero
/// the rest. `r >= n` is the identity.
pub fn keep_top_r(z: &DenseVector, r: usize) -> DenseVector {
    if r >= z.len() {
        return z.clone();
    }
    let order = magnitude_order(z);
    let mut out = DenseVector::zeros(z.len());
    for &i in &order[..r] {
        out[i] = z[i];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LambdaRegime {
    /// `lambda_1 <= 1/(a^2 mu)`: `lambda = lambda_1`, `t* = lambda mu a / 2`.
    Lambda1,
    /// `lambda = lambda_2`, `t* = sqrt(lambda mu) - 1/(2a)`.
    Lambda2,
    /// The step output was already `r`-sparse, so `lambda_1 = 0`; the solver
    /// reuses the smallest positive weight seen so far.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveLambda {
    pub lambda: f64,
    pub regime: LambdaRegime,
    /// `t*` for the prox weight `lambda * mu`.
    pub threshold: f64,
}

impl AdaptiveLambda {
    /// `lambda_1 = 0`: with `|z|_(r+1) = 0` there is nothing to threshold.
    pub fn is_degenerate(&self) -> bool {
        self.lambda == 0.0
    }
}

/// Regularisation weight that lets (at most) the `r` largest entries of the
/// step output `z` survive thresholding:
///
/// ```text
/// lambda_1 = 2 |z|_(r+1) / (a mu)
/// lambda_2 = (2 a |z|_(r) + 1)^2 / (4 a^2 mu)
/// ```
///
/// `lambda_1` is taken when `lambda_1 <= 1/(a^2 mu)`, otherwise `lambda_2`;
/// the threshold follows the matching regime. When `|z|_(r+1) = 0` this
/// returns `lambda = 0` in regime `Lambda1` with `t* = 0`.
pub fn adaptive_lambda(a: f64, mu: f64, z: &DenseVector, r: usize) -> Result<AdaptiveLambda> {
    crate::error::require_positive("a", a)?;
    crate::error::require_positive("mu", mu)?;
    check_sparsity(r, z.len())?;
    let order = magnitude_order(z);
    Ok(adaptive_lambda_ordered(a, mu, z, &order, r))
}

pub(crate) fn adaptive_lambda_ordered(
    a: f64,
    mu: f64,
    z: &DenseVector,
    order: &[usize],
    r: usize,
) -> AdaptiveLambda {
    let z_r = kth_magnitude(z, order, r);
    let z_r1 = kth_magnitude(z, order, r + 1);
    let lambda1 = 2.0 * z_r1 / (a * mu);
    if lambda1 <= 1.0 / (a * a * mu) {
        AdaptiveLambda {
            lambda: lambda1,
            regime: LambdaRegime::Lambda1,
            threshold: 0.5 * lambda1 * mu * a,
        }
    } else {
        let root = 2.0 * a * z_r + 1.0;
        let lambda2 = root * root / (4.0 * a * a * mu);
        AdaptiveLambda {
            lambda: lambda2,
            regime: LambdaRegime::Lambda2,
            threshold: (lambda2 * mu).sqrt() - 0.5 / a,
        }
    }
}
