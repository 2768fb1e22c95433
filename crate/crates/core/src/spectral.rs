//! Power iteration for the squared spectral norm `||F||_2^2`, i.e. the largest
//! eigenvalue of `F^T F`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::{DenseMatrix, DenseVector};

const DEFAULT_START_SEED: u64 = 0x5eed_0ff5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    /// Stop once the relative change of the Rayleigh quotient drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed of the Gaussian start vector used for cold starts.
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
            seed: DEFAULT_START_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    /// Estimate of the largest eigenvalue of `F^T F`.
    pub value: f64,
    pub iterations: usize,
    /// `false` if `max_iter` ran out before the tolerance was met; `value` is
    /// then the best estimate seen.
    pub converged: bool,
    /// Unit-norm approximation of the leading right singular vector.
    pub vector: DenseVector,
}

impl PowerIteration {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            ..Self::default()
        }
    }

    /// Deterministic unit-norm Gaussian start vector of length `n`.
    pub fn start_vector(&self, n: usize) -> DenseVector {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let v = DenseVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let norm = v.norm();
        v / norm
    }

    /// Cold start from the seeded vector.
    pub fn estimate(&self, f: &DenseMatrix) -> Result<SpectralEstimate> {
        self.run(f, self.start_vector(f.ncols()))
    }

    /// Warm start from `start` (typically the previous estimate's vector). Falls
    /// back to the seeded vector when `start` lies in the null space of `F`.
    pub fn estimate_from(&self, f: &DenseMatrix, start: &DenseVector) -> Result<SpectralEstimate> {
        if start.len() != f.ncols() {
            return Err(Error::DimensionMismatch {
                what: "power iteration start vector",
                expected: f.ncols(),
                found: start.len(),
            });
        }
        let norm = start.norm();
        if norm == 0.0 || !norm.is_finite() {
            return self.estimate(f);
        }
        match self.run(f, start / norm) {
            Err(Error::ZeroOperator) => self.estimate(f),
            other => other,
        }
    }

    fn run(&self, f: &DenseMatrix, mut v: DenseVector) -> Result<SpectralEstimate> {
        if f.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroOperator);
        }
        let mut previous: Option<f64> = None;
        let mut best = 0.0f64;
        let mut w = DenseVector::zeros(f.nrows());
        let mut u = DenseVector::zeros(f.ncols());
        for iteration in 1..=self.max_iter.max(1) {
            f.mul_to(&v, &mut w);
            let quotient = w.norm_squared();
            best = best.max(quotient);
            f.tr_mul_to(&w, &mut u);
            let norm = u.norm();
            if norm == 0.0 {
                return Err(Error::ZeroOperator);
            }
            if let Some(prev) = previous {
                if (quotient - prev).abs() <= self.tol * quotient {
                    return Ok(SpectralEstimate {
                        value: quotient,
                        iterations: iteration,
                        converged: true,
                        vector: v,
                    });
                }
            }
            previous = Some(quotient);
            v.copy_from(&u);
            v /= norm;
        }
        Ok(SpectralEstimate {
            value: best,
            iterations: self.max_iter.max(1),
            converged: false,
            vector: v,
        })
    }
}
