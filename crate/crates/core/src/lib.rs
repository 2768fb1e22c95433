//! Sparse recovery from quasi-linear measurements `F(x) x = b`.
//!
//! The crate is organised bottom-up:
//!
//! - [`penalty`]: the fraction penalty `rho_a(t) = a|t| / (a|t| + 1)`, its
//!   closed-form proximal map and the two-regime threshold.
//! - [`operator`]: quasi-linear operators, the Landweber step and power
//!   iteration for `||F(y)||_2^2`.
//! - [`solver`]: iterative fraction thresholding (IFTA) with adaptive
//!   regularisation, plus soft (ISTA) and hard (IHTA) thresholding baselines.
//! - [`experiment`]: seeded problem generation and phase-transition sweeps.
//! - [`oracle`]: brute-force grid minimisation of the prox objective.
//! - [`cli`]: the `quasisparse` command-line front end.

// `!(x <= tol)` so that NaN fails a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiment;
pub mod operator;
pub mod oracle;
pub mod penalty;
pub mod solver;
mod spectral;

pub use error::{Error, Result};
pub use experiment::{ExperimentSpec, SweepReport, TrialRecord};
pub use operator::{LinearOperator, LogShiftOperator, QuasiLinearOperator};
pub use penalty::{PenaltyParams, Regime, ThresholdRegime};
pub use solver::{Algorithm, RecoveryResult, SolverConfig, Termination};
pub use spectral::{PowerIteration, SpectralEstimate};

/// Real n-vector used for signals, residuals and iterates.
pub type DenseVector = nalgebra::DVector<f64>;
/// Dense real matrix, column-major.
pub type DenseMatrix = nalgebra::DMatrix<f64>;

/// Shortest round-trip decimal for `v`, switching to exponent notation for
/// magnitudes below `1e-4` or from `1e16` up.
pub fn format_number(v: f64) -> String {
    let m = v.abs();
    if m != 0.0 && m.is_finite() && !(1e-4..1e16).contains(&m) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Serde adapter writing a [`DenseVector`] as a plain JSON array.
pub(crate) mod serde_vector {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::DenseVector;

    pub fn serialize<S: Serializer>(v: &DenseVector, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DenseVector, D::Error> {
        Vec::<f64>::deserialize(d).map(DenseVector::from_vec)
    }
}

#[cfg(test)]
mod tests {
    use super::format_number;

    #[test]
    fn numbers_round_trip() {
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-0.25), "-0.25");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(8.656437253484201e-8), "8.656437253484201e-8");
        assert_eq!(format_number(f64::NAN), "NaN");
        for v in [1e-4, 9.99e-5, 3.0e17, -1.0 / 3.0, 123456.789, 1e-300] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
    }
}
