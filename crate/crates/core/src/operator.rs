//! Quasi-linear measurement operators `A(x) = F(x) x`.
//!
//! An operator materialises the dense `m x n` matrix `F(y)` at an anchor point
//! `y`; everything else (application, adjoint, the Landweber step and the
//! spectral norm used for step sizes) is derived from that matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{PowerIteration, SpectralEstimate};
use crate::{DenseMatrix, DenseVector};

/// Default nonlinearity scale of [`LogShiftOperator`].
pub const DEFAULT_ETA: f64 = 0.003;

pub trait QuasiLinearOperator: Send + Sync {
    /// `(m, n)`: number of measurements and ambient dimension.
    fn dims(&self) -> (usize, usize);

    /// Materialise `F(anchor)`. Implementations may assume `anchor` has length `n`.
    fn matrix_unchecked(&self, anchor: &DenseVector) -> DenseMatrix;

    fn evaluate_matrix(&self, anchor: &DenseVector) -> Result<DenseMatrix> {
        check_len("anchor", self.dims().1, anchor.len())?;
        Ok(self.matrix_unchecked(anchor))
    }

    /// `F(anchor) x`.
    fn apply(&self, anchor: &DenseVector, x: &DenseVector) -> Result<DenseVector> {
        check_len("signal", self.dims().1, x.len())?;
        Ok(self.evaluate_matrix(anchor)? * x)
    }

    /// `F(anchor)^T v`.
    fn adjoint_apply(&self, anchor: &DenseVector, v: &DenseVector) -> Result<DenseVector> {
        check_len("measurement", self.dims().0, v.len())?;
        Ok(self.evaluate_matrix(anchor)?.tr_mul(v))
    }

    /// `B_mu(y) = y + mu F(y)^T (b - F(y) y)`.
    fn landweber_step(&self, y: &DenseVector, b: &DenseVector, mu: f64) -> Result<DenseVector> {
        check_len("measurement", self.dims().0, b.len())?;
        let f = self.evaluate_matrix(y)?;
        Ok(landweber_step_with(&f, y, b, mu).0)
    }

    /// Power-iteration estimate of `||F(y)||_2^2` to relative accuracy `tol`.
    fn spectral_norm_sq(
        &self,
        y: &DenseVector,
        tol: f64,
        max_iter: usize,
    ) -> Result<SpectralEstimate> {
        let f = self.evaluate_matrix(y)?;
        PowerIteration::new(tol, max_iter).estimate(&f)
    }

    /// `m < n`, the compressed-sensing regime.
    fn is_underdetermined(&self) -> bool {
        let (m, n) = self.dims();
        m < n
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

/// Landweber step on an already materialised `F(y)`. Also returns the
/// residual `b - F(y) y` it computed along the way.
pub fn landweber_step_with(
    f: &DenseMatrix,
    y: &DenseVector,
    b: &DenseVector,
    mu: f64,
) -> (DenseVector, DenseVector) {
    let residual = b - f * y;
    let mut step = y.clone();
    step.gemv_tr(mu, f, &residual, 1.0);
    (step, residual)
}

/// Plain linear operator, `F(y) = A` for every `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    matrix: DenseMatrix,
}

impl LinearOperator {
    pub fn new(matrix: DenseMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl QuasiLinearOperator for LinearOperator {
    fn dims(&self) -> (usize, usize) {
        self.matrix.shape()
    }

    fn matrix_unchecked(&self, _anchor: &DenseVector) -> DenseMatrix {
        self.matrix.clone()
    }
}

/// `F(y) = A1 + eta * ln(||y - x0||_2 + 1) * A2` with `A2` the all-ones matrix.
///
/// `ln(t + 1)` is 1-Lipschitz, so `||F(x) - F(y)||_F <= eta * sqrt(m n) * ||x - y||_2`
/// (see [`LogShiftOperator::lipschitz_constant`]). With `eta = 0` the operator
/// is exactly the linear map `A1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "OperatorDocument", try_from = "OperatorDocument")]
pub struct LogShiftOperator {
    a1: DenseMatrix,
    reference: DenseVector,
    eta: f64,
}

impl LogShiftOperator {
    pub fn new(a1: DenseMatrix, reference: DenseVector, eta: f64) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                expected: "finite and >= 0",
            });
        }
        check_len("reference vector", a1.ncols(), reference.len())?;
        Ok(Self { a1, reference, eta })
    }

    pub fn a1(&self) -> &DenseMatrix {
        &self.a1
    }

    pub fn reference(&self) -> &DenseVector {
        &self.reference
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// The scalar `eta * ln(||y - x0||_2 + 1)` multiplying the all-ones matrix.
    pub fn shift(&self, anchor: &DenseVector) -> f64 {
        self.eta * (anchor - &self.reference).norm().ln_1p()
    }

    /// Frobenius-norm Lipschitz constant `eta * sqrt(m n)` of `y -> F(y)`.
    pub fn lipschitz_constant(&self) -> f64 {
        let (m, n) = self.a1.shape();
        self.eta * ((m * n) as f64).sqrt()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl QuasiLinearOperator for LogShiftOperator {
    fn dims(&self) -> (usize, usize) {
        self.a1.shape()
    }

    fn matrix_unchecked(&self, anchor: &DenseVector) -> DenseMatrix {
        let shift = self.shift(anchor);
        self.a1.add_scalar(shift)
    }
}

/// On-disk form of a [`LogShiftOperator`]. `a1` is stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDocument {
    pub m: usize,
    pub n: usize,
    pub eta: f64,
    pub x0: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2_all_ones: bool,
}

impl From<LogShiftOperator> for OperatorDocument {
    fn from(op: LogShiftOperator) -> Self {
        let (m, n) = op.a1.shape();
        let a1 = op.a1.transpose().as_slice().to_vec();
        Self {
            m,
            n,
            eta: op.eta,
            x0: op.reference.as_slice().to_vec(),
            a1,
            a2_all_ones: true,
        }
    }
}

impl TryFrom<OperatorDocument> for LogShiftOperator {
    type Error = Error;

    fn try_from(doc: OperatorDocument) -> Result<Self> {
        if !doc.a2_all_ones {
            return Err(Error::Malformed(
                "only the all-ones coupling matrix A2 is supported".into(),
            ));
        }
        if doc.a1.len() != doc.m * doc.n {
            return Err(Error::Malformed(format!(
                "a1 has {} entries, expected m*n = {}",
                doc.a1.len(),
                doc.m * doc.n
            )));
        }
        if doc.x0.len() != doc.n {
            return Err(Error::Malformed(format!(
                "x0 has {} entries, expected n = {}",
                doc.x0.len(),
                doc.n
            )));
        }
        let a1 = DenseMatrix::from_row_slice(doc.m, doc.n, &doc.a1);
        LogShiftOperator::new(a1, DenseVector::from_vec(doc.x0), doc.eta)
    }
}
