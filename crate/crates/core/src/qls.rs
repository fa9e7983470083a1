//! Quaternion least squares.
//!
//! Minimizes `F(q) = ‖b - Aq‖²` for `A ∈ H^{M×N}`, `M ≥ N`, by the normal
//! equation `AᴴA q = Aᴴb` (as stated, not via an orthogonal factorization:
//! squared conditioning is acceptable at desk scale, and the condition
//! estimate is surfaced so callers can warn). Rank deficiency errors out;
//! there is no regularizing fallback.
//!
//! The objective is the flagship Newton test case: its analytic Hessian
//! bundle is `H_{qq*} = ½AᴴA` with vanishing cross blocks, so the full and
//! approximate Newton steps coincide and Newton converges in one step.

use serde::{Deserialize, Serialize};

use crate::calculus::ScalarField;
use crate::error::{Error, Result};
use crate::hessian::HessianBundle;
use crate::linalg::{solve_with_condition, QMatrix, QVector};

/// Overdetermined problem data `(A, b)` with `M ≥ N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QlsProblem {
    #[serde(rename = "A")]
    pub a: QMatrix,
    pub b: QVector,
}

impl QlsProblem {
    pub fn new(a: QMatrix, b: QVector) -> Result<Self> {
        if a.rows() < a.cols() {
            return Err(Error::DimensionMismatch {
                context: "qls requires M >= N",
                expected: a.cols(),
                found: a.rows(),
            });
        }
        if a.rows() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "qls right-hand side",
                expected: a.rows(),
                found: b.len(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// `F(q) = (b - Aq)ᴴ(b - Aq)`, a nonnegative real.
    pub fn objective(&self, q: &QVector) -> f64 {
        assert_eq!(q.len(), self.n(), "qls objective: dimension mismatch");
        let r = &self.b - &self.a.matvec(q);
        r.dot_h(&r).re()
    }

    /// Conjugate gradient `∇_{q*}F = -½Aᴴ(b - Aq)`.
    pub fn gradient(&self, q: &QVector) -> QVector {
        assert_eq!(q.len(), self.n(), "qls gradient: dimension mismatch");
        let r = &self.b - &self.a.matvec(q);
        self.a.hermitian().matvec(&r).scale_real(-0.5)
    }

    /// Constant Hessian bundle: `H_{qq*} = ½AᴴA`, cross blocks zero.
    pub fn hessian(&self) -> HessianBundle {
        let n = self.n();
        let hqq_conj = self.a.hermitian().matmul(&self.a).scale_real(0.5);
        HessianBundle {
            hqq_conj,
            cross: [
                QMatrix::zeros(n, n),
                QMatrix::zeros(n, n),
                QMatrix::zeros(n, n),
            ],
            hqq: None,
            asymmetry: 0.0,
        }
    }

    /// The objective as an evaluatable real-valued field.
    pub fn objective_field(&self) -> ScalarField {
        let p = self.clone();
        ScalarField::new("qls", self.n(), move |q| {
            crate::quat::Quaternion::real(p.objective(q))
        })
    }

    /// Solve the normal equation `AᴴA q = Aᴴb`.
    pub fn solve(&self) -> Result<QlsSolution> {
        let ah = self.a.hermitian();
        let gram = ah.matmul(&self.a);
        let rhs = ah.matvec(&self.b);
        let (q, condition_estimate) = solve_with_condition(&gram, &rhs)?;
        let residual = &self.b - &self.a.matvec(&q);
        let normal_residual = ah.matvec(&residual).norm();
        Ok(QlsSolution {
            q,
            residual_norm: residual.norm(),
            normal_residual,
            condition_estimate,
        })
    }
}

/// Solution of a least-squares problem with diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QlsSolution {
    /// Minimizer `(AᴴA)⁻¹Aᴴb = A⁺b`.
    pub q: QVector,
    /// `‖b - Aq‖`.
    pub residual_norm: f64,
    /// `‖Aᴴ(b - Aq)‖`; near zero at the solution (A-orthogonality).
    pub normal_residual: f64,
    /// 1-norm condition estimate of the embedded Gram matrix.
    pub condition_estimate: f64,
}
