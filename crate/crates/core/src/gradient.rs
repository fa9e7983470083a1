//! Quaternion gradients, Jacobians and stationarity tests.
//!
//! The gradient column `∇_q f` holds the entries `∂f/∂q_n` (left GHR, μ = 1);
//! the conjugate gradient holds `∂f/∂q_n*`. For real-valued `f` the conjugate
//! gradient is the steepest-descent direction. Derivative-of-scalar-wrt-vector
//! is a row; gradients are its transposed columns.

use crate::calculus::{
    combine, component_partials, scaled_step, RealPartials, ScalarField, Side, VectorField,
    CANONICAL_MUS, DEFAULT_STEP,
};
use crate::error::Result;
use crate::linalg::{QMatrix, QVector};
use crate::quat::{rotated_basis, Quaternion};

/// Gradient and conjugate gradient of a scalar field.
///
/// For real-valued `f`, `conj_grad` is the entrywise conjugate of `grad`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    /// `∇_q f`, entries `∂f/∂q_n`.
    pub grad: QVector,
    /// `∇_{q*} f`, entries `∂f/∂q_n*`.
    pub conj_grad: QVector,
}

pub fn gradient(f: &ScalarField, q: &QVector) -> Result<GradientPair> {
    let n = q.len();
    let std = crate::quat::Basis::standard();
    let mut grad = QVector::zeros(n);
    let mut conj = QVector::zeros(n);
    for m in 0..n {
        let p = component_partials(f, q, m, scaled_step(DEFAULT_STEP, q, m))?;
        grad[m] = combine(&p, &std, Side::Left, false);
        conj[m] = combine(&p, &std, Side::Left, true);
    }
    Ok(GradientPair {
        grad,
        conj_grad: conj,
    })
}

/// Jacobian and conjugate Jacobian of a vector field: the `(m,n)` entries are
/// `∂f_m/∂q_n` and `∂f_m/∂q_n*`.
pub fn jacobian(field: &VectorField, q: &QVector) -> Result<(QMatrix, QMatrix)> {
    let rows = field.dim_out();
    let cols = field.dim_in();
    assert_eq!(q.len(), cols, "jacobian: point dimension mismatch");
    let std = crate::quat::Basis::standard();
    let mut jac = QMatrix::zeros(rows, cols);
    let mut jac_conj = QMatrix::zeros(rows, cols);
    for n in 0..cols {
        let h = scaled_step(DEFAULT_STEP, q, n);
        // one central difference of the whole vector per real direction
        let mut partials = [
            QVector::zeros(rows),
            QVector::zeros(rows),
            QVector::zeros(rows),
            QVector::zeros(rows),
        ];
        for (s, slot) in partials.iter_mut().enumerate() {
            let plus = field.eval_checked(&perturb(q, n, s, h))?;
            let minus = field.eval_checked(&perturb(q, n, s, -h))?;
            *slot = (&plus - &minus).scale_real(1.0 / (2.0 * h));
        }
        for m in 0..rows {
            let p = RealPartials {
                fa: partials[0][m],
                fb: partials[1][m],
                fc: partials[2][m],
                fd: partials[3][m],
            };
            jac[(m, n)] = combine(&p, &std, Side::Left, false);
            jac_conj[(m, n)] = combine(&p, &std, Side::Left, true);
        }
    }
    Ok((jac, jac_conj))
}

fn perturb(q: &QVector, coord: usize, direction: usize, amount: f64) -> QVector {
    let mut p = q.clone();
    let mut arr = p[coord].to_array();
    arr[direction] += amount;
    p[coord] = Quaternion::from_array(arr);
    p
}

/// Augmented conjugate gradient
/// `∇_{h*}f = (∇_{q*}f; ∇_{q^{i*}}f; ∇_{q^{j*}}f; ∇_{q^{k*}}f) ∈ H⁴ᴺ`.
pub fn augmented_gradient(f: &ScalarField, q: &QVector) -> Result<QVector> {
    augmented_gradient_impl(f, q, true)
}

/// Augmented unstarred derivative stack `(∇_q f; ∇_{qⁱ}f; ∇_{qʲ}f; ∇_{qᵏ}f)`.
pub fn augmented_gradient_unstarred(f: &ScalarField, q: &QVector) -> Result<QVector> {
    augmented_gradient_impl(f, q, false)
}

fn augmented_gradient_impl(f: &ScalarField, q: &QVector, conj: bool) -> Result<QVector> {
    let n = q.len();
    let mut out = QVector::zeros(4 * n);
    for m in 0..n {
        let p = component_partials(f, q, m, scaled_step(DEFAULT_STEP, q, m))?;
        for (alpha, mu) in CANONICAL_MUS.iter().enumerate() {
            let basis = rotated_basis(*mu)?;
            out[alpha * n + m] = combine(&p, &basis, Side::Left, conj);
        }
    }
    Ok(out)
}

/// Pseudo-gradient: central differences of the real view `f(r)` over the
/// block-ordered coordinates `r = (q_a; q_b; q_c; q_d) ∈ R⁴ᴺ`.
///
/// Independent of the GHR path; serves as the oracle side of the gradient
/// correspondence `∇_r f = Jᴴ ∇_{h*} f`. Intended for real-valued fields
/// (the real part of the evaluation is differentiated).
pub fn real_gradient(f: &ScalarField, q: &QVector, step: f64) -> Result<Vec<f64>> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let r0 = q.to_block_reals();
    let mut grad = vec![0.0; r0.len()];
    for (s, g) in grad.iter_mut().enumerate() {
        let h = step * r0[s].abs().max(1.0);
        let mut rp = r0.clone();
        rp[s] += h;
        let plus = f.eval_checked(&QVector::from_block_reals(&rp))?.re();
        rp[s] = r0[s] - h;
        let minus = f.eval_checked(&QVector::from_block_reals(&rp))?.re();
        *g = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// True iff `‖∇_{q*}f‖∞ ≤ tol`.
///
/// For real-valued fields this is equivalent to the vanishing of `∂f/∂q`,
/// `∂f/∂r`, `∂f/∂h` and `∂f/∂h*` at the same tolerance.
pub fn is_stationary(f: &ScalarField, q: &QVector, tol: f64) -> Result<bool> {
    assert!(tol > 0.0, "tolerance must be positive");
    let gp = gradient(f, q)?;
    Ok(gp.conj_grad.inf_norm() <= tol)
}
