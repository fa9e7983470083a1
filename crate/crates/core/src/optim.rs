//! Quaternion gradient descent and quaternion Newton.
//!
//! Both operate directly in `Hᴺ`. QGD takes steps `Δq = -4α ∇_{q*}f`; the
//! Newton step solves the augmented system through its Schur-complement
//! reduction so that only `N×N` and `3N×3N` solves remain, with the diagonal
//! approximation `Δq ≈ -H_{qq*}⁻¹ ∇_{q*}f` available as a cheaper method.
//! No line search by default: fixed step for QGD, unit step for Newton; a
//! backtracking option exists behind the config and defaults off.

use serde::{Deserialize, Serialize};

use crate::calculus::ScalarField;
use crate::error::{Error, Result};
use crate::gradient::{augmented_gradient, gradient};
use crate::hessian::{augmented_hessian, hessian_bundle, HessianBundle};
use crate::linalg::{j_matrix, real_adjoint, solve, solve_matrix, QMatrix, QVector};
use crate::real::RealMatrix;

/// Objective ceiling beyond which a run is declared divergent.
pub const DIVERGENCE_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Qgd,
    NewtonFull,
    NewtonApprox,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizeConfig {
    /// Step size α (QGD only; Newton uses unit steps).
    pub step_size: f64,
    pub max_iters: usize,
    /// Convergence threshold on `‖∇_{q*}f‖∞`.
    pub grad_tol: f64,
    /// ε added to `H_{qq*}` up front in the approximate Newton method.
    pub hessian_regularization: f64,
    pub method: Method,
    /// Halve the step while the objective increases (off by default).
    pub backtracking: bool,
}

impl OptimizeConfig {
    pub fn qgd(step_size: f64) -> Self {
        Self {
            step_size,
            max_iters: 1000,
            grad_tol: 1e-8,
            hessian_regularization: 0.0,
            method: Method::Qgd,
            backtracking: false,
        }
    }

    pub fn newton(method: Method) -> Self {
        Self {
            step_size: 1.0,
            max_iters: 100,
            grad_tol: 1e-8,
            hessian_regularization: 0.0,
            method,
            backtracking: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_size.is_nan() || self.step_size <= 0.0 {
            return Err(Error::InvalidConfig {
                reason: "step size must be positive",
            });
        }
        if self.grad_tol.is_nan() || self.grad_tol <= 0.0 {
            return Err(Error::InvalidConfig {
                reason: "gradient tolerance must be positive",
            });
        }
        if self.hessian_regularization < 0.0 {
            return Err(Error::InvalidConfig {
                reason: "regularization must be nonnegative",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIters,
    SingularHessian,
    Diverged,
}

/// Record of one minimization run. All sequences include the initial point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizeTrace {
    pub iterates: Vec<QVector>,
    pub objective_values: Vec<f64>,
    pub gradient_norms: Vec<f64>,
    pub termination: Termination,
}

impl OptimizeTrace {
    /// Iterations actually taken (steps, not points).
    pub fn iterations(&self) -> usize {
        self.objective_values.len().saturating_sub(1)
    }

    pub fn final_point(&self) -> &QVector {
        self.iterates
            .last()
            .expect("trace holds at least the initial point")
    }

    /// CSV rows `iter,objective,grad_norm` including the initial point.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,objective,grad_norm\n");
        for (it, (obj, gn)) in self
            .objective_values
            .iter()
            .zip(self.gradient_norms.iter())
            .enumerate()
        {
            s.push_str(&format!("{it},{obj},{gn}\n"));
        }
        s
    }
}

/// One QGD step `q - 4α ∇_{q*}f`.
pub fn qgd_step(f: &ScalarField, q: &QVector, alpha: f64) -> Result<QVector> {
    assert!(alpha > 0.0, "step size must be positive");
    let gp = gradient(f, q)?;
    Ok(q - &gp.conj_grad.scale_real(4.0 * alpha))
}

/// Full quaternion Newton increment via the Schur complement of `H_{qq*}` in
/// the augmented Hessian, assembled from the Hessian bundle and the
/// augmented gradient only.
///
/// Requires `H_{hh*}` positive definite, checked through its real image
/// `H_rr = Jᴴ H_{hh*} J`.
pub fn newton_step_full(f: &ScalarField, q: &QVector) -> Result<QVector> {
    let bundle = hessian_bundle(f, q)?;
    let g = augmented_gradient(f, q)?;
    newton_step_full_from(&bundle, &g)
}

/// Schur-complement Newton increment from precomputed pieces.
pub fn newton_step_full_from(bundle: &HessianBundle, aug_grad: &QVector) -> Result<QVector> {
    let n = bundle.dim();
    assert_eq!(aug_grad.len(), 4 * n, "augmented gradient length mismatch");
    let h_full = bundle.assemble_augmented()?;
    ensure_positive_definite(&h_full)?;

    let a = &bundle.hqq_conj;
    // top-right N×3N block B = [H_{qⁱq*} H_{qʲq*} H_{qᵏq*}]; C = Bᴴ
    let mut b = QMatrix::zeros(n, 3 * n);
    for (k, blk) in bundle.cross.iter().enumerate() {
        b.set_block(0, k * n, blk);
    }
    let c = b.hermitian();
    let d = h_full.block(n, n, 3 * n, 3 * n);

    let g1 = QVector::from_vec(aug_grad.as_slice()[..n].to_vec());
    let g_low = QVector::from_vec(aug_grad.as_slice()[n..].to_vec());

    let u = solve(a, &g1)?;
    // v_μ = -H_{q q^{μ*}} H_{qq*}⁻¹ ∇_{q*}f + ∇_{q^{μ*}}f, stacked
    let v = &g_low - &c.matvec(&u);
    // Schur complement T = D - C A⁻¹ B, solved explicitly
    let a_inv_b = solve_matrix(a, &b)?;
    let t = d.sub(&c.matmul(&a_inv_b));
    let y = solve(&t, &v)?;
    // Δq = -A⁻¹g₁ + L T⁻¹ v with L = A⁻¹B
    let correction = solve(a, &b.matvec(&y))?;
    Ok(&correction - &u)
}

/// Approximate Newton increment `-H_{qq*}⁻¹ ∇_{q*}f`.
///
/// `regularization` is added as `εI` up front; if the regularized block still
/// fails the positive-definiteness check, a single automatic shift
/// `ε = 1e-8 · tr(H)/N` is applied before giving up.
pub fn newton_step_approx(f: &ScalarField, q: &QVector, regularization: f64) -> Result<QVector> {
    let bundle = hessian_bundle(f, q)?;
    let g = augmented_gradient(f, q)?;
    newton_step_approx_from(&bundle, &g, regularization)
}

/// Approximate Newton increment from precomputed pieces.
pub fn newton_step_approx_from(
    bundle: &HessianBundle,
    aug_grad: &QVector,
    regularization: f64,
) -> Result<QVector> {
    let n = bundle.dim();
    let g1 = QVector::from_vec(aug_grad.as_slice()[..n].to_vec());
    let mut a = bundle.hqq_conj.clone();
    if regularization > 0.0 {
        a = a.add(&QMatrix::identity(n).scale_real(regularization));
    }
    if !real_adjoint(&a).is_positive_definite() {
        let trace: f64 = (0..n).map(|m| a[(m, m)].re()).sum();
        let eps = 1e-8 * trace.abs() / n as f64;
        a = a.add(&QMatrix::identity(n).scale_real(eps));
    }
    let dq = solve(&a, &g1)?;
    Ok(dq.scale_real(-1.0))
}

/// Oracle route: solve the 4N×4N augmented Newton system
/// `H_{hh*} Δh = -∇_{h*}f` with the directly differenced augmented Hessian,
/// returning the whole `Δh` stack.
pub fn augmented_newton_solve(f: &ScalarField, q: &QVector) -> Result<QVector> {
    let aug = augmented_hessian(f, q)?;
    let g = augmented_gradient(f, q)?;
    solve(&aug.m, &g.scale_real(-1.0))
}

fn ensure_positive_definite(h_full: &QMatrix) -> Result<()> {
    let n4 = h_full.rows();
    let n = n4 / 4;
    let j = j_matrix(n);
    let mapped = j.hermitian().matmul(h_full).matmul(&j);
    let mut h_rr = RealMatrix::zeros(n4, n4);
    for r in 0..n4 {
        for c in 0..n4 {
            h_rr[(r, c)] = mapped[(r, c)].re();
        }
    }
    h_rr.symmetrize();
    if h_rr.is_positive_definite() {
        Ok(())
    } else {
        Err(Error::Singular {
            condition: f64::INFINITY,
        })
    }
}

/// QGD iteration until `‖∇_{q*}f‖∞ ≤ grad_tol` or `max_iters`.
pub fn qgd_minimize(
    f: &ScalarField,
    q0: &QVector,
    config: &OptimizeConfig,
) -> Result<OptimizeTrace> {
    minimize_impl(f, q0, config, StepKind::Qgd)
}

/// Newton iteration with the configured step (full or approximate).
pub fn newton_minimize(
    f: &ScalarField,
    q0: &QVector,
    config: &OptimizeConfig,
) -> Result<OptimizeTrace> {
    let kind = match config.method {
        Method::NewtonApprox => StepKind::NewtonApprox,
        _ => StepKind::NewtonFull,
    };
    minimize_impl(f, q0, config, kind)
}

/// Dispatch on `config.method`.
pub fn minimize(f: &ScalarField, q0: &QVector, config: &OptimizeConfig) -> Result<OptimizeTrace> {
    match config.method {
        Method::Qgd => qgd_minimize(f, q0, config),
        Method::NewtonFull | Method::NewtonApprox => newton_minimize(f, q0, config),
    }
}

enum StepKind {
    Qgd,
    NewtonFull,
    NewtonApprox,
}

fn minimize_impl(
    f: &ScalarField,
    q0: &QVector,
    config: &OptimizeConfig,
    kind: StepKind,
) -> Result<OptimizeTrace> {
    config.validate()?;
    let mut q = q0.clone();
    let mut iterates = vec![q.clone()];
    let mut objectives = vec![f.eval_checked(&q)?.re()];
    let mut grad_norms = Vec::new();

    let gp = gradient(f, &q)?;
    grad_norms.push(gp.conj_grad.inf_norm());
    if grad_norms[0] <= config.grad_tol {
        return Ok(OptimizeTrace {
            iterates,
            objective_values: objectives,
            gradient_norms: grad_norms,
            termination: Termination::Converged,
        });
    }

    let mut termination = Termination::MaxIters;
    for _ in 0..config.max_iters {
        let step = match kind {
            StepKind::Qgd => {
                let gp = gradient(f, &q)?;
                gp.conj_grad.scale_real(-4.0 * config.step_size)
            }
            StepKind::NewtonFull => match newton_step_full(f, &q) {
                Ok(s) => s,
                Err(Error::Singular { .. }) => {
                    termination = Termination::SingularHessian;
                    break;
                }
                Err(e) => return Err(e),
            },
            StepKind::NewtonApprox => {
                match newton_step_approx(f, &q, config.hessian_regularization) {
                    Ok(s) => s,
                    Err(Error::Singular { .. }) => {
                        termination = Termination::SingularHessian;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        };

        let mut applied = step;
        if config.backtracking {
            let current = *objectives.last().expect("nonempty");
            for _ in 0..30 {
                let candidate = &q + &applied;
                if f.eval_checked(&candidate)?.re() <= current {
                    break;
                }
                applied = applied.scale_real(0.5);
            }
        }
        q = &q + &applied;

        let obj = f.eval_checked(&q)?.re();
        let gp = gradient(f, &q)?;
        iterates.push(q.clone());
        objectives.push(obj);
        grad_norms.push(gp.conj_grad.inf_norm());

        if !obj.is_finite() || obj.abs() > DIVERGENCE_GUARD {
            termination = Termination::Diverged;
            break;
        }
        if gp.conj_grad.inf_norm() <= config.grad_tol {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(OptimizeTrace {
        iterates,
        objective_values: objectives,
        gradient_norms: grad_norms,
        termination,
    })
}
