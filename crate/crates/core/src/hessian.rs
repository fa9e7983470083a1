//! Quaternion Hessians, Taylor models and the real-correspondence identities.
//!
//! The Hessian blocks follow the convention of the augmented matrix layout:
//! the `(m,n)` entry of `H_{q^μ q^{ν*}}` is `∂/∂q_n^μ (∂f/∂q_m^{ν*})` — the
//! inner (starred, parameter ν) derivative acts on the row coordinate, the
//! outer (parameter μ) on the column coordinate. This is the layout under
//! which `H_rr = Jᴴ H_{hh*} J` holds, which the tests pin down.
//!
//! All Hessian routines expect real-valued fields.

use crate::calculus::{second_ghr, second_partials, ScalarField, CANONICAL_MUS};
use crate::error::Result;
use crate::gradient::gradient;
use crate::linalg::{j_matrix, QMatrix, QVector};
use crate::quat::{rotated_basis, Basis, Quaternion};
use crate::real::RealMatrix;

/// Base step for the Richardson-extrapolated nested differences behind the
/// GHR Hessian routines; much larger than the gradient step because second
/// differences amplify rounding and the extrapolation removes the `O(h²)`
/// truncation error.
pub const HESSIAN_STEP: f64 = 1e-2;

/// Step for the plain central differences of the real-Hessian oracle.
pub const REAL_HESSIAN_STEP: f64 = 1e-4;

/// The four blocks `H_{q^μ q*}`, μ ∈ {1, i, j, k}, of a real-valued field.
///
/// `hqq_conj` is symmetrized to `(H + Hᴴ)/2` after computation;
/// `asymmetry` records the pre-symmetrization deviation as a diagnostic.
#[derive(Debug, Clone)]
pub struct HessianBundle {
    /// `H_{qq*}` (Hermitian for real-valued twice-differentiable fields).
    pub hqq_conj: QMatrix,
    /// `H_{qⁱq*}, H_{qʲq*}, H_{qᵏq*}`.
    pub cross: [QMatrix; 3],
    /// `H_{qq}`, only on request.
    pub hqq: Option<QMatrix>,
    /// Max entry modulus of `H_{qq*} - H_{qq*}ᴴ` before symmetrization.
    pub asymmetry: f64,
}

impl HessianBundle {
    /// Block for μ ∈ {1, i, j, k} by index.
    pub fn mu_block(&self, alpha: usize) -> &QMatrix {
        match alpha {
            0 => &self.hqq_conj,
            1..=3 => &self.cross[alpha - 1],
            _ => panic!("mu index out of range"),
        }
    }

    pub fn dim(&self) -> usize {
        self.hqq_conj.rows()
    }

    /// Reconstruct the full augmented Hessian from the first block row using
    /// the rotation relations of real-valued fields:
    /// `H_{q^μβ q^{μα*}} = (H_{q^γ q*})^{μα}` with `γ` the axis of `μα·μβ`.
    pub fn assemble_augmented(&self) -> Result<QMatrix> {
        let n = self.dim();
        // axis of μα·μβ over {1,i,j,k}; signs are irrelevant to rotations
        const AXIS: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];
        let mut big = QMatrix::zeros(4 * n, 4 * n);
        for (alpha, axis_row) in AXIS.iter().enumerate() {
            for (beta, &axis) in axis_row.iter().enumerate() {
                let blk = self.mu_block(axis);
                let placed = if alpha == 0 {
                    blk.clone()
                } else {
                    blk.rotate(CANONICAL_MUS[alpha])?
                };
                big.set_block(alpha * n, beta * n, &placed);
            }
        }
        Ok(big)
    }
}

/// The 4N×4N augmented Hessian `H_{hh*}` with all sixteen blocks computed by
/// nested finite differencing (no rotation shortcuts). Hermitian for
/// real-valued fields.
#[derive(Debug, Clone)]
pub struct AugmentedHessian {
    pub m: QMatrix,
}

impl AugmentedHessian {
    pub fn dim(&self) -> usize {
        self.m.rows() / 4
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.m.hermitian_deviation()
    }
}

fn canonical_bases() -> Result<[Basis; 4]> {
    Ok([
        rotated_basis(CANONICAL_MUS[0])?,
        rotated_basis(CANONICAL_MUS[1])?,
        rotated_basis(CANONICAL_MUS[2])?,
        rotated_basis(CANONICAL_MUS[3])?,
    ])
}

/// Hessian bundle of a real-valued field by nested central differences.
pub fn hessian_bundle(f: &ScalarField, q: &QVector) -> Result<HessianBundle> {
    hessian_bundle_impl(f, q, false)
}

/// Same as [`hessian_bundle`], additionally filling `H_{qq}`.
pub fn hessian_bundle_with_hqq(f: &ScalarField, q: &QVector) -> Result<HessianBundle> {
    hessian_bundle_impl(f, q, true)
}

fn hessian_bundle_impl(f: &ScalarField, q: &QVector, with_hqq: bool) -> Result<HessianBundle> {
    let n = q.len();
    let bases = canonical_bases()?;
    let std = &bases[0];
    let mut blocks = [
        QMatrix::zeros(n, n),
        QMatrix::zeros(n, n),
        QMatrix::zeros(n, n),
        QMatrix::zeros(n, n),
    ];
    let mut hqq = if with_hqq {
        Some(QMatrix::zeros(n, n))
    } else {
        None
    };
    for m in 0..n {
        for c in 0..n {
            let w = second_partials(f, q, m, c, HESSIAN_STEP)?;
            for (beta, block) in blocks.iter_mut().enumerate() {
                block[(m, c)] = second_ghr(&w, std, true, &bases[beta], false);
            }
            if let Some(h) = hqq.as_mut() {
                h[(m, c)] = second_ghr(&w, std, false, std, false);
            }
        }
    }
    let [hqq_conj_raw, bi, bj, bk] = blocks;
    let asymmetry = hqq_conj_raw.hermitian_deviation();
    let hqq_conj = hqq_conj_raw.add(&hqq_conj_raw.hermitian()).scale_real(0.5);
    Ok(HessianBundle {
        hqq_conj,
        cross: [bi, bj, bk],
        hqq,
        asymmetry,
    })
}

/// Full augmented Hessian by direct nested differencing of all 16 blocks.
pub fn augmented_hessian(f: &ScalarField, q: &QVector) -> Result<AugmentedHessian> {
    let n = q.len();
    let bases = canonical_bases()?;
    let mut big = QMatrix::zeros(4 * n, 4 * n);
    for m in 0..n {
        for c in 0..n {
            let w = second_partials(f, q, m, c, HESSIAN_STEP)?;
            for alpha in 0..4 {
                for beta in 0..4 {
                    big[(alpha * n + m, beta * n + c)] =
                        second_ghr(&w, &bases[alpha], true, &bases[beta], false);
                }
            }
        }
    }
    Ok(AugmentedHessian { m: big })
}

/// Second GHR derivative `∂²f/∂q^μ ∂q^ν` of a one-dimensional field with
/// explicit conjugation flags on both parameters (inner derivative first).
pub fn second_derivative(
    f: &ScalarField,
    q: &QVector,
    outer: (Quaternion, bool),
    inner: (Quaternion, bool),
) -> Result<Quaternion> {
    let w = second_partials(f, q, 0, 0, HESSIAN_STEP)?;
    let inner_basis = rotated_basis(inner.0)?;
    let outer_basis = rotated_basis(outer.0)?;
    Ok(second_ghr(&w, &inner_basis, inner.1, &outer_basis, outer.1))
}

/// Symmetric real Hessian of the quadrivariate view `f(r)`, `r` in block
/// order `(q_a; q_b; q_c; q_d)`, by plain real central differences.
///
/// This is the independent oracle side of `H_rr = Jᴴ H_{hh*} J`.
pub fn real_hessian(f: &ScalarField, q: &QVector, step: f64) -> Result<RealMatrix> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let r0 = q.to_block_reals();
    let dim = r0.len();
    let eval =
        |r: &[f64]| -> Result<f64> { Ok(f.eval_checked(&QVector::from_block_reals(r))?.re()) };
    let mut h = RealMatrix::zeros(dim, dim);
    for s in 0..dim {
        let hs = step * r0[s].abs().max(1.0);
        for t in s..dim {
            let ht = step * r0[t].abs().max(1.0);
            let at = |ds: f64, dt: f64| -> Result<f64> {
                let mut r = r0.clone();
                r[s] += ds;
                r[t] += dt;
                eval(&r)
            };
            // collapses to (f(+2h) - 2f + f(-2h)) / 4h² on the diagonal
            let v = (at(hs, ht)? - at(hs, -ht)? - at(-hs, ht)? + at(-hs, -ht)?) / (4.0 * hs * ht);
            h[(s, t)] = v;
            h[(t, s)] = v;
        }
    }
    Ok(h)
}

/// Second-order Taylor model in `Hᴺ`:
/// `f(q) + 4ℜ(∂f/∂q · Δq) + 2 Σ_μ ℜ(Δqᴴ H_{q^μ q*} Δq^μ)`.
///
/// Remainder is `O(‖Δq‖³)` for C³ fields and vanishes for quadratics.
pub fn taylor2(f: &ScalarField, q: &QVector, dq: &QVector) -> Result<f64> {
    assert_eq!(q.len(), dq.len(), "taylor2: increment dimension mismatch");
    let base = f.eval_checked(q)?.re();
    let gp = gradient(f, q)?;
    let bundle = hessian_bundle(f, q)?;
    // first order: 4ℜ(Σ_n ∂f/∂q_n · Δq_n)
    let mut first = Quaternion::ZERO;
    for n in 0..q.len() {
        first += gp.grad[n] * dq[n];
    }
    // second order: 2 Σ_μ ℜ(Δqᴴ H_μ Δq^μ)
    let mut second = 0.0;
    for (alpha, mu) in CANONICAL_MUS.iter().enumerate() {
        let dq_mu = if alpha == 0 {
            dq.clone()
        } else {
            dq.rotate(*mu)?
        };
        let h_dq = bundle.mu_block(alpha).matvec(&dq_mu);
        second += dq.dot_h(&h_dq).re();
    }
    Ok(base + 4.0 * first.re() + 2.0 * second)
}

/// Residual of the eigenvalue-shift identity
/// `H_{hh*} − λI = (1/16) J (H_rr − 4λI) Jᴴ` given both Hessians.
pub fn eigen_shift_residual(h_hh: &QMatrix, h_rr: &RealMatrix, lambda: f64) -> f64 {
    let dim4 = h_hh.rows();
    assert_eq!(h_rr.rows(), dim4, "eigen shift: dimension mismatch");
    let n = dim4 / 4;
    let j = j_matrix(n);
    let lhs = h_hh.sub(&QMatrix::identity(dim4).scale_real(lambda));
    let mut shifted = QMatrix::zeros(dim4, dim4);
    for r in 0..dim4 {
        for c in 0..dim4 {
            let v = h_rr[(r, c)] - if r == c { 4.0 * lambda } else { 0.0 };
            shifted[(r, c)] = Quaternion::real(v);
        }
    }
    let rhs = j
        .matmul(&shifted)
        .matmul(&j.hermitian())
        .scale_real(1.0 / 16.0);
    lhs.sub(&rhs).max_abs()
}

/// Evaluate the eigenvalue-shift identity for a field at a point, with the
/// real Hessian computed by real finite differences.
pub fn eigen_shift_check(f: &ScalarField, q: &QVector, lambda: f64) -> Result<f64> {
    let aug = augmented_hessian(f, q)?;
    let h_rr = real_hessian(f, q, REAL_HESSIAN_STEP)?;
    Ok(eigen_shift_residual(&aug.m, &h_rr, lambda))
}
