//! Deterministic corpus of test fields and random problem generators.
//!
//! Everything takes the caller's RNG; nothing seeds itself. Scalar corpus
//! fields are one-dimensional `H → H` polynomials and rationals whose poles
//! lie outside the sampling annulus used by [`random_point`], so the rule
//! harness can difference them safely.

use rand::Rng;

use crate::calculus::ScalarField;
use crate::linalg::{QMatrix, QVector};
use crate::qls::QlsProblem;
use crate::quat::Quaternion;
use crate::real::RealMatrix;

/// Quaternion with standard normal components.
pub fn random_quat(rng: &mut impl Rng) -> Quaternion {
    crate::qlms::gaussian_quat(rng, 1.0)
}

/// Unit quaternion drawn uniformly in direction.
pub fn random_unit(rng: &mut impl Rng) -> Quaternion {
    loop {
        let q = random_quat(rng);
        if q.modulus() > 1e-3 {
            return q / q.modulus();
        }
    }
}

/// Nonzero rotation parameter with modulus in `[0.5, 2]`.
pub fn random_mu(rng: &mut impl Rng) -> Quaternion {
    random_unit(rng) * rng.random_range(0.5..2.0)
}

/// Point whose entries have modulus in `[0.6, 2.5]` — inside every corpus
/// field's smooth region.
pub fn random_point(dim: usize, rng: &mut impl Rng) -> QVector {
    QVector::from_vec(
        (0..dim)
            .map(|_| random_unit(rng) * rng.random_range(0.6..2.5))
            .collect(),
    )
}

/// One-dimensional polynomial/rational corpus (12 fields).
pub fn scalar_corpus(rng: &mut impl Rng) -> Vec<ScalarField> {
    let nu1 = random_quat(rng);
    let nu2 = random_quat(rng);
    let nu3 = random_quat(rng);
    vec![
        ScalarField::new("q", 1, |x| x[0]),
        ScalarField::new("q_conj", 1, |x| x[0].conjugate()),
        ScalarField::new("q_sq", 1, |x| x[0] * x[0]),
        ScalarField::new("q_cube", 1, |x| x[0] * x[0] * x[0]),
        ScalarField::new("norm_sq", 1, |x| Quaternion::real(x[0].norm_sqr())),
        ScalarField::new("re_q", 1, |x| Quaternion::real(x[0].re())),
        ScalarField::new("sandwich", 1, move |x| {
            nu1 * x[0] * nu2 + nu3 * x[0].conjugate()
        }),
        ScalarField::new("q_inv", 1, |x| x[0].conjugate() / x[0].norm_sqr()),
        ScalarField::new("shifted_inv", 1, |x| {
            let s = Quaternion::real(4.0) + x[0];
            s.conjugate() / s.norm_sqr()
        }),
        ScalarField::new("cayley_like", 1, |x| x[0] / (1.0 + x[0].norm_sqr())),
        ScalarField::new("norm_quartic", 1, |x| {
            Quaternion::real(x[0].norm_sqr().powi(2))
        }),
        ScalarField::new("q_i_qconj", 1, |x| x[0] * Quaternion::I * x[0].conjugate()),
    ]
}

/// Subset of [`scalar_corpus`] guaranteed nonvanishing on the sampling
/// annulus, suitable as the right factor of the product rule.
pub fn nonvanishing_corpus(rng: &mut impl Rng) -> Vec<ScalarField> {
    let shift = Quaternion::real(rng.random_range(3.5..5.0));
    vec![
        ScalarField::new("q", 1, |x| x[0]),
        ScalarField::new("q_conj", 1, |x| x[0].conjugate()),
        ScalarField::new("q_sq", 1, |x| x[0] * x[0]),
        ScalarField::new("q_inv", 1, |x| x[0].conjugate() / x[0].norm_sqr()),
        ScalarField::new("norm_sq", 1, |x| Quaternion::real(x[0].norm_sqr())),
        ScalarField::new("shifted", 1, move |x| shift + x[0]),
        ScalarField::new("one_plus_normsq", 1, |x| {
            Quaternion::real(1.0 + x[0].norm_sqr())
        }),
    ]
}

/// (f, g) pairs for the product rules; `g` nonvanishing on the region.
pub fn product_pairs(rng: &mut impl Rng) -> Vec<(ScalarField, ScalarField)> {
    let fs = scalar_corpus(rng);
    let gs = nonvanishing_corpus(rng);
    let picks: [(usize, usize); 10] = [
        (0, 1), // q · q*  — the |q|² counterexample family
        (0, 0), // q · q = q²
        (1, 0),
        (2, 3),
        (4, 0),
        (6, 5),
        (7, 2),
        (3, 4),
        (9, 6),
        (5, 1),
    ];
    picks
        .iter()
        .map(|&(fi, gi)| (fs[fi].clone(), gs[gi].clone()))
        .collect()
}

/// (outer, inner) pairs for the chain rules; outer fields are smooth on all
/// of `H`, so any inner range is safe.
pub fn chain_pairs(rng: &mut impl Rng) -> Vec<(ScalarField, ScalarField)> {
    let fs = scalar_corpus(rng);
    // indices of fields defined everywhere (no poles): used as outer f
    let outer: [usize; 7] = [0, 1, 2, 3, 4, 5, 9];
    let inner: [usize; 6] = [0, 2, 6, 7, 8, 9];
    let mut pairs = Vec::with_capacity(10);
    for k in 0..10 {
        let f = fs[outer[k % outer.len()]].clone();
        let g = fs[inner[(k * 3 + 1) % inner.len()]].clone();
        pairs.push((f, g));
    }
    pairs
}

/// Real-valued PD quadratic `f(q) = rᵀMr + cᵀr` in the block coordinates,
/// with generally nonzero Hessian cross blocks.
#[derive(Clone)]
pub struct QuadraticField {
    pub field: ScalarField,
    pub m: RealMatrix,
    pub c: Vec<f64>,
}

impl QuadraticField {
    /// The unique minimizer `r* = -½M⁻¹c` mapped back to `Hᴺ`.
    pub fn minimizer(&self) -> QVector {
        let rhs: Vec<f64> = self.c.iter().map(|v| -0.5 * v).collect();
        let sol = self.m.lu().expect("PD by construction").solve_vec(&rhs);
        QVector::from_block_reals(&sol)
    }
}

pub fn quadratic_field(dim: usize, rng: &mut impl Rng) -> QuadraticField {
    let n4 = 4 * dim;
    let mut g = RealMatrix::zeros(n4, n4);
    for r in 0..n4 {
        for c in 0..n4 {
            g[(r, c)] = rng.random_range(-1.0..1.0);
        }
    }
    let m = g
        .transpose()
        .matmul(&g)
        .add(&RealMatrix::identity(n4).scale(0.5));
    let c: Vec<f64> = (0..n4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let m_clone = m.clone();
    let c_clone = c.clone();
    let field = ScalarField::new("quadratic_form", dim, move |q| {
        let r = q.to_block_reals();
        let mr = m_clone.matvec(&r);
        let quad: f64 = r.iter().zip(mr.iter()).map(|(a, b)| a * b).sum();
        let lin: f64 = r.iter().zip(c_clone.iter()).map(|(a, b)| a * b).sum();
        Quaternion::real(quad + lin)
    });
    QuadraticField { field, m, c }
}

/// Real-valued cubic-plus-quadratic polynomial in the block coordinates;
/// C³-smooth with a nonvanishing third-order term, for Taylor remainder
/// order checks.
pub fn cubic_field(dim: usize, rng: &mut impl Rng) -> ScalarField {
    let n4 = 4 * dim;
    let cubic: Vec<f64> = (0..n4).map(|_| rng.random_range(0.3..1.0)).collect();
    let quad: Vec<f64> = (0..n4).map(|_| rng.random_range(0.2..1.0)).collect();
    ScalarField::new("cubic_poly", dim, move |q| {
        let r = q.to_block_reals();
        let mut v = 0.0;
        for (s, &x) in r.iter().enumerate() {
            v += cubic[s] * x * x * x + quad[s] * x * x;
        }
        Quaternion::real(v)
    })
}

/// Real-valued corpus at a given dimension for the identity suites.
pub fn real_corpus(dim: usize, rng: &mut impl Rng) -> Vec<ScalarField> {
    let w = QVector::from_vec((0..dim).map(|_| random_quat(rng)).collect());
    let qf = quadratic_field(dim, rng);
    let qls = qls_random(dim + 2, dim, rng);
    let mut out = vec![
        ScalarField::new("norm_sq_total", dim, |x| {
            Quaternion::real(x.iter().map(|e| e.norm_sqr()).sum())
        }),
        ScalarField::new("norm_fourth", dim, |x| {
            Quaternion::real(x.iter().map(|e| e.norm_sqr()).sum::<f64>().powi(2))
        }),
        ScalarField::new("component_quartic", dim, |x| {
            Quaternion::real(x.iter().map(|e| e.norm_sqr().powi(2)).sum())
        }),
        ScalarField::new("linear_re", dim, move |x| Quaternion::real(w.dot_h(x).re())),
        qf.field,
        qls.objective_field(),
        cubic_field(dim, rng),
        ScalarField::new("smooth_rational", dim, |x| {
            let n: f64 = x.iter().map(|e| e.norm_sqr()).sum();
            Quaternion::real(n * n / (1.0 + n))
        }),
    ];
    if dim >= 2 {
        out.push(ScalarField::new("pair_product", dim, |x| {
            Quaternion::real(x[0].norm_sqr() * x[1].norm_sqr())
        }));
        out.push(ScalarField::new("mixed_components", dim, |x| {
            Quaternion::real(x[0].a * x[1].b + x[0].c * x[1].d + x[1].a * x[0].d)
        }));
    }
    out
}

/// Random full-rank-in-practice least-squares instance.
pub fn qls_random(m: usize, n: usize, rng: &mut impl Rng) -> QlsProblem {
    let mut a = QMatrix::zeros(m, n);
    for r in 0..m {
        for c in 0..n {
            a[(r, c)] = random_quat(rng);
        }
    }
    let b = QVector::from_vec((0..m).map(|_| random_quat(rng)).collect());
    QlsProblem::new(a, b).expect("m >= n by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::rng;

    #[test]
    fn corpus_sizes_and_dims() {
        let mut r = rng(140);
        let corpus = scalar_corpus(&mut r);
        assert!(corpus.len() >= 10);
        assert!(corpus.iter().all(|f| f.dim() == 1));
        assert!(product_pairs(&mut r).len() >= 10);
        assert!(chain_pairs(&mut r).len() >= 10);
        for dim in [1, 2, 4] {
            let fields = real_corpus(dim, &mut r);
            assert!(fields.len() >= 8);
            let p = random_point(dim, &mut r);
            for f in &fields {
                assert!(f.eval_checked(&p).unwrap().is_finite());
            }
        }
    }

    #[test]
    fn real_corpus_is_real_valued() {
        let mut r = rng(141);
        for dim in [1usize, 2] {
            for f in real_corpus(dim, &mut r) {
                for _ in 0..5 {
                    let p = random_point(dim, &mut r);
                    let v = f.eval(&p);
                    assert_eq!(v.vector_part().modulus(), 0.0, "{} not real", f.name());
                }
            }
        }
    }

    #[test]
    fn quadratic_minimizer_is_stationary() {
        let mut r = rng(142);
        let qf = quadratic_field(2, &mut r);
        let q_star = qf.minimizer();
        let gp = crate::gradient::gradient(&qf.field, &q_star).unwrap();
        assert!(gp.conj_grad.inf_norm() < 1e-6);
    }

    #[test]
    fn sample_points_avoid_poles() {
        let mut r = rng(143);
        for _ in 0..100 {
            let p = random_point(1, &mut r);
            let m = p[0].modulus();
            assert!((0.6..=2.5).contains(&m));
        }
    }
}
