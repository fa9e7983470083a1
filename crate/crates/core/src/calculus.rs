//! Numerical GHR differentiation.
//!
//! Derivatives of quaternion functions are computed from central differences
//! on the four real coordinates of each quaternion variable, recombined over
//! a rotated orthogonal basis `{1, i^μ, j^μ, k^μ}`:
//!
//! * left derivative      `∂f/∂q^μ  = ¼ (f_a − f_b i^μ − f_c j^μ − f_d k^μ)`
//! * left conjugate       `∂f/∂q^μ* = ¼ (f_a + f_b i^μ + f_c j^μ + f_d k^μ)`
//! * right variants multiply the basis from the left of the partials.
//!
//! Left and right derivatives coincide on real-valued functions. Derivatives
//! here are always numerical; closed forms appear only as test oracles.
//! Non-smooth fields are differentiated as-is — callers exclude known kinks.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::QVector;
use crate::quat::{rotated_basis, Basis, Quaternion};

/// Default finite-difference step, scaled by `max(1, |coordinate|)` at use.
pub const DEFAULT_STEP: f64 = 1e-5;

/// An evaluatable function `f: Hᴺ → H` (real-valued fields return quaternions
/// with zero vector part).
///
/// Evaluation must be deterministic and safe to call concurrently; the
/// closure is shared behind an `Arc`.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    dim: usize,
    f: Arc<dyn Fn(&QVector) -> Quaternion + Send + Sync>,
}

impl ScalarField {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&QVector) -> Quaternion + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            f: Arc::new(f),
        }
    }

    #[inline]
    pub fn eval(&self, q: &QVector) -> Quaternion {
        debug_assert_eq!(q.len(), self.dim, "field evaluated at wrong dimension");
        (self.f)(q)
    }

    /// Evaluate and reject non-finite values, carrying the offending point.
    pub fn eval_checked(&self, q: &QVector) -> Result<Quaternion> {
        let v = self.eval(q);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEval {
                point: q.as_slice().to_vec(),
            })
        }
    }

    /// Evaluate a one-dimensional field at a scalar.
    pub fn eval_scalar(&self, q: Quaternion) -> Quaternion {
        assert_eq!(self.dim, 1, "eval_scalar requires a one-dimensional field");
        self.eval(&QVector::from_vec(vec![q]))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The field with rotated output, `x ↦ f(x)^ν`.
    pub fn rotated(&self, nu: Quaternion) -> Result<ScalarField> {
        if nu.norm_sqr() == 0.0 {
            return Err(Error::ZeroOperand {
                op: "rotated field",
            });
        }
        let f = self.clone();
        Ok(ScalarField::new(
            format!("({})^nu", self.name),
            self.dim,
            move |x| f.eval(x).rotate(nu).expect("nonzero nu"),
        ))
    }

    /// The conjugated field `x ↦ f(x)*`.
    pub fn conjugated(&self) -> ScalarField {
        let f = self.clone();
        ScalarField::new(format!("({})*", self.name), self.dim, move |x| {
            f.eval(x).conjugate()
        })
    }

    /// Pointwise product `x ↦ f(x)·g(x)` (order preserved).
    pub fn product(&self, g: &ScalarField) -> ScalarField {
        assert_eq!(self.dim, g.dim, "product of fields of different dimension");
        let f = self.clone();
        let g = g.clone();
        ScalarField::new(format!("{}*{}", f.name, g.name), self.dim, move |x| {
            f.eval(x) * g.eval(x)
        })
    }

    /// Composition `x ↦ f(g(x))` of a one-dimensional `f` after `g`.
    pub fn compose(&self, g: &ScalarField) -> ScalarField {
        assert_eq!(self.dim, 1, "outer field of a composition must be scalar");
        let f = self.clone();
        let g = g.clone();
        ScalarField::new(format!("{}∘{}", f.name, g.name), g.dim, move |x| {
            f.eval_scalar(g.eval(x))
        })
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

/// An evaluatable vector function `F: Hᴺ → Hᴹ`.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    dim_in: usize,
    dim_out: usize,
    f: Arc<dyn Fn(&QVector) -> QVector + Send + Sync>,
}

impl VectorField {
    pub fn new(
        name: impl Into<String>,
        dim_in: usize,
        dim_out: usize,
        f: impl Fn(&QVector) -> QVector + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim_in,
            dim_out,
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, q: &QVector) -> QVector {
        debug_assert_eq!(q.len(), self.dim_in);
        (self.f)(q)
    }

    pub fn eval_checked(&self, q: &QVector) -> Result<QVector> {
        let v = self.eval(q);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEval {
                point: q.as_slice().to_vec(),
            })
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }
}

/// The four partials `∂f/∂q_a, ∂f/∂q_b, ∂f/∂q_c, ∂f/∂q_d` of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealPartials {
    pub fa: Quaternion,
    pub fb: Quaternion,
    pub fc: Quaternion,
    pub fd: Quaternion,
}

/// Which side the rotated basis multiplies the partials on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Selects one of the four GHR derivative variants at parameter μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhrSpec {
    pub mu: Quaternion,
    pub side: Side,
    pub conjugate: bool,
}

impl GhrSpec {
    pub fn left(mu: Quaternion) -> Self {
        Self {
            mu,
            side: Side::Left,
            conjugate: false,
        }
    }

    pub fn left_conj(mu: Quaternion) -> Self {
        Self {
            mu,
            side: Side::Left,
            conjugate: true,
        }
    }

    pub fn right(mu: Quaternion) -> Self {
        Self {
            mu,
            side: Side::Right,
            conjugate: false,
        }
    }

    pub fn right_conj(mu: Quaternion) -> Self {
        Self {
            mu,
            side: Side::Right,
            conjugate: true,
        }
    }
}

#[inline]
pub(crate) fn scaled_step(base: f64, q: &QVector, coord: usize) -> f64 {
    base * q[coord].modulus().max(1.0)
}

fn perturbed(q: &QVector, coord: usize, direction: usize, amount: f64) -> QVector {
    let mut p = q.clone();
    let mut arr = p[coord].to_array();
    arr[direction] += amount;
    p[coord] = Quaternion::from_array(arr);
    p
}

/// Central differences of `f` along the four real directions of `coord`.
///
/// Error is `O(step²)` for thrice-differentiable fields.
pub fn component_partials(
    f: &ScalarField,
    q: &QVector,
    coord: usize,
    step: f64,
) -> Result<RealPartials> {
    assert!(step > 0.0, "finite-difference step must be positive");
    assert!(coord < q.len(), "coordinate index out of range");
    let mut parts = [Quaternion::ZERO; 4];
    for (s, slot) in parts.iter_mut().enumerate() {
        let plus = f.eval_checked(&perturbed(q, coord, s, step))?;
        let minus = f.eval_checked(&perturbed(q, coord, s, -step))?;
        *slot = (plus - minus) / (2.0 * step);
    }
    Ok(RealPartials {
        fa: parts[0],
        fb: parts[1],
        fc: parts[2],
        fd: parts[3],
    })
}

/// Recombine partials into a GHR derivative over the given basis.
pub fn combine(partials: &RealPartials, basis: &Basis, side: Side, conjugate: bool) -> Quaternion {
    let sign = if conjugate { 1.0 } else { -1.0 };
    let tail = match side {
        Side::Left => partials.fb * basis.i + partials.fc * basis.j + partials.fd * basis.k,
        Side::Right => basis.i * partials.fb + basis.j * partials.fc + basis.k * partials.fd,
    };
    (partials.fa + tail * sign) * 0.25
}

/// GHR derivative of `f` with respect to coordinate `coord` at `q`,
/// using the default scaled step.
pub fn ghr(f: &ScalarField, q: &QVector, coord: usize, spec: GhrSpec) -> Result<Quaternion> {
    ghr_with_step(f, q, coord, spec, DEFAULT_STEP)
}

/// GHR derivative with an explicit base step (scaled by coordinate size).
pub fn ghr_with_step(
    f: &ScalarField,
    q: &QVector,
    coord: usize,
    spec: GhrSpec,
    step: f64,
) -> Result<Quaternion> {
    let basis = rotated_basis(spec.mu)?;
    let partials = component_partials(f, q, coord, scaled_step(step, q, coord))?;
    Ok(combine(&partials, &basis, spec.side, spec.conjugate))
}

/// The eight HR derivatives `∂f/∂q^ν` and `∂f/∂q^{ν*}`, ν ∈ {1, i, j, k}.
///
/// Each entry equals the corresponding right GHR derivative with μ = ν.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrTable {
    /// `∂f/∂q, ∂f/∂qⁱ, ∂f/∂qʲ, ∂f/∂qᵏ`.
    pub d: [Quaternion; 4],
    /// `∂f/∂q*, ∂f/∂qⁱ*, ∂f/∂qʲ*, ∂f/∂qᵏ*`.
    pub d_conj: [Quaternion; 4],
}

pub fn hr_table(f: &ScalarField, q: &QVector, coord: usize) -> Result<HrTable> {
    let partials = component_partials(f, q, coord, scaled_step(DEFAULT_STEP, q, coord))?;
    let mut d = [Quaternion::ZERO; 4];
    let mut d_conj = [Quaternion::ZERO; 4];
    for (idx, nu) in CANONICAL_MUS.iter().enumerate() {
        let basis = rotated_basis(*nu)?;
        d[idx] = combine(&partials, &basis, Side::Right, false);
        d_conj[idx] = combine(&partials, &basis, Side::Right, true);
    }
    Ok(HrTable { d, d_conj })
}

/// The canonical involution parameters `{1, i, j, k}`.
pub const CANONICAL_MUS: [Quaternion; 4] =
    [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];

/// Table of second partials `W[s][t] = ∂²f / ∂x_{m,s} ∂x_{n,t}` for a pair of
/// coordinates, by nested central differencing with one Richardson
/// extrapolation step (full and half step combined as `(4·fine − coarse)/3`),
/// which cancels the `O(h²)` truncation term. Exact through fifth-degree
/// polynomials up to rounding; this accuracy is what lets Newton finish
/// quadratics in a single step at tight gradient tolerances.
pub fn second_partials(
    f: &ScalarField,
    q: &QVector,
    m: usize,
    n: usize,
    step: f64,
) -> Result<[[Quaternion; 4]; 4]> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let hm = scaled_step(step, q, m);
    let hn = scaled_step(step, q, n);
    let coarse = second_partials_at(f, q, m, n, hm, hn)?;
    let fine = second_partials_at(f, q, m, n, 0.5 * hm, 0.5 * hn)?;
    let mut w = [[Quaternion::ZERO; 4]; 4];
    for s in 0..4 {
        for t in 0..4 {
            w[s][t] = (fine[s][t] * 4.0 - coarse[s][t]) * (1.0 / 3.0);
        }
    }
    Ok(w)
}

fn second_partials_at(
    f: &ScalarField,
    q: &QVector,
    m: usize,
    n: usize,
    hm: f64,
    hn: f64,
) -> Result<[[Quaternion; 4]; 4]> {
    let mut w = [[Quaternion::ZERO; 4]; 4];
    for (s, row) in w.iter_mut().enumerate() {
        for (t, slot) in row.iter_mut().enumerate() {
            // collapses to (f(+2h) - 2f + f(-2h)) / 4h² when (m,s) == (n,t)
            let pp = f.eval_checked(&perturbed(&perturbed(q, m, s, hm), n, t, hn))?;
            let pm = f.eval_checked(&perturbed(&perturbed(q, m, s, hm), n, t, -hn))?;
            let mp = f.eval_checked(&perturbed(&perturbed(q, m, s, -hm), n, t, hn))?;
            let mm = f.eval_checked(&perturbed(&perturbed(q, m, s, -hm), n, t, -hn))?;
            *slot = (pp - pm - mp + mm) / (4.0 * hm * hn);
        }
    }
    Ok(w)
}

/// Second GHR derivative `∂/∂q_n^{μ[*]} (∂f/∂q_m^{ν[*]})` from a table of
/// second partials: the inner derivative (parameter ν) acts on coordinate
/// `m`, the outer (parameter μ) on coordinate `n`.
pub fn second_ghr(
    w: &[[Quaternion; 4]; 4],
    inner: &Basis,
    inner_conj: bool,
    outer: &Basis,
    outer_conj: bool,
) -> Quaternion {
    let e_in = [inner.one, inner.i, inner.j, inner.k];
    let e_out = [outer.one, outer.i, outer.j, outer.k];
    let sign_in = if inner_conj { 1.0 } else { -1.0 };
    let sign_out = if outer_conj { 1.0 } else { -1.0 };
    let mut acc = Quaternion::ZERO;
    for t in 0..4 {
        let mut bracket = Quaternion::ZERO;
        for s in 0..4 {
            let c = if s == 0 { 1.0 } else { sign_in };
            bracket += w[s][t] * e_in[s] * c;
        }
        let c = if t == 0 { 1.0 } else { sign_out };
        acc += bracket * e_out[t] * c;
    }
    acc * (1.0 / 16.0)
}

/// The calculus rules the harness can check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Product,
    ProductConj,
    Chain,
    ChainConj,
    Rotation,
    Conjugate,
    Constant,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Product => "product",
            Rule::ProductConj => "product_conj",
            Rule::Chain => "chain",
            Rule::ChainConj => "chain_conj",
            Rule::Rotation => "rotation",
            Rule::Conjugate => "conjugate",
            Rule::Constant => "constant",
        };
        f.write_str(s)
    }
}

/// Evaluate both sides of the product rule
/// `∂(fg)/∂q^μ = f ∂g/∂q^μ + ∂f/∂q^{g(q)μ} g(q)` and return the absolute
/// difference. The rotation parameter of the second term treats `g` as
/// constant at the evaluation point. With `flip_sign` the second term is
/// negated, which deliberately breaks the identity (negative-control mode).
pub fn product_rule_residual(
    f: &ScalarField,
    g: &ScalarField,
    q: &QVector,
    mu: Quaternion,
    conjugate: bool,
    flip_sign: bool,
) -> Result<f64> {
    if mu.norm_sqr() == 0.0 {
        return Err(Error::ZeroOperand {
            op: "product rule mu",
        });
    }
    let fg = f.product(g);
    let spec = |m| {
        if conjugate {
            GhrSpec::left_conj(m)
        } else {
            GhrSpec::left(m)
        }
    };
    let mut worst = 0.0f64;
    for coord in 0..q.len() {
        let lhs = ghr(&fg, q, coord, spec(mu))?;
        let gq = g.eval_checked(q)?;
        let rot = gq * mu;
        if rot.norm_sqr() == 0.0 {
            return Err(Error::ZeroOperand {
                op: "product rule g(q)·mu",
            });
        }
        let term1 = f.eval_checked(q)? * ghr(g, q, coord, spec(mu))?;
        let term2 = ghr(f, q, coord, spec(rot))? * gq;
        let rhs = if flip_sign {
            term1 - term2
        } else {
            term1 + term2
        };
        worst = worst.max((lhs - rhs).modulus());
    }
    Ok(worst)
}

/// Residual of the *traditional* (HR-style) product rule
/// `∂(fg)/∂q^μ =? f ∂g/∂q^μ + ∂f/∂q^μ g`, which fails in general; used as the
/// documented counterexample check.
pub fn naive_product_rule_residual(
    f: &ScalarField,
    g: &ScalarField,
    q: &QVector,
    mu: Quaternion,
) -> Result<f64> {
    if mu.norm_sqr() == 0.0 {
        return Err(Error::ZeroOperand {
            op: "product rule mu",
        });
    }
    let fg = f.product(g);
    let mut worst = 0.0f64;
    for coord in 0..q.len() {
        let lhs = ghr(&fg, q, coord, GhrSpec::left(mu))?;
        let rhs = f.eval_checked(q)? * ghr(g, q, coord, GhrSpec::left(mu))?
            + ghr(f, q, coord, GhrSpec::left(mu))? * g.eval_checked(q)?;
        worst = worst.max((lhs - rhs).modulus());
    }
    Ok(worst)
}

/// Evaluate both sides of a named GHR calculus rule and return the largest
/// absolute residual over the coordinates of `q`.
///
/// Operand usage per rule:
/// * `product`/`product_conj` — both `f` and `g`; needs `g(q)·μ ≠ 0`.
/// * `chain`/`chain_conj` — composition `f∘g`; `f` must be one-dimensional.
/// * `rotation` — `f`, `μ`, `ν`: `(∂f/∂q^μ)^ν = ∂f^ν/∂q^{νμ}`.
/// * `conjugate` — `f`, `μ`: `(∂f/∂q^μ)* = ∂ᵣf*/∂q^{μ*}`.
/// * `constant` — `f` and the constant `ν`: both sided forms.
pub fn verify_rule(
    rule: Rule,
    f: &ScalarField,
    g: &ScalarField,
    q: &QVector,
    mu: Quaternion,
    nu: Quaternion,
) -> Result<f64> {
    if mu.norm_sqr() == 0.0 {
        return Err(Error::ZeroOperand {
            op: "verify_rule mu",
        });
    }
    match rule {
        Rule::Product => product_rule_residual(f, g, q, mu, false, false),
        Rule::ProductConj => product_rule_residual(f, g, q, mu, true, false),
        Rule::Chain | Rule::ChainConj => {
            let conjugate = rule == Rule::ChainConj;
            let comp = f.compose(g);
            let spec = |m| {
                if conjugate {
                    GhrSpec::left_conj(m)
                } else {
                    GhrSpec::left(m)
                }
            };
            let gq = g.eval_checked(q)?;
            let gq_vec = QVector::from_vec(vec![gq]);
            let mut worst = 0.0f64;
            for coord in 0..q.len() {
                let lhs = ghr(&comp, q, coord, spec(mu))?;
                let mut rhs = Quaternion::ZERO;
                for nu_c in CANONICAL_MUS {
                    let outer = ghr(f, &gq_vec, 0, GhrSpec::left(nu_c))?;
                    let g_rot = g.rotated(nu_c)?;
                    let inner = ghr(&g_rot, q, coord, spec(mu))?;
                    rhs += outer * inner;
                }
                worst = worst.max((lhs - rhs).modulus());
            }
            Ok(worst)
        }
        Rule::Rotation => {
            if nu.norm_sqr() == 0.0 {
                return Err(Error::ZeroOperand {
                    op: "rotation rule nu",
                });
            }
            let f_rot = f.rotated(nu)?;
            let mut worst = 0.0f64;
            for coord in 0..q.len() {
                let lhs = ghr(f, q, coord, GhrSpec::left(mu))?.rotate(nu)?;
                let rhs = ghr(&f_rot, q, coord, GhrSpec::left(nu * mu))?;
                let starred_lhs = ghr(f, q, coord, GhrSpec::left_conj(mu))?.rotate(nu)?;
                let starred_rhs = ghr(&f_rot, q, coord, GhrSpec::left_conj(nu * mu))?;
                worst = worst
                    .max((lhs - rhs).modulus())
                    .max((starred_lhs - starred_rhs).modulus());
            }
            Ok(worst)
        }
        Rule::Conjugate => {
            let f_conj = f.conjugated();
            let mut worst = 0.0f64;
            for coord in 0..q.len() {
                let lhs = ghr(f, q, coord, GhrSpec::left(mu))?.conjugate();
                let rhs = ghr(&f_conj, q, coord, GhrSpec::right_conj(mu))?;
                let starred_lhs = ghr(f, q, coord, GhrSpec::left_conj(mu))?.conjugate();
                let starred_rhs = ghr(&f_conj, q, coord, GhrSpec::right(mu))?;
                worst = worst
                    .max((lhs - rhs).modulus())
                    .max((starred_lhs - starred_rhs).modulus());
            }
            Ok(worst)
        }
        Rule::Constant => {
            if nu.norm_sqr() == 0.0 {
                return Err(Error::ZeroOperand {
                    op: "constant rule nu",
                });
            }
            let fc = f.clone();
            let left_const = ScalarField::new("nu*f", f.dim(), move |x| nu * fc.eval(x));
            let fc = f.clone();
            let right_const = ScalarField::new("f*nu", f.dim(), move |x| fc.eval(x) * nu);
            let mut worst = 0.0f64;
            for coord in 0..q.len() {
                let lhs1 = ghr(&left_const, q, coord, GhrSpec::left(mu))?;
                let rhs1 = nu * ghr(f, q, coord, GhrSpec::left(mu))?;
                let lhs2 = ghr(&right_const, q, coord, GhrSpec::left(mu))?;
                let rhs2 = ghr(f, q, coord, GhrSpec::left(nu * mu))? * nu;
                worst = worst
                    .max((lhs1 - rhs1).modulus())
                    .max((lhs2 - rhs2).modulus());
            }
            Ok(worst)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{rng, sample_quat};

    fn identity_field() -> ScalarField {
        ScalarField::new("q", 1, |x| x[0])
    }

    fn conj_field() -> ScalarField {
        ScalarField::new("q*", 1, |x| x[0].conjugate())
    }

    fn norm_sqr_field() -> ScalarField {
        ScalarField::new("|q|^2", 1, |x| Quaternion::real(x[0].norm_sqr()))
    }

    fn point(q: Quaternion) -> QVector {
        QVector::from_vec(vec![q])
    }

    #[test]
    fn partials_of_linear_fields_are_exact() {
        let mut r = rng(50);
        for _ in 0..10 {
            let q = point(sample_quat(&mut r));
            let p = component_partials(&identity_field(), &q, 0, 1e-5).unwrap();
            assert!(p.fa.approx_eq(Quaternion::ONE, 1e-10));
            assert!(p.fb.approx_eq(Quaternion::I, 1e-10));
            assert!(p.fc.approx_eq(Quaternion::J, 1e-10));
            assert!(p.fd.approx_eq(Quaternion::K, 1e-10));

            let p = component_partials(&conj_field(), &q, 0, 1e-5).unwrap();
            assert!(p.fa.approx_eq(Quaternion::ONE, 1e-10));
            assert!(p.fb.approx_eq(-Quaternion::I, 1e-10));
            assert!(p.fc.approx_eq(-Quaternion::J, 1e-10));
            assert!(p.fd.approx_eq(-Quaternion::K, 1e-10));
        }
    }

    #[test]
    fn partials_of_norm_sqr() {
        let q = point(Quaternion::new(1.0, 2.0, 0.0, 0.0));
        let p = component_partials(&norm_sqr_field(), &q, 0, 1e-5).unwrap();
        assert!(p.fa.approx_eq(Quaternion::real(2.0), 1e-9));
        assert!(p.fb.approx_eq(Quaternion::real(4.0), 1e-9));
        assert!(p.fc.approx_eq(Quaternion::ZERO, 1e-9));
        assert!(p.fd.approx_eq(Quaternion::ZERO, 1e-9));
    }

    #[test]
    fn ghr_worked_values() {
        let mut r = rng(51);
        for _ in 0..20 {
            let qv = point(sample_quat(&mut r));
            // ∂q/∂q = 1, ∂q/∂q* = -1/2
            let d = ghr(&identity_field(), &qv, 0, GhrSpec::left(Quaternion::ONE)).unwrap();
            assert!(d.approx_eq(Quaternion::ONE, 1e-9));
            let d = ghr(
                &identity_field(),
                &qv,
                0,
                GhrSpec::left_conj(Quaternion::ONE),
            )
            .unwrap();
            assert!(d.approx_eq(Quaternion::real(-0.5), 1e-9));
            // ∂q*/∂q = -1/2
            let d = ghr(&conj_field(), &qv, 0, GhrSpec::left(Quaternion::ONE)).unwrap();
            assert!(d.approx_eq(Quaternion::real(-0.5), 1e-9));
            // ∂|q|²/∂q = ½q*
            let d = ghr(&norm_sqr_field(), &qv, 0, GhrSpec::left(Quaternion::ONE)).unwrap();
            assert!(d.approx_eq(qv[0].conjugate() * 0.5, 1e-8 * (1.0 + qv[0].modulus())));
        }
    }

    #[test]
    fn left_right_agree_for_real_fields() {
        let mut r = rng(52);
        for _ in 0..20 {
            let qv = point(sample_quat(&mut r));
            let mu = sample_quat(&mut r);
            if mu.norm_sqr() < 1e-3 {
                continue;
            }
            let l = ghr(&norm_sqr_field(), &qv, 0, GhrSpec::left(mu)).unwrap();
            let rr = ghr(&norm_sqr_field(), &qv, 0, GhrSpec::right(mu)).unwrap();
            assert!(l.approx_eq(rr, 1e-6));
        }
    }

    #[test]
    fn hr_table_worked_values() {
        let mut r = rng(53);
        for _ in 0..10 {
            let qv = point(sample_quat(&mut r));
            let scale = 1.0 + qv[0].modulus();

            let t = hr_table(&norm_sqr_field(), &qv, 0).unwrap();
            assert!(t.d[0].approx_eq(qv[0].conjugate() * 0.5, 1e-8 * scale));
            assert!(t.d_conj[0].approx_eq(qv[0] * 0.5, 1e-8 * scale));
            // real-valued field: starred table is the conjugate of the table
            for idx in 0..4 {
                assert!(t.d_conj[idx].approx_eq(t.d[idx].conjugate(), 1e-8 * scale));
            }

            let t = hr_table(&identity_field(), &qv, 0).unwrap();
            assert!(t.d[0].approx_eq(Quaternion::ONE, 1e-9));
            assert!(t.d_conj[0].approx_eq(Quaternion::real(-0.5), 1e-9));
            assert!(t.d[1].approx_eq(Quaternion::ZERO, 1e-9));
            assert!(t.d_conj[1].approx_eq(Quaternion::real(0.5), 1e-9));
        }
    }

    #[test]
    fn hr_table_matches_right_ghr() {
        let mut r = rng(54);
        let fields = [identity_field(), conj_field(), norm_sqr_field()];
        for f in &fields {
            let qv = point(sample_quat(&mut r));
            let t = hr_table(f, &qv, 0).unwrap();
            for (idx, nu) in CANONICAL_MUS.iter().enumerate() {
                let d = ghr(f, &qv, 0, GhrSpec::right(*nu)).unwrap();
                let dc = ghr(f, &qv, 0, GhrSpec::right_conj(*nu)).unwrap();
                assert!(t.d[idx].approx_eq(d, 1e-10));
                assert!(t.d_conj[idx].approx_eq(dc, 1e-10));
            }
        }
    }

    #[test]
    fn step_halving_is_stable_for_smooth_fields() {
        let mut r = rng(55);
        let cube = ScalarField::new("q^3", 1, |x| x[0] * x[0] * x[0]);
        for _ in 0..10 {
            let qv = point(sample_quat(&mut r));
            let coarse =
                ghr_with_step(&cube, &qv, 0, GhrSpec::left(Quaternion::ONE), 1e-4).unwrap();
            let fine = ghr_with_step(&cube, &qv, 0, GhrSpec::left(Quaternion::ONE), 5e-5).unwrap();
            assert!((coarse - fine).modulus() < 1e-7 * (1.0 + coarse.modulus()));
        }
    }

    #[test]
    fn product_rule_holds_where_naive_fails() {
        let mut r = rng(56);
        let f = identity_field();
        let g = conj_field();
        for _ in 0..20 {
            let q = sample_quat(&mut r);
            if q.vector_part().modulus() < 0.1 || q.norm_sqr() < 0.05 {
                continue;
            }
            let qv = point(q);
            let ghr_res =
                product_rule_residual(&f, &g, &qv, Quaternion::ONE, false, false).unwrap();
            assert!(ghr_res < 1e-6, "GHR product rule residual {ghr_res}");
            let naive = naive_product_rule_residual(&f, &g, &qv, Quaternion::ONE).unwrap();
            // analytic gap is exactly |Im(q)|
            let gap = q.vector_part().modulus();
            assert!(
                naive > 0.5 * gap,
                "naive rule residual {naive} vs gap {gap}"
            );
        }
    }

    #[test]
    fn product_rule_on_square() {
        let mut r = rng(57);
        let f = identity_field();
        for _ in 0..20 {
            let q = sample_quat(&mut r);
            if q.norm_sqr() < 0.05 {
                continue;
            }
            let res =
                product_rule_residual(&f, &f, &point(q), Quaternion::ONE, false, false).unwrap();
            assert!(res < 1e-6, "residual {res}");
        }
    }

    #[test]
    fn flipped_product_rule_fails() {
        let f = identity_field();
        let q = point(Quaternion::new(0.3, 0.9, -0.4, 0.2));
        let res = product_rule_residual(&f, &f, &q, Quaternion::ONE, false, true).unwrap();
        assert!(res > 1e-3, "sign flip must break the rule, got {res}");
    }

    #[test]
    fn rotation_rule_on_real_field() {
        let mut r = rng(58);
        for _ in 0..20 {
            let q = point(sample_quat(&mut r));
            let mu = sample_quat(&mut r);
            let nu = sample_quat(&mut r);
            if mu.norm_sqr() < 1e-2 || nu.norm_sqr() < 1e-2 {
                continue;
            }
            let res = verify_rule(
                Rule::Rotation,
                &norm_sqr_field(),
                &identity_field(),
                &q,
                mu,
                nu,
            )
            .unwrap();
            assert!(res < 1e-6, "rotation residual {res}");
        }
    }

    #[test]
    fn chain_rule_on_composition() {
        let mut r = rng(59);
        let square = ScalarField::new("q^2", 1, |x| x[0] * x[0]);
        let inverse = ScalarField::new("1/q", 1, |x| x[0].conjugate() / x[0].norm_sqr());
        for _ in 0..20 {
            let q = sample_quat(&mut r);
            if q.norm_sqr() < 0.5 {
                continue;
            }
            let mu = sample_quat(&mut r);
            if mu.norm_sqr() < 1e-2 {
                continue;
            }
            let res = verify_rule(
                Rule::Chain,
                &square,
                &inverse,
                &point(q),
                mu,
                Quaternion::ONE,
            )
            .unwrap();
            assert!(res < 1e-6, "chain residual {res}");
            let res = verify_rule(
                Rule::ChainConj,
                &square,
                &inverse,
                &point(q),
                mu,
                Quaternion::ONE,
            )
            .unwrap();
            assert!(res < 1e-6, "chain_conj residual {res}");
        }
    }

    #[test]
    fn conjugate_and_constant_rules() {
        let mut r = rng(60);
        let square = ScalarField::new("q^2", 1, |x| x[0] * x[0]);
        for _ in 0..20 {
            let q = point(sample_quat(&mut r));
            let mu = sample_quat(&mut r);
            let nu = sample_quat(&mut r);
            if mu.norm_sqr() < 1e-2 || nu.norm_sqr() < 1e-2 {
                continue;
            }
            let res = verify_rule(Rule::Conjugate, &square, &square, &q, mu, nu).unwrap();
            assert!(res < 1e-6, "conjugate residual {res}");
            let res = verify_rule(Rule::Constant, &square, &square, &q, mu, nu).unwrap();
            assert!(res < 1e-6 * (1.0 + nu.modulus()), "constant residual {res}");
        }
    }

    #[test]
    fn nonfinite_evaluation_is_reported_with_point() {
        let inverse = ScalarField::new("1/q", 1, |x| x[0].conjugate() / x[0].norm_sqr());
        // one of the central-difference stencil points lands exactly on the pole
        let near_pole = point(Quaternion::real(1e-5));
        match component_partials(&inverse, &near_pole, 0, 1e-5) {
            Err(Error::NonFiniteEval { point }) => {
                assert_eq!(point.len(), 1);
                assert_eq!(point[0], Quaternion::ZERO);
            }
            other => panic!("expected NonFiniteEval, got {other:?}"),
        }
    }

    #[test]
    fn ghr_rejects_zero_mu() {
        let q = point(Quaternion::ONE);
        assert!(matches!(
            ghr(&identity_field(), &q, 0, GhrSpec::left(Quaternion::ZERO)),
            Err(Error::ZeroOperand { .. })
        ));
    }
}
