//! Quaternion scalar algebra.
//!
//! A quaternion is stored as four `f64` components `q = a + ib + jc + kd`
//! with the defining relations `i² = j² = k² = ijk = -1`. All operations are
//! pure; values are `Copy` and safe to share across threads.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Quaternion `a + ib + jc + kd`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Embed a real number into the real subfield.
    #[inline]
    pub const fn real(r: f64) -> Self {
        Self::new(r, 0.0, 0.0, 0.0)
    }

    /// Real (scalar) part `S_q`.
    #[inline]
    pub fn re(self) -> f64 {
        self.a
    }

    /// Vector (imaginary) part `V_q = ib + jc + kd` as a quaternion.
    #[inline]
    pub fn vector_part(self) -> Self {
        Self::new(0.0, self.b, self.c, self.d)
    }

    #[inline]
    pub fn conjugate(self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    /// Squared modulus `a² + b² + c² + d²`.
    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    #[inline]
    pub fn modulus(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplicative inverse `q* / |q|²`.
    pub fn inverse(self) -> Result<Self> {
        let n = self.norm_sqr();
        if n == 0.0 {
            return Err(Error::ZeroOperand { op: "inverse" });
        }
        Ok(self.conjugate() / n)
    }

    /// Rotation `q^μ = μ q μ⁻¹`. Preserves the real part and the modulus.
    pub fn rotate(self, mu: Quaternion) -> Result<Self> {
        let inv = mu
            .inverse()
            .map_err(|_| Error::ZeroOperand { op: "rotate" })?;
        Ok(mu * self * inv)
    }

    /// Polar decomposition `q = |q| (cos θ + axis · sin θ)` with `θ ∈ [0, π]`.
    ///
    /// For a real quaternion the axis is undefined; by convention it is `i`,
    /// with angle `0` for positive reals and `π` for negative ones.
    pub fn polar(self) -> Result<Polar> {
        let modulus = self.modulus();
        if modulus == 0.0 {
            return Err(Error::ZeroOperand { op: "polar" });
        }
        let v = self.vector_part();
        let vnorm = v.modulus();
        let angle = (self.a / modulus).clamp(-1.0, 1.0).acos();
        let axis = if vnorm == 0.0 {
            Quaternion::I
        } else {
            v / vnorm
        };
        Ok(Polar {
            modulus,
            axis,
            angle,
        })
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Componentwise closeness with an explicit absolute tolerance.
    #[inline]
    pub fn approx_eq(self, other: Quaternion, tol: f64) -> bool {
        (self - other).modulus() <= tol
    }

    /// Coordinates `[a, b, c, d]`.
    #[inline]
    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    #[inline]
    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

/// Polar form of a nonzero quaternion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub modulus: f64,
    /// Pure unit quaternion `V_q / |V_q|` (`i` by convention for real inputs).
    pub axis: Quaternion,
    /// Argument in `[0, π]`.
    pub angle: f64,
}

impl Polar {
    /// Rebuild `|q| (cos θ + axis · sin θ)`.
    pub fn reconstruct(self) -> Quaternion {
        (Quaternion::real(self.angle.cos()) + self.axis * self.angle.sin()) * self.modulus
    }
}

/// Rotated orthogonal basis `{1, i^μ, j^μ, k^μ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis {
    pub one: Quaternion,
    pub i: Quaternion,
    pub j: Quaternion,
    pub k: Quaternion,
}

impl Basis {
    /// The standard basis `{1, i, j, k}` (μ = 1).
    pub fn standard() -> Self {
        Self {
            one: Quaternion::ONE,
            i: Quaternion::I,
            j: Quaternion::J,
            k: Quaternion::K,
        }
    }
}

/// Basis `{1, i^μ, j^μ, k^μ}` obtained by rotating the standard one.
pub fn rotated_basis(mu: Quaternion) -> Result<Basis> {
    if mu.norm_sqr() == 0.0 {
        return Err(Error::ZeroOperand {
            op: "rotated_basis",
        });
    }
    Ok(Basis {
        one: Quaternion::ONE,
        i: Quaternion::I.rotate(mu)?,
        j: Quaternion::J.rotate(mu)?,
        k: Quaternion::K.rotate(mu)?,
    })
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(
            self.a + rhs.a,
            self.b + rhs.b,
            self.c + rhs.c,
            self.d + rhs.d,
        )
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(
            self.a - rhs.a,
            self.b - rhs.b,
            self.c - rhs.c,
            self.d - rhs.d,
        )
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, rhs: Quaternion) {
        *self = *self + rhs;
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, rhs: Quaternion) {
        *self = *self - rhs;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    /// Hamilton product; noncommutative.
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        let p = self;
        Quaternion::new(
            p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
            p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
            p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
            p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn div(self, s: f64) -> Quaternion {
        Quaternion::new(self.a / s, self.b / s, self.c / s, self.d / s)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i{:+}j{:+}k", self.a, self.b, self.c, self.d)
    }
}

// JSON form is the flat 4-array [a, b, c, d].
impl Serialize for Quaternion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(4)?;
        t.serialize_element(&self.a)?;
        t.serialize_element(&self.b)?;
        t.serialize_element(&self.c)?;
        t.serialize_element(&self.d)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Quaternion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct QuatVisitor;
        impl<'de> Visitor<'de> for QuatVisitor {
            type Value = Quaternion;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array [a, b, c, d] of four reals")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Quaternion, A::Error> {
                let mut v = [0.0f64; 4];
                for (idx, slot) in v.iter_mut().enumerate() {
                    *slot = seq
                        .next_element()?
                        .ok_or_else(|| serde::de::Error::invalid_length(idx, &self))?;
                }
                if seq.next_element::<f64>()?.is_some() {
                    return Err(serde::de::Error::invalid_length(5, &self));
                }
                Ok(Quaternion::from_array(v))
            }
        }
        deserializer.deserialize_tuple(4, QuatVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{rng, sample_quat};
    use rand::Rng;

    const TOL: f64 = 1e-12;

    #[test]
    fn basis_products() {
        assert_eq!(Quaternion::I * Quaternion::J, Quaternion::K);
        assert_eq!(Quaternion::J * Quaternion::K, Quaternion::I);
        assert_eq!(Quaternion::K * Quaternion::I, Quaternion::J);
        assert_eq!(Quaternion::I * Quaternion::I, -Quaternion::ONE);
        assert_eq!(
            Quaternion::I * Quaternion::J * Quaternion::K,
            -Quaternion::ONE
        );
    }

    #[test]
    fn mul_expands_over_basis() {
        // (1+i)(1+j) = 1 + i + j + k
        let p = Quaternion::ONE + Quaternion::I;
        let q = Quaternion::ONE + Quaternion::J;
        assert_eq!(p * q, Quaternion::new(1.0, 1.0, 1.0, 1.0));
        // real subfield
        assert_eq!(
            Quaternion::real(2.0) * Quaternion::real(3.0),
            Quaternion::real(6.0)
        );
    }

    #[test]
    fn mul_conjugate_reverses() {
        let mut r = rng(11);
        for _ in 0..100 {
            let p = sample_quat(&mut r);
            let q = sample_quat(&mut r);
            let lhs = (p * q).conjugate();
            let rhs = q.conjugate() * p.conjugate();
            assert!(lhs.approx_eq(rhs, TOL * (1.0 + lhs.modulus())));
        }
    }

    #[test]
    fn modulus_multiplicative() {
        let mut r = rng(12);
        for _ in 0..100 {
            let p = sample_quat(&mut r);
            let q = sample_quat(&mut r);
            let lhs = (p * q).modulus();
            let rhs = p.modulus() * q.modulus();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Quaternion::I.inverse().unwrap(), -Quaternion::I);
        assert_eq!(
            Quaternion::real(2.0).inverse().unwrap(),
            Quaternion::real(0.5)
        );
        let q = Quaternion::new(1.0, 1.0, 1.0, 1.0);
        assert_eq!(
            q.inverse().unwrap(),
            Quaternion::new(0.25, -0.25, -0.25, -0.25)
        );
        assert!(matches!(
            Quaternion::ZERO.inverse(),
            Err(Error::ZeroOperand { .. })
        ));
    }

    #[test]
    fn inverse_roundtrip_within_ulps() {
        let mut r = rng(13);
        for _ in 0..200 {
            let q = sample_quat(&mut r);
            if q.norm_sqr() < 1e-6 {
                continue;
            }
            let left = q * q.inverse().unwrap();
            let right = q.inverse().unwrap() * q;
            // 4 ulps at unit scale
            assert!(left.approx_eq(Quaternion::ONE, 4.0 * f64::EPSILON));
            assert!(right.approx_eq(Quaternion::ONE, 4.0 * f64::EPSILON));
        }
    }

    #[test]
    fn inverse_of_product_reverses() {
        let mut r = rng(14);
        for _ in 0..50 {
            let p = sample_quat(&mut r);
            let q = sample_quat(&mut r);
            if p.norm_sqr() < 1e-3 || q.norm_sqr() < 1e-3 {
                continue;
            }
            let lhs = (p * q).inverse().unwrap();
            let rhs = q.inverse().unwrap() * p.inverse().unwrap();
            assert!(lhs.approx_eq(rhs, 1e-12));
        }
    }

    #[test]
    fn pure_quaternion_properties() {
        let q = Quaternion::new(0.0, 1.5, -2.0, 0.5);
        assert_eq!(q.conjugate(), -q);
        let sq = q * q;
        assert!(sq.approx_eq(Quaternion::real(-q.norm_sqr()), TOL));
    }

    #[test]
    fn rotate_examples() {
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        assert!(q.rotate(Quaternion::ONE).unwrap().approx_eq(q, TOL));
        // i q i⁻¹ flips the j and k components
        let qi = q.rotate(Quaternion::I).unwrap();
        assert!(qi.approx_eq(Quaternion::new(1.0, 2.0, -3.0, -4.0), TOL));
        // reals commute with everything
        let mut r = rng(15);
        for _ in 0..20 {
            let mu = sample_quat(&mut r);
            if mu.norm_sqr() < 1e-3 {
                continue;
            }
            let five = Quaternion::real(5.0).rotate(mu).unwrap();
            assert!(five.approx_eq(Quaternion::real(5.0), TOL));
        }
        assert!(matches!(
            q.rotate(Quaternion::ZERO),
            Err(Error::ZeroOperand { .. })
        ));
    }

    #[test]
    fn rotate_preserves_real_part_and_modulus() {
        let mut r = rng(16);
        for _ in 0..100 {
            let q = sample_quat(&mut r);
            let mu = sample_quat(&mut r);
            if mu.norm_sqr() < 1e-3 {
                continue;
            }
            let rq = q.rotate(mu).unwrap();
            assert!((rq.re() - q.re()).abs() < 1e-12 * (1.0 + q.re().abs()));
            assert!((rq.modulus() - q.modulus()).abs() < 1e-12 * (1.0 + q.modulus()));
        }
    }

    #[test]
    fn rotation_identities() {
        // pq = q^p p, (q^μ)* = (q*)^μ, q^{μν} = (q^ν)^μ
        let mut r = rng(17);
        for _ in 0..100 {
            let p = sample_quat(&mut r);
            let q = sample_quat(&mut r);
            let mu = sample_quat(&mut r);
            let nu = sample_quat(&mut r);
            if p.norm_sqr() < 1e-3 || mu.norm_sqr() < 1e-3 || nu.norm_sqr() < 1e-3 {
                continue;
            }
            let scale = 1.0 + p.modulus() * q.modulus();
            assert!((p * q).approx_eq(q.rotate(p).unwrap() * p, 1e-12 * scale));
            assert!(q.rotate(mu).unwrap().conjugate().approx_eq(
                q.conjugate().rotate(mu).unwrap(),
                1e-12 * (1.0 + q.modulus())
            ));
            let lhs = q.rotate(mu * nu).unwrap();
            let rhs = q.rotate(nu).unwrap().rotate(mu).unwrap();
            assert!(lhs.approx_eq(rhs, 1e-12 * (1.0 + q.modulus())));
        }
    }

    #[test]
    fn polar_examples() {
        let p = Quaternion::ONE.polar().unwrap();
        assert_eq!((p.modulus, p.axis, p.angle), (1.0, Quaternion::I, 0.0));

        let p = Quaternion::I.polar().unwrap();
        assert!((p.modulus - 1.0).abs() < TOL);
        assert!(p.axis.approx_eq(Quaternion::I, TOL));
        assert!((p.angle - std::f64::consts::FRAC_PI_2).abs() < TOL);

        // 1 + i√3 → (2, i, π/3)
        let q = Quaternion::new(1.0, 3f64.sqrt(), 0.0, 0.0);
        let p = q.polar().unwrap();
        assert!((p.modulus - 2.0).abs() < TOL);
        assert!(p.axis.approx_eq(Quaternion::I, TOL));
        assert!((p.angle - std::f64::consts::FRAC_PI_3).abs() < TOL);

        // negative real: angle π by convention
        let p = Quaternion::real(-3.0).polar().unwrap();
        assert!((p.angle - std::f64::consts::PI).abs() < TOL);
        assert!(p.reconstruct().approx_eq(Quaternion::real(-3.0), 1e-12));

        assert!(Quaternion::ZERO.polar().is_err());
    }

    #[test]
    fn polar_reconstructs() {
        let mut r = rng(18);
        for _ in 0..100 {
            let q = sample_quat(&mut r);
            if q.norm_sqr() < 1e-6 {
                continue;
            }
            let p = q.polar().unwrap();
            assert!(p.angle >= 0.0 && p.angle <= std::f64::consts::PI);
            assert!(p.reconstruct().approx_eq(q, 1e-12 * q.modulus().max(1.0)));
        }
    }

    #[test]
    fn rotated_basis_relations() {
        let b = rotated_basis(Quaternion::ONE).unwrap();
        assert_eq!(
            (b.i, b.j, b.k),
            (Quaternion::I, Quaternion::J, Quaternion::K)
        );

        // μ = j: (1, -i, j, -k)
        let b = rotated_basis(Quaternion::J).unwrap();
        assert!(b.i.approx_eq(-Quaternion::I, TOL));
        assert!(b.j.approx_eq(Quaternion::J, TOL));
        assert!(b.k.approx_eq(-Quaternion::K, TOL));

        let mut r = rng(19);
        for _ in 0..50 {
            let raw = sample_quat(&mut r);
            if raw.norm_sqr() < 1e-3 {
                continue;
            }
            let mu = raw / raw.modulus();
            let b = rotated_basis(mu).unwrap();
            for unit in [b.i, b.j, b.k] {
                assert!((unit * unit).approx_eq(-Quaternion::ONE, TOL));
            }
            assert!((b.i * b.j * b.k).approx_eq(-Quaternion::ONE, TOL));
        }
        assert!(rotated_basis(Quaternion::ZERO).is_err());
    }

    #[test]
    fn noncommutativity_witness() {
        let mut r = rng(20);
        let mut found = false;
        for _ in 0..20 {
            let p = sample_quat(&mut r);
            let q = sample_quat(&mut r);
            if (p * q - q * p).modulus() > 1e-6 {
                found = true;
                break;
            }
        }
        assert!(found, "random products should generally not commute");
    }

    #[test]
    fn serde_roundtrip_exact() {
        let mut r = rng(21);
        for _ in 0..50 {
            let q = sample_quat(&mut r) * r.random_range(1e-8..1e8f64);
            let json = serde_json::to_string(&q).unwrap();
            let back: Quaternion = serde_json::from_str(&json).unwrap();
            assert_eq!(q, back);
        }
        let json = serde_json::to_string(&Quaternion::new(1.0, -2.5, 0.0, 4.25)).unwrap();
        assert_eq!(json, "[1.0,-2.5,0.0,4.25]");
    }
}
