//! Quaternion calculus and optimization built on GHR derivatives.
//!
//! The crate provides, bottom up:
//!
//! * [`quat`] — exact quaternion scalar algebra: arithmetic, conjugation,
//!   inverse, rotations `q^μ = μqμ⁻¹`, polar form, rotated orthogonal bases.
//! * [`linalg`] — dense quaternion vectors/matrices with Hermitian-transpose
//!   semantics, the `J`-matrix correspondence between `H⁴ᴺ` and `R⁴ᴺ`, and a
//!   real-adjoint representation backing all linear solves.
//! * [`calculus`] — numerical GHR differentiation of arbitrary quaternion
//!   functions by finite differences on the four real coordinates, with a
//!   harness verifying the product, chain, rotation, conjugate and constant
//!   rules.
//! * [`gradient`] / [`hessian`] — quaternion gradients, Jacobians, Hessian
//!   blocks, augmented forms, the real↔quaternion correspondence identities,
//!   second-order Taylor models and stationarity tests.
//! * [`optim`] — quaternion gradient descent and quaternion Newton (full
//!   Schur-complement form and the diagonal approximation).
//! * [`qlms`] — the QLMS adaptive filter in its GHR and component-wise
//!   derivations plus a synthetic system-identification harness.
//! * [`qls`] — quaternion least squares via the normal equation.
//! * [`fields`] — a deterministic corpus of test fields.
//! * [`verify`] — the rule/identity suite producing machine-readable reports.
//!
//! Everything is pure and `Send + Sync`; values are immutable.

pub mod calculus;
pub mod error;
pub mod fields;
pub mod gradient;
pub mod hessian;
pub mod linalg;
pub mod optim;
pub mod qlms;
pub mod qls;
pub mod quat;
pub mod real;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{AugmentedVector, QMatrix, QVector};
pub use quat::{Basis, Polar, Quaternion};

#[cfg(test)]
pub(crate) mod test_support {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    use crate::quat::Quaternion;

    pub fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    pub fn sample_quat(r: &mut impl Rng) -> Quaternion {
        Quaternion::new(
            r.random_range(-2.0..2.0),
            r.random_range(-2.0..2.0),
            r.random_range(-2.0..2.0),
            r.random_range(-2.0..2.0),
        )
    }
}
