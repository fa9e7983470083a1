//! Dense quaternion vectors and matrices.
//!
//! Provides Hermitian-transpose semantics, the block matrix `J` linking the
//! involution stack `h = (q; qⁱ; qʲ; qᵏ) ∈ H⁴ᴺ` with its quadrivariate real
//! coordinates `r = (q_a; q_b; q_c; q_d) ∈ R⁴ᴺ`, and a real-adjoint
//! representation `χ` used for all linear solves.
//!
//! Two real orderings are in play and must not be mixed:
//! * *block* order — `(q_a; q_b; q_c; q_d)`, the `r` vector of the `J`
//!   correspondence;
//! * *interleaved* order — `(q₁ₐ, q₁ᵦ, q₁_c, q₁_d, q₂ₐ, …)`, the layout on
//!   which `χ(A)` acts entrywise.

use std::ops::{Add, Index, IndexMut, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::real::{solve_conditioned, RealMatrix};

/// Solver rejection threshold on the 1-norm condition estimate.
pub const COND_LIMIT: f64 = 1e12;

/// Dense quaternion column vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QVector {
    entries: Vec<Quaternion>,
}

impl QVector {
    pub fn from_vec(entries: Vec<Quaternion>) -> Self {
        Self { entries }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: vec![Quaternion::ZERO; n],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Quaternion> {
        self.entries.iter()
    }

    pub fn as_slice(&self) -> &[Quaternion] {
        &self.entries
    }

    pub fn conjugate(&self) -> Self {
        Self::from_vec(self.iter().map(|q| q.conjugate()).collect())
    }

    /// Entrywise rotation `q ↦ q^μ`.
    pub fn rotate(&self, mu: Quaternion) -> Result<Self> {
        self.iter()
            .map(|q| q.rotate(mu))
            .collect::<Result<Vec<_>>>()
            .map(Self::from_vec)
    }

    /// Left scalar multiple `s · v` (order matters in H).
    pub fn scale_left(&self, s: Quaternion) -> Self {
        Self::from_vec(self.iter().map(|&q| s * q).collect())
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self::from_vec(self.iter().map(|&q| q * s).collect())
    }

    /// Transpose product `vᵀ w = Σ vₙ wₙ` (no conjugation, order preserved).
    pub fn dot_t(&self, other: &QVector) -> Quaternion {
        assert_eq!(self.len(), other.len(), "dot_t: length mismatch");
        self.iter()
            .zip(other.iter())
            .fold(Quaternion::ZERO, |acc, (&a, &b)| acc + a * b)
    }

    /// Hermitian product `vᴴ w = Σ vₙ* wₙ`.
    pub fn dot_h(&self, other: &QVector) -> Quaternion {
        assert_eq!(self.len(), other.len(), "dot_h: length mismatch");
        self.iter()
            .zip(other.iter())
            .fold(Quaternion::ZERO, |acc, (&a, &b)| acc + a.conjugate() * b)
    }

    /// Euclidean norm `√(Σ |vₙ|²)`.
    pub fn norm(&self) -> f64 {
        self.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max entry modulus.
    pub fn inf_norm(&self) -> f64 {
        self.iter().fold(0.0, |m, q| m.max(q.modulus()))
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|q| q.is_finite())
    }

    /// Real coordinates in block order `(q_a; q_b; q_c; q_d)`.
    pub fn to_block_reals(&self) -> Vec<f64> {
        let n = self.len();
        let mut r = Vec::with_capacity(4 * n);
        r.extend(self.iter().map(|q| q.a));
        r.extend(self.iter().map(|q| q.b));
        r.extend(self.iter().map(|q| q.c));
        r.extend(self.iter().map(|q| q.d));
        r
    }

    pub fn from_block_reals(r: &[f64]) -> Self {
        assert_eq!(r.len() % 4, 0, "block reals: length must be 4N");
        let n = r.len() / 4;
        Self::from_vec(
            (0..n)
                .map(|m| Quaternion::new(r[m], r[n + m], r[2 * n + m], r[3 * n + m]))
                .collect(),
        )
    }

    /// Real coordinates interleaved per entry, the layout `χ` acts on.
    pub fn to_interleaved_reals(&self) -> Vec<f64> {
        self.iter().flat_map(|q| q.to_array()).collect()
    }

    pub fn from_interleaved_reals(r: &[f64]) -> Self {
        assert_eq!(r.len() % 4, 0, "interleaved reals: length must be 4N");
        Self::from_vec(
            r.chunks_exact(4)
                .map(|c| Quaternion::new(c[0], c[1], c[2], c[3]))
                .collect(),
        )
    }

    /// CSV rows `row,col,a,b,c,d` with `col = 0`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col,a,b,c,d\n");
        for (m, q) in self.iter().enumerate() {
            s.push_str(&format!("{},0,{},{},{},{}\n", m, q.a, q.b, q.c, q.d));
        }
        s
    }

    pub fn from_csv(text: &str) -> std::result::Result<Self, String> {
        let m = QMatrix::from_csv(text)?;
        if m.cols() != 1 {
            return Err(format!("expected a single column, found {}", m.cols()));
        }
        Ok(m.column(0))
    }
}

impl Index<usize> for QVector {
    type Output = Quaternion;
    #[inline]
    fn index(&self, i: usize) -> &Quaternion {
        &self.entries[i]
    }
}

impl IndexMut<usize> for QVector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut Quaternion {
        &mut self.entries[i]
    }
}

impl Add for &QVector {
    type Output = QVector;
    fn add(self, rhs: &QVector) -> QVector {
        assert_eq!(self.len(), rhs.len(), "vector add: length mismatch");
        QVector::from_vec(self.iter().zip(rhs.iter()).map(|(&a, &b)| a + b).collect())
    }
}

impl Sub for &QVector {
    type Output = QVector;
    fn sub(self, rhs: &QVector) -> QVector {
        assert_eq!(self.len(), rhs.len(), "vector sub: length mismatch");
        QVector::from_vec(self.iter().zip(rhs.iter()).map(|(&a, &b)| a - b).collect())
    }
}

/// Dense row-major quaternion matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Quaternion::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Quaternion>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Diagonal matrix with a constant quaternion on the diagonal.
    pub fn scalar(n: usize, q: Quaternion) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = q;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Conjugate transpose. Note that the plain transpose does *not* reverse
    /// quaternion matrix products; the Hermitian transpose does.
    pub fn hermitian(&self) -> Self {
        let mut h = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                h[(c, r)] = self[(r, c)].conjugate();
            }
        }
        h
    }

    /// Product with the quaternion factor order preserved:
    /// `(AB)(m,n) = Σ_k A(m,k)·B(k,n)`.
    pub fn matmul(&self, other: &QMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let v = self[(r, k)];
                for c in 0..other.cols {
                    out[(r, c)] += v * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &QVector) -> QVector {
        assert_eq!(self.cols, x.len(), "matvec: dimension mismatch");
        QVector::from_vec(
            (0..self.rows)
                .map(|r| (0..self.cols).fold(Quaternion::ZERO, |acc, c| acc + self[(r, c)] * x[c]))
                .collect(),
        )
    }

    pub fn add(&self, other: &QMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &QMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= *b;
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = *a * s;
        }
        out
    }

    /// Entrywise rotation by μ.
    pub fn rotate(&self, mu: Quaternion) -> Result<Self> {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.rotate(mu)?;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, q| m.max(q.modulus()))
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn column(&self, c: usize) -> QVector {
        QVector::from_vec((0..self.rows).map(|r| self[(r, c)]).collect())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &QMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for r in 0..block.rows {
            for c in 0..block.cols {
                self[(r0 + r, c0 + c)] = block[(r, c)];
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> QMatrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let mut out = QMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out[(r, c)] = self[(r0 + r, c0 + c)];
            }
        }
        out
    }

    /// Max entry modulus of `A - Aᴴ`; zero for Hermitian matrices.
    pub fn hermitian_deviation(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        self.sub(&self.hermitian()).max_abs()
    }

    /// CSV rows `row,col,a,b,c,d`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,col,a,b,c,d\n");
        for r in 0..self.rows {
            for c in 0..self.cols {
                let q = self[(r, c)];
                s.push_str(&format!("{},{},{},{},{},{}\n", r, c, q.a, q.b, q.c, q.d));
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> std::result::Result<Self, String> {
        let mut triplets = Vec::new();
        let mut max_r = 0usize;
        let mut max_c = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("row")) {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 6 {
                return Err(format!("line {}: expected 6 fields", lineno + 1));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("line {}: {e}", lineno + 1))
            };
            let r = parts[0]
                .trim()
                .parse::<usize>()
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
            let c = parts[1]
                .trim()
                .parse::<usize>()
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
            let q = Quaternion::new(
                parse(parts[2])?,
                parse(parts[3])?,
                parse(parts[4])?,
                parse(parts[5])?,
            );
            max_r = max_r.max(r + 1);
            max_c = max_c.max(c + 1);
            triplets.push((r, c, q));
        }
        let mut m = QMatrix::zeros(max_r, max_c);
        for (r, c, q) in triplets {
            m[(r, c)] = q;
        }
        Ok(m)
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Quaternion {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Quaternion {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

// JSON form: nested arrays of 4-arrays, row by row.
impl Serialize for QMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Quaternion>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<Quaternion>> = Vec::deserialize(deserializer)?;
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(QMatrix::from_rows(rows))
    }
}

/// The involution stack `h` of a vector together with its dual real vector
/// `r`, linked by `h = J r` and `r = ¼ Jᴴ h`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedVector {
    /// `(q; qⁱ; qʲ; qᵏ) ∈ H⁴ᴺ`.
    pub h: QVector,
    /// `(q_a; q_b; q_c; q_d) ∈ R⁴ᴺ`.
    pub r: Vec<f64>,
}

impl AugmentedVector {
    /// The first block of `h`, i.e. the original vector.
    pub fn base(&self) -> QVector {
        QVector::from_vec(self.h.as_slice()[..self.h.len() / 4].to_vec())
    }
}

/// Stack a vector with its three canonical involutions and the dual real
/// coordinates.
pub fn augment(q: &QVector) -> AugmentedVector {
    let n = q.len();
    let mut entries = Vec::with_capacity(4 * n);
    entries.extend_from_slice(q.as_slice());
    for mu in [Quaternion::I, Quaternion::J, Quaternion::K] {
        for &e in q.iter() {
            entries.push(e.rotate(mu).expect("canonical involution"));
        }
    }
    AugmentedVector {
        h: QVector::from_vec(entries),
        r: q.to_block_reals(),
    }
}

/// The 4N×4N block matrix with `h = J r`; satisfies `J Jᴴ = 4 I`.
pub fn j_matrix(n: usize) -> QMatrix {
    assert!(n >= 1, "j_matrix: N must be at least 1");
    // block (α, t) = coeff · I_N, with the involution sign pattern
    let coeffs: [[Quaternion; 4]; 4] = [
        [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K],
        [
            Quaternion::ONE,
            Quaternion::I,
            -Quaternion::J,
            -Quaternion::K,
        ],
        [
            Quaternion::ONE,
            -Quaternion::I,
            Quaternion::J,
            -Quaternion::K,
        ],
        [
            Quaternion::ONE,
            -Quaternion::I,
            -Quaternion::J,
            Quaternion::K,
        ],
    ];
    let mut j = QMatrix::zeros(4 * n, 4 * n);
    for (alpha, row) in coeffs.iter().enumerate() {
        for (t, &coeff) in row.iter().enumerate() {
            for m in 0..n {
                j[(alpha * n + m, t * n + m)] = coeff;
            }
        }
    }
    j
}

fn chi_block(q: Quaternion) -> [[f64; 4]; 4] {
    [
        [q.a, -q.b, -q.c, -q.d],
        [q.b, q.a, -q.d, q.c],
        [q.c, q.d, q.a, -q.b],
        [q.d, -q.c, q.b, q.a],
    ]
}

/// Real-adjoint representation `χ(A) ∈ R⁴ᴹˣ⁴ᴺ`.
///
/// Left-multiplication convention: `χ(A) · interleaved(x) = interleaved(Ax)`.
/// `χ` is an algebra homomorphism with `χ(AB) = χ(A)χ(B)`, `χ(Aᴴ) = χ(A)ᵀ`
/// and `χ(I) = I`. Two inequivalent conventions exist in the literature; this
/// crate uses the left one throughout.
pub fn real_adjoint(a: &QMatrix) -> RealMatrix {
    let mut out = RealMatrix::zeros(4 * a.rows(), 4 * a.cols());
    for m in 0..a.rows() {
        for n in 0..a.cols() {
            let blk = chi_block(a[(m, n)]);
            for (s, row) in blk.iter().enumerate() {
                for (t, &v) in row.iter().enumerate() {
                    out[(4 * m + s, 4 * n + t)] = v;
                }
            }
        }
    }
    out
}

/// Solve `A x = b` through the real-adjoint embedding.
///
/// Fails with a condition estimate when `χ(A)` is singular or its 1-norm
/// condition exceeds [`COND_LIMIT`]. No regularization is applied here; that
/// is a caller decision.
pub fn solve(a: &QMatrix, b: &QVector) -> Result<QVector> {
    solve_with_condition(a, b).map(|(x, _)| x)
}

/// [`solve`] that also reports the 1-norm condition estimate of `χ(A)`.
pub fn solve_with_condition(a: &QMatrix, b: &QVector) -> Result<(QVector, f64)> {
    assert_eq!(a.rows(), a.cols(), "solve: matrix must be square");
    assert_eq!(a.rows(), b.len(), "solve: dimension mismatch");
    let chi = real_adjoint(a);
    let (x, cond) = solve_conditioned(&chi, &b.to_interleaved_reals(), COND_LIMIT)?;
    Ok((QVector::from_interleaved_reals(&x), cond))
}

/// Solve with multiple right-hand sides given as matrix columns.
pub fn solve_matrix(a: &QMatrix, b: &QMatrix) -> Result<QMatrix> {
    assert_eq!(a.rows(), a.cols(), "solve_matrix: matrix must be square");
    assert_eq!(a.rows(), b.rows(), "solve_matrix: dimension mismatch");
    let chi = real_adjoint(a);
    let lu = chi.lu()?;
    let cond = chi.one_norm() * lu.inverse().one_norm();
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(Error::Singular { condition: cond });
    }
    let mut out = QMatrix::zeros(b.rows(), b.cols());
    for c in 0..b.cols() {
        let col = lu.solve_vec(&b.column(c).to_interleaved_reals());
        let x = QVector::from_interleaved_reals(&col);
        for r in 0..b.rows() {
            out[(r, c)] = x[r];
        }
    }
    Ok(out)
}

/// Apply the Moore-Penrose pseudoinverse of a full-column-rank matrix:
/// `(AᴴA)⁻¹ Aᴴ b`, by solving the normal equation.
pub fn pinv_apply(a: &QMatrix, b: &QVector) -> Result<QVector> {
    if a.rows() < a.cols() {
        return Err(Error::DimensionMismatch {
            context: "pinv_apply requires M >= N",
            expected: a.cols(),
            found: a.rows(),
        });
    }
    assert_eq!(a.rows(), b.len(), "pinv_apply: dimension mismatch");
    let ah = a.hermitian();
    let gram = ah.matmul(a);
    let rhs = ah.matvec(b);
    solve(&gram, &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{rng, sample_quat};
    use rand::Rng;

    fn sample_qmatrix(r: &mut impl Rng, rows: usize, cols: usize) -> QMatrix {
        let mut m = QMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = sample_quat(r);
            }
        }
        m
    }

    #[test]
    fn hermitian_examples() {
        let m = QMatrix::from_rows(vec![vec![Quaternion::I]]);
        assert_eq!(m.hermitian()[(0, 0)], -Quaternion::I);

        let real = QMatrix::from_rows(vec![
            vec![Quaternion::real(1.0), Quaternion::real(2.0)],
            vec![Quaternion::real(3.0), Quaternion::real(4.0)],
        ]);
        let h = real.hermitian();
        assert_eq!(h[(0, 1)], Quaternion::real(3.0));
        assert_eq!(h[(1, 0)], Quaternion::real(2.0));
    }

    #[test]
    fn hermitian_reverses_products() {
        let mut r = rng(31);
        for _ in 0..20 {
            let a = sample_qmatrix(&mut r, 2, 2);
            let b = sample_qmatrix(&mut r, 2, 2);
            let lhs = a.matmul(&b).hermitian();
            let rhs = b.hermitian().matmul(&a.hermitian());
            assert!(lhs.sub(&rhs).max_abs() < 1e-12 * (1.0 + lhs.max_abs()));
        }
    }

    #[test]
    fn hermitian_involutive() {
        let mut r = rng(32);
        let a = sample_qmatrix(&mut r, 3, 2);
        assert_eq!(a.hermitian().hermitian(), a);
    }

    #[test]
    fn matmul_examples() {
        let mut r = rng(33);
        let a = sample_qmatrix(&mut r, 3, 3);
        assert_eq!(QMatrix::identity(3).matmul(&a), a);

        let i = QMatrix::from_rows(vec![vec![Quaternion::I]]);
        let j = QMatrix::from_rows(vec![vec![Quaternion::J]]);
        assert_eq!(i.matmul(&j)[(0, 0)], Quaternion::K);

        // noncommutative witness
        let a = QMatrix::from_rows(vec![
            vec![Quaternion::I, Quaternion::ZERO],
            vec![Quaternion::ZERO, Quaternion::J],
        ]);
        let b = QMatrix::from_rows(vec![
            vec![Quaternion::J, Quaternion::ZERO],
            vec![Quaternion::ZERO, Quaternion::K],
        ]);
        assert_ne!(a.matmul(&b), b.matmul(&a));
    }

    #[test]
    fn j_matrix_block_pattern() {
        let j = j_matrix(1);
        let expect = [
            [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K],
            [
                Quaternion::ONE,
                Quaternion::I,
                -Quaternion::J,
                -Quaternion::K,
            ],
            [
                Quaternion::ONE,
                -Quaternion::I,
                Quaternion::J,
                -Quaternion::K,
            ],
            [
                Quaternion::ONE,
                -Quaternion::I,
                -Quaternion::J,
                Quaternion::K,
            ],
        ];
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(j[(r, c)], expect[r][c]);
            }
        }
    }

    #[test]
    fn j_matrix_identities() {
        for n in [1usize, 2, 5] {
            let j = j_matrix(n);
            let jh = j.hermitian();
            let jjh = j.matmul(&jh);
            let jhj = jh.matmul(&j).scale_real(0.25);
            let four_i = QMatrix::identity(4 * n).scale_real(4.0);
            assert!(jjh.sub(&four_i).max_abs() < 1e-12);
            assert!(jhj.sub(&QMatrix::identity(4 * n)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn augment_examples() {
        let av = augment(&QVector::from_vec(vec![Quaternion::ONE]));
        for m in 0..4 {
            assert_eq!(av.h[m], Quaternion::ONE);
        }
        assert_eq!(av.r, vec![1.0, 0.0, 0.0, 0.0]);

        let av = augment(&QVector::from_vec(vec![Quaternion::I]));
        assert!(av.h[0].approx_eq(Quaternion::I, 1e-15));
        assert!(av.h[1].approx_eq(Quaternion::I, 1e-15));
        assert!(av.h[2].approx_eq(-Quaternion::I, 1e-15));
        assert!(av.h[3].approx_eq(-Quaternion::I, 1e-15));
        assert_eq!(av.r, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn augment_satisfies_j_correspondence() {
        let mut r = rng(34);
        for n in [1usize, 2, 5] {
            let q = QVector::from_vec((0..n).map(|_| sample_quat(&mut r)).collect());
            let av = augment(&q);
            let j = j_matrix(n);
            // h = J r
            let jr = j.matvec(&QVector::from_vec(
                av.r.iter().map(|&x| Quaternion::real(x)).collect(),
            ));
            assert!(jr.sub(&av.h).inf_norm() < 1e-12 * (1.0 + av.h.inf_norm()));
            // r = ¼ Jᴴ h
            let back = j.hermitian().matvec(&av.h).scale_real(0.25);
            for (m, &x) in av.r.iter().enumerate() {
                assert!(back[m].approx_eq(Quaternion::real(x), 1e-12));
            }
            assert_eq!(av.base(), q);
        }
    }

    #[test]
    fn block_reals_roundtrip() {
        let mut r = rng(35);
        for _ in 0..20 {
            let q = QVector::from_vec((0..4).map(|_| sample_quat(&mut r)).collect());
            let back = QVector::from_block_reals(&q.to_block_reals());
            assert!((&back - &q).inf_norm() < 1e-14);
            let back = QVector::from_interleaved_reals(&q.to_interleaved_reals());
            assert!((&back - &q).inf_norm() < 1e-14);
        }
    }

    #[test]
    fn chi_examples() {
        let one = real_adjoint(&QMatrix::from_rows(vec![vec![Quaternion::ONE]]));
        assert_eq!(one, RealMatrix::identity(4));

        let ci = real_adjoint(&QMatrix::from_rows(vec![vec![Quaternion::I]]));
        let cj = real_adjoint(&QMatrix::from_rows(vec![vec![Quaternion::J]]));
        let ck = real_adjoint(&QMatrix::from_rows(vec![vec![Quaternion::K]]));
        assert!(ci.matmul(&cj).sub(&ck).max_abs() < 1e-15);

        // first column of χ(q) carries the coordinates, χ(q)ᵀχ(q) = |q|² I
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        let cq = real_adjoint(&QMatrix::from_rows(vec![vec![q]]));
        for (s, v) in q.to_array().iter().enumerate() {
            assert_eq!(cq[(s, 0)], *v);
        }
        let gram = cq.transpose().matmul(&cq);
        assert!(
            gram.sub(&RealMatrix::identity(4).scale(q.norm_sqr()))
                .max_abs()
                < 1e-12
        );
    }

    #[test]
    fn chi_is_homomorphism() {
        let mut r = rng(36);
        for _ in 0..100 {
            let rows = 1 + (r.random::<u32>() % 4) as usize;
            let inner = 1 + (r.random::<u32>() % 4) as usize;
            let cols = 1 + (r.random::<u32>() % 4) as usize;
            let a = sample_qmatrix(&mut r, rows, inner);
            let b = sample_qmatrix(&mut r, inner, cols);
            let lhs = real_adjoint(&a.matmul(&b));
            let rhs = real_adjoint(&a).matmul(&real_adjoint(&b));
            assert!(lhs.sub(&rhs).max_abs() < 1e-10 * (1.0 + lhs.max_abs()));
            let lhs = real_adjoint(&a.hermitian());
            let rhs = real_adjoint(&a).transpose();
            assert!(lhs.sub(&rhs).max_abs() < 1e-12);
        }
    }

    #[test]
    fn chi_applies_to_coordinates() {
        let mut r = rng(37);
        let a = sample_qmatrix(&mut r, 3, 2);
        let x = QVector::from_vec(vec![sample_quat(&mut r), sample_quat(&mut r)]);
        let lhs = real_adjoint(&a).matvec(&x.to_interleaved_reals());
        let rhs = a.matvec(&x).to_interleaved_reals();
        for (l, rr) in lhs.iter().zip(rhs.iter()) {
            assert!((l - rr).abs() < 1e-12 * (1.0 + rr.abs()));
        }
    }

    #[test]
    fn solve_examples() {
        let mut r = rng(38);
        let b = QVector::from_vec(vec![sample_quat(&mut r), sample_quat(&mut r)]);
        let x = solve(&QMatrix::identity(2), &b).unwrap();
        assert!((&x - &b).inf_norm() < 1e-12);

        // i·x = k  →  x = j
        let a = QMatrix::from_rows(vec![vec![Quaternion::I]]);
        let b = QVector::from_vec(vec![Quaternion::K]);
        let x = solve(&a, &b).unwrap();
        assert!(x[0].approx_eq(Quaternion::J, 1e-12));
    }

    #[test]
    fn solve_recovers_known_solution() {
        let mut r = rng(39);
        for _ in 0..10 {
            // Hermitian positive definite A = BᴴB + I
            let b = sample_qmatrix(&mut r, 3, 3);
            let a = b.hermitian().matmul(&b).add(&QMatrix::identity(3));
            let x_true = QVector::from_vec((0..3).map(|_| sample_quat(&mut r)).collect());
            let rhs = a.matvec(&x_true);
            let x = solve(&a, &rhs).unwrap();
            assert!((&x - &x_true).inf_norm() < 1e-8 * (1.0 + x_true.inf_norm()));
            let residual = (&a.matvec(&x) - &rhs).norm();
            assert!(residual <= 1e-8 * (a.max_abs() * x.norm() + rhs.norm()));
        }
    }

    #[test]
    fn solve_rejects_singular() {
        let a = QMatrix::from_rows(vec![
            vec![Quaternion::ONE, Quaternion::ONE],
            vec![Quaternion::ONE, Quaternion::ONE],
        ]);
        let b = QVector::from_vec(vec![Quaternion::ONE, Quaternion::ONE]);
        match solve(&a, &b) {
            Err(Error::Singular { condition }) => assert!(condition > 1e12),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn pinv_examples() {
        let mut r = rng(40);
        let b = QVector::from_vec(vec![sample_quat(&mut r), sample_quat(&mut r)]);
        let x = pinv_apply(&QMatrix::identity(2), &b).unwrap();
        assert!((&x - &b).inf_norm() < 1e-10);

        // consistent system: b in range(A)
        let a = sample_qmatrix(&mut r, 4, 2);
        let x_true = QVector::from_vec(vec![sample_quat(&mut r), sample_quat(&mut r)]);
        let b = a.matvec(&x_true);
        let x = pinv_apply(&a, &b).unwrap();
        assert!((&a.matvec(&x) - &b).norm() < 1e-10 * (1.0 + b.norm()));
    }

    #[test]
    fn pinv_matches_real_least_squares_for_real_matrix() {
        let mut r = rng(41);
        // tall real-entried matrix: quaternion pinv must agree with the
        // real normal equations applied to the embedded system
        let mut a = QMatrix::zeros(5, 2);
        for i in 0..5 {
            for jc in 0..2 {
                a[(i, jc)] = Quaternion::real(r.random_range(-1.0..1.0));
            }
        }
        let b = QVector::from_vec((0..5).map(|_| sample_quat(&mut r)).collect());
        let x = pinv_apply(&a, &b).unwrap();

        let chi = real_adjoint(&a);
        let bt = chi.transpose();
        let gram = bt.matmul(&chi);
        let rhs = bt.matvec(&b.to_interleaved_reals());
        let sol = gram.lu().unwrap().solve_vec(&rhs);
        let x_real = QVector::from_interleaved_reals(&sol);
        assert!((&x - &x_real).inf_norm() < 1e-8);
    }

    #[test]
    fn pinv_rejects_rank_deficient() {
        let a = QMatrix::from_rows(vec![
            vec![Quaternion::ONE, Quaternion::ONE],
            vec![Quaternion::ONE, Quaternion::ONE],
            vec![Quaternion::ONE, Quaternion::ONE],
        ]);
        let b = QVector::from_vec(vec![Quaternion::ONE; 3]);
        assert!(matches!(pinv_apply(&a, &b), Err(Error::Singular { .. })));
    }

    #[test]
    fn csv_and_json_roundtrip() {
        let mut r = rng(42);
        let m = sample_qmatrix(&mut r, 3, 2);
        let back = QMatrix::from_csv(&m.to_csv()).unwrap();
        assert_eq!(m, back);

        let json = serde_json::to_string(&m).unwrap();
        let back: QMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);

        let v = QVector::from_vec(vec![sample_quat(&mut r); 3]);
        let back = QVector::from_csv(&v.to_csv()).unwrap();
        assert_eq!(v, back);
        let json = serde_json::to_string(&v).unwrap();
        let back: QVector = serde_json::from_str(&json).unwrap();
        assert_eq!(v, back);
    }
}
