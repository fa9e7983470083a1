//! Small dense real matrices.
//!
//! Row-major `f64` storage with the handful of factorizations the rest of the
//! crate needs: partially pivoted LU for solves and condition estimates,
//! Cholesky as a positive-definiteness test, and power iteration for the
//! largest eigenvalue of a symmetric matrix. Sized for desk-scale problems
//! (dimensions in the tens), not for large-scale work.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &RealMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "matmul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let v = self[(r, k)];
                if v == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += v * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec: dimension mismatch");
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * x[c]).sum())
            .collect()
    }

    pub fn add(&self, other: &RealMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &RealMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Symmetrize in place as `(A + Aᵀ)/2`.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                let v = 0.5 * (self[(r, c)] + self[(c, r)]);
                self[(r, c)] = v;
                self[(c, r)] = v;
            }
        }
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<Lu> {
        assert_eq!(self.rows, self.cols, "lu: matrix must be square");
        let n = self.rows;
        let mut a = self.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut max = a[(k, k)].abs();
            for r in (k + 1)..n {
                let v = a[(r, k)].abs();
                if v > max {
                    max = v;
                    p = r;
                }
            }
            if max == 0.0 {
                return Err(Error::Singular {
                    condition: f64::INFINITY,
                });
            }
            if p != k {
                for c in 0..n {
                    let tmp = a[(k, c)];
                    a[(k, c)] = a[(p, c)];
                    a[(p, c)] = tmp;
                }
                piv.swap(k, p);
            }
            let pivot = a[(k, k)];
            for r in (k + 1)..n {
                let factor = a[(r, k)] / pivot;
                a[(r, k)] = factor;
                for c in (k + 1)..n {
                    let v = a[(k, c)];
                    a[(r, c)] -= factor * v;
                }
            }
        }
        Ok(Lu { lu: a, piv })
    }

    /// Cholesky factorization; fails unless the matrix is symmetric positive
    /// definite (symmetry is the caller's responsibility).
    pub fn cholesky(&self) -> Result<RealMatrix> {
        assert_eq!(self.rows, self.cols, "cholesky: matrix must be square");
        let n = self.rows;
        let mut l = RealMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..=r {
                let mut sum = self[(r, c)];
                for k in 0..c {
                    sum -= l[(r, k)] * l[(c, k)];
                }
                if r == c {
                    if sum <= 0.0 {
                        return Err(Error::Singular {
                            condition: f64::INFINITY,
                        });
                    }
                    l[(r, c)] = sum.sqrt();
                } else {
                    l[(r, c)] = sum / l[(c, c)];
                }
            }
        }
        Ok(l)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// Largest eigenvalue of a symmetric matrix by power iteration.
    pub fn sym_lambda_max(&self, iters: usize) -> f64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return 0.0;
        }
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 0.3).collect();
        let mut lambda = 0.0;
        for _ in 0..iters.max(1) {
            let w = self.matvec(&v);
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            v = w.iter().map(|x| x / norm).collect();
            lambda = norm;
        }
        let w = self.matvec(&v);
        let rayleigh: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        if rayleigh.abs() > 0.0 {
            rayleigh
        } else {
            lambda
        }
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Partially pivoted LU factors of a square matrix.
pub struct Lu {
    lu: RealMatrix,
    piv: Vec<usize>,
}

impl Lu {
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n, "lu solve: dimension mismatch");
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        // forward substitution, unit lower triangle
        for r in 1..n {
            for c in 0..r {
                x[r] -= self.lu[(r, c)] * x[c];
            }
        }
        // back substitution
        for r in (0..n).rev() {
            for c in (r + 1)..n {
                x[r] -= self.lu[(r, c)] * x[c];
            }
            x[r] /= self.lu[(r, r)];
        }
        x
    }

    pub fn solve_mat(&self, b: &RealMatrix) -> RealMatrix {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n, "lu solve: dimension mismatch");
        let mut out = RealMatrix::zeros(n, b.cols());
        for c in 0..b.cols() {
            let col: Vec<f64> = (0..n).map(|r| b[(r, c)]).collect();
            let x = self.solve_vec(&col);
            for r in 0..n {
                out[(r, c)] = x[r];
            }
        }
        out
    }

    pub fn inverse(&self) -> RealMatrix {
        let n = self.lu.rows();
        self.solve_mat(&RealMatrix::identity(n))
    }
}

/// Solve `A x = b`, rejecting systems whose 1-norm condition estimate
/// exceeds `cond_limit`.
pub fn solve_conditioned(a: &RealMatrix, b: &[f64], cond_limit: f64) -> Result<(Vec<f64>, f64)> {
    let lu = a.lu()?;
    let cond = a.one_norm() * lu.inverse().one_norm();
    if !cond.is_finite() || cond > cond_limit {
        return Err(Error::Singular { condition: cond });
    }
    Ok((lu.solve_vec(b), cond))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_known_system() {
        let a = RealMatrix::from_rows(vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ]);
        let x_true = [1.0, -2.0, 0.5];
        let b = a.matvec(&x_true);
        let x = a.lu().unwrap().solve_vec(&b);
        for (xi, ti) in x.iter().zip(x_true.iter()) {
            assert!((xi - ti).abs() < 1e-12);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = RealMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(a.lu().is_err());
    }

    #[test]
    fn condition_estimate_flags_near_singular() {
        let a = RealMatrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]]);
        let err = solve_conditioned(&a, &[1.0, 1.0], 1e12).unwrap_err();
        assert!(matches!(err, Error::Singular { condition } if condition > 1e12));
    }

    #[test]
    fn cholesky_accepts_pd_rejects_indefinite() {
        let pd = RealMatrix::from_rows(vec![vec![4.0, 1.0], vec![1.0, 3.0]]);
        assert!(pd.is_positive_definite());
        let indef = RealMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(!indef.is_positive_definite());
    }

    #[test]
    fn power_iteration_finds_lambda_max() {
        let a = RealMatrix::from_rows(vec![vec![3.0, 1.0], vec![1.0, 3.0]]);
        let l = a.sym_lambda_max(200);
        assert!((l - 4.0).abs() < 1e-9);
    }
}
