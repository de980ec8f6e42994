//! Dense square matrices and the SPD solver backing every `sigma^-1 * x`
//! product in the crate.
//!
//! Inverses are never formed explicitly: solves go through a Cholesky
//! factorization and two triangular substitutions, followed by one step of
//! iterative refinement to keep the residual near machine precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A square matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from nested rows, rejecting ragged or non-square input.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "matrix row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(&row);
        }
        Ok(Matrix { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix {
            n,
            data: vec![0.0; n * n],
        };
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// The main diagonal as a vector.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest absolute difference between an entry and its transpose mate.
    pub fn symmetry_gap(&self) -> f64 {
        let mut gap = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                gap = gap.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        gap
    }

    /// Replaces the matrix with (M + M^T) / 2.
    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let avg = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, avg);
                self.set(j, i, avg);
            }
        }
    }

    /// Multiplies every entry by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|x| k * x).collect(),
        }
    }

    /// Matrix-vector product M * v.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "matvec dimension mismatch");
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Quadratic form v^T M v.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.matvec(v))
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Lower-triangular Cholesky factor of an SPD matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>,
}

impl CholeskyFactor {
    /// Factors M = L L^T. Fails with `NotPositiveDefinite` on the first
    /// pivot that is not a strictly positive finite number.
    pub fn factor(m: &Matrix) -> Result<Self> {
        let n = m.dim();
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                    }
                    l[i * n + j] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(CholeskyFactor { n, lower: l })
    }

    /// Solves L L^T x = b by forward then backward substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "solve dimension mismatch");
        let n = self.n;
        let l = &self.lower;
        // forward: L y = b
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= l[i * n + k] * x[k];
            }
            x[i] /= l[i * n + i];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= l[k * n + i] * x[k];
            }
            x[i] /= l[i * n + i];
        }
        x
    }
}

/// Solves `sigma * x = b` for SPD `sigma` via Cholesky factorization and
/// triangular substitution, with one step of iterative refinement.
pub fn solve_spd(sigma: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            actual: b.len(),
        });
    }
    let chol = CholeskyFactor::factor(sigma)?;
    let mut x = chol.solve(b);
    // one refinement pass: x += sigma^-1 (b - sigma x)
    let ax = sigma.matvec(&x);
    let residual: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    let correction = chol.solve(&residual);
    for (xi, ci) in x.iter_mut().zip(&correction) {
        *xi += ci;
    }
    Ok(x)
}
