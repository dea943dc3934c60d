//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// A tridiagonal matrix stored by diagonals. `lower[0]` and
/// `upper[n - 1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    /// Constant-coefficient matrix with `a` below, `b` on, and `c` above the
    /// diagonal.
    pub fn constant(n: usize, a: f64, b: f64, c: f64) -> Self {
        Self {
            lower: vec![a; n],
            diag: vec![b; n],
            upper: vec![c; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * u[i];
                if i > 0 {
                    s += self.lower[i] * u[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * u[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `A u = rhs` by forward elimination and back substitution.
    /// Stable without pivoting for diagonally dominant matrices.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if rhs.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidParameter {
                name: "rhs",
                reason: "tridiagonal system dimensions disagree".into(),
            });
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = self.diag[i] - self.lower[i] * c[i - 1];
            }
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "matrix",
                    reason: format!("zero pivot in row {i}"),
                });
            }
            c[i] = if i + 1 < n { self.upper[i] / pivot } else { 0.0 };
            d[i] = if i == 0 {
                rhs[0] / pivot
            } else {
                (rhs[i] - self.lower[i] * d[i - 1]) / pivot
            };
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// `‖A u - rhs‖_∞`.
    pub fn residual(&self, u: &[f64], rhs: &[f64]) -> f64 {
        self.apply(u)
            .iter()
            .zip(rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
