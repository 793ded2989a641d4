//! Symmetric tridiagonal matrices: the P1 thickness matrices are banded, so
//! products and solves cost O(N_z) per in-plane node.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[k]` couples unknowns `k` and `k + 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    /// Reads the three central diagonals of a dense matrix.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        SymTridiagonal {
            diag: (0..n).map(|k| m[(k, k)]).collect(),
            off: (0..n.saturating_sub(1)).map(|k| m[(k, k + 1)]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        SymTridiagonal {
            diag: self.diag.iter().zip(&other.diag).map(|(x, y)| a * x + b * y).collect(),
            off: self.off.iter().zip(&other.off).map(|(x, y)| a * x + b * y).collect(),
        }
    }

    /// `out += s · self x`.
    pub fn mul_add(&self, x: &[f64], s: f64, out: &mut [f64]) {
        let n = self.len();
        for k in 0..n {
            let mut v = self.diag[k] * x[k];
            if k > 0 {
                v += self.off[k - 1] * x[k - 1];
            }
            if k + 1 < n {
                v += self.off[k] * x[k + 1];
            }
            out[k] += s * v;
        }
    }

    /// `xᵀ self x`.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..self.len() {
            s += self.diag[k] * x[k] * x[k];
        }
        for k in 0..self.off.len() {
            s += 2.0 * self.off[k] * x[k] * x[k + 1];
        }
        s
    }
}

/// `L D Lᵀ` factorization of a symmetric positive definite tridiagonal
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalFactor {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl TridiagonalFactor {
    /// `None` if a pivot is not positive.
    pub fn new(m: &SymTridiagonal) -> Option<Self> {
        let n = m.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        for k in 0..n {
            d[k] = m.diag[k] - if k > 0 { l[k - 1] * l[k - 1] * d[k - 1] } else { 0.0 };
            if !(d[k] > 0.0) {
                return None;
            }
            if k + 1 < n {
                l[k] = m.off[k] / d[k];
            }
        }
        Some(TridiagonalFactor { d, l })
    }

    pub fn min_pivot(&self) -> f64 {
        self.d.iter().fold(f64::INFINITY, |m, d| m.min(*d))
    }

    /// Solves in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for k in 1..n {
            b[k] -= self.l[k - 1] * b[k - 1];
        }
        for k in 0..n {
            b[k] /= self.d[k];
        }
        for k in (0..n.saturating_sub(1)).rev() {
            b[k] -= self.l[k] * b[k + 1];
        }
    }
}
