//! Symmetric pentadiagonal matrices: definiteness tests by banded Cholesky
//! and extreme eigenvalues by bisection on those tests.

use faer::Mat;

use crate::toeplitz::TridiagToeplitz;

/// Symmetric matrix with bandwidth 2.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPentadiagonal {
    pub diag: Vec<f64>,
    /// `off1[i] = A[i][i+1]`
    pub off1: Vec<f64>,
    /// `off2[i] = A[i][i+2]`
    pub off2: Vec<f64>,
}

impl SymmetricPentadiagonal {
    pub fn from_fn(n: usize, entry: impl Fn(usize, usize) -> f64) -> Self {
        Self {
            diag: (0..n).map(|i| entry(i, i)).collect(),
            off1: (0..n.saturating_sub(1)).map(|i| entry(i, i + 1)).collect(),
            off2: (0..n.saturating_sub(2)).map(|i| entry(i, i + 2)).collect(),
        }
    }

    /// `A B^T + B A^T` for tridiagonal Toeplitz `A`, `B`.
    pub fn symmetrized_product(a: &TridiagToeplitz, b: &TridiagToeplitz) -> Self {
        Self::from_fn(a.order, |i, j| {
            product_entry(a, b, i, j) + product_entry(b, a, i, j)
        })
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (i.min(j), i.max(j));
        match hi - lo {
            0 => self.diag[lo],
            1 => self.off1[lo],
            2 => self.off2[lo],
            _ => 0.0,
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.order();
        Mat::from_fn(n, n, |i, j| self.entry(i, j))
    }

    /// Gerschgorin interval `[min(a - r), max(a + r)]` containing the spectrum.
    pub fn gerschgorin_interval(&self) -> (f64, f64) {
        let n = self.order();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r: f64 = (i.saturating_sub(2)..(i + 3).min(n))
                .filter(|&j| j != i)
                .map(|j| self.entry(i, j).abs())
                .sum();
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Smallest Cholesky pivot of `A - shift I`, or `None` once a pivot is
    /// non-positive (the shifted matrix is not positive definite).
    pub fn cholesky_min_pivot(&self, shift: f64) -> Option<f64> {
        let n = self.order();
        // l1[i] = L[i][i-1], l2[i] = L[i][i-2], d[i] = L[i][i]
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        let mut min_pivot = f64::INFINITY;
        for i in 0..n {
            if i >= 2 {
                l2[i] = self.off2[i - 2] / d[i - 2];
            }
            if i >= 1 {
                let coupling = if i >= 2 { l2[i] * l1[i - 1] } else { 0.0 };
                l1[i] = (self.off1[i - 1] - coupling) / d[i - 1];
            }
            let pivot = self.diag[i] - shift - l1[i] * l1[i] - l2[i] * l2[i];
            if !(pivot > 0.0) {
                return None;
            }
            min_pivot = min_pivot.min(pivot);
            d[i] = pivot.sqrt();
        }
        Some(min_pivot)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky_min_pivot(0.0).is_some()
    }

    /// Smallest eigenvalue, bracketed by bisection to relative width `rel_tol`.
    pub fn min_eigenvalue(&self, rel_tol: f64) -> f64 {
        let (mut lo, _) = self.gerschgorin_interval();
        let mut hi = self.diag.iter().copied().fold(f64::INFINITY, f64::min);
        // A - lo I is positive semidefinite; A - hi I is not positive definite
        for _ in 0..200 {
            if hi - lo <= rel_tol * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.cholesky_min_pivot(mid).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// `(A B^T)_{ij}` for tridiagonal Toeplitz `A`, `B`.
fn product_entry(a: &TridiagToeplitz, b: &TridiagToeplitz, i: usize, j: usize) -> f64 {
    let n = a.order;
    let lo = i.max(j).saturating_sub(1);
    let hi = (i.min(j) + 1).min(n - 1);
    (lo..=hi).map(|k| a.entry(i, k) * b.entry(j, k)).sum()
}
