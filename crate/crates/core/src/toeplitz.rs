//! Tridiagonal Toeplitz matrices, their closed-form inverse, and tridiagonal
//! linear solves.
//!
//! For a tridiagonal Toeplitz `T` of order `n` with sub-diagonal `a`,
//! diagonal `d` and super-diagonal `e`, `a e > 0`, the inverse has entries
//! (0-based `i`, `j`)
//!
//! ```text
//! (T^-1)_{ij} = s^{|i-j|} / sqrt(a e) * (sqrt(a/e))^{i-j}
//!               * p_{min(i,j)}(x) p_{n-1-max(i,j)}(x) / p_n(x),    x = d / (2 sqrt(a e))
//! ```
//!
//! with `s = -sign(e)` (so the familiar `(-1)^{i-j}` when `a, e > 0`) and
//! `p_n` the Chebyshev-like family `p_0 = 1`, `p_1 = 2x`,
//! `p_{k+1} = 2x p_k - p_{k-1}`.

use faer::Mat;

use crate::error::{Error, Result};

/// Order above which the inverse works with `ln |p_k|` instead of `p_k`.
pub const LOG_FORM_THRESHOLD: usize = 60;

/// Largest order for which a dense inverse is assembled downstream.
pub const DENSE_INVERSE_LIMIT: usize = 512;

/// Constant-diagonal tridiagonal matrix of order `order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridiagToeplitz {
    pub sub: f64,
    pub diag: f64,
    pub sup: f64,
    pub order: usize,
}

impl TridiagToeplitz {
    pub fn new(sub: f64, diag: f64, sup: f64, order: usize) -> Self {
        assert!(order >= 1, "tridiagonal Toeplitz matrix needs order >= 1");
        Self {
            sub,
            diag,
            sup,
            order,
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        if row == col {
            self.diag
        } else if row == col + 1 {
            self.sub
        } else if col == row + 1 {
            self.sup
        } else {
            0.0
        }
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.sup, self.diag, self.sub, self.order)
    }

    /// `self + scale * other`.
    pub fn combine(&self, scale: f64, other: &Self) -> Self {
        assert_eq!(self.order, other.order);
        Self::new(
            self.sub + scale * other.sub,
            self.diag + scale * other.diag,
            self.sup + scale * other.sup,
            self.order,
        )
    }

    /// `out = self * x`.
    pub fn mul_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.order;
        assert_eq!(x.len(), n);
        assert_eq!(out.len(), n);
        if n == 1 {
            out[0] = self.diag * x[0];
            return;
        }
        out[0] = self.diag * x[0] + self.sup * x[1];
        for i in 1..n - 1 {
            out[i] = self.sub * x[i - 1] + self.diag * x[i] + self.sup * x[i + 1];
        }
        out[n - 1] = self.sub * x[n - 2] + self.diag * x[n - 1];
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.order];
        self.mul_into(x, &mut out);
        out
    }

    /// Explicit `(sub, diag, sup)` bands of lengths `n-1, n, n-1`.
    pub fn bands(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.order;
        (
            vec![self.sub; n - 1],
            vec![self.diag; n],
            vec![self.sup; n - 1],
        )
    }

    pub fn to_dense(&self) -> Mat<f64> {
        Mat::from_fn(self.order, self.order, |i, j| self.entry(i, j))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.order)
            .map(|i| {
                let lo = i.saturating_sub(1);
                let hi = (i + 1).min(self.order - 1);
                (lo..=hi).map(|j| self.entry(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        self.transpose().norm_inf()
    }

    pub fn lu(&self) -> Result<TridiagLu> {
        let (sub, diag, sup) = self.bands();
        TridiagLu::new(&sub, &diag, &sup)
    }
}

/// `p_n(x)` by the three-term recurrence.
pub fn p_poly(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `p_n(x)` from the explicit alternating sum
/// `(2x)^n [1 + sum_{k=1}^{floor(n/2)} (-1)^k C(n-k, k) (4x^2)^{-k}]`.
///
/// Loses precision for large `n`; kept as a cross-check on [`p_poly`].
pub fn p_poly_explicit(n: usize, x: f64) -> f64 {
    // (2x)^n (4x^2)^-k = (2x)^(n-2k), which stays finite at x = 0
    (0..=n / 2)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(n - k, k) * (2.0 * x).powi((n - 2 * k) as i32)
        })
        .sum()
}

#[derive(Debug, Clone)]
enum PolyTable {
    Direct(Vec<f64>),
    /// `(ln |p_k|, sign p_k)`
    Log(Vec<(f64, f64)>),
}

impl PolyTable {
    fn build(n: usize, x: f64) -> Self {
        if n <= LOG_FORM_THRESHOLD || x.abs() <= 1.0 {
            let mut p = Vec::with_capacity(n + 1);
            p.push(1.0);
            if n >= 1 {
                p.push(2.0 * x);
            }
            for k in 2..=n {
                p.push(2.0 * x * p[k - 1] - p[k - 2]);
            }
            PolyTable::Direct(p)
        } else {
            // ratios r_k = p_k / p_{k-1} satisfy r_k = 2x - 1/r_{k-1} and
            // stay away from zero for |x| > 1
            let mut t = Vec::with_capacity(n + 1);
            t.push((0.0, 1.0));
            let mut r = 2.0 * x;
            let (mut ln, mut sign) = (0.0, 1.0);
            for k in 1..=n {
                if k > 1 {
                    r = 2.0 * x - 1.0 / r;
                }
                ln += r.abs().ln();
                sign *= r.signum();
                t.push((ln, sign));
            }
            PolyTable::Log(t)
        }
    }

    fn denominator_vanishes(&self, n: usize) -> bool {
        match self {
            PolyTable::Direct(p) => p[n].abs() < 1e-300,
            PolyTable::Log(t) => t[n].0 < 1e-300f64.ln(),
        }
    }
}

/// Closed-form inverse of a tridiagonal Toeplitz matrix.
#[derive(Debug, Clone)]
pub struct ToeplitzInverse {
    source: TridiagToeplitz,
    argument: f64,
    table: PolyTable,
}

impl ToeplitzInverse {
    pub fn new(source: &TridiagToeplitz) -> Result<Self> {
        let product = source.sub * source.sup;
        if !(product > 0.0) {
            return Err(Error::FormulaInapplicable(product));
        }
        let n = source.order;
        let argument = source.diag / (2.0 * product.sqrt());
        let table = PolyTable::build(n, argument);
        if table.denominator_vanishes(n) {
            return Err(Error::SingularDenominator);
        }
        Ok(Self {
            source: *source,
            argument,
            table,
        })
    }

    pub fn source(&self) -> &TridiagToeplitz {
        &self.source
    }

    /// `diag / (2 sqrt(sub sup))`, the argument of every `p_k`.
    pub fn argument(&self) -> f64 {
        self.argument
    }

    pub fn order(&self) -> usize {
        self.source.order
    }

    /// Entry `(row, col)`, 0-based. Indices outside the matrix read as 0.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let n = self.source.order;
        if row >= n || col >= n {
            return 0.0;
        }
        let (a, e) = (self.source.sub, self.source.sup);
        let lo = row.min(col);
        let hi = row.max(col);
        let dist = (hi - lo) as i32;
        let offset = row as i32 - col as i32;
        let alternation = if dist % 2 == 0 { 1.0 } else { -e.signum() };
        match &self.table {
            PolyTable::Direct(p) => {
                let geometric = (a / e).sqrt().powi(offset);
                alternation * geometric * p[lo] * p[n - 1 - hi] / (p[n] * (a * e).sqrt())
            }
            PolyTable::Log(t) => {
                let (l1, s1) = t[lo];
                let (l2, s2) = t[n - 1 - hi];
                let (ln_den, s_den) = t[n];
                let ln_mag =
                    offset as f64 * 0.5 * (a / e).ln() + l1 + l2 - ln_den - 0.5 * (a * e).ln();
                alternation * s1 * s2 * s_den * ln_mag.exp()
            }
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.order();
        Mat::from_fn(n, n, |i, j| self.entry(i, j))
    }
}

/// `(T^-1)_{row, col}` (0-based) by the closed form.
pub fn inverse_entry(t: &TridiagToeplitz, row: usize, col: usize) -> Result<f64> {
    let n = t.order;
    if row >= n || col >= n {
        return Err(Error::IndexOutOfRange { row, col, order: n });
    }
    Ok(ToeplitzInverse::new(t)?.entry(row, col))
}

/// LU factors of a general tridiagonal matrix.
///
/// Row-diagonally-dominant matrices are factored without row exchanges;
/// anything else falls back to partial pivoting, which fills a second
/// super-diagonal.
#[derive(Debug, Clone)]
pub struct TridiagLu {
    n: usize,
    /// multipliers
    dl: Vec<f64>,
    /// pivots (diagonal of U)
    d: Vec<f64>,
    /// first super-diagonal of U
    du: Vec<f64>,
    /// second super-diagonal of U, all zero without pivoting
    du2: Vec<f64>,
    /// `swapped[i]`: rows `i` and `i+1` were exchanged at step `i`
    swapped: Vec<bool>,
    inv_d: Vec<f64>,
    any_swap: bool,
}

fn row_dominant(sub: &[f64], diag: &[f64], sup: &[f64]) -> bool {
    let n = diag.len();
    (0..n).all(|i| {
        let left = if i > 0 { sub[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { sup[i].abs() } else { 0.0 };
        diag[i].abs() >= left + right
    })
}

impl TridiagLu {
    pub fn new(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for band in [sub, sup] {
            if band.len() != n - 1 {
                return Err(Error::DimensionMismatch {
                    expected: n - 1,
                    found: band.len(),
                });
            }
        }
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        if row_dominant(sub, diag, sup) {
            for i in 0..n - 1 {
                if d[i] == 0.0 {
                    return Err(Error::SingularSystem(i));
                }
                let m = dl[i] / d[i];
                dl[i] = m;
                d[i + 1] -= m * du[i];
            }
        } else {
            for i in 0..n - 1 {
                if d[i].abs() >= dl[i].abs() {
                    if d[i] == 0.0 {
                        return Err(Error::SingularSystem(i));
                    }
                    let m = dl[i] / d[i];
                    dl[i] = m;
                    d[i + 1] -= m * du[i];
                } else {
                    let m = d[i] / dl[i];
                    d[i] = dl[i];
                    dl[i] = m;
                    let tmp = du[i];
                    du[i] = d[i + 1];
                    d[i + 1] = tmp - m * d[i + 1];
                    if i + 2 < n {
                        du2[i] = du[i + 1];
                        du[i + 1] *= -m;
                    }
                    swapped[i] = true;
                }
            }
        }
        if let Some(i) = d.iter().position(|&p| p == 0.0) {
            return Err(Error::SingularSystem(i));
        }
        Ok(Self {
            n,
            inv_d: d.iter().map(|p| 1.0 / p).collect(),
            any_swap: swapped.iter().any(|&s| s),
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn pivoted(&self) -> bool {
        self.any_swap
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(
            b.len(),
            n,
            "right-hand side length must match the system order"
        );
        if !self.any_swap {
            for i in 0..n - 1 {
                b[i + 1] -= self.dl[i] * b[i];
            }
            b[n - 1] *= self.inv_d[n - 1];
            for i in (0..n - 1).rev() {
                b[i] = (b[i] - self.du[i] * b[i + 1]) * self.inv_d[i];
            }
            return;
        }
        for i in 0..n - 1 {
            if self.swapped[i] {
                let tmp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = tmp;
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Solves `A x = rhs` for tridiagonal `A` given by its three bands
/// (`sub[i] = A[i+1][i]`, `sup[i] = A[i][i+1]`).
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != diag.len() {
        return Err(Error::DimensionMismatch {
            expected: diag.len(),
            found: rhs.len(),
        });
    }
    Ok(TridiagLu::new(sub, diag, sup)?.solve(rhs))
}
