//! Norm and condition-number bounds for `W = X^-1 Y` and `I + W`.
//!
//! `|X^-1|_2` is bounded through the Gram matrix `Z = X X^T`, whose smallest
//! eigenvalue is bounded below by Gerschgorin discs; `|Y|_2` through
//! `sqrt(|Y|_1 |Y|_inf)`. Measured norms come from power iteration applied
//! matrix-free with tridiagonal solves.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::banded::SymmetricPentadiagonal;
use crate::error::{Error, Result};
use crate::scheme::{assemble_x, assemble_y, SchemeCoefficients};
use crate::spectral::{certify_stability, StabilityCertificate, DEFAULT_DENSE_CAP};
use crate::toeplitz::{TridiagLu, TridiagToeplitz};

/// `Z = X X^T`, symmetric pentadiagonal of order `N - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZMatrix {
    banded: SymmetricPentadiagonal,
}

pub fn z_matrix(coeffs: &SchemeCoefficients, intervals: usize) -> Result<ZMatrix> {
    if intervals < 2 {
        return Err(Error::TooFewIntervals(intervals));
    }
    let n = intervals - 1;
    let (c1, c2, c3) = (coeffs.c1, coeffs.c2, coeffs.c3);
    let banded = SymmetricPentadiagonal::from_fn(n, |i, j| match i.abs_diff(j) {
        0 => {
            let mut d = c2 * c2;
            if i > 0 {
                d += c1 * c1;
            }
            if i + 1 < n {
                d += c3 * c3;
            }
            d
        }
        1 => c2 * (c1 + c3),
        2 => c1 * c3,
        _ => 0.0,
    });
    Ok(ZMatrix { banded })
}

impl ZMatrix {
    pub fn order(&self) -> usize {
        self.banded.order()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.banded.entry(i, j)
    }

    pub fn banded(&self) -> &SymmetricPentadiagonal {
        &self.banded
    }

    pub fn to_dense(&self) -> Mat<f64> {
        self.banded.to_dense()
    }

    /// Lower bracket on the smallest eigenvalue, to relative width `rel_tol`.
    pub fn min_eigenvalue(&self, rel_tol: f64) -> f64 {
        self.banded.min_eigenvalue(rel_tol)
    }
}

/// `a - r` for the four distinct Gerschgorin discs of `Z`: first row,
/// second row, interior rows, last row.
pub fn z_disc_margins(coeffs: &SchemeCoefficients) -> [f64; 4] {
    let (dz, dv) = (coeffs.dz, coeffs.dv);
    let s = 1.0 / (dv * dv);
    [
        s * (5.0 / 9.0 - (2.0 - dz) * dz / 288.0),
        s * (4.0 / 9.0 - (4.0 - dz * dz) / 192.0),
        s * (4.0 / 9.0 - (4.0 - dz * dz) / 144.0),
        s * (5.0 / 9.0 + (2.0 + dz) * dz / 288.0),
    ]
}

/// Same four margins computed from centres and radii in `c1, c2, c3`.
pub fn z_disc_margins_from_stencil(coeffs: &SchemeCoefficients) -> [f64; 4] {
    let (c1, c2, c3) = (coeffs.c1, coeffs.c2, coeffs.c3);
    let near = c2 * (c1 + c3);
    let far = c1 * c3;
    let all = c1 * c1 + c2 * c2 + c3 * c3;
    [
        c2 * c2 + c3 * c3 - near - far,
        all - 2.0 * near - far,
        all - 2.0 * near - 2.0 * far,
        c1 * c1 + c2 * c2 - near - far,
    ]
}

/// Index of the smallest entry of `z_disc_margins`.
pub fn least_z_disc(coeffs: &SchemeCoefficients) -> usize {
    let m = z_disc_margins(coeffs);
    (0..4).min_by(|&a, &b| m[a].total_cmp(&m[b])).unwrap()
}

/// `(60 + dz^2) / (144 dv^2)`, a lower bound on the smallest eigenvalue of `Z`.
pub fn rho_min_lower_bound(dz: f64, dv: f64) -> f64 {
    (60.0 + dz * dz) / (144.0 * dv * dv)
}

/// `5 / (12 dv^2)`, the dz-free weakening of `rho_min_lower_bound`.
pub fn rho_min_simplified(dv: f64) -> f64 {
    5.0 / (12.0 * dv * dv)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBounds {
    /// `sqrt(12/5) dv >= |X^-1|_2`
    pub xinv: f64,
    /// `2c/dz^2 + c/6`, equal to `|Y|_1` and `|Y|_inf` once `N >= 4`
    pub y: f64,
    /// `xinv * y >= |W|_2`
    pub w: f64,
    /// `1 + w >= cond_2(I + W)` when the spectrum of `W` is in the right half-plane
    pub cond: f64,
}

pub fn norm_bounds(coeffs: &SchemeCoefficients) -> NormBounds {
    let xinv = (12.0f64 / 5.0).sqrt() * coeffs.dv;
    let y = 2.0 * coeffs.c / (coeffs.dz * coeffs.dz) + coeffs.c / 6.0;
    let w = xinv * y;
    NormBounds {
        xinv,
        y,
        w,
        cond: 1.0 + w,
    }
}

/// Time step making the `|W|_2` bound exactly one.
pub fn unit_bound_step(c: f64, dz: f64) -> f64 {
    (5.0f64 / 12.0).sqrt() / (2.0 * c / (dz * dz) + c / 6.0)
}

/// A real square operator known only through products with it and its transpose.
pub trait LinearOperator {
    fn order(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
    fn apply_transpose(&self, x: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerOptions {
    /// Stop once successive estimates of `sigma^2` differ by less than this, relatively.
    pub rel_tol: f64,
    pub max_iterations: usize,
    pub seeds: Vec<u64>,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iterations: 20_000,
            seeds: vec![1, 2, 3],
        }
    }
}

/// Largest singular value estimate from power iteration on `A^T A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Iterations of the restart that produced `value`.
    pub iterations: usize,
    /// Every restart met the tolerance.
    pub converged: bool,
}

fn normalize(v: &mut [f64]) -> f64 {
    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len > 0.0 {
        v.iter_mut().for_each(|x| *x /= len);
    }
    len
}

/// Power iteration with one restart per seed; returns the best estimate
/// whether or not it converged.
pub fn spectral_norm_estimate(op: &dyn LinearOperator, opts: &PowerOptions) -> NormEstimate {
    let n = op.order();
    let mut best = NormEstimate {
        value: 0.0,
        iterations: 0,
        converged: true,
    };
    if n == 0 {
        return best;
    }
    let mut x = vec![0.0; n];
    let mut ax = vec![0.0; n];
    for &seed in &opts.seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        x.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        normalize(&mut x);
        let mut previous = f64::NAN;
        let mut estimate = 0.0;
        let mut done = false;
        let mut iterations = 0;
        while iterations < opts.max_iterations {
            iterations += 1;
            op.apply(&x, &mut ax);
            let sq = ax.iter().map(|v| v * v).sum::<f64>();
            estimate = sq;
            if (sq - previous).abs() <= opts.rel_tol * sq {
                done = true;
                break;
            }
            previous = sq;
            op.apply_transpose(&ax, &mut x);
            if normalize(&mut x) == 0.0 {
                done = true;
                break;
            }
        }
        let value = estimate.sqrt();
        best.converged &= done;
        if value > best.value {
            best.value = value;
            best.iterations = iterations;
        }
    }
    best
}

/// As `spectral_norm_estimate`, but non-convergence is an error carrying
/// the best estimate.
pub fn spectral_norm(op: &dyn LinearOperator, opts: &PowerOptions) -> Result<f64> {
    let est = spectral_norm_estimate(op, opts);
    if est.converged {
        Ok(est.value)
    } else {
        Err(Error::NotConverged {
            estimate: est.value,
            iterations: est.iterations,
        })
    }
}

/// Dense matrix as an operator.
pub struct DenseOperator<'a>(pub &'a Mat<f64>);

impl LinearOperator for DenseOperator<'_> {
    fn order(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..x.len()).map(|j| self.0[(i, j)] * x[j]).sum();
        }
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..x.len()).map(|i| self.0[(i, j)] * x[i]).sum();
        }
    }
}

/// Shared factorizations for the operators built from `X` and `Y`.
pub struct SchemeOperators {
    x: TridiagToeplitz,
    y: TridiagToeplitz,
    xt: TridiagToeplitz,
    yt: TridiagToeplitz,
    x_lu: TridiagLu,
    xt_lu: TridiagLu,
    sum_lu: TridiagLu,
    sum_t_lu: TridiagLu,
}

impl SchemeOperators {
    pub fn new(coeffs: &SchemeCoefficients, intervals: usize) -> Result<Self> {
        let x = assemble_x(coeffs, intervals)?;
        let y = assemble_y(coeffs, intervals)?;
        let sum = x.combine(1.0, &y);
        Ok(Self {
            x_lu: x.lu()?,
            xt_lu: x.transpose().lu()?,
            sum_lu: sum.lu()?,
            sum_t_lu: sum.transpose().lu()?,
            xt: x.transpose(),
            yt: y.transpose(),
            x,
            y,
        })
    }

    pub fn order(&self) -> usize {
        self.x.order
    }

    fn x_inverse_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut t = x.to_vec();
        self.xt_lu.solve_in_place(&mut t);
        t
    }

    /// `W = X^-1 Y`.
    pub fn w(&self) -> WOperator<'_> {
        WOperator(self)
    }

    pub fn x_inverse(&self) -> XInverseOperator<'_> {
        XInverseOperator(self)
    }

    pub fn identity_plus_w(&self) -> IdentityPlusW<'_> {
        IdentityPlusW(self)
    }

    /// `(I + W)^-1 = (X + Y)^-1 X`.
    pub fn identity_plus_w_inverse(&self) -> IdentityPlusWInverse<'_> {
        IdentityPlusWInverse(self)
    }
}

pub struct WOperator<'a>(&'a SchemeOperators);
pub struct XInverseOperator<'a>(&'a SchemeOperators);
pub struct IdentityPlusW<'a>(&'a SchemeOperators);
pub struct IdentityPlusWInverse<'a>(&'a SchemeOperators);

impl LinearOperator for WOperator<'_> {
    fn order(&self) -> usize {
        self.0.order()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.0.y.mul_into(x, out);
        self.0.x_lu.solve_in_place(out);
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        self.0.yt.mul_into(&self.0.x_inverse_transpose(x), out);
    }
}

impl LinearOperator for XInverseOperator<'_> {
    fn order(&self) -> usize {
        self.0.order()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
        self.0.x_lu.solve_in_place(out);
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
        self.0.xt_lu.solve_in_place(out);
    }
}

impl LinearOperator for IdentityPlusW<'_> {
    fn order(&self) -> usize {
        self.0.order()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        WOperator(self.0).apply(x, out);
        out.iter_mut().zip(x).for_each(|(o, v)| *o += v);
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        WOperator(self.0).apply_transpose(x, out);
        out.iter_mut().zip(x).for_each(|(o, v)| *o += v);
    }
}

impl LinearOperator for IdentityPlusWInverse<'_> {
    fn order(&self) -> usize {
        self.0.order()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.0.x.mul_into(x, out);
        self.0.sum_lu.solve_in_place(out);
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        let mut t = x.to_vec();
        self.0.sum_t_lu.solve_in_place(&mut t);
        self.0.xt.mul_into(&t, out);
    }
}

/// Measured `|W|_2` over its bound, the quantity tabulated against `(dz, dv)`.
pub fn norm_ratio(
    coeffs: &SchemeCoefficients,
    intervals: usize,
    opts: &PowerOptions,
) -> Result<(NormEstimate, f64)> {
    let ops = SchemeOperators::new(coeffs, intervals)?;
    let est = spectral_norm_estimate(&ops.w(), opts);
    Ok((est, est.value / norm_bounds(coeffs).w))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionOptions {
    pub power: PowerOptions,
    /// Orders up to which dense eigenvalues may certify the spectrum of `W`.
    pub dense_cap: usize,
    /// Orders up to which dense singular values replace power iteration.
    pub svd_limit: usize,
    /// Also run power iteration at dense sizes and report the gap.
    pub cross_check: bool,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        Self {
            power: PowerOptions::default(),
            dense_cap: DEFAULT_DENSE_CAP,
            svd_limit: 512,
            cross_check: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub measured_w_norm: f64,
    pub w_norm_bound: f64,
    pub ratio: f64,
    /// `cond_2(I + W)`; absent when the spectrum of `W` was not certified.
    pub measured_cond: Option<f64>,
    pub cond_bound: f64,
    pub xinv_norm_bound: f64,
    pub y_norm_1inf: f64,
    /// All power iterations behind the measured values converged (or dense
    /// singular values were used).
    pub converged: bool,
    /// Largest relative gap between power iteration and dense singular
    /// values, when both were computed.
    pub svd_discrepancy: Option<f64>,
    pub certificate: StabilityCertificate,
}

fn dense_extreme_singular_values(a: &Mat<f64>) -> Result<(f64, f64)> {
    let s = a.singular_values().map_err(|_| Error::SvdNotConverged)?;
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((max, min))
}

pub fn condition_report(
    coeffs: &SchemeCoefficients,
    intervals: usize,
    opts: &ConditionOptions,
) -> Result<ConditionReport> {
    let bounds = norm_bounds(coeffs);
    let ops = SchemeOperators::new(coeffs, intervals)?;
    let certificate = certify_stability(coeffs, intervals, opts.dense_cap)?;
    let n = ops.order();

    let dense = n <= opts.svd_limit;
    let power = !dense || opts.cross_check;
    let w_est = power.then(|| spectral_norm_estimate(&ops.w(), &opts.power));
    let cond_est = if power && certificate.is_certified() {
        let fwd = spectral_norm_estimate(&ops.identity_plus_w(), &opts.power);
        let inv = spectral_norm_estimate(&ops.identity_plus_w_inverse(), &opts.power);
        Some((fwd.value * inv.value, fwd.converged && inv.converged))
    } else {
        None
    };

    let (measured_w_norm, measured_cond, converged, svd_discrepancy) = if dense {
        let w = crate::spectral::assemble_w(coeffs, intervals)?;
        let (w_norm, _) = dense_extreme_singular_values(&w)?;
        let mut gap = w_est.map(|e| (e.value - w_norm).abs() / w_norm);
        let cond = if certificate.is_certified() {
            let i_plus_w = Mat::from_fn(n, n, |i, j| w[(i, j)] + if i == j { 1.0 } else { 0.0 });
            let (hi, lo) = dense_extreme_singular_values(&i_plus_w)?;
            let dense_cond = hi / lo;
            if let (Some(g), Some((power_cond, _))) = (gap.as_mut(), cond_est) {
                *g = g.max((power_cond - dense_cond).abs() / dense_cond);
            }
            Some(dense_cond)
        } else {
            None
        };
        (w_norm, cond, true, gap)
    } else {
        let w_est = w_est.expect("power iteration runs above the dense limit");
        let converged = w_est.converged && cond_est.is_none_or(|(_, ok)| ok);
        (w_est.value, cond_est.map(|(v, _)| v), converged, None)
    };

    Ok(ConditionReport {
        measured_w_norm,
        w_norm_bound: bounds.w,
        ratio: measured_w_norm / bounds.w,
        measured_cond,
        cond_bound: bounds.cond,
        xinv_norm_bound: bounds.xinv,
        y_norm_1inf: bounds.y,
        converged,
        svd_discrepancy,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::coefficients;
    use crate::spectral::assemble_w;

    fn example() -> SchemeCoefficients {
        coefficients(1.0, 0.5, 0.1).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn z_equals_gram_matrix() {
        let k = example();
        let z = z_matrix(&k, 3).unwrap();
        assert!((z.entry(0, 0) - 69.835_1).abs() < 5e-4);
        assert!((z.entry(1, 1) - 70.529_5).abs() < 5e-4);
        assert!((z.entry(0, 1) - 13.888_9).abs() < 5e-4);

        let z = z_matrix(&k, 2).unwrap();
        assert_eq!(z.order(), 1);
        assert!(rel(z.entry(0, 0), k.c2 * k.c2) < 1e-15);

        for &(c, dz, dv, n) in &[(1.0, 0.5, 0.1, 9), (0.625, 0.01, 1e-4, 40)] {
            let k = coefficients(c, dz, dv).unwrap();
            let x = assemble_x(&k, n).unwrap().to_dense();
            let gram = &x * x.transpose();
            let z = z_matrix(&k, n).unwrap().to_dense();
            let diff = (0..n - 1)
                .map(|i| {
                    (0..n - 1)
                        .map(|j| (gram[(i, j)] - z[(i, j)]).abs())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            let scale = (0..n - 1)
                .map(|i| (0..n - 1).map(|j| gram[(i, j)].abs()).sum::<f64>())
                .fold(0.0, f64::max);
            assert!(diff <= 1e-12 * scale);
        }
    }

    #[test]
    fn disc_margins() {
        let k = example();
        let m = z_disc_margins(&k);
        assert!((m[2] - 41.840_3).abs() < 5e-5);
        assert!(rel(m[2], (60.0 + 0.25) / (144.0 * 0.01)) < 1e-13);
        assert!(rel(m[3] - m[0], 0.5 / 72.0 / 0.01) < 1e-12);
        assert_eq!(least_z_disc(&k), 2);

        let stencil = z_disc_margins_from_stencil(&k);
        for i in 0..4 {
            assert!(rel(m[i], stencil[i]) < 1e-12, "disc {i}");
        }
    }

    #[test]
    fn rho_min_bounds() {
        assert!((rho_min_lower_bound(0.5, 0.1) - 41.840_3).abs() < 5e-5);
        assert!((rho_min_simplified(0.1) - 41.666_7).abs() < 5e-5);
        let k = coefficients(0.625, 1.0 / 64.0, 1e-3).unwrap();
        let z = z_matrix(&k, 64).unwrap();
        assert!(z.min_eigenvalue(1e-12) >= rho_min_lower_bound(k.dz, k.dv));
    }

    #[test]
    fn norm_bounds_example() {
        let b = norm_bounds(&example());
        assert!((b.y - 8.166_666_7).abs() < 5e-8);
        assert!((b.xinv - 0.154_919_3).abs() < 5e-8);
        assert!((b.w - 1.265_174_6).abs() < 5e-8);
        assert!((b.cond - 2.265_174_6).abs() < 5e-8);

        let k = example();
        assert!(rel(k.y1.abs() + k.y2.abs() + k.y3.abs(), b.y) < 1e-14);

        let dv = unit_bound_step(0.625, 1.0 / 512.0);
        let k = coefficients(0.625, 1.0 / 512.0, dv).unwrap();
        assert!((norm_bounds(&k).w - 1.0).abs() < 1e-14);
    }

    #[test]
    fn power_iteration_trivial_operators() {
        let id = Mat::<f64>::identity(5, 5);
        let opts = PowerOptions::default();
        assert!((spectral_norm(&DenseOperator(&id), &opts).unwrap() - 1.0).abs() < 1e-14);
        let d = Mat::from_fn(2, 2, |i, j| if i == j { [3.0, 1.0][i] } else { 0.0 });
        assert!((spectral_norm(&DenseOperator(&d), &opts).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn small_w_norm() {
        let k = example();
        let w = assemble_w(&k, 3).unwrap();
        // largest root of the characteristic polynomial of W^T W
        let (a, b, c, d) = (w[(0, 0)], w[(0, 1)], w[(1, 0)], w[(1, 1)]);
        let tr = a * a + b * b + c * c + d * d;
        let det = (a * d - b * c).powi(2);
        let oracle = (0.5 * (tr + (tr * tr - 4.0 * det).sqrt())).sqrt();
        assert!((oracle - 0.819_748_0).abs() < 5e-8);

        let ops = SchemeOperators::new(&k, 3).unwrap();
        let got = spectral_norm(&ops.w(), &PowerOptions::default()).unwrap();
        assert!(rel(got, oracle) < 1e-10);
    }

    #[test]
    fn matrix_free_operators_match_dense() {
        let k = coefficients(0.625, 1.0 / 16.0, 1e-2).unwrap();
        let n = 16;
        let ops = SchemeOperators::new(&k, n).unwrap();
        let w = assemble_w(&k, n).unwrap();
        let m = n - 1;
        let i_plus_w = Mat::from_fn(m, m, |i, j| w[(i, j)] + if i == j { 1.0 } else { 0.0 });
        let inverse = faer::linalg::solvers::DenseSolveCore::inverse(&i_plus_w.partial_piv_lu());
        let x: Vec<f64> = (0..m).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut out = vec![0.0; m];
        let mut want = vec![0.0; m];
        let ops_list: [(&dyn LinearOperator, &Mat<f64>); 3] = [
            (&ops.w(), &w),
            (&ops.identity_plus_w(), &i_plus_w),
            (&ops.identity_plus_w_inverse(), &inverse),
        ];
        for (op, dense) in ops_list {
            op.apply(&x, &mut out);
            DenseOperator(dense).apply(&x, &mut want);
            assert!(out
                .iter()
                .zip(&want)
                .all(|(a, b)| (a - b).abs() < 1e-10 * b.abs().max(1.0)));
            op.apply_transpose(&x, &mut out);
            DenseOperator(dense).apply_transpose(&x, &mut want);
            assert!(out
                .iter()
                .zip(&want)
                .all(|(a, b)| (a - b).abs() < 1e-10 * b.abs().max(1.0)));
        }
    }

    #[test]
    fn report_for_a_small_table_cell() {
        let k = coefficients(0.625, 1.0 / 8.0, 1e-3).unwrap();
        let report = condition_report(&k, 8, &ConditionOptions::default()).unwrap();
        assert!((report.ratio - 0.9140).abs() < 5e-4);
        assert!(report.certificate.is_certified());
        let cond = report.measured_cond.unwrap();
        assert!(cond >= 1.0 && cond <= report.cond_bound);
        assert!(report.svd_discrepancy.unwrap() < 1e-6);
    }
}
