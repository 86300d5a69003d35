//! Spectrum of `W = X^-1 Y` and of the amplification matrix
//! `H = (I + W)^-1 (I - W)`.
//!
//! Each eigenpair `(rho, beta)` of `W` gives `H beta = (1 - rho)/(1 + rho) beta`,
//! so the scheme is stable when every eigenvalue of `W` has positive real
//! part. The spectrum is located three ways: Gerschgorin disks, a dense
//! eigensolver, and a field-of-values test on the symmetric part of `W`.

use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::banded::SymmetricPentadiagonal;
use crate::error::{Error, Result};
use crate::scheme::{assemble_x, assemble_y, SchemeCoefficients};
use crate::toeplitz::{p_poly, ToeplitzInverse};

/// Largest matrix order handed to the dense eigensolver.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Relative eigen-residual accepted from the dense eigensolver.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// How `W = X^-1 Y` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WRoute {
    /// One tridiagonal solve `X w_j = Y e_j` per column.
    #[default]
    TridiagonalSolves,
    /// Closed-form entries of `X^-1` expanded against the three bands of `Y`.
    ClosedForm,
}

pub fn assemble_w(coeffs: &SchemeCoefficients, intervals: usize) -> Result<Mat<f64>> {
    assemble_w_via(coeffs, intervals, WRoute::TridiagonalSolves)
}

pub fn assemble_w_via(
    coeffs: &SchemeCoefficients,
    intervals: usize,
    route: WRoute,
) -> Result<Mat<f64>> {
    let x = assemble_x(coeffs, intervals)?;
    let y = assemble_y(coeffs, intervals)?;
    let n = x.order;
    match route {
        WRoute::TridiagonalSolves => {
            let lu = x.lu()?;
            let mut w = Mat::zeros(n, n);
            let mut col = vec![0.0; n];
            for j in 0..n {
                col.iter_mut().for_each(|v| *v = 0.0);
                if j > 0 {
                    col[j - 1] = y.sup;
                }
                col[j] = y.diag;
                if j + 1 < n {
                    col[j + 1] = y.sub;
                }
                lu.solve_in_place(&mut col);
                for (i, &v) in col.iter().enumerate() {
                    w[(i, j)] = v;
                }
            }
            Ok(w)
        }
        WRoute::ClosedForm => {
            let inv = ToeplitzInverse::new(&x)?;
            // W_{ij} = Xinv_{i,j-1} y3 + Xinv_{ij} y2 + Xinv_{i,j+1} y1,
            // where out-of-range entries of Xinv read as zero
            Ok(Mat::from_fn(n, n, |i, j| {
                let left = if j > 0 { inv.entry(i, j - 1) } else { 0.0 };
                left * y.sup + inv.entry(i, j) * y.diag + inv.entry(i, j + 1) * y.sub
            }))
        }
    }
}

/// Disk `D(center, radius)` from one row of a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GerschgorinDisk {
    pub row: usize,
    pub center: f64,
    pub radius: f64,
}

impl GerschgorinDisk {
    /// `center - radius`: every point of the disk has real part at least this.
    pub fn margin(&self) -> f64 {
        self.center - self.radius
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        (z - Complex64::new(self.center, 0.0)).norm() <= self.radius + slack
    }
}

pub fn gerschgorin(b: MatRef<'_, f64>) -> Vec<GerschgorinDisk> {
    assert_eq!(
        b.nrows(),
        b.ncols(),
        "Gerschgorin disks need a square matrix"
    );
    (0..b.nrows())
        .map(|row| {
            let radius = (0..b.ncols())
                .filter(|&j| j != row)
                .map(|j| b[(row, j)].abs())
                .sum();
            GerschgorinDisk {
                row,
                center: b[(row, row)],
                radius,
            }
        })
        .collect()
}

/// `min_q (a_q - r_q)`, a lower bound on the real part of every eigenvalue.
pub fn certified_lower_bound(disks: &[GerschgorinDisk]) -> f64 {
    disks
        .iter()
        .map(GerschgorinDisk::margin)
        .fold(f64::INFINITY, f64::min)
}

pub fn in_union(disks: &[GerschgorinDisk], z: Complex64, slack: f64) -> bool {
    disks.iter().any(|d| d.contains(z, slack))
}

/// Gerschgorin disks of `W` one row at a time, without storing `W`.
///
/// Row `i` of `X^-1` solves `X^T r = e_i`; row `i` of `W` is then `r^T Y`.
pub fn w_row_disks(coeffs: &SchemeCoefficients, intervals: usize) -> Result<Vec<GerschgorinDisk>> {
    let x = assemble_x(coeffs, intervals)?;
    let y = assemble_y(coeffs, intervals)?;
    let n = x.order;
    let lu_t = x.transpose().lu()?;
    let yt = y.transpose();
    let mut r = vec![0.0; n];
    let mut row = vec![0.0; n];
    let mut disks = Vec::with_capacity(n);
    for i in 0..n {
        r.iter_mut().for_each(|v| *v = 0.0);
        r[i] = 1.0;
        lu_t.solve_in_place(&mut r);
        yt.mul_into(&r, &mut row);
        let radius = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v.abs())
            .sum();
        disks.push(GerschgorinDisk {
            row: i,
            center: row[i],
            radius,
        });
    }
    Ok(disks)
}

/// Closed-form Gerschgorin margins `(a1 - r1, a2 - r2)` of `W` for `N = 3`.
///
/// Both are written with the prefactor `24 dv / sqrt(4 - dz^2)`, the
/// geometric factor `g = sqrt((2 + dz)/(2 - dz))` and `p_1, p_2` evaluated at
/// `10 / sqrt(4 - dz^2)`.
pub fn prop1_margins(coeffs: &SchemeCoefficients) -> Result<(f64, f64)> {
    let dz = coeffs.dz;
    if dz >= 2.0 {
        return Err(Error::StepTooLarge(dz));
    }
    let root = (4.0 - dz * dz).sqrt();
    let prefactor = 24.0 * coeffs.dv / root;
    let g = ((2.0 + dz) / (2.0 - dz)).sqrt();
    let arg = 10.0 / root;
    let (p1, p2) = (p_poly(1, arg), p_poly(2, arg));
    let (y1, y2, y3) = (coeffs.y1, coeffs.y2, coeffs.y3);

    let first = prefactor * (y2 * p1 / p2 - y1 / (g * p2) + y3 * p1 / p2 - y2 / (g * p2));
    let second = prefactor * (y2 * p1 / p2 - g * y3 / p2 - g * y2 / p2 + y1 * p1 / p2);
    Ok((first, second))
}

fn check_square(b: MatRef<'_, f64>, cap: usize) -> Result<()> {
    if b.nrows() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: b.nrows(),
            found: b.ncols(),
        });
    }
    if b.nrows() > cap {
        return Err(Error::DenseCapExceeded {
            order: b.nrows(),
            cap,
        });
    }
    Ok(())
}

fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// All eigenvalues of a real square matrix, sorted by real then imaginary part.
pub fn eigenvalues(b: MatRef<'_, f64>, cap: usize) -> Result<Vec<Complex64>> {
    check_square(b, cap)?;
    if b.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut values = b.eigenvalues().map_err(|_| Error::EigenNotConverged)?;
    sort_spectrum(&mut values);
    Ok(values)
}

/// Eigenvalues together with the largest relative eigen-residual
/// `max_j |B beta_j - rho_j beta_j| / (|beta_j| |B|)`.
///
/// `|B|` is taken as the largest column norm, a lower bound on the spectral
/// norm, so the reported residual over-estimates the true relative one.
pub fn eigenvalues_with_residual(b: MatRef<'_, f64>, cap: usize) -> Result<(Vec<Complex64>, f64)> {
    check_square(b, cap)?;
    let n = b.nrows();
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let evd = b.eigen().map_err(|_| Error::EigenNotConverged)?;
    let vectors = evd.U();
    let values: Vec<Complex64> = (0..n).map(|j| evd.S()[j]).collect();
    let bc = Mat::<Complex64>::from_fn(n, n, |i, j| Complex64::new(b[(i, j)], 0.0));
    let product = &bc * vectors;

    let scale = (0..n)
        .map(|j| (0..n).map(|i| b[(i, j)] * b[(i, j)]).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for (j, rho) in values.iter().enumerate() {
        let mut res = 0.0;
        let mut len = 0.0;
        for i in 0..n {
            res += (product[(i, j)] - rho * vectors[(i, j)]).norm_sqr();
            len += vectors[(i, j)].norm_sqr();
        }
        let rel = if scale > 0.0 {
            res.sqrt() / (len.sqrt() * scale)
        } else {
            res.sqrt()
        };
        worst = worst.max(rel);
    }
    let mut values = values;
    sort_spectrum(&mut values);
    Ok((values, worst))
}

/// Image of the spectrum of `W` under `rho -> (1 - rho)/(1 + rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Amplification {
    pub factors: Vec<Complex64>,
    pub min_real_part: f64,
    pub spectral_radius: f64,
    /// `min Re rho > 0`; the boundary case `Re rho = 0` is not certified.
    pub stable: bool,
}

pub fn amplification_spectrum(eigs: &[Complex64]) -> Result<Amplification> {
    let one = Complex64::new(1.0, 0.0);
    let factors = eigs
        .iter()
        .map(|&rho| {
            if (one + rho).norm() == 0.0 {
                Err(Error::SingularAmplification)
            } else {
                Ok((one - rho) / (one + rho))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let min_real_part = eigs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let spectral_radius = factors.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(Amplification {
        factors,
        min_real_part,
        spectral_radius,
        stable: min_real_part > 0.0,
    })
}

/// Everything known about the spectrum of `W` for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub eigenvalues: Vec<Complex64>,
    pub min_real_part: f64,
    pub disks: Vec<GerschgorinDisk>,
    pub amplification_eigs: Vec<Complex64>,
    pub spectral_radius_h: f64,
    /// Largest relative eigen-residual, when eigenvectors were computed.
    pub residual: Option<f64>,
    pub stable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub dense_cap: usize,
    pub verify_residual: bool,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            dense_cap: DEFAULT_DENSE_CAP,
            verify_residual: true,
        }
    }
}

pub fn spectral_report(
    coeffs: &SchemeCoefficients,
    intervals: usize,
    opts: &SpectralOptions,
) -> Result<SpectralReport> {
    let n = intervals.saturating_sub(1);
    if n > opts.dense_cap {
        return Err(Error::DenseCapExceeded {
            order: n,
            cap: opts.dense_cap,
        });
    }
    let w = assemble_w(coeffs, intervals)?;
    let (eigenvalues, residual) = if opts.verify_residual {
        let (values, res) = eigenvalues_with_residual(w.as_ref(), opts.dense_cap)?;
        if res > EIGEN_RESIDUAL_TOL {
            return Err(Error::EigenNotConverged);
        }
        (values, Some(res))
    } else {
        (eigenvalues(w.as_ref(), opts.dense_cap)?, None)
    };
    let amp = amplification_spectrum(&eigenvalues)?;
    Ok(SpectralReport {
        disks: gerschgorin(w.as_ref()),
        min_real_part: amp.min_real_part,
        spectral_radius_h: amp.spectral_radius,
        stable: amp.stable,
        amplification_eigs: amp.factors,
        eigenvalues,
        residual,
    })
}

/// `min Re rho(W)` from the dense eigensolver.
pub fn min_real_part(
    coeffs: &SchemeCoefficients,
    intervals: usize,
    dense_cap: usize,
) -> Result<f64> {
    let n = intervals.saturating_sub(1);
    if n > dense_cap {
        return Err(Error::DenseCapExceeded {
            order: n,
            cap: dense_cap,
        });
    }
    let w = assemble_w(coeffs, intervals)?;
    Ok(eigenvalues(w.as_ref(), dense_cap)?
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min))
}

/// Smallest Cholesky pivot of `Y X^T + X Y^T` if that matrix is positive
/// definite, `None` otherwise.
///
/// `W + W^T = X^-1 (Y X^T + X Y^T) X^-T`, so a positive definite result puts
/// the field of values of `W` in the open right half-plane: every eigenvalue
/// of `W` has positive real part and `|(I + W)^-1|_2 < 1`, `|H|_2 < 1`.
pub fn field_of_values_margin(
    coeffs: &SchemeCoefficients,
    intervals: usize,
) -> Result<Option<f64>> {
    let x = assemble_x(coeffs, intervals)?;
    let y = assemble_y(coeffs, intervals)?;
    Ok(SymmetricPentadiagonal::symmetrized_product(&y, &x).cholesky_min_pivot(0.0))
}

/// How (if at all) positivity of the real parts of `spec(W)` was established.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilityCertificate {
    /// `W + W^T` positive definite.
    FieldOfValues {
        min_pivot: f64,
    },
    /// Dense eigenvalues with `min Re rho > 0`.
    Eigenvalues {
        min_real_part: f64,
    },
    /// Every Gerschgorin disk of `W` in the right half-plane.
    Gerschgorin {
        margin: f64,
    },
    Unverified,
}

impl StabilityCertificate {
    pub fn is_certified(&self) -> bool {
        !matches!(self, StabilityCertificate::Unverified)
    }

    pub fn label(&self) -> &'static str {
        match self {
            StabilityCertificate::FieldOfValues { .. } => "field-of-values",
            StabilityCertificate::Eigenvalues { .. } => "eigenvalues",
            StabilityCertificate::Gerschgorin { .. } => "gerschgorin",
            StabilityCertificate::Unverified => "unverified",
        }
    }
}

/// Tries the O(N) field-of-values test first, then dense eigenvalues within
/// `dense_cap`, then row-wise Gerschgorin disks.
pub fn certify_stability(
    coeffs: &SchemeCoefficients,
    intervals: usize,
    dense_cap: usize,
) -> Result<StabilityCertificate> {
    if let Some(min_pivot) = field_of_values_margin(coeffs, intervals)? {
        return Ok(StabilityCertificate::FieldOfValues { min_pivot });
    }
    if intervals - 1 <= dense_cap {
        let min_real_part = min_real_part(coeffs, intervals, dense_cap)?;
        if min_real_part > 0.0 {
            return Ok(StabilityCertificate::Eigenvalues { min_real_part });
        }
        return Ok(StabilityCertificate::Unverified);
    }
    let margin = certified_lower_bound(&w_row_disks(coeffs, intervals)?);
    if margin > 0.0 {
        Ok(StabilityCertificate::Gerschgorin { margin })
    } else {
        Ok(StabilityCertificate::Unverified)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::coefficients;

    fn example() -> SchemeCoefficients {
        coefficients(1.0, 0.5, 0.1).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn scalar_case() {
        let k = coefficients(0.625, 0.125, 1e-3).unwrap();
        let w = assemble_w(&k, 2).unwrap();
        let expected = 0.6 * k.c * (2.0 * k.b + k.dv / 6.0);
        assert!(close(w[(0, 0)], expected, 1e-14));
    }

    #[test]
    fn two_by_two_example() {
        let k = example();
        // W = X^-1 Y by the 2x2 adjugate
        let det = k.c2 * k.c2 - k.c1 * k.c3;
        let xinv = [[k.c2 / det, -k.c3 / det], [-k.c1 / det, k.c2 / det]];
        let y = [[k.y2, k.y3], [k.y1, k.y2]];
        let oracle = |i: usize, j: usize| xinv[i][0] * y[0][j] + xinv[i][1] * y[1][j];
        for route in [WRoute::TridiagonalSolves, WRoute::ClosedForm] {
            let w = assemble_w_via(&k, 3, route).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!(close(w[(i, j)], oracle(i, j), 1e-12), "{route:?} ({i},{j})");
                }
            }
        }
        let w = assemble_w(&k, 3).unwrap();
        assert!((w[(0, 0)] - 0.517_728_7).abs() < 5e-8);
        assert!((w[(0, 1)] + 0.223_848_6).abs() < 5e-8);
        assert!((w[(1, 0)] + 0.369_716_1).abs() < 5e-8);
        assert!((w[(1, 1)] - 0.517_981_1).abs() < 5e-8);
    }

    #[test]
    fn routes_agree_and_satisfy_the_defining_identity() {
        for &(c, dz, dv, n) in &[
            (0.625, 0.125, 1e-3, 8),
            (5.0, 0.01, 0.3, 80),
            (0.1, 1.5, 1e-6, 3),
        ] {
            let k = coefficients(c, dz, dv).unwrap();
            let a = assemble_w_via(&k, n, WRoute::TridiagonalSolves).unwrap();
            let b = assemble_w_via(&k, n, WRoute::ClosedForm).unwrap();
            let scale = (0..n - 1)
                .flat_map(|i| (0..n - 1).map(move |j| (i, j)))
                .map(|ij| a[ij].abs())
                .fold(0.0, f64::max);
            for i in 0..n - 1 {
                for j in 0..n - 1 {
                    assert!((a[(i, j)] - b[(i, j)]).abs() <= 1e-9 * scale);
                }
            }
            let x = assemble_x(&k, n).unwrap().to_dense();
            let y = assemble_y(&k, n).unwrap();
            let residual = &x * &a - y.to_dense();
            let worst = (0..n - 1)
                .map(|i| (0..n - 1).map(|j| residual[(i, j)].abs()).sum::<f64>())
                .fold(0.0, f64::max);
            assert!(worst <= 1e-9 * y.norm_inf());
        }
    }

    #[test]
    fn gerschgorin_examples() {
        let b = Mat::from_fn(2, 2, |i, j| if i == j { 2.0 } else { -1.0 });
        let disks = gerschgorin(b.as_ref());
        assert_eq!(disks.len(), 2);
        assert!(disks.iter().all(|d| d.center == 2.0 && d.radius == 1.0));
        for rho in eigenvalues(b.as_ref(), 10).unwrap() {
            assert!(in_union(&disks, rho, 1e-12));
        }

        let d = Mat::from_fn(3, 3, |i, j| if i == j { i as f64 + 1.0 } else { 0.0 });
        assert!(gerschgorin(d.as_ref())
            .iter()
            .all(|disk| disk.radius == 0.0));

        let w = assemble_w(&example(), 3).unwrap();
        let disks = gerschgorin(w.as_ref());
        assert!((disks[0].center - 0.517_728_7).abs() < 5e-8);
        assert!((disks[0].radius - 0.223_848_6).abs() < 5e-8);
        assert!((disks[1].center - 0.517_981_1).abs() < 5e-8);
        assert!((disks[1].radius - 0.369_716_1).abs() < 5e-8);
    }

    #[test]
    fn streamed_rows_match_dense_disks() {
        let k = coefficients(0.625, 1.0 / 64.0, 1e-2).unwrap();
        let dense = gerschgorin(assemble_w(&k, 64).unwrap().as_ref());
        let streamed = w_row_disks(&k, 64).unwrap();
        for (a, b) in dense.iter().zip(&streamed) {
            assert!((a.center - b.center).abs() <= 1e-12 * a.center.abs());
            assert!((a.radius - b.radius).abs() <= 1e-10 * a.radius.abs().max(a.center.abs()));
        }
    }

    #[test]
    fn margins_for_three_intervals() {
        let (m1, m2) = prop1_margins(&example()).unwrap();
        assert!((m1 - 0.293_880_1).abs() < 5e-8);
        assert!((m2 - 0.148_265_0).abs() < 5e-8);
        let disks = gerschgorin(assemble_w(&example(), 3).unwrap().as_ref());
        assert!(close(m1, disks[0].margin(), 1e-12));
        assert!(close(m2, disks[1].margin(), 1e-12));
    }

    #[test]
    fn small_eigenproblems() {
        let b = Mat::from_fn(2, 2, |i, j| if i == j { 2.0 } else { -1.0 });
        let ev = eigenvalues(b.as_ref(), 10).unwrap();
        assert!((ev[0].re - 1.0).abs() < 1e-14 && (ev[1].re - 3.0).abs() < 1e-14);

        let r = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => -1.0,
            (1, 0) => 1.0,
            _ => 0.0,
        });
        let ev = eigenvalues(r.as_ref(), 10).unwrap();
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);

        let w = assemble_w(&example(), 3).unwrap();
        let (ev, res) = eigenvalues_with_residual(w.as_ref(), 10).unwrap();
        assert!(res < EIGEN_RESIDUAL_TOL);
        // quadratic formula on trace and determinant
        let (tr, det) = (
            w[(0, 0)] + w[(1, 1)],
            w[(0, 0)] * w[(1, 1)] - w[(0, 1)] * w[(1, 0)],
        );
        let disc = (tr * tr - 4.0 * det).sqrt();
        assert!(close(ev[0].re, 0.5 * (tr - disc), 1e-12));
        assert!(close(ev[1].re, 0.5 * (tr + disc), 1e-12));
        assert!((ev[0].re - 0.230_173_8).abs() < 5e-8);
        assert!((ev[1].re - 0.805_536_0).abs() < 5e-8);

        let big = Mat::<f64>::zeros(5, 5);
        assert!(matches!(
            eigenvalues(big.as_ref(), 4),
            Err(Error::DenseCapExceeded { .. })
        ));
    }

    #[test]
    fn amplification_map() {
        let amp = amplification_spectrum(&[Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(amp.factors[0], Complex64::new(0.0, 0.0));
        assert!(amp.stable);

        let amp = amplification_spectrum(&[Complex64::new(0.0, 1.0)]).unwrap();
        assert!((amp.factors[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((amp.spectral_radius - 1.0).abs() < 1e-15);
        assert!(!amp.stable);

        let amp = amplification_spectrum(&[Complex64::new(0.230_173_8, 0.0)]).unwrap();
        assert!((amp.factors[0].re - 0.625_786_6).abs() < 2e-7);

        assert_eq!(
            amplification_spectrum(&[Complex64::new(-1.0, 0.0)]).unwrap_err(),
            Error::SingularAmplification
        );
    }

    #[test]
    fn report_and_certificates() {
        let k = coefficients(0.625, 1.0 / 32.0, 1e-3).unwrap();
        let report = spectral_report(&k, 32, &SpectralOptions::default()).unwrap();
        assert!(report.stable);
        assert!(report.spectral_radius_h < 1.0);
        assert!(report.residual.unwrap() < EIGEN_RESIDUAL_TOL);
        for rho in &report.eigenvalues {
            assert!(in_union(&report.disks, *rho, 1e-9));
        }
        assert!(matches!(
            certify_stability(&k, 32, DEFAULT_DENSE_CAP).unwrap(),
            StabilityCertificate::FieldOfValues { .. }
        ));
    }
}
