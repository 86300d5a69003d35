//! The continuous problem, its canonical single-parameter form, and the
//! uniform space-time grid.
//!
//! The convection-diffusion equation
//!
//! ```text
//! psi_v + alpha1 psi_x - alpha2 psi_xx = 0,   x in (x_left, x_right), 0 <= v <= T
//! ```
//!
//! becomes `u_v + c u_z - c u_zz = 0` under `u = (alpha2/alpha1) psi`,
//! `z = (alpha1/alpha2) x`, with `c = alpha1^2 / alpha2 > 0`.

use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_positive, Error, Result};

/// A real function of one variable (initial profile or boundary trace).
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Absolute tolerance for the corner compatibility `g(0) = f(endpoint)`.
pub const COMPATIBILITY_TOL: f64 = 1e-12;

fn check_compatible(side: &'static str, g0: f64, f_end: f64) -> Result<()> {
    let mismatch = g0 - f_end;
    if mismatch.abs() <= COMPATIBILITY_TOL * f_end.abs().max(1.0) {
        Ok(())
    } else {
        Err(Error::Incompatible { side, mismatch })
    }
}

fn check_interval(left: f64, right: f64) -> Result<()> {
    if left.is_finite() && right.is_finite() && left < right {
        Ok(())
    } else {
        Err(Error::InvalidInterval { left, right })
    }
}

/// The original problem in `(v, x)` with convection `alpha1` and diffusion `alpha2`.
#[derive(Clone)]
pub struct PdeProblem {
    pub alpha1: f64,
    pub alpha2: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub horizon: f64,
    pub initial: ScalarFn,
    pub left_boundary: ScalarFn,
    pub right_boundary: ScalarFn,
}

impl PdeProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha1: f64,
        alpha2: f64,
        x_left: f64,
        x_right: f64,
        horizon: f64,
        initial: ScalarFn,
        left_boundary: ScalarFn,
        right_boundary: ScalarFn,
    ) -> Result<Self> {
        if !(alpha2.is_finite() && alpha2 > 0.0) {
            return Err(Error::NotDiffusive(alpha2));
        }
        check_interval(x_left, x_right)?;
        ensure_positive("horizon", horizon)?;
        check_compatible("left", left_boundary(0.0), initial(x_left))?;
        check_compatible("right", right_boundary(0.0), initial(x_right))?;
        Ok(Self {
            alpha1,
            alpha2,
            x_left,
            x_right,
            horizon,
            initial,
            left_boundary,
            right_boundary,
        })
    }
}

impl fmt::Debug for PdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdeProblem")
            .field("alpha1", &self.alpha1)
            .field("alpha2", &self.alpha2)
            .field("x_left", &self.x_left)
            .field("x_right", &self.x_right)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

/// The transformed problem `u_v + c u_z - c u_zz = 0` on `(z_left, z_right)`.
#[derive(Clone)]
pub struct CanonicalProblem {
    pub c: f64,
    pub z_left: f64,
    pub z_right: f64,
    pub horizon: f64,
    pub initial: ScalarFn,
    pub left_boundary: ScalarFn,
    pub right_boundary: ScalarFn,
}

impl CanonicalProblem {
    pub fn new(
        c: f64,
        z_left: f64,
        z_right: f64,
        horizon: f64,
        initial: ScalarFn,
        left_boundary: ScalarFn,
        right_boundary: ScalarFn,
    ) -> Result<Self> {
        ensure_positive("c", c)?;
        check_interval(z_left, z_right)?;
        ensure_positive("horizon", horizon)?;
        check_compatible("left", left_boundary(0.0), initial(z_left))?;
        check_compatible("right", right_boundary(0.0), initial(z_right))?;
        Ok(Self {
            c,
            z_left,
            z_right,
            horizon,
            initial,
            left_boundary,
            right_boundary,
        })
    }

    /// Problem whose exact solution is [`exact_solution`] with rate `k`.
    pub fn manufactured(c: f64, k: f64, z_left: f64, z_right: f64, horizon: f64) -> Result<Self> {
        let oracle = ExponentialOracle::new(c, k);
        Self::new(
            c,
            z_left,
            z_right,
            horizon,
            oracle.initial(),
            oracle.boundary(z_left),
            oracle.boundary(z_right),
        )
    }

    pub fn length(&self) -> f64 {
        self.z_right - self.z_left
    }
}

impl fmt::Debug for CanonicalProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CanonicalProblem")
            .field("c", &self.c)
            .field("z_left", &self.z_left)
            .field("z_right", &self.z_right)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

/// Maps the `(alpha1, alpha2)` problem onto the single-parameter form.
///
/// For `alpha1 < 0` the substitution reverses orientation; the endpoints are
/// reordered and the two boundary traces swap sides.
pub fn canonicalize(pde: &PdeProblem) -> Result<CanonicalProblem> {
    if !(pde.alpha2.is_finite() && pde.alpha2 > 0.0) {
        return Err(Error::NotDiffusive(pde.alpha2));
    }
    if pde.alpha1 == 0.0 || !pde.alpha1.is_finite() {
        return Err(Error::DegenerateConvection);
    }
    let ratio = pde.alpha1 / pde.alpha2;
    // u = scale * psi and x = scale * z, so psi carries a factor 1 / scale
    let scale = pde.alpha2 / pde.alpha1;
    let c = pde.alpha1 * pde.alpha1 / pde.alpha2;

    let f = pde.initial.clone();
    let initial: ScalarFn = Arc::new(move |z| f(scale * z) / scale);
    let (g_lo, g_hi) = if ratio > 0.0 {
        (pde.left_boundary.clone(), pde.right_boundary.clone())
    } else {
        (pde.right_boundary.clone(), pde.left_boundary.clone())
    };
    let left_boundary: ScalarFn = Arc::new(move |v| g_lo(v) / scale);
    let right_boundary: ScalarFn = Arc::new(move |v| g_hi(v) / scale);

    let (a, b) = (ratio * pde.x_left, ratio * pde.x_right);
    let (z_left, z_right) = if a < b { (a, b) } else { (b, a) };
    CanonicalProblem::new(
        c,
        z_left,
        z_right,
        pde.horizon,
        initial,
        left_boundary,
        right_boundary,
    )
}

/// Uniform grid: `N` space intervals over `[z_left, z_right]`, `M` steps over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub intervals: usize,
    pub steps: usize,
    pub dz: f64,
    pub dv: f64,
    pub z_left: f64,
}

impl Grid {
    pub fn new(
        z_left: f64,
        z_right: f64,
        horizon: f64,
        intervals: usize,
        steps: usize,
    ) -> Result<Self> {
        check_interval(z_left, z_right)?;
        ensure_positive("horizon", horizon)?;
        if intervals < 2 {
            return Err(Error::TooFewIntervals(intervals));
        }
        if steps < 1 {
            return Err(Error::TooFewSteps(steps));
        }
        let dz = (z_right - z_left) / intervals as f64;
        if dz >= 2.0 {
            return Err(Error::StepTooLarge(dz));
        }
        Ok(Self {
            intervals,
            steps,
            dz,
            dv: horizon / steps as f64,
            z_left,
        })
    }

    /// `z_q = z_left + q dz` for `0 <= q <= N`.
    pub fn node(&self, q: usize) -> f64 {
        self.z_left + q as f64 * self.dz
    }

    /// `v_m = m dv`.
    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.dv
    }

    /// Number of unknowns per time level, `N - 1`.
    pub fn interior_size(&self) -> usize {
        self.intervals - 1
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (1..self.intervals).map(move |q| self.node(q))
    }
}

pub fn build_grid(canon: &CanonicalProblem, intervals: usize, steps: usize) -> Result<Grid> {
    Grid::new(canon.z_left, canon.z_right, canon.horizon, intervals, steps)
}

/// Number of intervals of width `dz` covering `length`, rejecting widths
/// that do not tile the interval to `1e-12`.
pub fn intervals_for(length: f64, dz: f64) -> Result<usize> {
    ensure_positive("dz", dz)?;
    ensure_positive("interval length", length)?;
    let n = (length / dz).round();
    if n < 1.0 || (n * dz - length).abs() > 1e-12 * length.max(1.0) {
        return Err(Error::NonUniformGrid { dz, length });
    }
    Ok(n as usize)
}

/// `exp(k z + c (k^2 - k) v)`, an exact solution of `u_v + c u_z - c u_zz = 0`.
pub fn exact_solution(c: f64, k: f64, v: f64, z: f64) -> f64 {
    (k * z + c * (k * k - k) * v).exp()
}

/// The exponential solution family with its matching initial and boundary data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialOracle {
    pub c: f64,
    pub k: f64,
}

impl ExponentialOracle {
    pub const DEFAULT_RATE: f64 = 0.5;

    pub fn new(c: f64, k: f64) -> Self {
        Self { c, k }
    }

    pub fn eval(&self, v: f64, z: f64) -> f64 {
        exact_solution(self.c, self.k, v, z)
    }

    pub fn initial(&self) -> ScalarFn {
        let o = *self;
        Arc::new(move |z| o.eval(0.0, z))
    }

    /// Trace of the solution at fixed `z`, as a function of time.
    pub fn boundary(&self, z: f64) -> ScalarFn {
        let o = *self;
        Arc::new(move |v| o.eval(v, z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(value: f64) -> ScalarFn {
        Arc::new(move |_| value)
    }

    fn linear_pde(alpha1: f64, alpha2: f64) -> PdeProblem {
        // psi(0, x) = 1 + x with matching constant boundary traces
        PdeProblem::new(
            alpha1,
            alpha2,
            0.0,
            1.0,
            2.0,
            Arc::new(|x| 1.0 + x),
            constant(1.0),
            constant(2.0),
        )
        .unwrap()
    }

    #[test]
    fn canonical_parameters() {
        let canon = canonicalize(&linear_pde(0.25, 0.1)).unwrap();
        assert!((canon.c - 0.625).abs() < 1e-15);
        assert!(canon.z_left.abs() < 1e-15);
        assert!((canon.z_right - 2.5).abs() < 1e-15);

        let canon = canonicalize(&linear_pde(1.0, 1.0)).unwrap();
        assert_eq!((canon.c, canon.z_left, canon.z_right), (1.0, 0.0, 1.0));
    }

    #[test]
    fn negative_convection_flips_orientation() {
        let pde = linear_pde(-1.0, 2.0);
        let canon = canonicalize(&pde).unwrap();
        assert_eq!(canon.c, 0.5);
        assert_eq!((canon.z_left, canon.z_right), (-0.5, 0.0));
        // z = -0.5 is the image of x = 1, so it carries the old right trace.
        // psi = (alpha1 / alpha2) u
        let scale = -0.5;
        assert_eq!((canon.left_boundary)(0.3), scale * 2.0);
        assert_eq!((canon.right_boundary)(0.3), scale * 1.0);
        assert!(((canon.initial)(-0.5) - scale * 2.0).abs() < 1e-15);
        assert!(((canon.left_boundary)(0.0) - (canon.initial)(canon.z_left)).abs() < 1e-12);
        assert!(((canon.right_boundary)(0.0) - (canon.initial)(canon.z_right)).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_coefficients() {
        let mut pde = linear_pde(0.25, 0.1);
        pde.alpha1 = 0.0;
        assert_eq!(canonicalize(&pde).unwrap_err(), Error::DegenerateConvection);
        let bad = PdeProblem::new(
            1.0,
            0.0,
            0.0,
            1.0,
            1.0,
            constant(0.0),
            constant(0.0),
            constant(0.0),
        );
        assert_eq!(bad.unwrap_err(), Error::NotDiffusive(0.0));
        let bad = PdeProblem::new(
            1.0,
            -1.0,
            0.0,
            1.0,
            1.0,
            constant(0.0),
            constant(0.0),
            constant(0.0),
        );
        assert!(matches!(bad, Err(Error::NotDiffusive(_))));
    }

    #[test]
    fn rejects_incompatible_corners() {
        let bad = PdeProblem::new(
            1.0,
            1.0,
            0.0,
            1.0,
            1.0,
            Arc::new(|x| x),
            constant(0.0),
            constant(0.5),
        );
        assert!(matches!(
            bad,
            Err(Error::Incompatible { side: "right", .. })
        ));
    }

    #[test]
    fn scaling_the_interval_scales_the_image() {
        for lambda in [0.5, 2.0, 7.25] {
            let pde = PdeProblem::new(
                0.25,
                0.1,
                0.0,
                lambda,
                1.0,
                constant(0.0),
                constant(0.0),
                constant(0.0),
            )
            .unwrap();
            let canon = canonicalize(&pde).unwrap();
            assert!((canon.z_right - 2.5 * lambda).abs() < 1e-12);
            assert!((canon.c - 0.625).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_layout() {
        let g = Grid::new(0.0, 2.5, 2.0, 20, 10).unwrap();
        assert_eq!(g.dz, 0.125);
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(20), 2.5);
        assert_eq!(g.interior_size(), 19);
        assert_eq!(g.dv, 0.2);

        let g = Grid::new(0.0, 1.0, 1.0, 2, 1).unwrap();
        assert_eq!(g.dz, 0.5);
        assert_eq!(g.interior_nodes().collect::<Vec<_>>(), vec![0.5]);

        assert_eq!(
            Grid::new(0.0, 1.0, 1.0, 1, 1).unwrap_err(),
            Error::TooFewIntervals(1)
        );
        assert_eq!(
            Grid::new(0.0, 10.0, 1.0, 4, 1).unwrap_err(),
            Error::StepTooLarge(2.5)
        );
        assert_eq!(
            Grid::new(0.0, 1.0, 1.0, 4, 0).unwrap_err(),
            Error::TooFewSteps(0)
        );
    }

    #[test]
    fn interval_counting() {
        assert_eq!(intervals_for(1.0, 1.0 / 8.0).unwrap(), 8);
        assert_eq!(intervals_for(2.5, 1.0 / 4096.0).unwrap(), 10240);
        assert!(intervals_for(1.0, 0.3).is_err());
    }

    #[test]
    fn exponential_oracle_values() {
        for v in [0.0, 0.7, 3.0] {
            assert!((exact_solution(2.0, 1.0, v, 0.4) - 0.4f64.exp()).abs() < 1e-15);
            assert_eq!(exact_solution(2.0, 0.0, v, 0.4), 1.0);
        }
        assert!((exact_solution(1.0, 0.5, 1.0, 0.0) - 0.778_800_783_071_404_9).abs() < 1e-15);
    }

    #[test]
    fn oracle_satisfies_the_pde() {
        // central differences of the closed form
        let (c, k) = (0.625, 0.5);
        let h = 1e-4;
        for &(v, z) in &[(0.3, 0.1), (1.0, 2.0), (0.05, -0.7)] {
            let u = |v, z| exact_solution(c, k, v, z);
            let u_v = (u(v + h, z) - u(v - h, z)) / (2.0 * h);
            let u_z = (u(v, z + h) - u(v, z - h)) / (2.0 * h);
            let u_zz = (u(v, z + h) - 2.0 * u(v, z) + u(v, z - h)) / (h * h);
            assert!((u_v + c * u_z - c * u_zz).abs() < 1e-6);
        }
    }
}
