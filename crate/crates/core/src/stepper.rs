//! Time integration of `(X + Y) U^{m+1} = (X - Y) U^m + F^m`, plus
//! manufactured-solution convergence studies and growth probes.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::{build_grid, CanonicalProblem, ExponentialOracle, Grid};
use crate::scheme::{
    assemble_x, assemble_y, boundary_vector, coefficients, BoundaryVector, SchemeCoefficients,
};
use crate::toeplitz::{TridiagLu, TridiagToeplitz};

/// Factored Crank-Nicolson step for fixed `(c, dz, dv, N)`.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    coeffs: SchemeCoefficients,
    intervals: usize,
    lhs: TridiagLu,
    rhs: TridiagToeplitz,
}

impl CrankNicolson {
    pub fn new(coeffs: &SchemeCoefficients, intervals: usize) -> Result<Self> {
        let x = assemble_x(coeffs, intervals)?;
        let y = assemble_y(coeffs, intervals)?;
        Ok(Self {
            coeffs: *coeffs,
            intervals,
            lhs: x.combine(1.0, &y).lu()?,
            rhs: x.combine(-1.0, &y),
        })
    }

    pub fn coefficients(&self) -> &SchemeCoefficients {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.intervals - 1
    }

    /// `out = (X + Y)^-1 ((X - Y) u + F)`.
    pub fn step_into(&self, u: &[f64], forcing: Option<&BoundaryVector>, out: &mut [f64]) {
        self.rhs.mul_into(u, out);
        if let Some(f) = forcing {
            f.add_to(out);
        }
        self.lhs.solve_in_place(out);
    }
}

/// One step from `u` with boundary forcing `forcing`.
pub fn step(u: &[f64], coeffs: &SchemeCoefficients, forcing: &BoundaryVector) -> Result<Vec<f64>> {
    if u.len() != forcing.len() {
        return Err(Error::DimensionMismatch {
            expected: forcing.len(),
            found: u.len(),
        });
    }
    let cn = CrankNicolson::new(coeffs, u.len() + 1)?;
    let mut out = vec![0.0; u.len()];
    cn.step_into(u, Some(forcing), &mut out);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveOptions {
    pub record_trajectory: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub grid: Grid,
    /// Interior values `U^M`.
    pub final_state: Vec<f64>,
    /// Interior values `U^0 .. U^M` when requested.
    pub trajectory: Option<Vec<Vec<f64>>>,
    /// `(g1(v_m), g2(v_m))` for `m = 0..=M`.
    pub boundary: Vec<(f64, f64)>,
    /// `|U^m|_inf` over interior nodes for `m = 0..=M`.
    pub max_norms: Vec<f64>,
    pub elapsed: Duration,
}

impl SolveResult {
    /// Interior errors at `v_M` against `exact(v, z)`: `(max, l2)` with the
    /// discrete l2 norm `sqrt(dz sum e^2)`.
    pub fn errors(&self, exact: impl Fn(f64, f64) -> f64) -> (f64, f64) {
        let v = self.grid.time(self.grid.steps);
        let mut max: f64 = 0.0;
        let mut sum = 0.0;
        for (u, z) in self.final_state.iter().zip(self.grid.interior_nodes()) {
            let e = (u - exact(v, z)).abs();
            max = max.max(e);
            sum += e * e;
        }
        (max, (self.grid.dz * sum).sqrt())
    }

    /// `U^M` including the two boundary values.
    pub fn final_with_boundary(&self) -> Vec<f64> {
        let (l, r) = *self.boundary.last().unwrap();
        let mut full = Vec::with_capacity(self.final_state.len() + 2);
        full.push(l);
        full.extend_from_slice(&self.final_state);
        full.push(r);
        full
    }
}

fn max_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn two_norm(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn integrate(canon: &CanonicalProblem, grid: &Grid, opts: SolveOptions) -> Result<SolveResult> {
    let start = Instant::now();
    let coeffs = coefficients(canon.c, grid.dz, grid.dv)?;
    let cn = CrankNicolson::new(&coeffs, grid.intervals)?;
    let mut u: Vec<f64> = grid.interior_nodes().map(|z| (canon.initial)(z)).collect();
    let mut next = vec![0.0; u.len()];
    let left = |v: f64| (canon.left_boundary)(v);
    let right = |v: f64| (canon.right_boundary)(v);

    let mut trajectory = opts.record_trajectory.then(|| vec![u.clone()]);
    let mut boundary = vec![(left(0.0), right(0.0))];
    let mut max_norms = vec![max_norm(&u)];
    for m in 0..grid.steps {
        let f = boundary_vector(&coeffs, grid.intervals, &left, &right, m)?;
        cn.step_into(&u, Some(&f), &mut next);
        std::mem::swap(&mut u, &mut next);
        let v = grid.time(m + 1);
        boundary.push((left(v), right(v)));
        max_norms.push(max_norm(&u));
        if let Some(t) = trajectory.as_mut() {
            t.push(u.clone());
        }
    }
    Ok(SolveResult {
        grid: *grid,
        final_state: u,
        trajectory,
        boundary,
        max_norms,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    /// Refine `dz`, with `dv` tied to `dz^2`.
    Spatial,
    /// Refine `dv` on a fixed spatial grid.
    Temporal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub refinement: Refinement,
    /// Interval counts (spatial) or step counts (temporal), coarse to fine.
    pub levels: Vec<usize>,
    /// Spatial: `dv / dz^2` target. Temporal: unused.
    pub mesh_ratio: f64,
    /// Temporal: fixed interval count. Spatial: unused.
    pub fixed_intervals: usize,
}

impl StudyPlan {
    pub fn spatial(levels: Vec<usize>, mesh_ratio: f64) -> Self {
        Self {
            refinement: Refinement::Spatial,
            levels,
            mesh_ratio,
            fixed_intervals: 0,
        }
    }

    pub fn temporal(levels: Vec<usize>, fixed_intervals: usize) -> Self {
        Self {
            refinement: Refinement::Temporal,
            levels,
            mesh_ratio: 0.0,
            fixed_intervals,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub intervals: usize,
    pub steps: usize,
    /// The refined step, `dz` or `dv`.
    pub step: f64,
    pub error_max: f64,
    pub error_l2: f64,
    /// Observed order against the previous row; `None` on the first row or
    /// when either error sits at the roundoff floor.
    pub order_max: Option<f64>,
    pub order_l2: Option<f64>,
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub refinement: Refinement,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order_max).collect()
    }
}

fn observed_order(coarse: f64, fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (coarse / fine).ln() / (h_coarse / h_fine).ln()
}

pub fn convergence_study(
    canon: &CanonicalProblem,
    oracle: &ExponentialOracle,
    plan: &StudyPlan,
) -> Result<ConvergenceTable> {
    if plan.levels.len() < 3 {
        return Err(Error::Config(format!(
            "a convergence study needs at least 3 levels, got {}",
            plan.levels.len()
        )));
    }
    let scale = (0..=32)
        .map(|i| {
            let z = canon.z_left + canon.length() * i as f64 / 32.0;
            oracle
                .eval(canon.horizon, z)
                .abs()
                .max(oracle.eval(0.0, z).abs())
        })
        .fold(0.0, f64::max);
    let floor = 100.0 * f64::EPSILON * scale.max(1.0);

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(plan.levels.len());
    for &level in &plan.levels {
        let (intervals, steps) = match plan.refinement {
            Refinement::Spatial => {
                let dz = canon.length() / level as f64;
                let steps = (canon.horizon / (plan.mesh_ratio * dz * dz))
                    .round()
                    .max(1.0) as usize;
                (level, steps)
            }
            Refinement::Temporal => (plan.fixed_intervals, level),
        };
        let grid = build_grid(canon, intervals, steps)?;
        let result = integrate(canon, &grid, SolveOptions::default())?;
        let (error_max, error_l2) = result.errors(|v, z| oracle.eval(v, z));
        let step = match plan.refinement {
            Refinement::Spatial => grid.dz,
            Refinement::Temporal => grid.dv,
        };
        let reliable = error_max > floor;
        let (order_max, order_l2) = match rows.last() {
            Some(prev) if reliable && prev.reliable => (
                Some(observed_order(prev.error_max, error_max, prev.step, step)),
                Some(observed_order(prev.error_l2, error_l2, prev.step, step)),
            ),
            _ => (None, None),
        };
        rows.push(ConvergenceRow {
            intervals,
            steps,
            step,
            error_max,
            error_l2,
            order_max,
            order_l2,
            reliable,
        });
    }
    Ok(ConvergenceTable {
        refinement: plan.refinement,
        rows,
    })
}

/// Growth of homogeneous-boundary solutions over many steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult {
    pub steps: usize,
    /// `|U^steps|_inf / |U^0|_inf`.
    pub growth_max: f64,
    /// `|U^steps|_2 / |U^0|_2`.
    pub growth_l2: f64,
    /// Largest single-step ratio `|U^{m+1}|_inf / |U^m|_inf`.
    pub max_step_ratio: f64,
    /// Largest single-step ratio over the final quarter of the run.
    pub tail_step_ratio: f64,
    /// Largest `|U^m|_inf / |U^0|_inf` over the run.
    pub peak_growth: f64,
}

/// Runs `steps` homogeneous steps from `initial`.
pub fn probe_from(
    coeffs: &SchemeCoefficients,
    intervals: usize,
    steps: usize,
    initial: &[f64],
) -> Result<ProbeResult> {
    let cn = CrankNicolson::new(coeffs, intervals)?;
    if initial.len() != cn.order() {
        return Err(Error::DimensionMismatch {
            expected: cn.order(),
            found: initial.len(),
        });
    }
    let mut u = initial.to_vec();
    let mut next = vec![0.0; u.len()];
    let (start_max, start_l2) = (max_norm(&u), two_norm(&u));
    let tail_from = steps - steps / 4;
    let mut result = ProbeResult {
        steps,
        growth_max: 1.0,
        growth_l2: 1.0,
        max_step_ratio: 0.0,
        tail_step_ratio: 0.0,
        peak_growth: 1.0,
    };
    let mut previous = start_max;
    for m in 0..steps {
        cn.step_into(&u, None, &mut next);
        std::mem::swap(&mut u, &mut next);
        let now = max_norm(&u);
        let ratio = if previous > 0.0 { now / previous } else { 0.0 };
        result.max_step_ratio = result.max_step_ratio.max(ratio);
        if m >= tail_from {
            result.tail_step_ratio = result.tail_step_ratio.max(ratio);
        }
        result.peak_growth = result.peak_growth.max(now / start_max);
        previous = now;
    }
    result.growth_max = max_norm(&u) / start_max;
    result.growth_l2 = two_norm(&u) / start_l2;
    Ok(result)
}

/// `probe_from` with initial values drawn uniformly from `[-1, 1]`.
pub fn stability_probe(
    coeffs: &SchemeCoefficients,
    intervals: usize,
    steps: usize,
    seed: u64,
) -> Result<ProbeResult> {
    if intervals < 2 {
        return Err(Error::TooFewIntervals(intervals));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial: Vec<f64> = (0..intervals - 1)
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    probe_from(coeffs, intervals, steps, &initial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ScalarFn;
    use std::sync::Arc;

    fn constant(k: f64) -> ScalarFn {
        Arc::new(move |_| k)
    }

    #[test]
    fn constant_state_is_preserved() {
        let k = coefficients(0.625, 0.125, 0.01).unwrap();
        let one = |_: f64| 3.0;
        let f = boundary_vector(&k, 8, &one, &one, 0).unwrap();
        let next = step(&[3.0; 7], &k, &f).unwrap();
        assert!(next.iter().all(|v| (v - 3.0).abs() < 3e-12));
    }

    #[test]
    fn scalar_step() {
        let k = coefficients(1.0, 0.5, 0.1).unwrap();
        let g = |v: f64| 1.0 + v;
        let f = boundary_vector(&k, 2, &g, &g, 0).unwrap();
        let next = step(&[0.7], &k, &f).unwrap();
        let want = ((k.c2 - k.y2) * 0.7 + f.first()) / (k.c2 + k.y2);
        assert!((next[0] - want).abs() < 1e-15);
        assert!(matches!(
            step(&[0.0, 0.0], &k, &f),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn steady_exponential_after_one_step() {
        let mut errors = Vec::new();
        for n in [8usize, 16, 32] {
            let canon = CanonicalProblem::manufactured(0.7, 1.0, 0.0, 1.0, 0.01).unwrap();
            let grid = build_grid(&canon, n, 1).unwrap();
            let r = integrate(&canon, &grid, SolveOptions::default()).unwrap();
            errors.push(r.errors(|_, z| z.exp()).0);
        }
        assert!(errors[0] < 1e-6);
        assert!(
            errors[0] / errors[1] > 12.0 && errors[1] / errors[2] > 12.0,
            "{errors:?}"
        );
    }

    #[test]
    fn trivial_solutions() {
        let c = 0.625;
        let canon = CanonicalProblem::new(
            c,
            0.0,
            2.5,
            1.0,
            constant(1.0),
            constant(1.0),
            constant(1.0),
        )
        .unwrap();
        let grid = build_grid(&canon, 40, 50).unwrap();
        let r = integrate(&canon, &grid, SolveOptions::default()).unwrap();
        assert!(r.final_state.iter().all(|v| (v - 1.0).abs() < 1e-11));

        let canon = CanonicalProblem::new(
            c,
            0.0,
            2.5,
            1.0,
            constant(0.0),
            constant(0.0),
            constant(0.0),
        )
        .unwrap();
        let r = integrate(
            &canon,
            &grid,
            SolveOptions {
                record_trajectory: true,
            },
        )
        .unwrap();
        let t = r.trajectory.unwrap();
        assert_eq!(t.len(), 51);
        assert!(t.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn boundary_values_follow_the_traces() {
        let oracle = ExponentialOracle::new(0.625, 0.5);
        let canon = CanonicalProblem::manufactured(0.625, 0.5, 0.0, 2.5, 2.0).unwrap();
        let grid = build_grid(&canon, 20, 10).unwrap();
        let r = integrate(
            &canon,
            &grid,
            SolveOptions {
                record_trajectory: true,
            },
        )
        .unwrap();
        assert_eq!(r.boundary.len(), 11);
        for (m, &(l, rr)) in r.boundary.iter().enumerate() {
            assert_eq!(l, oracle.eval(grid.time(m), 0.0));
            assert_eq!(rr, oracle.eval(grid.time(m), 2.5));
        }
        let full = r.final_with_boundary();
        assert_eq!(full.len(), 21);
    }

    #[test]
    fn refinement_reduces_error() {
        let canon = CanonicalProblem::manufactured(0.625, 0.5, 0.0, 2.5, 2.0).unwrap();
        let oracle = ExponentialOracle::new(0.625, 0.5);
        let err = |n, m| {
            let grid = build_grid(&canon, n, m).unwrap();
            integrate(&canon, &grid, SolveOptions::default())
                .unwrap()
                .errors(|v, z| oracle.eval(v, z))
                .0
        };
        let coarse = err(80, 200);
        let fine = err(160, 400);
        assert!(fine < coarse);
        assert!(coarse < 1e-5);
    }

    #[test]
    fn constant_oracle_is_flagged_unreliable() {
        let canon = CanonicalProblem::manufactured(1.0, 0.0, 0.0, 1.0, 0.25).unwrap();
        let oracle = ExponentialOracle::new(1.0, 0.0);
        let table =
            convergence_study(&canon, &oracle, &StudyPlan::spatial(vec![4, 8, 16], 0.5)).unwrap();
        assert!(table
            .rows
            .iter()
            .all(|r| !r.reliable && r.order_max.is_none()));
        assert!(convergence_study(&canon, &oracle, &StudyPlan::spatial(vec![4, 8], 0.5)).is_err());
    }

    #[test]
    fn scalar_probe_growth() {
        let k = coefficients(1.0, 0.5, 0.1).unwrap();
        let r = stability_probe(&k, 2, 50, 1).unwrap();
        let g = ((k.c2 - k.y2) / (k.c2 + k.y2)).abs();
        assert!((r.max_step_ratio - g).abs() < 1e-12);
        assert!(r.growth_max < 1.0);
    }
}
