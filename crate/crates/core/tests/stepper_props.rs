use compact_cn::problem::{build_grid, CanonicalProblem};
use compact_cn::scheme::{boundary_vector, coefficients};
use compact_cn::spectral::{assemble_w, eigenvalues, DEFAULT_DENSE_CAP};
use compact_cn::stepper::{integrate, probe_from, step, CrankNicolson, SolveOptions};
use proptest::prelude::*;
use std::sync::Arc;

fn params() -> impl Strategy<Value = (f64, f64, f64, usize)> {
    (1e-2f64..1e1, 1e-3f64..1.5, 1e-6f64..1e-1, 3usize..48)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn homogeneous_step_is_linear(
        (c, dz, dv, n) in params(), a in -3.0f64..3.0, seed in any::<u64>(),
    ) {
        let k = coefficients(c, dz, dv).unwrap();
        let cn = CrankNicolson::new(&k, n).unwrap();
        let m = cn.order();
        let u: Vec<f64> = (0..m).map(|i| ((seed >> (i % 60)) & 0xff) as f64 / 128.0 - 1.0).collect();
        let v: Vec<f64> = (0..m).map(|i| (i as f64 * 0.37).sin()).collect();
        let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + y).collect();
        let mut su = vec![0.0; m];
        let mut sv = vec![0.0; m];
        let mut sc = vec![0.0; m];
        cn.step_into(&u, None, &mut su);
        cn.step_into(&v, None, &mut sv);
        cn.step_into(&combo, None, &mut sc);
        for i in 0..m {
            prop_assert!((sc[i] - (a * su[i] + sv[i])).abs() < 1e-10 * (1.0 + sc[i].abs()));
        }
    }

    #[test]
    fn constant_state_is_preserved(c in 1e-2f64..1e1, n in 3usize..48, steps in 1usize..40, level in -5.0f64..5.0) {
        let canon = CanonicalProblem::new(
            c, 0.0, 1.0, 0.5,
            Arc::new(move |_| level), Arc::new(move |_| level), Arc::new(move |_| level),
        ).unwrap();
        let grid = build_grid(&canon, n, steps).unwrap();
        let out = integrate(&canon, &grid, SolveOptions::default()).unwrap();
        for u in out.final_state {
            prop_assert!((u - level).abs() < 1e-11 * (1.0 + level.abs()));
        }
    }

    #[test]
    fn one_step_function_matches_stepper((c, dz, dv, n) in params()) {
        let k = coefficients(c, dz, dv).unwrap();
        let left = |v: f64| 1.0 + v;
        let right = |v: f64| 2.0 - v;
        let forcing = boundary_vector(&k, n, &left, &right, 3).unwrap();
        let u: Vec<f64> = (0..n - 1).map(|i| (i as f64).cos()).collect();
        let a = step(&u, &k, &forcing).unwrap();
        let cn = CrankNicolson::new(&k, n).unwrap();
        let mut b = vec![0.0; n - 1];
        cn.step_into(&u, Some(&forcing), &mut b);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn dominant_eigenvector_growth_matches_amplification() {
    for &(c, dz, dv, n) in &[
        (0.625, 0.125, 1e-2, 8usize),
        (1.0, 1.0 / 32.0, 1e-3, 32),
        (0.2, 1.0 / 128.0, 1e-4, 128),
    ] {
        let k = coefficients(c, dz, dv).unwrap();
        let w = assemble_w(&k, n).unwrap();
        let eigs = eigenvalues(w.as_ref(), DEFAULT_DENSE_CAP).unwrap();
        // smallest real eigenvalue of W gives the slowest-decaying real mode
        let rho = eigs
            .iter()
            .filter(|z| z.im.abs() < 1e-12)
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min);
        let lambda = (1.0 - rho) / (1.0 + rho);
        let m = n - 1;
        let mut shifted = w.clone();
        for i in 0..m {
            shifted[(i, i)] -= rho;
        }
        let v = null_vector(&shifted);
        let p = probe_from(&k, n, 1, &v).unwrap();
        assert!(
            (p.growth_l2 - lambda.abs()).abs() < 1e-6,
            "{} vs {}",
            p.growth_l2,
            lambda
        );
    }
}

fn null_vector(a: &faer::Mat<f64>) -> Vec<f64> {
    let svd = a.svd().unwrap();
    let v = svd.V();
    let last = v.ncols() - 1;
    (0..v.nrows()).map(|i| v[(i, last)]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn physical_problem_round_trips(alpha1 in prop_oneof![-2.0f64..-0.1, 0.1f64..2.0], alpha2 in 0.1f64..2.0) {
        use compact_cn::problem::{canonicalize, ExponentialOracle, PdeProblem};
        let c = alpha1 * alpha1 / alpha2;
        let oracle = ExponentialOracle::new(c, 0.5);
        let s = alpha2 / alpha1;
        let exact = move |t: f64, x: f64| s * oracle.eval(t, x / s);
        let pde = PdeProblem::new(
            alpha1, alpha2, 0.0, 1.0, 0.1,
            Arc::new(move |x| exact(0.0, x)),
            Arc::new(move |t| exact(t, 0.0)),
            Arc::new(move |t| exact(t, 1.0)),
        ).unwrap();
        let canon = canonicalize(&pde).unwrap();
        let grid = build_grid(&canon, 32, 20).unwrap();
        let out = integrate(&canon, &grid, SolveOptions::default()).unwrap();
        let scale = (0..=8).map(|i| oracle.eval(0.1, canon.z_left + canon.length() * i as f64 / 8.0).abs()).fold(0.0, f64::max);
        let (max, _) = out.errors(|v, z| oracle.eval(v, z));
        prop_assert!(max <= 1e-4 * scale.max(1.0), "error {} scale {}", max, scale);
    }
}
