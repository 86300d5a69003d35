use compact_cn::scheme::{assemble_x, coefficients};
use compact_cn::toeplitz::{
    p_poly, p_poly_explicit, solve_tridiagonal, ToeplitzInverse, TridiagToeplitz,
};
use proptest::prelude::*;

fn dominant() -> impl Strategy<Value = TridiagToeplitz> {
    (
        0.1f64..2.0,
        0.1f64..2.0,
        1.05f64..5.0,
        any::<bool>(),
        any::<bool>(),
        1usize..150,
    )
        .prop_map(|(a, e, margin, flip, neg_diag, n)| {
            let s = if flip { -1.0 } else { 1.0 };
            let d = if neg_diag { -1.0 } else { 1.0 } * (a + e) * margin;
            TridiagToeplitz::new(s * a, d, s * e, n)
        })
}

fn column_solve(t: &TridiagToeplitz, col: usize) -> Vec<f64> {
    let n = t.order;
    let mut e = vec![0.0; n];
    e[col] = 1.0;
    let (sub, diag, sup) = t.bands();
    solve_tridiagonal(&sub, &diag, &sup, &e).unwrap()
}

proptest! {
    #[test]
    fn closed_form_matches_column_solves(t in dominant(), pick in 0usize..1000) {
        let inv = ToeplitzInverse::new(&t).unwrap();
        let col = pick % t.order;
        let x = column_solve(&t, col);
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (row, v) in x.iter().enumerate() {
            prop_assert!((inv.entry(row, col) - v).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn scheme_matrix_inverse_is_an_inverse(
        c in 1e-2f64..1e2, dz in 1e-3f64..1.99, dv in 1e-8f64..1.0, n in 2usize..120,
    ) {
        let x = assemble_x(&coefficients(c, dz, dv).unwrap(), n).unwrap();
        let inv = ToeplitzInverse::new(&x).unwrap().to_dense();
        let product = x.to_dense() * inv;
        for i in 0..x.order {
            for j in 0..x.order {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((product[(i, j)] - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn recurrence_matches_explicit_sum(n in 0usize..40, x in -6.0f64..6.0) {
        let a = p_poly(n, x);
        let b = p_poly_explicit(n, x);
        // the alternating sum cancels; its terms are bounded by p_n(i |x|)
        let magnitude: f64 = (0..=n / 2)
            .map(|k| (1..=k).fold(1.0, |acc, i| acc * (n - k - i + 1) as f64 / i as f64) * (2.0 * x.abs()).powi((n - 2 * k) as i32))
            .sum();
        prop_assert!((a - b).abs() <= 1e-13 * magnitude.max(1.0));
    }

    #[test]
    fn transpose_inverse_is_inverse_transpose(t in dominant()) {
        let n = t.order;
        let inv = ToeplitzInverse::new(&t).unwrap();
        let inv_t = ToeplitzInverse::new(&t.transpose()).unwrap();
        for i in 0..n.min(12) {
            for j in 0..n.min(12) {
                let (a, b) = (inv.entry(i, j), inv_t.entry(j, i));
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
            }
        }
    }

    #[test]
    fn lu_solve_inverts_multiplication(t in dominant(), seed in any::<u64>()) {
        let n = t.order;
        let x: Vec<f64> = (0..n).map(|i| ((seed.wrapping_add(i as u64) % 1000) as f64 / 500.0) - 1.0).collect();
        let b = t.mul_vec(&x);
        let back = t.lu().unwrap().solve(&b);
        for (u, v) in back.iter().zip(&x) {
            prop_assert!((u - v).abs() < 1e-10);
        }
    }
}
