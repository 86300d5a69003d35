//! Solve a convection-diffusion problem in physical variables and compare with the exact solution.

use compact_cn::problem::{build_grid, canonicalize, ExponentialOracle, PdeProblem};
use compact_cn::stepper::{integrate, SolveOptions};
use std::sync::Arc;

fn main() -> compact_cn::Result<()> {
    let (alpha1, alpha2) = (0.25, 0.1);
    let c = alpha1 * alpha1 / alpha2;
    let oracle = ExponentialOracle::new(c, 0.5);
    // u(t, x) = s psi(t, x / s) with s = alpha2 / alpha1
    let s = alpha2 / alpha1;
    let exact = move |t: f64, x: f64| s * oracle.eval(t, x / s);
    let pde = PdeProblem::new(
        alpha1,
        alpha2,
        0.0,
        1.0,
        1.0,
        Arc::new(move |x| exact(0.0, x)),
        Arc::new(move |t| exact(t, 0.0)),
        Arc::new(move |t| exact(t, 1.0)),
    )?;
    let canon = canonicalize(&pde)?;
    let grid = build_grid(&canon, 64, 200)?;
    let result = integrate(&canon, &grid, SolveOptions::default())?;
    let (max, l2) = result.errors(|v, z| oracle.eval(v, z));
    println!(
        "c = {c}, z in [{}, {}], v in [0, {}]",
        canon.z_left, canon.z_right, canon.horizon
    );
    println!(
        "dz = {:.4e}, dv = {:.4e}, {:.1?}",
        grid.dz, grid.dv, result.elapsed
    );
    println!("max error {max:.3e}, l2 error {l2:.3e}");
    Ok(())
}
