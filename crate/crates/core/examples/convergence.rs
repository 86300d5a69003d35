//! Observed orders in space (dv tied to dz^2) and in time.

use compact_cn::problem::{CanonicalProblem, ExponentialOracle};
use compact_cn::stepper::{convergence_study, StudyPlan};

fn main() -> compact_cn::Result<()> {
    let (c, k) = (1.0, 0.5);
    let oracle = ExponentialOracle::new(c, k);

    let canon = CanonicalProblem::manufactured(c, k, 0.0, 1.0, 0.25)?;
    let spatial = convergence_study(
        &canon,
        &oracle,
        &StudyPlan::spatial(vec![4, 8, 16, 32, 64], 0.5),
    )?;
    println!("space:");
    for r in &spatial.rows {
        println!(
            "  N {:>3} M {:>6} err {:.3e} order {:?}",
            r.intervals, r.steps, r.error_max, r.order_max
        );
    }

    let canon = CanonicalProblem::manufactured(c, k, 0.0, 1.0, 1.0)?;
    let temporal = convergence_study(
        &canon,
        &oracle,
        &StudyPlan::temporal(vec![4, 8, 16, 32, 64], 256),
    )?;
    println!("time:");
    for r in &temporal.rows {
        println!(
            "  M {:>3} err {:.3e} order {:?}",
            r.steps, r.error_max, r.order_max
        );
    }
    Ok(())
}
