//! Spectral positivity across (alpha1, alpha2) at the step that makes the norm bound one.

use compact_cn::bounds::unit_bound_step;
use compact_cn::scheme::coefficients;
use compact_cn::spectral::{min_real_part, DEFAULT_DENSE_CAP};

fn main() -> compact_cn::Result<()> {
    let n = 128;
    let dz = 1.0 / n as f64;
    for a1 in [0.05, 0.25, 1.0] {
        for a2 in [0.01, 0.1, 1.0] {
            let c = a1 * a1 / a2;
            let dv = unit_bound_step(c, dz);
            let value = min_real_part(&coefficients(c, dz, dv)?, n, DEFAULT_DENSE_CAP)?;
            println!("alpha1 {a1:<5} alpha2 {a2:<5} c {c:<9.4} dv {dv:.3e}  min Re {value:.4e}");
        }
    }
    Ok(())
}
