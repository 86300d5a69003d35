//! Long homogeneous runs from random data: growth in the max and 2 norms.

use compact_cn::scheme::coefficients;
use compact_cn::stepper::stability_probe;

fn main() -> compact_cn::Result<()> {
    for (n, dv) in [(64usize, 1e-3), (256, 1e-2), (512, 1e-1)] {
        let k = coefficients(0.625, 1.0 / n as f64, dv)?;
        let p = stability_probe(&k, n, 1000, 1)?;
        println!(
            "N {n:>4} dv {dv:.0e}: max-norm growth {:.6}, 2-norm growth {:.6}, peak {:.6}",
            p.growth_max, p.growth_l2, p.peak_growth
        );
    }
    Ok(())
}
