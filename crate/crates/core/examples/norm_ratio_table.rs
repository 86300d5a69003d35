//! |W|_2 against its a-priori bound, matrix-free.

use compact_cn::bounds::{norm_ratio, PowerOptions};
use compact_cn::scheme::coefficients;

fn main() -> compact_cn::Result<()> {
    let opts = PowerOptions::default();
    println!("{:>8} {:>10} {:>10} {:>6}", "dz", "ratio", "iters", "conv");
    for n in [8usize, 16, 32, 64, 128] {
        let k = coefficients(0.625, 1.0 / n as f64, 1e-3)?;
        let (est, ratio) = norm_ratio(&k, n, &opts)?;
        println!(
            "{:>8} {ratio:>10.6} {:>10} {:>6}",
            format!("1/{n}"),
            est.iterations,
            est.converged
        );
    }
    Ok(())
}
