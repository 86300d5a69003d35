//! Minimum real part of the spectrum of W on a small (dz, dv) grid.

use compact_cn::scheme::coefficients;
use compact_cn::spectral::{min_real_part, DEFAULT_DENSE_CAP};

fn main() -> compact_cn::Result<()> {
    let c = 0.25f64.powi(2) / 0.1;
    print!("{:>10}", "dz \\ dv");
    let dvs = [1e-1, 1e-3, 1e-5, 1e-7];
    for dv in dvs {
        print!("{dv:>14.0e}");
    }
    println!();
    for n in [8usize, 16, 32, 64] {
        let dz = 1.0 / n as f64;
        print!("{:>10}", format!("1/{n}"));
        for dv in dvs {
            let value = min_real_part(&coefficients(c, dz, dv)?, n, DEFAULT_DENSE_CAP)?;
            print!("{value:>14.6e}");
        }
        println!();
    }
    Ok(())
}
