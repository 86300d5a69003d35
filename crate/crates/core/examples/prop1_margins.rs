//! Gerschgorin margins of W for N = 3 as dz shrinks with dv / dz^2 held fixed.

use compact_cn::scheme::coefficients;
use compact_cn::spectral::prop1_margins;

fn main() -> compact_cn::Result<()> {
    let (c, b) = (0.625, 1.0);
    for j in 1..=14 {
        let dz = 0.5f64.powi(j);
        let (m1, m2) = prop1_margins(&coefficients(c, dz, b * dz * dz)?)?;
        println!("dz 2^-{j:<2} margins {m1:.8} {m2:.8}");
    }
    println!("limit 6cb/11 = {:.8}", 6.0 * c * b / 11.0);
    Ok(())
}
