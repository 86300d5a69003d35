//! Closed-form inverse of a tridiagonal Toeplitz matrix, checked against LU.

use compact_cn::scheme::{assemble_x, coefficients};
use compact_cn::toeplitz::ToeplitzInverse;

fn main() -> compact_cn::Result<()> {
    let k = coefficients(0.625, 0.125, 1e-2)?;
    let x = assemble_x(&k, 8)?;
    let inv = ToeplitzInverse::new(&x)?;
    println!(
        "X: sub {:.6} diag {:.6} sup {:.6}, order {}",
        x.sub, x.diag, x.sup, x.order
    );
    println!("recurrence argument {:.6}", inv.argument());

    let lu = x.lu()?;
    let mut worst: f64 = 0.0;
    for j in 0..x.order {
        let mut e = vec![0.0; x.order];
        e[j] = 1.0;
        lu.solve_in_place(&mut e);
        for (i, v) in e.iter().enumerate() {
            worst = worst.max((inv.entry(i, j) - v).abs());
        }
    }
    println!("first row of X^-1:");
    for j in 0..x.order {
        print!(" {:+.6e}", inv.entry(0, j));
    }
    println!("\nmax |closed form - LU| = {worst:.2e}");
    Ok(())
}
