//! Stability certificates and the bounds behind them.

use compact_cn::bounds::{norm_bounds, rho_min_lower_bound, z_disc_margins, z_matrix};
use compact_cn::scheme::coefficients;
use compact_cn::spectral::{certify_stability, field_of_values_margin, DEFAULT_DENSE_CAP};

fn main() -> compact_cn::Result<()> {
    let (c, dz, dv, n) = (0.625, 1.0 / 32.0, 1e-3, 32);
    let k = coefficients(c, dz, dv)?;
    let b = norm_bounds(&k);
    println!(
        "|X^-1| <= {:.6e}, |Y| = {:.6e}, |W| <= {:.6e}",
        b.xinv, b.y, b.w
    );
    println!("Z disc margins {:?}", z_disc_margins(&k));
    let z = z_matrix(&k, n)?;
    println!(
        "lambda_min(XX^T) = {:.6e} >= {:.6e}",
        z.min_eigenvalue(1e-12),
        rho_min_lower_bound(dz, dv)
    );
    println!("field-of-values pivot {:?}", field_of_values_margin(&k, n)?);
    println!(
        "certificate: {:?}",
        certify_stability(&k, n, DEFAULT_DENSE_CAP)?
    );
    Ok(())
}
