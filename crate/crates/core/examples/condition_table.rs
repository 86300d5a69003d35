//! Condition number of I + W against 1 + |W| bound.

use compact_cn::bounds::{condition_report, ConditionOptions};
use compact_cn::scheme::coefficients;

fn main() -> compact_cn::Result<()> {
    let opts = ConditionOptions::default();
    for n in [8usize, 32, 128] {
        for dv in [1e-1, 1e-4] {
            let k = coefficients(0.625, 1.0 / n as f64, dv)?;
            let r = condition_report(&k, n, &opts)?;
            let cond = r
                .measured_cond
                .map_or("n/a".to_string(), |v| format!("{v:.6}"));
            println!(
                "N {n:>4} dv {dv:.0e}: cond {cond} <= {:.6} ({})",
                r.cond_bound,
                r.certificate.label()
            );
        }
    }
    Ok(())
}
