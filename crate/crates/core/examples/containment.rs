//! Which norm dominates: the smaller exponent inside or outside.

use radnorm::{compile, containment_sweep, ExponentPair, QuadratureConfig};

fn main() -> radnorm::Result<()> {
    let cfg = QuadratureConfig::default();
    let exprs = ["z^2", "K(0.9, 2)", "K(0.99, 1.2)", "U(1e-3; 4, 2; 0)", "z - K(0.5, 3)"];
    let corpus = exprs.iter().map(|s| compile(s)).collect::<Result<Vec<_>, _>>()?;

    for (p, q) in [(4.0, 2.0), (2.0, 4.0), (3.0, 3.0)] {
        let report = containment_sweep(ExponentPair::new(p, q)?, &corpus, &cfg)?;
        println!("(p, q) = ({p}, {q}): worst ratio {:.9}, holds = {}", report.worst_ratio, report.holds);
        for row in &report.rows {
            println!(
                "  {:<18} rho {:>12.8}  mixed {:>12.8}  ratio {:.9}",
                exprs[row.index], row.rho.value, row.mixed.value, row.ratio
            );
        }
    }
    Ok(())
}
