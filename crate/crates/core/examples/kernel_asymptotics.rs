//! Growth of `(1 - alpha z)^(-beta)` norms as alpha approaches 1.

use radnorm::{kernel_asymptotics, ExponentPair, QuadratureConfig, Space};

fn main() -> radnorm::Result<()> {
    let cfg = QuadratureConfig::default();
    let alphas: Vec<f64> = (0..8).map(|i| 1.0 - 10f64.powf(-1.0 - 3.0 * i as f64 / 7.0)).collect();

    for &(p, q, beta) in &[(2.0, 2.0, 2.0), (4.0, 2.0, 1.75), (2.0, 4.0, 1.75), (3.0, 3.0, 2.0)] {
        let e = ExponentPair::new(p, q)?;
        for space in [Space::Rm, Space::Mixed] {
            let fit = kernel_asymptotics(e, beta, &alphas, space, &cfg)?;
            println!(
                "p={p} q={q} beta={beta} {space:>5}: slope {:+.4} (predicted {:+.4}), residual {:.3}",
                fit.slope,
                e.critical_beta() - beta,
                fit.residual_max
            );
        }
    }
    Ok(())
}
