//! Sums of rotated, masked bumps whose two norms grow at different rates.

use radnorm::{separation_experiment, ExponentPair, QuadratureConfig};

fn main() -> radnorm::Result<()> {
    let e = ExponentPair::new(2.0, 1.25)?;
    let report = separation_experiment(e, 5, &QuadratureConfig::default())?;

    println!(" n   rho(f_n)   mixed(f_n)  n^2 rho(g_n)  n^2 mixed(g_n)");
    for piece in &report.pieces {
        let n2 = (piece.n * piece.n) as f64;
        println!(
            "{:>2}  {:>9.6}  {:>10.6}  {:>12.6}  {:>14.6}",
            piece.n,
            piece.rho_f.value,
            piece.mixed_f.value,
            n2 * piece.rho_g.value,
            n2 * piece.mixed_g.value
        );
    }
    println!("\n m   rho(F_m)   mixed(F_m)   ratio");
    for s in &report.sums {
        println!("{:>2}  {:>9.6}  {:>10.6}  {:>7.4}", s.m, s.rho.value, s.mixed.value, s.rho.value / s.mixed.value);
    }
    if let Some(a) = &report.additivity {
        println!(
            "\nm = {}: rho direct {:.12} vs combined {:.12}",
            a.m, a.rho_direct.value, a.rho_combined
        );
    }
    if let Some(f) = &report.fits {
        println!(
            "slopes in log m: rho {:.3}, mixed {:.3}, ratio {:.3} (limits 1/q = {}, 1/p = {}, {:.2})",
            f.rho.slope,
            f.mixed.slope,
            f.ratio.slope,
            1.0 / e.q(),
            1.0 / e.p(),
            1.0 / e.q() - 1.0 / e.p()
        );
    }
    Ok(())
}
