//! Both norms of a few functions, built directly and from expressions.

use radnorm::{compile, mixed_norm, rm_norm, DiscFunction, ExponentPair, QuadratureConfig};

fn main() -> radnorm::Result<()> {
    let cfg = QuadratureConfig::default();
    let e = ExponentPair::new(4.0, 2.0)?;

    let cases = [
        ("z^3", DiscFunction::monomial(3)),
        ("K(0.9, 2)", DiscFunction::pole_kernel(0.9, 2.0)?),
        ("U(1e-4; 4, 2; 1.5)", compile("U(1e-4; 4, 2; 1.5)")?),
        ("1 + 0.5 z^2 - 0.25 K(0.5, 1)", compile("1 + 0.5 z^2 - 0.25 K(0.5, 1)")?),
    ];

    println!("{:<32} {:>14} {:>14} {:>10}", "f", "rho_{4,2}", "||f||_mixed", "evals");
    for (label, f) in &cases {
        let rho = rm_norm(f, e, &cfg)?;
        let mixed = mixed_norm(f, e, &cfg)?;
        println!(
            "{label:<32} {:>14.10} {:>14.10} {:>10}",
            rho.value,
            mixed.value,
            rho.evaluations + mixed.evaluations
        );
    }
    Ok(())
}
