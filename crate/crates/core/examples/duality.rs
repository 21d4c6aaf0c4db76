//! The area pairing and a Hoelder-type bound against conjugate mixed norms.

use num_complex::Complex64;
use radnorm::{mixed_norm, pairing, DiscFunction, ExponentPair, QuadratureConfig};

fn main() -> radnorm::Result<()> {
    let cfg = QuadratureConfig::default();
    print!("pairing(z^j, z^k):\n");
    for j in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|k| {
                let v = pairing(&DiscFunction::monomial(j), &DiscFunction::monomial(k), &cfg).unwrap();
                format!("{:>8.5}", v.value.re)
            })
            .collect();
        println!("  {}", row.join(" "));
    }

    let e = ExponentPair::new(4.0, 2.0)?;
    let f = DiscFunction::polynomial(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0), Complex64::new(-0.5, 0.0)]);
    let g = DiscFunction::pole_kernel(0.7, 1.0)?;
    let v = pairing(&f, &g, &cfg)?;
    let nf = mixed_norm(&f, e, &cfg)?.value;
    let ng = mixed_norm(&g, e.conjugate(), &cfg)?.value;
    println!(
        "\n|<f, g>| = {:.6} <= 2 ||f||_({}, {}) ||g||_({:.3}, {:.3}) = {:.6}",
        v.value.norm(),
        e.p(),
        e.q(),
        e.conjugate().p(),
        e.conjugate().q(),
        2.0 * nf * ng
    );
    Ok(())
}
