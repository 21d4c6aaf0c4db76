//! Weighted Bergman projections of analytic and non-analytic inputs.

use radnorm::{bergman_project, DiscFunction, DiscPoint, PointFn, ProjectionParams, QuadratureConfig};

fn main() -> radnorm::Result<()> {
    let cfg = QuadratureConfig::default();
    let z = DiscPoint::from_polar(0.6, 0.8)?;
    let w = z.to_complex();

    let p0 = ProjectionParams::new(0.0)?;
    let cube = bergman_project(p0, &DiscFunction::monomial(3), &z, &cfg)?;
    println!("P0(z^3)(z)    = {:.12}   z^3 = {:.12}", cube.value, w.powu(3));

    // |w|^2 w projects to 2z/3
    let radial = PointFn(|p: &DiscPoint| p.r() * p.r() * p.to_complex());
    let v = bergman_project(p0, &radial, &z, &cfg)?;
    println!("P0(|w|^2 w)(z) = {:.12}   2z/3 = {:.12}", v.value, 2.0 * w / 3.0);

    let conj = PointFn(|p: &DiscPoint| p.to_complex().conj());
    println!("P0(conj w)(z)  = {:.3e}", bergman_project(p0, &conj, &z, &cfg)?.value.norm());

    for gamma in [0.0, 0.5, 1.0, 3.0] {
        let params = ProjectionParams::new(gamma)?;
        let one = bergman_project(params, &DiscFunction::constant(1.0), &z, &cfg)?;
        println!("gamma = {gamma:>4}: P(1)(z) = {:.12} ({} evaluations)", one.value, one.evaluations);
    }
    Ok(())
}
