//! One-dimensional adaptive integration near poles and endpoint singularities.

use radnorm::{integrate_1d, stable_pole_modulus_sq, QuadError, QuadratureConfig};

fn main() {
    let cfg = QuadratureConfig::default().with_rel_tol(1e-12);

    let r = integrate_1d(|x| x.powf(-0.5), 0.0, 1.0, &cfg).unwrap();
    println!("int_0^1 x^(-1/2)          = {:.15} ({} evaluations)", r.value, r.evaluations);

    // a pole at 1 + 1e-4, just past the right endpoint
    let d = 1e-4;
    let hinted = cfg.clone().with_hints(vec![(1.0 + d, d)]);
    let r = integrate_1d(|x| 1.0 / ((1.0 + d - x).powi(2)), 0.0, 1.0, &hinted).unwrap();
    println!("int_0^1 (1+d-x)^(-2)      = {:.6} (exact {:.6})", r.value, 1.0 / d - 1.0 / (1.0 + d));

    match integrate_1d(|x| 1.0 / x, 0.0, 1.0, &cfg) {
        Err(QuadError::Diverged { lower_bound, evaluations }) => {
            println!("int_0^1 1/x diverges: exceeds {lower_bound:.2} after {evaluations} evaluations")
        }
        other => println!("int_0^1 1/x: {other:?}"),
    }

    // |1 + delta - r e^{it}|^2 where the naive complex form cancels to nothing
    let (delta, x, t) = (1e-12, 1e-12, 1e-13);
    let naive = {
        let w = num_complex::Complex64::from_polar(1.0 - x, t);
        (num_complex::Complex64::new(1.0 + delta, 0.0) - w).norm_sqr()
    };
    println!("modulus^2 stable {:.6e} naive {naive:.6e}", stable_pole_modulus_sq(delta, x, t));
}
