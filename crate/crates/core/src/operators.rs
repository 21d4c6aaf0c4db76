//! Weighted Bergman projection and the area pairing, both integrated over the
//! disc with `dA = dx dy / pi`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disc::{DiscFunction, DiscPoint, Measurable, Polar, PoleKernel};
use crate::error::{Error, Result};
use crate::quad::{disc_integral, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionParams {
    gamma: f64,
}

impl ProjectionParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > -1.0 && gamma.is_finite()) {
            return Err(Error::Range(format!("gamma = {gamma} must exceed -1")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Whether `1/p < gamma + 1`, the condition for boundedness on exponent `p`.
    pub fn admits(&self, p: f64) -> bool {
        1.0 / p < self.gamma + 1.0
    }
}

/// A complex integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub converged: bool,
}

/// `P_gamma f(z) = (gamma + 1) int (1 - |w|^2)^gamma f(w) (1 - z conj(w))^{-(2+gamma)} dA(w)`.
pub fn bergman_project<M: Measurable + ?Sized>(
    params: ProjectionParams,
    f: &M,
    z: &DiscPoint,
    config: &QuadratureConfig,
) -> Result<ComplexResult> {
    let gamma = params.gamma;
    // (1 - z conj(w))^{-s} = conj((1 - conj(z) w)^{-s}) on the principal branch
    let kernel = PoleKernel::new(z.to_complex(), 2.0 + gamma)?;
    let kernel_fn = DiscFunction::PoleKernel(kernel);
    let mut sing = f.singularities();
    sing.merge(kernel_fn.singularities());
    let (value, err, evaluations, converged) = disc_integral(
        |w: &DiscPoint| {
            let x = w.one_minus_r();
            let weight = if gamma == 0.0 {
                1.0
            } else {
                (gamma * (x * (2.0 - x)).ln()).exp()
            };
            let k = kernel_fn.evaluate_polar(w);
            let k = Polar {
                ln_abs: k.ln_abs,
                arg: -k.arg,
            }
            .to_complex();
            (gamma + 1.0) * weight * f.value(w) * k
        },
        &sing,
        config,
    )?;
    Ok(ComplexResult {
        value,
        error_estimate: err,
        evaluations,
        converged,
    })
}

/// `int_D f conj(g) dA`.
pub fn pairing<F, G>(f: &F, g: &G, config: &QuadratureConfig) -> Result<ComplexResult>
where
    F: Measurable + ?Sized,
    G: Measurable + ?Sized,
{
    let mut sing = f.singularities();
    sing.merge(g.singularities());
    let (value, err, evaluations, converged) =
        disc_integral(|w: &DiscPoint| f.value(w) * g.value(w).conj(), &sing, config)?;
    Ok(ComplexResult {
        value,
        error_estimate: err,
        evaluations,
        converged,
    })
}
