//! Norms of analytic functions on the unit disc under average radial
//! integrability and mixed-norm integrability.
//!
//! `rho_{p,q}` integrates `|f|^p` along each radius, then the `q/p` power of
//! that over the angle; the mixed norm swaps the order. Both are evaluated by
//! nested adaptive quadrature that is told where a function's poles and mask
//! edges are, so functions with poles within `1e-50` of the circle stay
//! tractable.
//!
//! ```
//! use radnorm::{rm_norm, DiscFunction, ExponentPair, QuadratureConfig};
//!
//! let z = DiscFunction::monomial(1);
//! let e = ExponentPair::new(2.0, 2.0).unwrap();
//! let r = rm_norm(&z, e, &QuadratureConfig::default()).unwrap();
//! assert!((r.value - 3f64.powf(-0.5)).abs() < 1e-9);
//! ```

pub mod analysis;
pub mod cli;
pub mod disc;
pub mod dsl;
pub mod error;
pub mod kernels;
pub mod operators;
pub mod quad;

pub use analysis::{
    containment_sweep, fit_loglog, kernel_asymptotics, separation_experiment, ExponentFit, Space,
};
pub use disc::{
    conjugate, evaluate_abs, rotate, AnnulusArc, DiscFunction, DiscPoint, ExponentPair, Measurable,
    MeasureConvention, NormResult, PointFn,
};
pub use dsl::{compile, lower, parse, print, Expr, ParseError};
pub use error::{Error, QuadError, Result};
pub use kernels::{build_schedule, kernel_envelope, test_kernel, u_delta, CounterexampleSchedule, KernelParams};
pub use operators::{bergman_project, pairing, ComplexResult, ProjectionParams};
pub use quad::{integrate_1d, mixed_norm, rm_norm, stable_pole_modulus_sq, QuadratureConfig, Workspace};
