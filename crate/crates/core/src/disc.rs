//! Domain types for functions on the unit disc.
//!
//! Points are stored as `x = 1 - r` together with a two-part angle
//! `theta + theta_offset`. Both choices keep distances to poles that sit
//! within `1e-50` of the unit circle representable: `1 + delta - r` is formed
//! as `delta + x`, and an angle `1e-50` away from a pole at angle `psi` is
//! carried as `(psi, 1e-50)` rather than rounded into `psi`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle into `(-pi, pi]`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Integrability exponents `(p, q)` with `1 < p, q < inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair", into = "RawPair")]
pub struct ExponentPair {
    p: f64,
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPair {
    p: f64,
    q: f64,
}

impl TryFrom<RawPair> for ExponentPair {
    type Error = Error;
    fn try_from(raw: RawPair) -> Result<Self> {
        ExponentPair::new(raw.p, raw.q)
    }
}

impl From<ExponentPair> for RawPair {
    fn from(e: ExponentPair) -> Self {
        RawPair { p: e.p, q: e.q }
    }
}

impl ExponentPair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 1.0;
        if !ok(p) || !ok(q) {
            return Err(Error::InvalidExponents(format!(
                "need 1 < p, q < inf, got p = {p}, q = {q}"
            )));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `1/p + 1/q`, the critical kernel exponent.
    pub fn critical_beta(&self) -> f64 {
        1.0 / self.p + 1.0 / self.q
    }

    /// Hölder conjugates `(p/(p-1), q/(q-1))`.
    pub fn conjugate(&self) -> ExponentPair {
        ExponentPair {
            p: self.p / (self.p - 1.0),
            q: self.q / (self.q - 1.0),
        }
    }
}

/// Free-function form of [`ExponentPair::conjugate`].
pub fn conjugate(e: ExponentPair) -> ExponentPair {
    e.conjugate()
}

/// Normalizations used by every integral in the crate: `dtheta / 2pi` on
/// circles and `dx dy / pi` on the disc, so both have total mass one.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeasureConvention;

impl MeasureConvention {
    pub const ANGULAR_DENSITY: f64 = 1.0 / TAU;
    pub const AREA_DENSITY: f64 = 1.0 / PI;
}

/// A point strictly inside the unit disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscPoint {
    one_minus_r: f64,
    theta: f64,
    theta_offset: f64,
}

impl DiscPoint {
    /// `one_minus_r` must lie in `(0, 1]`.
    pub fn new(one_minus_r: f64, theta: f64) -> Result<Self> {
        Self::with_offset(one_minus_r, theta.rem_euclid(TAU), 0.0)
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::Domain(format!("radius {r} not in [0, 1)")));
        }
        Self::new(1.0 - r, theta)
    }

    /// Point at angle `base + offset`; `offset` may be far below the
    /// resolution of `base`.
    pub fn with_offset(one_minus_r: f64, base: f64, offset: f64) -> Result<Self> {
        if !(one_minus_r > 0.0 && one_minus_r <= 1.0) {
            return Err(Error::Domain(format!(
                "one_minus_r = {one_minus_r} not in (0, 1]"
            )));
        }
        if !base.is_finite() || !offset.is_finite() {
            return Err(Error::Domain("non-finite angle".into()));
        }
        Ok(Self {
            one_minus_r,
            theta: base,
            theta_offset: offset,
        })
    }

    /// Unchecked constructor for quadrature nodes; clamps `x` into `(0, 1]`.
    pub(crate) fn node(one_minus_r: f64, base: f64, offset: f64) -> Self {
        Self {
            one_minus_r: one_minus_r.clamp(f64::MIN_POSITIVE, 1.0),
            theta: base,
            theta_offset: offset,
        }
    }

    pub fn one_minus_r(&self) -> f64 {
        self.one_minus_r
    }

    pub fn r(&self) -> f64 {
        1.0 - self.one_minus_r
    }

    /// Angle in `[0, 2pi)`.
    pub fn theta(&self) -> f64 {
        (self.theta + self.theta_offset).rem_euclid(TAU)
    }

    /// Signed angular distance from `center`, in `(-pi, pi]`, computed
    /// without rounding the offset into the base angle.
    pub fn angle_from(&self, center: f64) -> f64 {
        wrap_angle(wrap_angle(self.theta - center) + self.theta_offset)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.r(), self.theta + self.theta_offset)
    }
}

/// Product region `{x in [x_lo, x_hi], |theta - center| <= half_width}` in
/// `x = 1 - r` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusArc {
    x_lo: f64,
    x_hi: f64,
    center: f64,
    half_width: f64,
}

impl AnnulusArc {
    pub fn centered(x_lo: f64, x_hi: f64, center: f64, half_width: f64) -> Result<Self> {
        if !(x_lo > 0.0 && x_lo <= x_hi && x_hi <= 1.0) {
            return Err(Error::Range(format!(
                "radial interval [{x_lo}, {x_hi}] not inside (0, 1]"
            )));
        }
        if !(half_width > 0.0 && half_width <= PI) || !center.is_finite() {
            return Err(Error::Range(format!(
                "angular half-width {half_width} not in (0, pi]"
            )));
        }
        Ok(Self {
            x_lo,
            x_hi,
            center,
            half_width,
        })
    }

    /// Region from `one_minus_r` bounds and an angular interval `[lo, hi]`.
    pub fn new(x_range: (f64, f64), theta_range: (f64, f64)) -> Result<Self> {
        let (lo, hi) = theta_range;
        if !(hi > lo) {
            return Err(Error::Range(format!("empty angular interval [{lo}, {hi}]")));
        }
        Self::centered(x_range.0, x_range.1, 0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    /// Region from radii `r in [r_lo, r_hi]`.
    pub fn from_radii(r_range: (f64, f64), theta_range: (f64, f64)) -> Result<Self> {
        Self::new((1.0 - r_range.1, 1.0 - r_range.0), theta_range)
    }

    pub fn x_bounds(&self) -> (f64, f64) {
        (self.x_lo, self.x_hi)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn contains_radius(&self, x: f64) -> bool {
        x >= self.x_lo && x <= self.x_hi
    }

    pub fn contains_angle(&self, z: &DiscPoint) -> bool {
        z.angle_from(self.center).abs() <= self.half_width
    }

    pub fn contains(&self, z: &DiscPoint) -> bool {
        self.contains_radius(z.one_minus_r) && self.contains_angle(z)
    }

    /// Exact endpoint comparison: disjoint radially or angularly.
    pub fn is_disjoint(&self, other: &AnnulusArc) -> bool {
        let radial = self.x_hi < other.x_lo || other.x_hi < self.x_lo;
        let angular =
            wrap_angle(self.center - other.center).abs() > self.half_width + other.half_width;
        radial || angular
    }

    pub fn rotated(&self, phi: f64) -> AnnulusArc {
        AnnulusArc {
            center: self.center + phi,
            ..*self
        }
    }
}

/// Result of a norm or integral evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    /// False when the panel budget ran out before the tolerance was met.
    pub converged: bool,
}

impl NormResult {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.error_estimate / self.value.abs()
        }
    }
}

/// A complex value stored as `exp(ln_abs + i arg)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub ln_abs: f64,
    pub arg: f64,
}

impl Polar {
    pub const ZERO: Polar = Polar {
        ln_abs: f64::NEG_INFINITY,
        arg: 0.0,
    };

    pub fn from_complex(c: Complex64) -> Polar {
        let n = c.norm();
        if n == 0.0 {
            Polar::ZERO
        } else {
            Polar {
                ln_abs: n.ln(),
                arg: c.arg(),
            }
        }
    }

    pub fn to_complex(self) -> Complex64 {
        if self.ln_abs == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(self.ln_abs.exp(), self.arg)
        }
    }

    fn sum(terms: impl Iterator<Item = Polar>) -> Polar {
        let terms: Vec<Polar> = terms.collect();
        let peak = terms
            .iter()
            .map(|t| t.ln_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return Polar::ZERO;
        }
        let s: Complex64 = terms
            .iter()
            .filter(|t| t.ln_abs > f64::NEG_INFINITY)
            .map(|t| Complex64::from_polar((t.ln_abs - peak).exp(), t.arg))
            .sum();
        let n = s.norm();
        if n == 0.0 {
            Polar::ZERO
        } else {
            Polar {
                ln_abs: peak + n.ln(),
                arg: s.arg(),
            }
        }
    }
}

/// `(1 - conj(alpha) z)^(-beta)` on the principal branch, with `alpha`
/// stored in polar form so rotations stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleKernel {
    modulus: f64,
    angle: f64,
    beta: f64,
}

impl PoleKernel {
    pub fn new(alpha: Complex64, beta: f64) -> Result<Self> {
        let modulus = alpha.norm();
        if !(modulus < 1.0) {
            return Err(Error::Range(format!("|alpha| = {modulus} must be < 1")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Range(format!("beta = {beta} must be positive")));
        }
        let angle = if modulus == 0.0 { 0.0 } else { alpha.arg() };
        Ok(Self {
            modulus,
            angle,
            beta,
        })
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.angle)
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Returns `(ln|w|, arg w)` for `w = 1 - conj(alpha) z`.
    fn base(&self, z: &DiscPoint) -> (f64, f64) {
        let a = self.modulus;
        if a == 0.0 {
            return (0.0, 0.0);
        }
        let x = z.one_minus_r;
        let r = 1.0 - x;
        let phi = z.angle_from(self.angle);
        let half = (0.5 * phi).sin();
        let radial = (1.0 - a) + a * x;
        let ln_w = radial.hypot(2.0 * half.abs() * (a * r).sqrt()).ln();
        let re = radial + 2.0 * a * r * half * half;
        let im = -a * r * phi.sin();
        (ln_w, im.atan2(re))
    }

    fn ln_abs(&self, z: &DiscPoint) -> f64 {
        -self.beta * self.base(z).0
    }

    fn polar(&self, z: &DiscPoint) -> Polar {
        let (ln_w, arg_w) = self.base(z);
        Polar {
            ln_abs: -self.beta * ln_w,
            arg: -self.beta * arg_w,
        }
    }
}

/// `delta * (1 + delta - z e^{-i rotation})^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleShift {
    delta: f64,
    ln_delta: f64,
    exponent: f64,
    rotation: f64,
}

impl PoleShift {
    pub fn new(delta: f64, exponent: f64, rotation: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Range(format!("delta = {delta} must be positive")));
        }
        Self::from_ln_delta(delta.ln(), exponent, rotation)
    }

    /// Builds from `ln(delta)`; `delta` itself must be a normal double.
    pub fn from_ln_delta(ln_delta: f64, exponent: f64, rotation: f64) -> Result<Self> {
        let delta = ln_delta.exp();
        if !(delta >= f64::MIN_POSITIVE && delta.is_finite()) {
            return Err(Error::Range(format!(
                "ln(delta) = {ln_delta} outside double range"
            )));
        }
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::Range(format!("exponent = {exponent} must be positive")));
        }
        if !rotation.is_finite() {
            return Err(Error::Range("non-finite rotation".into()));
        }
        Ok(Self {
            delta,
            ln_delta,
            exponent,
            rotation,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn ln_delta(&self) -> f64 {
        self.ln_delta
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    fn base(&self, z: &DiscPoint) -> (f64, f64) {
        let x = z.one_minus_r;
        let r = 1.0 - x;
        let phi = z.angle_from(self.rotation);
        let half = (0.5 * phi).sin();
        let ln_w = ln_pole_modulus(self.delta, x, half);
        let re = self.delta + x + 2.0 * r * half * half;
        let im = -r * phi.sin();
        (ln_w, im.atan2(re))
    }

    fn ln_abs(&self, z: &DiscPoint) -> f64 {
        self.ln_delta - self.exponent * self.base(z).0
    }

    fn polar(&self, z: &DiscPoint) -> Polar {
        let (ln_w, arg_w) = self.base(z);
        Polar {
            ln_abs: self.ln_delta - self.exponent * ln_w,
            arg: -self.exponent * arg_w,
        }
    }
}

/// `ln |1 + delta - r e^{i phi}|` given `half_sin = sin(phi / 2)`.
pub(crate) fn ln_pole_modulus(delta: f64, x: f64, half_sin: f64) -> f64 {
    let tangential = 2.0 * half_sin.abs() * ((1.0 - x) * (1.0 + delta)).sqrt();
    (delta + x).hypot(tangential).ln()
}

/// A function masked to (or away from) an [`AnnulusArc`].
#[derive(Debug, Clone, PartialEq)]
pub struct Masked {
    inner: Box<DiscFunction>,
    region: AnnulusArc,
    keep_inside: bool,
}

impl Masked {
    pub fn inner(&self) -> &DiscFunction {
        &self.inner
    }

    pub fn region(&self) -> &AnnulusArc {
        &self.region
    }

    pub fn keep_inside(&self) -> bool {
        self.keep_inside
    }
}

/// Location of a pole outside the closed disc: at angle `angle`, radius
/// `1 + gap` to first order, so that `x = -gap` in radial coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub angle: f64,
    pub gap: f64,
}

/// Structural features a quadrature plan needs: where the function peaks and
/// where it jumps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Singularities {
    pub poles: Vec<Pole>,
    pub regions: Vec<AnnulusArc>,
}

impl Singularities {
    pub fn merge(&mut self, other: Singularities) {
        for p in other.poles {
            if !self.poles.contains(&p) {
                self.poles.push(p);
            }
        }
        for a in other.regions {
            if !self.regions.contains(&a) {
                self.regions.push(a);
            }
        }
    }
}

/// Any measurable complex function on the disc that integrals can sample.
pub trait Measurable: Sync {
    fn value(&self, z: &DiscPoint) -> Complex64;

    fn singularities(&self) -> Singularities {
        Singularities::default()
    }
}

/// Wraps a closure as a [`Measurable`] with no structural hints.
pub struct PointFn<F>(pub F);

impl<F: Fn(&DiscPoint) -> Complex64 + Sync> Measurable for PointFn<F> {
    fn value(&self, z: &DiscPoint) -> Complex64 {
        (self.0)(z)
    }
}

/// The function algebra consumed by the norm evaluators.
#[derive(Debug, Clone, PartialEq)]
pub enum DiscFunction {
    /// `sum c_k z^k`.
    PowerSeries(Vec<Complex64>),
    PoleKernel(PoleKernel),
    PoleShift(PoleShift),
    Sum(Vec<DiscFunction>),
    Scale(Complex64, Box<DiscFunction>),
    Masked(Masked),
}

impl DiscFunction {
    pub fn constant(c: impl Into<Complex64>) -> Self {
        DiscFunction::PowerSeries(vec![c.into()])
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        DiscFunction::PowerSeries(coeffs)
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        DiscFunction::PowerSeries(coeffs)
    }

    pub fn pole_kernel(alpha: impl Into<Complex64>, beta: f64) -> Result<Self> {
        Ok(DiscFunction::PoleKernel(PoleKernel::new(alpha.into(), beta)?))
    }

    pub fn pole_shift(delta: f64, exponent: f64, rotation: f64) -> Result<Self> {
        Ok(DiscFunction::PoleShift(PoleShift::new(
            delta, exponent, rotation,
        )?))
    }

    pub fn sum(terms: Vec<DiscFunction>) -> Self {
        DiscFunction::Sum(terms)
    }

    pub fn scale(c: impl Into<Complex64>, f: DiscFunction) -> Self {
        DiscFunction::Scale(c.into(), Box::new(f))
    }

    pub fn masked(f: DiscFunction, region: AnnulusArc, keep_inside: bool) -> Self {
        DiscFunction::Masked(Masked {
            inner: Box::new(f),
            region,
            keep_inside,
        })
    }

    /// False once a mask appears anywhere in the tree.
    pub fn is_analytic(&self) -> bool {
        match self {
            DiscFunction::PowerSeries(_)
            | DiscFunction::PoleKernel(_)
            | DiscFunction::PoleShift(_) => true,
            DiscFunction::Sum(terms) => terms.iter().all(DiscFunction::is_analytic),
            DiscFunction::Scale(_, f) => f.is_analytic(),
            DiscFunction::Masked(_) => false,
        }
    }

    /// `g(z) = f(z e^{-i phi})`.
    pub fn rotate(&self, phi: f64) -> DiscFunction {
        match self {
            DiscFunction::PowerSeries(c) => DiscFunction::PowerSeries(
                c.iter()
                    .enumerate()
                    .map(|(k, ck)| {
                        if k == 0 || phi == 0.0 {
                            *ck
                        } else {
                            ck * Complex64::from_polar(1.0, -(k as f64) * phi)
                        }
                    })
                    .collect(),
            ),
            DiscFunction::PoleKernel(k) => DiscFunction::PoleKernel(PoleKernel {
                angle: if k.modulus == 0.0 { 0.0 } else { k.angle + phi },
                ..*k
            }),
            DiscFunction::PoleShift(s) => DiscFunction::PoleShift(PoleShift {
                rotation: s.rotation + phi,
                ..*s
            }),
            DiscFunction::Sum(terms) => {
                DiscFunction::Sum(terms.iter().map(|t| t.rotate(phi)).collect())
            }
            DiscFunction::Scale(c, f) => DiscFunction::Scale(*c, Box::new(f.rotate(phi))),
            DiscFunction::Masked(m) => DiscFunction::Masked(Masked {
                inner: Box::new(m.inner.rotate(phi)),
                region: m.region.rotated(phi),
                keep_inside: m.keep_inside,
            }),
        }
    }

    pub fn evaluate_polar(&self, z: &DiscPoint) -> Polar {
        match self {
            DiscFunction::PowerSeries(c) => Polar::from_complex(horner(c, z.to_complex())),
            DiscFunction::PoleKernel(k) => k.polar(z),
            DiscFunction::PoleShift(s) => s.polar(z),
            DiscFunction::Sum(terms) => Polar::sum(terms.iter().map(|t| t.evaluate_polar(z))),
            DiscFunction::Scale(c, f) => {
                if *c == Complex64::new(0.0, 0.0) {
                    return Polar::ZERO;
                }
                let inner = f.evaluate_polar(z);
                Polar {
                    ln_abs: inner.ln_abs + c.norm().ln(),
                    arg: inner.arg + c.arg(),
                }
            }
            DiscFunction::Masked(m) => {
                if m.region.contains(z) == m.keep_inside {
                    m.inner.evaluate_polar(z)
                } else {
                    Polar::ZERO
                }
            }
        }
    }

    /// `ln |f(z)|`; `-inf` where `f` vanishes.
    pub fn ln_abs(&self, z: &DiscPoint) -> f64 {
        match self {
            DiscFunction::PoleKernel(k) => k.ln_abs(z),
            DiscFunction::PoleShift(s) => s.ln_abs(z),
            DiscFunction::Scale(c, f) => {
                let n = c.norm();
                if n == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    n.ln() + f.ln_abs(z)
                }
            }
            DiscFunction::Masked(m) => {
                if m.region.contains(z) == m.keep_inside {
                    m.inner.ln_abs(z)
                } else {
                    f64::NEG_INFINITY
                }
            }
            DiscFunction::Sum(terms) if terms.len() == 1 => terms[0].ln_abs(z),
            _ => self.evaluate_polar(z).ln_abs,
        }
    }

    pub fn evaluate(&self, z: &DiscPoint) -> Complex64 {
        self.evaluate_polar(z).to_complex()
    }

    pub fn evaluate_abs(&self, z: &DiscPoint) -> f64 {
        self.ln_abs(z).exp()
    }

    pub fn singularities(&self) -> Singularities {
        let mut out = Singularities::default();
        self.collect_singularities(&mut out);
        out
    }

    fn collect_singularities(&self, out: &mut Singularities) {
        match self {
            DiscFunction::PowerSeries(_) => {}
            DiscFunction::PoleKernel(k) => {
                if k.modulus > 0.0 {
                    let pole = Pole {
                        angle: k.angle,
                        gap: (1.0 - k.modulus) / k.modulus,
                    };
                    if !out.poles.contains(&pole) {
                        out.poles.push(pole);
                    }
                }
            }
            DiscFunction::PoleShift(s) => {
                let pole = Pole {
                    angle: s.rotation,
                    gap: s.delta,
                };
                if !out.poles.contains(&pole) {
                    out.poles.push(pole);
                }
            }
            DiscFunction::Sum(terms) => terms.iter().for_each(|t| t.collect_singularities(out)),
            DiscFunction::Scale(_, f) => f.collect_singularities(out),
            DiscFunction::Masked(m) => {
                m.inner.collect_singularities(out);
                if !out.regions.contains(&m.region) {
                    out.regions.push(m.region);
                }
            }
        }
    }
}

impl Measurable for DiscFunction {
    fn value(&self, z: &DiscPoint) -> Complex64 {
        self.evaluate(z)
    }

    fn singularities(&self) -> Singularities {
        DiscFunction::singularities(self)
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// Free-function form of [`DiscFunction::evaluate_abs`].
pub fn evaluate_abs(f: &DiscFunction, z: &DiscPoint) -> f64 {
    f.evaluate_abs(z)
}

/// Free-function form of [`DiscFunction::rotate`].
pub fn rotate(f: &DiscFunction, phi: f64) -> DiscFunction {
    f.rotate(phi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(r: f64, theta: f64) -> DiscPoint {
        DiscPoint::from_polar(r, theta).unwrap()
    }

    #[test]
    fn constant_and_identity() {
        let one = DiscFunction::constant(1.0);
        assert_eq!(one.evaluate_abs(&pt(0.7, 2.0)), 1.0);
        let z = DiscFunction::monomial(1);
        let p = DiscPoint::new(0.5, 1.0).unwrap();
        assert!((z.evaluate_abs(&p) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kernel_at_origin_parameter_is_one() {
        let k = DiscFunction::pole_kernel(0.0, 3.0).unwrap();
        assert_eq!(k.evaluate_abs(&pt(0.9, 0.3)), 1.0);
    }

    #[test]
    fn kernel_direct_arithmetic() {
        let k = DiscFunction::pole_kernel(0.5, 2.0).unwrap();
        let v = k.evaluate_abs(&pt(0.5, 0.0));
        assert!((v - 16.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_matches_complex_arithmetic() {
        let alpha = Complex64::from_polar(0.8, 0.7);
        let k = DiscFunction::pole_kernel(alpha, 1.5).unwrap();
        for &(r, t) in &[(0.1, 0.0), (0.5, 2.0), (0.95, 0.8), (0.3, 5.0)] {
            let z = Complex64::from_polar(r, t);
            let direct = (Complex64::new(1.0, 0.0) - alpha.conj() * z).powf(-1.5);
            let got = k.evaluate(&pt(r, t));
            assert!((got - direct).norm() < 1e-12 * direct.norm(), "{got} vs {direct}");
        }
    }

    #[test]
    fn pole_shift_matches_complex_arithmetic() {
        let f = DiscFunction::pole_shift(0.25, 2.3, 0.4).unwrap();
        for &(r, t) in &[(0.0, 0.0), (0.5, 0.4), (0.99, 1.0), (0.3, 4.0)] {
            let z = Complex64::from_polar(r, t) * Complex64::from_polar(1.0, -0.4);
            let direct = 0.25 * (Complex64::new(1.25, 0.0) - z).powf(-2.3);
            let got = f.evaluate(&pt(r, t));
            assert!((got - direct).norm() < 1e-12 * direct.norm(), "{got} vs {direct}");
        }
    }

    #[test]
    fn masked_outside_is_zero() {
        let a = AnnulusArc::from_radii((0.5, 0.9), (0.0, 1.0)).unwrap();
        let f = DiscFunction::masked(DiscFunction::constant(1.0), a, true);
        assert_eq!(f.evaluate_abs(&pt(0.2, 0.5)), 0.0);
        assert_eq!(f.evaluate_abs(&pt(0.7, 0.5)), 1.0);
        assert!(!f.is_analytic());
    }

    #[test]
    fn rotation_of_identity() {
        let g = DiscFunction::monomial(1).rotate(PI);
        assert!((g.evaluate_abs(&pt(0.5, 0.0)) - 0.5).abs() < 1e-15);
        let f = DiscFunction::pole_kernel(0.3, 2.0).unwrap();
        assert_eq!(f.rotate(0.0), f);
    }

    #[test]
    fn conjugates() {
        let e = ExponentPair::new(2.0, 2.0).unwrap().conjugate();
        assert_eq!((e.p(), e.q()), (2.0, 2.0));
        let e = ExponentPair::new(4.0, 2.0).unwrap().conjugate();
        assert!((e.p() - 4.0 / 3.0).abs() < 1e-15 && e.q() == 2.0);
        let e = ExponentPair::new(1.25, 5.0).unwrap().conjugate();
        assert!((e.p() - 5.0).abs() < 1e-14 && (e.q() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn exponent_range_is_enforced() {
        assert!(ExponentPair::new(1.0, 2.0).is_err());
        assert!(ExponentPair::new(2.0, f64::INFINITY).is_err());
        assert!(ExponentPair::new(f64::NAN, 2.0).is_err());
    }

    #[test]
    fn points_reject_boundary() {
        assert!(DiscPoint::new(0.0, 0.0).is_err());
        assert!(DiscPoint::new(-1e-3, 0.0).is_err());
        assert!(DiscPoint::from_polar(1.0, 0.0).is_err());
        assert!(DiscPoint::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn tiny_offsets_survive() {
        let z = DiscPoint::with_offset(1e-60, 1.9, 3e-55).unwrap();
        assert_eq!(z.angle_from(1.9), 3e-55);
        let region = AnnulusArc::centered(1e-61, 1e-59, 1.9, 4e-55).unwrap();
        assert!(region.contains(&z));
        let z2 = DiscPoint::with_offset(1e-60, 1.9, 5e-55).unwrap();
        assert!(!region.contains(&z2));
    }

    #[test]
    fn extreme_pole_shift_is_finite() {
        let f = DiscFunction::pole_shift(1e-115, 2.3, 0.0).unwrap();
        let z = DiscPoint::new(1e-118, 0.0).unwrap();
        let l = f.ln_abs(&z);
        assert!(l.is_finite());
        // |u| ~ delta^(1 - 2.3) at the pole scale
        assert!((l - (-1.3 * (1e-115f64).ln())).abs() < 0.1);
    }

    #[test]
    fn arcs_disjointness() {
        let a = AnnulusArc::centered(0.1, 0.2, 1.0, 0.1).unwrap();
        let b = AnnulusArc::centered(0.15, 0.3, 1.3, 0.1).unwrap();
        let c = AnnulusArc::centered(0.15, 0.3, 1.15, 0.1).unwrap();
        assert!(a.is_disjoint(&b));
        assert!(!a.is_disjoint(&c));
        let d = AnnulusArc::centered(0.25, 0.3, 1.0, 0.1).unwrap();
        assert!(a.is_disjoint(&d));
    }
}
