//! Adaptive Gauss-Kronrod quadrature with pole-adapted substitutions, and
//! the two iterated norms built on it.
//!
//! Every panel estimate is carried as `mantissa * exp(ln_scale)`, so an
//! integrand that spans hundreds of orders of magnitude (a pole at distance
//! `1e-54` from the circle raised to a power) is summed without overflow.
//! Near a pole hint `(c, s)` the variable is stretched as
//! `t = c +/- s * (e^u - 1)`, which turns algebraic peaks of width `s` into
//! smooth exponentials in `u`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disc::{
    ln_pole_modulus, wrap_angle, AnnulusArc, DiscFunction, DiscPoint, ExponentPair, NormResult,
    Singularities,
};
use crate::error::QuadError;

// Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Width in `u` of the initial panels laid over a stretched segment.
const STRETCH_PANEL: f64 = 3.0;
/// Inner integrals run this much tighter than the outer one.
const INNER_TOL_FACTOR: f64 = 0.1;
/// Divergence: an endpoint child keeping this share of its parent's mass...
const DIVERGENCE_MASS_RATIO: f64 = 0.9;
/// ...while its peak sample grows by this factor...
const DIVERGENCE_PEAK_GROWTH: f64 = 1.5;
/// ...on this many successive bisections.
const DIVERGENCE_STREAK: u8 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    /// Panel count of the fixed composite rule used when an outer adaptive
    /// integral exhausts its budget.
    pub outer_samples: usize,
    /// `(location, scale)` pairs for [`integrate_1d`].
    pub pole_hints: Option<Vec<(f64, f64)>>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_panels: 4096,
            outer_samples: 512,
            pole_hints: None,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_hints(mut self, hints: Vec<(f64, f64)>) -> Self {
        self.pole_hints = Some(hints);
        self
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(QuadError::Config("tolerances must be positive".into()));
        }
        if self.max_panels < 8 {
            return Err(QuadError::Config("max_panels must be at least 8".into()));
        }
        if self.outer_samples == 0 {
            return Err(QuadError::Config("outer_samples must be positive".into()));
        }
        if let Some(h) = &self.pole_hints {
            if h.iter().any(|&(c, s)| !c.is_finite() || !(s > 0.0)) {
                return Err(QuadError::Config("pole hints need finite location, positive scale".into()));
            }
        }
        Ok(())
    }
}

/// A quadrature node `anchor + offset`, kept in two parts so that offsets far
/// below the resolution of `anchor` survive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abscissa {
    pub anchor: f64,
    pub offset: f64,
}

impl Abscissa {
    pub fn value(&self) -> f64 {
        self.anchor + self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Map {
    /// `t = anchor + u`.
    Linear { anchor: f64 },
    /// `t = anchor + sign * scale * (e^u - 1)`.
    Stretch { anchor: f64, sign: f64, scale: f64 },
}

impl Map {
    /// Node and `ln |dt/du|`.
    fn point(&self, u: f64) -> (Abscissa, f64) {
        match *self {
            Map::Linear { anchor } => (Abscissa { anchor, offset: u }, 0.0),
            Map::Stretch {
                anchor,
                sign,
                scale,
            } => (
                Abscissa {
                    anchor,
                    offset: sign * scale * u.exp_m1(),
                },
                scale.ln() + u,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Segment {
    map: Map,
    u_lo: f64,
    u_hi: f64,
}

impl Segment {
    fn stretch(anchor: f64, sign: f64, scale: f64, d_lo: f64, d_hi: f64) -> Segment {
        Segment {
            map: Map::Stretch {
                anchor,
                sign,
                scale,
            },
            u_lo: (d_lo / scale).ln_1p(),
            u_hi: (d_hi / scale).ln_1p(),
        }
    }

    fn linear(anchor: f64, lo: f64, hi: f64) -> Segment {
        Segment {
            map: Map::Linear { anchor },
            u_lo: lo,
            u_hi: hi,
        }
    }

    fn initial_panels(&self) -> usize {
        match self.map {
            Map::Linear { .. } => 2,
            Map::Stretch { .. } => (((self.u_hi - self.u_lo) / STRETCH_PANEL).ceil() as usize).max(1),
        }
    }
}

/// Vector-space values the engine can accumulate.
pub(crate) trait Linear:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn norm(&self) -> f64;
    fn parts(&self) -> [f64; 2];
    fn from_parts(p: [f64; 2]) -> Self;
}

impl Linear for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn parts(&self) -> [f64; 2] {
        [*self, 0.0]
    }
    fn from_parts(p: [f64; 2]) -> Self {
        p[0]
    }
}

impl Linear for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn parts(&self) -> [f64; 2] {
        [self.re, self.im]
    }
    fn from_parts(p: [f64; 2]) -> Self {
        Complex64::new(p[0], p[1])
    }
}

/// `val * exp(ln)`; `ln = -inf` is zero whatever `val` holds.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scaled<V> {
    pub ln: f64,
    pub val: V,
}

impl<V: Linear> Scaled<V> {
    /// Positive magnitude given by its logarithm.
    pub fn from_ln(ln: f64) -> Scaled<f64> {
        Scaled { ln, val: 1.0 }
    }

    fn is_zero(&self) -> bool {
        self.ln == f64::NEG_INFINITY || self.val.norm() == 0.0
    }
}

/// Outcome of one adaptive run: `val * exp(ln)` with error `err * exp(ln)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Estimate<V> {
    pub ln: f64,
    pub val: V,
    pub err: f64,
    pub evaluations: u64,
    pub converged: bool,
}

impl<V: Linear> Estimate<V> {
    pub fn value(&self) -> V {
        if self.ln == f64::NEG_INFINITY {
            V::zero()
        } else {
            self.val * self.ln.exp()
        }
    }

    pub fn abs_error(&self) -> f64 {
        if self.ln == f64::NEG_INFINITY {
            0.0
        } else {
            self.err * self.ln.exp()
        }
    }

    pub fn rel_error(&self) -> f64 {
        let n = self.val.norm();
        if n == 0.0 {
            if self.err == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.err / n
        }
    }

    pub fn scaled(&self) -> Scaled<V> {
        Scaled {
            ln: self.ln,
            val: self.val,
        }
    }
}

impl Estimate<f64> {
    /// `ln` of a positive result, `-inf` for zero.
    pub fn ln_value(&self) -> f64 {
        if self.val > 0.0 && self.ln > f64::NEG_INFINITY {
            self.ln + self.val.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EngineOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub parallel: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel<V> {
    seg: usize,
    lo: f64,
    hi: f64,
    ln: f64,
    est: V,
    err: f64,
    /// `ln` of the largest sample magnitude on the panel.
    ln_peak: f64,
    touches_lo: bool,
    touches_hi: bool,
    streak: u8,
}

impl<V: Linear> Panel<V> {
    fn ln_err(&self) -> f64 {
        if self.err == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.ln + self.err.ln()
        }
    }

    fn ln_mass(&self) -> f64 {
        let n = self.est.norm();
        if n == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.ln + n.ln()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapKey {
    ln_err: f64,
    idx: usize,
}

impl Eq for HeapKey {}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ln_err
            .total_cmp(&other.ln_err)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable scratch storage for the adaptive engine.
pub struct Workspace<V = f64> {
    panels: Vec<Panel<V>>,
    heap: BinaryHeap<HeapKey>,
}

impl<V> Default for Workspace<V> {
    fn default() -> Self {
        Self {
            panels: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }
}

impl Workspace<f64> {
    pub fn new() -> Self {
        Self::default()
    }

    /// [`integrate_1d`] reusing this workspace's buffers.
    pub fn integrate_1d<F>(
        &mut self,
        g: F,
        a: f64,
        b: f64,
        config: &QuadratureConfig,
    ) -> Result<NormResult, QuadError>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        config.validate()?;
        if a == b {
            return Ok(NormResult {
                value: 0.0,
                error_estimate: 0.0,
                evaluations: 0,
                converged: true,
            });
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let hints = config.pole_hints.clone().unwrap_or_default();
        let segments = plan_interval(lo, hi, &hints, &[]);
        let opts = EngineOpts {
            rel_tol: config.rel_tol,
            abs_tol: config.abs_tol,
            max_panels: config.max_panels,
            parallel: false,
        };
        let est = adaptive(
            &|t: Abscissa| {
                Ok(Scaled {
                    ln: 0.0,
                    val: g(t.value()),
                })
            },
            &segments,
            &opts,
            self,
        )?;
        Ok(NormResult {
            value: sign * est.value(),
            error_estimate: est.abs_error(),
            evaluations: est.evaluations,
            converged: est.converged,
        })
    }
}

struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

fn eval_panel<V, F>(
    integrand: &F,
    seg_idx: usize,
    seg: &Segment,
    lo: f64,
    hi: f64,
    parallel: bool,
) -> Result<Panel<V>, QuadError>
where
    V: Linear,
    F: Fn(Abscissa) -> Result<Scaled<V>, QuadError> + Sync,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut nodes = [0.0f64; 15];
    for j in 0..7 {
        nodes[2 * j] = center - half * XGK[j];
        nodes[2 * j + 1] = center + half * XGK[j];
    }
    nodes[14] = center;
    let sample = |u: f64| -> Result<Scaled<V>, QuadError> {
        let (ab, ln_jac) = seg.map.point(u);
        let s = integrand(ab)?;
        if s.ln.is_nan() || s.ln == f64::INFINITY || !s.val.parts().iter().all(|v| v.is_finite()) {
            return Err(QuadError::NonFinite { at: ab.value() });
        }
        Ok(Scaled {
            ln: s.ln + ln_jac,
            val: s.val,
        })
    };
    let samples: Vec<Scaled<V>> = if parallel {
        nodes.par_iter().map(|&u| sample(u)).collect::<Result<_, _>>()?
    } else {
        nodes.iter().map(|&u| sample(u)).collect::<Result<_, _>>()?
    };

    let reference = samples
        .iter()
        .filter(|s| !s.is_zero())
        .map(|s| s.ln)
        .fold(f64::NEG_INFINITY, f64::max);
    let ln_peak = samples
        .iter()
        .filter(|s| !s.is_zero())
        .map(|s| s.ln + s.val.norm().ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut panel = Panel {
        seg: seg_idx,
        lo,
        hi,
        ln: f64::NEG_INFINITY,
        est: V::zero(),
        err: 0.0,
        ln_peak,
        touches_lo: false,
        touches_hi: false,
        streak: 0,
    };
    if reference == f64::NEG_INFINITY {
        return Ok(panel);
    }
    let scaled = |s: &Scaled<V>| -> V {
        if s.is_zero() {
            V::zero()
        } else {
            s.val * (s.ln - reference).exp()
        }
    };
    let mut kronrod = scaled(&samples[14]) * WGK[7];
    let mut gauss = scaled(&samples[14]) * WG[3];
    let mut abs_sum = scaled(&samples[14]).norm() * WGK[7];
    for j in 0..7 {
        let a = scaled(&samples[2 * j]);
        let b = scaled(&samples[2 * j + 1]);
        kronrod = kronrod + (a + b) * WGK[j];
        abs_sum += (a.norm() + b.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (a + b) * WG[j / 2];
        }
    }
    let diff = (kronrod - gauss).norm();
    panel.ln = reference + half.ln();
    panel.est = kronrod;
    panel.err = diff.max(50.0 * f64::EPSILON * abs_sum);
    Ok(panel)
}

/// Global adaptive bisection over `segments`, worst panel first.
pub(crate) fn adaptive<V, F>(
    integrand: &F,
    segments: &[Segment],
    opts: &EngineOpts,
    ws: &mut Workspace<V>,
) -> Result<Estimate<V>, QuadError>
where
    V: Linear,
    F: Fn(Abscissa) -> Result<Scaled<V>, QuadError> + Sync,
{
    ws.panels.clear();
    ws.heap.clear();
    let mut evaluations = 0u64;
    for (si, seg) in segments.iter().enumerate() {
        if !(seg.u_hi > seg.u_lo) {
            continue;
        }
        let n = seg.initial_panels();
        let width = (seg.u_hi - seg.u_lo) / n as f64;
        for i in 0..n {
            let lo = seg.u_lo + width * i as f64;
            let hi = if i + 1 == n { seg.u_hi } else { lo + width };
            let mut p = eval_panel(integrand, si, seg, lo, hi, opts.parallel)?;
            evaluations += 15;
            p.touches_lo = i == 0;
            p.touches_hi = i + 1 == n;
            ws.panels.push(p);
        }
    }
    for (idx, p) in ws.panels.iter().enumerate() {
        ws.heap.push(HeapKey {
            ln_err: p.ln_err(),
            idx,
        });
    }

    let (mut g_ln, mut total, mut err_sum) = exact_totals(&ws.panels);
    let mut converged = false;
    let mut since_exact = 0usize;
    loop {
        let target = |total: &V, g_ln: f64| -> f64 {
            let rel = opts.rel_tol * total.norm();
            let abs = if g_ln == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                opts.abs_tol * (-g_ln).exp()
            };
            rel.max(abs)
        };
        if err_sum <= target(&total, g_ln) || since_exact >= 256 {
            (g_ln, total, err_sum) = exact_totals(&ws.panels);
            since_exact = 0;
            if err_sum <= target(&total, g_ln) {
                converged = true;
                break;
            }
        }
        if ws.panels.len() >= opts.max_panels {
            break;
        }
        let Some(HeapKey { idx, .. }) = ws.heap.pop() else {
            break;
        };
        let parent = ws.panels[idx];
        let mid = 0.5 * (parent.lo + parent.hi);
        if !(mid > parent.lo && mid < parent.hi)
            || parent.hi - parent.lo <= 8.0 * f64::EPSILON * mid.abs()
        {
            // unsplittable; leave it out of the queue
            continue;
        }
        let seg = &segments[parent.seg];
        let mut left = eval_panel(integrand, parent.seg, seg, parent.lo, mid, opts.parallel)?;
        let mut right = eval_panel(integrand, parent.seg, seg, mid, parent.hi, opts.parallel)?;
        evaluations += 30;
        left.touches_lo = parent.touches_lo;
        right.touches_hi = parent.touches_hi;
        for child in [&mut left, &mut right] {
            let at_end = (child.touches_lo && parent.touches_lo) || (child.touches_hi && parent.touches_hi);
            let keeps_mass = child.ln_mass() > f64::NEG_INFINITY
                && child.ln_mass() >= parent.ln_mass() + DIVERGENCE_MASS_RATIO.ln();
            let peak_grows = child.ln_peak >= parent.ln_peak + DIVERGENCE_PEAK_GROWTH.ln();
            child.streak = if at_end && keeps_mass && peak_grows {
                parent.streak + 1
            } else {
                0
            };
        }
        if left.streak >= DIVERGENCE_STREAK || right.streak >= DIVERGENCE_STREAK {
            let (g, t, _) = exact_totals(&ws.panels);
            let partial = if g == f64::NEG_INFINITY { 0.0 } else { t.norm() * g.exp() };
            return Err(QuadError::Diverged {
                lower_bound: partial,
                evaluations,
            });
        }

        // running totals in the scale g_ln
        let new_ln = left.ln.max(right.ln);
        if new_ln > g_ln {
            let f = if g_ln == f64::NEG_INFINITY { 0.0 } else { (g_ln - new_ln).exp() };
            total = total * f;
            err_sum *= f;
            g_ln = new_ln;
        }
        let in_scale = |p: &Panel<V>| -> (V, f64) {
            if p.ln == f64::NEG_INFINITY {
                (V::zero(), 0.0)
            } else {
                let f = (p.ln - g_ln).exp();
                (p.est * f, p.err * f)
            }
        };
        let (pv, pe) = in_scale(&parent);
        let (lv, le) = in_scale(&left);
        let (rv, re) = in_scale(&right);
        total = total - pv + lv + rv;
        err_sum = (err_sum - pe + le + re).max(0.0);
        since_exact += 1;

        ws.panels[idx] = left;
        ws.panels.push(right);
        let ridx = ws.panels.len() - 1;
        ws.heap.push(HeapKey {
            ln_err: left.ln_err(),
            idx,
        });
        ws.heap.push(HeapKey {
            ln_err: right.ln_err(),
            idx: ridx,
        });
    }
    let (g_ln, total, err_sum) = exact_totals(&ws.panels);
    Ok(Estimate {
        ln: g_ln,
        val: total,
        err: err_sum,
        evaluations,
        converged,
    })
}

/// Compensated totals in the scale of the largest panel.
fn exact_totals<V: Linear>(panels: &[Panel<V>]) -> (f64, V, f64) {
    let g = panels.iter().map(|p| p.ln).fold(f64::NEG_INFINITY, f64::max);
    if g == f64::NEG_INFINITY {
        return (g, V::zero(), 0.0);
    }
    let mut acc = [Neumaier::new(), Neumaier::new()];
    let mut err = Neumaier::new();
    for p in panels.iter().filter(|p| p.ln > f64::NEG_INFINITY) {
        let f = (p.ln - g).exp();
        let parts = (p.est * f).parts();
        acc[0].add(parts[0]);
        acc[1].add(parts[1]);
        err.add(p.err * f);
    }
    (g, V::from_parts([acc[0].total(), acc[1].total()]), err.total())
}

/// Non-adaptive composite rule: `n_panels` panels spread over the segments in
/// proportion to their `u`-length.
pub(crate) fn fixed_composite<V, F>(
    integrand: &F,
    segments: &[Segment],
    n_panels: usize,
    parallel: bool,
) -> Result<Estimate<V>, QuadError>
where
    V: Linear,
    F: Fn(Abscissa) -> Result<Scaled<V>, QuadError> + Sync,
{
    let total_len: f64 = segments.iter().map(|s| (s.u_hi - s.u_lo).max(0.0)).sum();
    let mut panels = Vec::new();
    let mut evaluations = 0;
    for (si, seg) in segments.iter().enumerate() {
        if !(seg.u_hi > seg.u_lo) {
            continue;
        }
        let share = ((seg.u_hi - seg.u_lo) / total_len * n_panels as f64).ceil() as usize;
        let n = share.max(1);
        let width = (seg.u_hi - seg.u_lo) / n as f64;
        for i in 0..n {
            let lo = seg.u_lo + width * i as f64;
            let hi = if i + 1 == n { seg.u_hi } else { lo + width };
            panels.push(eval_panel(integrand, si, seg, lo, hi, parallel)?);
            evaluations += 15;
        }
    }
    let (ln, val, err) = exact_totals(&panels);
    Ok(Estimate {
        ln,
        val,
        err,
        evaluations,
        converged: false,
    })
}

/// Splits `[a, b]` at breakpoints and interior hints; segments with a hint
/// at (or just beyond) one end are log-stretched toward it.
pub(crate) fn plan_interval(a: f64, b: f64, hints: &[(f64, f64)], breakpoints: &[f64]) -> Vec<Segment> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .chain(hints.iter().map(|h| h.0))
        .filter(|&t| t > a && t < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (l, r) = (w[0], w[1]);
        let len = r - l;
        let left: Vec<&(f64, f64)> = hints.iter().filter(|h| h.0 <= l && l - h.0 <= len).collect();
        let right: Vec<&(f64, f64)> = hints.iter().filter(|h| h.0 >= r && h.0 - r <= len).collect();
        let pick = |cands: &[&(f64, f64)], nearest: fn(f64, f64) -> f64| -> Option<(f64, f64)> {
            if cands.is_empty() {
                return None;
            }
            let anchor = cands.iter().map(|h| h.0).reduce(nearest).unwrap();
            let scale = cands.iter().map(|h| h.1).fold(f64::INFINITY, f64::min);
            Some((anchor, scale))
        };
        let lh = pick(&left, f64::max);
        let rh = pick(&right, f64::min);
        let stretch_left = |lo: f64, hi: f64, (c, s): (f64, f64)| Segment::stretch(c, 1.0, s, lo - c, hi - c);
        let stretch_right = |lo: f64, hi: f64, (c, s): (f64, f64)| Segment::stretch(c, -1.0, s, c - hi, c - lo);
        match (lh, rh) {
            (Some(lh), Some(rh)) => {
                let m = 0.5 * (l + r);
                out.push(stretch_left(l, m, lh));
                out.push(stretch_right(m, r, rh));
            }
            (Some(lh), None) => out.push(stretch_left(l, r, lh)),
            (None, Some(rh)) => out.push(stretch_right(l, r, rh)),
            (None, None) => out.push(Segment::linear(0.0, l, r)),
        }
    }
    out
}

/// Radial plan over `x in (0, 1]`. On a ray at angular distance `phi` from a
/// pole the peak widens to `gap + |phi|`.
pub(crate) fn plan_radial(sing: &Singularities, ray: Option<&DiscPoint>, breakpoints: &[f64]) -> Vec<Segment> {
    let hints: Vec<(f64, f64)> = sing
        .poles
        .iter()
        .map(|p| {
            let spread = ray.map_or(0.0, |z| z.angle_from(p.angle).abs());
            (-p.gap, p.gap + spread)
        })
        .collect();
    plan_interval(0.0, 1.0, &hints, breakpoints)
}

#[derive(Debug, Clone)]
struct AngularAnchor {
    angle: f64,
    key: f64,
    scale: Option<f64>,
    offsets: Vec<f64>,
}

/// Plan over the full circle. `peaks` are `(angle, width)` pairs; `edges`
/// are `(center, offset)` breakpoints.
pub(crate) fn plan_angular(peaks: &[(f64, f64)], edges: &[(f64, f64)]) -> Vec<Segment> {
    let mut anchors: Vec<AngularAnchor> = Vec::new();
    let mut add = |angle: f64, scale: Option<f64>| {
        let key = angle.rem_euclid(TAU);
        if let Some(a) = anchors.iter_mut().find(|a| a.key == key) {
            a.scale = match (a.scale, scale) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            };
        } else {
            anchors.push(AngularAnchor {
                angle,
                key,
                scale,
                offsets: Vec::new(),
            });
        }
    };
    for &(angle, width) in peaks {
        add(angle, Some(width));
    }
    for &(center, _) in edges {
        add(center, None);
    }
    if anchors.is_empty() {
        return vec![Segment::linear(0.0, 0.0, TAU)];
    }
    anchors.sort_by(|a, b| a.key.total_cmp(&b.key));
    let n = anchors.len();
    let extents: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            if n == 1 {
                return (PI, PI);
            }
            let prev = if k == 0 { anchors[n - 1].key - TAU } else { anchors[k - 1].key };
            let next = if k + 1 == n { anchors[0].key + TAU } else { anchors[k + 1].key };
            (0.5 * (anchors[k].key - prev), 0.5 * (next - anchors[k].key))
        })
        .collect();

    for &(center, off) in edges {
        let own = anchors.iter().position(|a| a.angle == center);
        let placed = own.and_then(|k| {
            let (l, r) = extents[k];
            (off > -l && off < r).then_some(k)
        });
        match placed {
            Some(k) => anchors[k].offsets.push(off),
            None => {
                let abs = center + off;
                for (k, a) in anchors.iter_mut().enumerate() {
                    let o = wrap_angle(abs - a.angle);
                    let (l, r) = extents[k];
                    if o > -l && o < r {
                        a.offsets.push(o);
                        break;
                    }
                }
            }
        }
    }

    let mut out = Vec::new();
    for (k, a) in anchors.iter().enumerate() {
        let (l_ext, r_ext) = extents[k];
        let mut right: Vec<f64> = a.offsets.iter().copied().filter(|&o| o > 0.0).collect();
        right.push(0.0);
        right.push(r_ext);
        right.sort_by(f64::total_cmp);
        right.dedup();
        let mut left: Vec<f64> = a.offsets.iter().map(|&o| -o).filter(|&d| d > 0.0).collect();
        left.push(0.0);
        left.push(l_ext);
        left.sort_by(f64::total_cmp);
        left.dedup();
        for w in right.windows(2) {
            out.push(match a.scale {
                Some(s) => Segment::stretch(a.angle, 1.0, s, w[0], w[1]),
                None => Segment::linear(a.angle, w[0], w[1]),
            });
        }
        for w in left.windows(2) {
            out.push(match a.scale {
                Some(s) => Segment::stretch(a.angle, -1.0, s, w[0], w[1]),
                None => Segment::linear(a.angle, -w[1], -w[0]),
            });
        }
    }
    out
}

/// Angular peaks and mask edges seen on the circle `1 - r = x`; `None`
/// collects every mask edge regardless of radius.
pub(crate) fn angular_features(sing: &Singularities, x: Option<f64>) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let at = x.unwrap_or(0.0);
    let peaks = sing.poles.iter().map(|p| (p.angle, p.gap + at)).collect();
    let edges = sing
        .regions
        .iter()
        .filter(|a| x.map_or(true, |x| a.contains_radius(x)))
        .flat_map(|a| [(a.center(), -a.half_width()), (a.center(), a.half_width())])
        .collect();
    (peaks, edges)
}

fn radial_edges(regions: &[AnnulusArc], theta: Option<&DiscPoint>) -> Vec<f64> {
    regions
        .iter()
        .filter(|a| theta.map_or(true, |z| a.contains_angle(z)))
        .flat_map(|a| {
            let (lo, hi) = a.x_bounds();
            [lo, hi]
        })
        .collect()
}

/// Integrates `g` over `[a, b]`. Pole hints come from `config.pole_hints`;
/// without a hint, a near-singular peak close to an endpoint can be mistaken
/// for a divergence.
pub fn integrate_1d<F>(g: F, a: f64, b: f64, config: &QuadratureConfig) -> Result<NormResult, QuadError>
where
    F: Fn(f64) -> f64 + Sync,
{
    Workspace::new().integrate_1d(g, a, b, config)
}

/// `|1 + delta - r e^{i theta}|^2` with `r = 1 - x`, free of cancellation.
pub fn stable_pole_modulus_sq(delta: f64, x: f64, theta: f64) -> f64 {
    let m = ln_pole_modulus(delta, x, (0.5 * theta).sin()).exp();
    m * m
}

/// Shared bookkeeping for nested integrals.
#[derive(Default)]
struct NestStats {
    evaluations: AtomicU64,
    max_inner_rel: AtomicU64,
    max_inner_abs: AtomicU64,
    unconverged: AtomicBool,
}

impl NestStats {
    fn record<V: Linear>(&self, est: &Estimate<V>) {
        self.evaluations.fetch_add(est.evaluations, AtomicOrdering::Relaxed);
        if !est.converged {
            self.unconverged.store(true, AtomicOrdering::Relaxed);
        }
        let rel = est.rel_error();
        if rel.is_finite() {
            self.max_inner_rel.fetch_max(rel.to_bits(), AtomicOrdering::Relaxed);
        }
        let abs = est.abs_error();
        if abs.is_finite() {
            self.max_inner_abs.fetch_max(abs.to_bits(), AtomicOrdering::Relaxed);
        }
    }

    fn max_rel(&self) -> f64 {
        f64::from_bits(self.max_inner_rel.load(AtomicOrdering::Relaxed))
    }

    fn max_abs(&self) -> f64 {
        f64::from_bits(self.max_inner_abs.load(AtomicOrdering::Relaxed))
    }
}

/// Runs the outer integral adaptively, falling back to the fixed composite
/// rule when the panel budget runs out.
fn outer_integral<V, F>(integrand: &F, segments: &[Segment], config: &QuadratureConfig) -> Result<Estimate<V>, QuadError>
where
    V: Linear,
    F: Fn(Abscissa) -> Result<Scaled<V>, QuadError> + Sync,
{
    let opts = EngineOpts {
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
        max_panels: config.max_panels,
        parallel: true,
    };
    let est = adaptive(integrand, segments, &opts, &mut Workspace::default())?;
    if est.converged {
        return Ok(est);
    }
    let fixed = fixed_composite(integrand, segments, config.outer_samples, true)?;
    let evaluations = est.evaluations + fixed.evaluations;
    let best = if fixed.abs_error() < est.abs_error() { fixed } else { est };
    Ok(Estimate {
        evaluations,
        converged: false,
        ..best
    })
}

fn inner_opts(config: &QuadratureConfig, abs_tol: f64) -> EngineOpts {
    EngineOpts {
        rel_tol: config.rel_tol * INNER_TOL_FACTOR,
        abs_tol,
        max_panels: config.max_panels,
        parallel: false,
    }
}

/// Turns `ln` of an outer integral into the norm `(I * density)^(1/s)`.
fn finish_norm(outer: &Estimate<f64>, propagated_rel: f64, s: f64, stats: &NestStats) -> NormResult {
    let ln_outer = outer.ln_value();
    let evaluations = stats.evaluations.load(AtomicOrdering::Relaxed);
    let converged = outer.converged && !stats.unconverged.load(AtomicOrdering::Relaxed);
    if ln_outer == f64::NEG_INFINITY {
        return NormResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations,
            converged,
        };
    }
    let value = ((ln_outer - TAU.ln()) / s).exp();
    let rel = (outer.rel_error() + propagated_rel) / s + 4.0 * f64::EPSILON;
    NormResult {
        value,
        error_estimate: value * rel,
        evaluations,
        converged,
    }
}

/// `rho_{p,q}(f) = ( (1/2pi) int_0^{2pi} ( int_0^1 |f(r e^{it})|^p dr )^{q/p} dt )^{1/q}`.
pub fn rm_norm(f: &DiscFunction, e: ExponentPair, config: &QuadratureConfig) -> Result<NormResult, QuadError> {
    config.validate()?;
    let (p, q) = (e.p(), e.q());
    let sing = f.singularities();
    let stats = NestStats::default();
    let opts = inner_opts(config, 0.0);
    let (peaks, edges) = angular_features(&sing, None);
    let outer_plan = plan_angular(&peaks, &edges);
    let integrand = |theta: Abscissa| -> Result<Scaled<f64>, QuadError> {
        let ray = DiscPoint::node(1.0, theta.anchor, theta.offset);
        let plan = plan_radial(&sing, Some(&ray), &radial_edges(&sing.regions, Some(&ray)));
        let inner = adaptive(
            &|x: Abscissa| {
                let z = DiscPoint::node(x.value(), theta.anchor, theta.offset);
                Ok(Scaled::<f64>::from_ln(p * f.ln_abs(&z)))
            },
            &plan,
            &opts,
            &mut Workspace::default(),
        )?;
        stats.record(&inner);
        Ok(Scaled::<f64>::from_ln(q / p * inner.ln_value()))
    };
    let outer = outer_integral(&integrand, &outer_plan, config)?;
    Ok(finish_norm(&outer, q / p * stats.max_rel(), q, &stats))
}

/// `||f||_{H^{q,p}} = ( int_0^1 ( (1/2pi) int_0^{2pi} |f(r e^{it})|^q dt )^{p/q} dr )^{1/p}`.
pub fn mixed_norm(f: &DiscFunction, e: ExponentPair, config: &QuadratureConfig) -> Result<NormResult, QuadError> {
    config.validate()?;
    let (p, q) = (e.p(), e.q());
    let sing = f.singularities();
    let stats = NestStats::default();
    let opts = inner_opts(config, 0.0);
    let outer_plan = plan_radial(&sing, None, &radial_edges(&sing.regions, None));
    let ln_density = -TAU.ln();
    let integrand = |x: Abscissa| -> Result<Scaled<f64>, QuadError> {
        let x = x.value().clamp(f64::MIN_POSITIVE, 1.0);
        let (peaks, edges) = angular_features(&sing, Some(x));
        let plan = plan_angular(&peaks, &edges);
        let inner = adaptive(
            &|t: Abscissa| {
                let z = DiscPoint::node(x, t.anchor, t.offset);
                Ok(Scaled::<f64>::from_ln(q * f.ln_abs(&z)))
            },
            &plan,
            &opts,
            &mut Workspace::default(),
        )?;
        stats.record(&inner);
        Ok(Scaled::<f64>::from_ln(p / q * (inner.ln_value() + ln_density)))
    };
    let outer = outer_integral(&integrand, &outer_plan, config)?;
    // finish_norm divides by 2pi; the density already sits inside.
    let mut res = finish_norm(&outer, p / q * stats.max_rel(), p, &stats);
    res.value *= (TAU.ln() / p).exp();
    res.error_estimate *= (TAU.ln() / p).exp();
    Ok(res)
}

/// Complex area integral `int_D F dA` with `dA = dx dy / pi`.
pub(crate) fn disc_integral<F>(
    integrand: F,
    sing: &Singularities,
    config: &QuadratureConfig,
) -> Result<(Complex64, f64, u64, bool), QuadError>
where
    F: Fn(&DiscPoint) -> Complex64 + Sync,
{
    config.validate()?;
    let stats = NestStats::default();
    let opts = inner_opts(config, config.abs_tol * INNER_TOL_FACTOR);
    let outer_plan = plan_radial(sing, None, &radial_edges(&sing.regions, None));
    let outer_fn = |x: Abscissa| -> Result<Scaled<Complex64>, QuadError> {
        let x = x.value().clamp(f64::MIN_POSITIVE, 1.0);
        let r = 1.0 - x;
        let (peaks, edges) = angular_features(sing, Some(x));
        let plan = plan_angular(&peaks, &edges);
        let inner = adaptive(
            &|t: Abscissa| {
                let z = DiscPoint::node(x, t.anchor, t.offset);
                Ok(Scaled {
                    ln: 0.0,
                    val: integrand(&z),
                })
            },
            &plan,
            &opts,
            &mut Workspace::default(),
        )?;
        stats.record(&inner);
        let s = inner.scaled();
        Ok(Scaled {
            ln: s.ln,
            val: s.val * (r / PI),
        })
    };
    let outer = outer_integral(&outer_fn, &outer_plan, config)?;
    let err = outer.abs_error() + stats.max_abs() / PI;
    let evaluations = stats.evaluations.load(AtomicOrdering::Relaxed);
    let converged = outer.converged && !stats.unconverged.load(AtomicOrdering::Relaxed);
    Ok((outer.value(), err, evaluations, converged))
}
