//! Test kernels, the normalized pole functions `u_delta`, and the
//! counterexample schedule built from them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disc::{AnnulusArc, DiscFunction, ExponentPair, PoleShift};
use crate::error::{Error, Result};

/// Default cap on the number of schedule pieces.
pub const DEFAULT_MAX_PIECES: usize = 5;

/// Parameters of `(1 - conj(alpha) z)^(-beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    alpha: Complex64,
    beta: f64,
}

impl KernelParams {
    pub fn new(alpha: impl Into<Complex64>, beta: f64) -> Result<Self> {
        let alpha = alpha.into();
        if !(alpha.norm() < 1.0) {
            return Err(Error::Range(format!("|alpha| = {} must be < 1", alpha.norm())));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Range(format!("beta = {beta} must be positive")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

pub fn test_kernel(params: &KernelParams) -> DiscFunction {
    DiscFunction::pole_kernel(params.alpha, params.beta).expect("validated by KernelParams")
}

/// `u_delta(z e^{-i rotation}) = delta / (1 + delta - z e^{-i rotation})^{1 + 1/p + 1/q}`.
pub fn u_delta(delta: f64, e: ExponentPair, rotation: f64) -> Result<DiscFunction> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Range(format!("delta = {delta} not in (0, 1/2)")));
    }
    u_delta_ln(delta.ln(), e, rotation)
}

fn u_delta_ln(ln_delta: f64, e: ExponentPair, rotation: f64) -> Result<DiscFunction> {
    let exponent = 1.0 + e.critical_beta();
    Ok(DiscFunction::PoleShift(PoleShift::from_ln_delta(
        ln_delta, exponent, rotation,
    )?))
}

/// The sequences `delta_n`, `theta_n` and regions `A_n` for `n = 1..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleSchedule {
    e: ExponentPair,
    ln_deltas: Vec<f64>,
    thetas: Vec<f64>,
    regions: Vec<AnnulusArc>,
}

/// `delta_1 = 1/8`, `delta_{n+1} = delta_n^2 / (2 n^{4p} (n+1)^2)`.
pub fn build_schedule(e: ExponentPair, m: usize) -> Result<CounterexampleSchedule> {
    let (p, q) = (e.p(), e.q());
    if !(p > q) {
        return Err(Error::InvalidExponents(format!("schedule needs p > q, got p = {p}, q = {q}")));
    }
    if m == 0 {
        return Err(Error::Range("schedule needs at least one piece".into()));
    }
    let floor = f64::MIN_POSITIVE.ln() / 2.0;
    let mut ln_deltas = vec![(0.125f64).ln()];
    for n in 1..m {
        let nf = n as f64;
        let prev = ln_deltas[n - 1];
        let next = 2.0 * prev - 2f64.ln() - 4.0 * p * nf.ln() - 2.0 * (nf + 1.0).ln();
        if next < floor {
            return Err(Error::Overflow(format!(
                "delta_{} = 10^{:.1} is below the squarable double range",
                n + 1,
                next / std::f64::consts::LN_10
            )));
        }
        ln_deltas.push(next);
    }

    let mut thetas: Vec<f64> = Vec::with_capacity(m);
    for (i, &ld) in ln_deltas.iter().enumerate() {
        let n = (i + 1) as f64;
        let delta = ld.exp();
        thetas.push(if i == 0 {
            delta
        } else {
            let prev_delta = ln_deltas[i - 1].exp();
            thetas[i - 1] + 1.0 / (n * n) + (n - 1.0).powi(2) * prev_delta + n * n * delta
        });
    }

    let regions = ln_deltas
        .iter()
        .zip(&thetas)
        .enumerate()
        .map(|(i, (&ld, &theta))| {
            let n = (i + 1) as f64;
            let x_lo = (ld - 2.0 * p * n.ln()).exp();
            let x_hi = (n.ln() + 0.5 * ld).exp();
            let half = (2.0 * n.ln() + ld).exp();
            AnnulusArc::centered(x_lo, x_hi, theta, half)
        })
        .collect::<Result<Vec<_>>>()?;

    let s = CounterexampleSchedule {
        e,
        ln_deltas,
        thetas,
        regions,
    };
    if let Err(msg) = s.check_constraints() {
        return Err(Error::Range(format!("schedule violates its constraints: {msg}")));
    }
    Ok(s)
}

impl CounterexampleSchedule {
    pub fn exponents(&self) -> ExponentPair {
        self.e
    }

    pub fn len(&self) -> usize {
        self.ln_deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_deltas.is_empty()
    }

    fn index(&self, n: usize) -> Result<usize> {
        if n == 0 || n > self.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.len(),
            });
        }
        Ok(n - 1)
    }

    /// `ln delta_n`, 1-based.
    pub fn ln_delta(&self, n: usize) -> Result<f64> {
        Ok(self.ln_deltas[self.index(n)?])
    }

    pub fn delta(&self, n: usize) -> Result<f64> {
        Ok(self.ln_delta(n)?.exp())
    }

    pub fn theta(&self, n: usize) -> Result<f64> {
        Ok(self.thetas[self.index(n)?])
    }

    pub fn region(&self, n: usize) -> Result<AnnulusArc> {
        Ok(self.regions[self.index(n)?])
    }

    pub fn ln_deltas(&self) -> &[f64] {
        &self.ln_deltas
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn regions(&self) -> &[AnnulusArc] {
        &self.regions
    }

    /// `u_{delta_n}(z e^{-i theta_n})`.
    pub fn rotated_piece(&self, n: usize) -> Result<DiscFunction> {
        let i = self.index(n)?;
        u_delta_ln(self.ln_deltas[i], self.e, self.thetas[i])
    }

    /// `(f_n, g_n)`: the rotated piece kept inside, resp. outside, `A_n`.
    pub fn pieces(&self, n: usize) -> Result<(DiscFunction, DiscFunction)> {
        let u = self.rotated_piece(n)?;
        let a = self.region(n)?;
        Ok((DiscFunction::masked(u.clone(), a, true), DiscFunction::masked(u, a, false)))
    }

    /// `F_m`, the unmasked sum of all rotated pieces.
    pub fn f_sum(&self) -> DiscFunction {
        self.f_sum_upto(self.len()).expect("full length is in range")
    }

    /// `F_k` for `k <= m`.
    pub fn f_sum_upto(&self, k: usize) -> Result<DiscFunction> {
        if k > self.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.len(),
            });
        }
        let terms = (1..=k).map(|n| self.rotated_piece(n)).collect::<Result<Vec<_>>>()?;
        Ok(if terms.len() == 1 {
            terms.into_iter().next().unwrap()
        } else {
            DiscFunction::sum(terms)
        })
    }

    /// `sum_n f_n`, the masked pieces with disjoint supports.
    pub fn masked_sum(&self, k: usize) -> Result<DiscFunction> {
        let terms = (1..=k).map(|n| self.pieces(n).map(|p| p.0)).collect::<Result<Vec<_>>>()?;
        Ok(DiscFunction::sum(terms))
    }

    /// Checks the three growth constraints and region disjointness on the
    /// stored endpoints.
    pub fn check_constraints(&self) -> std::result::Result<(), String> {
        let p = self.e.p();
        let mut weighted = 0.0;
        for i in 0..self.len() {
            let n = (i + 1) as f64;
            let ld = self.ln_deltas[i];
            if !(2.0 * n.ln() + ld < 0.25f64.ln()) {
                return Err(format!("n^2 delta_n >= 1/4 at n = {}", i + 1));
            }
            weighted += (2.0 * n.ln() + ld).exp();
            if i + 1 < self.len() {
                let lhs = ld - 2.0 * p * n.ln();
                let rhs = (n + 1.0).ln() + 0.5 * self.ln_deltas[i + 1];
                if !(lhs > rhs) {
                    return Err(format!("delta_n / n^(2p) <= (n+1) delta_(n+1)^(1/2) at n = {}", i + 1));
                }
            }
        }
        if !(weighted < 2.0) {
            return Err("sum of j^2 delta_j >= 2".into());
        }
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let (a, b) = (&self.regions[i], &self.regions[j]);
                let (a_lo, a_hi) = a.x_bounds();
                let (b_lo, b_hi) = b.x_bounds();
                if !(a_hi < b_lo || b_hi < a_lo) {
                    return Err(format!("radial intervals {} and {} overlap", i + 1, j + 1));
                }
                let gap = (a.center() - b.center()).abs();
                let gap = gap.min(std::f64::consts::TAU - gap);
                if !(gap > a.half_width() + b.half_width()) {
                    return Err(format!("angular intervals {} and {} overlap", i + 1, j + 1));
                }
            }
        }
        Ok(())
    }

    pub fn to_document(&self) -> ScheduleDocument {
        ScheduleDocument {
            p: self.e.p(),
            q: self.e.q(),
            m: self.len(),
            pieces: (0..self.len())
                .map(|i| {
                    let a = &self.regions[i];
                    let (x_lo, x_hi) = a.x_bounds();
                    PieceDocument {
                        n: i + 1,
                        log10_delta: format!("{:.17e}", self.ln_deltas[i] / std::f64::consts::LN_10),
                        theta: self.thetas[i],
                        one_minus_r: [x_lo, x_hi],
                        angle: [a.center() - a.half_width(), a.center() + a.half_width()],
                        angle_half_width: a.half_width(),
                    }
                })
                .collect(),
        }
    }
}

/// Serialized form of a schedule; `log10_delta` is a decimal string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub p: f64,
    pub q: f64,
    pub m: usize,
    pub pieces: Vec<PieceDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceDocument {
    pub n: usize,
    pub log10_delta: String,
    pub theta: f64,
    pub one_minus_r: [f64; 2],
    pub angle: [f64; 2],
    pub angle_half_width: f64,
}

/// Piecewise comparison bounds `(lower, upper)` for `|1 - alpha r e^{i theta}|^2`
/// with `r = 1 - x`, valid for `alpha in [1/2, 1)`, `r in (1/2, 1)`,
/// `theta in (0, 1/2)`.
pub fn kernel_envelope(alpha: f64, x: f64, theta: f64) -> Result<(f64, f64)> {
    if !(0.5..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} not in [1/2, 1)")));
    }
    if !(x > 0.0 && x < 0.5) {
        return Err(Error::Domain(format!("1 - r = {x} not in (0, 1/2)")));
    }
    if !(theta > 0.0 && theta < 0.5) {
        return Err(Error::Domain(format!("theta = {theta} not in (0, 1/2)")));
    }
    let r = 1.0 - x;
    let radial = (1.0 - alpha) + alpha * x;
    let q = if theta < 1.0 - alpha || r <= (1.0 - theta) / alpha {
        radial * radial
    } else {
        theta * theta
    };
    Ok((q / 4.0, 4.0 * q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::DiscPoint;

    fn pair(p: f64, q: f64) -> ExponentPair {
        ExponentPair::new(p, q).unwrap()
    }

    #[test]
    fn schedule_first_terms() {
        let s = build_schedule(pair(2.0, 1.25), 2).unwrap();
        assert!((s.delta(1).unwrap() - 0.125).abs() < 1e-16);
        assert!((s.delta(2).unwrap() - 1.0 / 512.0).abs() < 1e-17);
        assert!((s.theta(1).unwrap() - 0.125).abs() < 1e-16);
        assert!((s.theta(2).unwrap() - 0.5078125).abs() < 1e-15);
        // delta_1 > 2 delta_2^(1/2) ~ 0.08839
        assert!(0.125 > 2.0 * s.delta(2).unwrap().sqrt());
        assert!((2.0 * s.delta(2).unwrap().sqrt() - 0.08839).abs() < 1e-5);
    }

    #[test]
    fn schedule_overflow_and_exponent_order() {
        let e = pair(2.0, 1.25);
        assert!(build_schedule(e, 6).is_ok());
        assert!(matches!(build_schedule(e, 7), Err(Error::Overflow(_))));
        assert!(matches!(build_schedule(pair(2.0, 2.0), 2), Err(Error::InvalidExponents(_))));
        assert!(matches!(build_schedule(pair(1.5, 2.0), 2), Err(Error::InvalidExponents(_))));
    }

    #[test]
    fn pieces_index_range() {
        let s = build_schedule(pair(2.0, 1.25), 3).unwrap();
        assert!(s.pieces(0).is_err());
        assert!(s.pieces(4).is_err());
        assert!(s.pieces(3).is_ok());
    }

    #[test]
    fn f_sum_of_one_is_the_piece() {
        let s = build_schedule(pair(2.0, 1.25), 1).unwrap();
        assert_eq!(s.f_sum(), s.rotated_piece(1).unwrap());
    }

    #[test]
    fn u_delta_at_origin() {
        let u = u_delta(0.25, pair(2.0, 2.0), 0.0).unwrap();
        let z = DiscPoint::new(1.0, 0.0).unwrap();
        assert!((u.evaluate_abs(&z) - 0.16).abs() < 1e-15);
        assert!(u_delta(0.5, pair(2.0, 2.0), 0.0).is_err());
    }

    #[test]
    fn test_kernel_values() {
        let one = test_kernel(&KernelParams::new(0.0, 5.0).unwrap());
        assert_eq!(one.evaluate_abs(&DiscPoint::new(0.3, 2.0).unwrap()), 1.0);
        let k = test_kernel(&KernelParams::new(0.5, 2.0).unwrap());
        let v = k.evaluate_abs(&DiscPoint::new(0.5, 0.0).unwrap());
        assert!((v - 16.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn envelope_branches() {
        let (lo, hi) = kernel_envelope(0.9, 0.1, 0.05).unwrap();
        assert!((lo * 4.0 - 0.0361).abs() < 1e-12 && (hi / 4.0 - 0.0361).abs() < 1e-12);
        let (lo, _) = kernel_envelope(0.9, 0.01, 0.3).unwrap();
        assert!((lo * 4.0 - 0.09).abs() < 1e-12);
        assert!(kernel_envelope(0.4, 0.1, 0.1).is_err());
        assert!(kernel_envelope(0.9, 0.6, 0.1).is_err());
        assert!(kernel_envelope(0.9, 0.1, 0.6).is_err());
    }
}
