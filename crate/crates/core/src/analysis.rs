//! Experiment drivers: exponent fits for the test kernels, containment
//! sweeps, and the norm separation of the counterexample sums.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disc::{DiscFunction, ExponentPair, NormResult};
use crate::error::{Error, Result};
use crate::kernels::{build_schedule, test_kernel, KernelParams};
use crate::quad::{mixed_norm, rm_norm, QuadratureConfig};

/// Residual above which an exponent fit is rejected.
pub const FIT_RESIDUAL_LIMIT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    /// `rho_{p,q}`: radial integral inside, angular outside.
    Rm,
    /// `||.||_{H^{q,p}}`: angular integral inside, radial outside.
    Mixed,
}

impl FromStr for Space {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rm" => Ok(Space::Rm),
            "mixed" => Ok(Space::Mixed),
            other => Err(Error::Range(format!("unknown space '{other}', expected rm or mixed"))),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Rm => "rm",
            Space::Mixed => "mixed",
        })
    }
}

pub fn norm(f: &DiscFunction, e: ExponentPair, space: Space, config: &QuadratureConfig) -> Result<NormResult> {
    Ok(match space {
        Space::Rm => rm_norm(f, e, config)?,
        Space::Mixed => mixed_norm(f, e, config)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_max: f64,
    /// `(ln x, ln y)` pairs.
    pub samples: Vec<(f64, f64)>,
}

impl ExponentFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_loglog(samples: &[(f64, f64)]) -> Result<ExponentFit> {
    if samples.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 samples, got {}", samples.len())));
    }
    if samples.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::DegenerateFit("samples must be positive and finite".into()));
    }
    let logs: Vec<(f64, f64)> = samples.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|s| s.0).sum::<f64>() / n;
    let my = logs.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|s| (s.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let sxy: f64 = logs.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_max = logs
        .iter()
        .map(|s| (s.1 - intercept - slope * s.0).abs())
        .fold(0.0, f64::max);
    Ok(ExponentFit {
        slope,
        intercept,
        residual_max,
        samples: logs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub alpha: f64,
    pub one_minus_alpha: f64,
    pub norm: NormResult,
}

/// Norms of `(1 - alpha z)^(-beta)` for each `alpha`.
pub fn kernel_norms(
    e: ExponentPair,
    beta: f64,
    alphas: &[f64],
    which: Space,
    config: &QuadratureConfig,
) -> Result<Vec<KernelSample>> {
    alphas
        .par_iter()
        .map(|&alpha| {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::Range(format!("alpha = {alpha} not in (0, 1)")));
            }
            let f = test_kernel(&KernelParams::new(alpha, beta)?);
            Ok(KernelSample {
                alpha,
                one_minus_alpha: 1.0 - alpha,
                norm: norm(&f, e, which, config)?,
            })
        })
        .collect()
}

/// Fits `ln ||K_alpha||` against `ln(1 - alpha)`; the expected slope is
/// `1/p + 1/q - beta`.
pub fn kernel_asymptotics(
    e: ExponentPair,
    beta: f64,
    alphas: &[f64],
    which: Space,
    config: &QuadratureConfig,
) -> Result<ExponentFit> {
    let samples = kernel_norms_checked(e, beta, alphas, which, config)?;
    fit_kernel_samples(&samples)
}

/// Validates the grid, then computes [`kernel_norms`].
pub fn kernel_norms_checked(
    e: ExponentPair,
    beta: f64,
    alphas: &[f64],
    which: Space,
    config: &QuadratureConfig,
) -> Result<Vec<KernelSample>> {
    if !(beta > e.critical_beta()) {
        return Err(Error::Range(format!(
            "beta = {beta} must exceed 1/p + 1/q = {}",
            e.critical_beta()
        )));
    }
    if alphas.len() < 4 {
        return Err(Error::Range(format!("need at least 4 alphas, got {}", alphas.len())));
    }
    let gaps: Vec<f64> = alphas.iter().map(|a| 1.0 - a).collect();
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) || hi / lo < 10.0 * (1.0 - 1e-9) {
        return Err(Error::Range("1 - alpha must span at least a decade inside (0, 1)".into()));
    }
    kernel_norms(e, beta, alphas, which, config)
}

pub fn fit_kernel_samples(samples: &[KernelSample]) -> Result<ExponentFit> {
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.one_minus_alpha, s.norm.value)).collect();
    let fit = fit_loglog(&pts)?;
    if fit.residual_max > FIT_RESIDUAL_LIMIT {
        return Err(Error::FitUnreliable {
            residual: fit.residual_max,
            limit: FIT_RESIDUAL_LIMIT,
        });
    }
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentRow {
    pub index: usize,
    pub rho: NormResult,
    pub mixed: NormResult,
    /// `mixed / rho` when `p >= q`, otherwise `rho / mixed`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub p: f64,
    pub q: f64,
    pub rows: Vec<ContainmentRow>,
    pub worst_ratio: f64,
    /// Every ratio at most `1 + 10 rel_tol`.
    pub holds: bool,
}

pub fn containment_sweep(e: ExponentPair, corpus: &[DiscFunction], config: &QuadratureConfig) -> Result<ContainmentReport> {
    let rows = corpus
        .par_iter()
        .enumerate()
        .map(|(index, f)| {
            let rho = rm_norm(f, e, config)?;
            let mixed = mixed_norm(f, e, config)?;
            let ratio = if e.p() >= e.q() {
                mixed.value / rho.value
            } else {
                rho.value / mixed.value
            };
            Ok(ContainmentRow {
                index,
                rho,
                mixed,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst_ratio = rows
        .iter()
        .map(|r| r.ratio)
        .filter(|r| !r.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    let holds = rows.iter().all(|r| r.ratio <= 1.0 + 10.0 * config.rel_tol || r.ratio.is_nan());
    Ok(ContainmentReport {
        p: e.p(),
        q: e.q(),
        rows,
        worst_ratio,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceNorms {
    pub n: usize,
    pub rho_f: NormResult,
    pub mixed_f: NormResult,
    pub rho_g: NormResult,
    pub mixed_g: NormResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumNorms {
    pub m: usize,
    /// Direct quadrature of `F_m`.
    pub rho: NormResult,
    pub mixed: NormResult,
    /// `(sum_{n<=m} rho(f_n)^q)^(1/q)`, the norm of the masked sum.
    pub rho_additive: f64,
    /// `(sum_{n<=m} ||f_n||^p)^(1/p)`.
    pub mixed_additive: f64,
}

/// Direct quadrature of `sum f_n` against the additive combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityCheck {
    pub m: usize,
    pub rho_direct: NormResult,
    pub rho_combined: f64,
    pub rho_combined_error: f64,
    pub mixed_direct: NormResult,
    pub mixed_combined: f64,
    pub mixed_combined_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationFits {
    /// `ln rho(F_m)` against `ln m`; expected slope `1/q`.
    pub rho: ExponentFit,
    /// `ln ||F_m||` against `ln m`; expected slope `1/p`.
    pub mixed: ExponentFit,
    /// `ln(rho(F_m) / ||F_m||)` against `ln m`; expected slope `1/q - 1/p`.
    pub ratio: ExponentFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub p: f64,
    pub q: f64,
    pub pieces: Vec<PieceNorms>,
    pub sums: Vec<SumNorms>,
    pub additivity: Option<AdditivityCheck>,
    /// Present when at least three sums were computed.
    pub fits: Option<SeparationFits>,
}

/// Largest `m` for which the masked-sum additivity check is quadratured
/// directly.
pub const ADDITIVITY_CHECK_M: usize = 3;

pub fn separation_experiment(e: ExponentPair, m_max: usize, config: &QuadratureConfig) -> Result<SeparationReport> {
    let schedule = build_schedule(e, m_max)?;
    let (p, q) = (e.p(), e.q());

    let pieces = (1..=m_max)
        .into_par_iter()
        .map(|n| {
            let (f, g) = schedule.pieces(n)?;
            Ok(PieceNorms {
                n,
                rho_f: rm_norm(&f, e, config)?,
                mixed_f: mixed_norm(&f, e, config)?,
                rho_g: rm_norm(&g, e, config)?,
                mixed_g: mixed_norm(&g, e, config)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let combine = |k: usize, s: f64, pick: fn(&PieceNorms) -> &NormResult| -> (f64, f64) {
        let total: f64 = pieces[..k].iter().map(|pn| pick(pn).value.powf(s)).sum();
        let value = total.powf(1.0 / s);
        // first-order propagation of the piece errors
        let err: f64 = if total > 0.0 {
            pieces[..k]
                .iter()
                .map(|pn| {
                    let r = pick(pn);
                    r.value.powf(s - 1.0) * r.error_estimate
                })
                .sum::<f64>()
                * total.powf(1.0 / s - 1.0)
        } else {
            0.0
        };
        (value, err)
    };

    let sums = (1..=m_max)
        .into_par_iter()
        .map(|m| {
            let f = schedule.f_sum_upto(m)?;
            Ok(SumNorms {
                m,
                rho: rm_norm(&f, e, config)?,
                mixed: mixed_norm(&f, e, config)?,
                rho_additive: combine(m, q, |pn| &pn.rho_f).0,
                mixed_additive: combine(m, p, |pn| &pn.mixed_f).0,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let additivity = if m_max >= 1 {
        let k = m_max.min(ADDITIVITY_CHECK_M);
        let masked = schedule.masked_sum(k)?;
        let (rho_combined, rho_combined_error) = combine(k, q, |pn| &pn.rho_f);
        let (mixed_combined, mixed_combined_error) = combine(k, p, |pn| &pn.mixed_f);
        Some(AdditivityCheck {
            m: k,
            rho_direct: rm_norm(&masked, e, config)?,
            rho_combined,
            rho_combined_error,
            mixed_direct: mixed_norm(&masked, e, config)?,
            mixed_combined,
            mixed_combined_error,
        })
    } else {
        None
    };

    let fits = if sums.len() >= 3 {
        let rho = fit_loglog(&sums.iter().map(|s| (s.m as f64, s.rho.value)).collect::<Vec<_>>())?;
        let mixed = fit_loglog(&sums.iter().map(|s| (s.m as f64, s.mixed.value)).collect::<Vec<_>>())?;
        let ratio = fit_loglog(
            &sums
                .iter()
                .map(|s| (s.m as f64, s.rho.value / s.mixed.value))
                .collect::<Vec<_>>(),
        )?;
        Some(SeparationFits { rho, mixed, ratio })
    } else {
        None
    };

    Ok(SeparationReport {
        p,
        q,
        pieces,
        sums,
        additivity,
        fits,
    })
}
