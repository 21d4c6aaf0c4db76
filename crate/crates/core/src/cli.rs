//! Command-line front end. Every command writes one JSON (or long-format CSV)
//! document; failures go to stderr as `{"error": kind, "detail": text}`.
//!
//! Exit codes: 0 success, 1 other numerical failure, 2 parse or validation
//! error, 3 quadrature divergence, 4 schedule overflow.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    containment_sweep, fit_kernel_samples, kernel_norms_checked, separation_experiment, ContainmentReport,
    ExponentFit, KernelSample, SeparationReport, Space,
};
use crate::disc::{DiscFunction, DiscPoint, ExponentPair, NormResult};
use crate::dsl::{compile, GRAMMAR};
use crate::error::{Error, QuadError};
use crate::kernels::{build_schedule, ScheduleDocument};
use crate::operators::{bergman_project, pairing, ProjectionParams};
use crate::quad::QuadratureConfig;

/// Environment variable overriding the default relative tolerance.
pub const REL_TOL_ENV: &str = "RADNORM_REL_TOL";

#[derive(Debug, Parser)]
#[command(name = "radnorm", version, about = "Radial-integrability and mixed norms on the unit disc", after_help = GRAMMAR)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Relative tolerance (default 1e-8, or $RADNORM_REL_TOL).
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpaceArg {
    Rm,
    Mixed,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Space {
        match s {
            SpaceArg::Rm => Space::Rm,
            SpaceArg::Mixed => Space::Mixed,
        }
    }
}

#[derive(Debug, Args)]
struct Exponents {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Norm of one function.
    #[command(after_help = GRAMMAR)]
    Norm {
        #[arg(long, value_enum)]
        space: SpaceArg,
        #[command(flatten)]
        e: Exponents,
        #[arg(long = "fn")]
        function: String,
    },
    /// Exponent fit of kernel norms against 1 - alpha.
    #[command(after_help = GRAMMAR)]
    Asymptotics {
        #[command(flatten)]
        e: Exponents,
        #[arg(long)]
        beta: f64,
        /// LO:HI:N, N log-spaced values of 1 - alpha from LO to HI.
        #[arg(long)]
        alpha_grid: String,
        #[arg(long, value_enum)]
        space: SpaceArg,
    },
    /// Compare both norms over a corpus file, one expression per line.
    #[command(after_help = GRAMMAR)]
    Sweep {
        #[command(flatten)]
        e: Exponents,
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Norms of the counterexample pieces and sums.
    #[command(after_help = GRAMMAR)]
    Separate {
        #[command(flatten)]
        e: Exponents,
        #[arg(long)]
        m: usize,
    },
    /// Weighted Bergman projection at points "R,THETA;R,THETA;...".
    #[command(after_help = GRAMMAR)]
    Project {
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        at: String,
    },
    /// Area pairing of two functions.
    #[command(after_help = GRAMMAR)]
    Pair {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// Counterexample schedule.
    #[command(after_help = GRAMMAR)]
    Schedule {
        #[command(flatten)]
        e: Exponents,
        #[arg(long)]
        m: usize,
    },
}

/// A failure with its exit code and JSON kind.
#[derive(Debug)]
struct Failure {
    code: i32,
    kind: &'static str,
    detail: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Parse(_) => (2, "parse"),
            Error::InvalidExponents(_)
            | Error::Domain(_)
            | Error::Range(_)
            | Error::IndexOutOfRange { .. }
            | Error::DegenerateFit(_) => (2, "validation"),
            Error::Quad(QuadError::Config(_)) => (2, "validation"),
            Error::Quad(QuadError::Diverged { .. }) => (3, "divergence"),
            Error::Quad(QuadError::NonFinite { .. }) => (1, "numerical"),
            Error::FitUnreliable { .. } => (1, "fit_unreliable"),
            Error::Overflow(_) => (4, "overflow"),
        };
        Failure {
            code,
            kind,
            detail: e.to_string(),
        }
    }
}

fn validation(detail: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        kind: "validation",
        detail: detail.into(),
    }
}

/// One long-format CSV row.
struct Row {
    sample: String,
    quantity: &'static str,
    value: f64,
}

fn row(sample: impl ToString, quantity: &'static str, value: f64) -> Row {
    Row {
        sample: sample.to_string(),
        quantity,
        value,
    }
}

struct Document {
    json: serde_json::Value,
    rows: Vec<Row>,
}

/// Parses `argv` (including the program name), runs the command and writes
/// the document to stdout or `--output`. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            return report(err, validation(e.render().to_string().trim().to_string()), "usage");
        }
    };
    match execute(&cli) {
        Ok(doc) => match emit(&cli, doc, out) {
            Ok(()) => 0,
            Err(f) => report(err, f, ""),
        },
        Err(f) => report(err, f, ""),
    }
}

fn report(err: &mut dyn Write, f: Failure, kind_override: &'static str) -> i32 {
    let kind = if kind_override.is_empty() { f.kind } else { kind_override };
    let _ = writeln!(err, "{}", json!({ "error": kind, "detail": f.detail }));
    f.code
}

fn emit(cli: &Cli, doc: Document, out: &mut dyn Write) -> Result<(), Failure> {
    let bytes = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&doc.json).expect("documents serialize");
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Failure {
                code: 1,
                kind: "io",
                detail: e.to_string(),
            };
            w.write_record(["sample", "quantity", "value"]).map_err(io)?;
            for r in &doc.rows {
                w.write_record([r.sample.as_str(), r.quantity, &format!("{:?}", r.value)])
                    .map_err(io)?;
            }
            w.into_inner().map_err(|e| Failure {
                code: 1,
                kind: "io",
                detail: e.to_string(),
            })?
        }
    };
    let io = |e: std::io::Error| Failure {
        code: 1,
        kind: "io",
        detail: e.to_string(),
    };
    match &cli.output {
        Some(path) => fs::write(path, bytes).map_err(io),
        None => out.write_all(&bytes).map_err(io),
    }
}

fn config(cli: &Cli) -> Result<QuadratureConfig, Failure> {
    let rel_tol = match cli.rel_tol {
        Some(t) => t,
        None => match std::env::var(REL_TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| validation(format!("{REL_TOL_ENV} = '{s}' is not a number")))?,
            Err(_) => QuadratureConfig::default().rel_tol,
        },
    };
    let cfg = QuadratureConfig::default().with_rel_tol(rel_tol);
    cfg.validate().map_err(|e| Failure::from(Error::from(e)))?;
    Ok(cfg)
}

fn exponents(e: &Exponents) -> Result<ExponentPair, Failure> {
    Ok(ExponentPair::new(e.p, e.q)?)
}

fn function(src: &str) -> Result<DiscFunction, Failure> {
    Ok(compile(src).map_err(Error::from)?)
}

fn norm_rows(sample: impl ToString + Copy, r: &NormResult) -> Vec<Row> {
    vec![
        row(sample, "value", r.value),
        row(sample, "error_estimate", r.error_estimate),
        row(sample, "evaluations", r.evaluations as f64),
        row(sample, "converged", r.converged as u8 as f64),
    ]
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("documents serialize")
}

fn execute(cli: &Cli) -> Result<Document, Failure> {
    match &cli.command {
        Command::Norm { space, e, function: src } => {
            let e = exponents(e)?;
            let cfg = config(cli)?;
            let f = function(src)?;
            let r = crate::analysis::norm(&f, e, (*space).into(), &cfg)?;
            Ok(Document {
                json: to_json(&r),
                rows: norm_rows(0, &r),
            })
        }
        Command::Asymptotics {
            e,
            beta,
            alpha_grid,
            space,
        } => {
            let e = exponents(e)?;
            let cfg = config(cli)?;
            let gaps = parse_grid(alpha_grid)?;
            let alphas: Vec<f64> = gaps.iter().map(|g| 1.0 - g).collect();
            let space: Space = (*space).into();
            let samples = kernel_norms_checked(e, *beta, &alphas, space, &cfg)?;
            let fit = fit_kernel_samples(&samples)?;
            Ok(asymptotics_document(e, *beta, space, &samples, &fit))
        }
        Command::Sweep { e, corpus } => {
            let e = exponents(e)?;
            let cfg = config(cli)?;
            let text = fs::read_to_string(corpus).map_err(|err| validation(format!("{}: {err}", corpus.display())))?;
            let mut exprs = Vec::new();
            let mut funcs = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let f = compile(line).map_err(|err| Failure {
                    code: 2,
                    kind: "parse",
                    detail: format!("line {}: {err}", lineno + 1),
                })?;
                exprs.push(line.to_string());
                funcs.push(f);
            }
            if funcs.is_empty() {
                return Err(validation("corpus contains no expressions"));
            }
            let report = containment_sweep(e, &funcs, &cfg)?;
            Ok(sweep_document(&report, &exprs))
        }
        Command::Separate { e, m } => {
            let e = exponents(e)?;
            let cfg = config(cli)?;
            let report = separation_experiment(e, *m, &cfg)?;
            Ok(separation_document(&report))
        }
        Command::Project {
            gamma,
            function: src,
            at,
        } => {
            let cfg = config(cli)?;
            let params = ProjectionParams::new(*gamma)?;
            let f = function(src)?;
            let points = parse_points(at)?;
            let mut values = Vec::new();
            let mut rows = Vec::new();
            for (i, (r, theta, z)) in points.iter().enumerate() {
                let v = bergman_project(params, &f, z, &cfg)?;
                values.push(json!({
                    "r": r, "theta": theta,
                    "re": v.value.re, "im": v.value.im,
                    "error_estimate": v.error_estimate,
                    "evaluations": v.evaluations,
                    "converged": v.converged,
                }));
                rows.push(row(i, "r", *r));
                rows.push(row(i, "theta", *theta));
                rows.push(row(i, "re", v.value.re));
                rows.push(row(i, "im", v.value.im));
                rows.push(row(i, "error_estimate", v.error_estimate));
            }
            Ok(Document {
                json: json!({ "gamma": gamma, "fn": src, "values": values }),
                rows,
            })
        }
        Command::Pair { f, g } => {
            let cfg = config(cli)?;
            let ff = function(f)?;
            let gg = function(g)?;
            let v = pairing(&ff, &gg, &cfg)?;
            Ok(Document {
                json: json!({
                    "re": v.value.re, "im": v.value.im,
                    "error_estimate": v.error_estimate,
                    "evaluations": v.evaluations,
                    "converged": v.converged,
                }),
                rows: vec![
                    row(0, "re", v.value.re),
                    row(0, "im", v.value.im),
                    row(0, "error_estimate", v.error_estimate),
                ],
            })
        }
        Command::Schedule { e, m } => {
            let e = exponents(e)?;
            let s = build_schedule(e, *m)?;
            Ok(schedule_document(&s.to_document()))
        }
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || validation(format!("alpha grid '{spec}' is not LO:HI:N"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi < 1.0 && lo < hi) || n < 2 {
        return Err(validation(format!(
            "alpha grid needs 0 < LO < HI < 1 and N >= 2, got {spec}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

fn parse_points(spec: &str) -> Result<Vec<(f64, f64, DiscPoint)>, Failure> {
    spec.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let bad = || validation(format!("point '{item}' is not R,THETA"));
            let (r, t) = item.split_once(',').ok_or_else(bad)?;
            let r: f64 = r.trim().parse().map_err(|_| bad())?;
            let t: f64 = t.trim().parse().map_err(|_| bad())?;
            let z = DiscPoint::from_polar(r, t)?;
            Ok((r, t, z))
        })
        .collect::<Result<Vec<_>, Failure>>()
        .and_then(|v| if v.is_empty() { Err(validation("no points given")) } else { Ok(v) })
}

fn fit_rows(rows: &mut Vec<Row>, sample: &str, fit: &ExponentFit) {
    rows.push(row(sample, "slope", fit.slope));
    rows.push(row(sample, "intercept", fit.intercept));
    rows.push(row(sample, "residual_max", fit.residual_max));
}

fn asymptotics_document(e: ExponentPair, beta: f64, space: Space, samples: &[KernelSample], fit: &ExponentFit) -> Document {
    let mut rows = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        rows.push(row(i, "alpha", s.alpha));
        rows.push(row(i, "one_minus_alpha", s.one_minus_alpha));
        rows.extend(norm_rows(i, &s.norm).into_iter().map(|mut r| {
            if r.quantity == "value" {
                r.quantity = "norm";
            }
            r
        }));
    }
    fit_rows(&mut rows, "fit", fit);
    Document {
        json: json!({
            "experiment": "kernel_asymptotics",
            "p": e.p(), "q": e.q(), "beta": beta, "space": space.to_string(),
            "expected_slope": e.critical_beta() - beta,
            "fit": fit,
            "samples": samples,
        }),
        rows,
    }
}

fn sweep_document(report: &ContainmentReport, exprs: &[String]) -> Document {
    let mut rows = Vec::new();
    let items: Vec<serde_json::Value> = report
        .rows
        .iter()
        .map(|r| {
            rows.push(row(r.index, "rho", r.rho.value));
            rows.push(row(r.index, "rho_error", r.rho.error_estimate));
            rows.push(row(r.index, "mixed", r.mixed.value));
            rows.push(row(r.index, "mixed_error", r.mixed.error_estimate));
            rows.push(row(r.index, "ratio", r.ratio));
            json!({
                "index": r.index, "fn": exprs[r.index],
                "rho": r.rho, "mixed": r.mixed, "ratio": r.ratio,
            })
        })
        .collect();
    rows.push(row("summary", "worst_ratio", report.worst_ratio));
    Document {
        json: json!({
            "experiment": "containment_sweep",
            "p": report.p, "q": report.q,
            "rows": items,
            "worst_ratio": report.worst_ratio,
            "holds": report.holds,
        }),
        rows,
    }
}

fn separation_document(report: &SeparationReport) -> Document {
    let mut rows = Vec::new();
    for pn in &report.pieces {
        let s = format!("n={}", pn.n);
        rows.push(row(&s, "rho_f", pn.rho_f.value));
        rows.push(row(&s, "mixed_f", pn.mixed_f.value));
        rows.push(row(&s, "rho_g", pn.rho_g.value));
        rows.push(row(&s, "mixed_g", pn.mixed_g.value));
    }
    for sm in &report.sums {
        let s = format!("m={}", sm.m);
        rows.push(row(&s, "rho_F", sm.rho.value));
        rows.push(row(&s, "mixed_F", sm.mixed.value));
        rows.push(row(&s, "rho_additive", sm.rho_additive));
        rows.push(row(&s, "mixed_additive", sm.mixed_additive));
    }
    if let Some(fits) = &report.fits {
        fit_rows(&mut rows, "fit_rho", &fits.rho);
        fit_rows(&mut rows, "fit_mixed", &fits.mixed);
        fit_rows(&mut rows, "fit_ratio", &fits.ratio);
    }
    let mut json = to_json(report);
    json["experiment"] = json!("separation");
    Document { json, rows }
}

fn schedule_document(doc: &ScheduleDocument) -> Document {
    let mut rows = Vec::new();
    for p in &doc.pieces {
        let s = format!("n={}", p.n);
        rows.push(row(&s, "log10_delta", p.log10_delta.parse().unwrap_or(f64::NAN)));
        rows.push(row(&s, "theta", p.theta));
        rows.push(row(&s, "one_minus_r_lo", p.one_minus_r[0]));
        rows.push(row(&s, "one_minus_r_hi", p.one_minus_r[1]));
        rows.push(row(&s, "angle_half_width", p.angle_half_width));
    }
    Document {
        json: to_json(doc),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("radnorm").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("1e-4:1e-1:4").unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[0] - 1e-4).abs() < 1e-18 && (g[3] - 0.1).abs() < 1e-15);
        assert!((g[1] - 1e-3).abs() < 1e-16);
        assert!(parse_grid("0:1:3").is_err());
        assert!(parse_grid("1e-3:1e-1").is_err());
    }

    #[test]
    fn point_parsing() {
        assert_eq!(parse_points("0.5,1;0.2,0").unwrap().len(), 2);
        assert!(parse_points("1.0,0").is_err());
        assert!(parse_points("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_capture(&["schedule", "--p", "2", "--q", "1.25", "--m", "3"]).0, 0);
        assert_eq!(run_capture(&["schedule", "--p", "2", "--q", "1.25", "--m", "9"]).0, 4);
        assert_eq!(run_capture(&["schedule", "--p", "1", "--q", "1.25", "--m", "3"]).0, 2);
        let (code, _, err) = run_capture(&["norm", "--space", "rm", "--p", "2", "--q", "2", "--fn", "z^"]);
        assert_eq!(code, 2);
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "parse");
        assert_eq!(run_capture(&["bogus"]).0, 2);
    }

    #[test]
    fn help_lists_grammar() {
        let (code, out, _) = run_capture(&["norm", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("expr := term"));
    }
}
