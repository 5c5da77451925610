use std::collections::BTreeMap;
use std::fmt::Write;

use hominv::{DegreeReport64, Error, HypothesisReport64, InversionResult64, Verdict};
use serde::Serialize;

pub const TOOL_VERSION: &str = concat!("hominv ", env!("CARGO_PKG_VERSION"));

/// Everything one invocation produced. `timing_ms` is the only field that
/// varies between identical runs.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub map_echo: String,
    pub seed: u64,
    pub forced: bool,
    pub hypothesis: HypothesisReport64,
    pub inversions: Vec<InversionResult64>,
    pub degree: Option<DegreeReport64>,
    pub roundtrip: Option<RoundTripSummary>,
    pub warnings: Vec<String>,
    pub failure: Option<Failure>,
    pub timing_ms: BTreeMap<&'static str, f64>,
}

#[derive(Debug, Serialize)]
pub struct RoundTripSummary {
    pub targets: usize,
    pub max_relative_residual: f64,
}

#[derive(Debug, Serialize)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
    pub target: Option<Vec<f64>>,
    pub t: Option<f64>,
    pub xi: Option<Vec<f64>>,
}

impl Failure {
    pub fn from_error(e: &Error, target: Option<&[f64]>) -> Self {
        let (kind, t, xi) = match e {
            Error::Parse(_) => ("parse", None, None),
            Error::InvalidInput(_) | Error::InvalidParameter(_) => ("invalid-input", None, None),
            Error::Precondition(_) => ("precondition", None, None),
            Error::SingularJacobian { point } => ("singular-jacobian", None, Some(point.clone())),
            Error::ContinuationFailed { t, xi, .. } => ("continuation-failed", Some(*t), Some(xi.clone())),
            Error::UndefinedAtOrigin | Error::NoBracket => ("numerical", None, None),
        };
        Failure {
            kind,
            message: e.to_string(),
            target: target.map(<[f64]>::to_vec),
            t,
            xi,
        }
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.12}")).collect();
    format!("({})", parts.join(", "))
}

impl RunReport {
    pub fn summary(&self) -> String {
        let h = &self.hypothesis;
        let mut s = String::new();
        let verdict = match h.overall {
            Verdict::Pass => "pass",
            Verdict::HypothesesMetButLowDimension => "hypotheses-met-but-n<3",
            Verdict::Fail => "fail",
        };
        let _ = writeln!(s, "map: n = {}, kappa = {}", h.n, h.kappa);
        let _ = writeln!(s, "hypotheses: {verdict} ({} samples, seed {})", h.sample_count, h.seed);
        let _ = writeln!(
            s,
            "  c0 = {:.6e}  C = {:.6e}  min|det Df| = {:.3e}  homogeneity residual = {:.3e}",
            h.c0_empirical, h.c_empirical, h.min_abs_det_j, h.homogeneity_residual
        );
        for r in &h.reasons {
            let _ = writeln!(s, "  reason: {r}");
        }
        let shown = if self.roundtrip.is_some() { 0 } else { self.inversions.len() };
        for inv in &self.inversions[..shown] {
            let _ = writeln!(
                s,
                "f^-1{} = {}  residual {:.2e}",
                fmt_vec(&inv.target),
                fmt_vec(&inv.xi),
                inv.residual
            );
        }
        if let Some(d) = &self.degree {
            let _ = writeln!(s, "degree at {} = {} ({} preimages)", fmt_vec(&d.value), d.degree, d.preimages.len());
            for p in &d.preimages {
                let _ = writeln!(s, "  {}  sign {:+}", fmt_vec(&p.xi), p.sign);
            }
        }
        if let Some(rt) = &self.roundtrip {
            let _ = writeln!(
                s,
                "round trip: {} targets, max relative residual {:.3e}",
                rt.targets, rt.max_relative_residual
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        if let Some(f) = &self.failure {
            let _ = writeln!(s, "error: {}", f.message);
        }
        s
    }
}
