//! Preimage counting and the mapping degree by signed root counting.
//!
//! Every preimage of `η` lies in the annulus `r_lo ≤ |ξ| ≤ r_hi` given by
//! the coercivity bracket, so a multistart Newton search over that annulus
//! is exhaustive in practice. The degree at a regular value is the sum of
//! `sign det Df` over the preimages.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypotheses::{coercivity_bracket, HypothesisReport, Verdict};
use crate::inverter::ContinuationConfig;
use crate::linalg::{distance, norm};
use crate::mapcore::MapSpec;
use crate::newton::damped_newton;
use crate::scalar::Scalar;
use crate::sphere::{low_discrepancy_directions, sample_sphere};

/// Roots closer than `DEDUP_FACTOR · r_hi` are merged.
pub const DEDUP_FACTOR: f64 = 1e-6;
/// Iteration cap for each cold-start Newton run.
pub const MULTISTART_MAX_ITERS: usize = 100;
/// The confirmation pass uses this many times the requested starts.
pub const CONFIRM_FACTOR: usize = 4;

pub const DEGREE_NOTE: &str =
    "degree +-1 for admissible n >= 3 maps is inferred from bijectivity and a nonvanishing Jacobian";

pub fn default_starts(n: usize) -> usize {
    64 * n
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preimage<T> {
    pub xi: Vec<T>,
    /// Sign of `det Df(ξ)`.
    pub sign: i8,
    pub det: T,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeReport<T> {
    pub value: Vec<T>,
    pub preimages: Vec<Preimage<T>>,
    pub degree: i64,
    pub injective_evidence: bool,
    pub starts: usize,
    pub confirm_starts: usize,
    /// The two start budgets found different numbers of roots.
    pub possible_missed_roots: bool,
    pub bracket: (T, T),
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityVerdict<T> {
    pub consistent_with_injective: bool,
    pub trials: usize,
    pub preimage_counts: Vec<usize>,
    pub targets: Vec<Vec<T>>,
}

fn gate<T: Scalar>(m: &MapSpec<T>, report: &HypothesisReport<T>, cfg: &ContinuationConfig<T>) -> Result<()> {
    cfg.validate()?;
    if report.n != m.dim() {
        return Err(Error::Precondition(format!(
            "report is for n = {}, map has n = {}",
            report.n,
            m.dim()
        )));
    }
    if report.overall == Verdict::Fail && !cfg.force {
        return Err(Error::Precondition(report.reasons.join("; ")));
    }
    Ok(())
}

fn sort_and_dedup<T: Scalar>(mut roots: Vec<Vec<T>>, radius: T) -> Vec<Vec<T>> {
    roots.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.as_f64().total_cmp(&y.as_f64()))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut kept: Vec<Vec<T>> = Vec::new();
    for r in roots {
        if kept.iter().all(|k| distance(k, &r) > radius) {
            kept.push(r);
        }
    }
    kept
}

fn multistart<T: Scalar>(m: &MapSpec<T>, eta: &[T], starts: usize, bracket: (T, T), tol: T) -> Vec<Vec<T>> {
    let (lo, hi) = (bracket.0.as_f64(), bracket.1.as_f64());
    let n = m.dim();
    let inits: Vec<Vec<T>> = low_discrepancy_directions(n, starts)
        .into_iter()
        .map(|(dir, u)| {
            let r = lo.powf(1.0 - u) * hi.powf(u);
            dir.into_iter().map(|x| T::lit(x * r)).collect()
        })
        .collect();
    let found: Vec<Vec<T>> = inits
        .par_iter()
        .filter_map(|x0| {
            let out = damped_newton(m, x0, eta, tol, MULTISTART_MAX_ITERS);
            out.converged.then_some(out.x)
        })
        .collect();
    sort_and_dedup(found, T::lit(DEDUP_FACTOR) * bracket.1)
}

/// Distinct preimages of `η` found by multistart Newton over the coercivity
/// annulus. Ordered lexicographically.
pub fn count_preimages<T: Scalar>(
    m: &MapSpec<T>,
    eta: &[T],
    starts: usize,
    cfg: &ContinuationConfig<T>,
    report: &HypothesisReport<T>,
) -> Result<Vec<Vec<T>>> {
    gate(m, report, cfg)?;
    if eta.len() != m.dim() || norm(eta) == T::zero() || eta.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("target must be a finite nonzero vector of length n".into()));
    }
    let bracket = coercivity_bracket(report, eta, m.kappa())?;
    let tol = cfg.tol * norm(eta).max(T::one());
    Ok(multistart(m, eta, starts.max(1), bracket, tol))
}

/// Signed preimage count at `η`, confirmed with a second pass using
/// [`CONFIRM_FACTOR`] times as many starts.
pub fn mapping_degree<T: Scalar>(
    m: &MapSpec<T>,
    eta: &[T],
    starts: usize,
    cfg: &ContinuationConfig<T>,
    report: &HypothesisReport<T>,
) -> Result<DegreeReport<T>> {
    let first = count_preimages(m, eta, starts, cfg, report)?;
    let confirm_starts = starts.max(1) * CONFIRM_FACTOR;
    let second = count_preimages(m, eta, confirm_starts, cfg, report)?;
    let bracket = coercivity_bracket(report, eta, m.kappa())?;
    let possible_missed_roots = first.len() != second.len();
    let mut all = first;
    all.extend(second);
    let roots = sort_and_dedup(all, T::lit(DEDUP_FACTOR) * bracket.1);

    let mut preimages = Vec::with_capacity(roots.len());
    for xi in roots {
        let det = m.jacobian(&xi)?.determinant();
        let f = m.eval(&xi)?;
        let residual = norm(&crate::linalg::sub(&f, eta));
        let sign = if det > T::zero() {
            1
        } else if det < T::zero() {
            -1
        } else {
            0
        };
        preimages.push(Preimage {
            xi,
            sign,
            det,
            residual,
        });
    }
    let degree = preimages.iter().map(|p| i64::from(p.sign)).sum();
    Ok(DegreeReport {
        value: eta.to_vec(),
        injective_evidence: preimages.len() == 1,
        preimages,
        degree,
        starts,
        confirm_starts,
        possible_missed_roots,
        bracket,
        note: DEGREE_NOTE.to_string(),
    })
}

/// Counts preimages at `trials` seeded random targets with `log10 |η|`
/// uniform on `[-2, 2]`.
pub fn injectivity_probe<T: Scalar>(
    m: &MapSpec<T>,
    trials: usize,
    starts: usize,
    cfg: &ContinuationConfig<T>,
    report: &HypothesisReport<T>,
) -> Result<InjectivityVerdict<T>> {
    gate(m, report, cfg)?;
    let seed = report.seed ^ 0x696e_6a65;
    let dirs = sample_sphere::<T>(m.dim(), trials.max(1), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets: Vec<Vec<T>> = dirs
        .points
        .into_iter()
        .take(trials)
        .map(|d| {
            let r = T::lit(10f64.powf(rng.random_range(-2.0..=2.0)));
            d.into_iter().map(|x| x * r).collect()
        })
        .collect();
    let mut counts = Vec::with_capacity(targets.len());
    for t in &targets {
        counts.push(count_preimages(m, t, starts, cfg, report)?.len());
    }
    Ok(InjectivityVerdict {
        consistent_with_injective: !counts.is_empty() && counts.iter().all(|&c| c == 1),
        trials: targets.len(),
        preimage_counts: counts,
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::hypotheses::check_hypotheses;

    fn cfg() -> ContinuationConfig<f64> {
        ContinuationConfig::default()
    }

    #[test]
    fn square_map_has_two_preimages() {
        let m = builtins::complex_square::<f64>();
        let r = check_hypotheses(&m, 2000, 5);
        let roots = count_preimages(&m, &[1.0, 0.0], 128, &cfg(), &r).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0][0] + 1.0).abs() < 1e-10 && roots[0][1].abs() < 1e-10);
        assert!((roots[1][0] - 1.0).abs() < 1e-10 && roots[1][1].abs() < 1e-10);
        let d = mapping_degree(&m, &[1.0, 0.0], 128, &cfg(), &r).unwrap();
        assert_eq!(d.degree, 2);
        assert!(!d.injective_evidence);
    }

    #[test]
    fn identity_and_reflection_degrees() {
        let id = builtins::identity::<f64>(3);
        let r = check_hypotheses(&id, 2000, 5);
        let d = mapping_degree(&id, &[1.0, 2.0, 3.0], 192, &cfg(), &r).unwrap();
        assert_eq!(d.degree, 1);
        assert_eq!(d.preimages.len(), 1);
        let refl = builtins::reflection::<f64>();
        let r = check_hypotheses(&refl, 2000, 5);
        let d = mapping_degree(&refl, &[1.0, 2.0, 3.0], 192, &cfg(), &r).unwrap();
        assert_eq!(d.degree, -1);
        assert!((d.preimages[0].xi[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn dedup_keeps_antipodal_roots() {
        let roots = sort_and_dedup(vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![1.0 + 1e-9, 0.0]], 1e-6);
        assert_eq!(roots.len(), 2);
    }

    #[test]
    fn failed_report_is_refused() {
        let m = builtins::axis_cube::<f64>();
        let r = check_hypotheses(&m, 2000, 5);
        assert!(matches!(count_preimages(&m, &[1.0, 1.0, 1.0], 10, &cfg(), &r), Err(Error::Precondition(_))));
    }
}
