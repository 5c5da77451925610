//! Quantitative checks of the hypotheses that make a homogeneous map
//! globally invertible: exact homogeneity, a nonvanishing Jacobian off the
//! origin, and dimension `n ≥ 3`.
//!
//! The sphere extrema `c0 = min |f|` and `C = max |f|` over `|ξ| = 1` give the
//! two-sided bound `c0 |ξ|^κ ≤ |f(ξ)| ≤ C |ξ|^κ`, which yields continuity of
//! the extension at 0, coercivity, and the annulus bracketing every
//! preimage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, normalize, sub};
use crate::mapcore::MapSpec;
use crate::scalar::Scalar;
use crate::sphere::{sample_sphere, SphereSample};

/// `|det Df|` on the unit sphere must exceed this.
pub const JACOBIAN_TOL: f64 = 1e-12;
/// Largest accepted relative homogeneity residual.
pub const HOMOGENEITY_TOL: f64 = 1e-10;
/// Number of `(ω, τ)` pairs probed for the homogeneity residual.
pub const HOMOGENEITY_PROBES: usize = 100;
/// Iteration cap for the projected-gradient refinement.
pub const REFINE_MAX_ITERS: usize = 200;
/// Refinement stops once a step moves the point less than this.
pub const REFINE_STEP_TOL: f64 = 1e-10;
/// Number of best sample points each refinement restarts from.
pub const REFINE_STARTS: usize = 4;

pub const C0_LOWER_LABEL: &str = "heuristically certified (covering radius estimated, not proven)";

/// Default sample size, `10⁴ · n`. There is no principled choice without a
/// modulus of continuity for `f` on the sphere.
pub fn default_sample_count(n: usize) -> usize {
    10_000 * n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Pass,
    Fail,
}

impl Check {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Check::Pass
        } else {
            Check::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "pass")]
    Pass,
    /// Every sampled hypothesis holds but `n < 3`, where global
    /// invertibility can fail.
    #[serde(rename = "hypotheses-met-but-n<3")]
    HypothesesMetButLowDimension,
    #[serde(rename = "fail")]
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport<T> {
    pub n: usize,
    pub kappa: T,
    pub seed: u64,
    pub sample_count: usize,
    pub sample_count_is_default: bool,
    pub c0_empirical: T,
    pub c_empirical: T,
    pub c0_lower: Option<T>,
    pub c0_lower_label: Option<String>,
    pub min_abs_det_j: T,
    pub homogeneity_residual: T,
    pub covering_radius_estimate: T,
    pub argmin_c0: Vec<T>,
    pub argmax_c: Vec<T>,
    pub argmin_det_j: Vec<T>,
    pub homogeneity_verdict: Check,
    pub nonvanishing_verdict: Check,
    pub jacobian_verdict: Check,
    pub n_verdict: Check,
    pub overall: Verdict,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrema<T> {
    /// Refined minimum of `|f|` on the sphere.
    pub c0: T,
    /// Refined maximum of `|f|` on the sphere.
    pub c_max: T,
    pub argmin: Vec<T>,
    pub argmax: Vec<T>,
    /// Raw sample minimum and maximum, before refinement.
    pub sampled_min: T,
    pub sampled_max: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianCheck<T> {
    pub min_abs_det: T,
    pub argmin: Vec<T>,
    pub verdict: Check,
}

/// Projected gradient descent of `objective` on the unit sphere with
/// Armijo backtracking.
fn refine_on_sphere<T, F, G>(start: &[T], objective: F, gradient: G) -> (Vec<T>, T)
where
    T: Scalar,
    F: Fn(&[T]) -> T,
    G: Fn(&[T]) -> Option<Vec<T>>,
{
    let step_tol = T::scaled_tol(REFINE_STEP_TOL);
    let armijo = T::lit(1e-4);
    let mut w = start.to_vec();
    let mut val = objective(&w);
    let mut alpha = T::one();
    for _ in 0..REFINE_MAX_ITERS {
        if !val.is_finite() {
            break;
        }
        let Some(g) = gradient(&w) else { break };
        let radial = dot(&g, &w);
        let gt: Vec<T> = g.iter().zip(&w).map(|(&gi, &wi)| gi - radial * wi).collect();
        let gnorm = norm(&gt);
        if gnorm == T::zero() || !gnorm.is_finite() {
            break;
        }
        // never move further than ~1 radian in one step
        alpha = alpha.min(T::one() / gnorm);
        let mut accepted = None;
        while alpha * gnorm >= step_tol {
            let trial: Vec<T> = w.iter().zip(&gt).map(|(&wi, &gi)| wi - alpha * gi).collect();
            if let Some(trial) = normalize(&trial) {
                let tv = objective(&trial);
                if tv <= val - armijo * alpha * gnorm * gnorm || tv == T::neg_infinity() {
                    accepted = Some((trial, tv));
                    break;
                }
            }
            alpha = alpha / T::lit(2.0);
        }
        let Some((next, next_val)) = accepted else { break };
        let moved = norm(&sub(&next, &w));
        w = next;
        val = next_val;
        alpha = alpha * T::lit(2.0);
        if moved < step_tol {
            break;
        }
    }
    (w, val)
}

fn indices_by<T: Scalar>(values: &[T], k: usize, largest: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let o = values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal);
        if largest { o.reverse() } else { o }.then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

fn sq_norm_objective<T: Scalar>(m: &MapSpec<T>, w: &[T]) -> T {
    m.eval(w)
        .map(|v| dot(&v, &v))
        .unwrap_or_else(|_| T::infinity())
}

fn sq_norm_gradient<T: Scalar>(m: &MapSpec<T>, w: &[T]) -> Option<Vec<T>> {
    let f = m.eval(w).ok()?;
    let j = m.jacobian(w).ok()?;
    Some(j.entries.transpose_mul_vec(&f).into_iter().map(|x| x + x).collect())
}

/// Minimum and maximum of `|f|` over the sample, then refined by projected
/// gradient descent (ascent) of `|f(ω)|²` from the best sample points.
/// Values are reduced in index order, so the result does not depend on
/// thread scheduling.
pub fn estimate_extrema<T: Scalar>(m: &MapSpec<T>, s: &SphereSample<T>) -> Extrema<T> {
    let values: Vec<T> = s
        .points
        .par_iter()
        .map(|p| m.eval(p).map(|v| norm(&v)).unwrap_or_else(|_| T::nan()))
        .collect();
    let lows = indices_by(&values, REFINE_STARTS, false);
    let highs = indices_by(&values, REFINE_STARTS, true);
    let sampled_min = values[lows[0]];
    let sampled_max = values[highs[0]];

    let (mut c0, mut argmin) = (sampled_min, s.points[lows[0]].clone());
    for &i in &lows {
        let (w, v) = refine_on_sphere(
            &s.points[i],
            |w| sq_norm_objective(m, w),
            |w| sq_norm_gradient(m, w),
        );
        let v = v.max(T::zero()).sqrt();
        if v < c0 {
            c0 = v;
            argmin = w;
        }
    }
    let (mut c_max, mut argmax) = (sampled_max, s.points[highs[0]].clone());
    for &i in &highs {
        let (w, v) = refine_on_sphere(
            &s.points[i],
            |w| {
                let v = sq_norm_objective(m, w);
                if v.is_finite() {
                    -v
                } else {
                    T::infinity()
                }
            },
            |w| sq_norm_gradient(m, w).map(|g| g.into_iter().map(|x| -x).collect()),
        );
        let v = (-v).max(T::zero()).sqrt();
        if v > c_max {
            c_max = v;
            argmax = w;
        }
    }
    Extrema {
        c0,
        c_max,
        argmin,
        argmax,
        sampled_min,
        sampled_max,
    }
}

/// `c0_lower = c0_empirical - L · covering_radius`, floored at zero, where
/// `L` bounds the Lipschitz constant of `|f|` on the sphere.
pub fn certify_c0_lower<T: Scalar>(m: &MapSpec<T>, s: &SphereSample<T>, lipschitz: T) -> Result<T> {
    if !(lipschitz > T::zero()) || !lipschitz.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz bound must be > 0, got {lipschitz}"
        )));
    }
    let c0 = estimate_extrema(m, s).c0;
    Ok((c0 - lipschitz * s.covering_radius_estimate).max(T::zero()))
}

fn log_abs_det<T: Scalar>(m: &MapSpec<T>, w: &[T]) -> T {
    match m.jacobian(w) {
        Ok(j) => j.determinant().abs().ln(),
        Err(_) => T::infinity(),
    }
}

fn log_abs_det_gradient<T: Scalar>(m: &MapSpec<T>, w: &[T]) -> Option<Vec<T>> {
    let h = T::epsilon().cbrt();
    let mut probe = w.to_vec();
    let mut g = Vec::with_capacity(w.len());
    for k in 0..w.len() {
        probe[k] = w[k] + h;
        let up = log_abs_det(m, &probe);
        probe[k] = w[k] - h;
        let down = log_abs_det(m, &probe);
        probe[k] = w[k];
        let d = (up - down) / (h + h);
        if !d.is_finite() {
            return None;
        }
        g.push(d);
    }
    Some(g)
}

/// Minimum of `|det Df|` on the sphere: sampled, then refined by descending
/// `log |det Df|`, which drives the search into zeros of any order.
pub fn check_jacobian_nonvanishing<T: Scalar>(m: &MapSpec<T>, s: &SphereSample<T>) -> JacobianCheck<T> {
    let dets: Vec<T> = s
        .points
        .par_iter()
        .map(|p| {
            m.jacobian(p)
                .map(|j| j.determinant().abs())
                .unwrap_or_else(|_| T::nan())
        })
        .collect();
    let lows = indices_by(&dets, REFINE_STARTS, false);
    let (mut best, mut argmin) = (dets[lows[0]], s.points[lows[0]].clone());
    for &i in &lows {
        let (w, v) = refine_on_sphere(
            &s.points[i],
            |w| log_abs_det(m, w),
            |w| log_abs_det_gradient(m, w),
        );
        let v = v.exp();
        if v < best {
            best = v;
            argmin = w;
        }
    }
    let ok = best > T::scaled_tol(JACOBIAN_TOL) && best.is_finite();
    JacobianCheck {
        min_abs_det: best,
        argmin,
        verdict: Check::from_bool(ok),
    }
}

/// `|f(τω) - τ^κ f(ω)| / (τ^κ max(1, |f(ω)|))`.
pub fn homogeneity_residual_at<T: Scalar>(m: &MapSpec<T>, omega: &[T], tau: T) -> Result<T> {
    let scaled: Vec<T> = omega.iter().map(|&x| x * tau).collect();
    let lhs = m.eval(&scaled)?;
    let base = m.eval(omega)?;
    let tk = tau.powf(m.kappa());
    let rhs: Vec<T> = base.iter().map(|&v| v * tk).collect();
    Ok(norm(&sub(&lhs, &rhs)) / (tk * norm(&base).max(T::one())))
}

/// Largest homogeneity residual over [`HOMOGENEITY_PROBES`] seeded pairs
/// `(ω, τ)` with `|ω| = 1` and `log10 τ` uniform on `[-3, 3]`.
pub fn homogeneity_residual<T: Scalar>(m: &MapSpec<T>, seed: u64) -> T {
    let dirs = sample_sphere::<T>(m.dim(), HOMOGENEITY_PROBES, seed ^ 0x686f_6d6f);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let taus: Vec<T> = (0..dirs.count)
        .map(|_| T::lit(10f64.powf(rng.random_range(-3.0..=3.0))))
        .collect();
    dirs.points
        .iter()
        .zip(&taus)
        .map(|(w, &t)| homogeneity_residual_at(m, w, t).unwrap_or_else(|_| T::infinity()))
        .fold(T::zero(), |a, b| if b.is_nan() { T::infinity() } else { a.max(b) })
}

/// Runs every hypothesis check on `sample_count` sphere points.
pub fn check_hypotheses<T: Scalar>(m: &MapSpec<T>, sample_count: usize, seed: u64) -> HypothesisReport<T> {
    let n = m.dim();
    let s = sample_sphere::<T>(n, sample_count, seed);
    let ext = estimate_extrema(m, &s);
    let jac = check_jacobian_nonvanishing(m, &s);
    let residual = homogeneity_residual(m, seed);

    let c0_lower = m.as_poly().map(|p| p.lipschitz_bound()).and_then(|l| {
        (l > T::zero()).then(|| (ext.c0 - l * s.covering_radius_estimate).max(T::zero()))
    });

    let mut reasons = Vec::new();
    let homogeneity_ok = residual <= T::scaled_tol(HOMOGENEITY_TOL);
    if !homogeneity_ok {
        reasons.push(format!("homogeneity residual {:.3e} exceeds {HOMOGENEITY_TOL:e}", residual.as_f64()));
    }
    let nonvanishing_ok = ext.c0 > T::scaled_tol(JACOBIAN_TOL) && ext.c0.is_finite();
    if !nonvanishing_ok {
        reasons.push(format!("f vanishes on the unit sphere (c0 = {:.3e})", ext.c0.as_f64()));
    }
    if jac.verdict == Check::Fail {
        reasons.push(format!(
            "Jacobian vanishes on the unit sphere (min |det Df| = {:.3e})",
            jac.min_abs_det.as_f64()
        ));
    }
    let n_ok = n >= 3;
    let analytic_ok = homogeneity_ok && nonvanishing_ok && jac.verdict == Check::Pass;
    let overall = match (analytic_ok, n_ok) {
        (true, true) => Verdict::Pass,
        (true, false) => {
            reasons.push(format!("n = {n} < 3: global invertibility is not guaranteed"));
            Verdict::HypothesesMetButLowDimension
        }
        (false, _) => {
            if !n_ok {
                reasons.push(format!("n = {n} < 3"));
            }
            Verdict::Fail
        }
    };

    HypothesisReport {
        n,
        kappa: m.kappa(),
        seed,
        sample_count: s.count,
        sample_count_is_default: sample_count == default_sample_count(n),
        c0_empirical: ext.c0,
        c_empirical: ext.c_max,
        c0_lower_label: c0_lower.map(|_| C0_LOWER_LABEL.to_string()),
        c0_lower,
        min_abs_det_j: jac.min_abs_det,
        homogeneity_residual: residual,
        covering_radius_estimate: s.covering_radius_estimate,
        argmin_c0: ext.argmin,
        argmax_c: ext.argmax,
        argmin_det_j: jac.argmin,
        homogeneity_verdict: Check::from_bool(homogeneity_ok),
        nonvanishing_verdict: Check::from_bool(nonvanishing_ok),
        jacobian_verdict: jac.verdict,
        n_verdict: Check::from_bool(n_ok),
        overall,
        reasons,
    }
}

/// `((|η|/C)^(1/κ), (|η|/c0)^(1/κ))`: every preimage of `η` has norm in this
/// interval because `c0 |ξ|^κ ≤ |f(ξ)| ≤ C |ξ|^κ`.
pub fn coercivity_bracket<T: Scalar>(report: &HypothesisReport<T>, eta: &[T], kappa: T) -> Result<(T, T)> {
    if !(report.c0_empirical > T::zero()) {
        return Err(Error::NoBracket);
    }
    let r = norm(eta);
    let inv = T::one() / kappa;
    Ok(((r / report.c_empirical).powf(inv), (r / report.c0_empirical).powf(inv)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use crate::mapcore::BlackBox;

    #[test]
    fn radial_cube_extrema_are_one() {
        let m = builtins::radial_cube::<f64>();
        let s = sample_sphere(3, 2000, 1);
        let e = estimate_extrema(&m, &s);
        assert!((e.c0 - 1.0).abs() < 1e-6 && (e.c_max - 1.0).abs() < 1e-6);
        let id = builtins::identity::<f64>(3);
        let e = estimate_extrema(&id, &s);
        assert!((e.c0 - 1.0).abs() < 1e-12 && (e.c_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_map_has_zero_lower_bound() {
        let zero = MapSpec::black_box(BlackBox::new(3, 1.0, |_: &[f64]| vec![0.0; 3])).unwrap();
        let s = sample_sphere(3, 500, 2);
        assert_eq!(certify_c0_lower(&zero, &s, 1.0).unwrap(), 0.0);
        assert!(certify_c0_lower(&zero, &s, 0.0).is_err());
        let r = check_hypotheses(&zero, 500, 2);
        assert_eq!(r.overall, Verdict::Fail);
        assert_eq!(r.nonvanishing_verdict, Check::Fail);
    }

    #[test]
    fn square_map_determinant_is_four() {
        let m = builtins::complex_square::<f64>();
        let s = sample_sphere(2, 1000, 3);
        let j = check_jacobian_nonvanishing(&m, &s);
        assert!((j.min_abs_det - 4.0).abs() < 1e-6);
        assert_eq!(j.verdict, Check::Pass);
    }

    #[test]
    fn axis_cube_jacobian_fails() {
        let m = builtins::axis_cube::<f64>();
        let s = sample_sphere(3, 3000, 4);
        let j = check_jacobian_nonvanishing(&m, &s);
        assert_eq!(j.verdict, Check::Fail, "min |det| = {}", j.min_abs_det);
    }

    #[test]
    fn verdicts() {
        let r = check_hypotheses(&builtins::radial_cube::<f64>(), 3000, 9);
        assert_eq!(r.overall, Verdict::Pass);
        assert!(r.reasons.is_empty());
        let r = check_hypotheses(&builtins::complex_square::<f64>(), 2000, 9);
        assert_eq!(r.overall, Verdict::HypothesesMetButLowDimension);
        assert_eq!(r.n_verdict, Check::Fail);
        let r = check_hypotheses(&builtins::axis_cube::<f64>(), 3000, 9);
        assert_eq!(r.overall, Verdict::Fail);
        assert!(r.reasons.iter().any(|s| s.contains("Jacobian")));
    }

    #[test]
    fn brackets() {
        let r = check_hypotheses(&builtins::radial_cube::<f64>(), 2000, 1);
        let (lo, hi) = coercivity_bracket(&r, &[0.0, 8.0, 0.0], 3.0).unwrap();
        assert!((lo - 2.0).abs() < 1e-6 && (hi - 2.0).abs() < 1e-6);
        let r = check_hypotheses(&builtins::identity::<f64>(3), 2000, 1);
        let (lo, hi) = coercivity_bracket(&r, &[3.0, 4.0, 0.0], 1.0).unwrap();
        assert!((lo - 5.0).abs() < 1e-10 && (hi - 5.0).abs() < 1e-10);
        let mut zero = r.clone();
        zero.c0_empirical = 0.0;
        assert_eq!(coercivity_bracket(&zero, &[1.0, 0.0, 0.0], 1.0), Err(Error::NoBracket));
    }

    #[test]
    fn report_serializes_with_snake_case_keys() {
        let r = check_hypotheses(&builtins::complex_square::<f64>(), 200, 1);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["overall"], "hypotheses-met-but-n<3");
        assert_eq!(v["n_verdict"], "fail");
        for key in ["c0_empirical", "c_empirical", "c0_lower", "min_abs_det_j", "homogeneity_residual", "sample_count"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
