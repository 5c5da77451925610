//! Global inversion by homogeneity reduction and path lifting.
//!
//! To solve `f(ξ) = η` the target is reduced to the unit direction
//! `ω = η/|η|`. A seed `ξ₀` on the sphere is chosen whose image points
//! roughly towards `ω`, and the solution of `f(ξ) = γ(t)` is tracked along the
//! origin-avoiding path `γ` from `f(ξ₀)` to `ω` with an Euler predictor and a
//! Newton corrector. The unit preimage is finally rescaled by
//! `|η|^(1/κ)`. Off the origin an admissible map is a covering map, so the
//! lift of `γ` exists and is unique.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypotheses::{coercivity_bracket, HypothesisReport, Verdict};
use crate::linalg::{dot, norm, normalize, sub, Matrix};
use crate::mapcore::MapSpec;
use crate::newton::{factor_jacobian, newton_corrector, residual};
use crate::path::SlerpPath;
use crate::scalar::Scalar;
use crate::sphere::sample_sphere;

/// Upper bound on the number of sphere points scanned for seeds.
pub const SEED_POOL: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationConfig<T> {
    /// Target residual, relative to `max(1, |η|)`.
    pub tol: T,
    /// Initial (and largest) step in the path parameter.
    pub initial_step: T,
    pub min_step: T,
    pub max_newton: usize,
    pub seed_attempts: usize,
    /// Run even when the hypothesis report does not pass.
    pub force: bool,
    /// Record the lifted path.
    pub trace: bool,
}

impl<T: Scalar> Default for ContinuationConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::scaled_tol(1e-10),
            initial_step: T::lit(0.1),
            min_step: T::lit(1e-8),
            max_newton: 20,
            seed_attempts: 16,
            force: false,
            trace: false,
        }
    }
}

impl<T: Scalar> ContinuationConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tol > T::zero()
            && self.min_step > T::zero()
            && self.min_step <= self.initial_step
            && self.initial_step <= T::one()
            && self.max_newton > 0
            && self.seed_attempts > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "continuation config requires 0 < min_step <= initial_step <= 1, tol > 0 and nonzero iteration budgets: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Waypoint<T> {
    pub t: T,
    pub gamma: Vec<T>,
    pub xi: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionResult<T> {
    pub target: Vec<T>,
    pub xi: Vec<T>,
    pub residual: T,
    pub steps: usize,
    pub newton_iters_total: usize,
    /// `(r_lo, r_hi)`; absent when `c0 = 0` and the run was forced.
    pub bracket: Option<(T, T)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_waypoints: Option<Vec<Waypoint<T>>>,
}

struct Seed<T> {
    point: Vec<T>,
    image: Vec<T>,
    direction: Vec<T>,
}

struct Lift<T> {
    xi: Vec<T>,
    steps: usize,
    newton: usize,
    waypoints: Vec<Waypoint<T>>,
}

/// Inverts one map repeatedly; holds the seed pool.
pub struct Inverter<'a, T> {
    map: &'a MapSpec<T>,
    report: &'a HypothesisReport<T>,
    cfg: ContinuationConfig<T>,
    seeds: Vec<Seed<T>>,
}

impl<'a, T: Scalar> Inverter<'a, T> {
    /// Fails with a precondition error unless the report passes or
    /// `cfg.force` is set.
    pub fn new(map: &'a MapSpec<T>, report: &'a HypothesisReport<T>, cfg: ContinuationConfig<T>) -> Result<Self> {
        cfg.validate()?;
        if report.n != map.dim() {
            return Err(Error::Precondition(format!(
                "report is for n = {}, map has n = {}",
                report.n,
                map.dim()
            )));
        }
        if report.overall != Verdict::Pass && !cfg.force {
            let why = if report.reasons.is_empty() {
                "hypothesis check did not pass".to_string()
            } else {
                report.reasons.join("; ")
            };
            return Err(Error::Precondition(why));
        }
        let pool = sample_sphere::<T>(map.dim(), report.sample_count.clamp(1, SEED_POOL), report.seed);
        let seeds = pool
            .points
            .into_par_iter()
            .filter_map(|p| {
                let image = map.eval(&p).ok()?;
                let direction = normalize(&image)?;
                Some(Seed {
                    point: p,
                    image,
                    direction,
                })
            })
            .collect();
        Ok(Self {
            map,
            report,
            cfg,
            seeds,
        })
    }

    pub fn config(&self) -> &ContinuationConfig<T> {
        &self.cfg
    }

    fn validate_target(&self, eta: &[T]) -> Result<()> {
        if eta.len() != self.map.dim() {
            return Err(Error::InvalidInput(format!(
                "target has length {}, expected {}",
                eta.len(),
                self.map.dim()
            )));
        }
        if eta.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite target component".into()));
        }
        Ok(())
    }

    /// Computes `f⁻¹(η)`.
    pub fn invert(&self, eta: &[T]) -> Result<InversionResult<T>> {
        self.validate_target(eta)?;
        let n = self.map.dim();
        let r = norm(eta);
        if r == T::zero() {
            return Ok(InversionResult {
                target: eta.to_vec(),
                xi: vec![T::zero(); n],
                residual: T::zero(),
                steps: 0,
                newton_iters_total: 0,
                bracket: Some((T::zero(), T::zero())),
                path_waypoints: self.cfg.trace.then(Vec::new),
            });
        }
        let omega: Vec<T> = eta.iter().map(|&x| x / r).collect();
        let lift = self.invert_unit(&omega)?;
        let s = r.powf(T::one() / self.map.kappa());
        let xi: Vec<T> = lift.xi.iter().map(|&x| x * s).collect();
        let res = residual(self.map, &xi, eta);
        let allowed = self.cfg.tol * r.max(T::one());
        if !(res <= allowed) {
            return Err(Error::ContinuationFailed {
                t: 1.0,
                xi: xi.iter().map(|x| x.as_f64()).collect(),
                reason: format!("final residual {res} exceeds {allowed}"),
            });
        }
        let waypoints = self.cfg.trace.then(|| {
            lift.waypoints
                .into_iter()
                .map(|w| Waypoint {
                    t: w.t,
                    gamma: w.gamma.iter().map(|&g| g * r).collect(),
                    xi: w.xi.iter().map(|&x| x * s).collect(),
                })
                .collect()
        });
        Ok(InversionResult {
            target: eta.to_vec(),
            xi,
            residual: res,
            steps: lift.steps,
            newton_iters_total: lift.newton,
            bracket: coercivity_bracket(self.report, eta, self.map.kappa()).ok(),
            path_waypoints: waypoints,
        })
    }

    /// Inverts a batch concurrently; results keep input order.
    pub fn invert_batch(&self, etas: &[Vec<T>]) -> Vec<Result<InversionResult<T>>> {
        etas.par_iter().map(|e| self.invert(e)).collect()
    }

    /// Preimage of a unit vector `ω`, trying seeds in order of image
    /// alignment with `ω`.
    fn invert_unit(&self, omega: &[T]) -> Result<Lift<T>> {
        let mut order: Vec<(T, usize)> = self
            .seeds
            .iter()
            .enumerate()
            .map(|(i, s)| (dot(&s.direction, omega), i))
            .collect();
        order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
        let mut last_err = Error::ContinuationFailed {
            t: 0.0,
            xi: Vec::new(),
            reason: "no usable seed points".into(),
        };
        for &(_, i) in order.iter().take(self.cfg.seed_attempts) {
            match self.track(&self.seeds[i], omega) {
                Ok(l) => return Ok(l),
                Err(e) => last_err = e,
            }
        }
        Err(last_err)
    }

    fn track(&self, seed: &Seed<T>, omega: &[T]) -> Result<Lift<T>> {
        let cfg = &self.cfg;
        let m = self.map;
        let path = SlerpPath::new(&seed.image, omega)?;
        let two = T::lit(2.0);
        let corrector_tol = cfg.tol * T::lit(1e2);
        let mut xi = seed.point.clone();
        let mut t = T::zero();
        let mut h = cfg.initial_step;
        let mut streak = 0usize;
        let (mut steps, mut newton) = (0usize, 0usize);
        let mut waypoints = Vec::new();
        if cfg.trace {
            waypoints.push(Waypoint {
                t,
                gamma: seed.image.clone(),
                xi: xi.clone(),
            });
        }
        let fail = |t: T, xi: &[T], reason: String| Error::ContinuationFailed {
            t: t.as_f64(),
            xi: xi.iter().map(|x| x.as_f64()).collect(),
            reason,
        };

        while t < T::one() {
            let lu = factor_jacobian(m, &xi).ok_or_else(|| Error::SingularJacobian {
                point: xi.iter().map(|x| x.as_f64()).collect(),
            })?;
            let dxi = lu
                .solve(&path.tangent(t))
                .ok_or_else(|| fail(t, &xi, "predictor solve failed".into()))?;
            let step = h.min(T::one() - t);
            let t_next = if step >= T::one() - t { T::one() } else { t + step };
            let predicted: Vec<T> = xi.iter().zip(&dxi).map(|(&x, &d)| x + step * d).collect();
            let gamma = path.point(t_next);
            let out = newton_corrector(m, &predicted, &gamma, corrector_tol * norm(&gamma), cfg.max_newton);
            newton += out.iters;
            // a large correction means the predictor left the local sheet
            let jump = norm(&sub(&out.x, &predicted)) > T::lit(0.25) * norm(&predicted);
            if out.converged && !jump {
                xi = out.x;
                t = t_next;
                steps += 1;
                if cfg.trace {
                    waypoints.push(Waypoint {
                        t,
                        gamma,
                        xi: xi.clone(),
                    });
                }
                if out.iters <= 3 {
                    streak += 1;
                    if streak >= 3 {
                        h = (h * two).min(cfg.initial_step);
                        streak = 0;
                    }
                } else {
                    streak = 0;
                }
            } else {
                h = h / two;
                streak = 0;
                if h < cfg.min_step {
                    return Err(fail(t, &xi, format!("step size fell below {}", cfg.min_step)));
                }
            }
        }

        // polish at the endpoint until the residual stagnates
        let polished = newton_corrector(m, &xi, omega, cfg.tol * T::lit(1e-2), cfg.max_newton);
        newton += polished.iters;
        let xi = polished.x;
        if !(polished.residual <= cfg.tol) {
            return Err(fail(t, &xi, format!("endpoint residual {} above tolerance", polished.residual)));
        }
        Ok(Lift {
            xi,
            steps,
            newton,
            waypoints,
        })
    }
}

/// One-shot `f⁻¹(η)`. Builds the seed pool on every call; use [`Inverter`]
/// for repeated inversions of the same map.
pub fn invert<T: Scalar>(
    m: &MapSpec<T>,
    eta: &[T],
    cfg: &ContinuationConfig<T>,
    report: &HypothesisReport<T>,
) -> Result<InversionResult<T>> {
    Inverter::new(m, report, cfg.clone())?.invert(eta)
}

/// `D(f⁻¹)(f(ξ)) = (Df(ξ))⁻¹`.
pub fn inverse_jacobian<T: Scalar>(m: &MapSpec<T>, xi: &[T]) -> Result<Matrix<T>> {
    let lu = factor_jacobian(m, xi).ok_or_else(|| Error::SingularJacobian {
        point: xi.iter().map(|x| x.as_f64()).collect(),
    })?;
    lu.inverse().ok_or_else(|| Error::SingularJacobian {
        point: xi.iter().map(|x| x.as_f64()).collect(),
    })
}

/// `max_τ |f⁻¹(τη) - τ^(1/κ) f⁻¹(η)| / (τ^(1/κ) |f⁻¹(η)|)`.
pub fn inverse_homogeneity_check<T: Scalar>(
    m: &MapSpec<T>,
    eta: &[T],
    taus: &[T],
    cfg: &ContinuationConfig<T>,
    report: &HypothesisReport<T>,
) -> Result<T> {
    if norm(eta) == T::zero() {
        return Err(Error::InvalidInput("inverse homogeneity needs eta != 0".into()));
    }
    let inv = Inverter::new(m, report, cfg.clone())?;
    let base = inv.invert(eta)?.xi;
    let base_norm = norm(&base);
    let p = T::one() / m.kappa();
    let mut worst = T::zero();
    for &tau in taus {
        if !(tau > T::zero()) {
            return Err(Error::InvalidParameter(format!("tau must be > 0, got {tau}")));
        }
        let scaled: Vec<T> = eta.iter().map(|&x| x * tau).collect();
        let xi = inv.invert(&scaled)?.xi;
        let tp = tau.powf(p);
        let expect: Vec<T> = base.iter().map(|&x| x * tp).collect();
        worst = worst.max(norm(&sub(&xi, &expect)) / (tp * base_norm));
    }
    Ok(worst)
}

/// `max_η |f(f⁻¹(η)) - η| / |η|` over nonzero targets.
pub fn roundtrip_check<T: Scalar>(
    m: &MapSpec<T>,
    etas: &[Vec<T>],
    cfg: &ContinuationConfig<T>,
    report: &HypothesisReport<T>,
) -> Result<T> {
    let inv = Inverter::new(m, report, cfg.clone())?;
    let mut worst = T::zero();
    for (eta, res) in etas.iter().zip(inv.invert_batch(etas)) {
        let r = norm(eta);
        if r == T::zero() {
            continue;
        }
        let xi = res?.xi;
        worst = worst.max(residual(m, &xi, eta) / r);
    }
    Ok(worst)
}
