//! Origin-avoiding target paths for continuation.
//!
//! The magnitude is interpolated geometrically and the direction along a
//! great circle, so `|γ(t)|` stays between the endpoint magnitudes and the
//! path never meets the origin.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, normalize};
use crate::scalar::Scalar;

/// Directions closer than this to antipodal get an explicit waypoint.
pub const ANTIPODAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlerpPath<T> {
    start_norm: T,
    log_ratio: T,
    u0: Vec<T>,
    /// Unit vector orthogonal to `u0` spanning the great circle.
    v: Vec<T>,
    angle: T,
    waypoint: Option<Vec<T>>,
}

/// A unit vector orthogonal to `u`, from the coordinate axis least aligned
/// with it.
fn orthogonal_to<T: Scalar>(u: &[T]) -> Vec<T> {
    let k = (0..u.len())
        .min_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    let mut e = vec![T::zero(); u.len()];
    e[k] = T::one();
    let c = dot(&e, u);
    let w: Vec<T> = e.iter().zip(u).map(|(&ei, &ui)| ei - c * ui).collect();
    normalize(&w).unwrap_or(e)
}

impl<T: Scalar> SlerpPath<T> {
    pub fn new(eta0: &[T], eta: &[T]) -> Result<Self> {
        if eta0.len() != eta.len() {
            return Err(Error::InvalidInput("path endpoints differ in dimension".into()));
        }
        let (Some(u0), Some(u1)) = (normalize(eta0), normalize(eta)) else {
            return Err(Error::InvalidInput("path endpoints must be nonzero".into()));
        };
        let (r0, r1) = (norm(eta0), norm(eta));
        let sum: Vec<T> = u0.iter().zip(&u1).map(|(&a, &b)| a + b).collect();
        let (v, angle, waypoint) = if norm(&sum) < T::scaled_tol(ANTIPODAL_TOL) {
            // antipodal: route through a waypoint orthogonal to both ends,
            // reached at t = 1/2
            let w = orthogonal_to(&u0);
            (w.clone(), T::lit(std::f64::consts::PI), Some(w))
        } else {
            let c = dot(&u0, &u1);
            let perp: Vec<T> = u1.iter().zip(&u0).map(|(&b, &a)| b - c * a).collect();
            let s = norm(&perp);
            let v = normalize(&perp).unwrap_or_else(|| orthogonal_to(&u0));
            (v, s.atan2(c), None)
        };
        Ok(Self {
            start_norm: r0,
            log_ratio: (r1 / r0).ln(),
            u0,
            v,
            angle,
            waypoint,
        })
    }

    pub fn waypoint(&self) -> Option<&[T]> {
        self.waypoint.as_deref()
    }

    fn magnitude(&self, t: T) -> T {
        self.start_norm * (t * self.log_ratio).exp()
    }

    fn direction(&self, t: T) -> Vec<T> {
        let (s, c) = (t * self.angle).sin_cos();
        self.u0.iter().zip(&self.v).map(|(&a, &b)| c * a + s * b).collect()
    }

    pub fn point(&self, t: T) -> Vec<T> {
        let m = self.magnitude(t);
        self.direction(t).into_iter().map(|x| m * x).collect()
    }

    /// `γ'(t)`.
    pub fn tangent(&self, t: T) -> Vec<T> {
        let m = self.magnitude(t);
        let (s, c) = (t * self.angle).sin_cos();
        self.u0
            .iter()
            .zip(&self.v)
            .map(|(&a, &b)| {
                let dir = c * a + s * b;
                let ddir = self.angle * (c * b - s * a);
                m * (self.log_ratio * dir + ddir)
            })
            .collect()
    }
}

/// `γ(t)` for the path from `eta0` to `eta`.
pub fn slerp_path<T: Scalar>(eta0: &[T], eta: &[T], t: T) -> Result<Vec<T>> {
    Ok(SlerpPath::new(eta0, eta)?.point(t))
}
