//! Newton iterations for `f(ξ) = target`.

use crate::linalg::{norm, sub, Lu};
use crate::mapcore::MapSpec;
use crate::scalar::Scalar;

/// Relative threshold on `|det Df| / Π‖row‖` below which a Jacobian is
/// treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct NewtonOutcome<T> {
    pub x: Vec<T>,
    pub residual: T,
    pub iters: usize,
    pub converged: bool,
}

/// Factorizes `Df(x)`; `None` when the map cannot be differentiated there or
/// the Jacobian is numerically singular.
pub fn factor_jacobian<T: Scalar>(m: &MapSpec<T>, x: &[T]) -> Option<Lu<T>> {
    let j = m.jacobian(x).ok()?.entries;
    let scale = j.row_norm_product();
    let lu = j.lu();
    let det = lu.determinant().abs();
    if lu.is_singular() || !(det > T::scaled_tol(SINGULAR_TOL) * scale) {
        None
    } else {
        Some(lu)
    }
}

pub fn residual<T: Scalar>(m: &MapSpec<T>, x: &[T], target: &[T]) -> T {
    match m.eval(x) {
        Ok(v) => norm(&sub(&v, target)),
        Err(_) => T::infinity(),
    }
}

/// Plain Newton. Fails as soon as the residual stops decreasing, which the
/// continuation treats as a signal to shorten its step.
pub fn newton_corrector<T: Scalar>(
    m: &MapSpec<T>,
    x0: &[T],
    target: &[T],
    tol: T,
    max_iter: usize,
) -> NewtonOutcome<T> {
    let mut x = x0.to_vec();
    let mut r = residual(m, &x, target);
    let mut iters = 0;
    while r > tol && iters < max_iter {
        let Some(lu) = factor_jacobian(m, &x) else { break };
        let f = m.eval(&x).expect("finite iterate");
        let Some(d) = lu.solve(&sub(&f, target)) else { break };
        let next: Vec<T> = x.iter().zip(&d).map(|(&a, &b)| a - b).collect();
        let rn = residual(m, &next, target);
        iters += 1;
        if !(rn < r) {
            break;
        }
        x = next;
        r = rn;
    }
    NewtonOutcome {
        converged: r <= tol,
        x,
        residual: r,
        iters,
    }
}

/// Newton with backtracking on `|f(x) - target|`, for cold starts.
pub fn damped_newton<T: Scalar>(
    m: &MapSpec<T>,
    x0: &[T],
    target: &[T],
    tol: T,
    max_iter: usize,
) -> NewtonOutcome<T> {
    let mut x = x0.to_vec();
    let mut r = residual(m, &x, target);
    let mut iters = 0;
    let half = T::lit(0.5);
    let c = T::lit(1e-4);
    while r > tol && iters < max_iter {
        iters += 1;
        let Some(lu) = factor_jacobian(m, &x) else { break };
        let f = m.eval(&x).expect("finite iterate");
        let Some(d) = lu.solve(&sub(&f, target)) else { break };
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let next: Vec<T> = x.iter().zip(&d).map(|(&a, &b)| a - lambda * b).collect();
            let rn = residual(m, &next, target);
            if rn <= (T::one() - c * lambda) * r {
                x = next;
                r = rn;
                accepted = true;
                break;
            }
            lambda = lambda * half;
        }
        if !accepted {
            // no further descent at working precision
            break;
        }
    }
    NewtonOutcome {
        converged: r <= tol,
        x,
        residual: r,
        iters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    #[test]
    fn damped_newton_finds_square_roots() {
        let m = builtins::complex_square::<f64>();
        let out = damped_newton(&m, &[0.3, 0.2], &[1.0, 0.0], 1e-13, 100);
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-12 && out.x[1].abs() < 1e-12);
        let out = damped_newton(&m, &[-2.0, -0.1], &[1.0, 0.0], 1e-13, 100);
        assert!((out.x[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_points_are_refused() {
        let m = builtins::axis_cube::<f64>();
        assert!(factor_jacobian(&m, &[1.0, 0.0, 0.0]).is_none());
        assert!(factor_jacobian(&m, &[1.0, 1.0, 1.0]).is_some());
    }
}
