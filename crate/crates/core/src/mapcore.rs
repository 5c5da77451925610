//! Representations of positively homogeneous maps `f(τξ) = τ^κ f(ξ)` and
//! their evaluation.
//!
//! Two bodies are supported. A [`PolyMap`] body with an optional radial
//! weight evaluates `|ξ|^(κ-d) P(ξ)`, which covers every real order κ > 0.
//! A [`BlackBox`] body wraps an arbitrary evaluator and differentiates it
//! numerically unless a Jacobian is supplied.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{norm, Matrix};
use crate::poly::PolyMap;
use crate::scalar::Scalar;

pub type EvalFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
pub type JacobianFn<T> = Arc<dyn Fn(&[T]) -> Matrix<T> + Send + Sync>;

/// An opaque evaluator with a declared homogeneity order.
#[derive(Clone)]
pub struct BlackBox<T> {
    n: usize,
    eval: EvalFn<T>,
    jacobian: Option<JacobianFn<T>>,
    declared_kappa: T,
}

impl<T: Scalar> BlackBox<T> {
    pub fn new<F>(n: usize, declared_kappa: T, eval: F) -> Self
    where
        F: Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
    {
        Self {
            n,
            eval: Arc::new(eval),
            jacobian: None,
            declared_kappa,
        }
    }

    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&[T]) -> Matrix<T> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn declared_kappa(&self) -> T {
        self.declared_kappa
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }
}

impl<T: fmt::Debug> fmt::Debug for BlackBox<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBox")
            .field("n", &self.n)
            .field("declared_kappa", &self.declared_kappa)
            .field("jacobian", &self.jacobian.is_some())
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum MapBody<T> {
    Poly(PolyMap<T>),
    BlackBox(BlackBox<T>),
}

/// A positively homogeneous map on `ℝⁿ \ 0`, extended by `f(0) = 0`.
#[derive(Debug, Clone)]
pub struct MapSpec<T> {
    n: usize,
    kappa: T,
    body: MapBody<T>,
    radial_exponent: T,
}

/// `Df` at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianMatrix<T> {
    pub entries: Matrix<T>,
    pub point: Vec<T>,
}

impl<T: Scalar> JacobianMatrix<T> {
    pub fn determinant(&self) -> T {
        self.entries.determinant()
    }
}

fn check_kappa<T: Scalar>(kappa: T) -> Result<()> {
    if kappa > T::zero() && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("kappa must be > 0, got {kappa}")))
    }
}

impl<T: Scalar> MapSpec<T> {
    /// Plain polynomial map; κ equals the polynomial degree.
    pub fn polynomial(p: PolyMap<T>) -> Self {
        Self {
            n: p.dim(),
            kappa: T::lit(p.degree() as f64),
            body: MapBody::Poly(p),
            radial_exponent: T::zero(),
        }
    }

    /// `f(ξ) = |ξ|^(κ-d) P(ξ)`.
    pub fn weighted(p: PolyMap<T>, kappa: T) -> Result<Self> {
        check_kappa(kappa)?;
        let d = T::lit(p.degree() as f64);
        Ok(Self {
            n: p.dim(),
            kappa,
            radial_exponent: kappa - d,
            body: MapBody::Poly(p),
        })
    }

    pub fn black_box(b: BlackBox<T>) -> Result<Self> {
        check_kappa(b.declared_kappa)?;
        if b.n == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(Self {
            n: b.n,
            kappa: b.declared_kappa,
            body: MapBody::BlackBox(b),
            radial_exponent: T::zero(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn radial_exponent(&self) -> T {
        self.radial_exponent
    }

    pub fn body(&self) -> &MapBody<T> {
        &self.body
    }

    pub fn as_poly(&self) -> Option<&PolyMap<T>> {
        match &self.body {
            MapBody::Poly(p) => Some(p),
            MapBody::BlackBox(_) => None,
        }
    }

    fn validate(&self, xi: &[T]) -> Result<()> {
        if xi.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "expected a vector of length {}, got {}",
                self.n,
                xi.len()
            )));
        }
        if xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite component".into()));
        }
        Ok(())
    }

    fn radial_weight(&self, r: T) -> T {
        if self.radial_exponent == T::zero() {
            T::one()
        } else {
            r.powf(self.radial_exponent)
        }
    }

    /// Evaluates `f(ξ)`; the origin maps to the origin.
    pub fn eval(&self, xi: &[T]) -> Result<Vec<T>> {
        self.validate(xi)?;
        if xi.iter().all(|&x| x == T::zero()) {
            return Ok(self.extend_at_origin());
        }
        let out = match &self.body {
            MapBody::Poly(p) => {
                let w = self.radial_weight(norm(xi));
                p.eval(xi).into_iter().map(|v| v * w).collect()
            }
            MapBody::BlackBox(b) => (b.eval)(xi),
        };
        if out.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "evaluator returned {} components, expected {}",
                out.len(),
                self.n
            )));
        }
        Ok(out)
    }

    /// `Df(ξ)` for `ξ ≠ 0`.
    ///
    /// Polynomial bodies are differentiated exactly with the product rule
    /// `D(|ξ|^r P) = |ξ|^r DP + r |ξ|^(r-2) P ξᵀ`. Black boxes without a
    /// supplied Jacobian use central differences with step
    /// `ε^(1/3) · max(1, |ξ|)`.
    pub fn jacobian(&self, xi: &[T]) -> Result<JacobianMatrix<T>> {
        self.validate(xi)?;
        if xi.iter().all(|&x| x == T::zero()) {
            return Err(Error::UndefinedAtOrigin);
        }
        let entries = match &self.body {
            MapBody::Poly(p) => {
                let dp = p.jacobian(xi);
                let r = self.radial_exponent;
                if r == T::zero() {
                    dp
                } else {
                    let rho = norm(xi);
                    let w = rho.powf(r);
                    let dw = r * rho.powf(r - T::lit(2.0));
                    let pv = p.eval(xi);
                    let mut m = dp.scaled(w);
                    for i in 0..self.n {
                        for j in 0..self.n {
                            m[(i, j)] = m[(i, j)] + dw * pv[i] * xi[j];
                        }
                    }
                    m
                }
            }
            MapBody::BlackBox(b) => match &b.jacobian {
                Some(j) => j(xi),
                None => self.central_differences(xi)?,
            },
        };
        Ok(JacobianMatrix {
            entries,
            point: xi.to_vec(),
        })
    }

    fn central_differences(&self, xi: &[T]) -> Result<Matrix<T>> {
        let h = T::epsilon().cbrt() * norm(xi).max(T::one());
        let two_h = h + h;
        let mut m = Matrix::zeros(self.n);
        let mut probe = xi.to_vec();
        for j in 0..self.n {
            probe[j] = xi[j] + h;
            let fp = self.eval(&probe)?;
            probe[j] = xi[j] - h;
            let fm = self.eval(&probe)?;
            probe[j] = xi[j];
            for i in 0..self.n {
                m[(i, j)] = (fp[i] - fm[i]) / two_h;
            }
        }
        Ok(m)
    }

    /// The value assigned at the origin. The extension is continuous since
    /// `|f(ξ)| ≤ C |ξ|^κ` with `C` the maximum of `|f|` on the unit sphere.
    pub fn extend_at_origin(&self) -> Vec<T> {
        vec![T::zero(); self.n]
    }
}

pub fn eval_map<T: Scalar>(m: &MapSpec<T>, xi: &[T]) -> Result<Vec<T>> {
    m.eval(xi)
}

pub fn eval_jacobian<T: Scalar>(m: &MapSpec<T>, xi: &[T]) -> Result<JacobianMatrix<T>> {
    m.jacobian(xi)
}

pub fn extend_at_origin<T: Scalar>(m: &MapSpec<T>) -> Vec<T> {
    m.extend_at_origin()
}
