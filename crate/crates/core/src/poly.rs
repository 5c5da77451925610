//! Homogeneous polynomial vector maps with term-wise symbolic Jacobians.

use std::cmp::Ordering;

use serde::Serialize;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term<T> {
    pub coeff: T,
    pub exponents: Vec<u32>,
}

impl<T: Scalar> Term<T> {
    pub fn new(coeff: T, exponents: Vec<u32>) -> Self {
        Self { coeff, exponents }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.exponents
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .fold(self.coeff, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }
}

/// Graded-lexicographic order, largest monomial first.
fn grlex_desc(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    db.cmp(&da).then_with(|| b.cmp(a))
}

/// A polynomial in canonical form: terms sorted by grlex, like terms merged,
/// zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial<T> {
    terms: Vec<Term<T>>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn from_terms(mut terms: Vec<Term<T>>) -> Self {
        terms.sort_by(|a, b| grlex_desc(&a.exponents, &b.exponents));
        let mut merged: Vec<Term<T>> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.exponents == t.exponents => last.coeff = last.coeff + t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != T::zero());
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.terms.iter().fold(T::zero(), |acc, t| acc + t.eval(x))
    }

    /// Term-wise partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exponents[var] > 0)
            .map(|t| {
                let mut e = t.exponents.clone();
                let k = e[var];
                e[var] -= 1;
                Term::new(t.coeff * T::lit(k as f64), e)
            })
            .collect();
        Self::from_terms(terms)
    }
}

/// A monomial that does not have the map's common degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffendingMonomial {
    /// 0-based component index.
    pub component: usize,
    pub exponents: Vec<u32>,
    pub degree: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityVerdict {
    pub homogeneous: bool,
    pub degree: Option<u32>,
    pub offending: Vec<OffendingMonomial>,
}

/// Exact homogeneity test: every monomial of every component must have total
/// degree `expected`, or the degree of the first monomial when `expected` is
/// `None`.
pub fn check_homogeneity_symbolic<T: Scalar>(
    components: &[Vec<Term<T>>],
    expected: Option<u32>,
) -> HomogeneityVerdict {
    let degree = expected.or_else(|| components.iter().flatten().next().map(Term::degree));
    let mut offending = Vec::new();
    if let Some(d) = degree {
        for (c, terms) in components.iter().enumerate() {
            for t in terms {
                if t.degree() != d {
                    offending.push(OffendingMonomial {
                        component: c,
                        exponents: t.exponents.clone(),
                        degree: t.degree(),
                    });
                }
            }
        }
    }
    HomogeneityVerdict {
        homogeneous: offending.is_empty() && degree.is_some_and(|d| d >= 1),
        degree,
        offending,
    }
}

/// A vector map `P: ℝⁿ → ℝⁿ` whose components are homogeneous polynomials of
/// one common degree `d ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap<T> {
    n: usize,
    degree: u32,
    components: Vec<Polynomial<T>>,
    jacobian: Vec<Vec<Polynomial<T>>>,
}

impl<T: Scalar> PolyMap<T> {
    /// Builds a map from raw per-component term lists. Fails with the
    /// homogeneity verdict if any monomial has the wrong degree or arity.
    pub fn new(
        n: usize,
        degree: u32,
        components: Vec<Vec<Term<T>>>,
    ) -> Result<Self, HomogeneityVerdict> {
        let verdict = check_homogeneity_symbolic(&components, Some(degree));
        let arity_ok = components.len() == n
            && components.iter().flatten().all(|t| t.exponents.len() == n);
        if !verdict.homogeneous || !arity_ok {
            return Err(HomogeneityVerdict {
                homogeneous: false,
                ..verdict
            });
        }
        let components: Vec<Polynomial<T>> =
            components.into_iter().map(Polynomial::from_terms).collect();
        let jacobian = components
            .iter()
            .map(|p| (0..n).map(|j| p.derivative(j)).collect())
            .collect();
        Ok(Self {
            n,
            degree,
            components,
            jacobian,
        })
    }

    /// The linear map `ξ ↦ Aξ`.
    pub fn linear(a: &Matrix<T>) -> Self {
        let n = a.dim();
        let comps = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut e = vec![0; n];
                        e[j] = 1;
                        Term::new(a[(i, j)], e)
                    })
                    .collect()
            })
            .collect();
        Self::new(n, 1, comps).expect("linear map is homogeneous of degree 1")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn components(&self) -> &[Polynomial<T>] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn verify_homogeneity(&self) -> HomogeneityVerdict {
        let raw: Vec<Vec<Term<T>>> = self.components.iter().map(|p| p.terms.clone()).collect();
        check_homogeneity_symbolic(&raw, Some(self.degree))
    }

    pub fn eval(&self, x: &[T]) -> Vec<T> {
        self.components.iter().map(|p| p.eval(x)).collect()
    }

    pub fn jacobian(&self, x: &[T]) -> Matrix<T> {
        let rows: Vec<Vec<T>> = self
            .jacobian
            .iter()
            .map(|row| row.iter().map(|p| p.eval(x)).collect())
            .collect();
        Matrix::from_rows(&rows)
    }

    /// Conservative Lipschitz bound for the map on the closed unit ball:
    /// `Σ |coefficient| · d` over all monomials.
    pub fn lipschitz_bound(&self) -> T {
        let d = T::lit(self.degree as f64);
        self.components
            .iter()
            .flat_map(|p| p.terms.iter())
            .fold(T::zero(), |acc, t| acc + t.coeff.abs() * d)
    }
}
