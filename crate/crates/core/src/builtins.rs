//! Reference maps used by the test suites, the acceptance harness and the
//! shipped map files.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{norm, Matrix};
use crate::mapcore::{BlackBox, MapSpec};
use crate::poly::{PolyMap, Term};
use crate::scalar::Scalar;

fn diag<T: Scalar>(d: &[f64]) -> Matrix<T> {
    let mut m = Matrix::zeros(d.len());
    for (i, &v) in d.iter().enumerate() {
        m[(i, i)] = T::lit(v);
    }
    m
}

fn mono(n: usize, pairs: &[(usize, u32)]) -> Vec<u32> {
    let mut e = vec![0; n];
    for &(i, k) in pairs {
        e[i] += k;
    }
    e
}

pub fn identity<T: Scalar>(n: usize) -> MapSpec<T> {
    MapSpec::polynomial(PolyMap::linear(&Matrix::identity(n)))
}

/// `f(ξ) = |ξ|² ξ` on ℝ³, κ = 3.
pub fn radial_cube<T: Scalar>() -> MapSpec<T> {
    MapSpec::weighted(PolyMap::linear(&Matrix::identity(3)), T::lit(3.0)).expect("kappa > 0")
}

/// `f(ξ) = Dξ` for a diagonal `D`.
pub fn diagonal_linear<T: Scalar>(d: &[f64]) -> MapSpec<T> {
    MapSpec::polynomial(PolyMap::linear(&diag(d)))
}

/// `f(ξ) = |ξ|^(κ-1) Dξ` for a diagonal `D`.
pub fn radial_linear<T: Scalar>(d: &[f64], kappa: f64) -> MapSpec<T> {
    MapSpec::weighted(PolyMap::linear(&diag(d)), T::lit(kappa)).expect("kappa > 0")
}

/// `f(x, y) = (x² - y², 2xy)`: nonvanishing Jacobian off the origin, but
/// two-to-one.
pub fn complex_square<T: Scalar>() -> MapSpec<T> {
    let comps = vec![
        vec![
            Term::new(T::one(), vec![2, 0]),
            Term::new(-T::one(), vec![0, 2]),
        ],
        vec![Term::new(T::lit(2.0), vec![1, 1])],
    ];
    MapSpec::polynomial(PolyMap::new(2, 2, comps).expect("homogeneous"))
}

/// `(x1³, x2³, x3³)`: homogeneous, but `det Df = 27 x1² x2² x3²` vanishes on
/// the coordinate planes.
pub fn axis_cube<T: Scalar>() -> MapSpec<T> {
    let comps = (0..3)
        .map(|i| vec![Term::new(T::one(), mono(3, &[(i, 3)]))])
        .collect();
    MapSpec::polynomial(PolyMap::new(3, 3, comps).expect("homogeneous"))
}

/// `(-x1, x2, x3)`, orientation reversing.
pub fn reflection<T: Scalar>() -> MapSpec<T> {
    diagonal_linear(&[-1.0, 1.0, 1.0])
}

/// `(x1³ + x1 x2², x2³ + x2 x3², x3³)`; its Jacobian is upper triangular
/// with determinant `(3x1² + x2²)(3x2² + x3²) 3x3²`, zero on `x3 = 0`.
pub fn triangular_cubic<T: Scalar>() -> MapSpec<T> {
    let one = T::one();
    let comps = vec![
        vec![
            Term::new(one, mono(3, &[(0, 3)])),
            Term::new(one, mono(3, &[(0, 1), (1, 2)])),
        ],
        vec![
            Term::new(one, mono(3, &[(1, 3)])),
            Term::new(one, mono(3, &[(1, 1), (2, 2)])),
        ],
        vec![Term::new(one, mono(3, &[(2, 3)]))],
    ];
    MapSpec::polynomial(PolyMap::new(3, 3, comps).expect("homogeneous"))
}

/// `|ξ|² ξ + (0.01, 0, …)` posing as a κ = 3 map. Not homogeneous.
pub fn perturbed_radial_cube<T: Scalar>() -> MapSpec<T> {
    let shift = T::lit(0.01);
    let bb = BlackBox::new(3, T::lit(3.0), move |x: &[T]| {
        let r = norm(x);
        let mut out: Vec<T> = x.iter().map(|&v| r * r * v).collect();
        out[0] = out[0] + shift;
        out
    });
    MapSpec::black_box(bb).expect("kappa > 0")
}

/// Order of the weighted random maps from [`random_admissible`].
pub const RANDOM_ADMISSIBLE_KAPPA: f64 = 2.5;

/// A seeded random cubic map with radial weight, `κ = 2.5`:
/// `f(ξ) = |ξ|^(-1/2) (|ξ|² Aξ + Q(ξ))`.
///
/// `A = I + 0.1 R` with `R` entries in `[-1, 1]`, so `σ_min(A) ≥ 1 - 0.1 n`.
/// `D(|ξ|² Aξ) = A(|ξ|² I + 2ξξᵀ)` has smallest singular value at least
/// `σ_min(A)` on the sphere. `Q` holds three cubic monomials per component
/// with coefficients in `[-0.02, 0.02]`, giving `‖DQ‖ ≤ 0.18 √n`. For
/// `n ≤ 4` the perturbation cannot close the gap, so `det Df ≠ 0` off the
/// origin.
pub fn random_admissible<T: Scalar>(n: usize, seed: u64) -> MapSpec<T> {
    assert!((1..=4).contains(&n), "admissibility margin holds for n <= 4");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| f64::from(u8::from(i == j)) + 0.1 * rng.random_range(-1.0..1.0))
                .collect()
        })
        .collect();
    let comps = (0..n)
        .map(|i| {
            let mut terms = Vec::new();
            for (j, &aij) in a[i].iter().enumerate() {
                for k in 0..n {
                    terms.push(Term::new(T::lit(aij), mono(n, &[(k, 2), (j, 1)])));
                }
            }
            for _ in 0..3 {
                let vars: Vec<(usize, u32)> = (0..3).map(|_| (rng.random_range(0..n), 1)).collect();
                terms.push(Term::new(T::lit(rng.random_range(-0.02..0.02)), mono(n, &vars)));
            }
            terms
        })
        .collect();
    let p = PolyMap::new(n, 3, comps).expect("homogeneous");
    MapSpec::weighted(p, T::lit(RANDOM_ADMISSIBLE_KAPPA)).expect("kappa > 0")
}

/// The five admissible maps of the acceptance suite, with display names.
pub fn admissible_suite() -> Vec<(&'static str, MapSpec<f64>)> {
    vec![
        ("identity", identity(3)),
        ("radial-cube", radial_cube()),
        ("diag-linear", diagonal_linear(&[1.0, 2.0, 3.0])),
        ("radial-linear", radial_linear(&[1.0, 2.0, 3.0], 2.0)),
        ("random-weighted-n4", random_admissible(4, 20_240_601)),
    ]
}
