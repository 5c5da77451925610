#![allow(dead_code)]

use hominv::{BlackBox, MapSpec, PolyMap, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random composition of `d` into `n` nonnegative parts.
pub fn random_exponents(rng: &mut ChaCha8Rng, n: usize, d: u32) -> Vec<u32> {
    let mut e = vec![0; n];
    for _ in 0..d {
        e[rng.random_range(0..n)] += 1;
    }
    e
}

pub fn random_coefficient(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..3) {
        0 => {
            let k: i32 = rng.random_range(1..10);
            if rng.random_bool(0.5) { -f64::from(k) } else { f64::from(k) }
        }
        1 => rng.random_range(-10.0..10.0),
        _ => f64::from(rng.random_range(-20i32..20)) / 8.0,
    }
}

pub fn random_terms(rng: &mut ChaCha8Rng, n: usize, d: u32) -> Vec<Vec<Term<f64>>> {
    (0..n)
        .map(|_| {
            (0..rng.random_range(1..=4))
                .map(|_| Term::new(random_coefficient(rng), random_exponents(rng, n, d)))
                .collect()
        })
        .collect()
}

/// A random valid map: `n ∈ 1..=4`, degree `1..=3`, optional radial weight.
pub fn random_map(rng: &mut ChaCha8Rng, n: Option<usize>, d: Option<u32>) -> MapSpec<f64> {
    let n = n.unwrap_or_else(|| rng.random_range(1..=4));
    let d = d.unwrap_or_else(|| rng.random_range(1..=3));
    let p = PolyMap::new(n, d, random_terms(rng, n, d)).expect("homogeneous by construction");
    if rng.random_bool(0.5) {
        MapSpec::weighted(p, rng.random_range(0.5..4.0)).unwrap()
    } else {
        MapSpec::polynomial(p)
    }
}

/// The same map behind an opaque evaluator, so its Jacobian comes from
/// central differences.
pub fn as_black_box(m: &MapSpec<f64>) -> MapSpec<f64> {
    let inner = m.clone();
    MapSpec::black_box(BlackBox::new(m.dim(), m.kappa(), move |x: &[f64]| inner.eval(x).unwrap())).unwrap()
}

pub fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = hominv::linalg::norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}

/// Random target with `log10 |η|` uniform on `[lo, hi]`.
pub fn random_target(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let r = 10f64.powf(rng.random_range(lo..=hi));
    unit_vector(rng, n).into_iter().map(|x| x * r).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
