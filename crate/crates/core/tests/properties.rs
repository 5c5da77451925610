mod common;

use common::*;
use hominv::hypotheses::{estimate_extrema, homogeneity_residual};
use hominv::linalg::{norm, sub};
use hominv::poly::check_homogeneity_symbolic;
use hominv::*;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_is_homogeneous(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_map(&mut r, None, None);
        for _ in 0..100 {
            let w = unit_vector(&mut r, m.dim());
            let tau = 10f64.powf(r.random_range(-3.0..=3.0));
            let lhs = m.eval(&w.iter().map(|x| x * tau).collect::<Vec<_>>()).unwrap();
            let base = m.eval(&w).unwrap();
            let tk = tau.powf(m.kappa());
            let rhs: Vec<f64> = base.iter().map(|v| v * tk).collect();
            prop_assert!(norm(&sub(&lhs, &rhs)) <= 1e-10 * tk * norm(&base).max(1.0));
        }
    }

    #[test]
    fn jacobian_is_homogeneous_of_order_kappa_minus_one(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_map(&mut r, None, None);
        for _ in 0..10 {
            let w = unit_vector(&mut r, m.dim());
            let tau = 10f64.powf(r.random_range(-2.0..=2.0));
            let scaled = m.jacobian(&w.iter().map(|x| x * tau).collect::<Vec<_>>()).unwrap().entries;
            let expect = m.jacobian(&w).unwrap().entries.scaled(tau.powf(m.kappa() - 1.0));
            prop_assert!(scaled.max_abs_diff(&expect) <= 1e-9 * expect.max_abs().max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn euler_relation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_map(&mut r, None, None);
        for _ in 0..10 {
            let x = random_target(&mut r, m.dim(), -1.0, 1.0);
            let lhs = m.jacobian(&x).unwrap().entries.mul_vec(&x);
            let rhs: Vec<f64> = m.eval(&x).unwrap().iter().map(|v| v * m.kappa()).collect();
            let scale = norm(&rhs).max(norm(&x).powf(m.kappa()));
            prop_assert!(norm(&sub(&lhs, &rhs)) <= 1e-9 * scale.max(1e-300));
        }
    }

    #[test]
    fn symbolic_jacobian_matches_finite_differences(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_map(&mut r, None, None);
        let fd = as_black_box(&m);
        for _ in 0..50 {
            let w = unit_vector(&mut r, m.dim());
            let a = m.jacobian(&w).unwrap().entries;
            let b = fd.jacobian(&w).unwrap().entries;
            prop_assert!(a.max_abs_diff(&b) <= 1e-6 * a.max_abs().max(1.0));
        }
    }

    #[test]
    fn parse_format_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_map(&mut r, None, None);
        let text = format_map(&m).unwrap();
        let back: MapSpec<f64> = parse_map(&text).unwrap();
        prop_assert_eq!(back.as_poly(), m.as_poly());
        prop_assert_eq!(back.kappa(), m.kappa());
        prop_assert_eq!(format_map(&back).unwrap(), text);
    }

    #[test]
    fn parser_is_total(src in "[nfx0-9kapa=;+*^/. \\-\n#e]{0,60}") {
        match parse_map::<f64>(&src) {
            Ok(m) => prop_assert!(m.dim() >= 1),
            Err(e) => {
                let p = e.position();
                prop_assert!(p.line >= 1 && p.column >= 1);
                prop_assert!(p.line <= src.lines().count() + 1);
            }
        }
    }

    #[test]
    fn symbolic_and_sampled_homogeneity_agree(seed in any::<u64>(), mixed in any::<bool>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..=4);
        let d = r.random_range(1..=3u32);
        let mut comps = random_terms(&mut r, n, d);
        if mixed {
            let c = r.random_range(0..n);
            let e = random_exponents(&mut r, n, d + 1);
            comps[c].push(Term::new(1.0 + r.random_range(0.0..1.0), e));
        }
        let verdict = check_homogeneity_symbolic(&comps, Some(d));
        let terms = comps.clone();
        let bb = BlackBox::new(n, f64::from(d), move |x: &[f64]| {
            terms.iter().map(|ts| ts.iter().map(|t| t.eval(x)).sum()).collect()
        });
        let m = MapSpec::black_box(bb).unwrap();
        let residual = homogeneity_residual(&m, seed);
        prop_assert_eq!(verdict.homogeneous, residual <= hominv::hypotheses::HOMOGENEITY_TOL,
            "symbolic {:?} sampled {}", verdict, residual);
    }
}

#[test]
fn sampled_extrema_are_monotone_in_sample_size() {
    let mut r = rng(99);
    for _ in 0..5 {
        let m = random_map(&mut r, Some(3), None);
        let mut prev: Option<(f64, f64)> = None;
        for n in [100, 400, 1600, 6400] {
            let s = sample_sphere::<f64>(3, n, 5);
            let e = estimate_extrema(&m, &s);
            assert!(e.c0 <= e.sampled_min && e.c_max >= e.sampled_max);
            assert!(0.0 <= e.c0 && e.c0 <= e.c_max);
            if let Some((lo, hi)) = prev {
                assert!(e.sampled_min <= lo && e.sampled_max >= hi);
            }
            prev = Some((e.sampled_min, e.sampled_max));
        }
    }
}

#[test]
fn certified_bound_never_exceeds_empirical_minimum() {
    let mut r = rng(3);
    for _ in 0..10 {
        let m = random_map(&mut r, Some(3), None);
        let rep = check_hypotheses(&m, 2000, 1);
        if let Some(lo) = rep.c0_lower {
            assert!(lo <= rep.c0_empirical);
        }
        let s = sample_sphere(3, 2000, 1);
        let l = m.as_poly().unwrap().lipschitz_bound();
        assert!(certify_c0_lower(&m, &s, l).unwrap() <= estimate_extrema(&m, &s).c0);
    }
}

#[test]
fn radial_maps_have_unit_extrema() {
    for kappa in [1.0, 2.5, 3.0] {
        let m = builtins::radial_linear::<f64>(&[1.0, 1.0, 1.0], kappa);
        let rep = check_hypotheses(&m, 1000, 4);
        assert!((rep.c0_empirical - 1.0).abs() < 1e-6);
        assert!((rep.c_empirical - 1.0).abs() < 1e-6);
    }
}

#[test]
fn hypothesis_check_is_deterministic() {
    let m = builtins::random_admissible::<f64>(4, 8);
    let a = serde_json::to_string(&check_hypotheses(&m, 3000, 12)).unwrap();
    let b = serde_json::to_string(&check_hypotheses(&m, 3000, 12)).unwrap();
    assert_eq!(a, b);
}

fn admissible_maps() -> Vec<(&'static str, MapSpec<f64>, HypothesisReport<f64>)> {
    builtins::admissible_suite()
        .into_iter()
        .map(|(name, m)| {
            let rep = check_hypotheses(&m, 4000, 21);
            assert_eq!(rep.overall, Verdict::Pass, "{name}: {:?}", rep.reasons);
            (name, m, rep)
        })
        .collect()
}

#[test]
fn inversion_invariants() {
    let cfg = ContinuationConfig::default();
    let tol = cfg.tol;
    let mut r = rng(2024);
    for (name, m, rep) in admissible_maps() {
        let inv = Inverter::new(&m, &rep, cfg.clone()).unwrap();
        for _ in 0..20 {
            let eta = random_target(&mut r, m.dim(), -3.0, 3.0);
            let out = inv.invert(&eta).unwrap();
            let res = norm(&sub(&m.eval(&out.xi).unwrap(), &eta));
            assert!(res <= tol * norm(&eta).max(1.0), "{name}: residual {res}");

            let (lo, hi) = out.bracket.unwrap();
            let x = norm(&out.xi);
            assert!(lo - 1e-9 * hi <= x && x <= hi * (1.0 + 1e-9), "{name}: {lo} <= {x} <= {hi}");

            // scale consistency: direct vs unit-target route
            let rn = norm(&eta);
            let unit: Vec<f64> = eta.iter().map(|v| v / rn).collect();
            let via_unit: Vec<f64> = inv.invert(&unit).unwrap().xi.iter().map(|v| v * rn.powf(1.0 / m.kappa())).collect();
            assert!(norm(&sub(&via_unit, &out.xi)) <= 10.0 * tol * x.max(1.0), "{name}: scale consistency");

            let tau = 10f64.powf(r.random_range(-2.0..=2.0));
            let scaled = inv.invert(&eta.iter().map(|v| v * tau).collect::<Vec<_>>()).unwrap().xi;
            let tp = tau.powf(1.0 / m.kappa());
            let dev = norm(&sub(&scaled, &out.xi.iter().map(|v| v * tp).collect::<Vec<_>>())) / (tp * x);
            assert!(dev <= 10.0 * tol, "{name}: inverse homogeneity deviation {dev}");
        }
    }
}

#[test]
fn inversion_is_deterministic_and_continuous_at_zero() {
    let cfg = ContinuationConfig::default();
    for (name, m, rep) in admissible_maps() {
        let eta: Vec<f64> = (0..m.dim()).map(|i| 0.3 + i as f64).collect();
        let a = invert(&m, &eta, &cfg, &rep).unwrap();
        let b = invert(&m, &eta, &cfg, &rep).unwrap();
        assert_eq!(a, b, "{name}");
        let mut prev = f64::INFINITY;
        for j in 1..=20 {
            let s = 2f64.powi(-j) / norm(&eta);
            let e: Vec<f64> = eta.iter().map(|v| v * s).collect();
            let x = norm(&invert(&m, &e, &cfg, &rep).unwrap().xi);
            let bound = (norm(&e) / rep.c0_empirical).powf(1.0 / m.kappa());
            assert!(x <= bound * (1.0 + 1e-9) && bound < prev, "{name}");
            prev = bound;
        }
    }
}

#[test]
fn degree_properties() {
    let cfg = ContinuationConfig::default();
    let mut r = rng(77);
    for (name, m, rep) in admissible_maps() {
        let mut degrees = Vec::new();
        for _ in 0..10 {
            let eta = random_target(&mut r, m.dim(), -1.0, 1.0);
            let d = mapping_degree(&m, &eta, degree::default_starts(m.dim()), &cfg, &rep).unwrap();
            assert_eq!(d.preimages.len(), 1, "{name}");
            for p in &d.preimages {
                // independent sign: determinant of the finite-difference Jacobian
                let det = as_black_box(&m).jacobian(&p.xi).unwrap().determinant();
                assert_eq!(p.sign, det.signum() as i8, "{name}");
            }
            degrees.push(d.degree);
        }
        assert!(degrees.windows(2).all(|w| w[0] == w[1]), "{name}: {degrees:?}");
        assert!(degrees[0].abs() == 1);
    }

    let sq = builtins::complex_square::<f64>();
    let rep = check_hypotheses(&sq, 2000, 21);
    for _ in 0..10 {
        let eta = random_target(&mut r, 2, -1.0, 1.0);
        let d = mapping_degree(&sq, &eta, 128, &cfg, &rep).unwrap();
        assert_eq!(d.preimages.len(), 2);
        assert_eq!(d.degree, 2);
        let sum: Vec<f64> = (0..2).map(|k| d.preimages[0].xi[k] + d.preimages[1].xi[k]).collect();
        assert!(norm(&sum) < 1e-9, "roots are antipodal");
    }
}
