//! Global inversion of positively homogeneous maps `f(τξ) = τ^κ f(ξ)` on
//! `ℝⁿ \ 0`.
//!
//! When `n ≥ 3` and `det Df` never vanishes off the origin, such a map is a
//! bijection of `ℝⁿ \ 0` whose inverse is homogeneous of order `1/κ`, and
//! the extension `f(0) = 0` is a homeomorphism of `ℝⁿ`. This crate checks
//! those hypotheses numerically ([`hypotheses`]), computes the inverse by
//! path lifting ([`inverter`]), and counts preimages and the mapping degree
//! ([`degree`]), which also exposes the two-to-one planar map
//! `(x² - y², 2xy)`.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod builtins;
pub mod degree;
pub mod error;
pub mod hypotheses;
pub mod inverter;
pub mod linalg;
pub mod mapcore;
pub mod newton;
pub mod parser;
pub mod path;
pub mod poly;
pub mod scalar;
pub mod sphere;

pub use degree::{count_preimages, injectivity_probe, mapping_degree, DegreeReport, InjectivityVerdict, Preimage};
pub use error::{Error, ParseError, Position, Result};
pub use hypotheses::{
    certify_c0_lower, check_hypotheses, check_jacobian_nonvanishing, coercivity_bracket, estimate_extrema,
    HypothesisReport, Verdict,
};
pub use inverter::{
    inverse_homogeneity_check, inverse_jacobian, invert, roundtrip_check, ContinuationConfig, InversionResult,
    Inverter,
};
pub use linalg::Matrix;
pub use mapcore::{eval_jacobian, eval_map, extend_at_origin, BlackBox, JacobianMatrix, MapBody, MapSpec};
pub use parser::{format_map, format_poly, parse_map};
pub use path::{slerp_path, SlerpPath};
pub use poly::{check_homogeneity_symbolic, HomogeneityVerdict, PolyMap, Polynomial, Term};
pub use scalar::Scalar;
pub use sphere::{sample_sphere, SphereSample};

pub type MapSpec64 = MapSpec<f64>;
pub type PolyMap64 = PolyMap<f64>;
pub type HypothesisReport64 = HypothesisReport<f64>;
pub type InversionResult64 = InversionResult<f64>;
pub type DegreeReport64 = DegreeReport<f64>;
pub type ContinuationConfig64 = ContinuationConfig<f64>;

pub type MapSpec32 = MapSpec<f32>;
pub type HypothesisReport32 = HypothesisReport<f32>;
