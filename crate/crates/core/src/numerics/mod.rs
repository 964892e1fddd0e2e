//! Arithmetic backends, the exact LP solver, dense float linear algebra and
//! seeded random streams.

pub mod linalg;
pub mod lp;
pub mod rng;
pub mod scalar;

pub use lp::{lp_solve, LinearConstraint, LpResult, LpStatus, RationalLp, Relation};
pub use rng::{rng_new, rng_split, StreamRng};
pub use scalar::{dot, parse_rational, ratio, Rational, Scalar, FLOAT_TIE_TOL};
