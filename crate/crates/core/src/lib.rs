//! Nonparametric bounds on mediation effects in randomized trials with
//! noncompliance.
//!
//! The crate has three independent routes to the same intervals:
//!
//! * [`catalog`]: closed-form max/min formulas, evaluated in exact arithmetic;
//! * [`oracle`]: an exact simplex over the latent response-type polytope;
//! * [`vertex`]: symbolic derivation of the formulas themselves by
//!   enumerating the vertices of the dual polyhedron.
//!
//! Everything is computed over [`Rational`] so results from the three routes
//! can be compared with `==`.

pub mod catalog;
pub mod counts;
pub mod feasibility;
pub mod latent;
pub mod lp;
pub mod observed;
pub mod oracle;
pub mod par;
pub mod param;
pub mod report;
pub mod sim;
pub mod symbolic;
pub mod vertex;

/// Exact rational number with arbitrary-precision numerator and denominator.
pub type Rational = num_rational::BigRational;

pub use catalog::{BoundResult, BoundStatus, Method};
pub use observed::{CellLabel, LocalCell, LocalObservedDistribution, ObservedCell, ObservedDistribution};
pub use param::{Arm, AssumptionSet, CausalParameter, Direction};
pub use symbolic::{SymbolicBound, SymbolicExpr};

/// Builds a rational from a numerator and denominator.
///
/// Panics if `den` is zero.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// Builds an integral rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(value.into())
}
