//! Exact computation with countable distance monoids, their cut completions,
//! finite metric spaces over them and the generic spaces they generate.

pub mod builtin;
pub mod carrier;
pub mod error;
pub mod fm;
pub mod formula;
pub mod metric;
pub mod monoid;
pub mod rational;
pub mod refine;
pub mod star;
pub mod urysohn;

pub use builtin::builtin;
pub use carrier::{Component, IntervalUnionCarrier};
pub use error::{Error, Result};
pub use metric::{ApproxInterval, Approximation, FiniteMetricSpace, PairApproximation, Quadruple, ValueApproximation};
pub use monoid::{DistanceMonoidSpec, FiniteTable};
pub use rational::Rational;
pub use star::ExtendedValue;
