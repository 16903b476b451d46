//! Exact computational Cantor dynamics.
//!
//! The Cantor set is modelled as `{0..k-1}^N`. Homeomorphisms are finite
//! prefix-exchange tables with odometer tail twists ([`AdicMap`]), which
//! covers the odometer `T`, every element of its topological full group
//! `[[T]]`, prefix permutations and code bijections. All measures and
//! distances are exact rationals.

pub mod approx;
pub mod error;
pub mod homeo;
pub mod measure;
pub mod rational;
pub mod space;
pub mod towers;

pub use error::{Error, Result};
pub use homeo::{AdicMap, FullGroupElement, Pair};
pub use measure::Measure;
pub use rational::Rational;
pub use space::{lcp_distance, Alphabet, ClopenSet, EPPoint, Word};

/// Refinement depth cap used when callers do not pass one.
pub const DEFAULT_MAX_DEPTH: usize = 16;
