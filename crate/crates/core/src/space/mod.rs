//! Words, cylinders and clopen sets of the Cantor space `{0..k-1}^N`, plus
//! eventually periodic points and the `2^-lcp` ultrametric.
//!
//! Coordinate 0 is the least significant digit for odometer arithmetic, so the
//! word `01` over `k = 2` has value 2.

mod clopen;
mod point;
mod word;

pub use clopen::ClopenSet;
pub use point::{lcp_distance, EPPoint};
pub use word::{Alphabet, Word};
