//! Homeomorphisms as prefix-exchange tables with odometer tail twists.

mod compare;
pub(crate) mod full_group;
pub(crate) mod map;

pub use compare::{
    disagreement, in_neighborhood, sup_distance, tau_distance, DisagreementSet,
};
pub use full_group::{CanonicalPartition, Cycle, FullGroupElement, Periodicity};
pub use map::{AdicMap, Pair};
