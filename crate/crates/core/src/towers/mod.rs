//! Kakutani–Rokhlin partitions of the odometer and the full-group
//! classification built on them.

mod basic;
mod classify;
mod partition;

pub use basic::{basic_set, BasicSet};
pub use classify::{
    exhaustion_level, f_classify, gamma_member, gamma_y_member, AtomClass, FClass, FClassification,
};
pub use partition::{
    alpha_structure, canonical_sequence, kr_conditions, kr_partition, AlphaAtom, AlphaStructure,
    ConditionReport, KRPartition, Tower, satisfies_atom_equation,
};
