use std::collections::BTreeSet;

use crate::homeo::AdicMap;
use crate::space::{Alphabet, ClopenSet, EPPoint, Word};

/// The basic set `Y = {0^∞}` with its neighbourhood certificates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasicSet {
    k: Alphabet,
}

pub fn basic_set(k: Alphabet) -> BasicSet {
    BasicSet { k }
}

impl BasicSet {
    pub fn point(&self) -> EPPoint {
        EPPoint::constant(0)
    }

    /// `[0^m]`.
    pub fn neighborhood(&self, m: usize) -> ClopenSet {
        ClopenSet::cylinder(self.k, Word::repeat(0, m))
    }

    /// Iterates `T` on `[0^m]` until it comes back, checking disjointness on
    /// the way; returns the return time.
    pub fn return_time(&self, m: usize) -> Option<usize> {
        let t = AdicMap::odometer(self.k);
        let u = self.neighborhood(m);
        let mut cur = t.image(&u).ok()?;
        for n in 1..=self.k.count(m) {
            if cur == u {
                return Some(n);
            }
            if !cur.is_disjoint(&u).ok()? {
                return None;
            }
            cur = t.image(&cur).ok()?;
        }
        None
    }

    /// `T^n[0^m] ∩ [0^m] = ∅` for `0 < n < k^m` and the return time is `k^m`.
    pub fn wandering_to_depth(&self, m: usize) -> bool {
        self.return_time(m) == Some(self.k.count(m))
    }

    /// The orbit of `[0^m]` under the cylinder rotation covers every depth-`m`
    /// cylinder, so `[0^m]` meets every `T`-orbit.
    pub fn neighborhood_meets_orbits(&self, m: usize) -> bool {
        let t = AdicMap::odometer(self.k);
        let mut seen = BTreeSet::new();
        let mut cur = self.neighborhood(m);
        for _ in 0..self.k.count(m) {
            seen.extend(cur.words().iter().cloned());
            cur = t.image(&cur).expect("same alphabet");
        }
        seen.len() == self.k.count(m) && seen.iter().all(|w| w.len() == m)
    }
}
