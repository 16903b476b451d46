use num_traits::Zero;
use serde::Serialize;

use super::check_inputs;
use super::extension::PrunedTree;
use crate::error::{Error, Result};
use crate::homeo::{disagreement, tau_distance, AdicMap, FullGroupElement, Pair};
use crate::measure::Measure;
use crate::rational::{self, Rational};
use crate::space::{ClopenSet, Word};

/// A perturbation `T*` of a periodic `R` with no pointwise-periodic cylinder
/// at the requested depth.
#[derive(Debug, Clone, Serialize)]
pub struct Perturbation {
    pub map: AdicMap,
    /// Union of the top cylinders `R^{p-1} F` of the cycles of `R`.
    pub top: ClopenSet,
    /// The kept set `P` inside the top, as a tree at `resolution`.
    pub kept: PrunedTree,
    /// `top \ hull(P)`: one cylinder below every depth-`depth` word of the top.
    pub removed: ClopenSet,
    pub resolution: usize,
    #[serde(with = "rational::serde_rational_vec")]
    pub distances: Vec<Rational>,
    pub topologically_free: bool,
}

const EXHAUSTIVE_LIMIT: usize = 4096;

/// The lightest depth-`n` descendant of `w`, ties broken by word order.
fn lightest_descendant(w: &Word, n: usize, measures: &[Measure], k: crate::space::Alphabet) -> Word {
    let weight = |u: &Word| measures.iter().map(|mu| mu.cylinder(u)).sum::<Rational>();
    if k.count(n - w.len()) <= EXHAUSTIVE_LIMIT {
        w.extensions(k, n)
            .map(|u| (weight(&u), u))
            .min()
            .expect("k >= 2")
            .1
    } else {
        let mut u = w.clone();
        while u.len() < n {
            u = u.children(k).map(|c| (weight(&c), c)).min().expect("k >= 2").1;
        }
        u
    }
}

/// Removes one deep cylinder below every depth-`depth` word of each cycle's
/// top cylinder and lets `T*` twist the tail by `T` there:
/// `T* = R ∘ Φ` where `Φ(u·y) = u·T(y)` on removed cylinders `[u]` and `Φ`
/// is the identity elsewhere. Every orbit through a removed cylinder drifts,
/// so the pointwise-periodic set of `T*` is the orbit of the kept set,
/// whose cylinders are all deeper than `depth`.
pub fn topologically_free_perturbation(
    r: &FullGroupElement,
    measures: &[Measure],
    eps: &Rational,
    depth: usize,
    max_period: usize,
    max_depth: usize,
) -> Result<Perturbation> {
    let k = r.alphabet();
    check_inputs(k, measures, eps)?;
    if !r.is_periodic() {
        return Err(Error::NotPeriodic);
    }
    let depth = depth.max(r.level());
    let top = ClopenSet::from_words(
        k,
        r.cycles()
            .iter()
            .map(|c| Word::from_value(k, *c.values.last().unwrap() as u64, r.level())),
    );
    let top_words = top.expand(depth);
    for resolution in depth + 1..=max_depth.max(depth + 1) {
        let removed = ClopenSet::from_words(
            k,
            top_words.iter().map(|w| lightest_descendant(w, resolution, measures, k)),
        );
        if !measures.iter().all(|mu| mu.eval(&removed) < *eps) {
            continue;
        }
        let mut phi: Vec<Pair> = removed
            .complement()
            .words()
            .iter()
            .map(|w| Pair::new(w.clone(), w.clone(), 0))
            .collect();
        phi.extend(removed.words().iter().map(|w| Pair::new(w.clone(), w.clone(), 1)));
        let map = r.map().compose(&AdicMap::from_pairs(k, phi)?)?;
        let hull = top.difference(&removed)?;
        let d = disagreement(&map, r.map())?;
        debug_assert!(d.core == removed && d.exceptions.is_empty());
        let distances = tau_distance(measures, &map, r.map())?;
        let topologically_free = map.is_topologically_free_to_depth(depth, max_period);
        return Ok(Perturbation {
            kept: PrunedTree::new(top.clone(), hull, resolution)?,
            map,
            top,
            removed,
            resolution,
            distances,
            topologically_free,
        });
    }
    Err(Error::BudgetUnreachable { max_depth })
}

impl Perturbation {
    pub fn max_distance(&self) -> Rational {
        self.distances.iter().cloned().max().unwrap_or_else(Rational::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::space::Alphabet;

    const K: Alphabet = Alphabet::BINARY;

    fn swap() -> FullGroupElement {
        FullGroupElement::certify(&AdicMap::prefix_permutation(K, 1, &[1, 0]).unwrap()).unwrap()
    }

    #[test]
    fn swap_perturbation() {
        let p = topologically_free_perturbation(&swap(), &[Measure::uniform(K)], &ratio(1, 8), 6, 4, 16).unwrap();
        assert_eq!(p.top, ClopenSet::parse(K, &["1"]).unwrap());
        assert!(p.topologically_free);
        assert!(p.distances[0] < ratio(1, 8));
        let d = disagreement(&p.map, swap().map()).unwrap();
        assert_eq!(d.core, p.top.difference(&p.kept.hull).unwrap());
        assert!(p.kept.is_nowhere_dense_to(6));
        assert!(!swap().map().is_topologically_free_to_depth(6, 4));
    }

    #[test]
    fn vacuous_budget() {
        let p = topologically_free_perturbation(&swap(), &[], &ratio(1, 1), 3, 3, 16).unwrap();
        assert_eq!(p.resolution, 4);
        assert!(p.topologically_free);
        assert!(!p.removed.is_empty());
    }

    #[test]
    fn identity_becomes_free() {
        let id = FullGroupElement::certify(&AdicMap::identity(K)).unwrap();
        let p = topologically_free_perturbation(&id, &[Measure::uniform(K)], &ratio(1, 4), 3, 5, 16).unwrap();
        assert!(p.topologically_free);
    }
}
