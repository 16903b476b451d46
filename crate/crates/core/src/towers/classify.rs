use serde::Serialize;

use super::partition::{alpha_structure, canonical_sequence, KRPartition};
use crate::error::{Error, Result};
use crate::homeo::FullGroupElement;
use crate::space::ClopenSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FClass {
    In,
    Top,
    Bot,
}

/// `S = T^power` on atom `(level, tower)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomClass {
    pub level: usize,
    pub tower: usize,
    pub power: i64,
    pub class: FClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FClassification {
    /// Set when the supplied partition was replaced by the canonical `P_n`.
    pub refined_to: Option<usize>,
    pub atoms: Vec<AtomClass>,
}

impl FClassification {
    pub fn all_in(&self) -> bool {
        self.atoms.iter().all(|a| a.class == FClass::In)
    }
}

/// The unique power of `S` on a clopen set, if it is constant there.
fn constant_power(s: &FullGroupElement, c: &ClopenSet) -> Option<i64> {
    let n = s.level().max(c.depth());
    let mut words = c.expand(n).into_iter();
    let first = s.power_at(&words.next()?);
    words.all(|w| s.power_at(&w) == first).then_some(first)
}

/// Powers per atom when `P` refines the level sets of `S` and their images
/// and every power is below the minimal height.
fn atom_powers(s: &FullGroupElement, inverse: &FullGroupElement, p: &KRPartition) -> Option<Vec<i64>> {
    let h = p.min_height() as i64;
    p.atoms()
        .map(|(_, atom)| {
            let l = constant_power(s, atom)?;
            constant_power(inverse, atom)?;
            (l.abs() < h).then_some(l)
        })
        .collect()
}

fn classify_with(p: &KRPartition, powers: &[i64]) -> Vec<AtomClass> {
    p.atoms()
        .zip(powers)
        .map(|(((j, i), _), &l)| {
            let reach = j as i64 + l;
            let class = if reach < 0 {
                FClass::Bot
            } else if reach >= p.towers()[i].height as i64 {
                FClass::Top
            } else {
                FClass::In
            };
            AtomClass { level: j, tower: i, power: l, class }
        })
        .collect()
}

fn inverse_of(s: &FullGroupElement) -> FullGroupElement {
    FullGroupElement::certify(&s.map().invert()).expect("inverse of a full-group element")
}

/// Least `n` for which `P_n` is admissible: the cocycle is constant on
/// depth-`n` cylinders and bounded by `k^n`.
fn admissible_canonical_level(s: &FullGroupElement, cap: usize) -> Result<usize> {
    let k = s.alphabet().k() as i128;
    let bound = s.max_abs_power() as i128;
    let mut n = s.map().depth().max(inverse_of(s).map().depth()).max(1);
    while k.checked_pow(n as u32).is_some_and(|h| h <= bound) {
        n += 1;
    }
    if n > cap {
        return Err(Error::RefinementImpossible { needed: n, cap });
    }
    Ok(n)
}

/// Classifies every atom of `P` as In/Top/Bot. If `P` is not admissible for
/// `S`, the least admissible canonical `P_n` is used instead.
pub fn f_classify(s: &FullGroupElement, p: &KRPartition, max_depth: usize) -> Result<FClassification> {
    s.alphabet().check(p.alphabet())?;
    let inverse = inverse_of(s);
    if let Some(powers) = atom_powers(s, &inverse, p) {
        return Ok(FClassification { refined_to: None, atoms: classify_with(p, &powers) });
    }
    let n = admissible_canonical_level(s, max_depth)?;
    let pn = canonical_sequence(s.alphabet(), n);
    let powers = atom_powers(s, &inverse, &pn).expect("canonical level is admissible");
    Ok(FClassification { refined_to: Some(n), atoms: classify_with(&pn, &powers) })
}

/// Membership of `S` in `Γ(P)`: admissibility plus the whole-level
/// conditions for atoms crossing the top or the bottom.
pub fn gamma_member(s: &FullGroupElement, p: &KRPartition) -> bool {
    if s.alphabet() != p.alphabet() {
        return false;
    }
    let Some(powers) = atom_powers(s, &inverse_of(s), p) else {
        return false;
    };
    let alpha = alpha_structure(p);
    let towers = p.towers();
    let power_of = |j: usize, i: usize| {
        let offset: usize = towers[..i].iter().map(|t| t.height).sum();
        powers[offset + j]
    };
    classify_with(p, &powers).iter().all(|a| match a.class {
        FClass::In => true,
        FClass::Top => {
            let atom = alpha.atom_of_tower(a.tower);
            let h_j = atom.towers.iter().map(|&i| towers[i].height).min().unwrap();
            let Some(r) = (h_j + a.level).checked_sub(towers[a.tower].height) else {
                return false;
            };
            atom.towers
                .iter()
                .all(|&i| power_of(towers[i].height - h_j + r, i) == a.power)
        }
        FClass::Bot => {
            let atom = alpha.atom_of_base(a.tower);
            let h_j = atom.bases.iter().map(|&i| towers[i].height).min().unwrap();
            a.level < h_j && atom.bases.iter().all(|&i| power_of(a.level, i) == a.power)
        }
    })
}

/// Least `n >= 1` with `S ∈ Γ(P_n)`.
pub fn exhaustion_level(s: &FullGroupElement) -> usize {
    let bound = admissible_canonical_level(s, usize::MAX).expect("uncapped");
    (1..=bound)
        .find(|&n| gamma_member(s, &canonical_sequence(s.alphabet(), n)))
        .unwrap_or(bound)
}

/// `S` permutes the levels of the canonical tower at its exhaustion level.
pub fn gamma_y_member(s: &FullGroupElement) -> bool {
    let n = exhaustion_level(s);
    let p = canonical_sequence(s.alphabet(), n);
    let powers = atom_powers(s, &inverse_of(s), &p).expect("exhaustion level is admissible");
    classify_with(&p, &powers).iter().all(|a| a.class == FClass::In)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homeo::{AdicMap, Pair};
    use crate::space::{Alphabet, Word};
    use crate::towers::kr_partition;

    const K: Alphabet = Alphabet::BINARY;

    fn w(s: &str) -> Word {
        Word::parse(K, s).unwrap()
    }

    fn odometer() -> FullGroupElement {
        FullGroupElement::certify(&AdicMap::odometer(K)).unwrap()
    }

    fn swap() -> FullGroupElement {
        let m = AdicMap::from_pairs(K, vec![Pair::new(w("0"), w("1"), 0), Pair::new(w("1"), w("0"), 0)]).unwrap();
        FullGroupElement::certify(&m).unwrap()
    }

    fn classes(c: &FClassification) -> Vec<(FClass, i64)> {
        c.atoms.iter().map(|a| (a.class, a.power)).collect()
    }

    #[test]
    fn classification_examples() {
        let p1 = canonical_sequence(K, 1);
        let t = f_classify(&odometer(), &p1, 16).unwrap();
        assert_eq!(classes(&t), [(FClass::In, 1), (FClass::Top, 1)]);
        let s = f_classify(&swap(), &p1, 16).unwrap();
        assert_eq!(classes(&s), [(FClass::In, 1), (FClass::In, -1)]);
        let id = FullGroupElement::certify(&AdicMap::identity(K)).unwrap();
        assert!(f_classify(&id, &canonical_sequence(K, 3), 16).unwrap().atoms.iter().all(|a| a.class == FClass::In && a.power == 0));
    }

    #[test]
    fn classification_refines_when_needed() {
        let t2 = FullGroupElement::certify(&AdicMap::odometer_power(K, 2)).unwrap();
        let c = f_classify(&t2, &canonical_sequence(K, 1), 16).unwrap();
        assert_eq!(c.refined_to, Some(2));
        assert_eq!(c.atoms.len(), 4);
        assert!(matches!(f_classify(&t2, &canonical_sequence(K, 1), 1), Err(Error::RefinementImpossible { needed: 2, cap: 1 })));
    }

    #[test]
    fn membership_examples() {
        for n in 1..=5 {
            assert!(gamma_member(&odometer(), &canonical_sequence(K, n)));
        }
        assert!(gamma_member(&swap(), &canonical_sequence(K, 1)));
        assert_eq!(exhaustion_level(&odometer()), 1);
        assert_eq!(exhaustion_level(&swap()), 1);
        assert!(gamma_y_member(&swap()));
        assert!(!gamma_y_member(&odometer()));
        assert!(gamma_y_member(&FullGroupElement::certify(&AdicMap::identity(K)).unwrap()));
    }

    #[test]
    fn broken_top_level_is_rejected() {
        // +1 on [00], [10], [01] and -3 on [11]: not constant on [1]
        let s = FullGroupElement::from_powers(K, 2, vec![1, 1, 1, -3]).unwrap();
        assert!(!gamma_member(&s, &canonical_sequence(K, 1)));
        assert!(gamma_member(&s, &canonical_sequence(K, 2)));
        assert_eq!(exhaustion_level(&s), 2);
        let c = f_classify(&s, &canonical_sequence(K, 1), 16).unwrap();
        assert_eq!(c.refined_to, Some(2));
        assert!(c.all_in());
    }

    #[test]
    fn multi_tower_membership() {
        // towers over [000] (height 3) and [110] (height 5)
        let p = kr_partition(&ClopenSet::parse(K, &["000", "110"]).unwrap()).unwrap();
        assert_eq!(p.towers().iter().map(|t| t.height).collect::<Vec<_>>(), [3, 5]);
        assert!(gamma_member(&odometer(), &p));
        assert!(gamma_member(&swap(), &p) == (swap().max_abs_power() < 3 && f_classify(&swap(), &p, 16).unwrap().refined_to.is_none()));
        // powers of size 3 exceed the minimal height
        let t3 = FullGroupElement::certify(&AdicMap::odometer_power(K, 3)).unwrap();
        assert!(!gamma_member(&t3, &p));
    }
}
