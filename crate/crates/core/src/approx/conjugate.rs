use serde::Serialize;

use super::check_inputs;
use crate::error::{Error, Result};
use crate::homeo::map::compose_tables;
use crate::homeo::{tau_distance, AdicMap, FullGroupElement, Pair};
use crate::measure::Measure;
use crate::rational::{self, Rational};
use crate::space::{ClopenSet, Word};

/// A prefix-code bijection from `a` onto `b` with zero twists: the side with
/// fewer cylinders has its shallowest cylinder split until the counts agree,
/// then cylinders are paired in order.
pub fn clopen_code_bijection(a: &ClopenSet, b: &ClopenSet) -> Result<Vec<Pair>> {
    let k = a.alphabet();
    k.check(b.alphabet())?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyBase);
    }
    let mut xs: Vec<Word> = a.words().iter().cloned().collect();
    let mut ys: Vec<Word> = b.words().iter().cloned().collect();
    let modulus = k.size() as usize - 1;
    if xs.len() % modulus != ys.len() % modulus {
        return Err(Error::ResidueMismatch { left: xs.len(), right: ys.len(), modulus });
    }
    while xs.len() != ys.len() {
        let side = if xs.len() < ys.len() { &mut xs } else { &mut ys };
        let (i, _) = side
            .iter()
            .enumerate()
            .min_by(|(_, u), (_, v)| u.len().cmp(&v.len()).then(u.cmp(v)))
            .expect("nonempty");
        let w = side.swap_remove(i);
        side.extend(w.children(k));
    }
    xs.sort();
    ys.sort();
    Ok(xs.into_iter().zip(ys).map(|(x, y)| Pair::new(x, y, 0)).collect())
}

/// `R` and a periodic `S_univ` with `R S_univ R⁻¹` within `ε` of the target.
#[derive(Debug, Clone, Serialize)]
pub struct Conjugation {
    pub s_univ: AdicMap,
    pub r: AdicMap,
    pub conjugate: AdicMap,
    /// Target-invariant set absorbing the leftover region of `S_univ`.
    pub z: ClopenSet,
    #[serde(with = "rational::serde_rational_vec")]
    pub distances: Vec<Rational>,
}

/// Builds a universal periodic element with one block of sibling cylinders
/// per cycle of the target and conjugates it onto the target off a small
/// target-invariant set `Z`.
pub fn conjugate_into_neighborhood(
    target: &FullGroupElement,
    measures: &[Measure],
    eps: &Rational,
    max_depth: usize,
) -> Result<Conjugation> {
    let k = target.alphabet();
    check_inputs(k, measures, eps)?;
    if !target.is_periodic() {
        return Err(Error::NotPeriodic);
    }
    let level = target.level();
    let cycles = target.cycles();

    // blocks of consecutive depth-(level+1) words, cycled inside each block
    let depth = level + 1;
    let mut perm: Vec<usize> = (0..k.count(depth)).collect();
    let mut starts = Vec::with_capacity(cycles.len());
    let mut used = 0;
    for cyc in &cycles {
        let n = cyc.values.len();
        for j in 0..n {
            perm[used + j] = used + (j + 1) % n;
        }
        starts.push(used);
        used += n;
    }
    let s_univ = AdicMap::prefix_permutation(k, depth, &perm)?;
    let leftover = ClopenSet::from_words(k, (used..k.count(depth)).map(|v| Word::from_value(k, v as u64, depth)));

    let mut powers = vec![target.map().clone()];
    let longest = cycles.iter().map(|c| c.values.len()).max().unwrap_or(1);
    while powers.len() < longest {
        let next = target.map().compose(powers.last().unwrap())?;
        powers.push(next);
    }
    let identity = AdicMap::identity(k);
    let power = |j: usize| if j == 0 { &identity } else { &powers[j - 1] };

    for n in depth..=max_depth {
        for parent in k.words(n - 1) {
            let seeds = ClopenSet::from_words(k, (0..k.size() - 1).map(|a| parent.child(a)));
            let len = cycles
                .iter()
                .find(|c| c.values.contains(&(parent.prefix(level).value(k) as usize)))
                .expect("every cylinder is on a cycle")
                .values
                .len();
            let mut z = ClopenSet::empty(k);
            for j in 0..len {
                z = z.union(&power(j).image(&seeds)?)?;
            }
            if !measures.iter().all(|mu| mu.eval(&z) < *eps) {
                continue;
            }
            let Ok(rest) = clopen_code_bijection(&leftover, &z) else {
                continue;
            };
            let conj = assemble(target, &cycles, &starts, depth, &s_univ, &z, rest, &power)?;
            let distances = tau_distance(measures, &conj.1, target.map())?;
            if distances.iter().all(|d| d < eps) {
                return Ok(Conjugation { s_univ, r: conj.0, conjugate: conj.1, z, distances });
            }
        }
    }
    Err(Error::BudgetUnreachable { max_depth })
}

/// `R = target^j ∘ R_i ∘ S_univ^{-j}` on the `j`-th cylinder of block `i`,
/// and the leftover region onto `Z`.
#[allow(clippy::too_many_arguments)]
fn assemble<'a>(
    target: &FullGroupElement,
    cycles: &[crate::homeo::Cycle],
    starts: &[usize],
    depth: usize,
    s_univ: &AdicMap,
    z: &ClopenSet,
    rest: Vec<Pair>,
    power: &dyn Fn(usize) -> &'a AdicMap,
) -> Result<(AdicMap, AdicMap)> {
    let k = target.alphabet();
    let mut pairs = rest;
    for (cyc, &start) in cycles.iter().zip(starts) {
        let y0 = ClopenSet::cylinder(k, Word::from_value(k, cyc.values[0] as u64, target.level()));
        let x0 = Word::from_value(k, start as u64, depth);
        let mut r_i = clopen_code_bijection(&ClopenSet::cylinder(k, x0.clone()), &y0.difference(z)?)?;
        r_i.sort();
        for j in 0..cyc.values.len() {
            let row = Pair::new(Word::from_value(k, (start + j) as u64, depth), x0.clone(), 0);
            let into_y0 = compose_tables(k, &r_i, vec![row])?;
            pairs.extend(power(j).compose_pairs(into_y0));
        }
    }
    let r = AdicMap::from_pairs(k, pairs)?;
    let conjugate = r.compose(s_univ)?.compose(&r.invert())?;
    Ok((r, conjugate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::space::{Alphabet, EPPoint};

    const K: Alphabet = Alphabet::BINARY;

    fn set(words: &[&str]) -> ClopenSet {
        ClopenSet::parse(K, words).unwrap()
    }

    fn show(pairs: &[Pair]) -> Vec<String> {
        pairs.iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn code_bijection_examples() {
        assert_eq!(show(&clopen_code_bijection(&set(&["0"]), &set(&["0"])).unwrap()), ["(0 -> 0, t=0)"]);
        assert_eq!(show(&clopen_code_bijection(&set(&["00"]), &set(&["1"])).unwrap()), ["(00 -> 1, t=0)"]);
        assert_eq!(show(&clopen_code_bijection(&set(&["0"]), &set(&["0", "11"])).unwrap()), ["(00 -> 0, t=0)", "(01 -> 11, t=0)"]);
        assert!(clopen_code_bijection(&ClopenSet::empty(K), &set(&["0"])).is_err());
        let k3 = Alphabet::new(3).unwrap();
        let a = ClopenSet::parse(k3, &["0"]).unwrap();
        let b = ClopenSet::parse(k3, &["0", "1"]).unwrap();
        assert!(matches!(clopen_code_bijection(&a, &b), Err(Error::ResidueMismatch { .. })));
    }

    fn swap() -> FullGroupElement {
        FullGroupElement::certify(&AdicMap::prefix_permutation(K, 1, &[1, 0]).unwrap()).unwrap()
    }

    #[test]
    fn swap_target() {
        let c = conjugate_into_neighborhood(&swap(), &[Measure::uniform(K)], &ratio(1, 4), 16).unwrap();
        assert_eq!(Measure::uniform(K).eval(&c.z), ratio(1, 8));
        assert!(c.distances[0] <= ratio(1, 8));
        let d = crate::homeo::disagreement(&c.conjugate, swap().map()).unwrap();
        assert!(d.core.is_subset(&c.z).unwrap());
        for u in K.words(8) {
            let x = EPPoint::finite(&u);
            let y = c.r.apply(&c.s_univ.apply(&c.r.invert().apply(&x)));
            assert_eq!(c.conjugate.apply(&x), y);
        }
    }

    #[test]
    fn identity_target() {
        let id = FullGroupElement::certify(&AdicMap::identity(K)).unwrap();
        let c = conjugate_into_neighborhood(&id, &[Measure::uniform(K)], &ratio(1, 8), 16).unwrap();
        let d = crate::homeo::disagreement(&c.conjugate, id.map()).unwrap();
        assert!(d.core.is_subset(&c.z).unwrap());
        assert!(c.distances[0] < ratio(1, 8));
    }

    #[test]
    fn non_periodic_target_is_rejected() {
        let t = FullGroupElement::certify(&AdicMap::odometer(K)).unwrap();
        assert!(matches!(conjugate_into_neighborhood(&t, &[], &ratio(1, 2), 16), Err(Error::NotPeriodic)));
    }

    #[test]
    fn ternary_target() {
        let k3 = Alphabet::new(3).unwrap();
        let rot = FullGroupElement::certify(&AdicMap::prefix_permutation(k3, 1, &[1, 2, 0]).unwrap()).unwrap();
        let c = conjugate_into_neighborhood(&rot, &[Measure::uniform(k3)], &ratio(1, 10), 16).unwrap();
        assert!(c.distances[0] < ratio(1, 10));
    }
}
