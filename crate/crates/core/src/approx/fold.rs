use std::collections::HashMap;

use num_traits::Zero;
use serde::Serialize;

use super::check_inputs;
use crate::error::{Error, Result};
use crate::homeo::{tau_distance, AdicMap, FullGroupElement};
use crate::measure::Measure;
use crate::rational::{self, Rational};
use crate::space::{ClopenSet, Word};
use crate::towers::gamma_y_member;

/// Output of a fold-back construction.
#[derive(Debug, Clone, Serialize)]
pub struct Approximation {
    pub element: FullGroupElement,
    /// Level of the canonical tower that was folded; 0 when nothing was.
    pub level: usize,
    /// Value of the cylinder used as the tower base.
    pub base: usize,
    /// Cylinders where the output differs from the input.
    pub folded: ClopenSet,
    #[serde(with = "rational::serde_rational_vec")]
    pub distances: Vec<Rational>,
}

/// Cylinders at level `n` where a fold with base value `base` changes `s`:
/// included cylinders whose move leaves the window `[base, base + k^n)`.
/// Only positions within `max|c|` of the window ends can leave it.
fn fold_ends(s: &FullGroupElement, n: usize, base: usize, include: &dyn Fn(usize) -> bool) -> Vec<usize> {
    let h = s.alphabet().count(n);
    let low = s.alphabet().count(s.level());
    let k0 = s.max_abs_power() as usize;
    let positions: Box<dyn Iterator<Item = usize>> = if 2 * k0 >= h {
        Box::new(0..h)
    } else {
        Box::new((0..k0).chain(h - k0..h))
    };
    positions
        .filter_map(|p| {
            let v = (base + p) % h;
            let c = s.powers()[v % low];
            let reach = p as i64 + c;
            (include(v % low) && !(0..h as i64).contains(&reach)).then_some(v)
        })
        .collect()
}

/// Folds the orbits of `s` inside the single canonical tower of level `n`
/// whose base is the cylinder of value `base`: each maximal run of moves that
/// stays in the tower is closed into a cycle by sending its last cylinder
/// back to its first. Only cylinders whose level-`s.level()` prefix value
/// satisfies `include` are touched.
pub fn fold(s: &FullGroupElement, n: usize, base: usize, include: &dyn Fn(usize) -> bool) -> FullGroupElement {
    assert!(n >= s.level());
    let k = s.alphabet();
    let h = k.count(n);
    let low = k.count(s.level());
    let pos = |v: usize| (v + h - base % h) % h;
    let mut powers: Vec<i64> = (0..h).map(|v| s.powers()[v % low]).collect();
    let mut next = vec![None; h];
    let mut has_pred = vec![false; h];
    for v in (0..h).filter(|&v| include(v % low)) {
        let reach = pos(v) as i64 + powers[v];
        if (0..h as i64).contains(&reach) {
            let t = (v as i64 + powers[v]).rem_euclid(h as i64) as usize;
            next[v] = Some(t);
            has_pred[t] = true;
        }
    }
    for start in (0..h).filter(|&v| include(v % low) && !has_pred[v]) {
        let mut end = start;
        while let Some(t) = next[end] {
            end = t;
        }
        powers[end] = pos(start) as i64 - pos(end) as i64;
    }
    FullGroupElement::from_powers(k, n, powers).expect("folding preserves bijectivity")
}

/// The odometer folded at level `n`: `T` everywhere except `T^{1-k^n}` on
/// `[(k-1)^n]`.
pub fn s_fold(k: crate::space::Alphabet, n: usize) -> FullGroupElement {
    let t = FullGroupElement::certify(&AdicMap::odometer(k)).expect("odometer");
    fold(&t, n, 0, &|_| true)
}

/// Exact cylinder masses at one level, computed on demand.
struct MassCache<'a> {
    k: crate::space::Alphabet,
    n: usize,
    measures: &'a [Measure],
    masses: HashMap<usize, Vec<Rational>>,
}

impl<'a> MassCache<'a> {
    fn new(k: crate::space::Alphabet, n: usize, measures: &'a [Measure]) -> Self {
        MassCache { k, n, measures, masses: HashMap::new() }
    }

    /// Whether every measure gives the cylinders `ends` total mass below `eps`.
    fn all_below(&mut self, ends: &[usize], eps: &Rational) -> bool {
        let (k, n, measures) = (self.k, self.n, self.measures);
        let mut totals = vec![Rational::zero(); measures.len()];
        for &v in ends {
            let m = self.masses.entry(v).or_insert_with(|| {
                let w = Word::from_value(k, v as u64, n);
                measures.iter().map(|mu| mu.cylinder(&w)).collect()
            });
            for (t, x) in totals.iter_mut().zip(m.iter()) {
                *t += x;
                if *t >= *eps {
                    return false;
                }
            }
        }
        true
    }
}

fn unchanged(s: &FullGroupElement, measures: &[Measure]) -> Approximation {
    Approximation {
        element: s.clone(),
        level: 0,
        base: 0,
        folded: ClopenSet::empty(s.alphabet()),
        distances: vec![Rational::zero(); measures.len()],
    }
}

fn finish(
    s: &FullGroupElement,
    measures: &[Measure],
    n: usize,
    base: usize,
    include: &dyn Fn(usize) -> bool,
) -> Result<Approximation> {
    let k = s.alphabet();
    let element = fold(s, n, base, include);
    let ends = fold_ends(s, n, base, include);
    let distances = tau_distance(measures, element.map(), s.map())?;
    Ok(Approximation {
        element,
        level: n,
        base,
        folded: ClopenSet::from_words(k, ends.iter().map(|&v| Word::from_value(k, v as u64, n))),
        distances,
    })
}

const BASE_CANDIDATES: usize = 256;

/// A periodic element of `[[T]]` within `ε` of `S` for every measure: `S` is
/// kept on its periodic part and folded on its aperiodic part. The fold
/// level and base are the first, in increasing order, whose folded cylinders
/// weigh less than `ε`; moving the base lets the fold avoid atoms.
pub fn periodic_approximation(
    s: &FullGroupElement,
    measures: &[Measure],
    eps: &Rational,
    max_depth: usize,
) -> Result<Approximation> {
    let k = s.alphabet();
    check_inputs(k, measures, eps)?;
    if s.is_periodic() {
        return Ok(unchanged(s, measures));
    }
    let mut aperiodic = vec![false; s.powers().len()];
    for cyc in s.cycles().iter().filter(|c| c.displacement != 0) {
        for &v in &cyc.values {
            aperiodic[v] = true;
        }
    }
    let include = |v: usize| aperiodic[v];
    for n in s.level().max(1)..=max_depth {
        let h = k.count(n);
        let mut cache = MassCache::new(k, n, measures);
        for base in 0..h.min(BASE_CANDIDATES) {
            let ends = fold_ends(s, n, base, &include);
            if cache.all_below(&ends, eps) {
                return finish(s, measures, n, base, &include);
            }
        }
    }
    Err(Error::BudgetUnreachable { max_depth })
}

/// An element of Γ_Y within `ε` of `R` for every (continuous) measure,
/// obtained by folding all of `R` on the canonical tower `P_n` for the least
/// admissible `n`.
pub fn gamma_y_approximation(
    r: &FullGroupElement,
    measures: &[Measure],
    eps: &Rational,
    max_depth: usize,
) -> Result<Approximation> {
    let k = r.alphabet();
    check_inputs(k, measures, eps)?;
    if let Some(index) = measures.iter().position(|mu| !mu.is_continuous()) {
        return Err(Error::AtomicMeasure { index });
    }
    if gamma_y_member(r) {
        return Ok(unchanged(r, measures));
    }
    let k0 = r.max_abs_power() as usize;
    let all = |_: usize| true;
    for n in r.level().max(1)..=max_depth {
        if k0 >= 2 * k.count(n) {
            continue;
        }
        let ends = fold_ends(r, n, 0, &all);
        if MassCache::new(k, n, measures).all_below(&ends, eps) {
            return finish(r, measures, n, 0, &all);
        }
    }
    Err(Error::BudgetUnreachable { max_depth })
}
