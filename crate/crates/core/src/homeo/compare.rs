use std::collections::BTreeSet;

use num_traits::Zero;
use serde::Serialize;

use super::{AdicMap, Pair};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::rational::{inv_pow, Rational};
use crate::space::{Alphabet, ClopenSet, EPPoint, Word};

/// `{x : S1 x ≠ S2 x}`, which is the clopen `core` minus finitely many
/// eventually periodic `exceptions` lying in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisagreementSet {
    pub core: ClopenSet,
    pub exceptions: BTreeSet<EPPoint>,
}

impl DisagreementSet {
    pub fn contains(&self, x: &EPPoint) -> bool {
        self.core.contains(x) && !self.exceptions.contains(x)
    }

    pub fn is_empty(&self) -> bool {
        self.core.is_empty()
    }

    pub fn measure(&self, mu: &Measure) -> Rational {
        let atoms: Rational = self.exceptions.iter().map(|x| mu.point_mass(x)).sum();
        mu.eval(&self.core) - atoms
    }
}

enum PieceDiff {
    Agree,
    Disagree,
    /// Disagree everywhere except at one point.
    DisagreeExcept(EPPoint),
}

/// Rows of both tables restricted to a common input code.
fn common_refinement(a: &AdicMap, b: &AdicMap) -> Vec<(Pair, Pair)> {
    let k = a.alphabet();
    let mut out = Vec::new();
    for pa in a.pairs() {
        let start = b.pairs().partition_point(|p| p.input < pa.input);
        let covered: Vec<&Pair> = b.pairs()[start..]
            .iter()
            .take_while(|p| pa.input.is_prefix_of(&p.input))
            .collect();
        if covered.is_empty() || covered[0].input == pa.input {
            let pb = match covered.first() {
                Some(p) => *p,
                None => b.pair_at(&EPPoint::finite(&pa.input.concat(&Word::repeat(0, b.depth())))),
            };
            let ext = &pa.input.symbols()[pb.input.len()..];
            out.push((pa.clone(), pb.restrict(k, ext)));
        } else {
            for pb in covered {
                let ext = &pb.input.symbols()[pa.input.len()..];
                out.push((pa.restrict(k, ext), pb.clone()));
            }
        }
    }
    out
}

fn compare_piece(k: Alphabet, p1: &Pair, p2: &Pair) -> Result<PieceDiff> {
    let (short, long) = if p1.output.len() <= p2.output.len() { (p1, p2) } else { (p2, p1) };
    if !short.output.is_prefix_of(&long.output) {
        return Ok(PieceDiff::Disagree);
    }
    if short.output.len() == long.output.len() {
        return Ok(if short.twist == long.twist { PieceDiff::Agree } else { PieceDiff::Disagree });
    }
    // agreement at u·y iff T^{ts} y = r · T^{tl} y; with z = T^{tl} y this is
    // z + m = val(r) + k^L z, a single k-adic solution
    let r = long.output.suffix(short.output.len());
    let scale = (k.k() as i128)
        .checked_pow(r.len() as u32)
        .ok_or(Error::Overflow("disagreement depth"))?;
    let m = (short.twist - long.twist) as i128;
    let z = EPPoint::from_kadic(k, m - r.value(k) as i128, scale - 1)?;
    Ok(PieceDiff::DisagreeExcept(z.add(k, -long.twist).prepend(&p1.input)))
}

pub fn disagreement(s1: &AdicMap, s2: &AdicMap) -> Result<DisagreementSet> {
    let k = s1.alphabet();
    k.check(s2.alphabet())?;
    let mut core = Vec::new();
    let mut exceptions = BTreeSet::new();
    for (p1, p2) in common_refinement(s1, s2) {
        match compare_piece(k, &p1, &p2)? {
            PieceDiff::Agree => {}
            PieceDiff::Disagree => core.push(p1.input),
            PieceDiff::DisagreeExcept(x) => {
                core.push(p1.input);
                exceptions.insert(x);
            }
        }
    }
    Ok(DisagreementSet { core: ClopenSet::from_words(k, core), exceptions })
}

/// `μ_i({x : S1 x ≠ S2 x})` for each measure.
pub fn tau_distance(measures: &[Measure], s1: &AdicMap, s2: &AdicMap) -> Result<Vec<Rational>> {
    for mu in measures {
        mu.check_alphabet(s1.alphabet())?;
    }
    let d = disagreement(s1, s2)?;
    Ok(measures.iter().map(|mu| d.measure(mu)).collect())
}

/// Membership in the basic neighbourhood `{S : μ_i(E(S, center)) < ε ∀i}`.
pub fn in_neighborhood(
    center: &AdicMap,
    measures: &[Measure],
    eps: &Rational,
    s: &AdicMap,
) -> Result<bool> {
    if *eps <= Rational::zero() {
        return Err(Error::InvalidEpsilon);
    }
    Ok(tau_distance(measures, center, s)?.iter().all(|d| d < eps))
}

/// `sup_x d(S1 x, S2 x)` for the metric `d(x, y) = 2^{-lcp(x, y)}`.
pub fn sup_distance(s1: &AdicMap, s2: &AdicMap) -> Result<Rational> {
    let k = s1.alphabet();
    k.check(s2.alphabet())?;
    let mut best: Option<usize> = None;
    for (p1, p2) in common_refinement(s1, s2) {
        let (v1, v2) = (&p1.output, &p2.output);
        let lcp = if v1.len() == v2.len() && v1 == v2 {
            if p1.twist == p2.twist {
                continue;
            }
            v1.len() + valuation(k.k(), p1.twist - p2.twist)
        } else {
            v1.common_prefix_len(v2)
        };
        best = Some(best.map_or(lcp, |b| b.min(lcp)));
    }
    Ok(best.map_or_else(Rational::zero, |n| inv_pow(2, n)))
}

/// Largest `a` with `k^a | m`, for `m ≠ 0`.
fn valuation(k: i64, mut m: i64) -> usize {
    let mut a = 0;
    while m % k == 0 {
        m /= k;
        a += 1;
    }
    a
}
