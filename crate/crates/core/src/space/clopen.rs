use std::collections::{BTreeMap, BTreeSet};
use std::ops::Bound;

use serde::{Deserialize, Serialize};

use super::{Alphabet, EPPoint, Word};
use crate::error::Result;

/// A clopen subset of `{0..k-1}^N` in canonical form: the antichain of its
/// maximal cylinders.
///
/// Two values are equal iff they denote the same set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClopenSet {
    k: Alphabet,
    words: BTreeSet<Word>,
}

impl ClopenSet {
    pub fn empty(k: Alphabet) -> Self {
        ClopenSet { k, words: BTreeSet::new() }
    }

    pub fn whole(k: Alphabet) -> Self {
        ClopenSet { k, words: [Word::empty()].into() }
    }

    pub fn cylinder(k: Alphabet, w: Word) -> Self {
        ClopenSet { k, words: [w].into() }
    }

    /// Canonical form of the union of the given cylinders.
    pub fn from_words<I: IntoIterator<Item = Word>>(k: Alphabet, words: I) -> Self {
        ClopenSet { k, words: canonicalize(k, words.into_iter().collect()) }
    }

    pub fn parse(k: Alphabet, words: &[&str]) -> Result<Self> {
        let ws = words.iter().map(|s| Word::parse(k, s)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_words(k, ws))
    }

    pub fn alphabet(&self) -> Alphabet {
        self.k
    }

    pub fn words(&self) -> &BTreeSet<Word> {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_whole(&self) -> bool {
        self.words.len() == 1 && self.words.iter().next().unwrap().is_empty()
    }

    /// Length of the longest canonical word (0 for the empty set).
    pub fn depth(&self) -> usize {
        self.words.iter().map(Word::len).max().unwrap_or(0)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.k.check(other.k)?;
        Ok(Self::from_words(self.k, self.words.iter().chain(&other.words).cloned()))
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.k.check(other.k)?;
        let (small, large) = if self.words.len() <= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = Vec::new();
        for w in &small.words {
            if large.has_prefix_of(w) {
                out.push(w.clone());
            } else {
                out.extend(large.extensions_of(w).cloned());
            }
        }
        Ok(Self::from_words(self.k, out))
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let sorted: Vec<&Word> = self.words.iter().collect();
        complement_rec(self.k, &Word::empty(), &sorted, &mut out);
        Self::from_words(self.k, out)
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.intersect(&other.complement())
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn is_disjoint(&self, other: &Self) -> Result<bool> {
        Ok(self.intersect(other)?.is_empty())
    }

    /// Whether the cylinder `[w]` lies inside the set.
    pub fn contains_cylinder(&self, w: &Word) -> bool {
        self.has_prefix_of(w)
    }

    pub fn contains(&self, x: &EPPoint) -> bool {
        let depth = self.depth();
        let prefix = x.prefix(depth);
        (0..=depth).any(|n| self.words.contains(&prefix.prefix(n)))
    }

    /// All length-`m` words whose cylinders lie in the set, in lexicographic
    /// order. Requires `m >= depth()`.
    pub fn expand(&self, m: usize) -> Vec<Word> {
        assert!(m >= self.depth(), "expansion depth below canonical depth");
        self.words.iter().flat_map(|w| w.extensions(self.k, m).collect::<Vec<_>>()).collect()
    }

    /// Number of length-`m` cylinders inside the set (`m >= depth()`).
    pub fn count_at_depth(&self, m: usize) -> usize {
        self.words.iter().map(|w| self.k.count(m - w.len())).sum()
    }

    fn has_prefix_of(&self, w: &Word) -> bool {
        (0..=w.len()).any(|n| self.words.contains(&w.prefix(n)))
    }

    fn extensions_of<'a>(&'a self, w: &'a Word) -> impl Iterator<Item = &'a Word> + 'a {
        self.words
            .range((Bound::Included(w.clone()), Bound::Unbounded))
            .take_while(move |v| w.is_prefix_of(v))
    }
}

fn complement_rec(k: Alphabet, prefix: &Word, words: &[&Word], out: &mut Vec<Word>) {
    if words.is_empty() {
        out.push(prefix.clone());
        return;
    }
    if words.iter().any(|w| w.len() <= prefix.len()) {
        return;
    }
    for child in prefix.children(k) {
        let sub: Vec<&Word> = words.iter().copied().filter(|w| child.is_prefix_of(w)).collect();
        complement_rec(k, &child, &sub, out);
    }
}

/// Drops absorbed words, then merges complete sibling groups until stable.
fn canonicalize(k: Alphabet, words: BTreeSet<Word>) -> BTreeSet<Word> {
    let mut set = BTreeSet::new();
    let mut last: Option<Word> = None;
    for w in words {
        if let Some(l) = &last {
            if l.is_prefix_of(&w) {
                continue;
            }
        }
        last = Some(w.clone());
        set.insert(w);
    }
    loop {
        let mut siblings: BTreeMap<Word, usize> = BTreeMap::new();
        for w in &set {
            if let Some(p) = w.parent() {
                *siblings.entry(p).or_default() += 1;
            }
        }
        let complete: Vec<Word> = siblings
            .into_iter()
            .filter(|&(_, n)| n == k.size() as usize)
            .map(|(p, _)| p)
            .collect();
        if complete.is_empty() {
            return set;
        }
        for p in complete {
            for c in p.children(k) {
                set.remove(&c);
            }
            set.insert(p);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ClopenRepr {
    k: Alphabet,
    words: Vec<Word>,
}

impl Serialize for ClopenSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ClopenRepr { k: self.k, words: self.words.iter().cloned().collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClopenSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ClopenRepr::deserialize(d)?;
        for w in &r.words {
            Word::new(r.k, w.symbols().to_vec()).map_err(serde::de::Error::custom)?;
        }
        Ok(ClopenSet::from_words(r.k, r.words))
    }
}
