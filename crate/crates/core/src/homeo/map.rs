use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Alphabet, ClopenSet, EPPoint, Word};

/// One table row: `input · y ↦ output · T^twist(y)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair {
    #[serde(rename = "u")]
    pub input: Word,
    #[serde(rename = "v")]
    pub output: Word,
    #[serde(rename = "t")]
    pub twist: i64,
}

impl Pair {
    pub fn new(input: Word, output: Word, twist: i64) -> Self {
        Pair { input, output, twist }
    }

    /// The same map restricted to the subcylinder `[input · ext]`; the twist
    /// is pushed through `ext` digit by digit with odometer carries.
    pub fn restrict(&self, k: Alphabet, ext: &[u8]) -> Pair {
        let base = k.k();
        let mut input = self.input.symbols().to_vec();
        let mut output = self.output.symbols().to_vec();
        let mut carry = self.twist;
        for &a in ext {
            input.push(a);
            let s = a as i64 + carry;
            output.push(s.rem_euclid(base) as u8);
            carry = s.div_euclid(base);
        }
        Pair {
            input: Word::from_symbols(input),
            output: Word::from_symbols(output),
            twist: carry,
        }
    }

    pub fn apply(&self, k: Alphabet, x: &EPPoint) -> EPPoint {
        x.shift(self.input.len()).add(k, self.twist).prepend(&self.output)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} -> {:?}, t={})", self.input, self.output, self.twist)
    }
}

/// A homeomorphism of `{0..k-1}^N` given by a finite table of [`Pair`]s whose
/// inputs and outputs are both complete prefix codes.
///
/// The table is kept in canonical form: its inputs are exactly the maximal
/// cylinders on which the map is a single prefix exchange with tail twist.
/// Structural equality is therefore equality of maps. In particular the
/// odometer is the one-row table `(ε -> ε, t=1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdicMap {
    k: Alphabet,
    pairs: Vec<Pair>,
}

/// Where a word sits relative to an input code.
enum Located<'a> {
    /// The pair whose input is a prefix of the word.
    Inside(&'a Pair),
    /// The word is a proper prefix of these inputs.
    Covers(&'a [Pair]),
}

impl AdicMap {
    pub fn from_pairs(k: Alphabet, pairs: Vec<Pair>) -> Result<Self> {
        for p in &pairs {
            Word::new(k, p.input.symbols().to_vec())?;
            Word::new(k, p.output.symbols().to_vec())?;
        }
        check_complete_code(k, pairs.iter().map(|p| &p.input), "inputs")?;
        check_complete_code(k, pairs.iter().map(|p| &p.output), "outputs")?;
        Ok(Self::from_valid_pairs(k, pairs))
    }

    pub(crate) fn from_valid_pairs(k: Alphabet, pairs: Vec<Pair>) -> Self {
        AdicMap { k, pairs: canonicalize(k, pairs) }
    }

    pub fn identity(k: Alphabet) -> Self {
        AdicMap { k, pairs: vec![Pair::new(Word::empty(), Word::empty(), 0)] }
    }

    /// The k-adic odometer `x ↦ x + 1`.
    pub fn odometer(k: Alphabet) -> Self {
        AdicMap { k, pairs: vec![Pair::new(Word::empty(), Word::empty(), 1)] }
    }

    /// `T^m`.
    pub fn odometer_power(k: Alphabet, m: i64) -> Self {
        AdicMap { k, pairs: vec![Pair::new(Word::empty(), Word::empty(), m)] }
    }

    /// The depth-`n` prefix permutation sending the word of value `v` to the
    /// word of value `perm[v]`.
    pub fn prefix_permutation(k: Alphabet, n: usize, perm: &[usize]) -> Result<Self> {
        let pairs = k
            .words(n)
            .zip(perm)
            .map(|(w, &img)| Pair::new(w, Word::from_value(k, img as u64, n), 0))
            .collect::<Vec<_>>();
        if pairs.len() != k.count(n) {
            return Err(Error::NotPrefixCode("permutation has the wrong length".into()));
        }
        Self::from_pairs(k, pairs)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.k
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    /// Longest input word of the canonical table.
    pub fn depth(&self) -> usize {
        self.pairs.iter().map(|p| p.input.len()).max().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.k)
    }

    /// The table refined so that every input has length exactly `n`
    /// (`n >= depth()`).
    pub fn pairs_at_depth(&self, n: usize) -> Vec<Pair> {
        assert!(n >= self.depth());
        let mut out: Vec<Pair> = self
            .pairs
            .iter()
            .flat_map(|p| {
                self.k
                    .words(n - p.input.len())
                    .map(|ext| p.restrict(self.k, ext.symbols()))
                    .collect::<Vec<_>>()
            })
            .collect();
        out.sort();
        out
    }

    fn locate(&self, w: &Word) -> Located<'_> {
        locate_in(&self.pairs, w)
    }

    /// The pair whose input cylinder contains `x`.
    pub fn pair_at(&self, x: &EPPoint) -> &Pair {
        match self.locate(&x.prefix(self.depth())) {
            Located::Inside(p) => p,
            Located::Covers(_) => unreachable!("inputs form a complete code"),
        }
    }

    pub fn apply(&self, x: &EPPoint) -> EPPoint {
        self.pair_at(x).apply(self.k, x)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AdicMap) -> Result<AdicMap> {
        self.k.check(other.k)?;
        Ok(Self::from_valid_pairs(self.k, self.compose_pairs(other.pairs.clone())))
    }

    pub(crate) fn compose_pairs(&self, pairs: Vec<Pair>) -> Vec<Pair> {
        compose_tables(self.k, &self.pairs, pairs).expect("inputs form a complete code")
    }

    pub fn invert(&self) -> AdicMap {
        let pairs = self
            .pairs
            .iter()
            .map(|p| Pair::new(p.output.clone(), p.input.clone(), -p.twist))
            .collect();
        Self::from_valid_pairs(self.k, pairs)
    }

    pub fn power(&self, m: i64) -> AdicMap {
        let mut base = if m < 0 { self.invert() } else { self.clone() };
        let mut e = m.unsigned_abs();
        let mut acc = Self::identity(self.k);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base).expect("same alphabet");
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base).expect("same alphabet");
            }
        }
        acc
    }

    /// Image of a clopen set; every cylinder maps onto a cylinder piecewise.
    pub fn image(&self, c: &ClopenSet) -> Result<ClopenSet> {
        self.k.check(c.alphabet())?;
        let mut out = Vec::new();
        for w in c.words() {
            match self.locate(w) {
                Located::Inside(p) => {
                    out.push(p.restrict(self.k, &w.symbols()[p.input.len()..]).output);
                }
                Located::Covers(ps) => out.extend(ps.iter().map(|p| p.output.clone())),
            }
        }
        Ok(ClopenSet::from_words(self.k, out))
    }

    pub fn preimage(&self, c: &ClopenSet) -> Result<ClopenSet> {
        self.invert().image(c)
    }

    /// Union of the cylinders fixed pointwise.
    pub fn fixed_region(&self) -> ClopenSet {
        ClopenSet::from_words(
            self.k,
            self.pairs
                .iter()
                .filter(|p| p.input == p.output && p.twist == 0)
                .map(|p| p.input.clone()),
        )
    }

    /// True iff no cylinder of depth `d` is fixed pointwise by any `S^q`,
    /// `1 <= q <= max_period`.
    pub fn is_topologically_free_to_depth(&self, d: usize, max_period: usize) -> bool {
        let mut pow = self.clone();
        for q in 1..=max_period {
            if q > 1 {
                pow = self.compose(&pow).expect("same alphabet");
            }
            if pow.fixed_region().words().iter().any(|w| w.len() <= d) {
                return false;
            }
        }
        true
    }
}

fn locate_in<'a>(pairs: &'a [Pair], w: &Word) -> Located<'a> {
    for n in 0..=w.len() {
        let pre = w.prefix(n);
        if let Ok(i) = pairs.binary_search_by(|p| p.input.cmp(&pre)) {
            return Located::Inside(&pairs[i]);
        }
    }
    let start = pairs.partition_point(|p| p.input < *w);
    let end = start
        + pairs[start..]
            .iter()
            .take_while(|p| w.is_prefix_of(&p.input))
            .count();
    Located::Covers(&pairs[start..end])
}

/// Post-composes the rows of `inner` with the (possibly partial) table
/// `outer`, sorted by input: each row is split until its output lands inside
/// a single input cylinder of `outer`. Fails if some output leaves the domain
/// of `outer`.
pub(crate) fn compose_tables(k: Alphabet, outer: &[Pair], inner: Vec<Pair>) -> Result<Vec<Pair>> {
    let mut out = Vec::with_capacity(inner.len());
    let mut work = inner;
    while let Some(p) = work.pop() {
        match locate_in(outer, &p.output) {
            Located::Inside(q) => {
                let tail = &p.output.symbols()[q.input.len()..];
                let r = q.restrict(k, tail);
                out.push(Pair::new(p.input, r.output, p.twist + r.twist));
            }
            Located::Covers([]) => {
                return Err(Error::NotPrefixCode(format!("{:?} leaves the domain", p.output)));
            }
            Located::Covers(_) => {
                work.extend((0..k.size()).map(|a| p.restrict(k, &[a])));
            }
        }
    }
    Ok(out)
}

fn check_complete_code<'a>(
    k: Alphabet,
    words: impl Iterator<Item = &'a Word>,
    side: &str,
) -> Result<()> {
    let mut ws: Vec<&Word> = words.collect();
    ws.sort();
    if ws.windows(2).any(|p| p[0].is_prefix_of(p[1])) {
        return Err(Error::NotPrefixCode(format!("{side} are not an antichain")));
    }
    if !ClopenSet::from_words(k, ws.into_iter().cloned()).is_whole() {
        return Err(Error::NotPrefixCode(format!("{side} do not cover the space")));
    }
    Ok(())
}

/// Merges complete sibling groups that are restrictions of a common parent
/// row until none remain.
fn canonicalize(k: Alphabet, mut pairs: Vec<Pair>) -> Vec<Pair> {
    let n = k.size() as usize;
    loop {
        pairs.sort();
        let mut merged = Vec::with_capacity(pairs.len());
        let mut changed = false;
        let mut i = 0;
        while i < pairs.len() {
            if let Some(parent) = try_merge(k, &pairs[i..pairs.len().min(i + n)]) {
                merged.push(parent);
                i += n;
                changed = true;
            } else {
                merged.push(pairs[i].clone());
                i += 1;
            }
        }
        pairs = merged;
        if !changed {
            return pairs;
        }
    }
}

fn try_merge(k: Alphabet, group: &[Pair]) -> Option<Pair> {
    if group.len() != k.size() as usize {
        return None;
    }
    let first = &group[0];
    let input = first.input.parent()?;
    let output = first.output.parent()?;
    let b0 = *first.output.symbols().last()? as i64;
    let parent = Pair::new(input, output, first.twist * k.k() + b0);
    group
        .iter()
        .enumerate()
        .all(|(a, p)| p.input.parent().as_ref() == Some(&parent.input) && *p == parent.restrict(k, &[a as u8]))
        .then_some(parent)
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    k: Alphabet,
    pairs: Vec<Pair>,
}

impl Serialize for AdicMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapRepr { k: self.k, pairs: self.pairs.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AdicMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MapRepr::deserialize(d)?;
        AdicMap::from_pairs(r.k, r.pairs).map_err(serde::de::Error::custom)
    }
}
