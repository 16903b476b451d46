use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::clopen_code_bijection;
use crate::error::{Error, Result};
use crate::homeo::{AdicMap, Pair};
use crate::space::{Alphabet, ClopenSet, EPPoint, Word};

/// A closed set at resolution `depth`: the clopen `hull` (a union of
/// depth-`depth` cylinders) inside an `ambient` clopen set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrunedTree {
    pub depth: usize,
    pub ambient: ClopenSet,
    pub hull: ClopenSet,
}

/// A maximal cylinder of `ambient \ hull` and its nearest kept word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RemovedPiece {
    pub word: Word,
    pub anchor: Option<Word>,
}

impl RemovedPiece {
    /// `-log2` of the distance to the anchor.
    pub fn closeness(&self) -> usize {
        self.anchor.as_ref().map_or(0, |a| self.word.common_prefix_len(a))
    }
}

impl PrunedTree {
    pub fn new(ambient: ClopenSet, hull: ClopenSet, depth: usize) -> Result<Self> {
        ambient.alphabet().check(hull.alphabet())?;
        if !hull.is_subset(&ambient)? {
            return Err(Error::InvalidTree("hull must lie in the ambient set".into()));
        }
        if hull.depth() > depth {
            return Err(Error::InvalidTree(format!("hull is finer than depth {depth}")));
        }
        Ok(PrunedTree { depth, ambient, hull })
    }

    /// The single point `x` seen at depth `d` inside the whole space.
    pub fn point(k: Alphabet, x: &EPPoint, depth: usize) -> Self {
        PrunedTree {
            depth,
            ambient: ClopenSet::whole(k),
            hull: ClopenSet::cylinder(k, x.prefix(depth)),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.ambient.alphabet()
    }

    pub fn kept_words(&self) -> Vec<Word> {
        self.hull.expand(self.depth)
    }

    /// Every kept word shorter than `m + 1` has a removed extension.
    pub fn is_nowhere_dense_to(&self, m: usize) -> bool {
        self.hull.words().iter().all(|w| w.len() > m)
    }

    pub fn is_nowhere_dense(&self) -> bool {
        self.is_nowhere_dense_to(self.depth.saturating_sub(1))
    }

    pub fn pieces(&self) -> Vec<RemovedPiece> {
        let kept = self.kept_words();
        let removed = self.ambient.difference(&self.hull).expect("same alphabet");
        removed
            .words()
            .iter()
            .map(|u| RemovedPiece {
                word: u.clone(),
                anchor: kept
                    .iter()
                    .max_by(|a, b| u.common_prefix_len(a).cmp(&u.common_prefix_len(b)).then(b.cmp(a)))
                    .cloned(),
            })
            .collect()
    }
}

/// Pairing of the removed pieces of two trees in which every pair is
/// strictly closer on one side: `f` on `I′ → J′` and `g` on `J″ → I″`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchingCertificate {
    pub left: Vec<RemovedPiece>,
    pub right: Vec<RemovedPiece>,
    pub f: BTreeMap<usize, usize>,
    pub g: BTreeMap<usize, usize>,
}

fn image_closeness(piece: &Word, anchor: &Option<Word>, map: &BTreeMap<Word, Word>) -> Option<usize> {
    anchor.as_ref().map(|a| piece.common_prefix_len(&map[a]))
}

fn f_edge(u: &RemovedPiece, v: &RemovedPiece, h: &BTreeMap<Word, Word>) -> bool {
    image_closeness(&v.word, &u.anchor, h).is_some_and(|c| c > u.closeness())
}

impl MatchingCertificate {
    /// Checks the strict inequalities and that `f` and `g` split both index
    /// sets into complementary injective images.
    pub fn validate(&self, h: &BTreeMap<Word, Word>) -> bool {
        let h_inv: BTreeMap<Word, Word> = h.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        let strict_f = self.f.iter().all(|(&i, &j)| f_edge(&self.left[i], &self.right[j], h));
        let strict_g = self.g.iter().all(|(&j, &i)| f_edge(&self.right[j], &self.left[i], &h_inv));
        let left: BTreeSet<usize> = self.f.keys().chain(self.g.values()).copied().collect();
        let right: BTreeSet<usize> = self.f.values().chain(self.g.keys()).copied().collect();
        strict_f
            && strict_g
            && left.len() == self.left.len()
            && right.len() == self.right.len()
            && self.f.len() + self.g.len() == self.left.len()
            && self.left.len() == self.right.len()
    }
}

fn check_bijection(a: &PrunedTree, b: &PrunedTree, h: &BTreeMap<Word, Word>) -> Result<()> {
    a.alphabet().check(b.alphabet())?;
    if a.depth != b.depth {
        return Err(Error::InvalidTree("trees must share a depth".into()));
    }
    let keys: BTreeSet<Word> = h.keys().cloned().collect();
    let values: BTreeSet<Word> = h.values().cloned().collect();
    if keys != a.kept_words().into_iter().collect()
        || values != b.kept_words().into_iter().collect()
        || values.len() != h.len()
    {
        return Err(Error::InvalidTree("h must biject the kept words".into()));
    }
    Ok(())
}

/// Finds a pairing of removed pieces where every pair is strictly closer on
/// its image side. Pieces are processed largest first; each tries strictly
/// closer `f`-partners (nearest first) before `g`-partners, with augmenting
/// paths when a partner is taken.
pub fn kr_matching(a: &PrunedTree, b: &PrunedTree, h: &BTreeMap<Word, Word>) -> Result<MatchingCertificate> {
    check_bijection(a, b, h)?;
    if !a.is_nowhere_dense() || !b.is_nowhere_dense() {
        return Err(Error::InvalidTree("trees must be nowhere dense at their depth".into()));
    }
    let left = a.pieces();
    let right = b.pieces();
    if a.hull.is_empty() && b.hull.is_empty() {
        return Ok(MatchingCertificate { left, right, f: BTreeMap::new(), g: BTreeMap::new() });
    }
    let no_match = Error::NoStrictMatch { depth: a.depth };
    if left.len() != right.len() {
        return Err(no_match);
    }
    let h_inv: BTreeMap<Word, Word> = h.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
    let adjacency: Vec<Vec<(usize, bool)>> = left
        .iter()
        .map(|u| {
            let mut fs: Vec<usize> = (0..right.len()).filter(|&j| f_edge(u, &right[j], h)).collect();
            fs.sort_by_key(|&j| std::cmp::Reverse(image_closeness(&right[j].word, &u.anchor, h)));
            let gs = (0..right.len()).filter(|&j| f_edge(&right[j], u, &h_inv));
            fs.into_iter().map(|j| (j, true)).chain(gs.map(|j| (j, false))).collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..left.len()).collect();
    order.sort_by_key(|&i| (left[i].word.len(), i));
    let mut owner: Vec<Option<(usize, bool)>> = vec![None; right.len()];
    for &i in &order {
        let mut visited = vec![false; right.len()];
        if !augment(i, &adjacency, &mut owner, &mut visited) {
            return Err(no_match);
        }
    }
    let mut f = BTreeMap::new();
    let mut g = BTreeMap::new();
    for (j, o) in owner.into_iter().enumerate() {
        match o.expect("perfect matching") {
            (i, true) => f.insert(i, j),
            (i, false) => g.insert(j, i),
        };
    }
    Ok(MatchingCertificate { left, right, f, g })
}

fn augment(
    i: usize,
    adjacency: &[Vec<(usize, bool)>],
    owner: &mut [Option<(usize, bool)>],
    visited: &mut [bool],
) -> bool {
    for &(j, via_f) in &adjacency[i] {
        if std::mem::replace(&mut visited[j], true) {
            continue;
        }
        if owner[j].is_none_or(|(other, _)| augment(other, adjacency, owner, visited)) {
            owner[j] = Some((i, via_f));
            return true;
        }
    }
    false
}

/// Extends `h` to a homeomorphism: `h` on kept cylinders, matched pieces
/// onto each other, and the complement of the ambient sets onto each other.
pub fn kr_extension(
    a: &PrunedTree,
    b: &PrunedTree,
    h: &BTreeMap<Word, Word>,
    matching: &MatchingCertificate,
) -> Result<AdicMap> {
    check_bijection(a, b, h)?;
    let k = a.alphabet();
    let mut pairs: Vec<Pair> = h.iter().map(|(x, y)| Pair::new(x.clone(), y.clone(), 0)).collect();
    if a.hull.is_empty() && b.hull.is_empty() {
        pairs.extend(clopen_code_bijection(&a.ambient, &b.ambient)?);
    } else {
        if !matching.validate(h) {
            return Err(Error::NoStrictMatch { depth: a.depth });
        }
        let pieces = matching
            .f
            .iter()
            .map(|(&i, &j)| (i, j))
            .chain(matching.g.iter().map(|(&j, &i)| (i, j)));
        for (i, j) in pieces {
            let u = ClopenSet::cylinder(k, matching.left[i].word.clone());
            let v = ClopenSet::cylinder(k, matching.right[j].word.clone());
            pairs.extend(clopen_code_bijection(&u, &v)?);
        }
    }
    let (outside_a, outside_b) = (a.ambient.complement(), b.ambient.complement());
    match (outside_a.is_empty(), outside_b.is_empty()) {
        (true, true) => {}
        (false, false) => pairs.extend(clopen_code_bijection(&outside_a, &outside_b)?),
        _ => return Err(Error::InvalidTree("ambient sets must both be proper or both whole".into())),
    }
    AdicMap::from_pairs(k, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const K: Alphabet = Alphabet::BINARY;

    fn identity_on(t: &PrunedTree) -> BTreeMap<Word, Word> {
        t.kept_words().into_iter().map(|w| (w.clone(), w)).collect()
    }

    #[test]
    fn singleton_depth_three() {
        let t = PrunedTree::point(K, &EPPoint::constant(0), 3);
        assert!(t.is_nowhere_dense());
        let pieces = t.pieces();
        let words: Vec<String> = pieces.iter().map(|p| p.word.to_string()).collect();
        assert_eq!(words, ["001", "01", "1"]);
        assert!(pieces.iter().all(|p| p.anchor.as_ref().unwrap().to_string() == "000"));
        let h = identity_on(&t);
        let m = kr_matching(&t, &t, &h).unwrap();
        assert!(m.validate(&h));
        let ext = kr_extension(&t, &t, &h, &m).unwrap();
        let zero = Word::parse(K, "000").unwrap();
        let kept = ClopenSet::cylinder(K, zero.clone());
        assert_eq!(ext.image(&kept).unwrap(), kept);
        assert_eq!(ext.apply(&EPPoint::constant(0)), EPPoint::constant(0));
    }

    #[test]
    fn too_shallow() {
        let t = PrunedTree::point(K, &EPPoint::constant(0), 1);
        let h = identity_on(&t);
        assert!(matches!(kr_matching(&t, &t, &h), Err(Error::NoStrictMatch { depth: 1 })));
    }

    #[test]
    fn empty_trees_extend_to_identity() {
        let t = PrunedTree::new(ClopenSet::whole(K), ClopenSet::empty(K), 3).unwrap();
        let h = BTreeMap::new();
        let m = kr_matching(&t, &t, &h).unwrap();
        assert!(kr_extension(&t, &t, &h, &m).unwrap().is_identity());
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = PrunedTree::point(K, &EPPoint::constant(0), 3);
        let u = PrunedTree::point(K, &EPPoint::constant(1), 3);
        assert!(kr_matching(&t, &u, &identity_on(&t)).is_err());
        let dense = PrunedTree::new(ClopenSet::whole(K), ClopenSet::parse(K, &["0"]).unwrap(), 3).unwrap();
        assert!(!dense.is_nowhere_dense());
        assert!(kr_matching(&dense, &dense, &identity_on(&dense)).is_err());
    }

    #[test]
    fn symmetric_matching_mirrors() {
        for d in 2..=8 {
            let t = PrunedTree::point(K, &EPPoint::constant(0), d);
            let h = identity_on(&t);
            let m = kr_matching(&t, &t, &h).unwrap();
            assert!(m.validate(&h), "depth {d}");
            assert!(!m.f.is_empty() && !m.g.is_empty());
        }
    }
}
