use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::homeo::AdicMap;
use crate::space::{Alphabet, ClopenSet, EPPoint, Word};

/// A `T`-tower `base, T base, …, T^{h-1} base`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tower {
    pub base: ClopenSet,
    pub height: usize,
    pub levels: Vec<ClopenSet>,
}

impl Tower {
    pub fn top(&self) -> &ClopenSet {
        &self.levels[self.height - 1]
    }
}

/// A clopen Kakutani–Rokhlin partition whose levels are unions of depth-`depth`
/// cylinders. Atoms are addressed `(j, i)`: level `j` of tower `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KRPartition {
    k: Alphabet,
    depth: usize,
    towers: Vec<Tower>,
    #[serde(skip)]
    index: Vec<(usize, usize)>,
}

impl KRPartition {
    pub fn alphabet(&self) -> Alphabet {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn towers(&self) -> &[Tower] {
        &self.towers
    }

    pub fn base(&self) -> ClopenSet {
        ClopenSet::from_words(
            self.k,
            self.towers.iter().flat_map(|t| t.base.words().iter().cloned()),
        )
    }

    pub fn min_height(&self) -> usize {
        self.towers.iter().map(|t| t.height).min().unwrap_or(0)
    }

    pub fn atom(&self, j: usize, i: usize) -> &ClopenSet {
        &self.towers[i].levels[j]
    }

    /// All atoms with their addresses, tower by tower.
    pub fn atoms(&self) -> impl Iterator<Item = ((usize, usize), &ClopenSet)> {
        self.towers
            .iter()
            .enumerate()
            .flat_map(|(i, t)| t.levels.iter().enumerate().map(move |(j, l)| ((j, i), l)))
    }

    pub fn atom_count(&self) -> usize {
        self.towers.iter().map(|t| t.height).sum()
    }

    /// Address of the atom containing `[w]`, for `|w| >= depth`.
    pub fn locate(&self, w: &Word) -> (usize, usize) {
        self.index[w.prefix(self.depth).value(self.k) as usize]
    }

    pub fn locate_point(&self, x: &EPPoint) -> (usize, usize) {
        self.locate(&x.prefix(self.depth))
    }

    /// Levels partition X, `T` lifts each level to the next, and the tops are
    /// exactly `T^{-1}` of the base.
    pub fn check_invariants(&self) -> bool {
        let t = AdicMap::odometer(self.k);
        let mut union = ClopenSet::empty(self.k);
        for tower in &self.towers {
            for (j, level) in tower.levels.iter().enumerate() {
                if level.is_empty() || !union.is_disjoint(level).unwrap_or(false) {
                    return false;
                }
                union = union.union(level).expect("same alphabet");
                if j + 1 < tower.height && t.image(level).ok().as_ref() != Some(&tower.levels[j + 1]) {
                    return false;
                }
            }
        }
        let tops = ClopenSet::from_words(
            self.k,
            self.towers.iter().flat_map(|t| t.top().words().iter().cloned()),
        );
        union.is_whole() && t.preimage(&self.base()).ok() == Some(tops)
    }

    /// Graphviz rendering: towers as columns with `T`-edges going up, and
    /// α-links from tops to the bases they feed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph kr {\n  rankdir=BT;\n  node [shape=box];\n");
        for (i, tower) in self.towers.iter().enumerate() {
            let _ = writeln!(out, "  subgraph cluster_{i} {{\n    label=\"tower {i} (h={})\";", tower.height);
            for (j, level) in tower.levels.iter().enumerate() {
                let _ = writeln!(out, "    t{i}_{j} [label=\"{}\"];", words_label(level));
            }
            for j in 1..tower.height {
                let _ = writeln!(out, "    t{i}_{} -> t{i}_{j};", j - 1);
            }
            out.push_str("  }\n");
        }
        let alpha = alpha_structure(self);
        for (i, targets) in alpha.links.iter().enumerate() {
            for &target in targets {
                let _ = writeln!(
                    out,
                    "  t{i}_{} -> t{target}_0 [style=dashed, color=blue];",
                    self.towers[i].height - 1
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

fn words_label(c: &ClopenSet) -> String {
    c.words().iter().map(|w| format!("{w:?}")).collect::<Vec<_>>().join(",")
}

/// First-return partition over `base`, resolved at its canonical depth.
pub fn kr_partition(base: &ClopenSet) -> Result<KRPartition> {
    if base.is_empty() {
        return Err(Error::EmptyBase);
    }
    let k = base.alphabet();
    let m = base.depth();
    let n = k.count(m);
    let words: Vec<Word> = k.words(m).collect();
    let owner: Vec<Option<&Word>> = words
        .iter()
        .map(|w| (0..=m).map(|l| w.prefix(l)).find_map(|p| base.words().get(&p)))
        .collect();
    let mut groups: BTreeMap<(&Word, usize), Vec<usize>> = BTreeMap::new();
    for v in (0..n).filter(|&v| owner[v].is_some()) {
        let height = (1..=n).find(|s| owner[(v + s) % n].is_some()).expect("base is nonempty");
        groups.entry((owner[v].unwrap(), height)).or_default().push(v);
    }
    let mut towers: Vec<(Vec<usize>, usize)> = groups
        .into_iter()
        .map(|((_, h), starts)| (starts, h))
        .collect();
    towers.sort_by(|a, b| words[a.0[0]].cmp(&words[b.0[0]]));

    let mut index = vec![(0, 0); n];
    let towers = towers
        .into_iter()
        .enumerate()
        .map(|(i, (starts, height))| {
            let levels = (0..height)
                .map(|j| {
                    ClopenSet::from_words(
                        k,
                        starts.iter().map(|&v| {
                            index[(v + j) % n] = (j, i);
                            words[(v + j) % n].clone()
                        }),
                    )
                })
                .collect::<Vec<_>>();
            Tower { base: levels[0].clone(), height, levels }
        })
        .collect();
    Ok(KRPartition { k, depth: m, towers, index })
}

/// `P_n`: the first-return partition over `[0^n]`, a single tower of height
/// `k^n`.
pub fn canonical_sequence(k: Alphabet, n: usize) -> KRPartition {
    kr_partition(&ClopenSet::cylinder(k, Word::repeat(0, n))).expect("nonempty base")
}

/// The five structural conditions linking `P_n` and `P_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    /// (i) every atom of `P_{n+1}` lies in an atom of `P_n`.
    pub refines: bool,
    /// (ii) minimal heights strictly increase.
    pub heights_increase: bool,
    /// (iii) `B(P_{n+1}) ⊆ B(P_n)`.
    pub bases_nest: bool,
    /// (iv) atoms of `P_n` separate the depth-`n` cylinders.
    pub separates: bool,
    /// (v) the only depth-`n` cylinder meeting `B(P_n)` is `[0^n]`, which
    /// contains `0^∞`.
    pub base_shrinks_to_point: bool,
}

impl ConditionReport {
    pub fn all(&self) -> bool {
        self.refines
            && self.heights_increase
            && self.bases_nest
            && self.separates
            && self.base_shrinks_to_point
    }
}

pub fn kr_conditions(k: Alphabet, n: usize) -> ConditionReport {
    let p = canonical_sequence(k, n);
    let q = canonical_sequence(k, n + 1);
    let refines = q.atoms().all(|(_, atom)| {
        let first = atom.words().iter().next().expect("atoms are nonempty");
        let (j, i) = p.locate(&first.concat(&Word::repeat(0, p.depth().saturating_sub(first.len()))));
        atom.is_subset(p.atom(j, i)).unwrap_or(false)
    });
    let separates = p.atoms().all(|(_, atom)| {
        let first = atom.words().iter().next().expect("atoms are nonempty");
        first.len() >= n && atom.words().iter().all(|w| w.len() >= n && w.prefix(n) == first.prefix(n))
    });
    let base = p.base();
    let zeros = Word::repeat(0, n);
    ConditionReport {
        n,
        refines,
        heights_increase: q.min_height() > p.min_height(),
        bases_nest: q.base().is_subset(&base).unwrap_or(false),
        separates,
        base_shrinks_to_point: base.contains(&EPPoint::constant(0))
            && base.words().iter().all(|w| w.len() >= n && w.prefix(n) == zeros),
    }
}

/// A minimal set `J` of towers whose tops map onto exactly the bases of `J′`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaAtom {
    pub towers: Vec<usize>,
    pub bases: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaStructure {
    pub atoms: Vec<AlphaAtom>,
    /// For each tower, the towers whose bases meet `T` of its top.
    pub links: Vec<Vec<usize>>,
}

impl AlphaStructure {
    pub fn atom_of_tower(&self, i: usize) -> &AlphaAtom {
        self.atoms.iter().find(|a| a.towers.contains(&i)).expect("every tower is in an atom")
    }

    pub fn atom_of_base(&self, i: usize) -> &AlphaAtom {
        self.atoms.iter().find(|a| a.bases.contains(&i)).expect("every base is in an atom")
    }
}

/// Connected components of the relation "T(top_i) meets base_{i'}".
pub fn alpha_structure(p: &KRPartition) -> AlphaStructure {
    let t = AdicMap::odometer(p.k);
    let links: Vec<Vec<usize>> = p
        .towers
        .iter()
        .map(|tower| {
            let image = t.image(tower.top()).expect("same alphabet");
            let mut hit: Vec<usize> = image.expand(p.depth).iter().map(|w| p.locate(w).1).collect();
            hit.sort_unstable();
            hit.dedup();
            hit
        })
        .collect();
    let n = p.towers.len();
    let mut seen_top = vec![false; n];
    let mut atoms = Vec::new();
    for start in 0..n {
        if seen_top[start] {
            continue;
        }
        let mut towers = vec![start];
        let mut bases: Vec<usize> = Vec::new();
        seen_top[start] = true;
        let mut frontier = vec![start];
        while let Some(i) = frontier.pop() {
            for &b in &links[i] {
                if bases.contains(&b) {
                    continue;
                }
                bases.push(b);
                for (i2, l) in links.iter().enumerate() {
                    if !seen_top[i2] && l.contains(&b) {
                        seen_top[i2] = true;
                        towers.push(i2);
                        frontier.push(i2);
                    }
                }
            }
        }
        towers.sort_unstable();
        bases.sort_unstable();
        atoms.push(AlphaAtom { towers, bases });
    }
    AlphaStructure { atoms, links }
}

/// `T(∪_{i∈J} top_i)` is exactly a union of whole bases.
pub fn satisfies_atom_equation(p: &KRPartition, towers: &[usize]) -> bool {
    let t = AdicMap::odometer(p.k);
    let tops = towers.iter().fold(ClopenSet::empty(p.k), |acc, &i| {
        acc.union(p.towers[i].top()).expect("same alphabet")
    });
    let image = t.image(&tops).expect("same alphabet");
    let mut hit: Vec<usize> = image.expand(p.depth).iter().map(|w| p.locate(w).1).collect();
    hit.sort_unstable();
    hit.dedup();
    let bases = hit.iter().fold(ClopenSet::empty(p.k), |acc, &i| {
        acc.union(&p.towers[i].base).expect("same alphabet")
    });
    bases == image
}
