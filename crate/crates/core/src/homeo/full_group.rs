use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{AdicMap, Pair};
use crate::error::{Error, Result};
use crate::space::{Alphabet, ClopenSet, Word};

/// A homeomorphism certified to lie in the topological full group `[[T]]`,
/// together with its power cocycle `c` on the depth-`level` cylinders:
/// `S = T^{c(w)}` on `[w]`.
#[derive(Debug, Clone)]
pub struct FullGroupElement {
    map: AdicMap,
    level: usize,
    powers: Vec<i64>,
}

impl PartialEq for FullGroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map
    }
}

impl Eq for FullGroupElement {}

/// The partition `X = ⊔_n X_n ⊔ X_∞` by exact period, as clopen sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalPartition {
    pub periodic_parts: BTreeMap<usize, ClopenSet>,
    pub aperiodic_part: ClopenSet,
}

/// One cycle of the level permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    /// Cylinder values in orbit order.
    pub values: Vec<usize>,
    /// Sum of the powers along the cycle; zero iff every point is periodic.
    pub displacement: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Periodicity {
    pub partition: CanonicalPartition,
    /// `lcm` of the periods when `S` is periodic.
    pub order: Option<BigUint>,
}

impl FullGroupElement {
    /// Certifies membership at the depth of the canonical table.
    pub fn certify(map: &AdicMap) -> Result<Self> {
        Self::certify_at_level(map, map.depth())
    }

    pub fn certify_at_level(map: &AdicMap, level: usize) -> Result<Self> {
        let k = map.alphabet();
        let level = level.max(map.depth());
        let mut powers = vec![0i64; k.count(level)];
        for p in map.pairs() {
            let c = pair_power(k, p)?;
            for ext in k.words(level - p.input.len()) {
                powers[p.input.concat(&ext).value(k) as usize] = c;
            }
        }
        Ok(FullGroupElement { map: map.clone(), level, powers })
    }

    /// Builds `S` from its powers on the depth-`level` cylinders, listed in
    /// value order.
    pub fn from_powers(k: Alphabet, level: usize, powers: Vec<i64>) -> Result<Self> {
        let n = k.count(level);
        if powers.len() != n {
            return Err(Error::NotAPermutation { level });
        }
        let modulus = n as i64;
        let mut seen = vec![false; n];
        let mut pairs = Vec::with_capacity(n);
        for (v, &c) in powers.iter().enumerate() {
            let s = (v as i64).checked_add(c).ok_or(Error::Overflow("power"))?;
            let img = s.rem_euclid(modulus) as usize;
            if std::mem::replace(&mut seen[img], true) {
                return Err(Error::NotAPermutation { level });
            }
            pairs.push(Pair::new(
                Word::from_value(k, v as u64, level),
                Word::from_value(k, img as u64, level),
                s.div_euclid(modulus),
            ));
        }
        Ok(FullGroupElement { map: AdicMap::from_valid_pairs(k, pairs), level, powers })
    }

    pub fn map(&self) -> &AdicMap {
        &self.map
    }

    pub fn alphabet(&self) -> Alphabet {
        self.map.alphabet()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Powers on the depth-`level` cylinders, in value order.
    pub fn powers(&self) -> &[i64] {
        &self.powers
    }

    /// The same element tabulated at a deeper level.
    pub fn at_level(&self, n: usize) -> Self {
        Self::certify_at_level(&self.map, n.max(self.level)).expect("already certified")
    }

    /// Power on the cylinder `[w]`; `w` must be at least `level` long.
    pub fn power_at(&self, w: &Word) -> i64 {
        self.powers[w.prefix(self.level).value(self.alphabet()) as usize]
    }

    /// Powers taken on a clopen set, as `(power, region)` pairs.
    pub fn powers_on(&self, c: &ClopenSet) -> BTreeMap<i64, ClopenSet> {
        let k = self.alphabet();
        let n = self.level.max(c.depth());
        let mut by_power: BTreeMap<i64, Vec<Word>> = BTreeMap::new();
        for w in c.expand(n) {
            by_power.entry(self.power_at(&w)).or_default().push(w);
        }
        by_power
            .into_iter()
            .map(|(p, ws)| (p, ClopenSet::from_words(k, ws)))
            .collect()
    }

    pub fn max_abs_power(&self) -> i64 {
        self.powers.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// Image value of each depth-`level` cylinder.
    pub fn cylinder_permutation(&self) -> Vec<usize> {
        let n = self.powers.len() as i64;
        self.powers
            .iter()
            .enumerate()
            .map(|(v, &c)| (v as i64 + c).rem_euclid(n) as usize)
            .collect()
    }

    pub fn cycles(&self) -> Vec<Cycle> {
        let perm = self.cylinder_permutation();
        let mut seen = vec![false; perm.len()];
        let mut out = Vec::new();
        for start in 0..perm.len() {
            if seen[start] {
                continue;
            }
            let mut values = Vec::new();
            let mut displacement = 0i64;
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                values.push(v);
                displacement += self.powers[v];
                v = perm[v];
            }
            out.push(Cycle { values, displacement });
        }
        out
    }

    /// Exact periods: a cylinder on a cycle with zero displacement is made of
    /// points of period equal to the cycle length; otherwise every point in
    /// it has an infinite orbit.
    pub fn periodicity(&self) -> Periodicity {
        let k = self.alphabet();
        let mut parts: BTreeMap<usize, Vec<Word>> = BTreeMap::new();
        let mut aperiodic = Vec::new();
        for cyc in self.cycles() {
            let words = cyc.values.iter().map(|&v| Word::from_value(k, v as u64, self.level));
            if cyc.displacement == 0 {
                parts.entry(cyc.values.len()).or_default().extend(words);
            } else {
                aperiodic.extend(words);
            }
        }
        let order = aperiodic.is_empty().then(|| {
            parts
                .keys()
                .fold(BigUint::one(), |acc, &n| acc.lcm(&BigUint::from(n)))
        });
        Periodicity {
            partition: CanonicalPartition {
                periodic_parts: parts
                    .into_iter()
                    .map(|(n, ws)| (n, ClopenSet::from_words(k, ws)))
                    .collect(),
                aperiodic_part: ClopenSet::from_words(k, aperiodic),
            },
            order,
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.cycles().iter().all(|c| c.displacement == 0)
    }

    /// `S^m` computed cycle by cycle, so that huge exponents cost nothing.
    pub fn power_big(&self, m: &BigUint) -> Result<Self> {
        let mut powers = vec![0i64; self.powers.len()];
        for cyc in self.cycles() {
            let len = cyc.values.len();
            let (q, r) = m.div_rem(&BigUint::from(len));
            let r = r.to_usize().expect("remainder below cycle length");
            let wraps = if cyc.displacement == 0 || q.is_zero() {
                0
            } else {
                q.to_i64()
                    .and_then(|q| q.checked_mul(cyc.displacement))
                    .ok_or(Error::Overflow("power exponent"))?
            };
            let mut prefix = vec![0i64; 2 * len + 1];
            for i in 0..2 * len {
                prefix[i + 1] = prefix[i] + self.powers[cyc.values[i % len]];
            }
            for (i, &v) in cyc.values.iter().enumerate() {
                powers[v] = wraps + prefix[i + r] - prefix[i];
            }
        }
        Self::from_powers(self.alphabet(), self.level, powers)
    }
}

/// `c` with `S = T^c` on `[u]`, which exists iff `|u| = |v|`.
fn pair_power(k: Alphabet, p: &Pair) -> Result<i64> {
    if p.input.len() != p.output.len() {
        return Err(Error::NotInFullGroup { pair: p.clone() });
    }
    let scale = k
        .k()
        .checked_pow(p.input.len() as u32)
        .ok_or(Error::Overflow("level"))?;
    p.twist
        .checked_mul(scale)
        .and_then(|t| t.checked_add(p.output.value(k) as i64 - p.input.value(k) as i64))
        .ok_or(Error::Overflow("power"))
}

#[derive(Serialize, Deserialize)]
struct PowerTable {
    k: Alphabet,
    level: usize,
    c: BTreeMap<Word, i64>,
}

impl Serialize for FullGroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let k = self.alphabet();
        PowerTable {
            k,
            level: self.level,
            c: k.words(self.level).zip(self.powers.iter().copied()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FullGroupElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let t = PowerTable::deserialize(d)?;
        if t.c.len() != t.k.count(t.level) || t.c.keys().any(|w| w.len() != t.level) {
            return Err(D::Error::custom("power table must list every cylinder of the level"));
        }
        let mut powers = vec![0; t.c.len()];
        for (w, c) in t.c {
            Word::new(t.k, w.symbols().to_vec()).map_err(D::Error::custom)?;
            powers[w.value(t.k) as usize] = c;
        }
        Self::from_powers(t.k, t.level, powers).map_err(D::Error::custom)
    }
}
