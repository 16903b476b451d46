use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Symbol count `k` of the full shift `{0..k-1}^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Alphabet(u8);

impl Alphabet {
    pub const BINARY: Alphabet = Alphabet(2);

    pub fn new(k: u32) -> Result<Self> {
        if (2..=36).contains(&k) {
            Ok(Alphabet(k as u8))
        } else {
            Err(Error::InvalidAlphabet(k))
        }
    }

    pub fn size(self) -> u8 {
        self.0
    }

    pub fn k(self) -> i64 {
        self.0 as i64
    }

    pub fn check(self, other: Alphabet) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch { left: self.0, right: other.0 })
        }
    }

    /// `k^n` as a `usize`; panics if it does not fit.
    pub fn count(self, n: usize) -> usize {
        (self.0 as usize)
            .checked_pow(n as u32)
            .expect("cylinder count overflows usize")
    }

    /// All words of length `n`, listed in increasing value order.
    pub fn words(self, n: usize) -> impl Iterator<Item = Word> {
        (0..self.count(n)).map(move |v| Word::from_value(self, v as u64, n))
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let k = u32::deserialize(d)?;
        Alphabet::new(k).map_err(serde::de::Error::custom)
    }
}

/// A finite word; denotes the cylinder `[w]` of points starting with `w`.
///
/// Ordering is lexicographic on symbols, which places a prefix before all of
/// its extensions and keeps every subtree contiguous.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(k: Alphabet, symbols: Vec<u8>) -> Result<Self> {
        if let Some(&symbol) = symbols.iter().find(|&&s| s >= k.size()) {
            return Err(Error::InvalidSymbol { symbol, k: k.size() });
        }
        Ok(Word(symbols))
    }

    pub(crate) fn from_symbols(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }

    /// The length-`n` word whose value is `value mod k^n`.
    pub fn from_value(k: Alphabet, mut value: u64, n: usize) -> Self {
        let base = k.size() as u64;
        let mut symbols = Vec::with_capacity(n);
        for _ in 0..n {
            symbols.push((value % base) as u8);
            value /= base;
        }
        Word(symbols)
    }

    /// `k` copies of a symbol, e.g. `0^n` or `(k-1)^n`.
    pub fn repeat(symbol: u8, n: usize) -> Self {
        Word(vec![symbol; n])
    }

    pub fn parse(k: Alphabet, s: &str) -> Result<Self> {
        if s == "ε" {
            return Ok(Word::empty());
        }
        let mut symbols = Vec::with_capacity(s.len());
        for c in s.chars() {
            let d = c
                .to_digit(36)
                .filter(|&d| d < k.size() as u32)
                .ok_or_else(|| Error::InvalidWord(s.to_string()))?;
            symbols.push(d as u8);
        }
        Ok(Word(symbols))
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum symbols[i] * k^i`.
    pub fn value(&self, k: Alphabet) -> u64 {
        self.0
            .iter()
            .rev()
            .fold(0u64, |acc, &s| acc * k.size() as u64 + s as u64)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Two cylinders intersect iff one word is a prefix of the other.
    pub fn comparable(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n].to_vec())
    }

    pub fn suffix(&self, from: usize) -> Word {
        Word(self.0[from..].to_vec())
    }

    pub fn parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn child(&self, symbol: u8) -> Word {
        let mut v = self.0.clone();
        v.push(symbol);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn children(&self, k: Alphabet) -> impl Iterator<Item = Word> + '_ {
        (0..k.size()).map(move |a| self.child(a))
    }

    /// All extensions of `self` of total length `n` (`n >= len`).
    pub fn extensions(&self, k: Alphabet, n: usize) -> impl Iterator<Item = Word> + '_ {
        k.words(n - self.len()).map(move |w| self.concat(&w))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", DIGITS[s as usize] as char)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "ε")
        } else {
            write!(f, "{self}")
        }
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        // Symbol range is checked by the owning structure, which knows `k`.
        Word::parse(Alphabet(36), &s).map_err(serde::de::Error::custom)
    }
}
