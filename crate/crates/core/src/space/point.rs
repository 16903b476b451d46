use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Alphabet, Word};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// An eventually periodic point `pre · per^∞`, stored canonically: `per` is
/// primitive and `pre` is as short as possible, so equality of values is
/// equality of points.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EPPoint {
    pre: Word,
    per: Word,
}

impl EPPoint {
    pub fn new(pre: Word, per: Word) -> Result<Self> {
        if per.is_empty() {
            return Err(Error::InvalidPoint("period must be nonempty".into()));
        }
        Ok(canonical(pre.symbols().to_vec(), per.symbols().to_vec()))
    }

    pub fn periodic(per: Word) -> Self {
        Self::new(Word::empty(), per).expect("nonempty period")
    }

    /// `s^∞` for a single symbol.
    pub fn constant(symbol: u8) -> Self {
        canonical(Vec::new(), vec![symbol])
    }

    /// `w · 0^∞`.
    pub fn finite(w: &Word) -> Self {
        canonical(w.symbols().to_vec(), vec![0])
    }

    pub fn preperiod(&self) -> &Word {
        &self.pre
    }

    pub fn period(&self) -> &Word {
        &self.per
    }

    pub fn check_alphabet(&self, k: Alphabet) -> Result<()> {
        Word::new(k, self.pre.symbols().to_vec())?;
        Word::new(k, self.per.symbols().to_vec())?;
        Ok(())
    }

    pub fn digit(&self, i: usize) -> u8 {
        let l = self.pre.len();
        if i < l {
            self.pre.symbols()[i]
        } else {
            self.per.symbols()[(i - l) % self.per.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word::from_symbols((0..n).map(|i| self.digit(i)).collect())
    }

    /// The point with its first `n` coordinates removed.
    pub fn shift(&self, n: usize) -> EPPoint {
        let l = self.pre.len();
        if n <= l {
            canonical(self.pre.symbols()[n..].to_vec(), self.per.symbols().to_vec())
        } else {
            let p = self.per.len();
            let r = (n - l) % p;
            let mut per = self.per.symbols()[r..].to_vec();
            per.extend_from_slice(&self.per.symbols()[..r]);
            canonical(Vec::new(), per)
        }
    }

    /// `w · x`.
    pub fn prepend(&self, w: &Word) -> EPPoint {
        let mut pre = w.symbols().to_vec();
        pre.extend_from_slice(self.pre.symbols());
        canonical(pre, self.per.symbols().to_vec())
    }

    /// Image under the `t`-th power of the odometer (k-adic addition of `t`).
    pub fn add(&self, k: Alphabet, t: i64) -> EPPoint {
        if t == 0 {
            return self.clone();
        }
        let base = k.k();
        let l = self.pre.len();
        let p = self.per.len();
        let mut digits = Vec::new();
        let mut seen: HashMap<i64, usize> = HashMap::new();
        let mut carry = t;
        let mut i = 0;
        loop {
            if i >= l && (i - l).is_multiple_of(p) {
                if let Some(&j) = seen.get(&carry) {
                    let per = digits[j..].to_vec();
                    digits.truncate(j);
                    return canonical(digits, per);
                }
                seen.insert(carry, i);
            }
            let s = self.digit(i) as i64 + carry;
            digits.push(s.rem_euclid(base) as u8);
            carry = s.div_euclid(base);
            i += 1;
        }
    }

    /// The k-adic expansion of `num / den`, which is eventually periodic when
    /// `den > 0` is coprime to `k`.
    pub fn from_kadic(k: Alphabet, num: i128, den: i128) -> Result<EPPoint> {
        let base = k.k() as i128;
        if den <= 0 || num_integer::gcd(den, base) != 1 {
            return Err(Error::InvalidPoint(format!("denominator {den} not coprime to {base}")));
        }
        let inv = (1..base)
            .find(|d| (d * den).rem_euclid(base) == 1)
            .expect("unit modulo k");
        let mut digits = Vec::new();
        let mut seen: HashMap<i128, usize> = HashMap::new();
        let mut n = num;
        loop {
            if let Some(&j) = seen.get(&n) {
                let per = digits[j..].to_vec();
                digits.truncate(j);
                return Ok(canonical(digits, per));
            }
            seen.insert(n, digits.len());
            let d = (n.rem_euclid(base) * inv).rem_euclid(base);
            digits.push(d as u8);
            n = (n - d * den) / base;
        }
    }

    /// Length of the longest common prefix, `None` when the points coincide.
    pub fn lcp(&self, other: &EPPoint) -> Option<usize> {
        if self == other {
            return None;
        }
        (0..).find(|&i| self.digit(i) != other.digit(i))
    }
}

/// `d(x, y) = 2^-m` where `m` is the common prefix length; `0` iff `x = y`.
pub fn lcp_distance(x: &EPPoint, y: &EPPoint) -> Rational {
    match x.lcp(y) {
        None => rational::int(0),
        Some(m) => rational::inv_pow(2, m),
    }
}

fn canonical(mut pre: Vec<u8>, mut per: Vec<u8>) -> EPPoint {
    let p = per.len();
    if let Some(d) = (1..=p).find(|&d| p.is_multiple_of(d) && (d..p).all(|i| per[i] == per[i - d])) {
        per.truncate(d);
    }
    while let (Some(&a), Some(&b)) = (pre.last(), per.last()) {
        if a != b {
            break;
        }
        pre.pop();
        per.rotate_right(1);
    }
    EPPoint { pre: Word::from_symbols(pre), per: Word::from_symbols(per) }
}

impl fmt::Display for EPPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})^∞", self.pre, self.per)
    }
}

impl fmt::Debug for EPPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    pre: Word,
    per: Word,
}

impl Serialize for EPPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointRepr { pre: self.pre.clone(), per: self.per.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EPPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PointRepr::deserialize(d)?;
        EPPoint::new(r.pre, r.per).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const K: Alphabet = Alphabet::BINARY;

    fn pt(pre: &str, per: &str) -> EPPoint {
        EPPoint::new(Word::parse(K, pre).unwrap(), Word::parse(K, per).unwrap()).unwrap()
    }

    /// k-adic value `num/den` of a point, independent of the digit machinery.
    fn to_kadic(x: &EPPoint, k: i128) -> (i128, i128) {
        let val = |w: &Word| w.symbols().iter().rev().fold(0i128, |a, &s| a * k + s as i128);
        let l = x.preperiod().len() as u32;
        let p = x.period().len() as u32;
        let den = k.pow(p) - 1;
        (val(x.preperiod()) * den - k.pow(l) * val(x.period()), den)
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(pt("", "10"), pt("", "01").shift(1));
        assert_eq!(pt("0", "11"), pt("01", "1"));
        assert_eq!(pt("0", "11").preperiod().to_string(), "0");
        assert_eq!(pt("0", "11").period().to_string(), "1");
        assert_eq!(pt("", "0101"), pt("0", "10"));
        assert!(EPPoint::new(Word::empty(), Word::empty()).is_err());
    }

    #[test]
    fn distance_examples() {
        let zeros = EPPoint::constant(0);
        assert_eq!(lcp_distance(&zeros, &zeros), rational::int(0));
        assert_eq!(lcp_distance(&zeros, &EPPoint::constant(1)), rational::int(1));
        assert_eq!(lcp_distance(&pt("0", "1"), &zeros), rational::ratio(1, 2));
    }

    #[test]
    fn odometer_addition() {
        assert_eq!(EPPoint::constant(0).add(K, 1), pt("1", "0"));
        assert_eq!(EPPoint::constant(1).add(K, 1), EPPoint::constant(0));
        assert_eq!(pt("0", "1").add(K, 1), EPPoint::constant(1));
        assert_eq!(EPPoint::constant(0).add(K, -1), EPPoint::constant(1));
    }

    #[test]
    fn kadic_roundtrip_examples() {
        // -1 = 1^∞, 1/3 = 1(10)^∞ in Z_2
        assert_eq!(EPPoint::from_kadic(K, -1, 1).unwrap(), EPPoint::constant(1));
        assert_eq!(EPPoint::from_kadic(K, 1, 3).unwrap(), pt("1", "10"));
        assert!(EPPoint::from_kadic(K, 1, 2).is_err());
    }

    fn arb_point(k: u8) -> impl Strategy<Value = EPPoint> {
        (prop::collection::vec(0..k, 0..5), prop::collection::vec(0..k, 1..4)).prop_map(|(a, b)| {
            EPPoint::new(Word::from_symbols(a), Word::from_symbols(b)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn addition_matches_rational_arithmetic(x in arb_point(3), t in -50i64..50) {
            let k3 = Alphabet::new(3).unwrap();
            let (num, den) = to_kadic(&x, 3);
            prop_assert_eq!(EPPoint::from_kadic(k3, num, den).unwrap(), x.clone());
            let expected = EPPoint::from_kadic(k3, num + t as i128 * den, den).unwrap();
            prop_assert_eq!(x.add(k3, t), expected);
        }

        #[test]
        fn ultrametric_inequality(x in arb_point(2), y in arb_point(2), z in arb_point(2)) {
            let xz = lcp_distance(&x, &z);
            let m = lcp_distance(&x, &y).max(lcp_distance(&y, &z));
            prop_assert!(xz <= m);
            prop_assert_eq!(lcp_distance(&x, &y) == rational::int(0), x == y);
        }
    }
}
