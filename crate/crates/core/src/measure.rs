//! Exact Borel probability measures evaluated on clopen sets.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{serde_rational_vec, Rational};
use crate::space::{Alphabet, ClopenSet, EPPoint, Word};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Measure {
    /// Product measure with symbol probabilities `p`.
    Bernoulli {
        #[serde(with = "serde_rational_vec")]
        p: Vec<Rational>,
    },
    /// Stationary-alphabet Markov chain started from `initial`.
    Markov {
        #[serde(with = "serde_rational_vec")]
        initial: Vec<Rational>,
        #[serde(with = "matrix")]
        transition: Vec<Vec<Rational>>,
    },
    Dirac { atom: EPPoint },
    Mixture {
        #[serde(with = "serde_rational_vec")]
        weights: Vec<Rational>,
        parts: Vec<Measure>,
    },
}

impl Measure {
    pub fn bernoulli(p: Vec<Rational>) -> Result<Self> {
        let m = Measure::Bernoulli { p };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(k: Alphabet) -> Self {
        let p = vec![Rational::new(1.into(), (k.size() as i64).into()); k.size() as usize];
        Measure::Bernoulli { p }
    }

    pub fn markov(initial: Vec<Rational>, transition: Vec<Vec<Rational>>) -> Result<Self> {
        let m = Measure::Markov { initial, transition };
        m.validate()?;
        Ok(m)
    }

    pub fn dirac(atom: EPPoint) -> Self {
        Measure::Dirac { atom }
    }

    pub fn mixture(weights: Vec<Rational>, parts: Vec<Measure>) -> Result<Self> {
        let m = Measure::Mixture { weights, parts };
        m.validate()?;
        Ok(m)
    }

    /// Alphabet size the measure is defined over, if it pins one.
    pub fn alphabet_size(&self) -> Option<usize> {
        match self {
            Measure::Bernoulli { p } => Some(p.len()),
            Measure::Markov { initial, .. } => Some(initial.len()),
            Measure::Dirac { .. } => None,
            Measure::Mixture { parts, .. } => parts.iter().find_map(Measure::alphabet_size),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidMeasure(msg.to_string()));
        match self {
            Measure::Bernoulli { p } => {
                if !is_distribution(p) {
                    return bad("bernoulli weights must be nonnegative and sum to 1");
                }
            }
            Measure::Markov { initial, transition } => {
                if !is_distribution(initial) {
                    return bad("initial distribution must be nonnegative and sum to 1");
                }
                if transition.len() != initial.len()
                    || transition.iter().any(|row| row.len() != initial.len() || !is_distribution(row))
                {
                    return bad("transition must be a square stochastic matrix");
                }
            }
            Measure::Dirac { .. } => {}
            Measure::Mixture { weights, parts } => {
                if weights.len() != parts.len() || parts.is_empty() {
                    return bad("mixture needs one weight per part");
                }
                if !is_distribution(weights) || weights.iter().any(Zero::is_zero) {
                    return bad("mixture weights must be positive and sum to 1");
                }
                for part in parts {
                    part.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn check_alphabet(&self, k: Alphabet) -> Result<()> {
        match self {
            Measure::Dirac { atom } => atom.check_alphabet(k),
            Measure::Mixture { parts, .. } => parts.iter().try_for_each(|m| m.check_alphabet(k)),
            _ => match self.alphabet_size() {
                Some(n) if n == k.size() as usize => Ok(()),
                Some(n) => Err(Error::AlphabetMismatch { left: n as u8, right: k.size() }),
                None => Ok(()),
            },
        }
    }

    /// Mass of the cylinder `[w]`.
    pub fn cylinder(&self, w: &Word) -> Rational {
        match self {
            Measure::Bernoulli { p } => w.symbols().iter().map(|&s| p[s as usize].clone()).product(),
            Measure::Markov { initial, transition } => {
                let s = w.symbols();
                match s.first() {
                    None => Rational::one(),
                    Some(&first) => s.windows(2).fold(initial[first as usize].clone(), |acc, e| {
                        acc * &transition[e[0] as usize][e[1] as usize]
                    }),
                }
            }
            Measure::Dirac { atom } => {
                if atom.prefix(w.len()) == *w {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            Measure::Mixture { weights, parts } => {
                weights.iter().zip(parts).map(|(wt, m)| wt * m.cylinder(w)).sum()
            }
        }
    }

    pub fn eval(&self, c: &ClopenSet) -> Rational {
        c.words().iter().map(|w| self.cylinder(w)).sum()
    }

    /// Mass of the singleton `{x}`.
    pub fn point_mass(&self, x: &EPPoint) -> Rational {
        let l = x.preperiod().len();
        let p = x.period().len();
        match self {
            Measure::Bernoulli { p: probs } => {
                if x.period().symbols().iter().all(|&s| probs[s as usize].is_one()) {
                    self.cylinder(x.preperiod())
                } else {
                    Rational::zero()
                }
            }
            Measure::Markov { transition, .. } => {
                // Positive mass iff every transition inside the cycle is certain.
                let cyc = x.prefix(l + p + 1);
                let certain = (l..l + p).all(|i| {
                    transition[cyc.symbols()[i] as usize][cyc.symbols()[i + 1] as usize].is_one()
                });
                if certain {
                    self.cylinder(&x.prefix(l + 1))
                } else {
                    Rational::zero()
                }
            }
            Measure::Dirac { atom } => {
                if atom == x {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            Measure::Mixture { weights, parts } => {
                weights.iter().zip(parts).map(|(wt, m)| wt * m.point_mass(x)).sum()
            }
        }
    }

    /// Whether the measure has no atoms.
    pub fn is_continuous(&self) -> bool {
        match self {
            Measure::Bernoulli { p } => p.iter().all(|x| !x.is_one()),
            Measure::Markov { initial, transition } => !markov_has_atom(initial, transition),
            Measure::Dirac { .. } => false,
            Measure::Mixture { parts, .. } => parts.iter().all(Measure::is_continuous),
        }
    }
}

fn is_distribution(p: &[Rational]) -> bool {
    !p.is_empty()
        && p.iter().all(|x| *x >= Rational::zero())
        && p.iter().sum::<Rational>() == Rational::one()
}

/// A Markov measure charges a point iff a cycle of certain transitions is
/// reachable with positive probability from the initial support.
fn markov_has_atom(initial: &[Rational], transition: &[Vec<Rational>]) -> bool {
    let n = initial.len();
    let certain: Vec<Option<usize>> =
        transition.iter().map(|row| row.iter().position(One::is_one)).collect();
    let mut reach: Vec<bool> = initial.iter().map(|x| !x.is_zero()).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| reach[i]).collect();
    while let Some(i) = stack.pop() {
        for (j, q) in transition[i].iter().enumerate() {
            if !q.is_zero() && !reach[j] {
                reach[j] = true;
                stack.push(j);
            }
        }
    }
    (0..n).filter(|&s| reach[s]).any(|start| {
        let mut s = start;
        for _ in 0..n {
            match certain[s] {
                Some(next) => s = next,
                None => return false,
            }
        }
        // After n certain steps the walk is inside a certain cycle.
        true
    })
}

mod matrix {
    use super::*;
    use crate::rational::{format, parse};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(format).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        rows.iter()
            .map(|r| r.iter().map(|s| parse(s).map_err(serde::de::Error::custom)).collect())
            .collect()
    }
}
