use serde::Serialize;

use crate::homeo::{AdicMap, FullGroupElement};
use crate::space::{Alphabet, EPPoint, Word};
use crate::towers::canonical_sequence;

/// Disjoint cylinders separating `T^power z` from `T z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub power: i64,
    pub image: Word,
    pub target: Word,
}

/// Evidence that no element of `[[T]]` permuting the levels of `P_n` agrees
/// with `T` at `z = (k-1)^∞`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiracCertificate {
    pub n: usize,
    pub point: EPPoint,
    pub image: EPPoint,
    /// `z` lies in the top level of `P_n`.
    pub top_level: bool,
    /// One witness for each power an In atom at the top can carry.
    pub witnesses: Vec<Witness>,
    /// `(level m, number of level permutations checked)`.
    pub enumerated: Vec<(usize, usize)>,
    pub holds: bool,
}

pub fn dirac_obstruction_check(k: Alphabet, n: usize, enumeration_bound: usize) -> DiracCertificate {
    let z = EPPoint::constant(k.size() - 1);
    let tz = z.add(k, 1);
    let p = canonical_sequence(k, n);
    let h = p.towers()[0].height;
    let top_level = p.locate_point(&z) == (h - 1, 0);

    // an In atom at level h-1 carries a power l with 0 <= h-1+l <= h-1
    let witnesses: Vec<Witness> = (-(h as i64 - 1)..=0)
        .map(|l| {
            let x = z.add(k, l);
            let depth = x.lcp(&tz).expect("T is aperiodic") + 1;
            Witness { power: l, image: x.prefix(depth), target: tz.prefix(depth) }
        })
        .collect();
    let witnesses_ok = witnesses.iter().all(|w| {
        !w.image.comparable(&w.target)
            && z.add(k, w.power).prefix(w.image.len()) == w.image
            && tz.prefix(w.target.len()) == w.target
    });

    let t = AdicMap::odometer(k);
    let mut enumerated = Vec::new();
    let mut enumeration_ok = true;
    for m in 1..=enumeration_bound {
        let mut count = 0;
        for_each_permutation(k.count(m), |perm| {
            let powers = perm.iter().enumerate().map(|(v, &img)| img as i64 - v as i64).collect();
            let s = FullGroupElement::from_powers(k, m, powers).expect("permutation");
            enumeration_ok &= s.map().apply(&z) != t.apply(&z);
            count += 1;
        });
        enumerated.push((m, count));
    }

    DiracCertificate {
        n,
        point: z,
        image: tz,
        top_level,
        witnesses,
        enumerated,
        holds: top_level && witnesses_ok && enumeration_ok,
    }
}

/// Heap's algorithm.
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    visit(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            let j = if i % 2 == 0 { 0 } else { c[i] };
            perm.swap(j, i);
            visit(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
