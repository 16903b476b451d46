//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cantordyn::approx::{
    conjugate_into_neighborhood, dirac_obstruction_check, gamma_y_approximation, kr_extension,
    kr_matching, periodic_approximation, topologically_free_perturbation, PrunedTree,
};
use cantordyn::homeo::{disagreement, sup_distance};
use cantordyn::rational::{inv_pow, ratio};
use cantordyn::towers::{canonical_sequence, exhaustion_level, gamma_member, kr_conditions};
use cantordyn::{
    AdicMap, Alphabet, ClopenSet, EPPoint, Error, FullGroupElement, Measure, Pair, Rational, Word,
    DEFAULT_MAX_DEPTH,
};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K: Alphabet = Alphabet::BINARY;

type Check = fn() -> Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bernoulli(p: (i64, i64), q: (i64, i64)) -> Measure {
    Measure::bernoulli(vec![ratio(p.0, p.1), ratio(q.0, q.1)]).unwrap()
}

fn uniform() -> Measure {
    bernoulli((1, 2), (1, 2))
}

/// Random certified element: a level permutation with wraps in {-1, 0, 1};
/// periodic ones have wraps rebalanced to zero displacement per cycle.
fn random_element(rng: &mut ChaCha8Rng, level: usize, periodic: bool) -> FullGroupElement {
    let n = K.count(level);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut powers: Vec<i64> = (0..n)
        .map(|v| perm[v] as i64 - v as i64 + rng.gen_range(-1..=1) * n as i64)
        .collect();
    if periodic {
        let el = FullGroupElement::from_powers(K, level, powers.clone()).unwrap();
        for cyc in el.cycles() {
            powers[cyc.values[0]] -= cyc.displacement;
        }
    }
    FullGroupElement::from_powers(K, level, powers).unwrap()
}

/// Random element of table level 1..=4, periodic with probability `p`.
fn random_in(rng: &mut ChaCha8Rng, p: f64) -> FullGroupElement {
    let level = rng.gen_range(1..=4);
    let periodic = rng.gen_bool(p);
    random_element(rng, level, periodic)
}

/// `μ({x : P x ≠ S x})` from power tables: powers of `T` differ exactly where
/// the maps differ because `T` has no periodic points.
fn table_distance(p: &FullGroupElement, s: &FullGroupElement, mu: &Measure) -> Rational {
    let n = p.level().max(s.level());
    let (p, s) = (p.at_level(n), s.at_level(n));
    K.words(n)
        .zip(p.powers().iter().zip(s.powers()))
        .filter(|(_, (a, b))| a != b)
        .map(|(w, _)| mu.cylinder(&w))
        .sum()
}

fn depth8_points() -> Vec<EPPoint> {
    K.words(8).map(|w| EPPoint::finite(&w)).collect()
}

fn criterion_1() -> Result<(), String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let markov = Measure::markov(
        vec![ratio(1, 2), ratio(1, 2)],
        vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(1, 4), ratio(3, 4)]],
    )
    .unwrap();
    let measure_sets = [
        vec![uniform()],
        vec![bernoulli((1, 3), (2, 3)), markov],
        vec![uniform(), Measure::dirac(EPPoint::constant(1))],
    ];
    let epsilons = [ratio(1, 2), ratio(1, 8), ratio(1, 32)];
    for trial in 0..100 {
        let s = random_in(&mut rng, 0.0);
        for measures in &measure_sets {
            for eps in &epsilons {
                let a = periodic_approximation(&s, measures, eps, DEFAULT_MAX_DEPTH)
                    .map_err(|e| format!("trial {trial}: {e}"))?;
                let p = &a.element;
                let order = p.periodicity().order.ok_or(format!("trial {trial}: output not periodic"))?;
                ensure(p.map().power_big_identity(&order), || format!("trial {trial}: P^order != id"))?;
                FullGroupElement::certify(p.map()).map_err(|e| format!("trial {trial}: {e}"))?;
                for mu in measures {
                    let d = table_distance(p, &s, mu);
                    ensure(d < *eps, || format!("trial {trial}: distance {d} >= {eps}"))?;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))
}

trait PowerCheck {
    fn power_big_identity(&self, order: &BigUint) -> bool;
}

impl PowerCheck for AdicMap {
    /// `self^order` by binary exponentiation on tables, independent of the
    /// cycle-based power of the full-group module.
    fn power_big_identity(&self, order: &BigUint) -> bool {
        let mut acc = AdicMap::identity(self.alphabet());
        let mut base = self.clone();
        let mut e = order.clone();
        let two = BigUint::from(2u8);
        while !e.is_zero() {
            if (&e % &two).is_one() {
                acc = acc.compose(&base).unwrap();
            }
            e /= &two;
            if !e.is_zero() {
                base = base.compose(&base).unwrap();
            }
        }
        acc.is_identity()
    }
}

fn criterion_2() -> Result<(), String> {
    let t = FullGroupElement::certify(&AdicMap::odometer(K)).unwrap();
    let odo = AdicMap::odometer(K);
    for m in 1..=10 {
        let eps = inv_pow(2, m);
        let a = gamma_y_approximation(&t, &[uniform()], &eps, DEFAULT_MAX_DEPTH).map_err(|e| e.to_string())?;
        let n = a.level;
        let d = table_distance(&a.element, &t, &uniform());
        ensure(d == inv_pow(2, n), || format!("m={m}: distance {d} != 2^-{n}"))?;
        ensure(d < eps, || format!("m={m}: distance {d} not below ε"))?;
        let base = canonical_sequence(K, n).base();
        let zone = base
            .union(&odo.image(&base).unwrap())
            .unwrap()
            .union(&odo.preimage(&base).unwrap())
            .unwrap();
        let e = disagreement(a.element.map(), &odo).unwrap();
        ensure(e.exceptions.is_empty() && e.core.is_subset(&zone).unwrap(), || {
            format!("m={m}: disagreement outside the boundary zone")
        })?;
    }
    Ok(())
}

fn criterion_3() -> Result<(), String> {
    for (k, top) in [(2, 10), (3, 6)] {
        let k = Alphabet::new(k).unwrap();
        for n in 1..=top {
            let report = kr_conditions(k, n);
            ensure(report.all(), || format!("k={} n={n}: {report:?}", k.size()))?;
            let p = canonical_sequence(k, n);
            let heights: Vec<usize> = p.towers().iter().map(|t| t.height).collect();
            ensure(heights == [k.count(n)], || format!("k={} n={n}: heights {heights:?}", k.size()))?;
            // ∩ B(P_n) = {0^∞}: each point with a nonzero digit below n is excluded
            let base = p.base();
            for w in k.words(n) {
                let x = EPPoint::finite(&w);
                let inside = base.contains(&x);
                ensure(inside == w.symbols().iter().all(|&s| s == 0), || format!("n={n}: {w:?}"))?;
            }
        }
    }
    Ok(())
}

fn criterion_4() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..100 {
        let s = random_in(&mut rng, 0.3);
        let n = exhaustion_level(&s);
        if n > 1 {
            ensure(!gamma_member(&s, &canonical_sequence(K, n - 1)), || {
                format!("trial {trial}: member below exhaustion level {n}")
            })?;
        }
        for m in n..=n + 3 {
            ensure(gamma_member(&s, &canonical_sequence(K, m)), || {
                format!("trial {trial}: not a member at {m} (exhaustion {n})")
            })?;
        }
    }
    Ok(())
}

fn criterion_5() -> Result<(), String> {
    for n in 1..=6 {
        let c = dirac_obstruction_check(K, n, 2);
        ensure(c.holds, || format!("n={n}: certificate fails"))?;
        ensure(c.enumerated == [(1, 2), (2, 24)], || format!("n={n}: enumeration {:?}", c.enumerated))?;
        for w in &c.witnesses {
            ensure(!w.image.comparable(&w.target), || format!("n={n}: witness {w:?} overlaps"))?;
        }
    }
    let t = FullGroupElement::certify(&AdicMap::odometer(K)).unwrap();
    let atom = [Measure::dirac(EPPoint::constant(1))];
    match gamma_y_approximation(&t, &atom, &ratio(1, 2), DEFAULT_MAX_DEPTH) {
        Err(Error::AtomicMeasure { .. }) => Ok(()),
        other => Err(format!("atomic measure accepted: {other:?}")),
    }
}

fn criterion_6() -> Result<(), String> {
    let mut targets: Vec<FullGroupElement> = Vec::new();
    let mut perm = [0usize, 1, 2, 3];
    permutations(&mut perm, 0, &mut |p| {
        let m = AdicMap::prefix_permutation(K, 2, p).unwrap();
        targets.push(FullGroupElement::certify(&m).unwrap());
    });
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    targets.extend((0..10).map(|_| random_element(&mut rng, 3, true)));
    let measures = [uniform(), bernoulli((1, 3), (2, 3))];
    let eps = ratio(1, 8);
    let points = depth8_points();
    for (i, target) in targets.iter().enumerate() {
        let c = conjugate_into_neighborhood(target, &measures, &eps, DEFAULT_MAX_DEPTH)
            .map_err(|e| format!("target {i}: {e}"))?;
        let r_inv = c.r.invert();
        for mu in &measures {
            let d = disagreement(&c.conjugate, target.map()).unwrap().measure(mu);
            ensure(d < eps, || format!("target {i}: distance {d}"))?;
        }
        for x in &points {
            let y = c.r.apply(&c.s_univ.apply(&r_inv.apply(x)));
            ensure(c.conjugate.apply(x) == y, || format!("target {i}: conjugate differs at {x:?}"))?;
        }
    }
    Ok(())
}

fn permutations(p: &mut [usize; 4], i: usize, visit: &mut dyn FnMut(&[usize])) {
    if i == p.len() {
        visit(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permutations(p, i + 1, visit);
        p.swap(i, j);
    }
}

fn criterion_7() -> Result<(), String> {
    for d in 3..=8 {
        let tree = PrunedTree::point(K, &EPPoint::constant(0), d);
        let h: BTreeMap<Word, Word> = tree.kept_words().into_iter().map(|w| (w.clone(), w)).collect();
        let m = kr_matching(&tree, &tree, &h).map_err(|e| format!("d={d}: {e}"))?;
        let lcp = |a: &Word, b: &Word| a.common_prefix_len(b);
        for (&i, &j) in &m.f {
            let (u, v) = (&m.left[i], &m.right[j]);
            let a = u.anchor.as_ref().unwrap();
            ensure(inv_pow(2, lcp(&u.word, a)) > inv_pow(2, lcp(&v.word, &h[a])), || format!("d={d}: f({i}) not strict"))?;
        }
        for (&j, &i) in &m.g {
            let (u, v) = (&m.left[i], &m.right[j]);
            let b = v.anchor.as_ref().unwrap();
            let pre = h.iter().find(|(_, y)| *y == b).unwrap().0;
            ensure(inv_pow(2, lcp(&v.word, b)) > inv_pow(2, lcp(&u.word, pre)), || format!("d={d}: g({j}) not strict"))?;
        }
        let split_i: BTreeSet<usize> = m.f.keys().chain(m.g.values()).copied().collect();
        let split_j: BTreeSet<usize> = m.f.values().chain(m.g.keys()).copied().collect();
        ensure(split_i.len() == m.left.len() && split_j.len() == m.right.len(), || format!("d={d}: split is not a partition"))?;

        let ext = kr_extension(&tree, &tree, &h, &m).map_err(|e| format!("d={d}: {e}"))?;
        let outputs = ClopenSet::from_words(K, ext.pairs().iter().map(|p| p.output.clone()));
        ensure(outputs.is_whole(), || format!("d={d}: outputs do not cover X"))?;
        ensure(ext.compose(&ext.invert()).unwrap().is_identity(), || format!("d={d}: not bijective"))?;
        for (a, b) in &h {
            let img = ext.image(&ClopenSet::cylinder(K, a.clone())).unwrap();
            ensure(img == ClopenSet::cylinder(K, b.clone()), || format!("d={d}: kept {a:?} moved"))?;
        }
    }
    Ok(())
}

fn criterion_8() -> Result<(), String> {
    let swap = AdicMap::prefix_permutation(K, 1, &[1, 0]).unwrap();
    let four = AdicMap::prefix_permutation(K, 2, &[1, 2, 3, 0]).unwrap();
    for (name, r) in [("swap", swap), ("4-cycle", four)] {
        let r = FullGroupElement::certify(&r).unwrap();
        for eps in [ratio(1, 4), ratio(1, 16)] {
            let p = topologically_free_perturbation(&r, &[uniform()], &eps, 8, 8, DEFAULT_MAX_DEPTH)
                .map_err(|e| format!("{name}: {e}"))?;
            let e = disagreement(&p.map, r.map()).unwrap();
            let expected = p.top.difference(&p.kept.hull).unwrap();
            ensure(e.core == expected && e.exceptions.is_empty(), || format!("{name}: disagreement is not top \\ hull"))?;
            let d = e.measure(&uniform());
            ensure(d < eps, || format!("{name}: distance {d} >= {eps}"))?;
            ensure(p.map.is_topologically_free_to_depth(8, 8), || format!("{name}: periodic depth-8 cylinder"))?;
            FullGroupElement::certify(&p.map).map_err(|e| format!("{name}: {e}"))?;
        }
    }
    Ok(())
}

/// Random complete prefix code with `leaves` words of depth at most 3.
fn random_code(rng: &mut ChaCha8Rng, leaves: usize) -> Vec<Word> {
    let mut code = vec![Word::empty()];
    while code.len() < leaves {
        let splittable: Vec<usize> = (0..code.len()).filter(|&i| code[i].len() < 3).collect();
        let i = *splittable.choose(rng).unwrap();
        let w = code.swap_remove(i);
        code.extend(w.children(K));
    }
    code
}

fn random_map(rng: &mut ChaCha8Rng) -> AdicMap {
    let leaves = rng.gen_range(1..=8);
    let inputs = random_code(rng, leaves);
    let mut outputs = random_code(rng, leaves);
    outputs.shuffle(rng);
    let pairs = inputs
        .into_iter()
        .zip(outputs)
        .map(|(u, v)| Pair::new(u, v, rng.gen_range(-2..=2)))
        .collect();
    AdicMap::from_pairs(K, pairs).unwrap()
}

fn criterion_9() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let points = depth8_points();
    for trial in 0..1000 {
        let (a, b, c) = (random_map(&mut rng), random_map(&mut rng), random_map(&mut rng));
        let ab_c = a.compose(&b).unwrap().compose(&c).unwrap();
        let a_bc = a.compose(&b.compose(&c).unwrap()).unwrap();
        ensure(ab_c == a_bc, || format!("trial {trial}: not associative"))?;
        ensure(a.compose(&a.invert()).unwrap().is_identity(), || format!("trial {trial}: a a^-1 != id"))?;
        ensure(a.invert().compose(&a).unwrap().is_identity(), || format!("trial {trial}: a^-1 a != id"))?;
        let ab = a.compose(&b).unwrap();
        for x in &points {
            ensure(ab.apply(x) == a.apply(&b.apply(x)), || format!("trial {trial}: composition differs at {x:?}"))?;
        }
    }
    for trial in 0..200 {
        let s = random_in(&mut rng, 0.0);
        let t = random_in(&mut rng, 0.5);
        let n = s.level().max(t.level());
        let (sn, tn) = (s.at_level(n), t.at_level(n));
        let differing = ClopenSet::from_words(
            K,
            K.words(n)
                .zip(sn.powers().iter().zip(tn.powers()))
                .filter(|(_, (x, y))| x != y)
                .map(|(w, _)| w),
        );
        let d = disagreement(s.map(), t.map()).unwrap();
        ensure(d.core == differing && d.exceptions.is_empty(), || format!("trial {trial}: disagreement mismatch"))?;
    }
    Ok(())
}

fn criterion_10() -> Result<(), String> {
    let id = AdicMap::identity(K);
    for m in 1..=64i64 {
        let v = m.trailing_zeros() as usize;
        let d = sup_distance(&AdicMap::odometer_power(K, m), &id).unwrap();
        ensure(d == inv_pow(2, v), || format!("m={m}: D = {d}, expected 2^-{v}"))?;
    }
    Ok(())
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("periodic approximation is dense", criterion_1),
        ("fold-back distance law", criterion_2),
        ("canonical Kakutani-Rokhlin conditions", criterion_3),
        ("full group exhausted by Γ(P_n)", criterion_4),
        ("Dirac obstruction for Γ_Y", criterion_5),
        ("conjugation into neighbourhoods", criterion_6),
        ("finite-depth extension", criterion_7),
        ("topologically free perturbation", criterion_8),
        ("group axioms and pointwise oracle", criterion_9),
        ("sup-metric of odometer powers", criterion_10),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("criterion {:>2}: pass  {name} ({secs:.2}s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name} ({secs:.2}s): {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
