//! Syntactic algebras, isomorphism, term definability and division.

use std::collections::{BTreeSet, HashMap};

use crate::automata::{tuples, Dbta, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::structure::{self, Congruence};
use crate::trees::{RankedAlphabet, Term};

/// The minimal recognizer of a language together with the projection onto
/// it.
#[derive(Debug, Clone)]
pub struct SyntacticResult {
    pub minimal: Dbta,
    /// `projection[e]` is the class of original element `e`, or `None` when
    /// `e` is unreachable.
    pub projection: Vec<Option<usize>>,
}

/// Computes the syntactic algebra: restrict to reachable elements, then
/// refine `{accepting, rejecting}` until the partition is a congruence.
///
/// A class is split when two members disagree on the class of
/// `a(.., x, ..)` for some letter `a`, argument position and choice of the
/// remaining arguments.
pub fn syntactic_algebra(dbta: &Dbta) -> SyntacticResult {
    let (elems, restricted) = dbta.reachable();
    let alg = restricted.algebra();
    let m = alg.size();
    let alphabet = alg.alphabet();

    let mut class: Vec<usize> = renumber(&(0..m).map(|e| restricted.is_accepting(e)).collect::<Vec<_>>());
    let mut count = distinct(&class);
    loop {
        let mut signatures: Vec<Vec<usize>> = Vec::with_capacity(m);
        for e in 0..m {
            let mut sig = vec![class[e]];
            for a in 0..alphabet.len() {
                let k = alphabet.arity(a);
                for pos in 0..k {
                    for others in tuples(m, k - 1) {
                        let mut args = others;
                        args.insert(pos, e);
                        sig.push(class[alg.apply(a, &args)]);
                    }
                }
            }
            signatures.push(sig);
        }
        let next = renumber(&signatures);
        let next_count = distinct(&next);
        class = next;
        if next_count == count {
            break;
        }
        count = next_count;
    }

    let mut reps = vec![usize::MAX; count];
    for e in (0..m).rev() {
        reps[class[e]] = e;
    }
    let quotient = FiniteAlgebra::from_fn(alphabet.clone(), count, |a, args| {
        let orig: Vec<usize> = args.iter().map(|&c| reps[c]).collect();
        class[alg.apply(a, &orig)]
    })
    .expect("quotient tables are in range");
    let quotient = match alg.names() {
        Some(names) => {
            let names = reps.iter().map(|&r| names[r].clone()).collect();
            quotient.with_names(names).expect("one name per class")
        }
        None => quotient,
    };
    let accepting = (0..count).filter(|&c| restricted.is_accepting(reps[c]));
    let minimal = Dbta::new(quotient, accepting).expect("classes are in range");

    let mut projection = vec![None; dbta.algebra().size()];
    for (i, &e) in elems.iter().enumerate() {
        projection[e] = Some(class[i]);
    }
    SyntacticResult { minimal, projection }
}

/// Numbers distinct keys by first occurrence.
fn renumber<K: std::hash::Hash + Eq + Clone>(keys: &[K]) -> Vec<usize> {
    let mut ids: HashMap<K, usize> = HashMap::new();
    keys.iter()
        .map(|k| {
            let n = ids.len();
            *ids.entry(k.clone()).or_insert(n)
        })
        .collect()
}

fn distinct(class: &[usize]) -> usize {
    class.iter().copied().max().map_or(0, |c| c + 1)
}

/// An isomorphism `a → b` as a vector of images, if one exists. Letters are
/// matched by index; both alphabets must agree on arities.
pub fn isomorphism(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Option<Vec<usize>> {
    isomorphism_with(a, b, |_, _| true)
}

/// An isomorphism of the algebras that maps accepting elements exactly onto
/// accepting elements.
pub fn dbta_isomorphism(a: &Dbta, b: &Dbta) -> Option<Vec<usize>> {
    isomorphism_with(a.algebra(), b.algebra(), |x, y| a.is_accepting(x) == b.is_accepting(y))
}

fn isomorphism_with(
    a: &FiniteAlgebra,
    b: &FiniteAlgebra,
    compatible: impl Fn(usize, usize) -> bool,
) -> Option<Vec<usize>> {
    let (sa, sb) = (a.alphabet(), b.alphabet());
    if a.size() != b.size()
        || sa.len() != sb.len()
        || (0..sa.len()).any(|l| sa.arity(l) != sb.arity(l))
    {
        return None;
    }
    let m = a.size();
    let mut pi = vec![None; m];
    let mut used = vec![false; m];
    if search_iso(a, b, &compatible, &mut pi, &mut used) {
        Some(pi.into_iter().map(|p| p.expect("complete assignment")).collect())
    } else {
        None
    }
}

fn assign(
    pi: &mut [Option<usize>],
    used: &mut [bool],
    x: usize,
    y: usize,
    compatible: &impl Fn(usize, usize) -> bool,
) -> bool {
    match pi[x] {
        Some(z) => z == y,
        None if used[y] || !compatible(x, y) => false,
        None => {
            pi[x] = Some(y);
            used[y] = true;
            true
        }
    }
}

/// Propagates forced images: whenever all arguments of a table entry are
/// mapped, the result must map to the corresponding entry in `b`.
fn propagate(
    a: &FiniteAlgebra,
    b: &FiniteAlgebra,
    compatible: &impl Fn(usize, usize) -> bool,
    pi: &mut [Option<usize>],
    used: &mut [bool],
) -> bool {
    let m = a.size();
    loop {
        let mut changed = false;
        for l in 0..a.alphabet().len() {
            for args in tuples(m, a.alphabet().arity(l)) {
                let Some(mapped) = args.iter().map(|&x| pi[x]).collect::<Option<Vec<usize>>>() else {
                    continue;
                };
                let r = a.apply(l, &args);
                let target = b.apply(l, &mapped);
                let was = pi[r].is_some();
                if !assign(pi, used, r, target, compatible) {
                    return false;
                }
                changed |= !was;
            }
        }
        if !changed {
            return true;
        }
    }
}

fn search_iso(
    a: &FiniteAlgebra,
    b: &FiniteAlgebra,
    compatible: &impl Fn(usize, usize) -> bool,
    pi: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
) -> bool {
    if !propagate(a, b, compatible, pi, used) {
        return false;
    }
    let Some(x) = pi.iter().position(Option::is_none) else {
        return true;
    };
    for y in 0..b.size() {
        if used[y] || !compatible(x, y) {
            continue;
        }
        let (mut pi2, mut used2) = (pi.clone(), used.clone());
        pi2[x] = Some(y);
        used2[y] = true;
        if search_iso(a, b, compatible, &mut pi2, &mut used2) {
            *pi = pi2;
            *used = used2;
            return true;
        }
    }
    false
}

/// An operation `carrier^arity → carrier` given by its table in
/// lexicographic argument order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpTable {
    pub arity: usize,
    pub values: Vec<usize>,
}

impl OpTable {
    pub fn of_letter(algebra: &FiniteAlgebra, letter: usize) -> Self {
        OpTable {
            arity: algebra.alphabet().arity(letter),
            values: algebra.table(letter).to_vec(),
        }
    }

    pub fn projection(size: usize, arity: usize, var: usize) -> Self {
        OpTable {
            arity,
            values: tuples(size, arity).map(|t| t[var]).collect(),
        }
    }
}

/// Breadth-first search for a term over the algebra's letters, with
/// variables `x1..xn`, whose term operation equals `target`. Terms are
/// explored by depth up to `depth_cap`; for every operation only the first
/// term found is kept.
pub fn term_definable(algebra: &FiniteAlgebra, target: &OpTable, depth_cap: usize) -> Option<Term<usize>> {
    let m = algebra.size();
    let n = target.arity;
    let points: Vec<Vec<usize>> = tuples(m, n).collect();
    if target.values.len() != points.len() {
        return None;
    }
    let mut known: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut terms: Vec<(Term<usize>, Vec<usize>)> = Vec::new();
    let mut level_start = 0;
    for v in 0..n {
        let table: Vec<usize> = points.iter().map(|p| p[v]).collect();
        if known.contains_key(&table) {
            continue;
        }
        if table == target.values {
            return Some(Term::Var(v));
        }
        known.insert(table.clone(), terms.len());
        terms.push((Term::Var(v), table));
    }
    let alphabet = algebra.alphabet();
    for depth in 1..=depth_cap {
        let level_end = terms.len();
        let mut fresh = Vec::new();
        for a in 0..alphabet.len() {
            let k = alphabet.arity(a);
            if k == 0 {
                if depth == 1 {
                    fresh.push((Term::constant(a), vec![algebra.apply(a, &[]); points.len()]));
                }
                continue;
            }
            for pick in tuples(level_end, k) {
                if !pick.iter().any(|&i| i >= level_start) {
                    continue;
                }
                let table: Vec<usize> = (0..points.len())
                    .map(|p| {
                        let args: Vec<usize> = pick.iter().map(|&i| terms[i].1[p]).collect();
                        algebra.apply(a, &args)
                    })
                    .collect();
                let args = pick.iter().map(|&i| terms[i].0.clone()).collect();
                fresh.push((Term::App(a, args), table));
            }
        }
        for (term, table) in fresh {
            if known.contains_key(&table) {
                continue;
            }
            if table == target.values {
                return Some(term);
            }
            known.insert(table.clone(), terms.len());
            terms.push((term, table));
        }
        if terms.len() == level_end {
            return None;
        }
        level_start = level_end;
    }
    None
}

/// Limits for the division search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivideCaps {
    pub max_carrier: usize,
}

impl Default for DivideCaps {
    fn default() -> Self {
        DivideCaps { max_carrier: 6 }
    }
}

/// Evidence that `a` divides `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionWitness {
    /// For each letter of `a`, the letter of `b` playing its role.
    pub assignment: Vec<usize>,
    /// Elements of `b` forming a subuniverse of the reduct.
    pub subuniverse: Vec<usize>,
    /// A congruence of the subalgebra, with blocks given as elements of `b`.
    pub congruence: Vec<Vec<usize>>,
    /// `isomorphism[x]` is the block index (into `congruence`) of `a`'s
    /// element `x`.
    pub isomorphism: Vec<usize>,
}

/// Reduct of `b` to the letters chosen by `assignment`, re-indexed by `a`'s
/// alphabet.
pub fn assigned_reduct(a_alphabet: &RankedAlphabet, b: &FiniteAlgebra, assignment: &[usize]) -> FiniteAlgebra {
    let tables = assignment.iter().map(|&l| b.table(l).to_vec()).collect();
    FiniteAlgebra::new(a_alphabet.clone(), b.size(), tables).expect("arities agree")
}

/// Closure of `seed` under all operations of `alg`.
pub fn subuniverse_closure(alg: &FiniteAlgebra, seed: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut set = seed.clone();
    for a in alg.alphabet().constants() {
        set.insert(alg.apply(a, &[]));
    }
    loop {
        let elems: Vec<usize> = set.iter().copied().collect();
        let mut grown = false;
        for a in 0..alg.alphabet().len() {
            for t in tuples(elems.len(), alg.alphabet().arity(a)) {
                let args: Vec<usize> = t.iter().map(|&i| elems[i]).collect();
                grown |= set.insert(alg.apply(a, &args));
            }
        }
        if !grown {
            return set;
        }
    }
}

/// All nonempty subuniverses, smallest first.
pub fn subuniverses(alg: &FiniteAlgebra) -> Vec<Vec<usize>> {
    let m = alg.size();
    let mut memo: HashMap<BTreeSet<usize>, BTreeSet<usize>> = HashMap::new();
    let mut found: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    for mask in 1u64..(1u64 << m) {
        let seed: BTreeSet<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
        let closed = memo
            .entry(seed.clone())
            .or_insert_with(|| subuniverse_closure(alg, &seed))
            .clone();
        found.insert((closed.len(), closed.into_iter().collect()));
    }
    found.into_iter().map(|(_, s)| s).collect()
}

/// Decides whether `a` divides `b`: some injective assignment of `b`'s
/// operations to `a`'s roles, some subuniverse of that reduct and some
/// congruence on it give a quotient isomorphic to `a`.
pub fn divides(a: &FiniteAlgebra, b: &FiniteAlgebra, caps: DivideCaps) -> Result<Option<DivisionWitness>> {
    for (alg, what) in [(a, "divided algebra carrier"), (b, "dividing algebra carrier")] {
        if alg.size() > caps.max_carrier || alg.size() > 63 {
            return Err(Error::CapExceeded {
                what,
                limit: caps.max_carrier,
            });
        }
    }
    if a.size() > b.size() || a.size() == 0 {
        return Ok(None);
    }
    let mut result = None;
    let mut assignment = Vec::new();
    let mut taken = vec![false; b.alphabet().len()];
    for_each_assignment(a.alphabet(), b.alphabet(), &mut assignment, &mut taken, &mut |assignment| {
        let reduct = assigned_reduct(a.alphabet(), b, assignment);
        for sub in subuniverses(&reduct) {
            if sub.len() < a.size() {
                continue;
            }
            let restricted = reduct.restrict(&sub).expect("subuniverse is closed");
            let congruences = structure::all_congruences(&restricted, usize::MAX).expect("no cap");
            for c in congruences.iter().filter(|c| c.blocks().len() == a.size()) {
                let q = structure::quotient(&restricted, c).expect("congruence is compatible");
                if let Some(iso) = isomorphism(a, &q) {
                    result = Some(DivisionWitness {
                        assignment: assignment.to_vec(),
                        subuniverse: sub.clone(),
                        congruence: c.blocks().iter().map(|bl| bl.iter().map(|&i| sub[i]).collect()).collect(),
                        isomorphism: iso,
                    });
                    return true;
                }
            }
        }
        false
    });
    Ok(result)
}

/// Calls `f` on every injective, arity-preserving assignment until it
/// returns `true`.
fn for_each_assignment(
    a: &RankedAlphabet,
    b: &RankedAlphabet,
    current: &mut Vec<usize>,
    taken: &mut Vec<bool>,
    f: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if current.len() == a.len() {
        return f(current);
    }
    let arity = a.arity(current.len());
    for l in 0..b.len() {
        if taken[l] || b.arity(l) != arity {
            continue;
        }
        taken[l] = true;
        current.push(l);
        let done = for_each_assignment(a, b, current, taken, f);
        current.pop();
        taken[l] = false;
        if done {
            return true;
        }
    }
    false
}

/// Re-derives the quotient described by a division witness and checks it.
pub fn verify_division(a: &FiniteAlgebra, b: &FiniteAlgebra, w: &DivisionWitness) -> bool {
    let reduct = assigned_reduct(a.alphabet(), b, &w.assignment);
    let Ok(restricted) = reduct.restrict(&w.subuniverse) else {
        return false;
    };
    let local: Vec<Vec<usize>> = w
        .congruence
        .iter()
        .map(|bl| bl.iter().filter_map(|e| w.subuniverse.iter().position(|x| x == e)).collect())
        .collect();
    let Ok(c) = Congruence::from_blocks(restricted.size(), local) else {
        return false;
    };
    let Ok(q) = structure::quotient(&restricted, &c) else {
        return false;
    };
    // block order in `c` may differ from `w.congruence`; compare via elements
    (0..a.size()).all(|x| {
        let block = &w.congruence[w.isomorphism[x]];
        let local_index = w.subuniverse.iter().position(|e| *e == block[0]).expect("block inside subuniverse");
        let qx = c.class_of(local_index);
        a.alphabet().letters().iter().enumerate().all(|(l, letter)| {
            tuples(a.size(), letter.arity).all(|args| {
                let r = a.apply(l, &args);
                let mapped: Vec<usize> = args
                    .iter()
                    .map(|&y| {
                        let b0 = w.congruence[w.isomorphism[y]][0];
                        c.class_of(w.subuniverse.iter().position(|e| *e == b0).expect("inside"))
                    })
                    .collect();
                let rb = w.congruence[w.isomorphism[r]][0];
                let rq = c.class_of(w.subuniverse.iter().position(|e| *e == rb).expect("inside"));
                q.apply(l, &mapped) == rq
            })
        }) && qx < q.size()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::trees::{enumerate_contexts, enumerate_trees};

    #[test]
    fn potthoff_minimizes_to_three_elements() {
        let red = fixtures::l_pott_redundant();
        assert_eq!(red.algebra().reachable().len(), 6);
        let res = syntactic_algebra(&red);
        assert_eq!(res.minimal.algebra().size(), 3);
        assert!(dbta_isomorphism(&res.minimal, &fixtures::l_pott()).is_some());
        assert!(res.minimal.are_equivalent(&red).unwrap());
    }

    #[test]
    fn full_language_has_one_element() {
        let p = fixtures::l_pott();
        let full = Dbta::new(p.algebra().clone(), 0..3).unwrap();
        assert_eq!(syntactic_algebra(&full).minimal.algebra().size(), 1);
    }

    #[test]
    fn projection_is_a_homomorphism() {
        for (_, d) in fixtures::corpus() {
            let res = syntactic_algebra(&d);
            let alg = d.algebra();
            let min = res.minimal.algebra();
            for e in alg.reachable() {
                assert_eq!(res.projection[e].map(|c| res.minimal.is_accepting(c)), Some(d.is_accepting(e)));
            }
            let reach = alg.reachable();
            for a in 0..alg.alphabet().len() {
                for t in tuples(reach.len(), alg.alphabet().arity(a)) {
                    let args: Vec<usize> = t.iter().map(|&i| reach[i]).collect();
                    let lhs = res.projection[alg.apply(a, &args)].unwrap();
                    let proj: Vec<usize> = args.iter().map(|&x| res.projection[x].unwrap()).collect();
                    assert_eq!(lhs, min.apply(a, &proj));
                }
            }
        }
    }

    /// Two reachable elements are syntactically equivalent iff no context
    /// separates them; compared here against contexts up to depth 3.
    #[test]
    fn refinement_matches_context_oracle() {
        for (name, d) in fixtures::corpus() {
            let res = syntactic_algebra(&d);
            let alg = d.algebra();
            let contexts = enumerate_contexts(alg.alphabet(), 3, 3);
            let reach = alg.reachable();
            for &x in &reach {
                for &y in &reach {
                    let separated = contexts.iter().any(|p| {
                        let fx = alg.eval_term(p.term(), &[x]);
                        let fy = alg.eval_term(p.term(), &[y]);
                        d.is_accepting(fx) != d.is_accepting(fy)
                    });
                    assert_eq!(
                        res.projection[x] != res.projection[y],
                        separated,
                        "{name}: elements {x} and {y}"
                    );
                }
            }
        }
    }

    #[test]
    fn minimization_is_idempotent() {
        for (_, d) in fixtures::corpus() {
            let once = syntactic_algebra(&d).minimal;
            let twice = syntactic_algebra(&once).minimal;
            assert!(dbta_isomorphism(&once, &twice).is_some());
        }
    }

    #[test]
    fn minimal_is_no_larger_than_any_recognizer() {
        let corpus = fixtures::corpus();
        for (_, d) in &corpus {
            let min = syntactic_algebra(d).minimal;
            for (_, other) in &corpus {
                if other.alphabet() == d.alphabet() && other.are_equivalent(d).unwrap() {
                    assert!(min.algebra().size() <= other.algebra().reachable().len());
                }
            }
        }
    }

    #[test]
    fn f1_is_definable_from_f2() {
        let alg = fixtures::alg_pott();
        let reduct = alg.reduct(&["f2", "f0"]).unwrap();
        let target = OpTable::of_letter(&alg, 1);
        let term = term_definable(&reduct, &target, 2).expect("f1 = f2(x1,x1)");
        assert_eq!(term.render_x(reduct.alphabet()), "f2(x1,x1)");
        for (i, args) in tuples(3, 1).enumerate() {
            assert_eq!(reduct.eval_term(&term, &args), target.values[i]);
        }
    }

    #[test]
    fn projection_is_found_at_depth_zero() {
        let alg = fixtures::alg_pott();
        let term = term_definable(&alg, &OpTable::projection(3, 2, 0), 1).unwrap();
        assert_eq!(term, Term::Var(0));
    }

    #[test]
    fn negation_is_not_a_semilattice_term() {
        let semi = fixtures::semilattice();
        let neg = OpTable { arity: 1, values: vec![1, 0] };
        for cap in 1..=6 {
            assert_eq!(term_definable(&semi, &neg, cap), None);
        }
    }

    #[test]
    fn isomorphism_finds_relabellings() {
        let p = fixtures::alg_pott();
        // swap 0 and 1
        let perm = [1, 0, 2];
        let q = FiniteAlgebra::from_fn(p.alphabet().clone(), 3, |a, args| {
            let orig: Vec<usize> = args.iter().map(|&x| perm[x]).collect();
            perm[p.apply(a, &orig)]
        })
        .unwrap();
        assert_eq!(isomorphism(&p, &q), Some(vec![1, 0, 2]));
        let semi = fixtures::semilattice();
        assert_eq!(isomorphism(&semi, &semi), Some(vec![0, 1]));
    }

    #[test]
    fn division_examples() {
        let semi = fixtures::semilattice();
        let lattice = fixtures::lattice();
        let meet_only = FiniteAlgebra::new(
            RankedAlphabet::signature([("meet", 2)]).unwrap(),
            2,
            vec![lattice.table(1).to_vec()],
        )
        .unwrap();
        let w = divides(&meet_only, &lattice, DivideCaps::default()).unwrap().expect("divides");
        assert!(verify_division(&meet_only, &lattice, &w));
        assert!(divides(&lattice, &semi, DivideCaps::default()).unwrap().is_none());

        let ternary = FiniteAlgebra::from_fn(RankedAlphabet::signature([("t", 3)]).unwrap(), 3, |_, a| a[0]).unwrap();
        let unary2 = FiniteAlgebra::from_fn(RankedAlphabet::signature([("u", 1)]).unwrap(), 2, |_, a| a[0]).unwrap();
        assert!(divides(&ternary, &unary2, DivideCaps::default()).unwrap().is_none());
    }

    #[test]
    fn syntactic_algebra_divides_other_recognizers() {
        let min = syntactic_algebra(&fixtures::l_pott()).minimal;
        for d in [fixtures::l_pott(), fixtures::l_pott_redundant()] {
            let w = divides(min.algebra(), d.algebra(), DivideCaps::default()).unwrap().expect("divides");
            assert!(verify_division(min.algebra(), d.algebra(), &w));
        }
    }

    #[test]
    fn division_reports_caps() {
        let big = FiniteAlgebra::from_fn(RankedAlphabet::signature([("u", 1)]).unwrap(), 7, |_, a| a[0]).unwrap();
        assert!(matches!(
            divides(&fixtures::semilattice(), &big, DivideCaps::default()),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn minimal_recognizer_agrees_on_trees() {
        for (_, d) in fixtures::corpus() {
            let min = syntactic_algebra(&d).minimal;
            for t in enumerate_trees(d.alphabet(), 6) {
                assert_eq!(min.accepts(&t).unwrap(), d.accepts(&t).unwrap());
            }
        }
    }
}
