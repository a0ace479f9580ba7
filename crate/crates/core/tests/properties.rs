mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treelab::cascade::{annotate, annotated_alphabet, label_with_values, nest, sequential_compose, value_alphabet};
use treelab::paths::{self, Side};
use treelab::structure::{self, AbelianVerdict, Congruence, PolCaps};
use treelab::syntactic::{self, OpTable};
use treelab::transduce::{self, PolyTerm};
use treelab::{enumerate_trees, BoolOp, Caps, Dbta, FiniteAlgebra, RankedAlphabet};

use common::*;

fn setup(seed: u64, alpha: usize) -> (ChaCha8Rng, RankedAlphabet) {
    let alphabets = small_alphabets();
    (ChaCha8Rng::seed_from_u64(seed), alphabets[alpha % alphabets.len()].clone())
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn evaluation_is_compositional(seed: u64, alpha in 0..5usize, size in 1..5usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let d = random_dbta(&sig, size, &mut rng);
        for t in enumerate_trees(&sig, 6) {
            let kids: Vec<usize> = t.children.iter().map(|c| d.evaluate(c).unwrap()).collect();
            prop_assert_eq!(d.evaluate(&t).unwrap(), d.algebra().apply(t.label, &kids));
        }
    }

    #[test]
    fn boolean_operations_are_pointwise(seed: u64, alpha in 0..5usize, s1 in 1..4usize, s2 in 1..4usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let d1 = random_dbta(&sig, s1, &mut rng);
        let d2 = random_dbta(&sig, s2, &mut rng);
        let ops = [BoolOp::Union, BoolOp::Intersection, BoolOp::Difference, BoolOp::SymmetricDifference];
        let combined: Vec<Dbta> = ops.iter().map(|&op| Dbta::boolean_combine(op, &d1, &d2).unwrap()).collect();
        let comp = d1.complement();
        for t in enumerate_trees(&sig, 7) {
            let (x, y) = (d1.accepts(&t).unwrap(), d2.accepts(&t).unwrap());
            for (op, d) in ops.iter().zip(&combined) {
                prop_assert_eq!(d.accepts(&t).unwrap(), op.apply(x, y));
            }
            prop_assert_eq!(comp.accepts(&t).unwrap(), !x);
        }
    }

    #[test]
    fn equivalence_witnesses_distinguish(seed: u64, alpha in 0..5usize, s1 in 1..4usize, s2 in 1..4usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let d1 = random_dbta(&sig, s1, &mut rng);
        let d2 = random_dbta(&sig, s2, &mut rng);
        match d1.difference_witness(&d2).unwrap() {
            Some(w) => prop_assert_ne!(d1.accepts(&w).unwrap(), d2.accepts(&w).unwrap()),
            None => {
                for t in enumerate_trees(&sig, 7) {
                    prop_assert_eq!(d1.accepts(&t).unwrap(), d2.accepts(&t).unwrap());
                }
            }
        }
    }

    #[test]
    fn emptiness_witness_is_minimal(seed: u64, alpha in 0..5usize, size in 1..5usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let d = random_dbta(&sig, size, &mut rng);
        let smallest = enumerate_trees(&sig, 7).into_iter().find(|t| d.accepts(t).unwrap());
        match d.witness() {
            Some(w) => {
                prop_assert!(d.accepts(&w).unwrap());
                if let Some(s) = smallest {
                    prop_assert_eq!(w.size(), s.size());
                }
            }
            None => prop_assert!(smallest.is_none()),
        }
    }

    #[test]
    fn minimization_laws(seed: u64, alpha in 0..5usize, size in 1..6usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let d = random_dbta(&sig, size, &mut rng);
        let res = syntactic::syntactic_algebra(&d);
        prop_assert!(res.minimal.are_equivalent(&d).unwrap());
        prop_assert!(res.minimal.algebra().size() <= d.algebra().reachable().len().max(1));
        let again = syntactic::syntactic_algebra(&res.minimal).minimal;
        prop_assert!(syntactic::dbta_isomorphism(&again, &res.minimal).is_some());
        let reach = d.algebra().reachable();
        for a in 0..sig.len() {
            for t in treelab::tuples(reach.len(), sig.arity(a)) {
                let args: Vec<usize> = t.iter().map(|&i| reach[i]).collect();
                let lhs = res.projection[d.algebra().apply(a, &args)].unwrap();
                let proj: Vec<usize> = args.iter().map(|&x| res.projection[x].unwrap()).collect();
                prop_assert_eq!(lhs, res.minimal.algebra().apply(a, &proj));
            }
        }
    }

    /// Decisions about a language depend only on its syntactic algebra.
    #[test]
    fn verdicts_depend_on_syntactic_algebra(seed: u64, alpha in 0..5usize, size in 1..5usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let d = random_dbta(&sig, size, &mut rng);
        let m = syntactic::syntactic_algebra(&d).minimal;
        let caps = Caps::default();
        prop_assert_eq!(paths::is_universal_path(&d, caps).unwrap(), paths::is_universal_path(&m, caps).unwrap());
        prop_assert_eq!(
            paths::is_doubly_deterministic(&d, caps).unwrap(),
            paths::is_doubly_deterministic(&m, caps).unwrap()
        );
    }

    #[test]
    fn definable_terms_evaluate_to_target(seed: u64, alpha in 0..5usize, size in 1..4usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let alg = random_algebra(&sig, size, &mut rng);
        // a binary target drawn from the term operations at depth two
        let pick = rng.random_range(0..sig.len());
        let k = sig.arity(pick);
        let args: Vec<treelab::Term<usize>> = (0..k).map(|_| treelab::Term::Var(rng.random_range(0..2))).collect();
        let term = treelab::Term::App(pick, args);
        let target = OpTable { arity: 2, values: treelab::tuples(size, 2).map(|t| alg.eval_term(&term, &t)).collect() };
        let found = syntactic::term_definable(&alg, &target, 2).expect("a depth-one term exists");
        for (i, t) in treelab::tuples(size, 2).enumerate() {
            prop_assert_eq!(alg.eval_term(&found, &t), target.values[i]);
        }
    }

    #[test]
    fn mixes_is_a_least_closure(seed: u64, alpha in 0..5usize, s1 in 1..4usize, s2 in 1..4usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let caps = Caps::default();
        let l = random_dbta(&sig, s1, &mut rng);
        let other = random_dbta(&sig, s2, &mut rng);
        let m = paths::mixes(&l, caps).unwrap();
        prop_assert!(l.is_subset_of(&m).unwrap());
        prop_assert!(paths::mixes(&m, caps).unwrap().are_equivalent(&m).unwrap());
        prop_assert!(paths::is_universal_path(&m, caps).unwrap());
        let bigger = Dbta::boolean_combine(BoolOp::Union, &l, &other).unwrap();
        let mb = paths::mixes(&bigger, caps).unwrap();
        prop_assert!(m.is_subset_of(&mb).unwrap());
        // any universal path superset contains the mixes
        if paths::is_universal_path(&bigger, caps).unwrap() {
            prop_assert!(m.is_subset_of(&bigger).unwrap());
        }
    }

    #[test]
    fn separators_are_sound(seed: u64, alpha in 0..5usize, s1 in 1..4usize, s2 in 1..4usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let d0 = random_dbta(&sig, s1, &mut rng);
        let d1 = random_dbta(&sig, s2, &mut rng);
        if let Some(s) = paths::separate_topdown(&d0, &d1, Caps::default()).unwrap() {
            let (pos, neg) = match s.side { Side::First => (&d0, &d1), Side::Second => (&d1, &d0) };
            for t in enumerate_trees(&sig, 7) {
                let acc = s.dtta.accepts(&t).unwrap();
                if pos.accepts(&t).unwrap() { prop_assert!(acc); }
                if neg.accepts(&t).unwrap() { prop_assert!(!acc); }
            }
        } else {
            // no deterministic language separates them: the mixes of each meet the other
            let m0 = paths::mixes(&d0, Caps::default()).unwrap();
            let m1 = paths::mixes(&d1, Caps::default()).unwrap();
            prop_assert!(!Dbta::boolean_combine(BoolOp::Intersection, &m0, &d1).unwrap().is_empty());
            prop_assert!(!Dbta::boolean_combine(BoolOp::Intersection, &m1, &d0).unwrap().is_empty());
        }
    }

    #[test]
    fn preimages_and_diagrams(seed: u64, ain in 0..5usize, aout in 0..5usize, size in 1..4usize) {
        let (mut rng, input) = setup(seed, ain);
        let output = small_alphabets()[aout % 5].clone();
        let f = random_dtop(&input, &output, &mut rng);
        let k = random_dbta(&output, size, &mut rng);
        let pre = transduce::dtop_preimage(&k, &f, 4096).unwrap();
        let mh = transduce::dtop_to_matrix_hom(&f, k.algebra()).unwrap();
        let (template, ext) = transduce::matrix_hom_to_dtops(&mh).unwrap();
        for t in enumerate_trees(&input, 6) {
            prop_assert_eq!(pre.accepts(&t).unwrap(), k.accepts(&f.apply(&t).unwrap()).unwrap());
            let h = mh.eval(&t).unwrap();
            for q in 0..f.num_states() {
                prop_assert_eq!(k.algebra().evaluate(&f.run(q, &t)).unwrap(), h[q]);
                let out = template.with_initial(q).unwrap().apply(&t).unwrap();
                prop_assert_eq!(ext.evaluate(&out).unwrap(), h[q]);
            }
        }
        // preimage as a matrix power language
        let q0 = f.initial();
        let flat = transduce::matrix_power_language(&mh, |v| k.is_accepting(v[q0]), 4096).unwrap();
        prop_assert!(flat.are_equivalent(&pre).unwrap());
    }

    /// A matrix power language is a Boolean combination of preimages of
    /// single elements under the transducer states.
    #[test]
    fn matrix_power_languages_are_boolean_combinations(seed: u64, ain in 0..5usize, aout in 0..5usize) {
        let (mut rng, input) = setup(seed, ain);
        let output = small_alphabets()[aout % 5].clone();
        let f = random_dtop(&input, &output, &mut rng);
        let g = random_algebra(&output, 2, &mut rng);
        let mh = transduce::dtop_to_matrix_hom(&f, &g).unwrap();
        let n = mh.width();
        let accepted: Vec<Vec<usize>> = treelab::tuples(2, n).filter(|_| rng.random_bool(0.4)).collect();
        let flat = transduce::matrix_power_language(&mh, |v| accepted.iter().any(|a| a == v), 4096).unwrap();
        let mut union: Option<Dbta> = None;
        for v in &accepted {
            let mut conj: Option<Dbta> = None;
            for q in 0..n {
                let k = Dbta::new(g.clone(), [v[q]]).unwrap();
                let l = transduce::dtop_preimage(&k, &f.with_initial(q).unwrap(), 4096).unwrap();
                conj = Some(match conj { None => l, Some(c) => Dbta::product_reachable(BoolOp::Intersection, &c, &l, 1 << 16).unwrap() });
            }
            let conj = conj.unwrap();
            union = Some(match union { None => conj, Some(u) => Dbta::product_reachable(BoolOp::Union, &u, &conj, 1 << 16).unwrap() });
        }
        match union {
            Some(u) => prop_assert!(u.are_equivalent(&flat).unwrap()),
            None => prop_assert!(flat.is_empty()),
        }
    }

    /// Each coordinate of a semilattice matrix power is a universal path
    /// language, and accepting sets give Boolean combinations of them.
    #[test]
    fn semilattice_powers_are_path_languages(seed: u64, alpha in 0..5usize, width in 1..4usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let ops = (0..sig.len()).map(|a| {
            (0..width).map(|_| {
                let k = sig.arity(a);
                if k == 0 || rng.random_bool(0.15) {
                    PolyTerm::Const(rng.random_range(0..2))
                } else {
                    let vars = (0..width * k).filter(|_| rng.random_bool(0.5)).map(PolyTerm::Var).collect();
                    transduce::conjunction(vars)
                }
            }).collect()
        }).collect();
        let mh = transduce::MatrixHom::new(transduce::semilattice(), sig.clone(), width, ops).unwrap();
        let caps = Caps::default();
        let coords: Vec<Dbta> = (0..width)
            .map(|q| transduce::matrix_power_language(&mh, |v| v[q] == 1, 4096).unwrap())
            .collect();
        for c in &coords {
            prop_assert!(paths::is_universal_path(c, caps).unwrap());
        }
        let accepted: Vec<Vec<usize>> = treelab::tuples(2, width).filter(|_| rng.random_bool(0.5)).collect();
        let flat = transduce::matrix_power_language(&mh, |v| accepted.iter().any(|a| a == v), 4096).unwrap();
        let mut union: Option<Dbta> = None;
        for v in &accepted {
            let mut conj: Option<Dbta> = None;
            for (q, c) in coords.iter().enumerate() {
                let lit = if v[q] == 1 { c.clone() } else { c.complement() };
                conj = Some(match conj { None => lit, Some(x) => Dbta::product_reachable(BoolOp::Intersection, &x, &lit, 1 << 16).unwrap() });
            }
            let conj = conj.unwrap();
            union = Some(match union { None => conj, Some(u) => Dbta::product_reachable(BoolOp::Union, &u, &conj, 1 << 16).unwrap() });
        }
        match union {
            Some(u) => prop_assert!(u.are_equivalent(&flat).unwrap()),
            None => prop_assert!(flat.is_empty()),
        }
    }

    #[test]
    fn nesting_matches_annotation(seed: u64, alpha in 0..5usize, n in 0..3usize, size in 1..4usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let langs: Vec<Dbta> = (0..n).map(|_| random_dbta(&sig, size, &mut rng)).collect();
        let top = random_dbta(&annotated_alphabet(&sig, n), 3, &mut rng);
        let nested = nest(&sig, &langs, &top, 4096).unwrap();
        for t in enumerate_trees(&sig, 7) {
            let ann = annotate(&t, &langs).unwrap();
            prop_assert_eq!(nested.accepts(&t).unwrap(), top.accepts(&ann).unwrap());
        }
    }

    #[test]
    fn wreath_principle(seed: u64, alpha in 0..5usize, sb in 1..4usize, sa in 1..4usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let h = random_algebra(&sig, sb, &mut rng);
        let g = random_algebra(&value_alphabet(&sig, sb), sa, &mut rng);
        let c = sequential_compose(&h, &g).unwrap();
        for t in enumerate_trees(&sig, 7) {
            let expected = g.evaluate(&label_with_values(&t, &h)).unwrap() * sb + h.evaluate(&t).unwrap();
            prop_assert_eq!(c.evaluate(&t).unwrap(), expected);
        }
    }

    #[test]
    fn principal_congruences_are_least(seed: u64, alpha in 0..5usize, size in 2..6usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let alg = random_algebra(&sig, size, &mut rng);
        let all = structure::all_congruences(&alg, 8).unwrap();
        for a in 0..size {
            for b in 0..size {
                let p = structure::principal_congruence(&alg, a, b);
                prop_assert!(structure::is_compatible(&alg, &p));
                prop_assert!(p.related(a, b));
                for c in all.iter().filter(|c| c.related(a, b)) {
                    prop_assert!(p.refines(c));
                }
            }
        }
        // brute force over all partitions
        let brute = treelab::tuples(size, size)
            .map(|l| Congruence::from_labels(&l))
            .filter(|c| structure::is_compatible(&alg, c))
            .collect::<std::collections::BTreeSet<_>>();
        prop_assert_eq!(brute, all.into_iter().collect());
    }

    #[test]
    fn polynomials_are_closed(seed: u64, alpha in 0..5usize, size in 1..4usize, arity in 1..3usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let alg = random_algebra(&sig, size, &mut rng);
        let caps = PolCaps { max_functions: 3000, ..PolCaps::default() };
        let pol = structure::generate_polynomials(&alg, arity, caps).unwrap();
        if pol.capped {
            return Ok(());
        }
        let set: std::collections::HashSet<&Vec<usize>> = pol.tables.iter().collect();
        for a in 0..sig.len() {
            let k = sig.arity(a);
            if k > 1 && pol.len() > 200 { continue; }
            for pick in treelab::tuples(pol.len(), k) {
                let t: Vec<usize> = (0..pol.tables[0].len())
                    .map(|p| alg.apply(a, &pick.iter().map(|&i| pol.tables[i][p]).collect::<Vec<_>>()))
                    .collect();
                prop_assert!(set.contains(&t));
            }
        }
    }

    #[test]
    fn pair_and_abelian_witnesses_are_genuine(seed: u64, alpha in 0..5usize, size in 1..4usize) {
        let (mut rng, sig) = setup(seed, alpha);
        let alg = random_algebra(&sig, size, &mut rng);
        let caps = PolCaps { max_functions: 3000, ..PolCaps::default() };
        for p in structure::or_pairs(&alg, caps).unwrap().pairs {
            prop_assert!(structure::acts_like_or(size, &p.table, p.a0, p.a1));
        }
        for c in structure::all_congruences(&alg, 8).unwrap() {
            if let AbelianVerdict::Violated(v) = structure::strongly_abelian_check(&alg, &c, 2, 2) {
                prop_assert!(v.holds(size, &c));
            }
        }
    }
}

#[test]
fn lattice_divisions_reconstruct() {
    let lattice = structure::two_element_lattice();
    for alg in [treelab::fixtures::l_true_bool().algebra().clone(), lattice.clone()] {
        let w = structure::lattice_divides(&alg, true, Default::default(), PolCaps::default())
            .unwrap()
            .expect("lattice divides");
        assert!(syntactic::verify_division(&lattice, &w.pool, &w.witness));
        let restricted = syntactic::assigned_reduct(lattice.alphabet(), &w.pool, &w.witness.assignment)
            .restrict(&w.witness.subuniverse)
            .unwrap();
        let local: Vec<Vec<usize>> = w
            .witness
            .congruence
            .iter()
            .map(|b| b.iter().map(|e| w.witness.subuniverse.iter().position(|x| x == e).unwrap()).collect())
            .collect();
        let c = Congruence::from_blocks(restricted.size(), local).unwrap();
        let q = structure::quotient(&restricted, &c).unwrap();
        assert!(syntactic::isomorphism(&q, &lattice).is_some());
    }
}

#[test]
fn path_languages_are_not_divided_by_the_lattice() {
    let caps = Caps::default();
    for (name, d) in treelab::fixtures::corpus() {
        let path = paths::is_universal_path(&d, caps).unwrap() || paths::is_universal_path(&d.complement(), caps).unwrap();
        if path {
            let m = syntactic::syntactic_algebra(&d).minimal;
            let divided = structure::lattice_divides(m.algebra(), false, Default::default(), PolCaps::default()).unwrap();
            assert!(divided.is_none(), "{name}");
        }
    }
}

#[test]
fn random_algebras_are_reproducible() {
    let sig = treelab::fixtures::sig_pott();
    let a: FiniteAlgebra = random_algebra(&sig, 3, &mut ChaCha8Rng::seed_from_u64(1));
    let b: FiniteAlgebra = random_algebra(&sig, 3, &mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!(a, b);
}

proptest! {
    /// On unary chains every width-1 layer gives all `f1` nodes one value,
    /// so width-1 cascades cannot tell `f1(f0)` from `f1(f1(f0))`.
    #[test]
    fn width_one_cascades_collapse_unary_chains(seed: u64, depth in 1..5usize) {
        use treelab::cascade::{cascade_eval, ctl_eval, ctl_parse, SemiPoly};
        use treelab::{parse_tree, Cascade, Layer, Readout};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = treelab::fixtures::sig_pott();
        let mut layers = Vec::new();
        for bits in 0..depth {
            let alphabet = annotated_alphabet(&sig, bits);
            let ops = (0..alphabet.len())
                .map(|a| {
                    let inputs = alphabet.arity(a);
                    vec![if rng.random_bool(0.3) {
                        SemiPoly::Zero
                    } else {
                        SemiPoly::And((0..inputs).filter(|_| rng.random_bool(0.6)).collect())
                    }]
                })
                .collect();
            layers.push(Layer { alphabet, width: 1, ops });
        }
        let c = Cascade::new(sig.clone(), layers, Readout::Bit(depth - 1)).unwrap();
        let short = parse_tree("f1(f0)", &sig).unwrap();
        let long = parse_tree("f1(f1(f0))", &sig).unwrap();
        prop_assert_eq!(cascade_eval(&c, &short).unwrap(), cascade_eval(&c, &long).unwrap());
        let eu = ctl_parse("E[lbl(f2) U lbl(f0)]", &sig).unwrap();
        prop_assert_ne!(ctl_eval(&eu, &short), ctl_eval(&eu, &long));
    }
}
