//! Standard alphabets, languages and algebras shared by the tests, the
//! command line and the benchmarks.

use crate::automata::{Dbta, FiniteAlgebra};
use crate::trees::{RankedAlphabet, Term, TreeHom};

fn alphabet(letters: &[(&str, usize)]) -> RankedAlphabet {
    RankedAlphabet::new(letters.iter().map(|&(n, a)| (n, a))).expect("fixture alphabet")
}

/// `{s/1, z/0}`
pub fn sig_mono() -> RankedAlphabet {
    alphabet(&[("s", 1), ("z", 0)])
}

/// `{f2/2, f1/1, f0/0}`
pub fn sig_pott() -> RankedAlphabet {
    alphabet(&[("f2", 2), ("f1", 1), ("f0", 0)])
}

/// `{f2/2, f0/0}`
pub fn sig_pott_k() -> RankedAlphabet {
    alphabet(&[("f2", 2), ("f0", 0)])
}

/// `{f1/1, f0/0}`
pub fn sig_line() -> RankedAlphabet {
    alphabet(&[("f1", 1), ("f0", 0)])
}

/// `{and/2, one/0, zero/0}`
pub fn sig_and() -> RankedAlphabet {
    alphabet(&[("and", 2), ("one", 0), ("zero", 0)])
}

/// `{or/2, one/0, zero/0}`
pub fn sig_or() -> RankedAlphabet {
    alphabet(&[("or", 2), ("one", 0), ("zero", 0)])
}

/// `{and/2, or/2, one/0, zero/0}`
pub fn sig_bool() -> RankedAlphabet {
    alphabet(&[("and", 2), ("or", 2), ("one", 0), ("zero", 0)])
}

/// `{g/2, c/0, d/0}`
pub fn sig_gcd() -> RankedAlphabet {
    alphabet(&[("g", 2), ("c", 0), ("d", 0)])
}

fn pott_op(letter: &str, args: &[usize]) -> usize {
    const BOT: usize = 2;
    match (letter, args) {
        ("f0", []) => 0,
        ("f1", [1]) => 0,
        ("f1", [0]) => 1,
        ("f1", [_]) => BOT,
        ("f2", [1, 1]) => 0,
        ("f2", [0, 0]) => 1,
        ("f2", [_, _]) => BOT,
        _ => unreachable!("not a letter of the Potthoff signature"),
    }
}

fn pott_algebra(sig: RankedAlphabet) -> FiniteAlgebra {
    let names: Vec<String> = ["0", "1", "⊥"].iter().map(|s| s.to_string()).collect();
    let s = sig.clone();
    FiniteAlgebra::from_fn(sig, 3, |a, args| pott_op(s.name(a), args))
        .and_then(|alg| alg.with_names(names))
        .expect("Potthoff algebra")
}

/// The three-element algebra `{0, 1, ⊥}` over `{f2, f1, f0}`: value 0 means
/// every leaf is at even depth, 1 every leaf at odd depth.
pub fn alg_pott() -> FiniteAlgebra {
    pott_algebra(sig_pott())
}

/// Every leaf is at even depth, over `{f2, f1, f0}`.
pub fn l_pott() -> Dbta {
    Dbta::new(alg_pott(), [0]).expect("fixture")
}

/// Every leaf is at even depth, over `{f2, f0}`.
pub fn k_pott() -> Dbta {
    Dbta::new(pott_algebra(sig_pott_k()), [0]).expect("fixture")
}

/// A six-element recognizer of [`l_pott`]: the Potthoff value paired with
/// the parity of the node count.
pub fn l_pott_redundant() -> Dbta {
    let sig = sig_pott();
    let s = sig.clone();
    let alg = FiniteAlgebra::from_fn(sig, 6, |a, args| {
        let vals: Vec<usize> = args.iter().map(|&x| x / 2).collect();
        let parity = (1 + args.iter().map(|&x| x % 2).sum::<usize>()) % 2;
        pott_op(s.name(a), &vals) * 2 + parity
    })
    .expect("fixture");
    Dbta::new(alg, [0, 1]).expect("fixture")
}

fn parity_chain(sig: RankedAlphabet, leaf_value: usize) -> Dbta {
    let s = sig.clone();
    let alg = FiniteAlgebra::from_fn(sig, 2, |a, args| {
        if s.arity(a) == 0 {
            leaf_value
        } else {
            1 - args[0]
        }
    })
    .expect("fixture");
    Dbta::new(alg, [0]).expect("fixture")
}

/// Even number of nodes, over `{s, z}`.
pub fn l_even() -> Dbta {
    parity_chain(sig_mono(), 1)
}

/// The unique leaf is at even depth, over `{f1, f0}`.
pub fn l_line_even() -> Dbta {
    parity_chain(sig_line(), 0)
}

fn boolean_eval(sig: RankedAlphabet) -> Dbta {
    let s = sig.clone();
    let alg = FiniteAlgebra::from_fn(sig, 2, |a, args| match s.name(a) {
        "and" => args[0] & args[1],
        "or" => args[0] | args[1],
        "one" => 1,
        "zero" => 0,
        other => unreachable!("unexpected letter {other}"),
    })
    .expect("fixture");
    Dbta::new(alg, [1]).expect("fixture")
}

/// Conjunctions of constants that evaluate to 1.
pub fn l_true_and() -> Dbta {
    boolean_eval(sig_and())
}

/// Disjunctions of constants that evaluate to 1.
pub fn l_true_or() -> Dbta {
    boolean_eval(sig_or())
}

/// Boolean formulas over `{and, or, one, zero}` that evaluate to 1.
pub fn l_true_bool() -> Dbta {
    boolean_eval(sig_bool())
}

/// Elements: 0 = c, 1 = d, 2 = accepted pair, 3 = anything else.
fn gcd_classifier(accept_pair: fn(usize, usize) -> bool) -> Dbta {
    let sig = sig_gcd();
    let s = sig.clone();
    let alg = FiniteAlgebra::from_fn(sig, 4, |a, args| match (s.name(a), args) {
        ("c", []) => 0,
        ("d", []) => 1,
        ("g", &[x, y]) if x < 2 && y < 2 && accept_pair(x, y) => 2,
        _ => 3,
    })
    .expect("fixture");
    Dbta::new(alg, [2]).expect("fixture")
}

/// `{g(c,d)}`
pub fn l_pair() -> Dbta {
    gcd_classifier(|x, y| x == 0 && y == 1)
}

/// `{g(c,c), g(d,d)}`
pub fn l_two() -> Dbta {
    gcd_classifier(|x, y| x == y)
}

/// The root label is `g`, over `{g, c, d}`.
pub fn root_is_g() -> Dbta {
    let sig = sig_gcd();
    let alg = FiniteAlgebra::from_fn(sig.clone(), 2, |a, _| usize::from(sig.arity(a) == 2)).expect("fixture");
    Dbta::new(alg, [1]).expect("fixture")
}

/// `{f1, f0} → {f2, f0}`: `f0 ↦ f0`, `f1(x) ↦ f2(x, x)`.
pub fn hom_dup() -> TreeHom {
    TreeHom::new(
        sig_line(),
        sig_pott_k(),
        vec![Term::App(0, vec![Term::Var(0), Term::Var(0)]), Term::constant(1)],
    )
    .expect("fixture")
}

/// The semilattice `({0,1}, ∧)`.
pub fn semilattice() -> FiniteAlgebra {
    crate::transduce::semilattice()
}

/// The lattice `({0,1}, ∨, ∧)`.
pub fn lattice() -> FiniteAlgebra {
    crate::structure::two_element_lattice()
}

/// Named languages used by corpus-wide checks.
pub fn corpus() -> Vec<(&'static str, Dbta)> {
    vec![
        ("l_even", l_even()),
        ("l_pott", l_pott()),
        ("l_pott_redundant", l_pott_redundant()),
        ("k_pott", k_pott()),
        ("l_line_even", l_line_even()),
        ("l_true_and", l_true_and()),
        ("l_true_or", l_true_or()),
        ("l_true_bool", l_true_bool()),
        ("l_pair", l_pair()),
        ("l_two", l_two()),
        ("root_is_g", root_is_g()),
    ]
}
