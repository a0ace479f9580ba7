#![allow(dead_code)]

use rand::Rng;
use treelab::automata::tuples;
use treelab::{Dbta, Dtop, FiniteAlgebra, RankedAlphabet, Term};

pub fn random_algebra(alphabet: &RankedAlphabet, size: usize, rng: &mut impl Rng) -> FiniteAlgebra {
    FiniteAlgebra::from_fn(alphabet.clone(), size, |_, _| rng.random_range(0..size)).unwrap()
}

pub fn random_dbta(alphabet: &RankedAlphabet, size: usize, rng: &mut impl Rng) -> Dbta {
    let alg = random_algebra(alphabet, size, rng);
    let mask = (0..size).map(|_| rng.random_bool(0.5)).collect();
    Dbta::from_mask(alg, mask).unwrap()
}

fn random_output_term(
    output: &RankedAlphabet,
    states: usize,
    children: usize,
    depth: usize,
    rng: &mut impl Rng,
) -> Term<(usize, usize)> {
    let consts: Vec<usize> = output.constants().collect();
    if depth == 0 || rng.random_bool(0.35) {
        if children > 0 && rng.random_bool(0.7) {
            return Term::Var((rng.random_range(0..states), rng.random_range(0..children)));
        }
        return Term::constant(consts[rng.random_range(0..consts.len())]);
    }
    let a = rng.random_range(0..output.len());
    let args = (0..output.arity(a))
        .map(|_| random_output_term(output, states, children, depth - 1, rng))
        .collect();
    Term::App(a, args)
}

/// A transducer with up to three states and output terms of depth two.
pub fn random_dtop(input: &RankedAlphabet, output: &RankedAlphabet, rng: &mut impl Rng) -> Dtop {
    let n = rng.random_range(1..=3);
    let rules = (0..input.len())
        .map(|a| {
            (0..n)
                .map(|_| random_output_term(output, n, input.arity(a), 2, rng))
                .collect()
        })
        .collect();
    Dtop::new(input.clone(), output.clone(), n, rng.random_range(0..n), rules).unwrap()
}

#[allow(unused_imports)]
pub use treelab::oracle::{member_words, mixes_outside};

/// Every element tuple for a letter, in table order.
pub fn letter_tuples(alg: &FiniteAlgebra, letter: usize) -> impl Iterator<Item = Vec<usize>> {
    tuples(alg.size(), alg.alphabet().arity(letter))
}

pub fn small_alphabets() -> Vec<RankedAlphabet> {
    use treelab::fixtures::*;
    vec![sig_mono(), sig_pott(), sig_gcd(), sig_and(), sig_line()]
}
