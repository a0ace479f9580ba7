//! Path words, deterministic top-down automata and path mixes.

use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::automata::{explore, tuples, Dbta, FiniteAlgebra};
use crate::error::{Caps, Error, Result};
use crate::trees::{PathSymbol, RankedAlphabet, Tree};

/// Nondeterministic word automaton for the path words of a language, read
/// from the root. States are elements of the source algebra.
#[derive(Debug, Clone)]
pub struct PathNfa {
    alphabet: RankedAlphabet,
    initial: BTreeSet<usize>,
    /// `trans[e][a][i]`: possible values of child `i` below a node labelled
    /// `a` whose value is `e`.
    trans: Vec<Vec<Vec<BTreeSet<usize>>>>,
    /// `leaf[e][c]`: constant `c` has value `e`.
    leaf: Vec<Vec<bool>>,
}

impl PathNfa {
    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> &BTreeSet<usize> {
        &self.initial
    }

    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    /// Successor set of a set of states on one symbol; `None` for a leaf
    /// symbol, which ends the word.
    fn step(&self, states: &BTreeSet<usize>, letter: usize, child: usize) -> BTreeSet<usize> {
        states
            .iter()
            .flat_map(|&e| self.trans[e][letter][child].iter().copied())
            .collect()
    }

    fn accepts_leaf(&self, states: &BTreeSet<usize>, letter: usize) -> bool {
        states.iter().any(|&e| self.leaf[e][letter])
    }

    pub fn accepts_word(&self, word: &[PathSymbol]) -> bool {
        let mut states = self.initial.clone();
        for (n, sym) in word.iter().enumerate() {
            match *sym {
                PathSymbol::Step { letter, child } => {
                    if letter >= self.alphabet.len() || child >= self.alphabet.arity(letter) {
                        return false;
                    }
                    states = self.step(&states, letter, child);
                }
                PathSymbol::Leaf(c) => {
                    return n + 1 == word.len()
                        && c < self.alphabet.len()
                        && self.alphabet.arity(c) == 0
                        && self.accepts_leaf(&states, c);
                }
            }
        }
        false
    }
}

/// The automaton of all path words of members of the language.
pub fn path_nfa(dbta: &Dbta) -> PathNfa {
    let alg = dbta.algebra();
    let alphabet = alg.alphabet().clone();
    let m = alg.size();
    let reach = alg.reachable();
    let mut trans: Vec<Vec<Vec<BTreeSet<usize>>>> = (0..m)
        .map(|_| (0..alphabet.len()).map(|a| vec![BTreeSet::new(); alphabet.arity(a)]).collect())
        .collect();
    let mut leaf = vec![vec![false; alphabet.len()]; m];
    for a in 0..alphabet.len() {
        let k = alphabet.arity(a);
        if k == 0 {
            leaf[alg.apply(a, &[])][a] = true;
            continue;
        }
        for t in tuples(reach.len(), k) {
            let args: Vec<usize> = t.iter().map(|&i| reach[i]).collect();
            let r = alg.apply(a, &args);
            for (i, &x) in args.iter().enumerate() {
                trans[r][a][i].insert(x);
            }
        }
    }
    let initial = reach.iter().copied().filter(|&e| dbta.is_accepting(e)).collect();
    PathNfa {
        alphabet,
        initial,
        trans,
        leaf,
    }
}

/// A complete deterministic top-down tree automaton. Read on path words it
/// is a deterministic word automaton accepting on constants; on trees it
/// accepts when every path word is accepted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dtta {
    alphabet: RankedAlphabet,
    initial: usize,
    /// `delta[q][a]` has one successor per child of `a`.
    delta: Vec<Vec<Vec<usize>>>,
    /// `leaf[q][c]` for constants `c`; ignored for other letters.
    leaf: Vec<Vec<bool>>,
}

impl Dtta {
    pub fn new(
        alphabet: RankedAlphabet,
        initial: usize,
        delta: Vec<Vec<Vec<usize>>>,
        leaf: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let n = delta.len();
        if n == 0 || initial >= n || leaf.len() != n {
            return Err(Error::invalid("automaton needs a valid initial state and one row per state"));
        }
        for q in 0..n {
            if delta[q].len() != alphabet.len() || leaf[q].len() != alphabet.len() {
                return Err(Error::invalid(format!("state {q} does not cover the alphabet")));
            }
            for a in 0..alphabet.len() {
                let succ = &delta[q][a];
                if succ.len() != alphabet.arity(a) || succ.iter().any(|&s| s >= n) {
                    return Err(Error::invalid(format!(
                        "state {q}, letter {}: expected {} successors in 0..{n}",
                        alphabet.name(a),
                        alphabet.arity(a)
                    )));
                }
            }
        }
        Ok(Dtta {
            alphabet,
            initial,
            delta,
            leaf,
        })
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn successors(&self, q: usize, letter: usize) -> &[usize] {
        &self.delta[q][letter]
    }

    pub fn leaf_accepts(&self, q: usize, letter: usize) -> bool {
        self.leaf[q][letter]
    }

    /// Accepts the tree when every path word is accepted.
    pub fn accepts(&self, tree: &Tree) -> Result<bool> {
        self.alphabet.check_tree(tree)?;
        Ok(self.run(self.initial, tree))
    }

    fn run(&self, q: usize, tree: &Tree) -> bool {
        if tree.children.is_empty() {
            return self.leaf[q][tree.label];
        }
        let succ = &self.delta[q][tree.label];
        tree.children.iter().zip(succ).all(|(c, &s)| self.run(s, c))
    }

    pub fn accepts_word(&self, word: &[PathSymbol]) -> bool {
        let mut q = self.initial;
        for (n, sym) in word.iter().enumerate() {
            match *sym {
                PathSymbol::Step { letter, child } => {
                    if letter >= self.alphabet.len() || child >= self.alphabet.arity(letter) {
                        return false;
                    }
                    q = self.delta[q][letter][child];
                }
                PathSymbol::Leaf(c) => {
                    return n + 1 == word.len()
                        && c < self.alphabet.len()
                        && self.alphabet.arity(c) == 0
                        && self.leaf[q][c];
                }
            }
        }
        false
    }

    /// The same automaton with accepting leaf bits negated. On words this
    /// is the complement among words ending in a leaf; on trees it is not a
    /// complement.
    pub fn flip_leaves(&self) -> Dtta {
        let mut d = self.clone();
        for (q, row) in d.leaf.iter_mut().enumerate() {
            for (a, bit) in row.iter_mut().enumerate() {
                if self.alphabet.arity(a) == 0 {
                    *bit = !self.leaf[q][a];
                }
            }
        }
        d
    }
}

/// Subset construction. State 0 is the initial set; the empty set, when
/// reached, is a rejecting sink.
pub fn determinize(nfa: &PathNfa, max_states: usize) -> Result<Dtta> {
    let alphabet = nfa.alphabet.clone();
    let mut subsets: Vec<BTreeSet<usize>> = vec![nfa.initial.clone()];
    let mut index: HashMap<BTreeSet<usize>, usize> = HashMap::new();
    index.insert(nfa.initial.clone(), 0);
    let mut delta: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut leaf: Vec<Vec<bool>> = Vec::new();
    let mut next = 0;
    while next < subsets.len() {
        let s = subsets[next].clone();
        next += 1;
        let mut row = Vec::with_capacity(alphabet.len());
        let mut leaves = Vec::with_capacity(alphabet.len());
        for a in 0..alphabet.len() {
            let mut succ = Vec::new();
            for i in 0..alphabet.arity(a) {
                let t = nfa.step(&s, a, i);
                let id = match index.get(&t) {
                    Some(&id) => id,
                    None => {
                        if subsets.len() >= max_states {
                            return Err(Error::CapExceeded {
                                what: "determinized states",
                                limit: max_states,
                            });
                        }
                        index.insert(t.clone(), subsets.len());
                        subsets.push(t);
                        subsets.len() - 1
                    }
                };
                succ.push(id);
            }
            row.push(succ);
            leaves.push(alphabet.arity(a) == 0 && nfa.accepts_leaf(&s, a));
        }
        delta.push(row);
        leaf.push(leaves);
    }
    Dtta::new(alphabet, 0, delta, leaf)
}

/// Bottom-up automaton for a Dtta. The value of a tree is the set of states
/// from which it is accepted; only reachable sets are built.
pub fn dtta_to_dbta(dtta: &Dtta, max_carrier: usize) -> Result<Dbta> {
    let n = dtta.num_states();
    let (algebra, sets) = explore(&dtta.alphabet, max_carrier, "subset carrier", |a, args: &[&FixedBitSet]| {
        let mut s = FixedBitSet::with_capacity(n);
        for q in 0..n {
            let ok = if args.is_empty() {
                dtta.leaf[q][a]
            } else {
                dtta.delta[q][a].iter().zip(args).all(|(&succ, set)| set.contains(succ))
            };
            s.set(q, ok);
        }
        Ok(s)
    })?;
    let accepting = sets.iter().map(|s| s.contains(dtta.initial)).collect();
    Dbta::from_mask(algebra, accepting)
}

/// The least deterministic (universal path) language containing the
/// language: all trees whose every path word is a path word of a member.
pub fn mixes_dtta(dbta: &Dbta, caps: Caps) -> Result<Dtta> {
    determinize(&path_nfa(dbta), caps.max_states)
}

pub fn mixes(dbta: &Dbta, caps: Caps) -> Result<Dbta> {
    dtta_to_dbta(&mixes_dtta(dbta, caps)?, caps.max_carrier)
}

/// `None` if the language equals its mixes, otherwise a smallest path mix
/// outside the language.
pub fn universal_path_counterexample(dbta: &Dbta, caps: Caps) -> Result<Option<Tree>> {
    let m = mixes(dbta, caps)?;
    m.inclusion_witness(dbta)
}

pub fn is_universal_path(dbta: &Dbta, caps: Caps) -> Result<bool> {
    Ok(universal_path_counterexample(dbta, caps)?.is_none())
}

/// Both the language and its complement are universal path languages.
pub fn is_doubly_deterministic(dbta: &Dbta, caps: Caps) -> Result<bool> {
    Ok(is_universal_path(dbta, caps)? && is_universal_path(&dbta.complement(), caps)?)
}

/// Which input language a separator accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Clone)]
pub struct Separator {
    /// Accepts every member of the `side` language and no member of the
    /// other.
    pub dtta: Dtta,
    pub side: Side,
}

/// A deterministic top-down language containing one input and disjoint from
/// the other, if any exists.
pub fn separate_topdown(d0: &Dbta, d1: &Dbta, caps: Caps) -> Result<Option<Separator>> {
    if d0.alphabet() != d1.alphabet() {
        return Err(Error::mismatch("separation needs a common alphabet"));
    }
    for (pos, neg, side) in [(d0, d1, Side::First), (d1, d0, Side::Second)] {
        let dtta = mixes_dtta(pos, caps)?;
        let closure = dtta_to_dbta(&dtta, caps.max_carrier)?;
        let cap = closure.algebra().size().saturating_mul(neg.algebra().size()).max(1);
        if Dbta::product_reachable(crate::BoolOp::Intersection, &closure, neg, cap)?.is_empty() {
            return Ok(Some(Separator { dtta, side }));
        }
    }
    Ok(None)
}

/// Elements having a tree that is a path mix of trees with values in `b`.
pub fn mix_elements(algebra: &FiniteAlgebra, b: &BTreeSet<usize>, caps: Caps) -> Result<BTreeSet<usize>> {
    let d = Dbta::new(algebra.clone(), b.iter().copied())?;
    let closure = mixes(&d, caps)?;
    let (_, pairs) = explore(
        algebra.alphabet(),
        caps.max_carrier,
        "mix product carrier",
        |a, args: &[&(usize, usize)]| {
            let xs: Vec<usize> = args.iter().map(|p| p.0).collect();
            let ys: Vec<usize> = args.iter().map(|p| p.1).collect();
            Ok((algebra.apply(a, &xs), closure.algebra().apply(a, &ys)))
        },
    )?;
    Ok(pairs
        .into_iter()
        .filter(|&(_, y)| closure.is_accepting(y))
        .map(|(x, _)| x)
        .collect())
}
