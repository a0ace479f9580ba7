//! Finite indexed algebras and deterministic bottom-up tree automata.
//!
//! An algebra over a ranked alphabet stores one dense table per letter,
//! indexed by the argument tuple in lexicographic order. A [`Dbta`] is an
//! algebra together with an accepting subset of its carrier.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::trees::{RankedAlphabet, Term, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAlgebra {
    alphabet: RankedAlphabet,
    size: usize,
    tables: Vec<Vec<usize>>,
    names: Option<Vec<String>>,
}

/// Index of `args` in a dense table over a carrier of size `size`.
fn tuple_index(size: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &e| acc * size + e)
}

/// Iterates all tuples of length `arity` over `0..size` in lexicographic
/// order.
pub fn tuples(size: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = size.checked_pow(arity as u32).expect("tuple space overflows");
    (0..total).map(move |mut idx| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % size;
            idx /= size;
        }
        t
    })
}

impl FiniteAlgebra {
    pub fn new(alphabet: RankedAlphabet, size: usize, tables: Vec<Vec<usize>>) -> Result<Self> {
        if tables.len() != alphabet.len() {
            return Err(Error::mismatch(format!(
                "{} tables for {} letters",
                tables.len(),
                alphabet.len()
            )));
        }
        for (a, table) in tables.iter().enumerate() {
            let want = size.pow(alphabet.arity(a) as u32);
            if table.len() != want {
                return Err(Error::invalid(format!(
                    "table of {} has {} entries, expected {want}",
                    alphabet.name(a),
                    table.len()
                )));
            }
            if let Some(bad) = table.iter().find(|&&e| e >= size) {
                return Err(Error::invalid(format!(
                    "table of {} yields {bad}, outside a carrier of size {size}",
                    alphabet.name(a)
                )));
            }
        }
        Ok(FiniteAlgebra {
            alphabet,
            size,
            tables,
            names: None,
        })
    }

    /// Builds the tables by calling `op(letter, args)` on every tuple.
    pub fn from_fn(
        alphabet: RankedAlphabet,
        size: usize,
        mut op: impl FnMut(usize, &[usize]) -> usize,
    ) -> Result<Self> {
        let tables = (0..alphabet.len())
            .map(|a| tuples(size, alphabet.arity(a)).map(|t| op(a, &t)).collect())
            .collect();
        Self::new(alphabet, size, tables)
    }

    /// Attaches display names for the carrier elements.
    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.size {
            return Err(Error::invalid("one name per carrier element"));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn table(&self, letter: usize) -> &[usize] {
        &self.tables[letter]
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn element_name(&self, e: usize) -> String {
        match &self.names {
            Some(n) => n[e].clone(),
            None => e.to_string(),
        }
    }

    pub fn apply(&self, letter: usize, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.alphabet.arity(letter));
        self.tables[letter][tuple_index(self.size, args)]
    }

    /// Bottom-up fold of `tree` through the tables.
    pub fn evaluate(&self, tree: &Tree) -> Result<usize> {
        if tree.label >= self.alphabet.len() || tree.children.len() != self.alphabet.arity(tree.label) {
            return Err(Error::mismatch(format!(
                "node with letter index {} and {} children does not fit the alphabet",
                tree.label,
                tree.children.len()
            )));
        }
        let args = tree
            .children
            .iter()
            .map(|c| self.evaluate(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.apply(tree.label, &args))
    }

    /// Evaluates a term whose variables are indices into `args`.
    pub fn eval_term(&self, term: &Term<usize>, args: &[usize]) -> usize {
        term.eval(&|&v| args[v], &|a, vals| self.apply(a, vals))
    }

    /// The same carrier, with the operations chosen by name (a reduct).
    pub fn reduct(&self, letters: &[&str]) -> Result<FiniteAlgebra> {
        let ids = letters
            .iter()
            .map(|n| {
                self.alphabet
                    .lookup(n)
                    .ok_or_else(|| Error::mismatch(format!("no letter {n}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let alphabet = RankedAlphabet::signature(ids.iter().map(|&a| {
            (self.alphabet.name(a).to_string(), self.alphabet.arity(a))
        }))?;
        let tables = ids.iter().map(|&a| self.tables[a].clone()).collect();
        Ok(FiniteAlgebra {
            alphabet,
            size: self.size,
            tables,
            names: self.names.clone(),
        })
    }

    /// Restriction to the given elements, renumbered in the given order.
    /// The set must be closed under every operation.
    pub fn restrict(&self, elements: &[usize]) -> Result<FiniteAlgebra> {
        let mut index = vec![usize::MAX; self.size];
        for (i, &e) in elements.iter().enumerate() {
            index[e] = i;
        }
        let n = elements.len();
        let mut tables = Vec::with_capacity(self.alphabet.len());
        for a in 0..self.alphabet.len() {
            let mut table = Vec::new();
            for t in tuples(n, self.alphabet.arity(a)) {
                let orig: Vec<usize> = t.iter().map(|&i| elements[i]).collect();
                let r = index[self.apply(a, &orig)];
                if r == usize::MAX {
                    return Err(Error::invalid(format!(
                        "subset is not closed under {}",
                        self.alphabet.name(a)
                    )));
                }
                table.push(r);
            }
            tables.push(table);
        }
        let names = self
            .names
            .as_ref()
            .map(|ns| elements.iter().map(|&e| ns[e].clone()).collect());
        Ok(FiniteAlgebra {
            alphabet: self.alphabet.clone(),
            size: n,
            tables,
            names,
        })
    }

    /// Elements that are values of some tree, in increasing order.
    pub fn reachable(&self) -> Vec<usize> {
        let (cost, _) = self.settle();
        (0..self.size).filter(|&e| cost[e] != usize::MAX).collect()
    }

    /// For every element, a tree of minimal node count evaluating to it, or
    /// `None` when the element is unreachable.
    pub fn minimal_witnesses(&self) -> Vec<Option<Tree>> {
        let (cost, via) = self.settle();
        (0..self.size)
            .map(|e| (cost[e] != usize::MAX).then(|| build_witness(e, &via)))
            .collect()
    }

    /// A smallest tree whose value satisfies `pred`.
    pub fn find_witness(&self, pred: impl Fn(usize) -> bool) -> Option<Tree> {
        let (cost, via) = self.settle();
        let best = (0..self.size)
            .filter(|&e| cost[e] != usize::MAX && pred(e))
            .map(|e| cost[e])
            .min()?;
        (0..self.size)
            .filter(|&e| cost[e] == best && pred(e))
            .map(|e| build_witness(e, &via))
            .min_by_key(Tree::preorder)
    }

    /// Minimal witness sizes and the last step of each witness.
    ///
    /// Elements are settled in order of their witness size; every argument
    /// tuple is inspected once, when its last element is settled. Ties go to
    /// the smaller root letter, then to children settled earlier.
    fn settle(&self) -> (Vec<usize>, Vec<Option<(usize, Vec<usize>)>>) {
        type Key = (usize, usize, Vec<usize>);
        let m = self.size;
        let mut cost: Vec<usize> = vec![usize::MAX; m];
        let mut key: Vec<Option<Key>> = vec![None; m];
        let mut via: Vec<Option<(usize, Vec<usize>)>> = vec![None; m];
        let mut rank: Vec<usize> = vec![usize::MAX; m];
        let mut order: Vec<usize> = Vec::new();
        let mut heap: BinaryHeap<Reverse<(Key, usize)>> = BinaryHeap::new();

        let offer = |e: usize,
                     step: (usize, Vec<usize>),
                     cost: &mut Vec<usize>,
                     rank: &[usize],
                     key: &mut Vec<Option<Key>>,
                     via: &mut Vec<Option<(usize, Vec<usize>)>>,
                     heap: &mut BinaryHeap<Reverse<(Key, usize)>>| {
            let c = 1 + step.1.iter().map(|&x| cost[x]).sum::<usize>();
            let k: Key = (c, step.0, step.1.iter().map(|&x| rank[x]).collect());
            if key[e].as_ref().is_none_or(|old| k < *old) {
                cost[e] = c;
                key[e] = Some(k.clone());
                via[e] = Some(step);
                heap.push(Reverse((k, e)));
            }
        };

        for a in self.alphabet.constants() {
            let e = self.apply(a, &[]);
            offer(e, (a, Vec::new()), &mut cost, &rank, &mut key, &mut via, &mut heap);
        }
        while let Some(Reverse((k, e))) = heap.pop() {
            if rank[e] != usize::MAX || key[e].as_ref() != Some(&k) {
                continue;
            }
            rank[e] = order.len();
            order.push(e);
            let before: Vec<usize> = order[..order.len() - 1].to_vec();
            for a in 0..self.alphabet.len() {
                let k = self.alphabet.arity(a);
                for first in 0..k {
                    // positions before `first` avoid `e`; `first` holds `e`
                    let mut partial: Vec<Vec<usize>> = vec![Vec::new()];
                    for pos in 0..k {
                        let pool: &[usize] = if pos < first {
                            &before
                        } else if pos == first {
                            std::slice::from_ref(&e)
                        } else {
                            &order
                        };
                        let mut next = Vec::with_capacity(partial.len() * pool.len());
                        for p in &partial {
                            for &x in pool {
                                let mut q = p.clone();
                                q.push(x);
                                next.push(q);
                            }
                        }
                        partial = next;
                    }
                    for args in partial {
                        let r = self.apply(a, &args);
                        if rank[r] != usize::MAX {
                            continue;
                        }
                        offer(r, (a, args), &mut cost, &rank, &mut key, &mut via, &mut heap);
                    }
                }
            }
        }
        (cost, via)
    }
}

fn build_witness(e: usize, via: &[Option<(usize, Vec<usize>)>]) -> Tree {
    let (a, args) = via[e].as_ref().expect("settled element has a witness");
    Tree::node(*a, args.iter().map(|&x| build_witness(x, via)).collect())
}

/// Builds the algebra of all values reachable from the constants under
/// `step`, numbering values in discovery order. `step(letter, args)`
/// computes the value of `letter` applied to child values.
///
/// Fails with [`Error::CapExceeded`] once more than `cap` values appear.
pub fn explore<T, F>(
    alphabet: &RankedAlphabet,
    cap: usize,
    what: &'static str,
    mut step: F,
) -> Result<(FiniteAlgebra, Vec<T>)>
where
    T: Clone + Eq + Hash,
    F: FnMut(usize, &[&T]) -> Result<T>,
{
    let mut values: Vec<T> = Vec::new();
    let mut index: HashMap<T, usize> = HashMap::new();
    let mut entries: Vec<(usize, Vec<usize>, usize)> = Vec::new();

    let mut intern = |v: T, values: &mut Vec<T>| -> Result<usize> {
        if let Some(&i) = index.get(&v) {
            return Ok(i);
        }
        if values.len() >= cap {
            return Err(Error::CapExceeded { what, limit: cap });
        }
        index.insert(v.clone(), values.len());
        values.push(v);
        Ok(values.len() - 1)
    };

    for a in alphabet.constants() {
        let v = step(a, &[])?;
        let i = intern(v, &mut values)?;
        entries.push((a, Vec::new(), i));
    }
    let mut next = 0;
    while next < values.len() {
        let e = next;
        next += 1;
        for a in 0..alphabet.len() {
            let k = alphabet.arity(a);
            for first in 0..k {
                let mut partial: Vec<Vec<usize>> = vec![Vec::new()];
                for pos in 0..k {
                    let range = if pos < first {
                        0..e
                    } else if pos == first {
                        e..e + 1
                    } else {
                        0..e + 1
                    };
                    let mut grown = Vec::with_capacity(partial.len() * range.len());
                    for p in &partial {
                        for x in range.clone() {
                            let mut q = p.clone();
                            q.push(x);
                            grown.push(q);
                        }
                    }
                    partial = grown;
                }
                for args in partial {
                    let v = {
                        let refs: Vec<&T> = args.iter().map(|&x| &values[x]).collect();
                        step(a, &refs)?
                    };
                    let r = intern(v, &mut values)?;
                    entries.push((a, args, r));
                }
            }
        }
    }

    let m = values.len();
    let mut tables: Vec<Vec<usize>> = (0..alphabet.len())
        .map(|a| vec![usize::MAX; m.pow(alphabet.arity(a) as u32)])
        .collect();
    for (a, args, r) in entries {
        tables[a][tuple_index(m, &args)] = r;
    }
    debug_assert!(tables.iter().all(|t| t.iter().all(|&r| r < m)));
    Ok((FiniteAlgebra::new(alphabet.clone(), m, tables)?, values))
}

/// A deterministic bottom-up tree automaton.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dbta {
    algebra: FiniteAlgebra,
    accepting: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOp {
    Union,
    Intersection,
    Difference,
    SymmetricDifference,
}

impl BoolOp {
    pub fn apply(self, x: bool, y: bool) -> bool {
        match self {
            BoolOp::Union => x || y,
            BoolOp::Intersection => x && y,
            BoolOp::Difference => x && !y,
            BoolOp::SymmetricDifference => x != y,
        }
    }
}

impl Dbta {
    pub fn new(algebra: FiniteAlgebra, accepting: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut acc = vec![false; algebra.size()];
        for e in accepting {
            if e >= algebra.size() {
                return Err(Error::invalid(format!(
                    "accepting element {e} outside a carrier of size {}",
                    algebra.size()
                )));
            }
            acc[e] = true;
        }
        Ok(Dbta {
            algebra,
            accepting: acc,
        })
    }

    pub fn from_mask(algebra: FiniteAlgebra, accepting: Vec<bool>) -> Result<Self> {
        if accepting.len() != algebra.size() {
            return Err(Error::invalid("accepting mask length differs from carrier size"));
        }
        Ok(Dbta { algebra, accepting })
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        self.algebra.alphabet()
    }

    pub fn is_accepting(&self, e: usize) -> bool {
        self.accepting[e]
    }

    pub fn accepting_mask(&self) -> &[bool] {
        &self.accepting
    }

    pub fn accepting(&self) -> Vec<usize> {
        (0..self.accepting.len()).filter(|&e| self.accepting[e]).collect()
    }

    pub fn evaluate(&self, tree: &Tree) -> Result<usize> {
        self.algebra.evaluate(tree)
    }

    pub fn accepts(&self, tree: &Tree) -> Result<bool> {
        Ok(self.accepting[self.algebra.evaluate(tree)?])
    }

    pub fn complement(&self) -> Dbta {
        Dbta {
            algebra: self.algebra.clone(),
            accepting: self.accepting.iter().map(|b| !b).collect(),
        }
    }

    fn same_alphabet(&self, other: &Dbta) -> Result<()> {
        if self.alphabet() != other.alphabet() {
            return Err(Error::mismatch("automata over different alphabets"));
        }
        Ok(())
    }

    /// The product automaton over the full carrier `m1 * m2`; pair `(x, y)`
    /// is element `x * m2 + y`.
    pub fn boolean_combine(op: BoolOp, d1: &Dbta, d2: &Dbta) -> Result<Dbta> {
        d1.same_alphabet(d2)?;
        let m2 = d2.algebra.size();
        let algebra = FiniteAlgebra::from_fn(d1.alphabet().clone(), d1.algebra.size() * m2, |a, args| {
            let xs: Vec<usize> = args.iter().map(|&p| p / m2).collect();
            let ys: Vec<usize> = args.iter().map(|&p| p % m2).collect();
            d1.algebra.apply(a, &xs) * m2 + d2.algebra.apply(a, &ys)
        })?;
        let accepting = (0..algebra.size())
            .map(|p| op.apply(d1.accepting[p / m2], d2.accepting[p % m2]))
            .collect();
        Dbta::from_mask(algebra, accepting)
    }

    /// Reachable part of the product of `d1` and `d2` with acceptance by
    /// `op`. Cheaper than [`Dbta::boolean_combine`] when carriers are big.
    pub fn product_reachable(op: BoolOp, d1: &Dbta, d2: &Dbta, cap: usize) -> Result<Dbta> {
        d1.same_alphabet(d2)?;
        let (algebra, pairs) = explore(d1.alphabet(), cap, "product carrier", |a, args: &[&(usize, usize)]| {
            let xs: Vec<usize> = args.iter().map(|p| p.0).collect();
            let ys: Vec<usize> = args.iter().map(|p| p.1).collect();
            Ok((d1.algebra.apply(a, &xs), d2.algebra.apply(a, &ys)))
        })?;
        let accepting = pairs
            .iter()
            .map(|&(x, y)| op.apply(d1.accepting[x], d2.accepting[y]))
            .collect();
        Dbta::from_mask(algebra, accepting)
    }

    /// A minimal accepted tree, or `None` for the empty language.
    pub fn witness(&self) -> Option<Tree> {
        self.algebra.find_witness(|e| self.accepting[e])
    }

    pub fn is_empty(&self) -> bool {
        self.witness().is_none()
    }

    /// `None` when both automata accept the same trees, otherwise a
    /// smallest tree accepted by exactly one of them.
    pub fn difference_witness(&self, other: &Dbta) -> Result<Option<Tree>> {
        let cap = self.algebra.size().saturating_mul(other.algebra.size()).max(1);
        let x = Dbta::product_reachable(BoolOp::SymmetricDifference, self, other, cap)?;
        Ok(x.witness())
    }

    pub fn are_equivalent(&self, other: &Dbta) -> Result<bool> {
        Ok(self.difference_witness(other)?.is_none())
    }

    /// `None` when every tree accepted by `self` is accepted by `other`,
    /// otherwise a smallest counterexample.
    pub fn inclusion_witness(&self, other: &Dbta) -> Result<Option<Tree>> {
        let cap = self.algebra.size().saturating_mul(other.algebra.size()).max(1);
        Ok(Dbta::product_reachable(BoolOp::Difference, self, other, cap)?.witness())
    }

    pub fn is_subset_of(&self, other: &Dbta) -> Result<bool> {
        Ok(self.inclusion_witness(other)?.is_none())
    }

    /// The reachable elements and the automaton restricted to them.
    pub fn reachable(&self) -> (Vec<usize>, Dbta) {
        let elems = self.algebra.reachable();
        let algebra = self
            .algebra
            .restrict(&elems)
            .expect("reachable elements are closed");
        let accepting = elems.iter().map(|&e| self.accepting[e]).collect();
        (elems, Dbta { algebra, accepting })
    }

    /// Inverse image under a tree homomorphism into this automaton's
    /// alphabet: letter `a` acts as its image term evaluated here.
    pub fn preimage(&self, hom: &crate::trees::TreeHom) -> Result<Dbta> {
        if hom.target() != self.alphabet() {
            return Err(Error::mismatch("homomorphism target differs from automaton alphabet"));
        }
        let algebra = FiniteAlgebra::from_fn(hom.source().clone(), self.algebra.size(), |a, args| {
            self.algebra.eval_term(hom.image(a), args)
        })?;
        Dbta::from_mask(algebra, self.accepting.clone())
    }
}
