//! Deterministic top-down transducers and matrix powers.

use std::collections::BTreeSet;

use crate::automata::{explore, Dbta, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::paths::Dtta;
use crate::trees::{RankedAlphabet, Term, Tree, TreeHom};

/// A deterministic top-down tree transducer. `rules[a][q]` is the output
/// for a node labelled `a` read in state `q`; variable `(p, i)` stands for
/// the output of state `p` on child `i` (both 0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dtop {
    input: RankedAlphabet,
    output: RankedAlphabet,
    num_states: usize,
    initial: usize,
    rules: Vec<Vec<Term<(usize, usize)>>>,
}

impl Dtop {
    pub fn new(
        input: RankedAlphabet,
        output: RankedAlphabet,
        num_states: usize,
        initial: usize,
        rules: Vec<Vec<Term<(usize, usize)>>>,
    ) -> Result<Self> {
        if num_states == 0 || initial >= num_states {
            return Err(Error::invalid("transducer needs a valid initial state"));
        }
        if rules.len() != input.len() {
            return Err(Error::invalid("one rule row per input letter expected"));
        }
        for (a, row) in rules.iter().enumerate() {
            if row.len() != num_states {
                return Err(Error::invalid(format!("letter {}: one rule per state expected", input.name(a))));
            }
            for term in row {
                term.check(&output)?;
                for &(p, i) in term.vars() {
                    if p >= num_states || i >= input.arity(a) {
                        return Err(Error::invalid(format!(
                            "letter {}: variable q{}.x{} out of range",
                            input.name(a),
                            p,
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(Dtop {
            input,
            output,
            num_states,
            initial,
            rules,
        })
    }

    /// The one-state transducer computing a tree homomorphism.
    pub fn from_hom(hom: &TreeHom) -> Self {
        let rules = (0..hom.source().len())
            .map(|a| vec![hom.image(a).map_vars(&|&i| (0, i))])
            .collect();
        Dtop::new(hom.source().clone(), hom.target().clone(), 1, 0, rules).expect("homomorphism images are valid")
    }

    pub fn identity(alphabet: &RankedAlphabet) -> Self {
        Self::from_hom(&TreeHom::identity(alphabet))
    }

    pub fn input(&self) -> &RankedAlphabet {
        &self.input
    }

    pub fn output(&self) -> &RankedAlphabet {
        &self.output
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn rule(&self, letter: usize, state: usize) -> &Term<(usize, usize)> {
        &self.rules[letter][state]
    }

    pub fn with_initial(&self, initial: usize) -> Result<Self> {
        if initial >= self.num_states {
            return Err(Error::invalid(format!("no state {}", initial + 1)));
        }
        Ok(Dtop {
            initial,
            ..self.clone()
        })
    }

    pub fn apply(&self, tree: &Tree) -> Result<Tree> {
        self.input.check_tree(tree)?;
        Ok(self.run(self.initial, tree))
    }

    /// Output of state `q` on `tree`.
    pub fn run(&self, q: usize, tree: &Tree) -> Tree {
        self.rules[tree.label][q].ground(&|&(p, i)| self.run(p, &tree.children[i]))
    }

    /// Renders a rule with variables written `qP.xI`: state `P`, child `I`
    /// counted from 1.
    pub fn render_rule(&self, letter: usize, state: usize) -> String {
        self.rules[letter][state].render(&self.output, &|&(p, i)| format!("q{p}.x{}", i + 1))
    }
}

/// Trees whose transducer output lies in `dbta`'s language. The value of a
/// tree is the map `q ↦ value of f_q(t)`; only reachable maps are built.
pub fn dtop_preimage(dbta: &Dbta, dtop: &Dtop, cap: usize) -> Result<Dbta> {
    if dbta.alphabet() != dtop.output() {
        return Err(Error::mismatch("automaton alphabet differs from transducer output"));
    }
    let alg = dbta.algebra();
    let (algebra, maps) = explore(dtop.input(), cap, "state-map carrier", |a, args: &[&Vec<usize>]| {
        Ok((0..dtop.num_states)
            .map(|q| {
                dtop.rules[a][q].eval(&|&(p, i): &(usize, usize)| args[i][p], &|l, xs: &[usize]| alg.apply(l, xs))
            })
            .collect::<Vec<usize>>())
    })?;
    let accepting = maps.iter().map(|m| dbta.is_accepting(m[dtop.initial])).collect();
    Dbta::from_mask(algebra, accepting)
}

/// A term over an algebra's letters with variables and element constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PolyTerm {
    Var(usize),
    Const(usize),
    App(usize, Vec<PolyTerm>),
}

impl PolyTerm {
    pub fn check(&self, algebra: &FiniteAlgebra, num_vars: usize) -> Result<()> {
        match self {
            PolyTerm::Var(v) if *v >= num_vars => {
                Err(Error::ArityMismatch(format!("variable x{} with only {num_vars} arguments", v + 1)))
            }
            PolyTerm::Const(e) if *e >= algebra.size() => {
                Err(Error::invalid(format!("constant #{e} outside a carrier of size {}", algebra.size())))
            }
            PolyTerm::App(l, args) => {
                let sig = algebra.alphabet();
                if *l >= sig.len() {
                    return Err(Error::invalid(format!("letter index {l} out of range")));
                }
                if sig.arity(*l) != args.len() {
                    return Err(Error::ArityMismatch(format!(
                        "{} expects {}, got {}",
                        sig.name(*l),
                        sig.arity(*l),
                        args.len()
                    )));
                }
                args.iter().try_for_each(|t| t.check(algebra, num_vars))
            }
            _ => Ok(()),
        }
    }

    fn eval_unchecked(&self, algebra: &FiniteAlgebra, args: &[usize]) -> usize {
        match self {
            PolyTerm::Var(v) => args[*v],
            PolyTerm::Const(e) => *e,
            PolyTerm::App(l, ts) => {
                let xs: Vec<usize> = ts.iter().map(|t| t.eval_unchecked(algebra, args)).collect();
                algebra.apply(*l, &xs)
            }
        }
    }

    /// Written with `xI` for variable `I-1` and `#E` for element `E`.
    pub fn render(&self, alphabet: &RankedAlphabet) -> String {
        match self {
            PolyTerm::Var(v) => format!("x{}", v + 1),
            PolyTerm::Const(e) => format!("#{e}"),
            PolyTerm::App(l, ts) if ts.is_empty() => alphabet.name(*l).to_string(),
            PolyTerm::App(l, ts) => {
                let inner: Vec<String> = ts.iter().map(|t| t.render(alphabet)).collect();
                format!("{}({})", alphabet.name(*l), inner.join(","))
            }
        }
    }

    fn vars_into(&self, out: &mut BTreeSet<usize>) {
        match self {
            PolyTerm::Var(v) => {
                out.insert(*v);
            }
            PolyTerm::Const(_) => {}
            PolyTerm::App(_, ts) => ts.iter().for_each(|t| t.vars_into(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.vars_into(&mut out);
        out
    }
}

pub fn eval_polyterm(algebra: &FiniteAlgebra, pt: &PolyTerm, args: &[usize]) -> Result<usize> {
    pt.check(algebra, args.len())?;
    if args.iter().any(|&a| a >= algebra.size()) {
        return Err(Error::invalid("argument outside the carrier"));
    }
    Ok(pt.eval_unchecked(algebra, args))
}

/// A homomorphism from trees into the `width`-th matrix power of `base`.
/// For a letter of arity `k`, coordinate `q` is a polynomial in `width * k`
/// variables; variable `width * j + p` is coordinate `p` of child `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixHom {
    base: FiniteAlgebra,
    input: RankedAlphabet,
    width: usize,
    ops: Vec<Vec<PolyTerm>>,
}

impl MatrixHom {
    pub fn new(base: FiniteAlgebra, input: RankedAlphabet, width: usize, ops: Vec<Vec<PolyTerm>>) -> Result<Self> {
        if width == 0 {
            return Err(Error::invalid("width must be positive"));
        }
        if ops.len() != input.len() {
            return Err(Error::invalid("one operation tuple per input letter expected"));
        }
        for (a, tuple) in ops.iter().enumerate() {
            if tuple.len() != width {
                return Err(Error::invalid(format!(
                    "letter {}: expected {width} coordinates, got {}",
                    input.name(a),
                    tuple.len()
                )));
            }
            for pt in tuple {
                pt.check(&base, width * input.arity(a))?;
            }
        }
        Ok(MatrixHom {
            base,
            input,
            width,
            ops,
        })
    }

    pub fn base(&self) -> &FiniteAlgebra {
        &self.base
    }

    pub fn input(&self) -> &RankedAlphabet {
        &self.input
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn op(&self, letter: usize, coord: usize) -> &PolyTerm {
        &self.ops[letter][coord]
    }

    /// The tuple for `letter` applied to child tuples.
    pub fn apply(&self, letter: usize, children: &[&[usize]]) -> Vec<usize> {
        let flat: Vec<usize> = children.iter().flat_map(|c| c.iter().copied()).collect();
        self.ops[letter].iter().map(|pt| pt.eval_unchecked(&self.base, &flat)).collect()
    }

    pub fn eval(&self, tree: &Tree) -> Result<Vec<usize>> {
        self.input.check_tree(tree)?;
        Ok(tree.fold(&mut |a, kids: Vec<Vec<usize>>| {
            let refs: Vec<&[usize]> = kids.iter().map(Vec::as_slice).collect();
            self.apply(a, &refs)
        }))
    }
}

/// Replaces each output letter by its operation in `g` and each variable
/// `(p, j)` by `width * j + p`.
pub fn dtop_to_matrix_hom(dtop: &Dtop, g: &FiniteAlgebra) -> Result<MatrixHom> {
    if g.alphabet() != dtop.output() {
        return Err(Error::mismatch("algebra alphabet differs from transducer output"));
    }
    let n = dtop.num_states;
    let ops = dtop
        .rules
        .iter()
        .map(|row| row.iter().map(|t| to_polyterm(t, n)).collect())
        .collect();
    MatrixHom::new(g.clone(), dtop.input.clone(), n, ops)
}

fn to_polyterm(t: &Term<(usize, usize)>, n: usize) -> PolyTerm {
    match t {
        Term::Var((p, j)) => PolyTerm::Var(n * j + p),
        Term::App(l, ts) => PolyTerm::App(*l, ts.iter().map(|s| to_polyterm(s, n)).collect()),
    }
}

/// Name of the constant letter added for element `e`.
pub fn element_constant_name(e: usize) -> String {
    format!("#{e}")
}

/// The base algebra with one constant letter per element appended, named
/// by [`element_constant_name`].
pub fn with_element_constants(base: &FiniteAlgebra) -> Result<FiniteAlgebra> {
    let sig = base.alphabet();
    let mut letters: Vec<(String, usize)> = sig.letters().iter().map(|l| (l.name.clone(), l.arity)).collect();
    let first_const = letters.len();
    letters.extend((0..base.size()).map(|e| (element_constant_name(e), 0)));
    let extended = RankedAlphabet::new(letters)?;
    let alg = FiniteAlgebra::from_fn(extended, base.size(), |a, args| {
        if a < first_const {
            base.apply(a, args)
        } else {
            a - first_const
        }
    })?;
    match base.names() {
        Some(names) => alg.with_names(names.to_vec()),
        None => Ok(alg),
    }
}

/// One transducer with states `0..width` over the base algebra extended by
/// element constants, together with that extended algebra. Started in state
/// `i`, its output evaluates to coordinate `i` of the matrix homomorphism.
pub fn matrix_hom_to_dtops(mh: &MatrixHom) -> Result<(Dtop, FiniteAlgebra)> {
    let ext = with_element_constants(&mh.base)?;
    let first_const = mh.base.alphabet().len();
    let n = mh.width;
    let rules = mh
        .ops
        .iter()
        .map(|tuple| tuple.iter().map(|pt| from_polyterm(pt, n, first_const)).collect())
        .collect();
    let dtop = Dtop::new(mh.input.clone(), ext.alphabet().clone(), n, 0, rules)?;
    Ok((dtop, ext))
}

fn from_polyterm(pt: &PolyTerm, n: usize, first_const: usize) -> Term<(usize, usize)> {
    match pt {
        PolyTerm::Var(v) => Term::Var((v % n, v / n)),
        PolyTerm::Const(e) => Term::constant(first_const + e),
        PolyTerm::App(l, ts) => Term::App(*l, ts.iter().map(|t| from_polyterm(t, n, first_const)).collect()),
    }
}

/// The language `{t : accepting(h(t))}` as an ordinary automaton over the
/// reachable tuples.
pub fn matrix_power_language(mh: &MatrixHom, accepting: impl Fn(&[usize]) -> bool, cap: usize) -> Result<Dbta> {
    let (algebra, values) = explore(&mh.input, cap, "matrix power carrier", |a, args: &[&Vec<usize>]| {
        let refs: Vec<&[usize]> = args.iter().map(|v| v.as_slice()).collect();
        Ok(mh.apply(a, &refs))
    })?;
    let mask = values.iter().map(|v| accepting(v)).collect();
    Dbta::from_mask(algebra, mask)
}

/// The two-element semilattice `({0,1}, and)`.
pub fn semilattice() -> FiniteAlgebra {
    let sig = RankedAlphabet::signature([("and", 2)]).expect("static alphabet");
    FiniteAlgebra::from_fn(sig, 2, |_, args| args[0] & args[1]).expect("static table")
}

/// Conjunction of polynomials over [`semilattice`]; `1` when empty.
pub fn conjunction(mut terms: Vec<PolyTerm>) -> PolyTerm {
    match terms.len() {
        0 => PolyTerm::Const(1),
        1 => terms.pop().expect("one term"),
        _ => {
            let last = terms.pop().expect("nonempty");
            PolyTerm::App(0, vec![conjunction(terms), last])
        }
    }
}

/// The semilattice matrix power of a Dtta: coordinate `q` is 1 exactly when
/// the tree is accepted from state `q`.
pub fn dtta_to_matrix_hom(dtta: &Dtta) -> MatrixHom {
    let n = dtta.num_states();
    let sig = dtta.alphabet();
    let ops = (0..sig.len())
        .map(|a| {
            (0..n)
                .map(|q| {
                    if sig.arity(a) == 0 {
                        PolyTerm::Const(usize::from(dtta.leaf_accepts(q, a)))
                    } else {
                        let vars = dtta
                            .successors(q, a)
                            .iter()
                            .enumerate()
                            .map(|(j, &p)| PolyTerm::Var(n * j + p))
                            .collect();
                        conjunction(vars)
                    }
                })
                .collect()
        })
        .collect();
    MatrixHom::new(semilattice(), sig.clone(), n, ops).expect("consistent by construction")
}
