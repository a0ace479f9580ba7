//! Nesting, wreath products and CTL compiled to semilattice cascades.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;

use crate::automata::{explore, Dbta, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::trees::{RankedAlphabet, Tree};

/// Labels `0..2^bits` written as bit strings, bit `j` at position `j`.
pub fn mask_labels(bits: usize) -> Vec<String> {
    (0..1usize << bits)
        .map(|m| (0..bits).map(|j| if m >> j & 1 == 1 { '1' } else { '0' }).collect())
        .collect()
}

/// `Σ × 2^bits`; letter `a` with mask `m` has index `a * 2^bits + m` and
/// name like `f2[0110]`.
pub fn annotated_alphabet(base: &RankedAlphabet, bits: usize) -> RankedAlphabet {
    base.labelled(&mask_labels(bits))
}

/// `Σ × B` for a carrier of size `n`; letter `a` with value `b` has index
/// `a * n + b`.
pub fn value_alphabet(base: &RankedAlphabet, n: usize) -> RankedAlphabet {
    let labels: Vec<String> = (0..n).map(|b| b.to_string()).collect();
    base.labelled(&labels)
}

/// Extends each node's label with membership bits of its own subtree.
pub fn annotate(tree: &Tree, langs: &[Dbta]) -> Result<Tree> {
    let Some(first) = langs.first() else {
        return Ok(tree.clone());
    };
    if langs.iter().any(|d| d.alphabet() != first.alphabet()) {
        return Err(Error::mismatch("annotating languages use different alphabets"));
    }
    first.alphabet().check_tree(tree)?;
    let n = langs.len();
    let (t, _) = annotate_rec(tree, langs, n);
    Ok(t)
}

fn annotate_rec(tree: &Tree, langs: &[Dbta], n: usize) -> (Tree, Vec<usize>) {
    let (kids, values): (Vec<Tree>, Vec<Vec<usize>>) =
        tree.children.iter().map(|c| annotate_rec(c, langs, n)).unzip();
    let vals: Vec<usize> = langs
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let args: Vec<usize> = values.iter().map(|v| v[j]).collect();
            d.algebra().apply(tree.label, &args)
        })
        .collect();
    let mask = vals
        .iter()
        .enumerate()
        .fold(0, |m, (j, &v)| m | (usize::from(langs[j].is_accepting(v)) << j));
    (Tree::node(tree.label * (1 << n) + mask, kids), vals)
}

/// The trees whose annotation by `langs` is accepted by `top`.
pub fn nest(base: &RankedAlphabet, langs: &[Dbta], top: &Dbta, cap: usize) -> Result<Dbta> {
    let n = langs.len();
    if langs.iter().any(|d| d.alphabet() != base) {
        return Err(Error::mismatch("inner language over a different alphabet"));
    }
    if top.alphabet() != &annotated_alphabet(base, n) {
        return Err(Error::mismatch(format!("top language must be over the alphabet annotated with {n} bits")));
    }
    let (algebra, values) = explore(base, cap, "nested carrier", |a, args: &[&(Vec<usize>, usize)]| {
        let inner: Vec<usize> = (0..n)
            .map(|j| {
                let xs: Vec<usize> = args.iter().map(|v| v.0[j]).collect();
                langs[j].algebra().apply(a, &xs)
            })
            .collect();
        let mask = inner
            .iter()
            .enumerate()
            .fold(0, |m, (j, &v)| m | (usize::from(langs[j].is_accepting(v)) << j));
        let tops: Vec<usize> = args.iter().map(|v| v.1).collect();
        let t = top.algebra().apply(a * (1 << n) + mask, &tops);
        Ok((inner, t))
    })?;
    let mask = values.iter().map(|v| top.is_accepting(v.1)).collect();
    Dbta::from_mask(algebra, mask)
}

/// Relabels every node with the value of its subtree under `h`.
pub fn label_with_values(tree: &Tree, h: &FiniteAlgebra) -> Tree {
    fn go(tree: &Tree, h: &FiniteAlgebra) -> (Tree, usize) {
        let (kids, vals): (Vec<Tree>, Vec<usize>) = tree.children.iter().map(|c| go(c, h)).unzip();
        let v = h.apply(tree.label, &vals);
        (Tree::node(tree.label * h.size() + v, kids), v)
    }
    go(tree, h).0
}

/// Sequential composition: `h` over `Σ` into `B`, `g` over `Σ × B` into `A`.
/// The result over `Σ` has carrier `A × B`, pair `(x, y)` at index
/// `x * |B| + y`, and maps `t` to `(g(t^h), h(t))`.
pub fn sequential_compose(h: &FiniteAlgebra, g: &FiniteAlgebra) -> Result<FiniteAlgebra> {
    let nb = h.size();
    if g.alphabet() != &value_alphabet(h.alphabet(), nb) {
        return Err(Error::mismatch("second algebra must read letters paired with values of the first"));
    }
    FiniteAlgebra::from_fn(h.alphabet().clone(), g.size() * nb, |a, args| {
        let ys: Vec<usize> = args.iter().map(|&p| p % nb).collect();
        let xs: Vec<usize> = args.iter().map(|&p| p / nb).collect();
        let y = h.apply(a, &ys);
        g.apply(a * nb + y, &xs) * nb + y
    })
}

/// Either constant zero, or the conjunction of some inputs (constant one
/// when the set is empty).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SemiPoly {
    Zero,
    And(BTreeSet<usize>),
}

impl SemiPoly {
    pub fn one() -> Self {
        SemiPoly::And(BTreeSet::new())
    }

    pub fn constant(b: bool) -> Self {
        if b {
            Self::one()
        } else {
            SemiPoly::Zero
        }
    }

    pub fn eval(&self, inputs: impl Fn(usize) -> bool) -> bool {
        match self {
            SemiPoly::Zero => false,
            SemiPoly::And(s) => s.iter().all(|&i| inputs(i)),
        }
    }

    pub fn render(&self) -> String {
        match self {
            SemiPoly::Zero => "0".into(),
            SemiPoly::And(s) if s.is_empty() => "1".into(),
            SemiPoly::And(s) => s.iter().map(|i| format!("x{}", i + 1)).collect::<Vec<_>>().join("&"),
        }
    }
}

/// `X until Y`: some node has a label in `Y` and, for each proper ancestor
/// labelled `b` whose `i`-th subtree contains it, `(b, i) ∈ X`. Child
/// indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct UntilSpec {
    pub x: BTreeSet<(usize, usize)>,
    pub y: BTreeSet<usize>,
}

impl UntilSpec {
    pub fn check(&self, alphabet: &RankedAlphabet) -> Result<()> {
        for &(a, i) in &self.x {
            if a >= alphabet.len() || i >= alphabet.arity(a) {
                return Err(Error::invalid(format!("pair ({a},{}) does not respect arities", i + 1)));
            }
        }
        if self.y.iter().any(|&a| a >= alphabet.len()) {
            return Err(Error::invalid("until target letter out of range"));
        }
        Ok(())
    }

    /// Letter table of the complement as a semilattice polynomial in the
    /// children's values.
    pub fn complement_poly(&self, alphabet: &RankedAlphabet, letter: usize) -> SemiPoly {
        if self.y.contains(&letter) {
            SemiPoly::Zero
        } else {
            SemiPoly::And((0..alphabet.arity(letter)).filter(|&i| self.x.contains(&(letter, i))).collect())
        }
    }

    /// Direct witness search.
    pub fn holds(&self, tree: &Tree) -> bool {
        self.y.contains(&tree.label)
            || tree
                .children
                .iter()
                .enumerate()
                .any(|(i, c)| self.x.contains(&(tree.label, i)) && self.holds(c))
    }
}

/// The until language and, per letter, its complement's semilattice
/// polynomial.
#[derive(Debug, Clone)]
pub struct UntilLanguage {
    pub dbta: Dbta,
    pub complement: Vec<SemiPoly>,
}

/// Element 1 means "no witness": the algebra is the complement's
/// semilattice homomorphism, and acceptance is element 0.
pub fn until_language(alphabet: &RankedAlphabet, spec: &UntilSpec) -> Result<UntilLanguage> {
    spec.check(alphabet)?;
    let complement: Vec<SemiPoly> = (0..alphabet.len()).map(|a| spec.complement_poly(alphabet, a)).collect();
    let alg = FiniteAlgebra::from_fn(alphabet.clone(), 2, |a, args| {
        usize::from(complement[a].eval(|i| args[i] == 1))
    })?;
    Ok(UntilLanguage {
        dbta: Dbta::new(alg, [0])?,
        complement,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CtlFormula {
    Letter(usize),
    Not(Box<CtlFormula>),
    And(Box<CtlFormula>, Box<CtlFormula>),
    Or(Box<CtlFormula>, Box<CtlFormula>),
    /// 0-based child index.
    Next(usize, Box<CtlFormula>),
    EU(Box<CtlFormula>, Box<CtlFormula>),
    DirUntil(UntilSpec),
}

impl CtlFormula {
    pub fn has_next(&self) -> bool {
        match self {
            CtlFormula::Letter(_) | CtlFormula::DirUntil(_) => false,
            CtlFormula::Next(..) => true,
            CtlFormula::Not(f) => f.has_next(),
            CtlFormula::And(f, g) | CtlFormula::Or(f, g) | CtlFormula::EU(f, g) => f.has_next() || g.has_next(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            CtlFormula::Letter(_) | CtlFormula::DirUntil(_) => 1,
            CtlFormula::Not(f) | CtlFormula::Next(_, f) => 1 + f.depth(),
            CtlFormula::And(f, g) | CtlFormula::Or(f, g) | CtlFormula::EU(f, g) => 1 + f.depth().max(g.depth()),
        }
    }

    pub fn render(&self, alphabet: &RankedAlphabet) -> String {
        let wrap = |f: &CtlFormula| match f {
            CtlFormula::And(..) | CtlFormula::Or(..) => format!("({})", f.render(alphabet)),
            _ => f.render(alphabet),
        };
        match self {
            CtlFormula::Letter(a) => format!("lbl({})", alphabet.name(*a)),
            CtlFormula::Not(f) => format!("!{}", wrap(f)),
            CtlFormula::And(f, g) => format!("{} & {}", wrap(f), wrap(g)),
            CtlFormula::Or(f, g) => {
                let left = match **f {
                    CtlFormula::Or(..) => f.render(alphabet),
                    _ => wrap(f),
                };
                format!("{left} | {}", wrap(g))
            }
            CtlFormula::Next(i, f) => format!("X{} {}", i + 1, wrap(f)),
            CtlFormula::EU(f, g) => format!("E[{} U {}]", f.render(alphabet), g.render(alphabet)),
            CtlFormula::DirUntil(s) => {
                let xs: Vec<String> = s.x.iter().map(|&(a, i)| format!("{}.{}", alphabet.name(a), i + 1)).collect();
                let ys: Vec<String> = s.y.iter().map(|&a| alphabet.name(a).to_string()).collect();
                format!("DU[{} ; {}]", xs.join(", "), ys.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Sym(char),
}

fn tokenize(text: &str) -> Vec<(usize, Tok)> {
    const SYMS: &str = "()[];,!&|";
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if SYMS.contains(c) {
            out.push((pos, Tok::Sym(c)));
            chars.next();
        } else {
            let mut word = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_whitespace() || SYMS.contains(c) {
                    break;
                }
                word.push(c);
                chars.next();
            }
            out.push((pos, Tok::Word(word)));
        }
    }
    out
}

struct CtlParser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    alphabet: &'a RankedAlphabet,
}

impl CtlParser<'_> {
    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.at + k).map(|t| &t.1)
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            Ok(())
        } else {
            Err(Error::parse(self.pos(), format!("expected '{c}'")))
        }
    }

    fn word(&mut self) -> Result<(usize, String)> {
        match self.toks.get(self.at) {
            Some((p, Tok::Word(w))) => {
                let r = (*p, w.clone());
                self.at += 1;
                Ok(r)
            }
            _ => Err(Error::parse(self.pos(), "expected a name")),
        }
    }

    fn letter(&mut self) -> Result<usize> {
        let (p, w) = self.word()?;
        self.alphabet
            .lookup(&w)
            .ok_or_else(|| Error::parse(p, format!("unknown letter {w}")))
    }

    fn or_expr(&mut self) -> Result<CtlFormula> {
        let mut f = self.and_expr()?;
        while self.peek() == Some(&Tok::Sym('|')) {
            self.at += 1;
            let g = self.and_expr()?;
            f = CtlFormula::Or(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    fn and_expr(&mut self) -> Result<CtlFormula> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::Sym('&')) {
            self.at += 1;
            let g = self.unary()?;
            f = CtlFormula::And(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<CtlFormula> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Sym('!')) => {
                self.at += 1;
                Ok(CtlFormula::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let f = self.or_expr()?;
                self.expect_sym(')')?;
                Ok(f)
            }
            Some(Tok::Word(w)) if w == "lbl" => {
                self.at += 1;
                self.expect_sym('(')?;
                let a = self.letter()?;
                self.expect_sym(')')?;
                Ok(CtlFormula::Letter(a))
            }
            Some(Tok::Word(w)) if w == "E" && self.peek_at(1) == Some(&Tok::Sym('[')) => {
                self.at += 2;
                let f = self.or_expr()?;
                match self.peek() {
                    Some(Tok::Word(u)) if u == "U" => self.at += 1,
                    _ => return Err(Error::parse(self.pos(), "expected 'U'")),
                }
                let g = self.or_expr()?;
                self.expect_sym(']')?;
                Ok(CtlFormula::EU(Box::new(f), Box::new(g)))
            }
            Some(Tok::Word(w)) if w == "DU" && self.peek_at(1) == Some(&Tok::Sym('[')) => {
                self.at += 2;
                self.dir_until()
            }
            Some(Tok::Word(w)) if w.len() > 1 && w.starts_with('X') && w[1..].chars().all(|c| c.is_ascii_digit()) => {
                self.at += 1;
                let i: usize = w[1..].parse().map_err(|_| Error::parse(pos, "bad child index"))?;
                if i == 0 || i > self.alphabet.max_arity() {
                    return Err(Error::parse(pos, format!("child index {i} exceeds every arity")));
                }
                Ok(CtlFormula::Next(i - 1, Box::new(self.unary()?)))
            }
            Some(_) => Err(Error::parse(pos, "expected a formula")),
            None => Err(Error::parse(pos, "unexpected end of formula")),
        }
    }

    fn dir_until(&mut self) -> Result<CtlFormula> {
        let mut spec = UntilSpec::default();
        let mut first = true;
        while self.peek() != Some(&Tok::Sym(';')) {
            if !first {
                self.expect_sym(',')?;
            }
            first = false;
            let (p, w) = self.word()?;
            let (name, idx) = w
                .rsplit_once('.')
                .ok_or_else(|| Error::parse(p, format!("expected NAME.INDEX, got {w}")))?;
            let a = self
                .alphabet
                .lookup(name)
                .ok_or_else(|| Error::parse(p, format!("unknown letter {name}")))?;
            let i: usize = idx.parse().map_err(|_| Error::parse(p, format!("bad child index {idx}")))?;
            if i == 0 || i > self.alphabet.arity(a) {
                return Err(Error::parse(p, format!("{name} has no child {i}")));
            }
            spec.x.insert((a, i - 1));
        }
        self.at += 1;
        let mut first = true;
        while self.peek() != Some(&Tok::Sym(']')) {
            if !first {
                self.expect_sym(',')?;
            }
            first = false;
            let a = self.letter()?;
            spec.y.insert(a);
        }
        self.at += 1;
        Ok(CtlFormula::DirUntil(spec))
    }
}

pub fn ctl_parse(text: &str, alphabet: &RankedAlphabet) -> Result<CtlFormula> {
    let mut p = CtlParser {
        toks: tokenize(text),
        at: 0,
        end: text.len(),
        alphabet,
    };
    let f = p.or_expr()?;
    if p.at != p.toks.len() {
        return Err(Error::parse(p.pos(), "trailing input"));
    }
    Ok(f)
}

/// Direct recursive semantics.
pub fn ctl_eval(formula: &CtlFormula, tree: &Tree) -> bool {
    match formula {
        CtlFormula::Letter(a) => tree.label == *a,
        CtlFormula::Not(f) => !ctl_eval(f, tree),
        CtlFormula::And(f, g) => ctl_eval(f, tree) && ctl_eval(g, tree),
        CtlFormula::Or(f, g) => ctl_eval(f, tree) || ctl_eval(g, tree),
        CtlFormula::Next(i, f) => tree.children.get(*i).is_some_and(|c| ctl_eval(f, c)),
        CtlFormula::EU(f, g) => eu_witness(f, g, tree, true),
        CtlFormula::DirUntil(spec) => spec.holds(tree),
    }
}

/// Some node `v` below (or at) `tree` satisfies `g`, and every node
/// strictly between the original root and `v` satisfies `f`.
fn eu_witness(f: &CtlFormula, g: &CtlFormula, tree: &Tree, is_root: bool) -> bool {
    if ctl_eval(g, tree) {
        return true;
    }
    if !is_root && !ctl_eval(f, tree) {
        return false;
    }
    tree.children.iter().any(|c| eu_witness(f, g, c, false))
}

/// A random formula of depth at most `depth`.
pub fn random_formula(alphabet: &RankedAlphabet, depth: usize, allow_next: bool, rng: &mut impl Rng) -> CtlFormula {
    let atom = |rng: &mut dyn rand::RngCore| -> CtlFormula {
        if rng.random_bool(0.75) {
            CtlFormula::Letter(rng.random_range(0..alphabet.len()))
        } else {
            let mut spec = UntilSpec::default();
            for a in 0..alphabet.len() {
                for i in 0..alphabet.arity(a) {
                    if rng.random_bool(0.5) {
                        spec.x.insert((a, i));
                    }
                }
                if rng.random_bool(0.3) {
                    spec.y.insert(a);
                }
            }
            CtlFormula::DirUntil(spec)
        }
    };
    if depth <= 1 || rng.random_bool(0.2) {
        return atom(rng);
    }
    let sub = |rng: &mut _| Box::new(random_formula(alphabet, depth - 1, allow_next, rng));
    let kinds = if allow_next && alphabet.max_arity() > 0 { 5 } else { 4 };
    match rng.random_range(0..kinds) {
        0 => CtlFormula::Not(sub(rng)),
        1 => CtlFormula::And(sub(rng), sub(rng)),
        2 => CtlFormula::Or(sub(rng), sub(rng)),
        3 => CtlFormula::EU(sub(rng), sub(rng)),
        _ => CtlFormula::Next(rng.random_range(0..alphabet.max_arity()), sub(rng)),
    }
}

/// One cascade stage: a homomorphism from trees over the annotated alphabet
/// into the `width`-th matrix power of the semilattice. For a letter of
/// arity `k`, coordinate `q` is a [`SemiPoly`] over `width * k` inputs;
/// input `width * j + p` is coordinate `p` of child `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub alphabet: RankedAlphabet,
    pub width: usize,
    pub ops: Vec<Vec<SemiPoly>>,
}

impl Layer {
    /// Coordinates packed as bits.
    pub fn apply(&self, letter: usize, children: &[usize]) -> usize {
        let w = self.width;
        self.ops[letter]
            .iter()
            .enumerate()
            .fold(0, |acc, (q, p)| {
                let bit = p.eval(|i| children[i / w] >> (i % w) & 1 == 1);
                acc | (usize::from(bit) << q)
            })
    }

    /// The layer as an algebra on `2^width` packed values.
    pub fn algebra(&self) -> Result<FiniteAlgebra> {
        FiniteAlgebra::from_fn(self.alphabet.clone(), 1 << self.width, |a, args| self.apply(a, args))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    Const(bool),
    /// Global coordinate index across all layers.
    Bit(usize),
}

/// Layers over successively annotated alphabets; layer `l` reads the base
/// letter together with every coordinate of the layers before it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cascade {
    base: RankedAlphabet,
    layers: Vec<Layer>,
    output: Readout,
}

impl Cascade {
    pub fn new(base: RankedAlphabet, layers: Vec<Layer>, output: Readout) -> Result<Self> {
        let mut bits = 0;
        for (l, layer) in layers.iter().enumerate() {
            if layer.alphabet != annotated_alphabet(&base, bits) {
                return Err(Error::mismatch(format!("layer {l} is not over the annotated alphabet")));
            }
            if layer.ops.len() != layer.alphabet.len() || layer.ops.iter().any(|t| t.len() != layer.width) {
                return Err(Error::invalid(format!("layer {l}: malformed operation tuples")));
            }
            for (a, tuple) in layer.ops.iter().enumerate() {
                let inputs = layer.width * layer.alphabet.arity(a);
                for p in tuple {
                    if let SemiPoly::And(s) = p {
                        if s.iter().any(|&i| i >= inputs) {
                            return Err(Error::invalid(format!("layer {l}: input index out of range")));
                        }
                    }
                }
            }
            bits += layer.width;
        }
        if let Readout::Bit(b) = output {
            if b >= bits {
                return Err(Error::invalid("output bit out of range"));
            }
        }
        Ok(Cascade { base, layers, output })
    }

    pub fn base(&self) -> &RankedAlphabet {
        &self.base
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn output(&self) -> Readout {
        self.output
    }

    pub fn total_width(&self) -> usize {
        self.layers.iter().map(|l| l.width).sum()
    }

    /// Value at a node given its base letter and its children's packed
    /// coordinate vectors.
    fn step(&self, letter: usize, children: &[usize]) -> usize {
        let mut mask = 0;
        let mut bits = 0;
        for layer in &self.layers {
            let low = (1usize << layer.width) - 1;
            let kids: Vec<usize> = children.iter().map(|&c| c >> bits & low).collect();
            let v = layer.apply(letter * (1 << bits) + mask, &kids);
            mask |= v << bits;
            bits += layer.width;
        }
        mask
    }

    fn read(&self, mask: usize) -> bool {
        match self.output {
            Readout::Const(b) => b,
            Readout::Bit(j) => mask >> j & 1 == 1,
        }
    }

    pub fn accepts(&self, tree: &Tree) -> Result<bool> {
        Ok(self.read(cascade_eval(self, tree)?.iter().enumerate().fold(0, |m, (j, &b)| m | usize::from(b) << j)))
    }
}

/// Root coordinates of all layers, computed one layer at a time on
/// successively annotated trees.
pub fn cascade_eval(cascade: &Cascade, tree: &Tree) -> Result<Vec<bool>> {
    cascade.base.check_tree(tree)?;
    let mut current = tree.clone();
    let mut bits = 0;
    let mut root = Vec::new();
    for layer in &cascade.layers {
        let w = layer.width;
        fn go(t: &Tree, layer: &Layer, bits: usize, w: usize) -> (Tree, usize) {
            let (kids, vals): (Vec<Tree>, Vec<usize>) = t.children.iter().map(|c| go(c, layer, bits, w)).unzip();
            let v = layer.apply(t.label, &vals);
            let (base, mask) = (t.label >> bits, t.label & ((1 << bits) - 1));
            (Tree::node((base << (bits + w)) | (v << bits) | mask, kids), v)
        }
        let (next, v) = go(&current, layer, bits, w);
        root.extend((0..w).map(|q| v >> q & 1 == 1));
        current = next;
        bits += w;
    }
    Ok(root)
}

/// Flattens the cascade into one automaton over the base alphabet by
/// composing layer after layer, keeping only reachable values.
pub fn cascade_flatten(cascade: &Cascade, cap: usize) -> Result<Dbta> {
    let base = &cascade.base;
    // values of the composed prefix, as packed coordinate masks
    let mut h = FiniteAlgebra::from_fn(base.clone(), 1, |_, _| 0)?;
    let mut masks: Vec<usize> = vec![0];
    let mut bits = 0;
    for layer in &cascade.layers {
        let nb = h.size();
        let inner = layer.algebra()?;
        let g = FiniteAlgebra::from_fn(value_alphabet(base, nb), inner.size(), |l, args| {
            let (a, b) = (l / nb, l % nb);
            inner.apply(a * (1 << bits) + masks[b], args)
        })?;
        let composed = sequential_compose(&h, &g)?;
        let reach = composed.reachable();
        if reach.len() > cap {
            return Err(Error::CapExceeded {
                what: "flattened cascade carrier",
                limit: cap,
            });
        }
        masks = reach.iter().map(|&p| (p / nb) << bits | masks[p % nb]).collect();
        h = composed.restrict(&reach)?;
        bits += layer.width;
    }
    let accepting = masks.iter().map(|&m| cascade.read(m)).collect();
    Dbta::from_mask(h, accepting)
}

/// Flattening by exploration of packed masks; agrees with
/// [`cascade_flatten`].
pub fn cascade_explore(cascade: &Cascade, cap: usize) -> Result<Dbta> {
    let (algebra, masks) = explore(&cascade.base, cap, "flattened cascade carrier", |a, args: &[&usize]| {
        let kids: Vec<usize> = args.iter().map(|&&m| m).collect();
        Ok(cascade.step(a, &kids))
    })?;
    let accepting = masks.iter().map(|&m| cascade.read(m)).collect();
    Dbta::from_mask(algebra, accepting)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Lit {
    bit: usize,
    negated: bool,
}

impl Lit {
    fn eval(self, mask: usize) -> bool {
        (mask >> self.bit & 1 == 1) != self.negated
    }

    fn not(self) -> Lit {
        Lit {
            negated: !self.negated,
            ..self
        }
    }
}

struct Compiler<'a> {
    base: &'a RankedAlphabet,
    layers: Vec<Layer>,
    bits: usize,
    max_width: usize,
    memo: HashMap<CtlFormula, Lit>,
}

impl Compiler<'_> {
    /// Appends a layer whose ops are given per base letter and mask of the
    /// bits so far; returns the global index of its first coordinate.
    fn push(&mut self, width: usize, op: impl Fn(usize, usize) -> Vec<SemiPoly>) -> Result<usize> {
        if self.bits + width > self.max_width {
            return Err(Error::CapExceeded {
                what: "cascade bit-width",
                limit: self.max_width,
            });
        }
        let alphabet = annotated_alphabet(self.base, self.bits);
        let n = 1usize << self.bits;
        let ops = (0..alphabet.len()).map(|l| op(l / n, l % n)).collect();
        self.layers.push(Layer { alphabet, width, ops });
        let first = self.bits;
        self.bits += width;
        Ok(first)
    }

    fn constant_layer(&mut self, f: impl Fn(usize, usize) -> bool) -> Result<Lit> {
        let bit = self.push(1, |a, mask| vec![SemiPoly::constant(f(a, mask))])?;
        Ok(Lit { bit, negated: false })
    }

    fn compile(&mut self, formula: &CtlFormula) -> Result<Lit> {
        if let Some(&lit) = self.memo.get(formula) {
            return Ok(lit);
        }
        let base = self.base;
        let lit = match formula {
            CtlFormula::Letter(a) => {
                let a = *a;
                self.constant_layer(|b, _| b == a)?
            }
            CtlFormula::Not(f) => self.compile(f)?.not(),
            CtlFormula::And(f, g) => {
                let (x, y) = (self.compile(f)?, self.compile(g)?);
                self.constant_layer(|_, m| x.eval(m) && y.eval(m))?
            }
            CtlFormula::Or(f, g) => {
                let (x, y) = (self.compile(f)?, self.compile(g)?);
                self.constant_layer(|_, m| x.eval(m) || y.eval(m))?
            }
            CtlFormula::Next(i, f) => {
                let (x, i) = (self.compile(f)?, *i);
                // coordinate 0: own value of f; coordinate 1: child i's
                let first = self.push(2, |a, m| {
                    let child = if i < base.arity(a) {
                        SemiPoly::And(BTreeSet::from([2 * i]))
                    } else {
                        SemiPoly::Zero
                    };
                    vec![SemiPoly::constant(x.eval(m)), child]
                })?;
                Lit {
                    bit: first + 1,
                    negated: false,
                }
            }
            CtlFormula::DirUntil(spec) => {
                spec.check(base)?;
                let bit = self.push(1, |a, _| vec![spec.complement_poly(base, a)])?;
                Lit { bit, negated: true }
            }
            CtlFormula::EU(f, g) => {
                let (x, y) = (self.compile(f)?, self.compile(g)?);
                // coordinate 0: no witness below with f on every node down
                // to it, the node itself included; coordinate 1: no witness
                // in any child
                let first = self.push(2, |a, m| {
                    let children: BTreeSet<usize> = (0..base.arity(a)).map(|i| 2 * i).collect();
                    if y.eval(m) {
                        vec![SemiPoly::Zero, SemiPoly::Zero]
                    } else if x.eval(m) {
                        vec![SemiPoly::And(children.clone()), SemiPoly::And(children)]
                    } else {
                        vec![SemiPoly::one(), SemiPoly::And(children)]
                    }
                })?;
                Lit {
                    bit: first + 1,
                    negated: true,
                }
            }
        };
        self.memo.insert(formula.clone(), lit);
        Ok(lit)
    }
}

/// Compiles a formula into a cascade. Letters and Boolean connectives give
/// constant width-1 layers, direction-sensitive until a width-1 semilattice
/// layer, and Next and EU width-2 layers.
pub fn ctl_compile(formula: &CtlFormula, base: &RankedAlphabet, max_width: usize) -> Result<Cascade> {
    let mut c = Compiler {
        base,
        layers: Vec::new(),
        bits: 0,
        max_width,
        memo: HashMap::new(),
    };
    let mut lit = c.compile(formula)?;
    if lit.negated {
        lit = c.constant_layer(|_, m| lit.eval(m))?;
    }
    Cascade::new(base.clone(), c.layers, Readout::Bit(lit.bit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::trees::{enumerate_trees, parse_tree};
    use rand::SeedableRng;

    #[test]
    fn annotation_bits() {
        let p = fixtures::l_pott();
        let a = p.alphabet();
        let t = parse_tree("f2(f0,f0)", a).unwrap();
        let ann = annotate(&t, std::slice::from_ref(&p)).unwrap();
        let aa = annotated_alphabet(a, 1);
        assert_eq!(crate::render_tree(&ann, &aa), "f2[0](f0[1],f0[1])");
        assert_eq!(annotate(&t, &[]).unwrap(), t);
    }

    #[test]
    fn nesting_examples() {
        let p = fixtures::l_pott();
        let a = p.alphabet().clone();
        // zero bits still rename letters, so the plain language is rejected
        assert!(nest(&a, &[], &p, 100).is_err());
        let tables = (0..a.len()).map(|l| p.algebra().table(l).to_vec()).collect();
        let top0 = Dbta::new(FiniteAlgebra::new(annotated_alphabet(&a, 0), 3, tables).unwrap(), [0]).unwrap();
        assert!(nest(&a, &[], &top0, 100).unwrap().are_equivalent(&p).unwrap());
        let aa = annotated_alphabet(&a, 1);
        let root_bit = Dbta::new(FiniteAlgebra::from_fn(aa, 2, |l, _| l % 2).unwrap(), [1]).unwrap();
        let nested = nest(&a, std::slice::from_ref(&p), &root_bit, 100).unwrap();
        assert!(nested.are_equivalent(&p).unwrap());
    }

    #[test]
    fn until_examples() {
        let a = fixtures::sig_gcd();
        let g = a.lookup("g").unwrap();
        let (c, d) = (a.lookup("c").unwrap(), a.lookup("d").unwrap());
        let spec = UntilSpec {
            x: BTreeSet::from([(g, 0)]),
            y: BTreeSet::from([c]),
        };
        let lang = until_language(&a, &spec).unwrap();
        for (text, expected) in [("g(c,d)", true), ("c", true), ("g(d,c)", false)] {
            assert_eq!(lang.dbta.accepts(&parse_tree(text, &a).unwrap()).unwrap(), expected, "{text}");
        }
        for t in enumerate_trees(&a, 7) {
            assert_eq!(lang.dbta.accepts(&t).unwrap(), spec.holds(&t));
        }
        let all = UntilSpec {
            x: BTreeSet::new(),
            y: (0..a.len()).collect(),
        };
        assert!(until_language(&a, &all).unwrap().dbta.complement().is_empty());
        assert!(until_language(&a, &UntilSpec::default()).unwrap().dbta.is_empty());
        assert_eq!(lang.complement[c], SemiPoly::Zero);
        assert_eq!(lang.complement[g], SemiPoly::And(BTreeSet::from([0])));
        assert_eq!(lang.complement[d], SemiPoly::one());
    }

    #[test]
    fn parsing() {
        let a = fixtures::sig_pott();
        let f0 = a.lookup("f0").unwrap();
        assert_eq!(ctl_parse("lbl(f0)", &a).unwrap(), CtlFormula::Letter(f0));
        assert_eq!(
            ctl_parse("X1 lbl(f0)", &a).unwrap(),
            CtlFormula::Next(0, Box::new(CtlFormula::Letter(f0)))
        );
        assert!(matches!(ctl_parse("E[lbl(f1) U lbl(f0)]", &a).unwrap(), CtlFormula::EU(..)));
        let f = ctl_parse("lbl(f0) | lbl(f1) & !lbl(f2)", &a).unwrap();
        assert!(matches!(f, CtlFormula::Or(..)));
        let du = ctl_parse("DU[f2.1, f1.1 ; f0]", &a).unwrap();
        assert_eq!(ctl_parse(&du.render(&a), &a).unwrap(), du);
        assert!(matches!(ctl_parse("lbl(f9)", &a), Err(Error::Parse { pos: 4, .. })));
        assert!(ctl_parse("DU[f0.1 ; f0]", &a).is_err());
        assert!(ctl_parse("lbl(f0) lbl(f1)", &a).is_err());
    }

    #[test]
    fn semantics_examples() {
        let a = fixtures::sig_pott();
        let t = |s| parse_tree(s, &a).unwrap();
        let f = |s| ctl_parse(s, &a).unwrap();
        assert!(ctl_eval(&f("lbl(f0)"), &t("f0")));
        assert!(ctl_eval(&f("X1 lbl(f0)"), &t("f1(f0)")));
        assert!(!ctl_eval(&f("X1 lbl(f0)"), &t("f0")));
        assert!(ctl_eval(&f("E[lbl(f1) U lbl(f0)]"), &t("f1(f1(f0))")));
        assert!(ctl_eval(&f("E[lbl(f2) U lbl(f0)]"), &t("f1(f0)")));
        assert!(!ctl_eval(&f("E[lbl(f2) U lbl(f0)]"), &t("f1(f1(f0))")));
    }

    #[test]
    fn sequential_composition_principle() {
        let base = fixtures::sig_pott();
        let h = fixtures::l_pott_redundant().algebra().clone();
        let va = value_alphabet(&base, h.size());
        let g = FiniteAlgebra::from_fn(va.clone(), 3, |l, args| (l + args.iter().sum::<usize>()) % 3).unwrap();
        let comp = sequential_compose(&h, &g).unwrap();
        for t in enumerate_trees(&base, 7) {
            let expected = g.evaluate(&label_with_values(&t, &h)).unwrap() * h.size() + h.evaluate(&t).unwrap();
            assert_eq!(comp.evaluate(&t).unwrap(), expected);
        }
        let trivial = FiniteAlgebra::from_fn(base.clone(), 1, |_, _| 0).unwrap();
        let g1 = FiniteAlgebra::from_fn(value_alphabet(&base, 1), 3, |l, args| fixtures::alg_pott().apply(l, args)).unwrap();
        let c = sequential_compose(&trivial, &g1).unwrap();
        assert!(crate::syntactic::isomorphism(&c, &fixtures::alg_pott()).is_some());
    }

    #[test]
    fn compile_letters_and_until() {
        let a = fixtures::sig_pott();
        let f = ctl_parse("lbl(f0)", &a).unwrap();
        let c = ctl_compile(&f, &a, 16).unwrap();
        assert_eq!(c.layers().len(), 1);
        let flat = cascade_flatten(&c, 4096).unwrap();
        for t in enumerate_trees(&a, 6) {
            assert_eq!(flat.accepts(&t).unwrap(), t.label == a.lookup("f0").unwrap());
        }
        let spec = UntilSpec {
            x: BTreeSet::from([(0, 1), (1, 0)]),
            y: BTreeSet::from([2]),
        };
        let c = ctl_compile(&CtlFormula::DirUntil(spec.clone()), &a, 16).unwrap();
        assert!(c.layers().iter().all(|l| l.width == 1));
        let flat = cascade_flatten(&c, 4096).unwrap();
        assert!(flat.are_equivalent(&until_language(&a, &spec).unwrap().dbta).unwrap());
    }

    #[test]
    fn empty_cascades() {
        let a = fixtures::sig_pott();
        for b in [false, true] {
            let c = Cascade::new(a.clone(), vec![], Readout::Const(b)).unwrap();
            let flat = cascade_flatten(&c, 10).unwrap();
            assert_eq!(flat.is_empty(), !b);
            assert_eq!(flat.complement().is_empty(), b);
        }
    }

    #[test]
    fn next_layer_reads_child() {
        let a = fixtures::sig_pott();
        let c = ctl_compile(&ctl_parse("X2 lbl(f0)", &a).unwrap(), &a, 16).unwrap();
        let t = parse_tree("f2(f1(f0),f0)", &a).unwrap();
        let bits = cascade_eval(&c, &t).unwrap();
        // layer 0 is lbl(f0), layer 1 is the Next pair
        assert_eq!(bits, vec![false, false, true]);
    }

    #[test]
    fn random_formulas_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for alphabet in [fixtures::sig_pott(), fixtures::sig_gcd()] {
            let trees = enumerate_trees(&alphabet, 6);
            for n in 0..30 {
                let f = random_formula(&alphabet, 3, n % 2 == 0, &mut rng);
                let c = ctl_compile(&f, &alphabet, 16).unwrap();
                let flat = cascade_flatten(&c, 1 << 16).unwrap();
                let explored = cascade_explore(&c, 1 << 16).unwrap();
                for t in &trees {
                    let expected = ctl_eval(&f, t);
                    assert_eq!(flat.accepts(t).unwrap(), expected, "{}", f.render(&alphabet));
                    assert_eq!(explored.accepts(t).unwrap(), expected);
                    assert_eq!(c.accepts(t).unwrap(), expected);
                }
            }
        }
    }
}
