//! Ranked alphabets, trees, terms with variables, contexts, path words and
//! tree homomorphisms.
//!
//! Trees refer to letters by their index in a [`RankedAlphabet`]; every
//! operation that needs names (parsing, rendering) takes the alphabet
//! explicitly.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported letter arity.
pub const MAX_ARITY: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub name: String,
    pub arity: usize,
}

/// A finite, ordered set of letters with arities. Letter identity is the
/// pair (name, arity); names are unique.
#[derive(Debug, Clone)]
pub struct RankedAlphabet {
    letters: Vec<Letter>,
    by_name: HashMap<String, usize>,
}

impl PartialEq for RankedAlphabet {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters
    }
}

impl Eq for RankedAlphabet {}

impl std::hash::Hash for RankedAlphabet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.letters.hash(state);
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ','))
}

impl RankedAlphabet {
    /// An alphabet for trees: it must contain at least one constant.
    pub fn new<I, S>(letters: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let alphabet = Self::signature(letters)?;
        if alphabet.constants().next().is_none() {
            return Err(Error::invalid("alphabet has no letter of arity 0"));
        }
        Ok(alphabet)
    }

    /// An operation signature. Unlike [`RankedAlphabet::new`] it may lack
    /// constants (e.g. the signature of a semilattice).
    pub fn signature<I, S>(letters: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out = RankedAlphabet {
            letters: Vec::new(),
            by_name: HashMap::new(),
        };
        for (name, arity) in letters {
            let name = name.into();
            if !valid_name(&name) {
                return Err(Error::invalid(format!("invalid letter name {name:?}")));
            }
            if arity > MAX_ARITY {
                return Err(Error::invalid(format!(
                    "letter {name} has arity {arity}, more than {MAX_ARITY}"
                )));
            }
            if out.by_name.contains_key(&name) {
                return Err(Error::invalid(format!("duplicate letter {name}")));
            }
            out.by_name.insert(name.clone(), out.letters.len());
            out.letters.push(Letter { name, arity });
        }
        Ok(out)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn arity(&self, letter: usize) -> usize {
        self.letters[letter].arity
    }

    pub fn name(&self, letter: usize) -> &str {
        &self.letters[letter].name
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn max_arity(&self) -> usize {
        self.letters.iter().map(|l| l.arity).max().unwrap_or(0)
    }

    pub fn constants(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&a| self.arity(a) == 0)
    }

    /// The path alphabet: constants, then `(a, i)` for every letter of
    /// positive arity and every child index.
    pub fn path_symbols(&self) -> Vec<PathSymbol> {
        let mut out: Vec<PathSymbol> = self.constants().map(PathSymbol::Leaf).collect();
        for a in 0..self.len() {
            for child in 0..self.arity(a) {
                out.push(PathSymbol::Step { letter: a, child });
            }
        }
        out
    }

    /// The product alphabet `self × labels`, arities inherited. Letter
    /// `(a, x)` has index `a * labels.len() + x` and name `a[label]`.
    pub fn labelled(&self, labels: &[String]) -> RankedAlphabet {
        let mut letters = Vec::with_capacity(self.len() * labels.len());
        for l in &self.letters {
            for x in labels {
                letters.push((format!("{}[{}]", l.name, x), l.arity));
            }
        }
        RankedAlphabet::signature(letters).expect("labelled alphabet is well formed")
    }

    /// Checks that `tree` is a well-formed tree over this alphabet.
    pub fn check_tree(&self, tree: &Tree) -> Result<()> {
        if tree.label >= self.len() {
            return Err(Error::mismatch(format!(
                "letter index {} outside an alphabet of {} letters",
                tree.label,
                self.len()
            )));
        }
        if tree.children.len() != self.arity(tree.label) {
            return Err(Error::ArityMismatch(format!(
                "{} expects {}",
                self.name(tree.label),
                self.arity(tree.label)
            )));
        }
        tree.children.iter().try_for_each(|c| self.check_tree(c))
    }
}

/// A ranked, labelled, finite tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    pub label: usize,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn leaf(label: usize) -> Self {
        Tree {
            label,
            children: Vec::new(),
        }
    }

    pub fn node(label: usize, children: Vec<Tree>) -> Self {
        Tree { label, children }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    pub fn leaves(&self) -> usize {
        if self.children.is_empty() {
            1
        } else {
            self.children.iter().map(Tree::leaves).sum()
        }
    }

    /// Height with the root at depth 0.
    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }

    /// Labels in preorder.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size());
        fn go(t: &Tree, out: &mut Vec<usize>) {
            out.push(t.label);
            t.children.iter().for_each(|c| go(c, out));
        }
        go(self, &mut out);
        out
    }

    /// All subtrees in preorder, the tree itself first.
    pub fn subtrees(&self) -> Vec<&Tree> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a Tree, out: &mut Vec<&'a Tree>) {
            out.push(t);
            t.children.iter().for_each(|c| go(c, out));
        }
        go(self, &mut out);
        out
    }

    /// Rebuilds the tree bottom-up, mapping each node from its label and the
    /// already-mapped children.
    pub fn fold<T>(&self, f: &mut impl FnMut(usize, Vec<T>) -> T) -> T {
        let children = self.children.iter().map(|c| c.fold(f)).collect();
        f(self.label, children)
    }
}

/// A term whose leaves may also be variables of type `V`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term<V> {
    Var(V),
    App(usize, Vec<Term<V>>),
}

impl<V> Term<V> {
    pub fn constant(letter: usize) -> Self {
        Term::App(letter, Vec::new())
    }

    pub fn from_tree(tree: &Tree) -> Self {
        Term::App(tree.label, tree.children.iter().map(Term::from_tree).collect())
    }

    /// Variable occurrences, left to right.
    pub fn vars(&self) -> Vec<&V> {
        let mut out = Vec::new();
        fn go<'a, V>(t: &'a Term<V>, out: &mut Vec<&'a V>) {
            match t {
                Term::Var(v) => out.push(v),
                Term::App(_, args) => args.iter().for_each(|a| go(a, out)),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| 1 + a.depth()).max().unwrap_or(0),
        }
    }

    pub fn map_vars<W>(&self, f: &impl Fn(&V) -> W) -> Term<W> {
        match self {
            Term::Var(v) => Term::Var(f(v)),
            Term::App(a, args) => Term::App(*a, args.iter().map(|t| t.map_vars(f)).collect()),
        }
    }

    /// Replaces variables by terms over a possibly different variable type.
    pub fn bind<W>(&self, f: &impl Fn(&V) -> Term<W>) -> Term<W> {
        match self {
            Term::Var(v) => f(v),
            Term::App(a, args) => Term::App(*a, args.iter().map(|t| t.bind(f)).collect()),
        }
    }

    /// Replaces every variable by a tree.
    pub fn ground(&self, f: &impl Fn(&V) -> Tree) -> Tree {
        match self {
            Term::Var(v) => f(v),
            Term::App(a, args) => Tree::node(*a, args.iter().map(|t| t.ground(f)).collect()),
        }
    }

    /// Bottom-up evaluation with `leaf` for variables and `app` for letters.
    pub fn eval<T>(&self, leaf: &impl Fn(&V) -> T, app: &impl Fn(usize, &[T]) -> T) -> T {
        match self {
            Term::Var(v) => leaf(v),
            Term::App(a, args) => {
                let vals: Vec<T> = args.iter().map(|t| t.eval(leaf, app)).collect();
                app(*a, &vals)
            }
        }
    }

    /// Checks letter indices and arities against `alphabet`.
    pub fn check(&self, alphabet: &RankedAlphabet) -> Result<()> {
        match self {
            Term::Var(_) => Ok(()),
            Term::App(a, args) => {
                if *a >= alphabet.len() {
                    return Err(Error::mismatch(format!("letter index {a} out of range")));
                }
                if args.len() != alphabet.arity(*a) {
                    return Err(Error::ArityMismatch(format!(
                        "{} expects {}",
                        alphabet.name(*a),
                        alphabet.arity(*a)
                    )));
                }
                args.iter().try_for_each(|t| t.check(alphabet))
            }
        }
    }

    pub fn render(&self, alphabet: &RankedAlphabet, var: &impl Fn(&V) -> String) -> String {
        let mut out = String::new();
        self.render_into(alphabet, var, &mut out);
        out
    }

    fn render_into(&self, alphabet: &RankedAlphabet, var: &impl Fn(&V) -> String, out: &mut String) {
        match self {
            Term::Var(v) => out.push_str(&var(v)),
            Term::App(a, args) => {
                out.push_str(alphabet.name(*a));
                if !args.is_empty() {
                    out.push('(');
                    for (i, t) in args.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        t.render_into(alphabet, var, out);
                    }
                    out.push(')');
                }
            }
        }
    }
}

impl Term<usize> {
    /// Renders with 0-based variable `i` printed as `x{i+1}`.
    pub fn render_x(&self, alphabet: &RankedAlphabet) -> String {
        self.render(alphabet, &|i| format!("x{}", i + 1))
    }
}

/// Parses `x1`, `x2`, ... into 0-based variable indices.
pub fn parse_x_var(name: &str) -> Option<usize> {
    let n: usize = name.strip_prefix('x')?.parse().ok()?;
    n.checked_sub(1)
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => Err(Error::parse(self.pos, format!("expected '{want}', found '{c}'"))),
            None => Err(Error::parse(self.pos, format!("expected '{want}', found end of input"))),
        }
    }

    fn name(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let len = rest
            .find(|c: char| c.is_whitespace() || matches!(c, '(' | ')' | ','))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(match rest.chars().next() {
                Some(c) => Error::parse(start, format!("expected a name, found '{c}'")),
                None => Error::parse(start, "expected a name, found end of input"),
            });
        }
        self.pos += len;
        Ok((start, &rest[..len]))
    }
}

/// Parses a term `name` or `name(t1,...,tn)`. Names that are not letters of
/// `alphabet` are offered to `var`; letters take precedence.
pub fn parse_term<V>(
    text: &str,
    alphabet: &RankedAlphabet,
    var: &impl Fn(&str) -> Option<V>,
) -> Result<Term<V>> {
    let mut lx = Lexer { src: text, pos: 0 };
    let term = parse_term_at(&mut lx, alphabet, var)?;
    if let Some(c) = lx.peek() {
        return Err(Error::parse(lx.pos, format!("unexpected trailing '{c}'")));
    }
    Ok(term)
}

fn parse_term_at<V>(
    lx: &mut Lexer<'_>,
    alphabet: &RankedAlphabet,
    var: &impl Fn(&str) -> Option<V>,
) -> Result<Term<V>> {
    let (start, name) = lx.name()?;
    let Some(letter) = alphabet.lookup(name) else {
        if let Some(v) = var(name) {
            return Ok(Term::Var(v));
        }
        return Err(Error::parse(start, format!("unknown letter {name}")));
    };
    let arity = alphabet.arity(letter);
    let mut args = Vec::new();
    if lx.peek() == Some('(') {
        lx.expect('(')?;
        loop {
            args.push(parse_term_at(lx, alphabet, var)?);
            match lx.peek() {
                Some(',') => lx.expect(',')?,
                _ => break,
            }
        }
        lx.expect(')')?;
    }
    if args.len() != arity {
        return Err(Error::parse(
            start,
            format!("arity mismatch: {name} expects {arity}, got {}", args.len()),
        ));
    }
    Ok(Term::App(letter, args))
}

/// Parses a tree in the grammar `name` | `name(t1,...,tn)`.
pub fn parse_tree(text: &str, alphabet: &RankedAlphabet) -> Result<Tree> {
    let term: Term<()> = parse_term(text, alphabet, &|_| None)?;
    Ok(term.ground(&|_| unreachable!("trees have no variables")))
}

/// Canonical text form; constants are printed without parentheses.
pub fn render_tree(tree: &Tree, alphabet: &RankedAlphabet) -> String {
    Term::<()>::from_tree(tree).render(alphabet, &|_| String::new())
}

/// All trees with at most `max_nodes` nodes, ordered by node count and then
/// lexicographically by the preorder sequence of letter indices.
pub fn enumerate_trees(alphabet: &RankedAlphabet, max_nodes: usize) -> Vec<Tree> {
    let by_size = trees_by_size(alphabet, max_nodes);
    by_size.into_iter().flatten().collect()
}

/// `result[n]` holds exactly the trees with `n` nodes, sorted.
pub fn trees_by_size(alphabet: &RankedAlphabet, max_nodes: usize) -> Vec<Vec<Tree>> {
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new(); max_nodes + 1];
    for n in 1..=max_nodes {
        let mut level = Vec::new();
        for a in 0..alphabet.len() {
            let k = alphabet.arity(a);
            for sizes in compositions(n - 1, k) {
                let mut partial: Vec<Vec<Tree>> = vec![Vec::new()];
                for &s in &sizes {
                    let mut next = Vec::new();
                    for prefix in &partial {
                        for child in &by_size[s] {
                            let mut p = prefix.clone();
                            p.push(child.clone());
                            next.push(p);
                        }
                    }
                    partial = next;
                }
                level.extend(partial.into_iter().map(|cs| Tree::node(a, cs)));
            }
        }
        level.sort_by_cached_key(Tree::preorder);
        by_size[n] = level;
    }
    by_size
}

/// Ordered ways to write `total` as `parts` positive summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// A symbol of the path alphabet. `child` is 0-based; it is displayed
/// 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathSymbol {
    Leaf(usize),
    Step { letter: usize, child: usize },
}

/// The labelling of one root-to-leaf path: steps followed by one constant.
pub type PathWord = Vec<PathSymbol>;

pub fn path_words(tree: &Tree) -> BTreeSet<PathWord> {
    let mut out = BTreeSet::new();
    let mut prefix = Vec::new();
    fn go(t: &Tree, prefix: &mut Vec<PathSymbol>, out: &mut BTreeSet<PathWord>) {
        if t.children.is_empty() {
            let mut w = prefix.clone();
            w.push(PathSymbol::Leaf(t.label));
            out.insert(w);
            return;
        }
        for (i, c) in t.children.iter().enumerate() {
            prefix.push(PathSymbol::Step {
                letter: t.label,
                child: i,
            });
            go(c, prefix, out);
            prefix.pop();
        }
    }
    go(tree, &mut prefix, &mut out);
    out
}

pub fn render_path_word(word: &[PathSymbol], alphabet: &RankedAlphabet) -> String {
    word.iter()
        .map(|s| match *s {
            PathSymbol::Leaf(c) => alphabet.name(c).to_string(),
            PathSymbol::Step { letter, child } => format!("({},{})", alphabet.name(letter), child + 1),
        })
        .collect::<Vec<_>>()
        .join("")
}

/// A one-hole context: a term with exactly one occurrence of variable 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Context(Term<usize>);

impl Context {
    pub fn new(term: Term<usize>) -> Result<Self> {
        let vars = term.vars();
        if vars.len() != 1 || *vars[0] != 0 {
            return Err(Error::invalid(
                "a context uses its single variable exactly once",
            ));
        }
        Ok(Context(term))
    }

    pub fn hole() -> Self {
        Context(Term::Var(0))
    }

    pub fn term(&self) -> &Term<usize> {
        &self.0
    }

    /// Substitutes `tree` for the hole.
    pub fn apply(&self, tree: &Tree) -> Tree {
        self.0.ground(&|_| tree.clone())
    }

    /// Like [`Context::apply`], checking both sides against `alphabet`.
    pub fn apply_checked(&self, alphabet: &RankedAlphabet, tree: &Tree) -> Result<Tree> {
        self.0.check(alphabet)?;
        alphabet.check_tree(tree)?;
        Ok(self.apply(tree))
    }
}

/// Contexts whose hole sits at depth at most `max_depth`, with side
/// subtrees of at most `side_nodes` nodes. Used by brute-force oracles.
pub fn enumerate_contexts(
    alphabet: &RankedAlphabet,
    max_depth: usize,
    side_nodes: usize,
) -> Vec<Context> {
    let sides = enumerate_trees(alphabet, side_nodes);
    let mut out = vec![Term::Var(0)];
    let mut frontier = vec![Term::Var(0)];
    for _ in 0..max_depth {
        let mut next = Vec::new();
        for inner in &frontier {
            for a in 0..alphabet.len() {
                let k = alphabet.arity(a);
                for pos in 0..k {
                    let mut fills: Vec<Vec<Term<usize>>> = vec![Vec::new()];
                    for j in 0..k {
                        let mut grown = Vec::new();
                        for f in &fills {
                            if j == pos {
                                let mut g = f.clone();
                                g.push(inner.clone());
                                grown.push(g);
                            } else {
                                for s in &sides {
                                    let mut g = f.clone();
                                    g.push(Term::from_tree(s));
                                    grown.push(g);
                                }
                            }
                        }
                        fills = grown;
                    }
                    next.extend(fills.into_iter().map(|args| Term::App(a, args)));
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out.into_iter().map(Context).collect()
}

/// A tree homomorphism: each source letter of arity `n` maps to a term over
/// the target alphabet with variables `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeHom {
    source: RankedAlphabet,
    target: RankedAlphabet,
    images: Vec<Term<usize>>,
}

impl TreeHom {
    pub fn new(source: RankedAlphabet, target: RankedAlphabet, images: Vec<Term<usize>>) -> Result<Self> {
        if images.len() != source.len() {
            return Err(Error::mismatch(format!(
                "{} images for {} letters",
                images.len(),
                source.len()
            )));
        }
        for (a, t) in images.iter().enumerate() {
            t.check(&target)?;
            if let Some(v) = t.vars().into_iter().find(|&&v| v >= source.arity(a)) {
                return Err(Error::invalid(format!(
                    "image of {} uses x{} but the letter has arity {}",
                    source.name(a),
                    v + 1,
                    source.arity(a)
                )));
            }
        }
        Ok(TreeHom {
            source,
            target,
            images,
        })
    }

    /// Each letter maps to itself.
    pub fn identity(alphabet: &RankedAlphabet) -> Self {
        let images = (0..alphabet.len())
            .map(|a| Term::App(a, (0..alphabet.arity(a)).map(Term::Var).collect()))
            .collect();
        TreeHom {
            source: alphabet.clone(),
            target: alphabet.clone(),
            images,
        }
    }

    pub fn source(&self) -> &RankedAlphabet {
        &self.source
    }

    pub fn target(&self) -> &RankedAlphabet {
        &self.target
    }

    pub fn image(&self, letter: usize) -> &Term<usize> {
        &self.images[letter]
    }

    pub fn apply(&self, tree: &Tree) -> Tree {
        self.images[tree.label].ground(&|&i| self.apply(&tree.children[i]))
    }

    pub fn apply_checked(&self, tree: &Tree) -> Result<Tree> {
        self.source.check_tree(tree)?;
        Ok(self.apply(tree))
    }

    /// Image of a term; variables are kept.
    pub fn apply_term(&self, term: &Term<usize>) -> Term<usize> {
        match term {
            Term::Var(v) => Term::Var(*v),
            Term::App(a, args) => {
                let mapped: Vec<Term<usize>> = args.iter().map(|t| self.apply_term(t)).collect();
                self.images[*a].bind(&|&i| mapped[i].clone())
            }
        }
    }
}

impl fmt::Display for PathSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathSymbol::Leaf(c) => write!(f, "#{c}"),
            PathSymbol::Step { letter, child } => write!(f, "(#{letter},{})", child + 1),
        }
    }
}
