//! Line-oriented text formats. Blank lines and lines starting with `#` are
//! ignored. States and carrier elements are numbered from 0.

use std::fmt::{self, Write as _};

use treelab::automata::tuples;
use treelab::paths::Dtta;
use treelab::trees::parse_term;
use treelab::transduce::{Dtop, MatrixHom, PolyTerm};
use treelab::{Dbta, FiniteAlgebra, RankedAlphabet, Term};

/// A malformed artifact, with the 1-based line it was found on (0 when the
/// problem is the file as a whole).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.msg)
        } else {
            write!(f, "line {}: {}", self.line, self.msg)
        }
    }
}

impl std::error::Error for FormatError {}

type Res<T> = std::result::Result<T, FormatError>;

fn err<T>(line: usize, msg: impl Into<String>) -> Res<T> {
    Err(FormatError { line, msg: msg.into() })
}

fn lift<T>(line: usize, r: treelab::Result<T>) -> Res<T> {
    r.map_err(|e| FormatError { line, msg: e.to_string() })
}

struct Line<'a> {
    no: usize,
    words: Vec<&'a str>,
    rest: &'a str,
}

fn lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                return None;
            }
            let rest = t.split_once(char::is_whitespace).map_or("", |(_, r)| r.trim());
            Some(Line {
                no: i + 1,
                words: t.split_whitespace().collect(),
                rest,
            })
        })
        .collect()
}

fn number(line: usize, word: &str) -> Res<usize> {
    word.parse().or_else(|_| err(line, format!("expected a number, found {word:?}")))
}

/// Splits `lhs -> rhs` words.
fn arrow<'b>(l: &'b Line<'_>) -> Res<(&'b [&'b str], &'b [&'b str])> {
    match l.words.iter().position(|w| *w == "->") {
        Some(p) => Ok((&l.words[..p], &l.words[p + 1..])),
        None => err(l.no, "expected '->'"),
    }
}

fn letters<'a>(ls: &[Line<'a>], keyword: &str) -> Res<Vec<(String, usize)>> {
    let mut out = Vec::new();
    for l in ls.iter().filter(|l| l.words[0] == keyword) {
        if l.words.len() != 3 {
            return err(l.no, format!("expected '{keyword} NAME ARITY'"));
        }
        out.push((l.words[1].to_string(), number(l.no, l.words[2])?));
    }
    Ok(out)
}

fn alphabet_of(ls: &[Line<'_>], keyword: &str) -> Res<RankedAlphabet> {
    let first = ls.iter().find(|l| l.words[0] == keyword).map_or(0, |l| l.no);
    lift(first, RankedAlphabet::signature(letters(ls, keyword)?))
}

fn single(ls: &[Line<'_>], keyword: &str) -> Res<usize> {
    let mut found = None;
    for l in ls.iter().filter(|l| l.words[0] == keyword) {
        if found.is_some() {
            return err(l.no, format!("duplicate '{keyword}'"));
        }
        if l.words.len() != 2 {
            return err(l.no, format!("expected '{keyword} N'"));
        }
        found = Some(number(l.no, l.words[1])?);
    }
    found.ok_or(FormatError {
        line: 0,
        msg: format!("missing '{keyword}'"),
    })
}

fn reject_unknown(ls: &[Line<'_>], known: &[&str]) -> Res<()> {
    match ls.iter().find(|l| !known.contains(&l.words[0])) {
        Some(l) => err(l.no, format!("unknown directive {:?}", l.words[0])),
        None => Ok(()),
    }
}

fn letter_of(alphabet: &RankedAlphabet, line: usize, name: &str) -> Res<usize> {
    alphabet.lookup(name).ok_or(FormatError {
        line,
        msg: format!("unknown letter {name}"),
    })
}

fn write_letters(out: &mut String, keyword: &str, alphabet: &RankedAlphabet) {
    for a in 0..alphabet.len() {
        let _ = writeln!(out, "{keyword} {} {}", alphabet.name(a), alphabet.arity(a));
    }
}

pub fn parse_alphabet(text: &str) -> Res<RankedAlphabet> {
    let ls = lines(text);
    reject_unknown(&ls, &["letter"])?;
    alphabet_of(&ls, "letter")
}

pub fn save_alphabet(alphabet: &RankedAlphabet) -> String {
    let mut out = String::new();
    write_letters(&mut out, "letter", alphabet);
    out
}

/// An algebra with an accepting set; `accept` may be omitted, giving the
/// empty language (useful for plain algebras).
pub fn parse_dbta(text: &str) -> Res<Dbta> {
    let ls = lines(text);
    reject_unknown(&ls, &["letter", "carrier", "names", "op", "accept"])?;
    let alphabet = alphabet_of(&ls, "letter")?;
    let m = single(&ls, "carrier")?;
    let names: Option<Vec<String>> = ls
        .iter()
        .find(|l| l.words[0] == "names")
        .map(|l| l.words[1..].iter().map(|s| s.to_string()).collect());
    // numbers first, so saved files never depend on the names
    let element = |line: usize, w: &str| -> Res<usize> {
        match w.parse::<usize>() {
            Ok(e) if e < m => Ok(e),
            Ok(e) => err(line, format!("element {e} outside a carrier of size {m}")),
            Err(_) => match names.as_ref().and_then(|n| n.iter().position(|x| x == w)) {
                Some(i) => Ok(i),
                None => err(line, format!("unknown element {w:?}")),
            },
        }
    };
    let mut tables: Vec<Vec<Option<usize>>> = (0..alphabet.len())
        .map(|a| vec![None; m.pow(alphabet.arity(a) as u32)])
        .collect();
    for l in ls.iter().filter(|l| l.words[0] == "op") {
        let (lhs, rhs) = arrow(l)?;
        if lhs.len() < 2 || rhs.len() != 1 {
            return err(l.no, "expected 'op NAME e1 .. en -> e'");
        }
        let a = letter_of(&alphabet, l.no, lhs[1])?;
        let args = lhs[2..].iter().map(|w| element(l.no, w)).collect::<Res<Vec<_>>>()?;
        if args.len() != alphabet.arity(a) {
            return err(l.no, format!("{} expects {} arguments", lhs[1], alphabet.arity(a)));
        }
        let idx = args.iter().fold(0, |acc, &x| acc * m + x);
        if tables[a][idx].replace(element(l.no, rhs[0])?).is_some() {
            return err(l.no, "duplicate table row");
        }
    }
    let mut full = Vec::with_capacity(tables.len());
    for (a, t) in tables.into_iter().enumerate() {
        let mut row = Vec::with_capacity(t.len());
        for (i, v) in t.into_iter().enumerate() {
            match v {
                Some(v) => row.push(v),
                None => {
                    let args = tuples(m, alphabet.arity(a)).nth(i).unwrap_or_default();
                    let args: Vec<String> = args.iter().map(|x| x.to_string()).collect();
                    return err(0, format!("missing row op {} {}", alphabet.name(a), args.join(" ")));
                }
            }
        }
        full.push(row);
    }
    let mut accepting = Vec::new();
    for l in ls.iter().filter(|l| l.words[0] == "accept") {
        for w in &l.words[1..] {
            accepting.push(element(l.no, w)?);
        }
    }
    let mut algebra = lift(0, FiniteAlgebra::new(alphabet, m, full))?;
    if let Some(n) = names {
        let line = ls.iter().find(|l| l.words[0] == "names").map_or(0, |l| l.no);
        algebra = lift(line, algebra.with_names(n))?;
    }
    lift(0, Dbta::new(algebra, accepting))
}

pub fn save_algebra_into(out: &mut String, algebra: &FiniteAlgebra) {
    write_letters(out, "letter", algebra.alphabet());
    let m = algebra.size();
    let _ = writeln!(out, "carrier {m}");
    if let Some(n) = algebra.names() {
        let _ = writeln!(out, "names {}", n.join(" "));
    }
    let alphabet = algebra.alphabet();
    for a in 0..alphabet.len() {
        for args in tuples(m, alphabet.arity(a)) {
            let mut line = format!("op {}", alphabet.name(a));
            for x in &args {
                let _ = write!(line, " {x}");
            }
            let _ = writeln!(out, "{line} -> {}", algebra.apply(a, &args));
        }
    }
}

pub fn save_dbta(d: &Dbta) -> String {
    let mut out = String::new();
    save_algebra_into(&mut out, d.algebra());
    let acc: Vec<String> = d.accepting().iter().map(|e| e.to_string()).collect();
    let _ = writeln!(out, "accept{}", acc.iter().map(|e| format!(" {e}")).collect::<String>());
    out
}

pub fn parse_dtta(text: &str) -> Res<Dtta> {
    let ls = lines(text);
    reject_unknown(&ls, &["letter", "states", "init", "delta", "leaf"])?;
    let alphabet = alphabet_of(&ls, "letter")?;
    let n = single(&ls, "states")?;
    let init = single(&ls, "init")?;
    let state = |line: usize, w: &str| -> Res<usize> {
        let q = number(line, w)?;
        if q >= n {
            return err(line, format!("state {q} out of range"));
        }
        Ok(q)
    };
    let mut delta: Vec<Vec<Option<Vec<usize>>>> = vec![vec![None; alphabet.len()]; n];
    let mut leaf: Vec<Vec<Option<bool>>> = vec![vec![None; alphabet.len()]; n];
    for l in ls.iter().filter(|l| l.words[0] == "delta" || l.words[0] == "leaf") {
        let (lhs, rhs) = arrow(l)?;
        if lhs.len() != 3 {
            return err(l.no, format!("expected '{} Q NAME -> ...'", l.words[0]));
        }
        let q = state(l.no, lhs[1])?;
        let a = letter_of(&alphabet, l.no, lhs[2])?;
        if l.words[0] == "delta" {
            let succ = rhs.iter().map(|w| state(l.no, w)).collect::<Res<Vec<_>>>()?;
            if succ.len() != alphabet.arity(a) {
                return err(l.no, format!("{} expects {} successors", lhs[2], alphabet.arity(a)));
            }
            if delta[q][a].replace(succ).is_some() {
                return err(l.no, "duplicate delta");
            }
        } else {
            if alphabet.arity(a) != 0 {
                return err(l.no, format!("{} is not a constant", lhs[2]));
            }
            let v = match rhs {
                ["accept"] => true,
                ["reject"] => false,
                _ => return err(l.no, "expected 'accept' or 'reject'"),
            };
            if leaf[q][a].replace(v).is_some() {
                return err(l.no, "duplicate leaf");
            }
        }
    }
    let mut d = Vec::with_capacity(n);
    let mut lf = Vec::with_capacity(n);
    for q in 0..n {
        let mut drow = Vec::new();
        let mut lrow = Vec::new();
        for a in 0..alphabet.len() {
            if alphabet.arity(a) == 0 {
                drow.push(Vec::new());
                lrow.push(leaf[q][a].ok_or(FormatError {
                    line: 0,
                    msg: format!("missing leaf {q} {}", alphabet.name(a)),
                })?);
            } else {
                drow.push(delta[q][a].take().ok_or(FormatError {
                    line: 0,
                    msg: format!("missing delta {q} {}", alphabet.name(a)),
                })?);
                lrow.push(false);
            }
        }
        d.push(drow);
        lf.push(lrow);
    }
    lift(0, Dtta::new(alphabet, init, d, lf))
}

pub fn save_dtta(d: &Dtta) -> String {
    let mut out = String::new();
    let alphabet = d.alphabet();
    write_letters(&mut out, "letter", alphabet);
    let _ = writeln!(out, "states {}", d.num_states());
    let _ = writeln!(out, "init {}", d.initial());
    for q in 0..d.num_states() {
        for a in 0..alphabet.len() {
            if alphabet.arity(a) == 0 {
                let v = if d.leaf_accepts(q, a) { "accept" } else { "reject" };
                let _ = writeln!(out, "leaf {q} {} -> {v}", alphabet.name(a));
            } else {
                let succ: Vec<String> = d.successors(q, a).iter().map(|s| s.to_string()).collect();
                let _ = writeln!(out, "delta {q} {} -> {}", alphabet.name(a), succ.join(" "));
            }
        }
    }
    out
}

fn rule_var(name: &str) -> Option<(usize, usize)> {
    let (q, x) = name.strip_prefix('q')?.split_once(".x")?;
    let i: usize = x.parse().ok()?;
    Some((q.parse().ok()?, i.checked_sub(1)?))
}

pub fn parse_dtop(text: &str) -> Res<Dtop> {
    let ls = lines(text);
    reject_unknown(&ls, &["letter", "output", "states", "init", "rule"])?;
    let input = alphabet_of(&ls, "letter")?;
    let output = alphabet_of(&ls, "output")?;
    let n = single(&ls, "states")?;
    let init = single(&ls, "init")?;
    let mut rules: Vec<Vec<Option<Term<(usize, usize)>>>> = vec![vec![None; n]; input.len()];
    for l in ls.iter().filter(|l| l.words[0] == "rule") {
        let Some((head, body)) = l.rest.split_once("->") else {
            return err(l.no, "expected 'rule Q NAME -> term'");
        };
        let head: Vec<&str> = head.split_whitespace().collect();
        if head.len() != 2 {
            return err(l.no, "expected 'rule Q NAME -> term'");
        }
        let q = number(l.no, head[0])?;
        if q >= n {
            return err(l.no, format!("state {q} out of range"));
        }
        let a = letter_of(&input, l.no, head[1])?;
        let term = lift(l.no, parse_term(body.trim(), &output, &rule_var))?;
        if rules[a][q].replace(term).is_some() {
            return err(l.no, "duplicate rule");
        }
    }
    let mut full = Vec::with_capacity(input.len());
    for (a, row) in rules.into_iter().enumerate() {
        let mut r = Vec::with_capacity(n);
        for (q, t) in row.into_iter().enumerate() {
            r.push(t.ok_or(FormatError {
                line: 0,
                msg: format!("missing rule {q} {}", input.name(a)),
            })?);
        }
        full.push(r);
    }
    lift(0, Dtop::new(input, output, n, init, full))
}

pub fn save_dtop(f: &Dtop) -> String {
    let mut out = String::new();
    write_letters(&mut out, "letter", f.input());
    write_letters(&mut out, "output", f.output());
    let _ = writeln!(out, "states {}", f.num_states());
    let _ = writeln!(out, "init {}", f.initial());
    for a in 0..f.input().len() {
        for q in 0..f.num_states() {
            let _ = writeln!(out, "rule {q} {} -> {}", f.input().name(a), f.render_rule(a, q));
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
enum PolyVar {
    X(usize),
    C(usize),
}

fn poly_var(name: &str) -> Option<PolyVar> {
    if let Some(e) = name.strip_prefix('#') {
        return e.parse().ok().map(PolyVar::C);
    }
    let i: usize = name.strip_prefix('x')?.parse().ok()?;
    i.checked_sub(1).map(PolyVar::X)
}

fn to_polyterm(t: &Term<PolyVar>) -> PolyTerm {
    match t {
        Term::Var(PolyVar::X(i)) => PolyTerm::Var(*i),
        Term::Var(PolyVar::C(e)) => PolyTerm::Const(*e),
        Term::App(a, args) => PolyTerm::App(*a, args.iter().map(to_polyterm).collect()),
    }
}

/// A polynomial over `algebra`'s letters with variables `x1, x2, ...` and
/// element constants `#0, #1, ...`.
pub fn parse_polyterm(text: &str, alphabet: &RankedAlphabet) -> treelab::Result<PolyTerm> {
    Ok(to_polyterm(&parse_term(text, alphabet, &poly_var)?))
}

/// Input letters, `width N` and one `map NAME COORD -> polyterm` per letter
/// and coordinate; the base algebra is supplied separately.
pub fn parse_matrix(text: &str, base: &FiniteAlgebra) -> Res<MatrixHom> {
    let ls = lines(text);
    reject_unknown(&ls, &["letter", "width", "map"])?;
    let input = alphabet_of(&ls, "letter")?;
    let width = single(&ls, "width")?;
    let mut ops: Vec<Vec<Option<PolyTerm>>> = vec![vec![None; width]; input.len()];
    for l in ls.iter().filter(|l| l.words[0] == "map") {
        let Some((head, body)) = l.rest.split_once("->") else {
            return err(l.no, "expected 'map NAME COORD -> polyterm'");
        };
        let head: Vec<&str> = head.split_whitespace().collect();
        if head.len() != 2 {
            return err(l.no, "expected 'map NAME COORD -> polyterm'");
        }
        let a = letter_of(&input, l.no, head[0])?;
        let c = number(l.no, head[1])?;
        if c >= width {
            return err(l.no, format!("coordinate {c} out of range"));
        }
        let p = lift(l.no, parse_polyterm(body.trim(), base.alphabet()))?;
        if ops[a][c].replace(p).is_some() {
            return err(l.no, "duplicate map");
        }
    }
    let mut full = Vec::new();
    for (a, row) in ops.into_iter().enumerate() {
        let mut r = Vec::new();
        for (c, p) in row.into_iter().enumerate() {
            r.push(p.ok_or(FormatError {
                line: 0,
                msg: format!("missing map {} {c}", input.name(a)),
            })?);
        }
        full.push(r);
    }
    lift(0, MatrixHom::new(base.clone(), input, width, full))
}

pub fn save_matrix(mh: &MatrixHom, base: &FiniteAlgebra) -> String {
    let mut out = String::new();
    write_letters(&mut out, "letter", mh.input());
    let _ = writeln!(out, "width {}", mh.width());
    for a in 0..mh.input().len() {
        for c in 0..mh.width() {
            let _ = writeln!(out, "map {} {c} -> {}", mh.input().name(a), mh.op(a, c).render(base.alphabet()));
        }
    }
    out
}
