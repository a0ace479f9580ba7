//! Congruences, polynomial operations and the structural screens used for
//! path languages.

use std::collections::{BTreeSet, HashSet};

use petgraph::unionfind::UnionFind;

use crate::automata::{tuples, Dbta, FiniteAlgebra};
use crate::error::{Caps, Error, Result};
use crate::paths;
use crate::syntactic::{self, DivideCaps, DivisionWitness};
use crate::trees::RankedAlphabet;

/// A partition of the carrier. Blocks are sorted by least element and
/// `class_of` numbers them in that order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Congruence {
    class_of: Vec<usize>,
}

impl Congruence {
    /// Normalizes arbitrary class labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut ids = std::collections::HashMap::new();
        let class_of = labels
            .iter()
            .map(|l| {
                let n = ids.len();
                *ids.entry(*l).or_insert(n)
            })
            .collect();
        Congruence { class_of }
    }

    pub fn from_blocks(size: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut labels = vec![usize::MAX; size];
        for (i, block) in blocks.iter().enumerate() {
            for &e in block {
                if e >= size || labels[e] != usize::MAX {
                    return Err(Error::invalid(format!("blocks do not partition 0..{size}")));
                }
                labels[e] = i;
            }
        }
        if labels.contains(&usize::MAX) {
            return Err(Error::invalid(format!("blocks do not cover 0..{size}")));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn identity(size: usize) -> Self {
        Congruence {
            class_of: (0..size).collect(),
        }
    }

    pub fn full(size: usize) -> Self {
        Congruence {
            class_of: vec![0; size],
        }
    }

    fn from_union_find(uf: &mut UnionFind<usize>, size: usize) -> Self {
        let labels: Vec<usize> = (0..size).map(|e| uf.find_mut(e)).collect();
        Self::from_labels(&labels)
    }

    pub fn size(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_of(&self, e: usize) -> usize {
        self.class_of[e]
    }

    pub fn classes(&self) -> &[usize] {
        &self.class_of
    }

    pub fn num_blocks(&self) -> usize {
        self.class_of.iter().copied().max().map_or(0, |c| c + 1)
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for (e, &c) in self.class_of.iter().enumerate() {
            blocks[c].push(e);
        }
        blocks
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }

    pub fn is_identity(&self) -> bool {
        self.num_blocks() == self.size()
    }

    pub fn is_full(&self) -> bool {
        self.num_blocks() <= 1
    }

    /// Whether every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Congruence) -> bool {
        (0..self.size()).all(|a| (0..self.size()).all(|b| !self.related(a, b) || other.related(a, b)))
    }

    /// The join as equivalence relations.
    pub fn join(&self, other: &Congruence) -> Congruence {
        let n = self.size();
        let mut uf = UnionFind::new(n);
        for c in [self, other] {
            for block in c.blocks() {
                for w in block.windows(2) {
                    uf.union(w[0], w[1]);
                }
            }
        }
        Self::from_union_find(&mut uf, n)
    }

    pub fn render(&self) -> String {
        let blocks: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        blocks.join(" ")
    }
}

/// Whether the partition is compatible with every operation.
pub fn is_compatible(algebra: &FiniteAlgebra, c: &Congruence) -> bool {
    let m = algebra.size();
    let alphabet = algebra.alphabet();
    for a in 0..alphabet.len() {
        let k = alphabet.arity(a);
        for pos in 0..k {
            for others in tuples(m, k.saturating_sub(1)) {
                for x in 0..m {
                    for y in x + 1..m {
                        if !c.related(x, y) {
                            continue;
                        }
                        let mut ax = others.clone();
                        ax.insert(pos, x);
                        let mut ay = others.clone();
                        ay.insert(pos, y);
                        if !c.related(algebra.apply(a, &ax), algebra.apply(a, &ay)) {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// The least congruence relating the given pairs.
pub fn congruence_generated_by(algebra: &FiniteAlgebra, pairs: &[(usize, usize)]) -> Congruence {
    let m = algebra.size();
    let alphabet = algebra.alphabet();
    let mut uf = UnionFind::new(m);
    let mut work: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in pairs {
        if uf.union(a, b) {
            work.push((a, b));
        }
    }
    while let Some((x, y)) = work.pop() {
        for l in 0..alphabet.len() {
            let k = alphabet.arity(l);
            for pos in 0..k {
                for others in tuples(m, k - 1) {
                    let mut ax = others.clone();
                    ax.insert(pos, x);
                    let mut ay = others;
                    ay.insert(pos, y);
                    let (u, v) = (algebra.apply(l, &ax), algebra.apply(l, &ay));
                    if uf.union(u, v) {
                        work.push((u, v));
                    }
                }
            }
        }
    }
    Congruence::from_union_find(&mut uf, m)
}

pub fn principal_congruence(algebra: &FiniteAlgebra, a: usize, b: usize) -> Congruence {
    congruence_generated_by(algebra, &[(a, b)])
}

/// Default carrier limit for congruence enumeration.
pub const CONGRUENCE_CAP: usize = 8;

/// Every congruence, as joins of principal congruences. Sorted by
/// decreasing number of blocks, so the identity comes first and the full
/// congruence last.
pub fn all_congruences(algebra: &FiniteAlgebra, cap: usize) -> Result<Vec<Congruence>> {
    let m = algebra.size();
    if m > cap {
        return Err(Error::CapExceeded {
            what: "congruence enumeration carrier",
            limit: cap,
        });
    }
    let principals: Vec<Congruence> = principal_set(algebra).into_iter().collect();
    let mut found: BTreeSet<Congruence> = BTreeSet::new();
    found.insert(Congruence::identity(m));
    let mut frontier: Vec<Congruence> = vec![Congruence::identity(m)];
    while let Some(c) = frontier.pop() {
        for p in &principals {
            let j = c.join(p);
            if found.insert(j.clone()) {
                frontier.push(j);
            }
        }
    }
    let mut all: Vec<Congruence> = found.into_iter().collect();
    all.sort_by(|x, y| y.num_blocks().cmp(&x.num_blocks()).then_with(|| x.cmp(y)));
    Ok(all)
}

fn principal_set(algebra: &FiniteAlgebra) -> BTreeSet<Congruence> {
    let m = algebra.size();
    let mut set = BTreeSet::new();
    for a in 0..m {
        for b in a + 1..m {
            set.insert(principal_congruence(algebra, a, b));
        }
    }
    set
}

/// The inclusion-minimal non-identity congruences; these are principal.
pub fn minimal_nontrivial_congruences(algebra: &FiniteAlgebra) -> Vec<Congruence> {
    let principals: Vec<Congruence> = principal_set(algebra).into_iter().filter(|c| !c.is_identity()).collect();
    principals
        .iter()
        .filter(|c| !principals.iter().any(|d| d != *c && d.refines(c)))
        .cloned()
        .collect()
}

/// The quotient algebra; block `i` of `c` becomes element `i`.
pub fn quotient(algebra: &FiniteAlgebra, c: &Congruence) -> Result<FiniteAlgebra> {
    if c.size() != algebra.size() {
        return Err(Error::invalid("partition and algebra sizes differ"));
    }
    if !is_compatible(algebra, c) {
        return Err(Error::invalid("partition is not compatible with the operations"));
    }
    let reps: Vec<usize> = c.blocks().iter().map(|b| b[0]).collect();
    FiniteAlgebra::from_fn(algebra.alphabet().clone(), reps.len(), |a, args| {
        let orig: Vec<usize> = args.iter().map(|&x| reps[x]).collect();
        c.class_of(algebra.apply(a, &orig))
    })
}

/// Limits for polynomial generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolCaps {
    /// Largest polynomial arity accepted.
    pub max_arity: usize,
    /// Stop generating once this many functions are known.
    pub max_functions: usize,
    /// Largest carrier for which binary polynomials are generated.
    pub max_binary_carrier: usize,
}

impl Default for PolCaps {
    fn default() -> Self {
        PolCaps {
            max_arity: 2,
            max_functions: 20000,
            max_binary_carrier: 4,
        }
    }
}

/// A set of `arity`-ary polynomial operations stored as tables over
/// `tuples(size, arity)`.
#[derive(Debug, Clone)]
pub struct PolFunctions {
    pub arity: usize,
    pub size: usize,
    pub tables: Vec<Vec<usize>>,
    /// Generation stopped before reaching a fixpoint.
    pub capped: bool,
}

impl PolFunctions {
    pub fn contains(&self, table: &[usize]) -> bool {
        self.tables.iter().any(|t| t == table)
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// Evaluates function `f` at a tuple of elements.
    pub fn apply(&self, f: usize, args: &[usize]) -> usize {
        let idx = args.iter().fold(0, |acc, &e| acc * self.size + e);
        self.tables[f][idx]
    }
}

/// Closes projections and constants under the algebra's operations, applied
/// pointwise. Stops at the fixpoint, after `max_depth` rounds, or once
/// `max_functions` are known.
pub fn generate_polynomials_bounded(
    algebra: &FiniteAlgebra,
    arity: usize,
    max_functions: usize,
    max_depth: Option<usize>,
) -> PolFunctions {
    let m = algebra.size();
    let points: Vec<Vec<usize>> = tuples(m, arity).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut tables: Vec<Vec<usize>> = Vec::new();
    fn push(seen: &mut HashSet<Vec<usize>>, t: Vec<usize>, tables: &mut Vec<Vec<usize>>) {
        if seen.insert(t.clone()) {
            tables.push(t);
        }
    }
    for v in 0..arity {
        push(&mut seen, points.iter().map(|p| p[v]).collect(), &mut tables);
    }
    for e in 0..m {
        push(&mut seen, vec![e; points.len()], &mut tables);
    }
    let alphabet = algebra.alphabet();
    // every function on the points is already present
    let full = u32::try_from(points.len()).ok().and_then(|e| m.checked_pow(e));
    let mut level_start = 0;
    let mut depth = 0;
    let mut capped = false;
    let mut buf = vec![0; points.len()];
    let mut args = Vec::new();
    loop {
        if full.is_some_and(|f| tables.len() >= f) {
            break;
        }
        if tables.len() >= max_functions {
            capped = true;
            break;
        }
        if max_depth.is_some_and(|d| depth >= d) {
            break;
        }
        let level_end = tables.len();
        'letters: for a in 0..alphabet.len() {
            let k = alphabet.arity(a);
            // position j holds the first argument drawn from the newest level
            for j in 0..k {
                let mut pick = vec![0; k];
                pick[j] = level_start;
                if j > 0 && level_start == 0 {
                    continue;
                }
                loop {
                    for (p, slot) in buf.iter_mut().enumerate() {
                        args.clear();
                        args.extend(pick.iter().map(|&i| tables[i][p]));
                        *slot = algebra.apply(a, &args);
                    }
                    if !seen.contains(&buf) {
                        push(&mut seen, buf.clone(), &mut tables);
                        if tables.len() >= max_functions {
                            break 'letters;
                        }
                    }
                    // odometer: before j ranges over old levels, j over the newest, after j over all
                    let mut i = k;
                    loop {
                        if i == 0 {
                            break;
                        }
                        i -= 1;
                        let (lo, hi) = match i.cmp(&j) {
                            std::cmp::Ordering::Less => (0, level_start),
                            std::cmp::Ordering::Equal => (level_start, level_end),
                            std::cmp::Ordering::Greater => (0, level_end),
                        };
                        pick[i] += 1;
                        if pick[i] < hi {
                            break;
                        }
                        pick[i] = lo;
                        if i == 0 {
                            i = usize::MAX;
                            break;
                        }
                    }
                    if i == usize::MAX {
                        break;
                    }
                }
            }
        }
        depth += 1;
        if tables.len() == level_end {
            break;
        }
        level_start = level_end;
    }
    PolFunctions {
        arity,
        size: m,
        tables,
        capped,
    }
}

/// Generates `Pol_arity` up to the caps.
pub fn generate_polynomials(algebra: &FiniteAlgebra, arity: usize, caps: PolCaps) -> Result<PolFunctions> {
    if arity > caps.max_arity {
        return Err(Error::CapExceeded {
            what: "polynomial arity",
            limit: caps.max_arity,
        });
    }
    if arity >= 2 && algebra.size() > caps.max_binary_carrier {
        return Err(Error::CapExceeded {
            what: "carrier for binary polynomials",
            limit: caps.max_binary_carrier,
        });
    }
    Ok(generate_polynomials_bounded(algebra, arity, caps.max_functions, None))
}

/// Every unary polynomial is constant or a bijection.
pub fn is_minimal_palfy(algebra: &FiniteAlgebra, caps: PolCaps) -> Result<bool> {
    let pol = generate_polynomials(algebra, 1, caps)?;
    if pol.capped {
        return Err(Error::CapExceeded {
            what: "unary polynomials",
            limit: caps.max_functions,
        });
    }
    Ok(pol.tables.iter().all(|t| {
        let distinct: BTreeSet<usize> = t.iter().copied().collect();
        distinct.len() == 1 || distinct.len() == t.len()
    }))
}

/// A pair `(a0, a1)` on which a binary polynomial behaves like a two-element
/// join (or meet) with `a0` as the first element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairWitness {
    pub a0: usize,
    pub a1: usize,
    /// Table of the binary polynomial over `tuples(size, 2)`.
    pub table: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PairReport {
    pub pairs: Vec<PairWitness>,
    /// Binary polynomial generation hit its cap, so pairs may be missing.
    pub under_approximation: bool,
}

/// Checks `f(a0,a0)=a0` and `f(a0,a1)=f(a1,a0)=f(a1,a1)=a1`.
pub fn acts_like_or(size: usize, table: &[usize], a0: usize, a1: usize) -> bool {
    let f = |x: usize, y: usize| table[x * size + y];
    a0 != a1 && f(a0, a0) == a0 && f(a0, a1) == a1 && f(a1, a0) == a1 && f(a1, a1) == a1
}

/// All ∨-pairs, with the first witnessing polynomial for each.
pub fn or_pairs(algebra: &FiniteAlgebra, caps: PolCaps) -> Result<PairReport> {
    let m = algebra.size();
    let pol = generate_polynomials(algebra, 2, caps)?;
    let mut pairs = Vec::new();
    for a0 in 0..m {
        for a1 in 0..m {
            if let Some(t) = pol.tables.iter().find(|t| acts_like_or(m, t, a0, a1)) {
                pairs.push(PairWitness {
                    a0,
                    a1,
                    table: t.clone(),
                });
            }
        }
    }
    Ok(PairReport {
        pairs,
        under_approximation: pol.capped,
    })
}

/// All ∧-pairs: `f(a1,a1)=a1` and `a0` everywhere else. A ∧-pair `(a0,a1)`
/// is exactly a ∨-pair `(a1,a0)`.
pub fn and_pairs(algebra: &FiniteAlgebra, caps: PolCaps) -> Result<PairReport> {
    let mut report = or_pairs(algebra, caps)?;
    for p in &mut report.pairs {
        std::mem::swap(&mut p.a0, &mut p.a1);
    }
    report.pairs.sort_by_key(|p| (p.a0, p.a1));
    Ok(report)
}

/// A concrete failure of the strongly-abelian implication:
/// `f(a) = f(b)` but `f(a0, c1..cn) != f(b0, c1..cn)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianViolation {
    pub arity: usize,
    pub table: Vec<usize>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// `c[0]` is unused by the implication and set to `a[0]`.
    pub c: Vec<usize>,
}

impl AbelianViolation {
    /// Re-evaluates the instance.
    pub fn holds(&self, size: usize, c: &Congruence) -> bool {
        let f = |args: &[usize]| self.table[args.iter().fold(0, |acc, &e| acc * size + e)];
        let related = (0..self.arity).all(|i| c.related(self.a[i], self.b[i]) && c.related(self.a[i], self.c[i]));
        let mut ac = self.c.clone();
        ac[0] = self.a[0];
        let mut bc = self.c.clone();
        bc[0] = self.b[0];
        related && f(&self.a) == f(&self.b) && f(&ac) != f(&bc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbelianVerdict {
    Violated(AbelianViolation),
    /// No violation among the polynomials explored. Not a proof.
    PassedBounded { arity_bound: usize, depth_bound: usize },
}

/// Searches polynomials of arity `2..=arity_bound`, generated to
/// `depth_bound` rounds, for a violation of strong abelianness of `c`.
pub fn strongly_abelian_check(
    algebra: &FiniteAlgebra,
    c: &Congruence,
    arity_bound: usize,
    depth_bound: usize,
) -> AbelianVerdict {
    let m = algebra.size();
    let blocks = c.blocks();
    for n in 2..=arity_bound {
        let pol = generate_polynomials_bounded(algebra, n, 20000, Some(depth_bound));
        // tuples a, b related componentwise
        let related_tuples: Vec<(Vec<usize>, Vec<usize>)> = tuples(m, n)
            .flat_map(|a| {
                let choices: Vec<&Vec<usize>> = a.iter().map(|&x| &blocks[c.class_of(x)]).collect();
                tuples_over(&choices).into_iter().map(move |b| (a.clone(), b))
            })
            .collect();
        for table in &pol.tables {
            let f = |args: &[usize]| table[args.iter().fold(0, |acc, &e| acc * m + e)];
            for (a, b) in &related_tuples {
                if a == b || f(a) != f(b) {
                    continue;
                }
                let choices: Vec<&Vec<usize>> = a[1..].iter().map(|&x| &blocks[c.class_of(x)]).collect();
                for rest in tuples_over(&choices) {
                    let mut ac = vec![a[0]];
                    ac.extend(&rest);
                    let mut bc = vec![b[0]];
                    bc.extend(&rest);
                    if f(&ac) != f(&bc) {
                        return AbelianVerdict::Violated(AbelianViolation {
                            arity: n,
                            table: table.clone(),
                            a: a.clone(),
                            b: b.clone(),
                            c: ac,
                        });
                    }
                }
            }
        }
    }
    AbelianVerdict::PassedBounded {
        arity_bound,
        depth_bound,
    }
}

fn tuples_over(choices: &[&Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for options in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&o| {
                    let mut t = prefix.clone();
                    t.push(o);
                    t
                })
            })
            .collect();
    }
    out
}

/// The two-element lattice `({0,1}, join, meet)`.
pub fn two_element_lattice() -> FiniteAlgebra {
    let sig = RankedAlphabet::signature([("join", 2), ("meet", 2)]).expect("static alphabet");
    FiniteAlgebra::from_fn(sig, 2, |a, args| if a == 0 { args[0] | args[1] } else { args[0] & args[1] })
        .expect("static tables")
}

/// Outcome of the lattice-divisor screen.
#[derive(Debug, Clone)]
pub struct LatticeDivision {
    /// The algebra whose operations were assigned: the input itself, or a
    /// two-operation algebra of binary polynomials.
    pub pool: FiniteAlgebra,
    pub witness: DivisionWitness,
}

/// Whether the two-element lattice divides `algebra`. With
/// `use_polynomial_closure`, any two binary polynomials may play join and
/// meet.
pub fn lattice_divides(
    algebra: &FiniteAlgebra,
    use_polynomial_closure: bool,
    divide: DivideCaps,
    pol_caps: PolCaps,
) -> Result<Option<LatticeDivision>> {
    let lattice = two_element_lattice();
    if !use_polynomial_closure {
        return Ok(syntactic::divides(&lattice, algebra, divide)?.map(|witness| LatticeDivision {
            pool: algebra.clone(),
            witness,
        }));
    }
    let m = algebra.size();
    if m > divide.max_carrier {
        return Err(Error::CapExceeded {
            what: "dividing algebra carrier",
            limit: divide.max_carrier,
        });
    }
    let pol = generate_polynomials(algebra, 2, pol_caps)?;
    // A two-block quotient of a subuniverse is a pair of disjoint sets
    // (B0, B1); join must send B_i x B_j into B_{max(i,j)}, meet into
    // B_{min(i,j)}.
    for labels in tuples(3, m) {
        let b0: Vec<usize> = (0..m).filter(|&e| labels[e] == 1).collect();
        let b1: Vec<usize> = (0..m).filter(|&e| labels[e] == 2).collect();
        if b0.is_empty() || b1.is_empty() {
            continue;
        }
        let block = |e: usize| match labels[e] {
            1 => Some(0),
            2 => Some(1),
            _ => None,
        };
        let acts = |t: &Vec<usize>, op: fn(usize, usize) -> usize| {
            b0.iter().chain(&b1).all(|&x| {
                b0.iter().chain(&b1).all(|&y| {
                    block(t[x * m + y]) == Some(op(block(x).unwrap(), block(y).unwrap()))
                })
            })
        };
        let Some(join) = pol.tables.iter().find(|t| acts(t, |i, j| i | j)) else {
            continue;
        };
        let Some(meet) = pol.tables.iter().find(|t| acts(t, |i, j| i & j)) else {
            continue;
        };
        let pool = FiniteAlgebra::new(lattice.alphabet().clone(), m, vec![join.clone(), meet.clone()])?;
        if let Some(witness) = syntactic::divides(&lattice, &pool, divide)? {
            return Ok(Some(LatticeDivision { pool, witness }));
        }
    }
    Ok(None)
}

/// Separation status of one ∨-pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSeparation {
    pub a0: usize,
    pub a1: usize,
    /// `a0 ∉ mix{a1}` or `a1 ∉ mix{a0}`.
    pub separable: bool,
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub pairs: Vec<PairSeparation>,
    /// The ∨-pair list may be incomplete.
    pub under_approximation: bool,
}

impl SeparationReport {
    pub fn all_separable(&self) -> bool {
        self.pairs.iter().all(|p| p.separable)
    }
}

/// Checks every ∨-pair of the automaton's algebra for separability by a
/// deterministic top-down language. An inseparable pair shows that the
/// language is not a path language.
pub fn orpair_separation(dbta: &Dbta, pol_caps: PolCaps, caps: Caps) -> Result<SeparationReport> {
    let alg = dbta.algebra();
    let report = or_pairs(alg, pol_caps)?;
    let mut mix_of: std::collections::HashMap<usize, BTreeSet<usize>> = std::collections::HashMap::new();
    let mut mix = |e: usize| -> Result<BTreeSet<usize>> {
        if let Some(s) = mix_of.get(&e) {
            return Ok(s.clone());
        }
        let s = paths::mix_elements(alg, &BTreeSet::from([e]), caps)?;
        mix_of.insert(e, s.clone());
        Ok(s)
    };
    let mut pairs = Vec::new();
    for p in &report.pairs {
        let separable = !mix(p.a1)?.contains(&p.a0) || !mix(p.a0)?.contains(&p.a1);
        pairs.push(PairSeparation {
            a0: p.a0,
            a1: p.a1,
            separable,
        });
    }
    Ok(SeparationReport {
        pairs,
        under_approximation: report.under_approximation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntactic::{isomorphism, verify_division};

    fn semilattice_with_constants() -> FiniteAlgebra {
        let sig = RankedAlphabet::new([("and", 2), ("one", 0), ("zero", 0)]).unwrap();
        FiniteAlgebra::from_fn(sig, 2, |a, args| match a {
            0 => args[0] & args[1],
            1 => 1,
            _ => 0,
        })
        .unwrap()
    }

    fn one_element() -> FiniteAlgebra {
        FiniteAlgebra::from_fn(fixtures::sig_pott(), 1, |_, _| 0).unwrap()
    }

    #[test]
    fn principal_congruences() {
        assert!(principal_congruence(&semilattice_with_constants(), 0, 1).is_full());
        let pott = fixtures::alg_pott();
        assert!(principal_congruence(&pott, 0, 1).is_full());
        assert!(principal_congruence(&pott, 1, 1).is_identity());
        // merging 0 with ⊥ also collapses everything: f1(0)=1, f1(⊥)=⊥
        assert!(principal_congruence(&pott, 0, 2).is_full());
    }

    #[test]
    fn congruence_lattices() {
        assert_eq!(all_congruences(&one_element(), 8).unwrap(), vec![Congruence::identity(1)]);
        let semi = all_congruences(&fixtures::semilattice(), 8).unwrap();
        assert_eq!(semi, vec![Congruence::identity(2), Congruence::full(2)]);
        let pott = all_congruences(&fixtures::alg_pott(), 8).unwrap();
        assert!(pott.iter().all(|c| is_compatible(&fixtures::alg_pott(), c)));
        // the only nontrivial principal congruence is the full one
        assert_eq!(pott, vec![Congruence::identity(3), Congruence::full(3)]);
        assert_eq!(minimal_nontrivial_congruences(&fixtures::alg_pott()), vec![Congruence::full(3)]);
        assert!(all_congruences(
            &FiniteAlgebra::from_fn(fixtures::sig_line(), 9, |_, _| 0).unwrap(),
            8
        )
        .is_err());
    }

    #[test]
    fn congruences_match_partition_oracle() {
        let redundant = fixtures::l_pott_redundant().algebra().clone();
        for alg in [fixtures::alg_pott(), fixtures::semilattice(), fixtures::lattice(), redundant] {
            let listed: BTreeSet<Congruence> = all_congruences(&alg, 8).unwrap().into_iter().collect();
            let m = alg.size();
            let brute: BTreeSet<Congruence> = tuples(m, m)
                .map(|labels| Congruence::from_labels(&labels))
                .filter(|c| is_compatible(&alg, c))
                .collect();
            assert_eq!(listed, brute);
        }
    }

    #[test]
    fn quotients() {
        let pott = fixtures::alg_pott();
        assert!(isomorphism(&quotient(&pott, &Congruence::identity(3)).unwrap(), &pott).is_some());
        assert_eq!(quotient(&pott, &Congruence::full(3)).unwrap().size(), 1);
        let red = fixtures::l_pott_redundant().algebra().clone();
        let kernel = Congruence::from_labels(&(0..6).map(|x| x / 2).collect::<Vec<_>>());
        assert!(isomorphism(&quotient(&red, &kernel).unwrap(), &pott).is_some());
        assert!(quotient(&pott, &Congruence::from_labels(&[0, 0, 1])).is_err());
    }

    #[test]
    fn polynomials() {
        let semi = fixtures::semilattice();
        let pol = generate_polynomials(&semi, 1, PolCaps::default()).unwrap();
        assert_eq!(pol.len(), 3);
        assert!(!pol.capped);
        let pott = fixtures::alg_pott();
        let pol = generate_polynomials(&pott, 1, PolCaps::default()).unwrap();
        assert!(pol.contains(pott.table(1)));
        let pol2 = generate_polynomials(&pott, 2, PolCaps::default()).unwrap();
        for v in 0..2 {
            assert!(pol2.contains(&tuples(3, 2).map(|t| t[v]).collect::<Vec<_>>()));
        }
        // closure
        for t in &pol2.tables {
            let image: Vec<usize> = t.iter().map(|&x| pott.apply(1, &[x])).collect();
            assert!(pol2.contains(&image));
        }
    }

    #[test]
    fn palfy_minimality() {
        assert!(is_minimal_palfy(&fixtures::semilattice(), PolCaps::default()).unwrap());
        assert!(!is_minimal_palfy(&fixtures::alg_pott(), PolCaps::default()).unwrap());
        assert!(is_minimal_palfy(&one_element(), PolCaps::default()).unwrap());
    }

    #[test]
    fn or_and_pairs() {
        let or = fixtures::l_true_or().algebra().clone();
        let report = or_pairs(&or, PolCaps::default()).unwrap();
        assert!(report.pairs.iter().any(|p| (p.a0, p.a1) == (0, 1) && p.table == or.table(0)));
        let semi = fixtures::semilattice();
        let report = or_pairs(&semi, PolCaps::default()).unwrap();
        assert_eq!(report.pairs.iter().map(|p| (p.a0, p.a1)).collect::<Vec<_>>(), vec![(1, 0)]);
        assert_eq!(and_pairs(&semi, PolCaps::default()).unwrap().pairs[0].a0, 0);
        assert!(or_pairs(&one_element(), PolCaps::default()).unwrap().pairs.is_empty());
        for p in or_pairs(&fixtures::alg_pott(), PolCaps::default()).unwrap().pairs {
            assert!(acts_like_or(3, &p.table, p.a0, p.a1));
        }
    }

    #[test]
    fn strong_abelianness() {
        let semi = fixtures::semilattice();
        match strongly_abelian_check(&semi, &Congruence::full(2), 2, 2) {
            AbelianVerdict::Violated(v) => assert!(v.holds(2, &Congruence::full(2))),
            other => panic!("expected a violation, got {other:?}"),
        }
        let unary = FiniteAlgebra::from_fn(fixtures::sig_line(), 3, |a, args| if a == 0 { (args[0] + 1) % 3 } else { 0 })
            .unwrap();
        assert!(matches!(
            strongly_abelian_check(&unary, &Congruence::full(3), 3, 3),
            AbelianVerdict::PassedBounded { .. }
        ));
        assert!(matches!(
            strongly_abelian_check(&fixtures::alg_pott(), &Congruence::identity(3), 2, 2),
            AbelianVerdict::PassedBounded { .. }
        ));
    }

    #[test]
    fn lattice_division() {
        let lattice = two_element_lattice();
        let caps = (DivideCaps::default(), PolCaps::default());
        let w = lattice_divides(&lattice, false, caps.0, caps.1).unwrap().unwrap();
        assert!(verify_division(&lattice, &w.pool, &w.witness));
        assert!(lattice_divides(&fixtures::semilattice(), false, caps.0, caps.1).unwrap().is_none());
        assert!(lattice_divides(&fixtures::semilattice(), true, caps.0, caps.1).unwrap().is_none());
        assert!(lattice_divides(&fixtures::alg_pott(), false, caps.0, caps.1).unwrap().is_none());
        let bool_alg = fixtures::l_true_bool().algebra().clone();
        let w = lattice_divides(&bool_alg, true, caps.0, caps.1).unwrap().unwrap();
        assert!(verify_division(&lattice, &w.pool, &w.witness));
    }

    #[test]
    fn or_pair_separation() {
        let caps = Caps::default();
        let and = syntactic::syntactic_algebra(&fixtures::l_true_and()).minimal;
        let r = orpair_separation(&and, PolCaps::default(), caps).unwrap();
        assert!(!r.pairs.is_empty());
        assert!(r.all_separable());
        let bool_lang = syntactic::syntactic_algebra(&fixtures::l_true_bool()).minimal;
        assert!(!orpair_separation(&bool_lang, PolCaps::default(), caps).unwrap().all_separable());
        let one = Dbta::new(one_element(), [0]).unwrap();
        let r = orpair_separation(&one, PolCaps::default(), caps).unwrap();
        assert!(r.pairs.is_empty() && r.all_separable());
    }
}
