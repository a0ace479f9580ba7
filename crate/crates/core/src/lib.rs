//! Regular tree languages as finite algebras.
//!
//! The crate covers bottom-up automata and their syntactic algebras, the
//! path-word view of deterministic top-down automata, top-down transducers
//! and matrix powers, wreath products and temporal-logic cascades, and
//! structural checks on finite algebras.

pub mod automata;
pub mod cascade;
pub mod error;
pub mod fixtures;
pub mod oracle;
pub mod paths;
pub mod structure;
pub mod syntactic;
pub mod transduce;
pub mod trees;

pub use automata::{explore, tuples, BoolOp, Dbta, FiniteAlgebra};
pub use cascade::{Cascade, CtlFormula, Layer, Readout, SemiPoly, UntilSpec};
pub use error::{Caps, Error, Result};
pub use paths::{Dtta, PathNfa, Separator, Side};
pub use structure::{Congruence, PolCaps, PolFunctions};
pub use syntactic::{DivideCaps, DivisionWitness, SyntacticResult};
pub use transduce::{Dtop, MatrixHom, PolyTerm};
pub use trees::{
    enumerate_trees, parse_tree, path_words, render_tree, Context, PathSymbol, PathWord,
    RankedAlphabet, Term, Tree, TreeHom,
};
