//! Brute-force reference checks over bounded tree corpora.

use std::collections::BTreeSet;

use crate::automata::Dbta;
use crate::trees::{enumerate_trees, path_words, PathWord, Tree};

/// Path words of accepted trees up to `max_nodes`.
pub fn member_words(d: &Dbta, max_nodes: usize) -> BTreeSet<PathWord> {
    enumerate_trees(d.alphabet(), max_nodes)
        .into_iter()
        .filter(|t| d.accepts(t).unwrap_or(false))
        .flat_map(|t| path_words(&t))
        .collect()
}

/// Trees up to `max_nodes` all of whose path words occur in `words`, but
/// which `d` rejects.
pub fn mixes_outside(d: &Dbta, words: &BTreeSet<PathWord>, max_nodes: usize) -> Vec<Tree> {
    enumerate_trees(d.alphabet(), max_nodes)
        .into_iter()
        .filter(|t| path_words(t).is_subset(words) && !d.accepts(t).unwrap_or(true))
        .collect()
}

/// Bounded universal-path test: path words are collected from members of
/// up to `word_nodes` nodes and mixes are searched up to `tree_nodes`.
/// Returns a mix outside the language if one is found.
pub fn universal_path_violation(d: &Dbta, word_nodes: usize, tree_nodes: usize) -> Option<Tree> {
    let words = member_words(d, word_nodes);
    mixes_outside(d, &words, tree_nodes).into_iter().next()
}
