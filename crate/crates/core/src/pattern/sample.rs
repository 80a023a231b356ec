//! Random words from a pattern's language by random choices on the parse tree.
//!
//! A union picks uniformly among all branches of its (flattened) union chain,
//! and each star repeats its body a number of times drawn uniformly from
//! `0..=star_limit`.

use alloc::vec::Vec;

use rand::Rng;

use super::RegexNode;
use crate::automaton::SymbolId;

/// Draws one word of `L(ast)`.
pub fn sample_word<R: Rng + ?Sized>(ast: &RegexNode, rng: &mut R, star_limit: usize) -> Vec<SymbolId> {
    let mut out = Vec::new();
    let completed = emit(ast, rng, star_limit, usize::MAX, &mut out);
    debug_assert!(completed);
    out
}

/// Draws one word of `L(ast)`, abandoning the draw and returning `None` as
/// soon as it grows past `max_len`. Accepted words follow the same
/// distribution as [`sample_word`] conditioned on the length bound.
pub fn sample_word_bounded<R: Rng + ?Sized>(
    ast: &RegexNode,
    rng: &mut R,
    star_limit: usize,
    max_len: usize,
) -> Option<Vec<SymbolId>> {
    let mut out = Vec::new();
    emit(ast, rng, star_limit, max_len, &mut out).then_some(out)
}

fn emit<R: Rng + ?Sized>(
    node: &RegexNode,
    rng: &mut R,
    star_limit: usize,
    max_len: usize,
    out: &mut Vec<SymbolId>,
) -> bool {
    match node {
        RegexNode::Empty => true,
        RegexNode::Literal(s) => {
            out.push(*s);
            out.len() <= max_len
        }
        RegexNode::Concat(l, r) => emit(l, rng, star_limit, max_len, out) && emit(r, rng, star_limit, max_len, out),
        RegexNode::Alt(..) => {
            let mut branches = Vec::new();
            flatten_alt(node, &mut branches);
            let pick = branches[rng.random_range(0..branches.len())];
            emit(pick, rng, star_limit, max_len, out)
        }
        RegexNode::Star(inner) => {
            let reps = rng.random_range(0..=star_limit);
            (0..reps).all(|_| emit(inner, rng, star_limit, max_len, out))
        }
    }
}

fn flatten_alt<'a>(node: &'a RegexNode, out: &mut Vec<&'a RegexNode>) {
    match node {
        RegexNode::Alt(l, r) => {
            flatten_alt(l, out);
            flatten_alt(r, out);
        }
        other => out.push(other),
    }
}
