use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{literals, PatternError, PatternKind, PatternMetrics, RegexNode};
use crate::automaton::SymbolId;

type Words = BTreeSet<Vec<SymbolId>>;

/// Length of the shortest word in `L(ast)`.
pub fn min_word_len(ast: &RegexNode) -> usize {
    match ast {
        RegexNode::Empty | RegexNode::Star(_) => 0,
        RegexNode::Literal(_) => 1,
        RegexNode::Concat(l, r) => min_word_len(l) + min_word_len(r),
        RegexNode::Alt(l, r) => min_word_len(l).min(min_word_len(r)),
    }
}

/// Whether `L(ast)` contains a non-empty word. Every sub-language is
/// non-empty because the grammar has no empty-set constant.
fn has_nonempty_word(ast: &RegexNode) -> bool {
    match ast {
        RegexNode::Empty => false,
        RegexNode::Literal(_) => true,
        RegexNode::Concat(l, r) | RegexNode::Alt(l, r) => has_nonempty_word(l) || has_nonempty_word(r),
        RegexNode::Star(inner) => has_nonempty_word(inner),
    }
}

/// Type-I exactly when some star's body can produce a non-empty word.
pub fn classify(ast: &RegexNode) -> PatternKind {
    fn infinite(node: &RegexNode) -> bool {
        match node {
            RegexNode::Empty | RegexNode::Literal(_) => false,
            RegexNode::Concat(l, r) | RegexNode::Alt(l, r) => infinite(l) || infinite(r),
            RegexNode::Star(inner) => has_nonempty_word(inner) || infinite(inner),
        }
    }
    if infinite(ast) {
        PatternKind::Infinite
    } else {
        PatternKind::Finite
    }
}

pub fn pattern_metrics(ast: &RegexNode) -> PatternMetrics {
    fn walk(node: &RegexNode, depth: usize, m: &mut PatternMetrics) {
        match node {
            RegexNode::Empty => {}
            RegexNode::Literal(_) => m.length += 1,
            RegexNode::Concat(l, r) => {
                walk(l, depth, m);
                walk(r, depth, m);
            }
            RegexNode::Alt(l, r) => {
                m.length += 1;
                m.operator_count += 1;
                walk(l, depth, m);
                walk(r, depth, m);
            }
            RegexNode::Star(inner) => {
                m.length += 1;
                m.operator_count += 1;
                m.star_depth = m.star_depth.max(depth + 1);
                walk(inner, depth + 1, m);
            }
        }
    }
    let mut m = PatternMetrics {
        length: 0,
        alphabet_size: literals(ast).len(),
        operator_count: 0,
        star_depth: 0,
    };
    walk(ast, 0, &mut m);
    m
}

/// All words of `L(ast)` of length at most `max_length`.
///
/// Fails with [`PatternError::CapExceeded`] when there are more than `cap`
/// of them. Sub-languages are trimmed by the shortest word of their sibling,
/// so no intermediate set is larger than the final answer.
pub fn enumerate_language(ast: &RegexNode, max_length: usize, cap: usize) -> Result<Words, PatternError> {
    enumerate(ast, max_length, cap)
}

fn insert_capped(set: &mut Words, word: Vec<SymbolId>, cap: usize) -> Result<bool, PatternError> {
    let inserted = set.insert(word);
    if set.len() > cap {
        return Err(PatternError::CapExceeded { cap });
    }
    Ok(inserted)
}

fn enumerate(node: &RegexNode, max: usize, cap: usize) -> Result<Words, PatternError> {
    let mut out = Words::new();
    match node {
        RegexNode::Empty => {
            insert_capped(&mut out, Vec::new(), cap)?;
        }
        RegexNode::Literal(s) => {
            if max >= 1 {
                insert_capped(&mut out, alloc::vec![*s], cap)?;
            }
        }
        RegexNode::Alt(l, r) => {
            out = enumerate(l, max, cap)?;
            for w in enumerate(r, max, cap)? {
                insert_capped(&mut out, w, cap)?;
            }
        }
        RegexNode::Concat(l, r) => {
            let (lmin, rmin) = (min_word_len(l), min_word_len(r));
            if lmin + rmin > max {
                return Ok(out);
            }
            let left = enumerate(l, max - rmin, cap)?;
            let right = enumerate(r, max - lmin, cap)?;
            for a in &left {
                for b in right.iter().filter(|b| a.len() + b.len() <= max) {
                    let mut w = a.clone();
                    w.extend_from_slice(b);
                    insert_capped(&mut out, w, cap)?;
                }
            }
        }
        RegexNode::Star(inner) => {
            let pieces: Vec<Vec<SymbolId>> = enumerate(inner, max, cap)?
                .into_iter()
                .filter(|w| !w.is_empty())
                .collect();
            insert_capped(&mut out, Vec::new(), cap)?;
            let mut frontier: Vec<Vec<SymbolId>> = alloc::vec![Vec::new()];
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for f in &frontier {
                    for p in pieces.iter().filter(|p| f.len() + p.len() <= max) {
                        let mut w = f.clone();
                        w.extend_from_slice(p);
                        if insert_capped(&mut out, w.clone(), cap)? {
                            next.push(w);
                        }
                    }
                }
                frontier = next;
            }
        }
    }
    Ok(out)
}
