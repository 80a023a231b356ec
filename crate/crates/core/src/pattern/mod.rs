//! Failure patterns: regular expressions over template IDs.
//!
//! The grammar has union `|`, Kleene star `*`, juxtaposition for
//! concatenation, parentheses and the token `eps` for the empty word.
//! Template IDs are whitespace- or metacharacter-delimited tokens, so
//! multi-character IDs such as `t17` work. Precedence is star, then
//! concatenation, then union; both binary operators associate to the left.

mod containment;
mod language;
mod nfa;
mod parse;
mod sample;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::automaton::SymbolId;

pub use containment::{check_containment, check_inclusion, ContainmentReport, DEFAULT_SUBSET_BUDGET};
pub use language::{classify, enumerate_language, min_word_len, pattern_metrics};
pub use nfa::Nfa;
pub use parse::{parse_pattern, render};
pub use sample::{sample_word, sample_word_bounded};

/// A regular expression over interned template IDs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RegexNode {
    /// The empty word ε.
    Empty,
    Literal(SymbolId),
    Concat(Box<RegexNode>, Box<RegexNode>),
    Alt(Box<RegexNode>, Box<RegexNode>),
    Star(Box<RegexNode>),
}

impl RegexNode {
    pub fn literal(s: u32) -> Self {
        RegexNode::Literal(SymbolId(s))
    }

    pub fn concat(l: RegexNode, r: RegexNode) -> Self {
        RegexNode::Concat(Box::new(l), Box::new(r))
    }

    pub fn alt(l: RegexNode, r: RegexNode) -> Self {
        RegexNode::Alt(Box::new(l), Box::new(r))
    }

    pub fn star(inner: RegexNode) -> Self {
        RegexNode::Star(Box::new(inner))
    }

    /// Number of nodes in the tree.
    pub fn node_count(&self) -> usize {
        match self {
            RegexNode::Empty | RegexNode::Literal(_) => 1,
            RegexNode::Concat(l, r) | RegexNode::Alt(l, r) => 1 + l.node_count() + r.node_count(),
            RegexNode::Star(inner) => 1 + inner.node_count(),
        }
    }

    /// Calls `f` on every literal, left to right.
    pub fn for_each_literal(&self, f: &mut impl FnMut(SymbolId)) {
        match self {
            RegexNode::Empty => {}
            RegexNode::Literal(s) => f(*s),
            RegexNode::Concat(l, r) | RegexNode::Alt(l, r) => {
                l.for_each_literal(f);
                r.for_each_literal(f);
            }
            RegexNode::Star(inner) => inner.for_each_literal(f),
        }
    }
}

/// Whether a pattern's language is finite (Type-F) or infinite (Type-I).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PatternKind {
    #[serde(rename = "F")]
    Finite,
    #[serde(rename = "I")]
    Infinite,
}

impl PatternKind {
    pub fn code(self) -> &'static str {
        match self {
            PatternKind::Finite => "F",
            PatternKind::Infinite => "I",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "F" | "f" => Some(PatternKind::Finite),
            "I" | "i" => Some(PatternKind::Infinite),
            _ => None,
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Type-{}", self.code())
    }
}

/// Structural size measures of a pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternMetrics {
    /// Literal leaves plus operator (union and star) nodes.
    pub length: usize,
    /// Distinct template IDs used.
    pub alphabet_size: usize,
    /// Union plus star nodes; each binary union counts once.
    pub operator_count: usize,
    /// Maximum nesting depth of stars.
    pub star_depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown template ID `{0}` in pattern")]
    UnknownSymbol(String),
    #[error("pattern `{id}` is declared {declared} but its language is {actual}")]
    TypeMismatch {
        id: String,
        declared: PatternKind,
        actual: PatternKind,
    },
    #[error("language has more than {cap} words within the length bound")]
    CapExceeded { cap: usize },
    #[error("determinized pattern automaton exceeds {budget} states")]
    SizeLimit { budget: usize },
}

/// A compiled failure pattern bound to one behaviour model's alphabet.
#[derive(Clone, Debug)]
pub struct FailurePattern {
    pub id: String,
    pub model: String,
    pub expr: String,
    ast: RegexNode,
    kind: PatternKind,
    metrics: PatternMetrics,
    nfa: Nfa,
}

impl FailurePattern {
    /// Parses `expr` against `symbols` (position `i` is `SymbolId(i)`) and
    /// checks the declared type, if any, against the language cardinality.
    pub fn compile<S: AsRef<str>>(
        id: impl Into<String>,
        model: impl Into<String>,
        expr: impl Into<String>,
        symbols: &[S],
        declared: Option<PatternKind>,
    ) -> Result<Self, PatternError> {
        let id = id.into();
        let expr = expr.into();
        let ast = parse_pattern(&expr, symbols)?;
        let kind = classify(&ast);
        if let Some(declared) = declared {
            if declared != kind {
                return Err(PatternError::TypeMismatch {
                    id,
                    declared,
                    actual: kind,
                });
            }
        }
        Ok(Self::from_ast(id, model, expr, ast))
    }

    pub fn from_ast(id: impl Into<String>, model: impl Into<String>, expr: impl Into<String>, ast: RegexNode) -> Self {
        let kind = classify(&ast);
        let metrics = pattern_metrics(&ast);
        let nfa = Nfa::build(&ast);
        Self {
            id: id.into(),
            model: model.into(),
            expr: expr.into(),
            ast,
            kind,
            metrics,
            nfa,
        }
    }

    pub fn ast(&self) -> &RegexNode {
        &self.ast
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn metrics(&self) -> PatternMetrics {
        self.metrics
    }

    pub fn nfa(&self) -> &Nfa {
        &self.nfa
    }

    /// Whole-sequence membership in the pattern's language.
    pub fn matches(&self, word: &[SymbolId]) -> bool {
        self.nfa.matches(word)
    }
}

/// Whole-sequence membership of `word` in `L(ast)`.
pub fn matches(ast: &RegexNode, word: &[SymbolId]) -> bool {
    Nfa::build(ast).matches(word)
}

/// Collects the distinct literals of `ast` in ascending order.
pub fn literals(ast: &RegexNode) -> Vec<SymbolId> {
    let mut out = Vec::new();
    ast.for_each_literal(&mut |s| out.push(s));
    out.sort_unstable();
    out.dedup();
    out
}
