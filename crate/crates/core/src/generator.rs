//! Sequence generation.
//!
//! Normal sequences come from a random walk over the behaviour model that
//! only takes transitions from which an accepting state is still reachable
//! within the remaining length budget, choosing uniformly among them. Walks
//! that match a failure pattern are discarded and redrawn.
//!
//! Failure sequences are drawn from a per-pattern pool: an exact enumeration
//! for small finite languages, otherwise the deduplicated result of repeated
//! random sampling from the pattern's language.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::automaton::{BehaviourModel, SValue, SValueMap, SymbolId};
use crate::pattern::{enumerate_language, sample_word_bounded, FailurePattern, PatternError, PatternKind};

/// Retry budget for normal-sequence generation.
pub const DEFAULT_MAX_ATTEMPTS: usize = 1_000;
/// Number of language samples drawn per pattern when building a pool.
pub const DEFAULT_SAMPLES_PER_PATTERN: usize = 2_500;
/// Finite languages with at most this many words (within the length bound)
/// are enumerated instead of sampled.
pub const ENUMERATION_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("degenerate model: initial state `{state}` has sValue {svalue}, which exceeds the maximum sequence length {mlsl}")]
    Degenerate { state: String, svalue: SValue, mlsl: usize },
    #[error("invalid walk configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("no normal sequence found in {attempts} attempts: every walk matched a failure pattern")]
    AttemptsExhausted { attempts: usize },
    #[error("no failure pattern can produce a sequence of length 1..={mlsl} (patterns: {})", .patterns.join(", "))]
    EmptyPool { patterns: Vec<String>, mlsl: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Maximum log-sequence length.
    pub mlsl: usize,
    pub max_attempts: usize,
    /// Whether the empty sequence counts as a normal sequence.
    pub allow_empty: bool,
}

impl WalkConfig {
    pub fn new(mlsl: usize) -> Self {
        Self {
            mlsl,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            allow_empty: true,
        }
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        if self.mlsl == 0 {
            return Err(GenerateError::InvalidConfig("mlsl must be at least 1"));
        }
        if self.max_attempts == 0 {
            return Err(GenerateError::InvalidConfig("max_attempts must be at least 1"));
        }
        Ok(())
    }
}

/// Checks that a walk from the initial state can finish within `mlsl` steps.
pub fn check_walkable(model: &BehaviourModel, svalues: &SValueMap, mlsl: usize) -> Result<(), GenerateError> {
    let svalue = svalues.get(model.initial());
    match svalue {
        SValue::Finite(v) if v as usize <= mlsl => Ok(()),
        _ => Err(GenerateError::Degenerate {
            state: model.state_name(model.initial()).to_string(),
            svalue,
            mlsl,
        }),
    }
}

/// One bounded, uniformly random walk from the initial state to an accepting
/// state. The result is accepted by `model` and has at most `mlsl` symbols.
pub fn filtered_random_walk<R: Rng + ?Sized>(
    model: &BehaviourModel,
    svalues: &SValueMap,
    mlsl: usize,
    rng: &mut R,
) -> Result<Vec<SymbolId>, GenerateError> {
    check_walkable(model, svalues, mlsl)?;
    Ok(walk_unchecked(model, svalues, mlsl, rng))
}

fn walk_unchecked<R: Rng + ?Sized>(
    model: &BehaviourModel,
    svalues: &SValueMap,
    mlsl: usize,
    rng: &mut R,
) -> Vec<SymbolId> {
    let mut sequence = Vec::new();
    let mut state = model.initial();
    let mut budget = mlsl;
    while !model.is_accepting(state) {
        let edges = model.outgoing(state);
        let usable = |&&(_, target): &&(SymbolId, _)| svalues.get(target).is_below(budget);
        let options = edges.iter().filter(usable).count();
        // sValue(state) <= budget holds on entry and is preserved by every
        // filtered step, so some successor always has sValue < budget.
        assert!(
            options > 0,
            "filtered walk stranded at state `{}` with budget {budget}",
            model.state_name(state)
        );
        let pick = rng.random_range(0..options);
        let &(symbol, target) = edges
            .iter()
            .filter(usable)
            .nth(pick)
            .expect("pick is below the option count");
        sequence.push(symbol);
        state = target;
        budget -= 1;
    }
    sequence
}

/// Draws walks until one matches none of `patterns`.
pub fn generate_normal_sequence<R: Rng + ?Sized>(
    model: &BehaviourModel,
    svalues: &SValueMap,
    patterns: &[&FailurePattern],
    cfg: &WalkConfig,
    rng: &mut R,
) -> Result<Vec<SymbolId>, GenerateError> {
    cfg.validate()?;
    check_walkable(model, svalues, cfg.mlsl)?;
    for _ in 0..cfg.max_attempts {
        let sequence = walk_unchecked(model, svalues, cfg.mlsl, rng);
        if sequence.is_empty() && !cfg.allow_empty {
            continue;
        }
        if patterns.iter().all(|p| !p.matches(&sequence)) {
            return Ok(sequence);
        }
    }
    Err(GenerateError::AttemptsExhausted {
        attempts: cfg.max_attempts,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolMethod {
    Enumerated,
    Sampled,
}

/// How one pattern's pool was built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolMetadata {
    pub pattern_id: String,
    #[serde(rename = "type")]
    pub kind: PatternKind,
    pub method: PoolMethod,
    /// Language samples drawn; zero for enumerated pools.
    pub samples_drawn: usize,
    /// Star repetition bound used when sampling.
    pub star_limit: usize,
    /// Distinct words in the pool.
    pub words: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolEntry {
    pub pattern_id: String,
    pub words: Vec<Vec<SymbolId>>,
    pub metadata: PoolMetadata,
}

/// Per-pattern subsets of failure-pattern languages, restricted to words of
/// length `1..=mlsl`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailurePool {
    entries: Vec<PoolEntry>,
    mlsl: usize,
}

impl FailurePool {
    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn mlsl(&self) -> usize {
        self.mlsl
    }

    pub fn metadata(&self) -> Vec<PoolMetadata> {
        self.entries.iter().map(|e| e.metadata.clone()).collect()
    }

    /// Builds a pool directly from words, mainly for tests and tooling.
    pub fn from_words(mlsl: usize, entries: Vec<(String, Vec<Vec<SymbolId>>)>) -> Self {
        let entries = entries
            .into_iter()
            .map(|(pattern_id, words)| PoolEntry {
                metadata: PoolMetadata {
                    pattern_id: pattern_id.clone(),
                    kind: PatternKind::Finite,
                    method: PoolMethod::Enumerated,
                    samples_drawn: 0,
                    star_limit: 0,
                    words: words.len(),
                },
                pattern_id,
                words,
            })
            .collect();
        Self { entries, mlsl }
    }
}

/// Builds the failure pool for `patterns`.
///
/// Individual patterns may end up with empty pools; the call only fails when
/// every pool is empty.
pub fn build_failure_pool<R: Rng + ?Sized>(
    patterns: &[&FailurePattern],
    mlsl: usize,
    samples_per_pattern: usize,
    rng: &mut R,
) -> Result<FailurePool, GenerateError> {
    if samples_per_pattern == 0 {
        return Err(GenerateError::InvalidConfig("samples_per_pattern must be at least 1"));
    }
    let star_limit = mlsl;
    let mut entries = Vec::with_capacity(patterns.len());
    for pattern in patterns {
        let enumerated = match pattern.kind() {
            PatternKind::Finite => match enumerate_language(pattern.ast(), mlsl, ENUMERATION_CAP) {
                Ok(words) => Some(words),
                Err(PatternError::CapExceeded { .. }) => None,
                Err(other) => unreachable!("enumeration only fails on the cap: {other}"),
            },
            PatternKind::Infinite => None,
        };
        let (method, samples_drawn, mut words) = match enumerated {
            Some(words) => (PoolMethod::Enumerated, 0, words),
            None => {
                let mut words = BTreeSet::new();
                for _ in 0..samples_per_pattern {
                    if let Some(w) = sample_word_bounded(pattern.ast(), rng, star_limit, mlsl) {
                        words.insert(w);
                    }
                }
                (PoolMethod::Sampled, samples_per_pattern, words)
            }
        };
        words.remove(&Vec::new());
        let words: Vec<Vec<SymbolId>> = words.into_iter().collect();
        entries.push(PoolEntry {
            pattern_id: pattern.id.clone(),
            metadata: PoolMetadata {
                pattern_id: pattern.id.clone(),
                kind: pattern.kind(),
                method,
                samples_drawn,
                star_limit,
                words: words.len(),
            },
            words,
        });
    }
    if entries.iter().all(|e| e.words.is_empty()) {
        return Err(GenerateError::EmptyPool {
            patterns: patterns.iter().map(|p| p.id.clone()).collect(),
            mlsl,
        });
    }
    Ok(FailurePool { entries, mlsl })
}

/// Picks a pattern uniformly among those with a non-empty pool, then a word
/// uniformly from that pattern's pool. Draws are with replacement.
pub fn draw_failure_sequence<'p, R: Rng + ?Sized>(
    pool: &'p FailurePool,
    rng: &mut R,
) -> Result<(&'p [SymbolId], &'p str), GenerateError> {
    let usable = pool.entries.iter().filter(|e| !e.words.is_empty()).count();
    if usable == 0 {
        return Err(GenerateError::EmptyPool {
            patterns: pool.entries.iter().map(|e| e.pattern_id.clone()).collect(),
            mlsl: pool.mlsl,
        });
    }
    let entry = pool
        .entries
        .iter()
        .filter(|e| !e.words.is_empty())
        .nth(rng.random_range(0..usable))
        .expect("index below usable count");
    let word = &entry.words[rng.random_range(0..entry.words.len())];
    Ok((word.as_slice(), entry.pattern_id.as_str()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::tests::{example_document, example_model};
    use crate::rng::stream;
    use std::collections::{BTreeMap, BTreeSet};
    use std::vec;

    fn pattern(model: &BehaviourModel, id: &str, expr: &str) -> FailurePattern {
        FailurePattern::compile(id, "example", expr, model.symbol_names(), None).unwrap()
    }

    #[test]
    fn walks_are_accepted_and_bounded() {
        let m = example_model();
        let sv = m.compute_s_values().unwrap();
        let mut rng = stream(1, 0);
        let mut lengths = BTreeSet::new();
        for _ in 0..10_000 {
            let w = filtered_random_walk(&m, &sv, 5, &mut rng).unwrap();
            assert!(m.accepts(&w));
            assert!(w.len() <= 5);
            lengths.insert(w.len());
        }
        assert!(lengths.len() >= 2, "{lengths:?}");
    }

    #[test]
    fn walk_from_accepting_initial_state_is_empty() {
        let mut doc = example_document();
        doc.accepting.push("q0".into());
        let (m, _) = doc.into_model().unwrap();
        let sv = m.compute_s_values().unwrap();
        assert_eq!(filtered_random_walk(&m, &sv, 3, &mut stream(0, 0)).unwrap(), vec![]);
    }

    #[test]
    fn walk_budget_below_initial_s_value_is_degenerate() {
        let m = example_model();
        let sv = m.compute_s_values().unwrap();
        assert!(matches!(
            filtered_random_walk(&m, &sv, 1, &mut stream(0, 0)),
            Err(GenerateError::Degenerate {
                svalue: SValue::Finite(2),
                mlsl: 1,
                ..
            })
        ));
    }

    #[test]
    fn tight_budget_forces_shortest_paths() {
        let m = example_model();
        let sv = m.compute_s_values().unwrap();
        let mut rng = stream(4, 0);
        for _ in 0..200 {
            assert_eq!(filtered_random_walk(&m, &sv, 2, &mut rng).unwrap().len(), 2);
        }
    }

    #[test]
    fn normal_sequences_avoid_patterns() {
        let m = example_model();
        let sv = m.compute_s_values().unwrap();
        let p = pattern(&m, "p", "c d");
        let cfg = WalkConfig::new(5);
        let mut rng = stream(2, 0);
        for _ in 0..2_000 {
            let w = generate_normal_sequence(&m, &sv, &[&p], &cfg, &mut rng).unwrap();
            assert!(m.accepts(&w));
            assert!(!p.matches(&w));
        }
    }

    #[test]
    fn no_patterns_means_plain_walks() {
        let m = example_model();
        let sv = m.compute_s_values().unwrap();
        let cfg = WalkConfig::new(5);
        let a = generate_normal_sequence(&m, &sv, &[], &cfg, &mut stream(3, 0)).unwrap();
        let b = filtered_random_walk(&m, &sv, 5, &mut stream(3, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn covering_patterns_exhaust_attempts() {
        // Every accepted word of length <= 3 on the example model, by exhaustive search.
        let m = example_model();
        let sv = m.compute_s_values().unwrap();
        let mut accepted = Vec::new();
        let mut frontier: Vec<Vec<SymbolId>> = vec![vec![]];
        for _ in 0..3 {
            let mut next = Vec::new();
            for w in &frontier {
                for s in 0..4 {
                    let mut v = w.clone();
                    v.push(SymbolId(s));
                    if m.extended_transition(&v).is_some() {
                        if m.accepts(&v) {
                            accepted.push(v.clone());
                        }
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        let expr = accepted
            .iter()
            .map(|w| m.decode_word(w).join(" "))
            .collect::<Vec<_>>()
            .join(" | ");
        let p = pattern(&m, "all", &expr);
        let cfg = WalkConfig {
            mlsl: 3,
            max_attempts: 100,
            allow_empty: true,
        };
        assert_eq!(
            generate_normal_sequence(&m, &sv, &[&p], &cfg, &mut stream(0, 0)),
            Err(GenerateError::AttemptsExhausted { attempts: 100 })
        );
    }

    #[test]
    fn finite_pool_is_enumerated_exactly() {
        let xyz = ["x", "y", "z"];
        let p = FailurePattern::compile("p1", "m", "x(y|z)", &xyz, None).unwrap();
        let pool = build_failure_pool(&[&p], 20, DEFAULT_SAMPLES_PER_PATTERN, &mut stream(0, 0)).unwrap();
        let e = &pool.entries()[0];
        assert_eq!(e.metadata.method, PoolMethod::Enumerated);
        assert_eq!(
            e.words,
            vec![vec![SymbolId(0), SymbolId(1)], vec![SymbolId(0), SymbolId(2)]]
        );
    }

    #[test]
    fn infinite_pool_is_sampled_within_bound() {
        let xyz = ["x", "y", "z"];
        let p = FailurePattern::compile("p1", "m", "x*y", &xyz, None).unwrap();
        let pool = build_failure_pool(&[&p], 3, DEFAULT_SAMPLES_PER_PATTERN, &mut stream(0, 0)).unwrap();
        let e = &pool.entries()[0];
        assert_eq!(e.metadata.method, PoolMethod::Sampled);
        assert_eq!(e.metadata.star_limit, 3);
        let allowed: BTreeSet<Vec<SymbolId>> = [vec![1], vec![0, 1], vec![0, 0, 1]]
            .into_iter()
            .map(|w| w.into_iter().map(SymbolId).collect())
            .collect();
        assert!(!e.words.is_empty());
        assert!(e.words.iter().all(|w| allowed.contains(w)));
    }

    #[test]
    fn pattern_longer_than_bound_gives_empty_pool() {
        let syms: Vec<String> = (0..25).map(|i| std::format!("t{i}")).collect();
        let expr = syms.join(" ");
        let p = FailurePattern::compile("long", "m", expr, &syms, None).unwrap();
        assert!(matches!(
            build_failure_pool(&[&p], 20, 10, &mut stream(0, 0)),
            Err(GenerateError::EmptyPool { mlsl: 20, .. })
        ));
    }

    #[test]
    fn single_word_pool_always_draws_it() {
        let pool = FailurePool::from_words(5, vec![("p".into(), vec![vec![SymbolId(3)]])]);
        let mut rng = stream(0, 0);
        for _ in 0..50 {
            assert_eq!(
                draw_failure_sequence(&pool, &mut rng).unwrap(),
                (&[SymbolId(3)][..], "p")
            );
        }
    }

    #[test]
    fn draws_are_uniform_over_patterns_then_words() {
        let w = |a: u32, b: u32| vec![SymbolId(a), SymbolId(b)];
        let pool = FailurePool::from_words(
            5,
            vec![
                ("p1".into(), vec![w(0, 1), w(0, 2)]),
                ("p2".into(), vec![w(1, 1), w(1, 2)]),
                ("empty".into(), vec![]),
            ],
        );
        let mut rng = stream(8, 0);
        let mut per_pattern: BTreeMap<&str, usize> = BTreeMap::new();
        for _ in 0..10_000 {
            let (_, id) = draw_failure_sequence(&pool, &mut rng).unwrap();
            *per_pattern.entry(id).or_default() += 1;
        }
        assert!(!per_pattern.contains_key("empty"));
        for n in per_pattern.values() {
            assert!((*n as f64 / 10_000.0 - 0.5).abs() < 0.02);
        }
    }

    #[test]
    fn all_empty_pool_cannot_draw() {
        let pool = FailurePool::from_words(5, vec![("p".into(), vec![])]);
        assert!(draw_failure_sequence(&pool, &mut stream(0, 0)).is_err());
    }
}
