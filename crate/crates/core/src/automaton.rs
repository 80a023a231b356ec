//! Deterministic behaviour models over log template IDs.
//!
//! A [`BehaviourModel`] is a partial DFA `<Q, A, q0, Σ, δ>` whose symbols are
//! template IDs. State and symbol names are interned to dense integers at
//! load time; the original names stay available for reporting and for
//! serialization.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Dense index of a state within one model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

/// Dense index of a template ID within one model's alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl SymbolId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Characters that may not appear in a template ID because the pattern
/// grammar uses them.
pub const RESERVED_CHARS: &[char] = &['|', '*', '(', ')', '.'];

/// Tokens reserved by the pattern grammar for the empty word.
pub const EPSILON_TOKENS: &[&str] = &["eps", "ε"];

/// Checks that `id` is usable as a template ID.
pub fn is_valid_template_id(id: &str) -> bool {
    !id.is_empty()
        && !id.chars().any(|c| c.is_whitespace() || RESERVED_CHARS.contains(&c))
        && !EPSILON_TOKENS.contains(&id)
}

/// Template text keyed by template ID. Dynamic parts are masked with `*`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TemplateCatalog(BTreeMap<String, String>);

impl TemplateCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, text: impl Into<String>) {
        self.0.insert(id.into(), text.into());
    }

    pub fn get(&self, id: &str) -> Option<&str> {
        self.0.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl FromIterator<(String, String)> for TemplateCatalog {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// One transition as written in a model document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDocument {
    pub src: String,
    pub symbol: String,
    pub dst: String,
}

/// The on-disk shape of a behaviour model, before validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub states: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    pub alphabet: Vec<String>,
    pub transitions: Vec<TransitionDocument>,
    pub templates: TemplateCatalog,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("{location}: empty state name")]
    EmptyStateName { location: String },
    #[error("{location}: duplicate state `{state}`")]
    DuplicateState { location: String, state: String },
    #[error("{location}: invalid template ID `{symbol}`")]
    InvalidSymbol { location: String, symbol: String },
    #[error("{location}: duplicate template ID `{symbol}`")]
    DuplicateSymbol { location: String, symbol: String },
    #[error("{location}: unknown state `{state}`")]
    UnknownState { location: String, state: String },
    #[error("{location}: unknown template ID `{symbol}`")]
    UnknownSymbol { location: String, symbol: String },
    #[error(
        "{location}: non-deterministic transition: ({state}, {symbol}) already leads to `{existing}`, \
         cannot also lead to `{conflicting}`"
    )]
    NonDeterministic {
        location: String,
        state: String,
        symbol: String,
        existing: String,
        conflicting: String,
    },
    #[error("{location}: duplicate transition ({state}, {symbol}) -> {dst}")]
    DuplicateTransition {
        location: String,
        state: String,
        symbol: String,
        dst: String,
    },
    #[error("templates: missing catalog entry for template ID `{symbol}`")]
    MissingTemplate { symbol: String },
    #[error("degenerate model: initial state `{state}` cannot reach an accepting state")]
    Degenerate { state: String },
}

/// Shortest distance from a state to acceptance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SValue {
    Finite(u32),
    Unreachable,
}

impl SValue {
    pub fn finite(self) -> Option<u32> {
        match self {
            SValue::Finite(v) => Some(v),
            SValue::Unreachable => None,
        }
    }

    /// `true` when acceptance is reachable in strictly fewer than `budget` steps.
    #[inline]
    pub fn is_below(self, budget: usize) -> bool {
        matches!(self, SValue::Finite(v) if (v as usize) < budget)
    }
}

impl fmt::Display for SValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SValue::Finite(v) => write!(f, "{v}"),
            SValue::Unreachable => f.write_str("unreachable"),
        }
    }
}

/// Per-state shortest distance to an accepting state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SValueMap {
    values: Vec<SValue>,
}

impl SValueMap {
    pub fn get(&self, state: StateId) -> SValue {
        self.values[state.index()]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, SValue)> + '_ {
        self.values.iter().enumerate().map(|(i, v)| (StateId(i as u32), *v))
    }

    pub fn unreachable_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.iter().filter(|(_, v)| *v == SValue::Unreachable).map(|(q, _)| q)
    }
}

/// A validated deterministic behaviour model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BehaviourModel {
    states: Vec<String>,
    state_index: BTreeMap<String, StateId>,
    symbols: Vec<String>,
    symbol_index: BTreeMap<String, SymbolId>,
    initial: StateId,
    accepting: Vec<bool>,
    /// Outgoing transitions per state, sorted by symbol.
    outgoing: Vec<Vec<(SymbolId, StateId)>>,
    transition_count: usize,
}

impl ModelDocument {
    /// Validates the document and interns it into a model plus its catalog.
    pub fn into_model(self) -> Result<(BehaviourModel, TemplateCatalog), ModelError> {
        let mut state_index = BTreeMap::new();
        for (i, name) in self.states.iter().enumerate() {
            let location = format!("states[{i}]");
            if name.is_empty() {
                return Err(ModelError::EmptyStateName { location });
            }
            if state_index.insert(name.clone(), StateId(i as u32)).is_some() {
                return Err(ModelError::DuplicateState {
                    location,
                    state: name.clone(),
                });
            }
        }

        let mut symbol_index = BTreeMap::new();
        for (i, name) in self.alphabet.iter().enumerate() {
            let location = format!("alphabet[{i}]");
            if !is_valid_template_id(name) {
                return Err(ModelError::InvalidSymbol {
                    location,
                    symbol: name.clone(),
                });
            }
            if symbol_index.insert(name.clone(), SymbolId(i as u32)).is_some() {
                return Err(ModelError::DuplicateSymbol {
                    location,
                    symbol: name.clone(),
                });
            }
        }

        let lookup_state = |name: &str, location: String| {
            state_index.get(name).copied().ok_or_else(|| ModelError::UnknownState {
                location,
                state: name.to_string(),
            })
        };

        let initial = lookup_state(&self.initial, "initial".to_string())?;
        let mut accepting = vec![false; self.states.len()];
        for (i, name) in self.accepting.iter().enumerate() {
            let q = lookup_state(name, format!("accepting[{i}]"))?;
            accepting[q.index()] = true;
        }

        let mut outgoing: Vec<Vec<(SymbolId, StateId)>> = vec![Vec::new(); self.states.len()];
        for (i, t) in self.transitions.iter().enumerate() {
            let src = lookup_state(&t.src, format!("transitions[{i}].src"))?;
            let dst = lookup_state(&t.dst, format!("transitions[{i}].dst"))?;
            let symbol = *symbol_index.get(&t.symbol).ok_or_else(|| ModelError::UnknownSymbol {
                location: format!("transitions[{i}].symbol"),
                symbol: t.symbol.clone(),
            })?;
            let edges = &mut outgoing[src.index()];
            match edges.binary_search_by_key(&symbol, |&(s, _)| s) {
                Ok(pos) => {
                    let existing = edges[pos].1;
                    let location = format!("transitions[{i}]");
                    return Err(if existing == dst {
                        ModelError::DuplicateTransition {
                            location,
                            state: t.src.clone(),
                            symbol: t.symbol.clone(),
                            dst: t.dst.clone(),
                        }
                    } else {
                        ModelError::NonDeterministic {
                            location,
                            state: t.src.clone(),
                            symbol: t.symbol.clone(),
                            existing: self.states[existing.index()].clone(),
                            conflicting: t.dst.clone(),
                        }
                    });
                }
                Err(pos) => edges.insert(pos, (symbol, dst)),
            }
        }

        for name in &self.alphabet {
            if self.templates.get(name).is_none() {
                return Err(ModelError::MissingTemplate { symbol: name.clone() });
            }
        }

        let model = BehaviourModel {
            states: self.states,
            state_index,
            symbols: self.alphabet,
            symbol_index,
            initial,
            accepting,
            outgoing,
            transition_count: self.transitions.len(),
        };
        Ok((model, self.templates))
    }
}

impl BehaviourModel {
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transition_count
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q.index()]
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.accepting
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| StateId(i as u32))
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.index()]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_index.get(name).copied()
    }

    pub fn symbol_name(&self, s: SymbolId) -> &str {
        &self.symbols[s.index()]
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.symbol_index.get(name).copied()
    }

    /// Template IDs in declaration order; position `i` is `SymbolId(i)`.
    pub fn symbol_names(&self) -> &[String] {
        &self.symbols
    }

    /// Outgoing transitions of `q` as `(symbol, target)`, sorted by symbol.
    pub fn outgoing(&self, q: StateId) -> &[(SymbolId, StateId)] {
        &self.outgoing[q.index()]
    }

    /// δ(q, a), if defined.
    pub fn step(&self, q: StateId, a: SymbolId) -> Option<StateId> {
        let edges = &self.outgoing[q.index()];
        edges.binary_search_by_key(&a, |&(s, _)| s).ok().map(|pos| edges[pos].1)
    }

    /// δ*(q0, word). `None` means the word is rejected because some step is
    /// undefined.
    pub fn extended_transition(&self, word: &[SymbolId]) -> Option<StateId> {
        self.run_from(self.initial, word)
    }

    pub fn run_from(&self, from: StateId, word: &[SymbolId]) -> Option<StateId> {
        word.iter().try_fold(from, |q, &a| self.step(q, a))
    }

    pub fn accepts(&self, word: &[SymbolId]) -> bool {
        self.extended_transition(word).is_some_and(|q| self.is_accepting(q))
    }

    /// Maps template ID names to symbols; `None` if any name is outside the
    /// alphabet.
    pub fn encode_word<S: AsRef<str>>(&self, names: &[S]) -> Option<Vec<SymbolId>> {
        names.iter().map(|n| self.symbol_id(n.as_ref())).collect()
    }

    pub fn decode_word(&self, word: &[SymbolId]) -> Vec<&str> {
        word.iter().map(|&s| self.symbol_name(s)).collect()
    }

    /// Shortest distance to acceptance for every state, by breadth-first
    /// search over reversed transitions from all accepting states.
    pub fn s_values(&self) -> SValueMap {
        let n = self.states.len();
        let mut reverse: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for q in self.states() {
            for &(_, dst) in self.outgoing(q) {
                reverse[dst.index()].push(q);
            }
        }
        let mut values = vec![SValue::Unreachable; n];
        let mut queue = VecDeque::new();
        for q in self.accepting_states() {
            values[q.index()] = SValue::Finite(0);
            queue.push_back(q);
        }
        while let Some(q) = queue.pop_front() {
            let SValue::Finite(d) = values[q.index()] else {
                unreachable!("queued states always have a distance")
            };
            for &p in &reverse[q.index()] {
                if values[p.index()] == SValue::Unreachable {
                    values[p.index()] = SValue::Finite(d + 1);
                    queue.push_back(p);
                }
            }
        }
        SValueMap { values }
    }

    /// Like [`s_values`](Self::s_values), but fails when no log can ever be
    /// generated because the initial state cannot reach acceptance.
    pub fn compute_s_values(&self) -> Result<SValueMap, ModelError> {
        let map = self.s_values();
        if map.get(self.initial) == SValue::Unreachable {
            return Err(ModelError::Degenerate {
                state: self.state_name(self.initial).to_string(),
            });
        }
        Ok(map)
    }

    /// States other than the initial one with neither incoming nor outgoing
    /// transitions.
    pub fn isolated_states(&self) -> Vec<StateId> {
        let mut touched = vec![false; self.states.len()];
        touched[self.initial.index()] = true;
        for q in self.states() {
            for &(_, dst) in self.outgoing(q) {
                touched[q.index()] = true;
                touched[dst.index()] = true;
            }
        }
        self.states().filter(|q| !touched[q.index()]).collect()
    }

    /// Converts back to the document form. Transitions are listed by source
    /// state, then symbol.
    pub fn to_document(&self, catalog: &TemplateCatalog) -> ModelDocument {
        let transitions = self
            .states()
            .flat_map(|q| {
                self.outgoing(q).iter().map(move |&(s, dst)| TransitionDocument {
                    src: self.state_name(q).to_string(),
                    symbol: self.symbol_name(s).to_string(),
                    dst: self.state_name(dst).to_string(),
                })
            })
            .collect();
        ModelDocument {
            states: self.states.clone(),
            initial: self.state_name(self.initial).to_string(),
            accepting: self
                .accepting_states()
                .map(|q| self.state_name(q).to_string())
                .collect(),
            alphabet: self.symbols.clone(),
            transitions,
            templates: catalog.clone(),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The four-state model used to illustrate the filtered random walk.
    pub(crate) fn example_document() -> ModelDocument {
        let t = |src: &str, symbol: &str, dst: &str| TransitionDocument {
            src: src.into(),
            symbol: symbol.into(),
            dst: dst.into(),
        };
        ModelDocument {
            states: ["q0", "q1", "q2", "q3"].map(String::from).to_vec(),
            initial: "q0".into(),
            accepting: vec!["q3".into()],
            alphabet: ["a", "b", "c", "d"].map(String::from).to_vec(),
            transitions: vec![
                t("q0", "a", "q2"),
                t("q0", "b", "q2"),
                t("q0", "c", "q1"),
                t("q0", "d", "q1"),
                t("q1", "a", "q0"),
                t("q1", "b", "q1"),
                t("q1", "c", "q3"),
                t("q1", "d", "q3"),
                t("q2", "a", "q3"),
                t("q2", "b", "q0"),
                t("q2", "c", "q2"),
                t("q2", "d", "q1"),
            ],
            templates: [
                ("a", "sent block * in *"),
                ("b", "received block * of size *"),
                ("c", "verification succeeded for *"),
                ("d", "deleting block * file *"),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
        }
    }

    pub(crate) fn example_model() -> BehaviourModel {
        example_document().into_model().unwrap().0
    }

    fn word(m: &BehaviourModel, w: &str) -> Vec<SymbolId> {
        let names: Vec<&str> = w.split_whitespace().collect();
        m.encode_word(&names).unwrap()
    }

    #[test]
    fn example_model_shape() {
        let m = example_model();
        assert_eq!(m.state_count(), 4);
        assert_eq!(m.symbol_count(), 4);
        assert_eq!(m.accepting_states().count(), 1);
        assert_eq!(m.transition_count(), 12);
    }

    #[test]
    fn extended_transition_traces() {
        let m = example_model();
        let q = |n| m.state_id(n);
        assert_eq!(m.extended_transition(&word(&m, "c d")), q("q3"));
        assert_eq!(m.extended_transition(&word(&m, "c a")), q("q0"));
        assert_eq!(m.extended_transition(&[]), Some(m.initial()));
        // q3 has no outgoing transitions
        assert_eq!(m.extended_transition(&word(&m, "c d a")), None);
    }

    #[test]
    fn acceptance() {
        let m = example_model();
        assert!(m.accepts(&word(&m, "c d")));
        assert!(!m.accepts(&word(&m, "c a")));
        assert!(m.accepts(&word(&m, "c a b d d")));
        assert!(!m.accepts(&[]));
        assert!(!m.accepts(&[SymbolId(99)]));
    }

    #[test]
    fn example_s_values() {
        let m = example_model();
        let sv = m.compute_s_values().unwrap();
        let got: Vec<(&str, SValue)> = sv.iter().map(|(q, v)| (m.state_name(q), v)).collect();
        assert_eq!(
            got,
            [
                ("q0", SValue::Finite(2)),
                ("q1", SValue::Finite(1)),
                ("q2", SValue::Finite(1)),
                ("q3", SValue::Finite(0)),
            ]
        );
    }

    #[test]
    fn accepting_initial_state_has_zero_s_value() {
        let mut doc = example_document();
        doc.accepting.push("q0".into());
        let (m, _) = doc.into_model().unwrap();
        assert_eq!(m.s_values().get(m.initial()), SValue::Finite(0));
    }

    #[test]
    fn non_deterministic_transition_is_rejected() {
        let mut doc = example_document();
        doc.transitions.push(TransitionDocument {
            src: "q0".into(),
            symbol: "a".into(),
            dst: "q1".into(),
        });
        let err = doc.into_model().unwrap_err();
        assert!(
            matches!(&err, ModelError::NonDeterministic { location, .. } if location == "transitions[12]"),
            "{err}"
        );
    }

    #[test]
    fn dangling_state_is_rejected() {
        let mut doc = example_document();
        doc.transitions[3].dst = "q9".into();
        assert_eq!(
            doc.into_model().unwrap_err(),
            ModelError::UnknownState {
                location: "transitions[3].dst".into(),
                state: "q9".into()
            }
        );
    }

    #[test]
    fn unknown_symbol_and_missing_template() {
        let mut doc = example_document();
        doc.transitions[0].symbol = "z".into();
        assert!(matches!(doc.into_model(), Err(ModelError::UnknownSymbol { .. })));

        let mut doc = example_document();
        doc.alphabet.push("e".into());
        assert_eq!(
            doc.into_model().unwrap_err(),
            ModelError::MissingTemplate { symbol: "e".into() }
        );
    }

    #[test]
    fn reserved_characters_rejected_in_template_ids() {
        for bad in ["a|b", "x*", "(", "t.1", "two words", "", "eps"] {
            assert!(!is_valid_template_id(bad), "{bad:?}");
        }
        assert!(is_valid_template_id("t17"));
    }

    #[test]
    fn degenerate_when_initial_cannot_accept() {
        let mut doc = example_document();
        doc.accepting.clear();
        let (m, _) = doc.into_model().unwrap();
        assert!(matches!(m.compute_s_values(), Err(ModelError::Degenerate { .. })));
    }

    #[test]
    fn unreachable_states_tolerated() {
        let mut doc = example_document();
        doc.states.push("trap".into());
        doc.transitions.push(TransitionDocument {
            src: "q3".into(),
            symbol: "a".into(),
            dst: "trap".into(),
        });
        let (m, _) = doc.into_model().unwrap();
        let sv = m.compute_s_values().unwrap();
        assert_eq!(
            sv.unreachable_states().collect::<Vec<_>>(),
            [m.state_id("trap").unwrap()]
        );
    }

    #[test]
    fn isolated_states_listed() {
        let mut doc = example_document();
        doc.states.push("lonely".into());
        let (m, _) = doc.into_model().unwrap();
        assert_eq!(m.isolated_states(), [m.state_id("lonely").unwrap()]);
    }

    #[test]
    fn document_round_trip() {
        let (m, catalog) = example_document().into_model().unwrap();
        let (again, catalog2) = m.to_document(&catalog).into_model().unwrap();
        assert_eq!(m, again);
        assert_eq!(catalog, catalog2);
    }
}
