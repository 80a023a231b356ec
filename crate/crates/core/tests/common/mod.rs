#![allow(dead_code)]

use logsynth_core::{BehaviourModel, ModelDocument, RegexNode, TemplateCatalog, TransitionDocument};
use proptest::prelude::*;

/// Raw material for a random deterministic model: per (state, symbol) an
/// optional target, plus accepting flags.
#[derive(Clone, Debug)]
pub struct RawModel {
    pub states: usize,
    pub symbols: usize,
    pub edges: Vec<Option<usize>>,
    pub accepting: Vec<bool>,
}

impl RawModel {
    pub fn build(&self) -> BehaviourModel {
        let states: Vec<String> = (0..self.states).map(|i| format!("s{i}")).collect();
        let alphabet: Vec<String> = (0..self.symbols).map(|i| format!("t{i}")).collect();
        let mut transitions = Vec::new();
        for q in 0..self.states {
            for (a, symbol) in alphabet.iter().enumerate() {
                if let Some(t) = self.edges[q * self.symbols + a] {
                    transitions.push(TransitionDocument {
                        src: states[q].clone(),
                        symbol: symbol.clone(),
                        dst: states[t].clone(),
                    });
                }
            }
        }
        let templates: TemplateCatalog = alphabet.iter().map(|a| (a.clone(), format!("event {a} *"))).collect();
        let doc = ModelDocument {
            accepting: (0..self.states)
                .filter(|&q| self.accepting[q])
                .map(|q| states[q].clone())
                .collect(),
            initial: states[0].clone(),
            states,
            alphabet,
            transitions,
            templates,
        };
        doc.into_model().expect("generated models are valid").0
    }
}

pub fn raw_model(max_states: usize, max_symbols: usize, edge_density: f64) -> impl Strategy<Value = RawModel> {
    (1..=max_states, 1..=max_symbols).prop_flat_map(move |(n, k)| {
        let edge = prop::option::weighted(edge_density, 0..n);
        (
            prop::collection::vec(edge, n * k),
            prop::collection::vec(prop::bool::weighted(0.2), n),
        )
            .prop_map(move |(edges, accepting)| RawModel {
                states: n,
                symbols: k,
                edges,
                accepting,
            })
    })
}

/// Random regular expressions over symbols `0..symbols`.
pub fn regex(symbols: u32, depth: u32, size: u32) -> impl Strategy<Value = RegexNode> {
    let leaf = prop_oneof![
        1 => Just(RegexNode::Empty),
        8 => (0..symbols).prop_map(RegexNode::literal),
    ];
    leaf.prop_recursive(depth, size, 2, |inner| {
        prop_oneof![
            3 => (inner.clone(), inner.clone()).prop_map(|(l, r)| RegexNode::concat(l, r)),
            2 => (inner.clone(), inner.clone()).prop_map(|(l, r)| RegexNode::alt(l, r)),
            1 => inner.prop_map(RegexNode::star),
        ]
    })
}

/// Every word over `0..symbols` of length at most `max_len`.
pub fn all_words(symbols: u32, max_len: usize) -> Vec<Vec<logsynth_core::SymbolId>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for a in 0..symbols {
                let mut v: Vec<logsynth_core::SymbolId> = w.clone();
                v.push(logsynth_core::SymbolId(a));
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
