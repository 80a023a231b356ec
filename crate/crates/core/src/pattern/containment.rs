//! Language inclusion of a failure pattern in a behaviour model.
//!
//! `L(p) ⊆ L(M)` is decided on the product of the pattern's Thompson NFA with
//! the complement of the model (completed with a sink state). The product is
//! explored breadth-first, so a counterexample, when one exists, is a
//! shortest word in `L(p) \ L(M)`.
//!
//! Strictness (`L(M) ⊄ L(p)`) needs the complement of the pattern, which
//! requires determinizing it; that subset construction is done lazily and is
//! bounded by a state budget.

use alloc::collections::{btree_map, BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use super::{Nfa, PatternError, RegexNode};
use crate::automaton::{BehaviourModel, StateId, SymbolId};

/// Default bound on determinized pattern states for the strictness check.
pub const DEFAULT_SUBSET_BUDGET: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContainmentReport {
    /// `L(pattern) ⊆ L(model)`.
    pub included: bool,
    /// Shortest word matched by the pattern but rejected by the model.
    pub witness: Option<Vec<SymbolId>>,
    /// When included: whether the model accepts some word the pattern does
    /// not match, i.e. the inclusion is strict.
    pub proper: Option<bool>,
    /// Shortest word accepted by the model but not matched by the pattern.
    pub model_only_witness: Option<Vec<SymbolId>>,
}

const NO_PARENT: u32 = u32::MAX;

/// Decides `L(nfa) ⊆ L(model)` without the strictness check.
pub fn check_inclusion(nfa: &Nfa, model: &BehaviourModel) -> ContainmentReport {
    let width = model.state_count() + 1;
    let sink = model.state_count() as u32;
    let node = |s: u32, q: u32| s as usize * width + q as usize;
    let total = nfa.state_count() * width;

    let mut parent: Vec<(u32, SymbolId)> = vec![(NO_PARENT, SymbolId(0)); total];
    let mut seen = vec![false; total];
    let mut queue = VecDeque::new();
    let rejecting = |q: u32| q == sink || !model.is_accepting(StateId(q));
    let q0 = model.initial().0;

    for &s in nfa.initial_set() {
        let id = node(s, q0);
        seen[id] = true;
        queue.push_back((s, q0));
    }
    while let Some((s, q)) = queue.pop_front() {
        if s == nfa.accept() && rejecting(q) {
            let witness = trace_back(&parent, node(s, q));
            return ContainmentReport {
                included: false,
                witness: Some(witness),
                proper: None,
                model_only_witness: None,
            };
        }
        let Some((a, target)) = nfa.symbol_edge(s) else {
            continue;
        };
        let next_q = if q == sink {
            sink
        } else {
            model.step(StateId(q), a).map_or(sink, |p| p.0)
        };
        for &t in nfa.closure(target) {
            let id = node(t, next_q);
            if !seen[id] {
                seen[id] = true;
                parent[id] = (node(s, q) as u32, a);
                queue.push_back((t, next_q));
            }
        }
    }
    ContainmentReport {
        included: true,
        witness: None,
        proper: None,
        model_only_witness: None,
    }
}

fn trace_back(parent: &[(u32, SymbolId)], mut id: usize) -> Vec<SymbolId> {
    let mut word = Vec::new();
    while parent[id].0 != NO_PARENT {
        let (p, a) = parent[id];
        word.push(a);
        id = p as usize;
    }
    word.reverse();
    word
}

/// Decides `L(ast) ⊆ L(model)` and, when it holds, whether it is strict.
pub fn check_containment(
    ast: &RegexNode,
    model: &BehaviourModel,
    subset_budget: usize,
) -> Result<ContainmentReport, PatternError> {
    let nfa = Nfa::build(ast);
    let mut report = check_inclusion(&nfa, model);
    if report.included {
        let extra = model_only_word(&nfa, model, subset_budget)?;
        report.proper = Some(extra.is_some());
        report.model_only_witness = extra;
    }
    Ok(report)
}

/// Lazily determinized view of an NFA.
struct SubsetCache<'a> {
    nfa: &'a Nfa,
    ids: BTreeMap<Vec<u32>, u32>,
    sets: Vec<Vec<u32>>,
    moves: BTreeMap<(u32, SymbolId), u32>,
    budget: usize,
}

impl<'a> SubsetCache<'a> {
    fn new(nfa: &'a Nfa, budget: usize) -> Self {
        Self {
            nfa,
            ids: BTreeMap::new(),
            sets: Vec::new(),
            moves: BTreeMap::new(),
            budget,
        }
    }

    fn intern(&mut self, set: Vec<u32>) -> Result<u32, PatternError> {
        if let Some(&id) = self.ids.get(&set) {
            return Ok(id);
        }
        if self.sets.len() >= self.budget {
            return Err(PatternError::SizeLimit { budget: self.budget });
        }
        let id = self.sets.len() as u32;
        self.ids.insert(set.clone(), id);
        self.sets.push(set);
        Ok(id)
    }

    fn step(&mut self, from: u32, a: SymbolId) -> Result<u32, PatternError> {
        if let Some(&id) = self.moves.get(&(from, a)) {
            return Ok(id);
        }
        let mut next: Vec<u32> = Vec::new();
        for &s in &self.sets[from as usize] {
            if let Some((sym, t)) = self.nfa.symbol_edge(s) {
                if sym == a {
                    next.extend_from_slice(self.nfa.closure(t));
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        let id = self.intern(next)?;
        self.moves.insert((from, a), id);
        Ok(id)
    }

    fn accepting(&self, id: u32) -> bool {
        self.sets[id as usize].binary_search(&self.nfa.accept()).is_ok()
    }
}

/// Shortest word in `L(model) \ L(nfa)`, if any.
fn model_only_word(nfa: &Nfa, model: &BehaviourModel, budget: usize) -> Result<Option<Vec<SymbolId>>, PatternError> {
    let mut cache = SubsetCache::new(nfa, budget);
    let start = cache.intern(nfa.initial_set().to_vec())?;
    // (model state, subset) -> the pair and symbol it was first reached from
    type Pair = (u32, u32);
    let mut parent: BTreeMap<Pair, Option<(Pair, SymbolId)>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let root = (model.initial().0, start);
    parent.insert(root, None);
    queue.push_back(root);
    while let Some((q, d)) = queue.pop_front() {
        if model.is_accepting(StateId(q)) && !cache.accepting(d) {
            let mut word = Vec::new();
            let mut cur = (q, d);
            while let Some(Some((prev, a))) = parent.get(&cur).copied() {
                word.push(a);
                cur = prev;
            }
            word.reverse();
            return Ok(Some(word));
        }
        for &(a, next_q) in model.outgoing(StateId(q)) {
            let next_d = cache.step(d, a)?;
            let key = (next_q.0, next_d);
            if let btree_map::Entry::Vacant(slot) = parent.entry(key) {
                slot.insert(Some(((q, d), a)));
                queue.push_back(key);
            }
        }
    }
    Ok(None)
}
