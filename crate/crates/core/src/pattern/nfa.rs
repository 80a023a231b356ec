//! Thompson construction and set-based simulation.

use alloc::vec;
use alloc::vec::Vec;

use super::RegexNode;
use crate::automaton::SymbolId;

#[derive(Clone, Debug, Default)]
struct NfaState {
    eps: Vec<u32>,
    sym: Option<(SymbolId, u32)>,
}

/// An ε-NFA with a single start and a single accepting state.
#[derive(Clone, Debug)]
pub struct Nfa {
    states: Vec<NfaState>,
    start: u32,
    accept: u32,
    /// ε-closure of each state, sorted.
    closures: Vec<Vec<u32>>,
}

impl Nfa {
    pub fn build(ast: &RegexNode) -> Self {
        let mut states = Vec::new();
        let (start, accept) = fragment(ast, &mut states);
        let closures = (0..states.len() as u32).map(|s| closure_of(&states, s)).collect();
        Self {
            states,
            start,
            accept,
            closures,
        }
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn accept(&self) -> u32 {
        self.accept
    }

    /// ε-closure of the start state.
    pub fn initial_set(&self) -> &[u32] {
        &self.closures[self.start as usize]
    }

    pub fn closure(&self, state: u32) -> &[u32] {
        &self.closures[state as usize]
    }

    /// The symbol transition leaving `state`, if any.
    pub fn symbol_edge(&self, state: u32) -> Option<(SymbolId, u32)> {
        self.states[state as usize].sym
    }

    pub fn matches(&self, word: &[SymbolId]) -> bool {
        let n = self.states.len();
        let mut current: Vec<u32> = self.initial_set().to_vec();
        let mut next = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for &a in word {
            next.clear();
            for &s in &current {
                if let Some((sym, target)) = self.states[s as usize].sym {
                    if sym == a {
                        for &t in &self.closures[target as usize] {
                            if !seen[t as usize] {
                                seen[t as usize] = true;
                                next.push(t);
                            }
                        }
                    }
                }
            }
            for &t in &next {
                seen[t as usize] = false;
            }
            if next.is_empty() {
                return false;
            }
            core::mem::swap(&mut current, &mut next);
        }
        current.contains(&self.accept)
    }
}

fn new_state(states: &mut Vec<NfaState>) -> u32 {
    states.push(NfaState::default());
    (states.len() - 1) as u32
}

fn fragment(node: &RegexNode, states: &mut Vec<NfaState>) -> (u32, u32) {
    match node {
        RegexNode::Empty => {
            let s = new_state(states);
            let e = new_state(states);
            states[s as usize].eps.push(e);
            (s, e)
        }
        RegexNode::Literal(a) => {
            let s = new_state(states);
            let e = new_state(states);
            states[s as usize].sym = Some((*a, e));
            (s, e)
        }
        RegexNode::Concat(l, r) => {
            let (ls, le) = fragment(l, states);
            let (rs, re) = fragment(r, states);
            states[le as usize].eps.push(rs);
            (ls, re)
        }
        RegexNode::Alt(l, r) => {
            let s = new_state(states);
            let (ls, le) = fragment(l, states);
            let (rs, re) = fragment(r, states);
            let e = new_state(states);
            states[s as usize].eps.extend([ls, rs]);
            states[le as usize].eps.push(e);
            states[re as usize].eps.push(e);
            (s, e)
        }
        RegexNode::Star(inner) => {
            let s = new_state(states);
            let (is, ie) = fragment(inner, states);
            let e = new_state(states);
            states[s as usize].eps.extend([is, e]);
            states[ie as usize].eps.extend([is, e]);
            (s, e)
        }
    }
}

fn closure_of(states: &[NfaState], from: u32) -> Vec<u32> {
    let mut seen = vec![false; states.len()];
    let mut stack = vec![from];
    seen[from as usize] = true;
    let mut out = Vec::new();
    while let Some(s) = stack.pop() {
        out.push(s);
        for &t in &states[s as usize].eps {
            if !seen[t as usize] {
                seen[t as usize] = true;
                stack.push(t);
            }
        }
    }
    out.sort_unstable();
    out
}
