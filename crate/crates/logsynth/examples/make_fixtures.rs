//! Regenerates the bundled fixture models `m1`, `m2`, `m3` and their failure
//! patterns.
//!
//! ```text
//! cargo run -p logsynth --example make_fixtures [-- OUT_DIR]
//! ```
//!
//! Each model has the state, transition and template counts of one of the
//! industrial models the tool was designed around, arranged as a strongly
//! connected core plus a forward-only DAG of the remaining states whose sinks
//! accept. Every pattern is a set of model paths, so inclusion holds by
//! construction; it is still re-checked before anything is written.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;

use anyhow::{ensure, Context, Result};
use logsynth::io::{write_json, PatternDocument};
use logsynth_core::automaton::{ModelDocument, TransitionDocument};
use logsynth_core::pattern::{check_containment, min_word_len, render, RegexNode};
use logsynth_core::{BehaviourModel, FailurePattern, PatternKind, SValueMap, StateId, SymbolId};
use rand::seq::SliceRandom;
use rand::Rng;

struct Shape {
    name: &'static str,
    states: usize,
    transitions: usize,
    templates: usize,
    core: usize,
    seed: u64,
}

const SHAPES: [Shape; 3] = [
    Shape {
        name: "m1",
        states: 154,
        transitions: 195,
        templates: 70,
        core: 5,
        seed: 11,
    },
    Shape {
        name: "m2",
        states: 91,
        transitions: 189,
        templates: 16,
        core: 72,
        seed: 12,
    },
    Shape {
        name: "m3",
        states: 350,
        transitions: 486,
        templates: 115,
        core: 331,
        seed: 13,
    },
];

const VERBS: [&str; 16] = [
    "received",
    "sent",
    "allocated",
    "released",
    "attached",
    "detached",
    "started",
    "stopped",
    "scheduled",
    "claimed",
    "spawned",
    "deleted",
    "resized",
    "synced",
    "opened",
    "closed",
];
const NOUNS: [&str; 16] = [
    "block", "instance", "volume", "port", "image", "network", "request", "lease", "node", "disk", "session",
    "snapshot", "flavor", "quota", "host", "token",
];
const TAILS: [&str; 6] = ["in *", "for *", "on host *", "from * to *", "after * ms", "with id *"];

/// Maximum word length allowed inside fixture patterns.
const MAX_PATTERN_WORD: usize = 14;

fn main() -> Result<()> {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures")));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    for shape in &SHAPES {
        // Later streams are tried when a draw lacks the cycles the patterns need.
        let mut attempt = 0;
        let (document, model, sv, patterns) = loop {
            let mut rng = logsynth_core::rng::stream(shape.seed, attempt);
            let document = build_model(shape, &mut rng);
            let (model, _) = document.clone().into_model()?;
            let sv = model.compute_s_values()?;
            match build_patterns(shape.name, &model, &sv, &mut rng) {
                Ok(patterns) => break (document, model, sv, patterns),
                Err(e) if attempt < 100 => eprintln!("stream {attempt}: {e}"),
                Err(e) => return Err(e),
            }
            attempt += 1;
        };
        write_json(&out.join(format!("{}.json", shape.name)), &document)?;
        write_json(&out.join(format!("{}.patterns.json", shape.name)), &patterns)?;
        println!(
            "{}: states={} transitions={} alphabet={} sValue(q0)={}",
            shape.name,
            model.state_count(),
            model.transition_count(),
            model.symbol_count(),
            sv.get(model.initial()).finite().unwrap_or(u32::MAX)
        );
        for p in &patterns {
            println!("  {} {} {}", p.id, p.kind.code(), p.expr);
        }
    }
    Ok(())
}

struct Edges {
    out: Vec<BTreeMap<usize, usize>>,
    templates: usize,
    count: usize,
    // Symbols are handed out from a shuffled deck so every template is used.
    deck: Vec<usize>,
}

impl Edges {
    fn add(&mut self, src: usize, dst: usize, rng: &mut impl Rng) -> bool {
        let edges = &mut self.out[src];
        if edges.len() >= self.templates || edges.values().any(|&d| d == dst) {
            return false;
        }
        if self.deck.is_empty() {
            self.deck = (0..self.templates).collect();
            self.deck.shuffle(rng);
        }
        let mut symbol = self.deck.pop().unwrap();
        while edges.contains_key(&symbol) {
            symbol = rng.random_range(0..self.templates);
        }
        edges.insert(symbol, dst);
        self.count += 1;
        true
    }
}

fn build_model(shape: &Shape, rng: &mut impl Rng) -> ModelDocument {
    let n = shape.states;
    let core = shape.core;
    let mut edges = Edges {
        out: vec![BTreeMap::new(); n],
        templates: shape.templates,
        count: 0,
        deck: Vec::new(),
    };
    if core > 1 {
        for i in 0..core {
            edges.add(i, (i + 1) % core, rng);
        }
    }
    for i in core.max(1)..n {
        // Parents are recent states, so the outer part is deep rather than bushy.
        while !edges.add(rng.random_range(i.saturating_sub(6)..i), i, rng) {}
    }
    // At least half of the extra edges are short chords inside the core, so it has
    // short cycles; the rest point forward and keep the outer part acyclic.
    let target = shape.transitions;
    let extra = target.saturating_sub(edges.count);
    let back_edges = if core >= 3 {
        (extra / 2).max(extra * core / n)
    } else {
        0
    };
    let forward_until = target - back_edges;
    let (mut back, mut misses) = (true, 0);
    for _ in 0..100_000 {
        if edges.count >= target {
            break;
        }
        if edges.count < forward_until || !back {
            let src = rng.random_range(0..n - 1);
            let lo = (src + 1).max(core);
            if lo < n {
                let dst = rng.random_range(lo..n);
                edges.add(src, dst, rng);
            }
        } else {
            let src = rng.random_range(0..core);
            // Short chords: mostly up to three states back, else two to four ahead.
            let dst = if rng.random_bool(0.7) {
                src + core - rng.random_range(1..=3)
            } else {
                src + rng.random_range(2..=4)
            } % core;
            if !edges.add(src, dst, rng) {
                misses += 1;
                back = misses < 1_000;
            }
        }
    }
    let out = edges.out;

    let mut accepting: BTreeSet<usize> = (0..n).filter(|&q| out[q].is_empty()).collect();
    // Core states accept at roughly every eighth position along the ring.
    if core > 8 {
        let mut q = rng.random_range(4..8);
        while q < core {
            accepting.insert(q);
            q += rng.random_range(5..12);
        }
    }

    let state = |q: usize| format!("q{q}");
    let symbol = |s: usize| format!("E{}", s + 1);
    let mut templates = BTreeMap::new();
    for s in 0..shape.templates {
        let text = format!(
            "{} {} * {}",
            VERBS[rng.random_range(0..VERBS.len())],
            NOUNS[rng.random_range(0..NOUNS.len())],
            TAILS[rng.random_range(0..TAILS.len())]
        );
        templates.insert(symbol(s), text);
    }
    ModelDocument {
        states: (0..n).map(state).collect(),
        initial: state(0),
        accepting: accepting.into_iter().map(state).collect(),
        alphabet: (0..shape.templates).map(symbol).collect(),
        transitions: out
            .iter()
            .enumerate()
            .flat_map(|(src, edges)| {
                edges.iter().map(move |(&s, &dst)| TransitionDocument {
                    src: state(src),
                    symbol: symbol(s),
                    dst: state(dst),
                })
            })
            .collect(),
        templates: templates.into_iter().collect(),
    }
}

fn build_patterns(
    name: &str,
    model: &BehaviourModel,
    sv: &SValueMap,
    rng: &mut impl Rng,
) -> Result<Vec<PatternDocument>> {
    let mut asts = Vec::new();
    for _ in 0..1_000 {
        if asts.len() == 3 {
            break;
        }
        let ast = finite_pattern(model, sv, rng);
        if !asts.contains(&ast) && longest(&ast) <= MAX_PATTERN_WORD {
            asts.push(ast);
        }
    }

    ensure!(asts.len() == 3, "{name}: could not find three distinct finite patterns");

    let dist = distances_from(model, model.initial());
    let mut hubs: Vec<(StateId, Vec<Vec<SymbolId>>)> = model
        .states()
        .filter_map(|p| {
            let reach = dist[p.index()]? + sv.get(p).finite()? as usize;
            let cycles: Vec<_> = cycles_at(model, p).into_iter().filter(|c| c.len() <= 8).collect();
            ((2..=16).contains(&reach) && cycles.len() >= 2).then_some((p, cycles))
        })
        .collect();
    ensure!(hubs.len() >= 3, "{name}: not enough states with two short cycles");
    hubs.shuffle(rng);
    for (i, (p, cycles)) in hubs.iter().take(3).enumerate() {
        let u = word(&path_to(model, model.initial(), *p));
        let v = word(&descent(model, sv, *p, rng));
        let (c1, c2) = (word(&cycles[0]), word(&cycles[1]));
        let loop_part = match i {
            0 => RegexNode::star(c1),
            1 => RegexNode::star(RegexNode::alt(c1, c2)),
            _ => RegexNode::star(seq(RegexNode::star(c1), c2)),
        };
        asts.push(seq(seq(u, loop_part), v));
    }

    let mut documents = Vec::new();
    for (i, ast) in asts.iter().enumerate() {
        let kind = if i < 3 {
            PatternKind::Finite
        } else {
            PatternKind::Infinite
        };
        let id = format!("{name}-{}{}", kind.code(), i % 3 + 1);
        let expr = render(&left_nested(ast), model.symbol_names());
        let compiled = FailurePattern::compile(&id, name, &expr, model.symbol_names(), Some(kind))?;
        let report = check_containment(compiled.ast(), model, 20_000)?;
        ensure!(report.included, "{id} is not contained in {name}");
        ensure!(
            min_word_len(compiled.ast()) <= 20,
            "{id} has no word within 20 templates"
        );
        documents.push(PatternDocument {
            id,
            model: name.to_string(),
            kind,
            expr,
        });
    }
    Ok(documents)
}

/// A union of a few accepted words that share prefixes.
fn finite_pattern(model: &BehaviourModel, sv: &SValueMap, rng: &mut impl Rng) -> RegexNode {
    let mut words: Vec<Vec<SymbolId>> = Vec::new();
    let target = rng.random_range(2..=4);
    let mut tries = 0;
    while words.len() < target && tries < 100 {
        tries += 1;
        let prefix: Vec<SymbolId> = match words.first() {
            None => Vec::new(),
            Some(first) => first[..rng.random_range(0..first.len())].to_vec(),
        };
        let Some(state) = model.extended_transition(&prefix) else {
            continue;
        };
        let Some(rest) = walk(
            model,
            sv,
            state,
            4usize.saturating_sub(prefix.len()).max(1),
            MAX_PATTERN_WORD - prefix.len(),
            rng,
        ) else {
            continue;
        };
        let mut w = prefix;
        w.extend(rest);
        if w.len() >= 4 && w.len() <= MAX_PATTERN_WORD && !words.contains(&w) {
            words.push(w);
        }
    }
    trie_regex(&words)
}

/// A random path from `state` to an accepting state with between `min` and
/// `max` symbols. It may run on through accepting states.
fn walk(
    model: &BehaviourModel,
    sv: &SValueMap,
    mut state: StateId,
    min: usize,
    max: usize,
    rng: &mut impl Rng,
) -> Option<Vec<SymbolId>> {
    let mut w = Vec::new();
    loop {
        if model.is_accepting(state) && w.len() >= min && rng.random_bool(0.5) {
            return Some(w);
        }
        let left = max.checked_sub(w.len())?;
        if left == 0 {
            return model.is_accepting(state).then_some(w);
        }
        let options: Vec<_> = model
            .outgoing(state)
            .iter()
            .filter(|(_, q)| sv.get(*q).is_below(left))
            .collect();
        let &&(a, q) = options.get(rng.random_range(0..options.len().max(1)))?;
        w.push(a);
        state = q;
    }
}

fn descent(model: &BehaviourModel, sv: &SValueMap, mut q: StateId, rng: &mut impl Rng) -> Vec<SymbolId> {
    let mut w = Vec::new();
    while let Some(d) = sv.get(q).finite().filter(|&d| d > 0) {
        let steps: Vec<_> = model
            .outgoing(q)
            .iter()
            .filter(|(_, r)| sv.get(*r).finite() == Some(d - 1))
            .collect();
        let &(a, r) = steps[rng.random_range(0..steps.len())];
        w.push(a);
        q = r;
    }
    w
}

fn distances_from(model: &BehaviourModel, from: StateId) -> Vec<Option<usize>> {
    let mut dist = vec![None; model.state_count()];
    dist[from.index()] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(q) = queue.pop_front() {
        let d = dist[q.index()].unwrap();
        for &(_, r) in model.outgoing(q) {
            if dist[r.index()].is_none() {
                dist[r.index()] = Some(d + 1);
                queue.push_back(r);
            }
        }
    }
    dist
}

/// Shortest path from `from` to `to`, which must be reachable.
fn path_to(model: &BehaviourModel, from: StateId, to: StateId) -> Vec<SymbolId> {
    let mut parent: Vec<Option<(StateId, SymbolId)>> = vec![None; model.state_count()];
    let mut seen = vec![false; model.state_count()];
    seen[from.index()] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(q) = queue.pop_front() {
        if q == to {
            break;
        }
        for &(a, r) in model.outgoing(q) {
            if !seen[r.index()] {
                seen[r.index()] = true;
                parent[r.index()] = Some((q, a));
                queue.push_back(r);
            }
        }
    }
    let mut path = Vec::new();
    let mut q = to;
    while q != from {
        let (p, a) = parent[q.index()].expect("target reachable");
        path.push(a);
        q = p;
    }
    path.reverse();
    path
}

/// The shortest cycle through `p` starting with each of its edges.
fn cycles_at(model: &BehaviourModel, p: StateId) -> Vec<Vec<SymbolId>> {
    let dist_back = |q: StateId| distances_from(model, q)[p.index()];
    let mut cycles: Vec<Vec<SymbolId>> = model
        .outgoing(p)
        .iter()
        .filter(|(_, q)| dist_back(*q).is_some())
        .map(|&(a, q)| {
            let mut c = vec![a];
            c.extend(path_to(model, q, p));
            c
        })
        .collect();
    cycles.sort_by_key(Vec::len);
    cycles
}

fn seq(l: RegexNode, r: RegexNode) -> RegexNode {
    match (l, r) {
        (RegexNode::Empty, r) => r,
        (l, RegexNode::Empty) => l,
        (l, r) => RegexNode::concat(l, r),
    }
}

fn word(w: &[SymbolId]) -> RegexNode {
    w.iter()
        .fold(RegexNode::Empty, |acc, &s| seq(acc, RegexNode::Literal(s)))
}

#[derive(Default)]
struct Trie {
    end: bool,
    kids: BTreeMap<SymbolId, Trie>,
}

fn trie_regex(words: &[Vec<SymbolId>]) -> RegexNode {
    let mut root = Trie::default();
    for w in words {
        let mut node = &mut root;
        for &s in w {
            node = node.kids.entry(s).or_default();
        }
        node.end = true;
    }
    fn go(t: &Trie) -> RegexNode {
        let mut options: Vec<RegexNode> = t
            .kids
            .iter()
            .map(|(&s, kid)| seq(RegexNode::Literal(s), go(kid)))
            .collect();
        if t.end && !options.is_empty() {
            options.push(RegexNode::Empty);
        }
        options.into_iter().reduce(RegexNode::alt).unwrap_or(RegexNode::Empty)
    }
    go(&root)
}

/// Re-associates concatenation and alternation chains to the left, the shape
/// the parser builds, so rendering needs no extra parentheses.
fn left_nested(ast: &RegexNode) -> RegexNode {
    fn flatten<'a>(node: &'a RegexNode, alt: bool, parts: &mut Vec<&'a RegexNode>) {
        match node {
            RegexNode::Concat(l, r) if !alt => {
                flatten(l, alt, parts);
                flatten(r, alt, parts);
            }
            RegexNode::Alt(l, r) if alt => {
                flatten(l, alt, parts);
                flatten(r, alt, parts);
            }
            _ => parts.push(node),
        }
    }
    let rebuild = |alt: bool| {
        let mut parts = Vec::new();
        flatten(ast, alt, &mut parts);
        let join = if alt { RegexNode::alt } else { RegexNode::concat };
        parts.into_iter().map(left_nested).reduce(join).unwrap()
    };
    match ast {
        RegexNode::Concat(..) => rebuild(false),
        RegexNode::Alt(..) => rebuild(true),
        RegexNode::Star(inner) => RegexNode::star(left_nested(inner)),
        leaf => leaf.clone(),
    }
}

fn longest(ast: &RegexNode) -> usize {
    match ast {
        RegexNode::Empty => 0,
        RegexNode::Literal(_) => 1,
        RegexNode::Concat(l, r) => longest(l) + longest(r),
        RegexNode::Alt(l, r) => longest(l).max(longest(r)),
        RegexNode::Star(_) => usize::MAX / 4,
    }
}
