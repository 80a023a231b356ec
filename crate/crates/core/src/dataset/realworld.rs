//! Turning labelled real-world task logs into failure-prediction sequences.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Label, LabeledSequence};
use crate::automaton::SymbolId;

/// One log line of a task. `T` orders lines within a task.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawLogRecord<T> {
    pub task_id: String,
    pub timestamp: T,
    pub template_id: String,
    pub is_failure_message: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DropReason {
    /// The first message of a failing task is already a failure message.
    EmptyAfterTruncation,
    /// The task has log lines but no label.
    MissingLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DroppedTask {
    pub task_id: String,
    pub reason: DropReason,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealWorldCorpus {
    /// Interned template IDs in first-appearance order.
    pub symbols: Vec<String>,
    /// Task IDs, parallel to `records`.
    pub task_ids: Vec<String>,
    pub records: Vec<LabeledSequence>,
    pub dropped: Vec<DroppedTask>,
}

/// Builds one sequence per task, ordered by timestamp.
///
/// Failing tasks are cut strictly before their first failure message, and
/// only the last `cap` entries of a sequence are kept. Tasks appear in the
/// order of their first log line. Equal timestamps keep input order.
pub fn prepare_real_world<T: Ord>(
    records: Vec<RawLogRecord<T>>,
    task_labels: &BTreeMap<String, Label>,
    cap: usize,
) -> RealWorldCorpus {
    let mut order: Vec<String> = Vec::new();
    let mut by_task: BTreeMap<String, Vec<(T, String, bool)>> = BTreeMap::new();
    for r in records {
        let lines = by_task.entry(r.task_id.clone()).or_insert_with(|| {
            order.push(r.task_id.clone());
            Vec::new()
        });
        lines.push((r.timestamp, r.template_id, r.is_failure_message));
    }

    let mut symbols: Vec<String> = Vec::new();
    let mut symbol_ids: BTreeMap<String, SymbolId> = BTreeMap::new();
    let mut corpus = RealWorldCorpus {
        symbols: Vec::new(),
        task_ids: Vec::new(),
        records: Vec::new(),
        dropped: Vec::new(),
    };

    for task_id in order {
        let mut lines = by_task.remove(&task_id).expect("every ordered task has lines");
        let Some(&label) = task_labels.get(&task_id) else {
            corpus.dropped.push(DroppedTask {
                task_id,
                reason: DropReason::MissingLabel,
            });
            continue;
        };
        lines.sort_by(|a, b| a.0.cmp(&b.0));
        let mut end = lines.len();
        if label == Label::Failure {
            if let Some(first) = lines.iter().position(|l| l.2) {
                end = first;
            }
            if end == 0 {
                corpus.dropped.push(DroppedTask {
                    task_id,
                    reason: DropReason::EmptyAfterTruncation,
                });
                continue;
            }
        }
        let start = end.saturating_sub(cap);
        let templates = lines
            .drain(start..end)
            .map(|(_, template, _)| {
                *symbol_ids.entry(template.clone()).or_insert_with(|| {
                    symbols.push(template);
                    SymbolId((symbols.len() - 1) as u32)
                })
            })
            .collect();
        corpus.records.push(LabeledSequence {
            templates,
            label,
            pattern_id: None,
            index: corpus.records.len(),
            origin: None,
        });
        corpus.task_ids.push(task_id);
    }
    corpus.symbols = symbols;
    corpus
}
