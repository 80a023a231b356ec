use alloc::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Label, LabeledSequence};

/// Summary statistics of a set of labelled sequences.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub sequences: usize,
    pub failure_count: usize,
    pub failure_pct: f64,
    /// Average log-sequence length.
    pub avg_lsl: f64,
    pub min_lsl: usize,
    pub max_lsl: usize,
    /// Distinct templates occurring in any sequence.
    pub unique_templates: usize,
}

pub fn compute_stats<'a, I>(records: I) -> DatasetStats
where
    I: IntoIterator<Item = &'a LabeledSequence>,
{
    let mut stats = DatasetStats {
        min_lsl: usize::MAX,
        ..DatasetStats::default()
    };
    let mut total_len = 0usize;
    let mut templates = BTreeSet::new();
    for r in records {
        stats.sequences += 1;
        if r.label == Label::Failure {
            stats.failure_count += 1;
        }
        total_len += r.len();
        stats.min_lsl = stats.min_lsl.min(r.len());
        stats.max_lsl = stats.max_lsl.max(r.len());
        templates.extend(r.templates.iter().copied());
    }
    if stats.sequences == 0 {
        return DatasetStats::default();
    }
    stats.failure_pct = 100.0 * stats.failure_count as f64 / stats.sequences as f64;
    stats.avg_lsl = total_len as f64 / stats.sequences as f64;
    stats.unique_templates = templates.len();
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::SymbolId;
    use alloc::vec;
    use alloc::vec::Vec;

    fn rec(ids: &[u32], label: Label) -> LabeledSequence {
        LabeledSequence {
            templates: ids.iter().copied().map(SymbolId).collect(),
            label,
            pattern_id: None,
            index: 0,
            origin: None,
        }
    }

    #[test]
    fn summary() {
        let rs = vec![
            rec(&[0, 1, 2], Label::Normal),
            rec(&[3], Label::Failure),
            rec(&[0, 0, 0, 1], Label::Normal),
            rec(&[1, 1], Label::Normal),
        ];
        let s = compute_stats(&rs);
        assert_eq!(s.sequences, 4);
        assert_eq!(s.failure_count, 1);
        assert_eq!(s.failure_pct, 25.0);
        assert_eq!(s.avg_lsl, 2.5);
        assert_eq!((s.min_lsl, s.max_lsl), (1, 4));
        assert_eq!(s.unique_templates, 4);
    }

    #[test]
    fn empty() {
        let none: Vec<LabeledSequence> = Vec::new();
        assert_eq!(compute_stats(&none), DatasetStats::default());
    }
}
