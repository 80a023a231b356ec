//! Independent re-check of labels against the model and the patterns.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{Label, LabeledSequence};
use crate::automaton::BehaviourModel;
use crate::pattern::FailurePattern;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Empty,
    TooLong {
        len: usize,
        mlsl: usize,
    },
    RejectedByModel,
    /// A failure record without a pattern ID.
    MissingPattern,
    UnknownPattern(String),
    /// A failure record its own pattern does not match.
    PatternMismatch(String),
    /// A normal record matched by a checked pattern.
    MatchesPattern(String),
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::Empty => f.write_str("empty sequence"),
            ViolationKind::TooLong { len, mlsl } => write!(f, "length {len} exceeds mlsl {mlsl}"),
            ViolationKind::RejectedByModel => f.write_str("sequence is not accepted by the model"),
            ViolationKind::MissingPattern => f.write_str("failure record names no pattern"),
            ViolationKind::UnknownPattern(id) => write!(f, "unknown pattern `{id}`"),
            ViolationKind::PatternMismatch(id) => write!(f, "failure record does not match its pattern `{id}`"),
            ViolationKind::MatchesPattern(id) => write!(f, "normal record matches pattern `{id}`"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub label: Label,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "record {} ({}): {}", self.index, self.label, self.kind)
    }
}

/// Checks every record: length within `1..=mlsl`, accepted by the model, and
/// a label consistent with the patterns. Normal records are checked against
/// the patterns named in `checked`.
pub fn audit_records<'a, I>(
    records: I,
    model: &BehaviourModel,
    patterns: &[FailurePattern],
    checked: &[String],
    mlsl: usize,
) -> Vec<Violation>
where
    I: IntoIterator<Item = &'a LabeledSequence>,
{
    let find = |id: &str| patterns.iter().find(|p| p.id == id);
    let mut out = Vec::new();
    for r in records {
        let mut report = |kind| {
            out.push(Violation {
                index: r.index,
                label: r.label,
                kind,
            })
        };
        if r.is_empty() {
            report(ViolationKind::Empty);
        }
        if r.len() > mlsl {
            report(ViolationKind::TooLong { len: r.len(), mlsl });
        }
        if !model.accepts(&r.templates) {
            report(ViolationKind::RejectedByModel);
        }
        match r.label {
            Label::Failure => match r.pattern_id.as_deref() {
                None => report(ViolationKind::MissingPattern),
                Some(id) => match find(id) {
                    None => report(ViolationKind::UnknownPattern(id.into())),
                    Some(p) if !p.matches(&r.templates) => report(ViolationKind::PatternMismatch(id.into())),
                    Some(_) => {}
                },
            },
            Label::Normal => {
                for id in checked {
                    match find(id) {
                        None => report(ViolationKind::UnknownPattern(id.clone())),
                        Some(p) if p.matches(&r.templates) => report(ViolationKind::MatchesPattern(id.clone())),
                        Some(_) => {}
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::tests::example_model;
    use alloc::string::ToString;
    use alloc::vec;

    fn rec(model: &BehaviourModel, word: &[&str], label: Label, pattern: Option<&str>) -> LabeledSequence {
        LabeledSequence {
            templates: model.encode_word(word).unwrap(),
            label,
            pattern_id: pattern.map(str::to_string),
            index: 7,
            origin: None,
        }
    }

    #[test]
    fn flipped_labels_are_caught() {
        let m = example_model();
        let p = FailurePattern::compile("f", "example", "c d", m.symbol_names(), None).unwrap();
        let checked = vec!["f".to_string()];
        let good = [
            rec(&m, &["c", "d"], Label::Failure, Some("f")),
            rec(&m, &["c", "c"], Label::Normal, None),
        ];
        assert!(audit_records(&good, &m, core::slice::from_ref(&p), &checked, 5).is_empty());

        let bad = [
            rec(&m, &["c", "d"], Label::Normal, None),
            rec(&m, &["c", "c"], Label::Failure, Some("f")),
            rec(&m, &["d", "d"], Label::Failure, None),
        ];
        let kinds: Vec<ViolationKind> = audit_records(&bad, &m, &[p], &checked, 5)
            .into_iter()
            .map(|v| v.kind)
            .collect();
        assert_eq!(
            kinds,
            [
                ViolationKind::MatchesPattern("f".into()),
                ViolationKind::PatternMismatch("f".into()),
                ViolationKind::MissingPattern,
            ]
        );
    }

    #[test]
    fn structural_violations() {
        let m = example_model();
        let rs = [
            rec(&m, &[], Label::Normal, None),
            rec(&m, &["a", "a", "c", "c", "d", "d"], Label::Normal, None),
            rec(&m, &["b", "b"], Label::Normal, None),
        ];
        let v = audit_records(&rs, &m, &[], &[], 5);
        let kinds: Vec<ViolationKind> = v.iter().map(|v| v.kind.clone()).collect();
        assert_eq!(
            kinds,
            [
                ViolationKind::Empty,
                ViolationKind::RejectedByModel,
                ViolationKind::TooLong { len: 6, mlsl: 5 },
                ViolationKind::RejectedByModel,
                ViolationKind::RejectedByModel,
            ]
        );
        assert_eq!(v[0].to_string(), "record 7 (normal): empty sequence");
    }
}
