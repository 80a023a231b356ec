//! Stratified 64/16/20 splits and training-set oversampling.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AssembleError, Label, LabeledSequence};

/// Record positions of each split, in ascending order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// `(train, validation, test)` sizes: 20% of the records for test, then 20%
/// of the remainder for validation, both rounded half up.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let test = (2 * n + 5) / 10;
    let rest = n - test;
    let validation = (2 * rest + 5) / 10;
    (rest - validation, validation, test)
}

/// `round(part * of / total)` in integers.
fn share(part: usize, of: usize, total: usize) -> usize {
    if total == 0 {
        return 0;
    }
    (2 * part * of + total) / (2 * total)
}

/// Splits `records` into train, validation and test sets so that each split
/// keeps the overall failure share within one record.
pub fn split<R: Rng + ?Sized>(records: &[LabeledSequence], rng: &mut R) -> Splits {
    let mut failures: Vec<usize> = Vec::new();
    let mut normals: Vec<usize> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        match r.label {
            Label::Failure => failures.push(i),
            Label::Normal => normals.push(i),
        }
    }
    failures.shuffle(rng);
    normals.shuffle(rng);

    let n = records.len();
    let (_, validation_n, test_n) = split_sizes(n);
    let test_f = share(test_n, failures.len(), n);
    let rest_n = n - test_n;
    let rest_f = failures.len() - test_f;
    let validation_f = share(validation_n, rest_f, rest_n);

    let mut f = failures.into_iter();
    let mut q = normals.into_iter();
    let mut take = |count: usize, failures: usize| {
        let mut out: Vec<usize> = f
            .by_ref()
            .take(failures)
            .chain(q.by_ref().take(count - failures))
            .collect();
        out.sort_unstable();
        out
    };
    let test = take(test_n, test_f);
    let validation = take(validation_n, validation_f);
    let train = take(rest_n - validation_n, rest_f - validation_f);
    Splits {
        train,
        validation,
        test,
    }
}

/// Balances a training set by duplicating minority-class records, drawn
/// uniformly with replacement, until both labels have equal counts.
///
/// Each duplicate's `origin` holds the index of the record it copies.
pub fn oversample<R: Rng + ?Sized>(
    train: &[LabeledSequence],
    rng: &mut R,
) -> Result<Vec<LabeledSequence>, AssembleError> {
    let count = |label| train.iter().filter(|r| r.label == label).count();
    let (failures, normals) = (count(Label::Failure), count(Label::Normal));
    if failures == 0 {
        return Err(AssembleError::DegenerateClass(Label::Failure));
    }
    if normals == 0 {
        return Err(AssembleError::DegenerateClass(Label::Normal));
    }
    let (minority, deficit) = if failures < normals {
        (Label::Failure, normals - failures)
    } else {
        (Label::Normal, failures - normals)
    };
    let pool: Vec<&LabeledSequence> = train.iter().filter(|r| r.label == minority).collect();
    let mut out = train.to_vec();
    out.reserve(deficit);
    for _ in 0..deficit {
        let source = pool[rng.random_range(0..pool.len())];
        let mut copy = source.clone();
        copy.origin = Some(source.index);
        out.push(copy);
    }
    Ok(out)
}
