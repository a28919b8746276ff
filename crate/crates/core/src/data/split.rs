use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::rng::{SeedStreams, SPLIT};
use crate::{Error, Result};

/// Smallest trained class the 60/20/20 split accepts.
pub const MIN_CLASS_SIZE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub tags: Vec<Split>,
    pub seed: u64,
}

impl SplitAssignment {
    pub fn indices(&self, split: Split) -> Vec<usize> {
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == split)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Stratified 60/20/20 split of every trained class; all samples of the
/// `novel` classes go to Test. Deterministic in `(dataset, novel, seed)`.
pub fn split_dataset(ds: &Dataset, novel: &BTreeSet<usize>, seed: u64) -> Result<SplitAssignment> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.n_classes()];
    for (i, &l) in ds.labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = SeedStreams::new(seed).stream(SPLIT);
    let mut tags = vec![Split::Test; ds.len()];
    for (class, members) in by_class.iter_mut().enumerate() {
        if novel.contains(&class) || members.is_empty() {
            continue;
        }
        let n = members.len();
        if n < MIN_CLASS_SIZE {
            return Err(Error::Validation(format!(
                "class {class} has {n} samples, at least {MIN_CLASS_SIZE} required"
            )));
        }
        members.shuffle(&mut rng);
        let n_train = (0.6 * n as f64).round() as usize;
        let n_val = (0.2 * n as f64).round() as usize;
        for (k, &i) in members.iter().enumerate() {
            tags[i] = if k < n_train {
                Split::Train
            } else if k < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }
    Ok(SplitAssignment { tags, seed })
}
