use std::collections::BTreeSet;

use ndarray::{concatenate, Array2, Axis};

use super::dataset::Dataset;
use super::features::{fit_standardizer, Standardizer};
use super::split::{split_dataset, Split, SplitAssignment};
use super::targets::target_matrix;
use crate::{Error, Result};

/// Source flag of a real data-set row.
pub const REAL: u8 = 1;
/// Source flag of a generator-produced row.
pub const GENERATED: u8 = 0;

/// Feature rows with dense class labels, a per-row source flag and the
/// per-row target confidence `p'` (1.0 means one-hot).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub x: Array2<f64>,
    pub labels: Vec<usize>,
    pub sources: Vec<u8>,
    pub p_prime: Vec<f64>,
}

impl FeatureSet {
    pub fn real(x: Array2<f64>, labels: Vec<usize>) -> Self {
        let n = labels.len();
        Self {
            x,
            labels,
            sources: vec![REAL; n],
            p_prime: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            x: self.x.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            sources: indices.iter().map(|&i| self.sources[i]).collect(),
            p_prime: indices.iter().map(|&i| self.p_prime[i]).collect(),
        }
    }

    pub fn append(&self, other: &FeatureSet) -> Result<Self> {
        let x = concatenate(Axis(0), &[self.x.view(), other.x.view()])
            .map_err(|e| Error::Shape(e.to_string()))?;
        Ok(Self {
            x,
            labels: [self.labels.as_slice(), other.labels.as_slice()].concat(),
            sources: [self.sources.as_slice(), other.sources.as_slice()].concat(),
            p_prime: [self.p_prime.as_slice(), other.p_prime.as_slice()].concat(),
        })
    }

    /// Target matrix built from the stored `p'` values.
    pub fn targets(&self, n_classes: usize) -> Result<Array2<f64>> {
        target_matrix(&self.labels, &self.p_prime, n_classes)
    }

    /// Rows of one class.
    pub fn class_rows(&self, class: usize) -> Array2<f64> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i] == class).collect();
        self.x.select(Axis(0), &idx)
    }
}

/// Trained classes relabeled to `0..n_c`, plus the held-out novel pool.
#[derive(Debug, Clone, PartialEq)]
pub struct NovelHoldOut {
    pub trained: Dataset,
    pub trained_indices: Vec<usize>,
    pub novel: Dataset,
    pub novel_indices: Vec<usize>,
    /// `class_map[new] = original label`.
    pub class_map: Vec<usize>,
}

pub fn hold_out_novel(ds: &Dataset, novel: &BTreeSet<usize>) -> Result<NovelHoldOut> {
    if novel.is_empty() {
        return Err(Error::Validation("novel class set is empty".into()));
    }
    let present: BTreeSet<usize> = ds.labels.iter().copied().collect();
    if let Some(missing) = novel.iter().find(|c| !present.contains(c)) {
        return Err(Error::Validation(format!(
            "novel class {missing} does not occur in the dataset"
        )));
    }
    let class_map: Vec<usize> = present.difference(novel).copied().collect();
    if class_map.is_empty() {
        return Err(Error::Validation(
            "novel classes cover every class; nothing left to train on".into(),
        ));
    }
    let mut dense = vec![usize::MAX; ds.n_classes()];
    for (new, &old) in class_map.iter().enumerate() {
        dense[old] = new;
    }
    let (novel_indices, trained_indices): (Vec<usize>, Vec<usize>) =
        (0..ds.len()).partition(|&i| novel.contains(&ds.labels[i]));
    let mut trained = ds.subset(&trained_indices);
    for l in &mut trained.labels {
        *l = dense[*l];
    }
    if let Some(names) = &ds.class_names {
        trained.class_names = Some(class_map.iter().filter_map(|&c| names.get(c).cloned()).collect());
    }
    Ok(NovelHoldOut {
        trained,
        trained_indices,
        novel: ds.subset(&novel_indices),
        novel_indices,
        class_map,
    })
}

/// Split, hold-out and standardized views ready for training and scoring.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub split: SplitAssignment,
    pub standardizer: Standardizer,
    pub class_map: Vec<usize>,
    pub train: FeatureSet,
    pub val: FeatureSet,
    pub test: FeatureSet,
    /// Every sample of the novel classes; labels keep their original values.
    pub novel: FeatureSet,
}

impl PreparedData {
    pub fn n_classes(&self) -> usize {
        self.class_map.len()
    }

    pub fn n_features(&self) -> usize {
        self.train.n_features()
    }

    /// All standardized real samples of the trained classes (all splits).
    pub fn all_trained(&self) -> Result<FeatureSet> {
        self.train.append(&self.val)?.append(&self.test)
    }
}

/// Hold out `novel`, split the rest 60/20/20 and standardize everything with
/// statistics of the Train rows.
pub fn prepare(ds: &Dataset, novel: &BTreeSet<usize>, seed: u64) -> Result<PreparedData> {
    let hold = hold_out_novel(ds, novel)?;
    let split = split_dataset(ds, novel, seed)?;
    let features = ds.features()?;

    let mut dense = vec![usize::MAX; ds.n_classes()];
    for (new, &old) in hold.class_map.iter().enumerate() {
        dense[old] = new;
    }
    let pick = |which: Split| -> (Vec<usize>, Vec<usize>) {
        hold.trained_indices
            .iter()
            .filter(|&&i| split.tags[i] == which)
            .map(|&i| (i, dense[ds.labels[i]]))
            .unzip()
    };
    let (train_idx, train_labels) = pick(Split::Train);
    let (val_idx, val_labels) = pick(Split::Val);
    let (test_idx, test_labels) = pick(Split::Test);

    let train_raw = features.select(Axis(0), &train_idx);
    let standardizer = fit_standardizer(train_raw.view())?;
    let view = |idx: &[usize], labels: Vec<usize>| -> Result<FeatureSet> {
        Ok(FeatureSet::real(
            standardizer.transform(features.select(Axis(0), idx).view())?,
            labels,
        ))
    };
    let train = view(&train_idx, train_labels)?;
    let val = view(&val_idx, val_labels)?;
    let test = view(&test_idx, test_labels)?;
    let novel_labels = hold.novel.labels.clone();
    let novel_set = view(&hold.novel_indices, novel_labels)?;
    Ok(PreparedData {
        split,
        standardizer,
        class_map: hold.class_map,
        train,
        val,
        test,
        novel: novel_set,
    })
}
