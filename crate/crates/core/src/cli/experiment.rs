//! Variant runner shared by the command-line front end and the test suite.

use std::path::Path;

use ndarray::{concatenate, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{FeatureSet, PreparedData};
use crate::eval::{evaluate_at, novelty_scores, roc_auc, tune_threshold, EvalReport, RocPoint, Truth};
use crate::gan::{augment_offline, train_baseline, train_gan, BaselineConfig, BaselineOutcome, GanBundle, GanConfig, CLASS_HEAD};
use crate::nn::Network;
use crate::rng::SeedStreams;
use crate::{Error, Result};

/// Share of extra generated rows appended for offline augmentation.
pub const OFFLINE_FRACTION: f64 = 0.5;

const AUGMENT_STREAM: &str = "augment";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum Variant {
    /// Classifier trained on one-hot targets.
    #[serde(rename = "baseline_a")]
    #[value(name = "baseline_a")]
    BaselineA,
    /// Classifier trained on stochastic targets, `p' ~ U(0.8, 1.0)`.
    #[serde(rename = "test_1a")]
    #[value(name = "test_1a")]
    Test1a,
    /// Discriminator as trained inside the GAN.
    #[serde(rename = "test_2")]
    #[value(name = "test_2")]
    Test2,
    /// GAN discriminator retrained on real plus offline-generated rows.
    #[serde(rename = "test_3")]
    #[value(name = "test_3")]
    Test3,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::BaselineA, Variant::Test1a, Variant::Test2, Variant::Test3];

    pub fn name(self) -> &'static str {
        match self {
            Variant::BaselineA => "baseline_a",
            Variant::Test1a => "test_1a",
            Variant::Test2 => "test_2",
            Variant::Test3 => "test_3",
        }
    }

    pub fn uses_gan(self) -> bool {
        matches!(self, Variant::Test2 | Variant::Test3)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything a variant run produces.
#[derive(Debug, Clone)]
pub struct VariantRun {
    pub variant: Variant,
    /// The network whose class head is scored.
    pub classifier: Network,
    pub gan: Option<GanBundle>,
    pub baseline: Option<BaselineOutcome>,
}

/// Settings for retraining the GAN discriminator on the augmented set: the
/// discriminator's own learning rate and momentum, stochastic targets from
/// the GAN's `p'` range.
pub fn retrain_config(gan: &GanConfig) -> BaselineConfig {
    BaselineConfig {
        learning_rate: gan.lr_d,
        beta1: gan.adam_beta1,
        batch_size: gan.batch_size,
        stochastic_p_range: Some(gan.stochastic_p_range),
        seed: gan.seed,
        ..BaselineConfig::default()
    }
}

pub fn run_variant(
    data: &PreparedData,
    variant: Variant,
    gan_config: &GanConfig,
    checkpoint_dir: Option<&Path>,
) -> Result<VariantRun> {
    let n_c = data.n_classes();
    let seed = gan_config.seed;
    let (classifier, gan, baseline) = match variant {
        Variant::BaselineA | Variant::Test1a => {
            let config = if variant == Variant::BaselineA {
                BaselineConfig::one_hot(seed)
            } else {
                BaselineConfig::stochastic(seed)
            };
            let out = train_baseline(&data.train, &data.val, n_c, &config, None)?;
            (out.network.clone(), None, Some(out))
        }
        Variant::Test2 => {
            let bundle = train_gan(&data.train, n_c, gan_config, checkpoint_dir)?;
            (bundle.discriminator.clone(), Some(bundle), None)
        }
        Variant::Test3 => {
            let bundle = train_gan(&data.train, n_c, gan_config, checkpoint_dir)?;
            let mut rng = SeedStreams::new(seed).stream(AUGMENT_STREAM);
            let augmented = augment_offline(
                &data.train,
                &bundle.generator,
                n_c,
                OFFLINE_FRACTION,
                gan_config.stochastic_p_range,
                &mut rng,
            )?;
            let out = train_baseline(
                &augmented,
                &data.val,
                n_c,
                &retrain_config(gan_config),
                Some(bundle.discriminator.clone()),
            )?;
            (out.network.clone(), Some(bundle), Some(out))
        }
    };
    Ok(VariantRun {
        variant,
        classifier,
        gan,
        baseline,
    })
}

/// Trained-class test rows followed by every novel row.
pub fn evaluation_set(data: &PreparedData) -> Result<(Array2<f64>, Vec<Truth>)> {
    let x = concatenate(Axis(0), &[data.test.x.view(), data.novel.x.view()]).map_err(|e| Error::Shape(e.to_string()))?;
    let truths = data
        .test
        .labels
        .iter()
        .map(|&l| Truth::Trained(l))
        .chain(std::iter::repeat_n(Truth::Novel, data.novel.len()))
        .collect();
    Ok((x, truths))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    /// `None` for the fixed `tau = 0` row.
    pub target_gca: Option<f64>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub rows: Vec<EvalRow>,
    pub roc: Vec<RocPoint>,
    pub auc: f64,
}

/// The `tau = 0` row, one tuned row per target GCA and the ROC curve of the
/// novelty score `1 - max p`.
pub fn evaluate_classifier(classifier: &Network, data: &PreparedData, target_gcas: &[f64]) -> Result<Evaluation> {
    let (x, truths) = evaluation_set(data)?;
    let probs = classifier.predict(&[x.view()])?.swap_remove(CLASS_HEAD);
    evaluate_probs(&probs, &truths, target_gcas)
}

pub fn evaluate_probs(probs: &Array2<f64>, truths: &[Truth], target_gcas: &[f64]) -> Result<Evaluation> {
    let scores = novelty_scores(probs.view());
    let is_novel: Vec<bool> = truths.iter().map(|t| *t == Truth::Novel).collect();
    let (roc, auc) = roc_auc(&scores, &is_novel)?;
    let mut rows = vec![EvalRow {
        target_gca: None,
        report: evaluate_at(probs.view(), truths, 0.0)?,
    }];
    for &p in target_gcas {
        let (_, report) = tune_threshold(probs.view(), truths, p)?;
        rows.push(EvalRow {
            target_gca: Some(p),
            report,
        });
    }
    for row in &mut rows {
        row.report.auc = Some(auc);
    }
    Ok(Evaluation { rows, roc, auc })
}

/// Real standardized rows of each trained class, across every split.
pub fn real_by_class(data: &PreparedData) -> Result<Vec<Array2<f64>>> {
    let all: FeatureSet = data.all_trained()?;
    Ok((0..data.n_classes()).map(|c| all.class_rows(c)).collect())
}
