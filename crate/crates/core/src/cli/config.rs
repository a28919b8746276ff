use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::experiment::Variant;
use crate::data::{load_dataset, prepare, Dataset, LoadOptions, PreparedData};
use crate::gan::GanConfig;
use crate::synth::{make_synthetic_dataset, SynthSpec};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        #[serde(default)]
        channels: Option<Vec<usize>>,
    },
    Synth { spec: SynthSpec },
}

impl DatasetSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSource::Csv { path, channels } => load_dataset(
                path,
                &LoadOptions {
                    channels: channels.clone(),
                },
            ),
            DatasetSource::Synth { spec } => make_synthetic_dataset(spec),
        }
    }
}

/// Fully resolved description of one run; written as `manifest.json` and
/// accepted back by `train --manifest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    pub novel_classes: Vec<usize>,
    pub variant: Variant,
    pub gan: GanConfig,
    pub target_gca: Vec<f64>,
    pub seed: u64,
}

impl RunConfig {
    /// Checks that do not need the data set.
    pub fn validate(&self) -> Result<()> {
        if self.novel_classes.is_empty() {
            return Err(Error::Validation("at least one novel class is required".into()));
        }
        if let Some(p) = self.target_gca.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return Err(Error::Validation(format!("target GCA {p} must lie in (0, 1]")));
        }
        if self.gan.seed != self.seed {
            return Err(Error::Validation(format!(
                "GAN seed {} differs from run seed {}",
                self.gan.seed, self.seed
            )));
        }
        if let DatasetSource::Synth { spec } = &self.dataset {
            spec.validate()?;
        }
        Ok(())
    }

    pub fn novel_set(&self) -> BTreeSet<usize> {
        self.novel_classes.iter().copied().collect()
    }

    /// Load, split and standardize; also validates the GAN settings against
    /// the number of trained classes.
    pub fn prepare(&self) -> Result<PreparedData> {
        self.validate()?;
        let ds = self.dataset.load()?;
        let data = prepare(&ds, &self.novel_set(), self.seed)?;
        self.gan.validate(data.n_classes())?;
        Ok(data)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json).map_err(|e| Error::io(&path, e))
    }

    /// Accepts either a manifest file or a run directory containing one.
    pub fn load(path: &Path) -> Result<Self> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
