//! Deterministic surrogate datasets shaped like std-of-EMG feature vectors,
//! and the per-class diagonal Gaussian sampler used as the "random"
//! reference in distance reports.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Provenance};
use crate::rng::rng_for;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_classes: usize,
    pub samples_per_class: usize,
    pub n_features: usize,
    /// Class means are drawn from `U(0, cluster_mean_scale)` per feature.
    pub cluster_mean_scale: f64,
    pub within_class_std: f64,
    /// Fraction of every class mean taken from one shared pattern; 0 gives
    /// independent class centres, 1 puts all classes on the same centre.
    pub overlap: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_classes: 8,
            samples_per_class: 110,
            n_features: 16,
            cluster_mean_scale: 10.0,
            within_class_std: 0.5,
            overlap: 0.3,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn with_shape(n_classes: usize, samples_per_class: usize, n_features: usize) -> Self {
        Self {
            n_classes,
            samples_per_class,
            n_features,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::Validation("synthetic data needs at least 2 classes".into()));
        }
        if self.samples_per_class == 0 || self.n_features == 0 {
            return Err(Error::Validation(
                "samples_per_class and n_features must be positive".into(),
            ));
        }
        if !(self.within_class_std > 0.0 && self.within_class_std.is_finite()) {
            return Err(Error::Validation("within_class_std must be > 0".into()));
        }
        if !(self.cluster_mean_scale >= 0.0 && self.cluster_mean_scale.is_finite()) {
            return Err(Error::Validation("cluster_mean_scale must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::Validation("overlap must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Per-class diagonal Gaussian clusters clamped at zero. Each class draws
/// from its own RNG stream; the shared pattern uses stream 0.
pub fn make_synthetic_dataset(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let unit = Uniform::new(0.0, 1.0).expect("valid range");
    let mut shared_rng = rng_for(spec.seed, 0);
    let shared: Vec<f64> = (0..spec.n_features).map(|_| unit.sample(&mut shared_rng)).collect();

    let n = spec.n_classes * spec.samples_per_class;
    let mut x = Array2::zeros((n, spec.n_features));
    let mut labels = Vec::with_capacity(n);
    for class in 0..spec.n_classes {
        let mut rng = rng_for(spec.seed, class as u64 + 1);
        let mean: Vec<f64> = shared
            .iter()
            .map(|&s| {
                let own = unit.sample(&mut rng);
                spec.cluster_mean_scale * ((1.0 - spec.overlap) * own + spec.overlap * s)
            })
            .collect();
        for k in 0..spec.samples_per_class {
            let row = class * spec.samples_per_class + k;
            for (f, &m) in mean.iter().enumerate() {
                let e: f64 = StandardNormal.sample(&mut rng);
                x[[row, f]] = (m + spec.within_class_std * e).max(0.0);
            }
            labels.push(class);
        }
    }
    Dataset::from_features(x, labels, Provenance::Synthetic)
}

/// Mean and population standard deviation of one class, per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ClassStats {
    pub fn from_rows(x: ArrayView2<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::Validation("class has no rows".into()));
        }
        Ok(Self {
            mean: x.mean_axis(Axis(0)).expect("non-empty").to_vec(),
            std: x.std_axis(Axis(0), 0.0).to_vec(),
        })
    }
}

/// `n` diagonal-Gaussian samples for each class in `class_stats`.
pub fn gaussian_baseline_sampler<R: Rng + ?Sized>(
    class_stats: &[ClassStats],
    n: usize,
    rng: &mut R,
) -> Result<Vec<Array2<f64>>> {
    class_stats
        .iter()
        .map(|stats| {
            if stats.mean.len() != stats.std.len() {
                return Err(Error::Shape("mean and std lengths differ".into()));
            }
            if stats.std.iter().any(|&s| !(s >= 0.0)) {
                return Err(Error::Validation("negative standard deviation".into()));
            }
            let mean = Array1::from(stats.mean.clone());
            let std = Array1::from(stats.std.clone());
            let noise = Array2::from_shape_simple_fn((n, mean.len()), || {
                let e: f64 = StandardNormal.sample(rng);
                e
            });
            Ok(noise * &std + &mean)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape() {
        let ds = make_synthetic_dataset(&SynthSpec::with_shape(8, 110, 16)).unwrap();
        assert_eq!(ds.len(), 880);
        assert_eq!(ds.features().unwrap().ncols(), 16);
        assert_eq!(ds.class_counts(), vec![110; 8]);
        assert_eq!(ds.provenance, Provenance::Synthetic);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SynthSpec::default();
        let a = make_synthetic_dataset(&spec).unwrap();
        assert_eq!(a, make_synthetic_dataset(&spec).unwrap());
        let other = SynthSpec { seed: 1, ..spec };
        let b = make_synthetic_dataset(&other).unwrap();
        assert_ne!(a.features().unwrap(), b.features().unwrap());
        assert_eq!(a.len(), b.len());
    }

    #[test]
    fn finite_and_non_negative() {
        let spec = SynthSpec {
            cluster_mean_scale: 0.1,
            within_class_std: 2.0,
            ..SynthSpec::default()
        };
        let x = make_synthetic_dataset(&spec).unwrap().features().unwrap();
        assert!(x.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn invalid_specs() {
        for bad in [
            SynthSpec { n_classes: 1, ..SynthSpec::default() },
            SynthSpec { within_class_std: 0.0, ..SynthSpec::default() },
            SynthSpec { overlap: 1.5, ..SynthSpec::default() },
        ] {
            assert!(make_synthetic_dataset(&bad).is_err());
        }
    }

    #[test]
    fn zero_std_returns_mean() {
        let stats = [ClassStats { mean: vec![1.5, -2.0], std: vec![0.0, 0.0] }];
        let mut rng = rng_for(1, 1);
        let s = gaussian_baseline_sampler(&stats, 4, &mut rng).unwrap();
        assert!(s[0].rows().into_iter().all(|r| r[0] == 1.5 && r[1] == -2.0));
    }

    #[test]
    fn empirical_mean_within_one_percent() {
        let stats = [ClassStats { mean: vec![5.0, 2.0], std: vec![1.0, 0.5] }];
        let mut rng = rng_for(2, 2);
        let s = gaussian_baseline_sampler(&stats, 100_000, &mut rng).unwrap();
        let m = s[0].mean_axis(Axis(0)).unwrap();
        assert!((m[0] - 5.0).abs() < 0.05);
        assert!((m[1] - 2.0).abs() < 0.02);
    }
}
