//! Gaussian-cluster datasets with a shared contamination cloud.
//!
//! Class means have i.i.d. `N(0, separation²)` coordinates and members are
//! drawn around them with unit covariance. A fraction of every class is then
//! redrawn from an isotropic cloud at the origin whose per-coordinate
//! standard deviation is `noise_scale / sqrt(dim)`, so `noise_scale` is the
//! cloud's RMS radius. Redrawn samples keep their labels, which makes them
//! hard for any classifier.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed, shuffle};

/// Class shares of the nine body-constitution types, in percent.
pub const CONSTITUTION_PRIORS: [f64; 9] = [34.8, 16.3, 5.2, 11.1, 11.3, 9.1, 4.1, 0.4, 7.2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub class_count: usize,
    pub dim: usize,
    /// Total sample count, split across classes by `priors`.
    pub samples: usize,
    /// Relative class weights; `None` means balanced.
    #[serde(default)]
    pub priors: Option<Vec<f64>>,
    pub cluster_separation: f64,
    pub contamination_fraction: f64,
    pub contamination_noise_scale: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.class_count < 2 || self.dim < 1 {
            return Err(Error::arg(
                "synthetic data needs at least 2 classes and 1 dimension",
            ));
        }
        if !(0.0..1.0).contains(&self.contamination_fraction) {
            return Err(Error::arg(format!(
                "contamination fraction {} must lie in [0, 1)",
                self.contamination_fraction
            )));
        }
        if !(self.cluster_separation >= 0.0 && self.cluster_separation.is_finite())
            || !(self.contamination_noise_scale >= 0.0
                && self.contamination_noise_scale.is_finite())
        {
            return Err(Error::arg(
                "separation and noise scale must be finite and non-negative",
            ));
        }
        if let Some(p) = &self.priors {
            if p.len() != self.class_count || p.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                return Err(Error::arg(format!(
                    "priors need {} positive finite weights",
                    self.class_count
                )));
            }
        }
        let counts = self.class_sizes();
        if counts.contains(&0) {
            return Err(Error::arg(format!(
                "{} samples leave some class empty under these priors",
                self.samples
            )));
        }
        Ok(())
    }

    /// Per-class sample counts (largest remainder, ties to lower class).
    pub fn class_sizes(&self) -> Vec<usize> {
        let weights = self
            .priors
            .clone()
            .unwrap_or_else(|| vec![1.0; self.class_count]);
        let total: f64 = weights.iter().sum();
        let exact: Vec<f64> = weights
            .iter()
            .map(|w| w / total * self.samples as f64)
            .collect();
        let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let missing = self.samples - counts.iter().sum::<usize>();
        for &c in order.iter().take(missing) {
            counts[c] += 1;
        }
        counts
    }
}

/// Generated data plus which samples were redrawn from the cloud.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub dataset: Dataset,
    /// Indexed like `dataset.samples()`.
    pub contaminated: Vec<bool>,
    pub class_means: Vec<Vec<f64>>,
}

fn gaussian(rng: &mut crate::seed::SeededRng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect()
}

pub fn generate_synthetic_with_truth(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut mean_rng = rng_from_seed(derive_seed(spec.seed, "synthetic-means", 0));
    let class_means: Vec<Vec<f64>> = (0..spec.class_count)
        .map(|_| gaussian(&mut mean_rng, spec.dim, spec.cluster_separation))
        .collect();
    let cloud_sd = spec.contamination_noise_scale / (spec.dim as f64).sqrt();
    let mut samples = Vec::with_capacity(spec.samples);
    let mut contaminated = Vec::with_capacity(spec.samples);
    for (c, &size) in spec.class_sizes().iter().enumerate() {
        let mut rng = rng_from_seed(derive_seed(spec.seed, "synthetic-class", c as u64));
        let redraw =
            crate::seed::round_half_up(spec.contamination_fraction * size as f64).min(size);
        let mut flags: Vec<bool> = (0..size).map(|i| i < redraw).collect();
        shuffle(&mut rng, &mut flags);
        for flag in flags {
            let features = if flag {
                gaussian(&mut rng, spec.dim, cloud_sd)
            } else {
                let noise = gaussian(&mut rng, spec.dim, 1.0);
                noise
                    .iter()
                    .zip(&class_means[c])
                    .map(|(n, m)| n + m)
                    .collect()
            };
            samples.push(Sample {
                id: samples.len() as u64,
                label: c,
                features,
            });
            contaminated.push(flag);
        }
    }
    let names = (0..spec.class_count).map(|c| format!("class{c}")).collect();
    Ok(SyntheticData {
        dataset: Dataset::new(samples, names)?,
        contaminated,
        class_means,
    })
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    generate_synthetic_with_truth(spec).map(|d| d.dataset)
}

/// Mean Euclidean distance over all unordered pairs; `None` below 2 rows.
pub fn mean_pairwise_distance(rows: &[&[f64]]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let mut sum = 0.0;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            sum += crate::classifiers::squared_distance(rows[i], rows[j]).sqrt();
        }
    }
    let pairs = rows.len() * (rows.len() - 1) / 2;
    Some(sum / pairs as f64)
}
