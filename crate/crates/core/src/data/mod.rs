//! Labelled feature-vector datasets, the feature CSV carrier and the
//! splitting primitives used by the evaluation protocol.

mod csv_io;
mod split;

pub use csv_io::{load_feature_csv, read_class_order, read_feature_csv, write_feature_csv};
pub use split::{
    holdout_split, random_kfold, stratified_kfold, subsample_per_class, FoldAssignment,
};

use std::collections::HashSet;

use crate::error::{Error, Result};

/// One labelled observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: u64,
    pub label: usize,
    pub features: Vec<f64>,
}

/// A non-empty collection of samples sharing a dimension and a class table.
///
/// The class table may list classes that have no samples; subsets of a
/// dataset keep the parent's table so label indices stay comparable.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    dim: usize,
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, class_names: Vec<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Data("dataset has no samples".into()));
        }
        if class_names.is_empty() {
            return Err(Error::Data("dataset has an empty class table".into()));
        }
        let mut names = HashSet::new();
        for name in &class_names {
            if !names.insert(name.as_str()) {
                return Err(Error::Data(format!("duplicate class name {name:?}")));
            }
        }
        let dim = samples[0].features.len();
        let mut ids = HashSet::with_capacity(samples.len());
        for s in &samples {
            if s.features.len() != dim {
                return Err(Error::Data(format!(
                    "sample {} has dimension {}, expected {dim}",
                    s.id,
                    s.features.len()
                )));
            }
            if s.label >= class_names.len() {
                return Err(Error::Data(format!(
                    "sample {} has label index {} but only {} classes exist",
                    s.id,
                    s.label,
                    class_names.len()
                )));
            }
            if let Some(v) = s.features.iter().find(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "sample {} has non-finite feature {v}",
                    s.id
                )));
            }
            if !ids.insert(s.id) {
                return Err(Error::Data(format!("duplicate sample id {}", s.id)));
            }
        }
        Ok(Dataset {
            samples,
            dim,
            class_names,
        })
    }

    /// Builds a dataset with sequential ids `0..n`.
    pub fn from_rows(
        rows: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::arg(format!(
                "{} feature rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let samples = rows
            .into_iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (features, label))| Sample {
                id: i as u64,
                label,
                features,
            })
            .collect();
        Dataset::new(samples, class_names)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn ids(&self) -> Vec<u64> {
        self.samples.iter().map(|s| s.id).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn rows(&self) -> Vec<&[f64]> {
        self.samples.iter().map(|s| s.features.as_slice()).collect()
    }

    /// Number of samples per class index.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// Positions of the samples sorted by id. Splits walk samples in this
    /// order so they do not depend on the storage order.
    pub(crate) fn positions_by_id(&self) -> Vec<usize> {
        let mut pos: Vec<usize> = (0..self.samples.len()).collect();
        pos.sort_by_key(|&p| self.samples[p].id);
        pos
    }

    /// New dataset holding the samples at `positions`, in that order.
    pub fn select(&self, positions: &[usize]) -> Result<Dataset> {
        if positions.is_empty() {
            return Err(Error::arg("selection is empty"));
        }
        let samples = positions
            .iter()
            .map(|&p| {
                self.samples
                    .get(p)
                    .cloned()
                    .ok_or_else(|| Error::arg(format!("position {p} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            samples,
            dim: self.dim,
            class_names: self.class_names.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn rejects_inconsistent_dimension() {
        let err =
            Dataset::from_rows(vec![vec![1.0, 2.0], vec![1.0]], vec![0, 1], names(2)).unwrap_err();
        assert_eq!(err.kind(), "data");
    }

    #[test]
    fn rejects_bad_label_and_nan() {
        assert!(Dataset::from_rows(vec![vec![1.0]], vec![2], names(2)).is_err());
        assert!(Dataset::from_rows(vec![vec![f64::NAN]], vec![0], names(2)).is_err());
        assert!(Dataset::from_rows(vec![], vec![], names(2)).is_err());
    }

    #[test]
    fn rejects_duplicate_ids_and_names() {
        let s = |id| Sample {
            id,
            label: 0,
            features: vec![0.0],
        };
        assert!(Dataset::new(vec![s(1), s(1)], names(1)).is_err());
        assert!(Dataset::new(vec![s(1)], vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn counts_and_select() {
        let ds = Dataset::from_rows(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![0, 1, 0],
            names(3),
        )
        .unwrap();
        assert_eq!(ds.class_counts(), vec![2, 1, 0]);
        let sub = ds.select(&[2, 0]).unwrap();
        assert_eq!(sub.ids(), vec![2, 0]);
        assert_eq!(sub.class_count(), 3);
        assert!(ds.select(&[]).is_err());
    }
}
