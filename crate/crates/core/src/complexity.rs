//! Complexity perception: per-instance accuracy across fold-trained
//! classifiers, the θ partition into easy and difficult training samples,
//! one classifier per side, and routing of queries through a local
//! logistic discriminator fitted on their nearest neighbours.
//!
//! Every inner classifier is trained on a single fold and scores the whole
//! training set, its own fold included. Fold members are therefore scored
//! optimistically; large `k` keeps folds small and limits the effect.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::classifiers::ComplexityTag;
use crate::classifiers::{
    self, nearest_positions, train_binary_logit, ClassifierSpec, LogitModel, LogitOptions,
    TrainedClassifier,
};
use crate::data::{random_kfold, Dataset};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Correct-prediction counts `N(x_i)` out of `N = e * k`, keyed by sample id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceAccuracy {
    /// Ascending sample ids.
    ids: Vec<u64>,
    correct: Vec<u32>,
    k: usize,
    e: usize,
}

impl InstanceAccuracy {
    /// Builds a table directly; `ids` need not be sorted.
    pub fn from_counts(pairs: &[(u64, u32)], k: usize, e: usize) -> Result<Self> {
        let mut sorted = pairs.to_vec();
        sorted.sort_by_key(|p| p.0);
        if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::arg("duplicate id in accuracy table"));
        }
        let total = k * e;
        if total == 0 || sorted.iter().any(|p| p.1 as usize > total) {
            return Err(Error::arg(format!(
                "counts must lie in [0, {total}] with k * e >= 1"
            )));
        }
        Ok(InstanceAccuracy {
            ids: sorted.iter().map(|p| p.0).collect(),
            correct: sorted.iter().map(|p| p.1).collect(),
            k,
            e,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn e(&self) -> usize {
        self.e
    }

    /// `N = e * k`.
    pub fn total(&self) -> u32 {
        (self.k * self.e) as u32
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn count(&self, id: u64) -> Option<u32> {
        self.ids.binary_search(&id).ok().map(|i| self.correct[i])
    }

    /// `N(x_i) / N`.
    pub fn ratio(&self, id: u64) -> Option<f64> {
        self.count(id)
            .map(|c| f64::from(c) / f64::from(self.total()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.ids.iter().copied().zip(self.correct.iter().copied())
    }
}

/// Scores every training sample with `e * k` classifiers, each trained on
/// one fold of a fresh random k-fold split per repetition.
///
/// Repetition `r` splits with seed `derive(seed, "cp-split", r)`, so counts
/// are identical however the `(repetition, fold)` tasks are scheduled.
pub fn estimate_instance_accuracy(
    train: &Dataset,
    k: usize,
    e: usize,
    base_spec: &ClassifierSpec,
    seed: u64,
) -> Result<InstanceAccuracy> {
    if k < 2 || e < 1 {
        return Err(Error::arg(format!(
            "need k >= 2 and e >= 1, got k = {k}, e = {e}"
        )));
    }
    if k > train.len() {
        return Err(Error::arg(format!(
            "k = {k} exceeds the {} training samples; every inner fold must be non-empty",
            train.len()
        )));
    }
    base_spec.validate()?;
    let splits = (0..e)
        .map(|r| random_kfold(train, k, derive_seed(seed, "cp-split", r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, usize)> = (0..e).flat_map(|r| (0..k).map(move |f| (r, f))).collect();
    let hits: Vec<Vec<bool>> = tasks
        .par_iter()
        .map(|&(r, f)| {
            let fold = train.select(splits[r].fold_positions(f))?;
            let clf = classifiers::train(base_spec, &fold)?;
            train
                .samples()
                .iter()
                .map(|s| Ok(clf.predict(&s.features)? == s.label))
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut correct = vec![0u32; train.len()];
    for h in &hits {
        for (c, &ok) in correct.iter_mut().zip(h) {
            *c += u32::from(ok);
        }
    }
    let pairs: Vec<(u64, u32)> = train.ids().into_iter().zip(correct).collect();
    InstanceAccuracy::from_counts(&pairs, k, e)
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::arg(format!(
            "threshold θ = {theta} must lie in (0, 1]"
        )));
    }
    Ok(())
}

/// Easy and difficult training ids for one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityPartition {
    pub theta: f64,
    pub easy_ids: Vec<u64>,
    pub difficult_ids: Vec<u64>,
}

impl ComplexityPartition {
    pub fn tag_of(&self, id: u64) -> Option<ComplexityTag> {
        if self.easy_ids.binary_search(&id).is_ok() {
            Some(ComplexityTag::Easy)
        } else if self.difficult_ids.binary_search(&id).is_ok() {
            Some(ComplexityTag::Difficult)
        } else {
            None
        }
    }
}

/// Easy iff `N(x_i) / N >= θ`, difficult otherwise.
pub fn partition_by_threshold(acc: &InstanceAccuracy, theta: f64) -> Result<ComplexityPartition> {
    check_theta(theta)?;
    let total = f64::from(acc.total());
    let mut part = ComplexityPartition {
        theta,
        easy_ids: Vec::new(),
        difficult_ids: Vec::new(),
    };
    for (id, c) in acc.iter() {
        if f64::from(c) / total >= theta {
            part.easy_ids.push(id);
        } else {
            part.difficult_ids.push(id);
        }
    }
    Ok(part)
}

/// Training features tagged easy or difficult.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexitySet {
    pub ids: Vec<u64>,
    pub features: Vec<Vec<f64>>,
    pub tags: Vec<ComplexityTag>,
}

impl ComplexitySet {
    pub fn build(train: &Dataset, partition: &ComplexityPartition) -> Result<Self> {
        let mut set = ComplexitySet {
            ids: Vec::with_capacity(train.len()),
            features: Vec::with_capacity(train.len()),
            tags: Vec::with_capacity(train.len()),
        };
        for s in train.samples() {
            let tag = partition.tag_of(s.id).ok_or_else(|| {
                Error::arg(format!("sample {} is missing from the partition", s.id))
            })?;
            set.ids.push(s.id);
            set.features.push(s.features.clone());
            set.tags.push(tag);
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Tag of the query from its `n` nearest entries: the shared tag when
    /// they agree, otherwise a local logit fit on exactly those entries.
    pub fn classify(&self, x: &[f64], n: usize, options: &LogitOptions) -> Result<ComplexityTag> {
        if n == 0 || n > self.len() {
            return Err(Error::arg(format!(
                "neighbour count {n} must lie in [1, {}]",
                self.len()
            )));
        }
        if self.features.first().is_some_and(|f| f.len() != x.len()) {
            return Err(Error::arg(
                "query dimension does not match the complexity set",
            ));
        }
        let rows: Vec<&[f64]> = self.features.iter().map(Vec::as_slice).collect();
        let near = nearest_positions(&rows, &self.ids, x, n);
        let first = self.tags[near[0]];
        if near.iter().all(|&p| self.tags[p] == first) {
            return Ok(first);
        }
        let xs: Vec<&[f64]> = near.iter().map(|&p| rows[p]).collect();
        let tags: Vec<ComplexityTag> = near.iter().map(|&p| self.tags[p]).collect();
        Ok(train_binary_logit(&xs, &tags, options)?.classify(x))
    }

    /// The fitted local discriminator for a query (for inspection).
    pub fn local_model(&self, x: &[f64], n: usize, options: &LogitOptions) -> Result<LogitModel> {
        let rows: Vec<&[f64]> = self.features.iter().map(Vec::as_slice).collect();
        let near = nearest_positions(&rows, &self.ids, x, n.min(self.len()).max(1));
        let xs: Vec<&[f64]> = near.iter().map(|&p| rows[p]).collect();
        let tags: Vec<ComplexityTag> = near.iter().map(|&p| self.tags[p]).collect();
        train_binary_logit(&xs, &tags, options)
    }
}

/// Hyperparameters of the method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpParams {
    /// Inner folds per repetition.
    pub k: usize,
    /// Repetitions.
    pub e: usize,
    /// Neighbours for the local discriminator.
    pub n: usize,
    pub theta: f64,
    pub base: ClassifierSpec,
    pub seed: u64,
    #[serde(default)]
    pub logit: LogitOptions,
}

impl CpParams {
    /// `k = 5, e = 40, n = 50`, the setting for low-dimensional handcrafted
    /// features.
    pub fn traditional(base: ClassifierSpec, theta: f64, seed: u64) -> Self {
        CpParams {
            k: 5,
            e: 40,
            n: 50,
            theta,
            base,
            seed,
            logit: LogitOptions::default(),
        }
    }

    /// `k = 150, e = 2, n = 50`, the setting for 1024-d deep features.
    pub fn deep(base: ClassifierSpec, theta: f64, seed: u64) -> Self {
        CpParams {
            k: 150,
            e: 2,
            ..Self::traditional(base, theta, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || self.e < 1 || self.n < 1 {
            return Err(Error::arg(format!(
                "need k >= 2, e >= 1, n >= 1 (got k = {}, e = {}, n = {})",
                self.k, self.e, self.n
            )));
        }
        check_theta(self.theta)?;
        self.base.validate()
    }

    /// Checks the size guards against a concrete training set.
    pub fn check_against(&self, train: &Dataset) -> Result<()> {
        self.validate()?;
        if self.k > train.len() {
            return Err(Error::arg(format!(
                "k = {} exceeds the {} training samples",
                self.k,
                train.len()
            )));
        }
        if self.n > train.len() {
            return Err(Error::arg(format!(
                "n = {} exceeds the {} training samples",
                self.n,
                train.len()
            )));
        }
        Ok(())
    }
}

/// The trained meta-classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpModel {
    pub params: CpParams,
    /// Trained on the easy side; absent when that side fell back.
    pub clf_easy: Option<TrainedClassifier>,
    /// Trained on the difficult side; absent when that side fell back.
    pub clf_difficult: Option<TrainedClassifier>,
    /// Whole-training-set classifier used for any side that was empty or
    /// held a single class.
    pub fallback: Option<TrainedClassifier>,
    pub complexity_set: ComplexitySet,
    /// Class table of the training set; predicted labels index into it.
    pub class_names: Vec<String>,
    pub easy_count: usize,
    pub difficult_count: usize,
}

impl CpModel {
    pub fn theta(&self) -> f64 {
        self.params.theta
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn dim(&self) -> usize {
        self.complexity_set.features.first().map_or(0, Vec::len)
    }

    pub fn easy_fell_back(&self) -> bool {
        self.clf_easy.is_none()
    }

    pub fn difficult_fell_back(&self) -> bool {
        self.clf_difficult.is_none()
    }

    /// Classifier that handles queries carrying `tag`.
    pub fn classifier_for(&self, tag: ComplexityTag) -> &TrainedClassifier {
        let side = match tag {
            ComplexityTag::Easy => self.clf_easy.as_ref(),
            ComplexityTag::Difficult => self.clf_difficult.as_ref(),
        };
        side.or(self.fallback.as_ref())
            .expect("a fallback exists whenever a side is missing")
    }

    pub fn classify_complexity(&self, x: &[f64]) -> Result<ComplexityTag> {
        self.complexity_set
            .classify(x, self.params.n, &self.params.logit)
    }

    /// `(label, tag)` for one query.
    pub fn predict_with_tag(&self, x: &[f64]) -> Result<(usize, ComplexityTag)> {
        let tag = self.classify_complexity(x)?;
        Ok((self.classifier_for(tag).predict(x)?, tag))
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.predict_with_tag(x).map(|p| p.0)
    }

    pub fn to_json(&self) -> Result<String> {
        classifiers::to_envelope_json(MODEL_FORMAT, MODEL_VERSION, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        classifiers::from_envelope_json(text, MODEL_FORMAT, MODEL_VERSION)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

const MODEL_FORMAT: &str = "cperc-cp-model";
const MODEL_VERSION: u32 = 1;

/// Builds CP models for many thresholds from one accuracy estimate; the
/// fallback classifier is trained at most once.
pub struct CpTrainer<'a> {
    train: &'a Dataset,
    acc: InstanceAccuracy,
    params: CpParams,
    fallback: std::sync::OnceLock<TrainedClassifier>,
}

impl<'a> CpTrainer<'a> {
    /// Runs the accuracy estimation for `params` (θ is ignored here).
    pub fn new(train: &'a Dataset, params: &CpParams) -> Result<Self> {
        params.check_against(train)?;
        let acc = estimate_instance_accuracy(train, params.k, params.e, &params.base, params.seed)?;
        Ok(Self::with_accuracy(train, acc, params))
    }

    pub fn with_accuracy(train: &'a Dataset, acc: InstanceAccuracy, params: &CpParams) -> Self {
        CpTrainer {
            train,
            acc,
            params: *params,
            fallback: std::sync::OnceLock::new(),
        }
    }

    pub fn accuracy(&self) -> &InstanceAccuracy {
        &self.acc
    }

    /// The whole-set classifier, identical to a baseline trained with the
    /// same spec on the same data.
    pub fn baseline(&self) -> Result<&TrainedClassifier> {
        if let Some(c) = self.fallback.get() {
            return Ok(c);
        }
        let c = classifiers::train(&self.params.base, self.train)?;
        Ok(self.fallback.get_or_init(|| c))
    }

    fn side(&self, ids: &[u64]) -> Result<Option<TrainedClassifier>> {
        if ids.is_empty() {
            return Ok(None);
        }
        let positions: Vec<usize> = self
            .train
            .samples()
            .iter()
            .enumerate()
            .filter(|(_, s)| ids.binary_search(&s.id).is_ok())
            .map(|(p, _)| p)
            .collect();
        let subset = self.train.select(&positions)?;
        if subset.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Ok(None);
        }
        classifiers::train(&self.params.base, &subset).map(Some)
    }

    pub fn build(&self, theta: f64) -> Result<CpModel> {
        let partition = partition_by_threshold(&self.acc, theta)?;
        let complexity_set = ComplexitySet::build(self.train, &partition)?;
        let clf_easy = self.side(&partition.easy_ids)?;
        let clf_difficult = self.side(&partition.difficult_ids)?;
        let fallback = if clf_easy.is_none() || clf_difficult.is_none() {
            Some(self.baseline()?.clone())
        } else {
            None
        };
        Ok(CpModel {
            params: CpParams {
                theta,
                ..self.params
            },
            clf_easy,
            clf_difficult,
            fallback,
            complexity_set,
            class_names: self.train.class_names().to_vec(),
            easy_count: partition.easy_ids.len(),
            difficult_count: partition.difficult_ids.len(),
        })
    }
}

/// Accuracy estimation, partition and side classifiers in one call.
pub fn train_cp(train: &Dataset, params: &CpParams) -> Result<CpModel> {
    CpTrainer::new(train, params)?.build(params.theta)
}

pub fn classify_complexity(model: &CpModel, x: &[f64]) -> Result<ComplexityTag> {
    model.classify_complexity(x)
}

pub fn predict_cp(model: &CpModel, x: &[f64]) -> Result<usize> {
    model.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::TreeParams;
    use proptest::prelude::*;

    fn table(counts: &[u32], total: usize) -> InstanceAccuracy {
        let pairs: Vec<(u64, u32)> = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as u64, c))
            .collect();
        InstanceAccuracy::from_counts(&pairs, total, 1).unwrap()
    }

    #[test]
    fn greater_or_equal_boundary() {
        let acc = table(&[10, 7, 3], 10);
        let p = partition_by_threshold(&acc, 0.7).unwrap();
        assert_eq!(p.easy_ids, vec![0, 1]);
        assert_eq!(p.difficult_ids, vec![2]);
    }

    #[test]
    fn tiny_theta_only_zero_counts_are_difficult() {
        let acc = table(&[0, 1, 5], 5);
        let p = partition_by_threshold(&acc, f64::MIN_POSITIVE).unwrap();
        assert_eq!(p.difficult_ids, vec![0]);
        let acc = table(&[1, 1, 5], 5);
        assert!(partition_by_threshold(&acc, 1e-300)
            .unwrap()
            .difficult_ids
            .is_empty());
    }

    #[test]
    fn theta_range_is_checked() {
        let acc = table(&[1], 2);
        assert!(partition_by_threshold(&acc, 0.0).is_err());
        assert!(partition_by_threshold(&acc, 1.01).is_err());
        assert!(partition_by_threshold(&acc, f64::NAN).is_err());
        assert!(partition_by_threshold(&acc, 1.0).is_ok());
    }

    #[test]
    fn figure_thresholds_nest() {
        let acc = table(&[0, 3, 5, 6, 7, 8, 9, 10, 10, 2], 10);
        let sizes: Vec<usize> = [0.6, 0.7, 0.8, 0.9]
            .iter()
            .map(|&t| partition_by_threshold(&acc, t).unwrap().easy_ids.len())
            .collect();
        assert_eq!(sizes, vec![6, 5, 4, 3]);
    }

    fn one_dim(points: &[(f64, usize)]) -> Dataset {
        Dataset::from_rows(
            points.iter().map(|p| vec![p.0]).collect(),
            points.iter().map(|p| p.1).collect(),
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn separable_data_is_always_correct() {
        let ds = one_dim(&[
            (-3.0, 0),
            (-2.0, 0),
            (-1.0, 0),
            (1.0, 1),
            (2.0, 1),
            (3.0, 1),
            (-2.5, 0),
            (2.5, 1),
        ]);
        let acc = estimate_instance_accuracy(&ds, 2, 3, &ClassifierSpec::decision_tree(), 5);
        // a fold may hold one class only; its constant predictor then errs
        let acc = acc.unwrap();
        assert_eq!(acc.total(), 6);
        let deep = TreeParams {
            max_depth: None,
            min_leaf: 1,
        };
        let spec = ClassifierSpec {
            kind: crate::classifiers::ClassifierKind::DecisionTree(deep),
            seed: 0,
        };
        let acc2 = estimate_instance_accuracy(&ds, 2, 3, &spec, 5).unwrap();
        assert_eq!(acc, acc2);
    }

    #[test]
    fn k_larger_than_dataset_is_rejected() {
        let ds = one_dim(&[(0.0, 0), (1.0, 1)]);
        assert!(estimate_instance_accuracy(&ds, 3, 1, &ClassifierSpec::softmax(), 0).is_err());
        let params = CpParams {
            k: 2,
            e: 1,
            n: 3,
            theta: 0.5,
            base: ClassifierSpec::softmax(),
            seed: 0,
            logit: LogitOptions::default(),
        };
        assert!(train_cp(&ds, &params).is_err());
    }

    #[test]
    fn order_of_samples_does_not_matter() {
        let pts: Vec<(f64, usize)> = (0..24)
            .map(|i| ((i as f64 * 0.77).sin() * 3.0, i % 2))
            .collect();
        let ds = one_dim(&pts);
        let rev: Vec<usize> = (0..24).rev().collect();
        let rds = ds.select(&rev).unwrap();
        let spec = ClassifierSpec::softmax();
        assert_eq!(
            estimate_instance_accuracy(&ds, 3, 2, &spec, 9).unwrap(),
            estimate_instance_accuracy(&rds, 3, 2, &spec, 9).unwrap()
        );
    }

    #[test]
    fn local_discriminator_on_line() {
        let set = ComplexitySet {
            ids: vec![0, 1, 2, 3],
            features: vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]],
            tags: vec![
                ComplexityTag::Easy,
                ComplexityTag::Easy,
                ComplexityTag::Difficult,
                ComplexityTag::Difficult,
            ],
        };
        let opts = LogitOptions::default();
        assert_eq!(set.classify(&[0.5], 4, &opts).unwrap(), ComplexityTag::Easy);
        assert_eq!(
            set.classify(&[10.5], 4, &opts).unwrap(),
            ComplexityTag::Difficult
        );
        // both nearest neighbours easy: no fit needed
        assert_eq!(
            set.classify(&[-5.0], 2, &opts).unwrap(),
            ComplexityTag::Easy
        );
        assert!(set.classify(&[0.0], 5, &opts).is_err());
    }

    proptest! {
        #[test]
        fn partitions_are_exhaustive_disjoint_and_monotone(
            counts in prop::collection::vec(0u32..=12, 1..40),
            mut thetas in prop::collection::vec(0.001f64..=1.0, 2..8),
        ) {
            let acc = table(&counts, 12);
            thetas.sort_by(f64::total_cmp);
            let mut prev: Option<usize> = None;
            for &t in &thetas {
                let p = partition_by_threshold(&acc, t).unwrap();
                prop_assert_eq!(p.easy_ids.len() + p.difficult_ids.len(), counts.len());
                for id in &p.easy_ids {
                    prop_assert!(p.difficult_ids.binary_search(id).is_err());
                    prop_assert!(f64::from(counts[*id as usize]) / 12.0 >= t);
                }
                for id in &p.difficult_ids {
                    prop_assert!(f64::from(counts[*id as usize]) / 12.0 < t);
                }
                if let Some(prev) = prev {
                    prop_assert!(p.easy_ids.len() <= prev);
                }
                prev = Some(p.easy_ids.len());
            }
        }
    }
}
