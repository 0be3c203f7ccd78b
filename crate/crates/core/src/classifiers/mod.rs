//! Base classifiers behind one train/predict contract, plus the KNN search
//! and binary logit used by the complexity discriminator.
//!
//! Training is a pure function of `(spec, dataset)`. Linear models see
//! z-scored features (statistics from the training set, stored with the
//! model). A training set containing one class yields a constant predictor.

mod knn;
mod logit;
mod softmax;
mod svm;
mod tree;

pub use knn::knn_indices;
pub(crate) use knn::{nearest_positions, squared_distance};
pub use logit::{
    binary_logit_loss_gradient, train_binary_logit, ComplexityTag, LogitModel, LogitOptions,
    LogitParams,
};
pub use softmax::{fit_softmax, softmax_loss_gradient, SoftmaxFit, SoftmaxParams};
pub use svm::SvmParams;
pub use tree::{DecisionTree, Node, TreeParams};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Which classifier to train, with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierKind {
    Softmax(SoftmaxParams),
    LinearSvm(SvmParams),
    DecisionTree(TreeParams),
}

impl ClassifierKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Softmax(_) => "softmax",
            ClassifierKind::LinearSvm(_) => "linear_svm",
            ClassifierKind::DecisionTree(_) => "decision_tree",
        }
    }

    /// Default hyperparameters for a kind given by name
    /// (`softmax`, `svm`/`linear_svm`, `tree`/`decision_tree`).
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "softmax" => Ok(ClassifierKind::Softmax(SoftmaxParams::default())),
            "svm" | "linear_svm" => Ok(ClassifierKind::LinearSvm(SvmParams::default())),
            "tree" | "decision_tree" => Ok(ClassifierKind::DecisionTree(TreeParams::default())),
            other => Err(Error::arg(format!("unknown classifier kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    #[serde(flatten)]
    pub kind: ClassifierKind,
    /// Reserved for stochastic learners; all current learners are
    /// deterministic and ignore it.
    #[serde(default)]
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn softmax() -> Self {
        ClassifierSpec {
            kind: ClassifierKind::Softmax(SoftmaxParams::default()),
            seed: 0,
        }
    }

    pub fn linear_svm() -> Self {
        ClassifierSpec {
            kind: ClassifierKind::LinearSvm(SvmParams::default()),
            seed: 0,
        }
    }

    pub fn decision_tree() -> Self {
        ClassifierSpec {
            kind: ClassifierKind::DecisionTree(TreeParams::default()),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ClassifierKind::Softmax(p) => p.validate(),
            ClassifierKind::LinearSvm(p) => p.validate(),
            ClassifierKind::DecisionTree(p) => p.validate(),
        }
    }
}

/// Per-feature z-scoring; constant features keep unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let d = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r.iter()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum Model {
    Constant {
        class: usize,
    },
    /// `classes` lists the table indices the weight rows refer to.
    Softmax {
        standardizer: Standardizer,
        classes: Vec<usize>,
        weights: Vec<f64>,
    },
    LinearSvm {
        standardizer: Standardizer,
        classes: Vec<usize>,
        weights: Vec<f64>,
    },
    DecisionTree {
        tree: DecisionTree,
    },
}

/// A fitted classifier over a fixed input dimension and class table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    spec: ClassifierSpec,
    dim: usize,
    class_count: usize,
    model: Model,
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Trains `spec` on `train`.
pub fn train(spec: &ClassifierSpec, train: &Dataset) -> Result<TrainedClassifier> {
    spec.validate()?;
    let counts = train.class_counts();
    let present: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
    let base = TrainedClassifier {
        spec: *spec,
        dim: train.dim(),
        class_count: train.class_count(),
        model: Model::Constant { class: present[0] },
    };
    if present.len() == 1 {
        return Ok(base);
    }
    let raw = train.rows();
    let labels = train.labels();
    let model = match &spec.kind {
        ClassifierKind::Softmax(params) => {
            let (standardizer, z, local) = prepare_linear(&raw, &labels, &present);
            let rows: Vec<&[f64]> = z.iter().map(Vec::as_slice).collect();
            let fit = fit_softmax(&rows, &local, present.len(), params)?;
            Model::Softmax {
                standardizer,
                classes: present,
                weights: fit.weights,
            }
        }
        ClassifierKind::LinearSvm(params) => {
            let (standardizer, z, local) = prepare_linear(&raw, &labels, &present);
            let rows: Vec<&[f64]> = z.iter().map(Vec::as_slice).collect();
            let weights = svm::fit_one_vs_rest(&rows, &local, present.len(), params)?;
            Model::LinearSvm {
                standardizer,
                classes: present,
                weights,
            }
        }
        ClassifierKind::DecisionTree(params) => Model::DecisionTree {
            tree: tree::fit_tree(&raw, &labels, train.class_count(), params)?,
        },
    };
    Ok(TrainedClassifier { model, ..base })
}

/// Standardizes rows and maps labels onto `0..present.len()`.
fn prepare_linear(
    raw: &[&[f64]],
    labels: &[usize],
    present: &[usize],
) -> (Standardizer, Vec<Vec<f64>>, Vec<usize>) {
    let standardizer = Standardizer::fit(raw);
    let z = raw.iter().map(|r| standardizer.apply(r)).collect();
    let local = labels
        .iter()
        .map(|l| present.binary_search(l).expect("label present"))
        .collect();
    (standardizer, z, local)
}

fn linear_scores(weights: &[f64], classes: usize, x: &[f64]) -> Vec<f64> {
    softmax::scores(weights, classes, x)
}

const FORMAT_TAG: &str = "cperc-classifier";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    tool: String,
    #[serde(flatten)]
    body: T,
}

pub(crate) fn to_envelope_json<T: Serialize>(
    format: &str,
    version: u32,
    body: &T,
) -> Result<String> {
    let env = Envelope {
        format: format.to_string(),
        version,
        tool: crate::tool_version(),
        body,
    };
    serde_json::to_string_pretty(&env).map_err(|e| Error::Format(e.to_string()))
}

pub(crate) fn from_envelope_json<T: for<'de> Deserialize<'de>>(
    text: &str,
    format: &str,
    version: u32,
) -> Result<T> {
    let env: Envelope<T> = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if env.format != format {
        return Err(Error::Format(format!(
            "expected format {format:?}, found {:?}",
            env.format
        )));
    }
    if env.version != version {
        return Err(Error::Format(format!(
            "unsupported {format} version {} (expected {version})",
            env.version
        )));
    }
    Ok(env.body)
}

impl TrainedClassifier {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// The fixed class of a constant predictor.
    pub fn constant_class(&self) -> Option<usize> {
        match self.model {
            Model::Constant { class } => Some(class),
            _ => None,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::arg(format!(
                "classifier expects dimension {}, got {}",
                self.dim,
                x.len()
            )));
        }
        Ok(())
    }

    /// Scores over the full class table. Classes absent from training score
    /// `-inf`; trees and constant predictors give one-hot scores.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![f64::NEG_INFINITY; self.class_count];
        match &self.model {
            Model::Constant { class } => out[*class] = 0.0,
            Model::Softmax {
                standardizer,
                classes,
                weights,
            }
            | Model::LinearSvm {
                standardizer,
                classes,
                weights,
            } => {
                let s = linear_scores(weights, classes.len(), &standardizer.apply(x));
                for (&c, v) in classes.iter().zip(s) {
                    out[c] = v;
                }
            }
            Model::DecisionTree { tree } => out[tree.predict(x)] = 0.0,
        }
        Ok(out)
    }

    /// Class probabilities for softmax models, over the full class table.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        self.check_dim(x)?;
        match &self.model {
            Model::Softmax {
                standardizer,
                classes,
                weights,
            } => {
                let mut s = linear_scores(weights, classes.len(), &standardizer.apply(x));
                softmax::softmax_in_place(&mut s);
                let mut out = vec![0.0; self.class_count];
                for (&c, p) in classes.iter().zip(s) {
                    out[c] = p;
                }
                Ok(Some(out))
            }
            _ => Ok(None),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.scores(x)?))
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        let mut correct = 0usize;
        for s in data.samples() {
            if self.predict(&s.features)? == s.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        to_envelope_json(FORMAT_TAG, FORMAT_VERSION, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        from_envelope_json(text, FORMAT_TAG, FORMAT_VERSION)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Same as [`TrainedClassifier::predict`].
pub fn predict(model: &TrainedClassifier, x: &[f64]) -> Result<usize> {
    model.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|c| format!("c{c}")).collect()
    }

    fn separable() -> Dataset {
        let rows = vec![
            vec![-1.2],
            vec![-1.0],
            vec![-0.8],
            vec![0.8],
            vec![1.0],
            vec![1.2],
        ];
        Dataset::from_rows(rows, vec![0, 0, 0, 1, 1, 1], names(2)).unwrap()
    }

    fn all_specs() -> [ClassifierSpec; 3] {
        [
            ClassifierSpec::softmax(),
            ClassifierSpec::linear_svm(),
            ClassifierSpec::decision_tree(),
        ]
    }

    #[test]
    fn separable_case_is_fit_by_every_kind() {
        let ds = separable();
        for spec in all_specs() {
            let m = train(&spec, &ds).unwrap();
            assert_eq!(m.accuracy(&ds).unwrap(), 1.0, "{}", spec.kind.name());
        }
    }

    #[test]
    fn single_class_gives_constant_predictor() {
        let ds = Dataset::from_rows(vec![vec![0.0], vec![3.0]], vec![2, 2], names(3)).unwrap();
        for spec in all_specs() {
            let m = train(&spec, &ds).unwrap();
            assert_eq!(m.constant_class(), Some(2));
            assert_eq!(m.predict(&[-100.0]).unwrap(), 2);
            assert_eq!(m.predict(&[1e6]).unwrap(), 2);
        }
    }

    #[test]
    fn absent_classes_are_never_predicted() {
        let rows = vec![vec![0.0], vec![1.0], vec![5.0], vec![6.0]];
        let ds = Dataset::from_rows(rows, vec![1, 1, 3, 3], names(4)).unwrap();
        let m = train(&ClassifierSpec::softmax(), &ds).unwrap();
        let p = m.predict_proba(&[3.0]).unwrap().unwrap();
        assert_eq!(p[0], 0.0);
        assert_eq!(p[2], 0.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[1] > 0.0 && p[3] > 0.0);
        assert!([1, 3].contains(&m.predict(&[100.0]).unwrap()));
    }

    #[test]
    fn argmax_ties_take_lowest_index() {
        assert_eq!(argmax(&[0.5, 0.5, 0.1]), 0);
        assert_eq!(argmax(&[f64::NEG_INFINITY, 1.0, 1.0]), 1);
    }

    #[test]
    fn dimension_mismatch_is_an_argument_error() {
        let m = train(&ClassifierSpec::softmax(), &separable()).unwrap();
        assert_eq!(m.predict(&[1.0, 2.0]).unwrap_err().kind(), "argument");
    }

    #[test]
    fn persistence_round_trip_is_bit_exact() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 1.3).cos() * 3.0])
            .collect();
        let labels = (0..30).map(|i| i % 3).collect();
        let ds = Dataset::from_rows(rows, labels, names(3)).unwrap();
        for spec in all_specs() {
            let m = train(&spec, &ds).unwrap();
            let back = TrainedClassifier::from_json(&m.to_json().unwrap()).unwrap();
            assert_eq!(back, m);
            for s in ds.samples() {
                let a = m.scores(&s.features).unwrap();
                let b = back.scores(&s.features).unwrap();
                assert_eq!(
                    a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                    b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
                );
            }
        }
    }

    #[test]
    fn wrong_format_or_version_is_rejected() {
        let m = train(&ClassifierSpec::softmax(), &separable()).unwrap();
        let text = m
            .to_json()
            .unwrap()
            .replace("\"version\": 1", "\"version\": 99");
        assert_eq!(
            TrainedClassifier::from_json(&text).unwrap_err().kind(),
            "format"
        );
        assert!(TrainedClassifier::from_json("{}").is_err());
    }

    #[test]
    fn spec_json_is_self_describing() {
        let spec = ClassifierSpec::linear_svm();
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"linear_svm\""));
        let back: ClassifierSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert!(ClassifierKind::from_name("forest").is_err());
    }
}
