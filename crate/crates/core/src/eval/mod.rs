//! Outer cross-validation of CP against its base classifier, validation
//! selection of θ, θ sweeps and the synthetic stand-in data.

mod report;
mod synthetic;

pub use report::{EvalReport, FoldMetrics, SweepResult, SweepRow, METRIC_NAMES};
pub use synthetic::{
    generate_synthetic, generate_synthetic_with_truth, mean_pairwise_distance, SyntheticData,
    SyntheticSpec, CONSTITUTION_PRIORS,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::ComplexityTag;
use crate::complexity::{CpModel, CpParams, CpTrainer};
use crate::data::{holdout_split, stratified_kfold, Dataset};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Share of each training split held out for θ selection.
pub const VALIDATION_FRACTION: f64 = 0.15;

/// `0.05, 0.10, ..., 0.95`.
pub fn default_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::arg("θ grid is empty"));
    }
    if let Some(t) = grid.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::arg(format!("grid value {t} lies outside (0, 1]")));
    }
    Ok(())
}

/// How each outer fold obtains its θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaChoice {
    Fixed(f64),
    /// Validation selection over the grid.
    Select(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSelection {
    pub theta: f64,
    /// `(θ, validation accuracy in percent)` in grid order; empty when the
    /// grid had one value.
    pub scores: Vec<(f64, f64)>,
}

fn correct_routed(model: &CpModel, test: &Dataset) -> Result<usize> {
    let mut correct = 0;
    for s in test.samples() {
        if model.predict(&s.features)? == s.label {
            correct += 1;
        }
    }
    Ok(correct)
}

/// Holds out 15% of `train`, estimates instance accuracy once on the rest
/// and returns the grid value whose CP model scores best on the holdout.
/// Ties go to the smallest θ.
pub fn select_theta(
    train: &Dataset,
    params: &CpParams,
    grid: &[f64],
    seed: u64,
) -> Result<ThetaSelection> {
    check_grid(grid)?;
    if grid.len() == 1 {
        return Ok(ThetaSelection {
            theta: grid[0],
            scores: Vec::new(),
        });
    }
    let (fit, val) = holdout_split(
        train,
        VALIDATION_FRACTION,
        derive_seed(seed, "theta-holdout", 0),
    )?;
    let inner = CpParams {
        seed: derive_seed(seed, "theta-cp", 0),
        ..*params
    };
    let trainer = CpTrainer::new(&fit, &inner)?;
    let correct = grid
        .par_iter()
        .map(|&theta| correct_routed(&trainer.build(theta)?, &val))
        .collect::<Result<Vec<usize>>>()?;
    let mut best = 0;
    for i in 1..grid.len() {
        if correct[i] > correct[best] || (correct[i] == correct[best] && grid[i] < grid[best]) {
            best = i;
        }
    }
    Ok(ThetaSelection {
        theta: grid[best],
        scores: grid
            .iter()
            .zip(&correct)
            .map(|(&t, &c)| (t, 100.0 * c as f64 / val.len() as f64))
            .collect(),
    })
}

fn fold_metrics(
    fold: usize,
    model: &CpModel,
    baseline: &crate::classifiers::TrainedClassifier,
    test: &Dataset,
) -> Result<FoldMetrics> {
    let mut m = FoldMetrics {
        fold,
        theta: model.theta(),
        easy_count: 0,
        diff_count: 0,
        easy_b_correct: 0,
        easy_cp_correct: 0,
        diff_b_correct: 0,
        diff_cp_correct: 0,
    };
    for s in test.samples() {
        let (cp_label, tag) = model.predict_with_tag(&s.features)?;
        let b_ok = usize::from(baseline.predict(&s.features)? == s.label);
        let cp_ok = usize::from(cp_label == s.label);
        match tag {
            ComplexityTag::Easy => {
                m.easy_count += 1;
                m.easy_b_correct += b_ok;
                m.easy_cp_correct += cp_ok;
            }
            ComplexityTag::Difficult => {
                m.diff_count += 1;
                m.diff_b_correct += b_ok;
                m.diff_cp_correct += cp_ok;
            }
        }
    }
    Ok(m)
}

/// Stratified outer k-fold comparison of CP and the base classifier.
///
/// Each fold trains the baseline and CP on the same training split; the
/// local discriminator's tag decides whether a test sample counts toward
/// the easy or the difficult figures of both methods.
pub fn evaluate(
    dataset: &Dataset,
    params: &CpParams,
    theta: &ThetaChoice,
    outer_k: usize,
    seed: u64,
) -> Result<EvalReport> {
    params.validate()?;
    if let ThetaChoice::Select(grid) = theta {
        check_grid(grid)?;
    }
    let outer = stratified_kfold(dataset, outer_k, derive_seed(seed, "outer-folds", 0))?;
    let folds = (0..outer_k)
        .into_par_iter()
        .map(|f| {
            let (train, test) = outer.split(dataset, f)?;
            let fold_seed = derive_seed(seed, "outer-fold", f as u64);
            let theta = match theta {
                ThetaChoice::Fixed(t) => *t,
                ThetaChoice::Select(grid) => select_theta(&train, params, grid, fold_seed)?.theta,
            };
            let fold_params = CpParams {
                theta,
                seed: derive_seed(fold_seed, "cp", 0),
                ..*params
            };
            let trainer = CpTrainer::new(&train, &fold_params)?;
            let model = trainer.build(theta)?;
            fold_metrics(f, &model, trainer.baseline()?, &test)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport { folds })
}

/// [`evaluate`] with the fixed θ carried in `params`.
pub fn evaluate_cp_vs_base(
    dataset: &Dataset,
    params: &CpParams,
    outer_k: usize,
    seed: u64,
) -> Result<EvalReport> {
    evaluate(
        dataset,
        params,
        &ThetaChoice::Fixed(params.theta),
        outer_k,
        seed,
    )
}

/// CP and baseline accuracy for every grid value over the same outer folds.
/// Instance accuracy is estimated once per fold and shared by all θ.
pub fn sweep_theta(
    dataset: &Dataset,
    params: &CpParams,
    grid: &[f64],
    outer_k: usize,
    seed: u64,
) -> Result<SweepResult> {
    check_grid(grid)?;
    params.base.validate()?;
    let outer = stratified_kfold(dataset, outer_k, derive_seed(seed, "outer-folds", 0))?;
    let per_fold: Vec<Vec<(FoldMetrics, usize)>> = (0..outer_k)
        .into_par_iter()
        .map(|f| {
            let (train, test) = outer.split(dataset, f)?;
            let fold_seed = derive_seed(seed, "outer-fold", f as u64);
            let fold_params = CpParams {
                theta: grid[0],
                seed: derive_seed(fold_seed, "cp", 0),
                ..*params
            };
            let trainer = CpTrainer::new(&train, &fold_params)?;
            let baseline = trainer.baseline()?;
            grid.par_iter()
                .map(|&theta| {
                    let model = trainer.build(theta)?;
                    Ok((fold_metrics(f, &model, baseline, &test)?, model.easy_count))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let n = outer_k as f64;
    let rows = grid
        .iter()
        .enumerate()
        .map(|(g, &theta)| {
            let fold_rows: Vec<&(FoldMetrics, usize)> = per_fold.iter().map(|v| &v[g]).collect();
            SweepRow {
                theta,
                basic: fold_rows.iter().map(|r| r.0.basic()).sum::<f64>() / n,
                cp: fold_rows.iter().map(|r| r.0.cp()).sum::<f64>() / n,
                easy_count: fold_rows.iter().map(|r| r.0.easy_count).sum(),
                diff_count: fold_rows.iter().map(|r| r.0.diff_count).sum(),
                train_easy_counts: fold_rows.iter().map(|r| r.1).collect(),
            }
        })
        .collect();
    Ok(SweepResult { rows })
}
