//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! Parameters are a `classes x (dim + 1)` row-major matrix whose last column
//! is the bias. The objective is mean cross-entropy plus `l2/2 * ||W||²`
//! over every entry, bias included, so it has a unique finite minimiser for
//! any `l2 > 0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SoftmaxParams {
    /// Step as a fraction of `1 / L`, where `L` bounds the curvature of the
    /// objective. Values up to 1 give monotone descent.
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Stop once the largest gradient entry falls below this.
    pub tolerance: f64,
}

impl Default for SoftmaxParams {
    fn default() -> Self {
        SoftmaxParams {
            learning_rate: 1.0,
            epochs: 100,
            l2: 1e-4,
            tolerance: 1e-5,
        }
    }
}

impl SoftmaxParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::arg("softmax learning_rate must be positive"));
        }
        if self.epochs == 0 {
            return Err(Error::arg("softmax epochs must be positive"));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite())
            || self.tolerance.is_nan()
            || self.tolerance < 0.0
        {
            return Err(Error::arg("softmax l2 and tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// Row-wise softmax of `scores`, stabilised by the row maximum.
pub fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum += *s;
    }
    for s in scores.iter_mut() {
        *s /= sum;
    }
}

fn logits(weights: &[f64], classes: usize, x: &[f64], out: &mut [f64]) {
    let d = x.len();
    for (o, w) in out
        .iter_mut()
        .zip(weights.chunks_exact(d + 1))
        .take(classes)
    {
        let (w, b) = w.split_at(d);
        *o = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b[0];
    }
}

/// Design matrix `[X, 1]` with labels, built once per fit.
struct Batch<'a> {
    z: DMatrix<f64>,
    labels: &'a [usize],
}

impl<'a> Batch<'a> {
    fn new(rows: &[&[f64]], labels: &'a [usize]) -> Self {
        let d = rows.first().map_or(0, |r| r.len());
        let z = DMatrix::from_fn(
            rows.len(),
            d + 1,
            |i, j| if j < d { rows[i][j] } else { 1.0 },
        );
        Batch { z, labels }
    }

    /// Largest eigenvalue of `ZᵀZ / N`.
    fn gram_spectral_radius(&self) -> f64 {
        let gram = self.z.tr_mul(&self.z) / self.z.nrows() as f64;
        gram.symmetric_eigenvalues().max().max(0.0)
    }

    /// Loss and gradient for a `(d + 1) x classes` weight matrix, whose
    /// column-major storage is the row-major `classes x (d + 1)` layout.
    fn loss_gradient(&self, w: &DMatrix<f64>, l2: f64) -> (f64, DMatrix<f64>) {
        let n = self.z.nrows() as f64;
        let classes = w.ncols();
        let mut s = &self.z * w;
        let mut loss = 0.0;
        for (i, &y) in self.labels.iter().enumerate() {
            let mut max = f64::NEG_INFINITY;
            for c in 0..classes {
                max = max.max(s[(i, c)]);
            }
            let target = s[(i, y)];
            let mut sum = 0.0;
            for c in 0..classes {
                let e = (s[(i, c)] - max).exp();
                s[(i, c)] = e;
                sum += e;
            }
            loss += max + sum.ln() - target;
            for c in 0..classes {
                s[(i, c)] /= sum * n;
            }
            s[(i, y)] -= 1.0 / n;
        }
        let mut grad = self.z.tr_mul(&s);
        grad.zip_apply(w, |g, wi| *g += l2 * wi);
        (loss / n + 0.5 * l2 * w.norm_squared(), grad)
    }
}

/// Regularised mean cross-entropy and its exact gradient.
///
/// `weights` is row-major `classes x (d + 1)`; `labels[i]` must be below
/// `classes`; `rows` must be non-empty.
pub fn softmax_loss_gradient(
    weights: &[f64],
    classes: usize,
    rows: &[&[f64]],
    labels: &[usize],
    l2: f64,
) -> (f64, Vec<f64>) {
    let d = rows.first().map_or(0, |r| r.len());
    let w = DMatrix::from_column_slice(d + 1, classes, weights);
    let (loss, grad) = Batch::new(rows, labels).loss_gradient(&w, l2);
    (loss, grad.as_slice().to_vec())
}

/// Result of a softmax fit, with the objective value before every update.
#[derive(Debug, Clone)]
pub struct SoftmaxFit {
    pub weights: Vec<f64>,
    pub losses: Vec<f64>,
    pub converged: bool,
}

/// Gradient descent from zero weights with the fixed step
/// `learning_rate / L`, `L = ρ(ZᵀZ/N)/2 + l2`.
pub fn fit_softmax(
    rows: &[&[f64]],
    labels: &[usize],
    classes: usize,
    params: &SoftmaxParams,
) -> Result<SoftmaxFit> {
    params.validate()?;
    if rows.is_empty() {
        return Err(Error::Data("softmax training set is empty".into()));
    }
    let d = rows[0].len();
    let batch = Batch::new(rows, labels);
    let curvature = 0.5 * batch.gram_spectral_radius() * 1.05 + params.l2;
    let step = params.learning_rate / curvature.max(1e-12);
    let mut w = DMatrix::zeros(d + 1, classes);
    let mut losses = Vec::new();
    let mut converged = false;
    for epoch in 0..params.epochs {
        let (loss, grad) = batch.loss_gradient(&w, params.l2);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Training {
                epoch,
                message: "softmax loss is not finite".into(),
            });
        }
        losses.push(loss);
        if grad.iter().all(|g| g.abs() < params.tolerance) {
            converged = true;
            break;
        }
        w.zip_apply(&grad, |wi, g| *wi -= step * g);
    }
    let weights = w.as_slice().to_vec();
    Ok(SoftmaxFit {
        weights,
        losses,
        converged,
    })
}

/// Class scores (logits) for one input.
pub(crate) fn scores(weights: &[f64], classes: usize, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; classes];
    logits(weights, classes, x, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn balanced_symmetric_batch_has_zero_bias_gradient() {
        let rows: Vec<&[f64]> = vec![&[1.0, 2.0], &[-1.0, 0.5]];
        let w = vec![0.0; 6];
        let (loss, g) = softmax_loss_gradient(&w, 2, &rows, &[0, 1], 0.1);
        assert!((loss - 2f64.ln()).abs() < 1e-15);
        assert_eq!(g[2], 0.0);
        assert_eq!(g[5], 0.0);
    }

    #[test]
    fn single_sample_optimum_is_stationary() {
        let rows: Vec<&[f64]> = vec![&[0.5, -1.0]];
        let params = SoftmaxParams {
            l2: 0.1,
            epochs: 20_000,
            tolerance: 1e-12,
            ..Default::default()
        };
        let fit = fit_softmax(&rows, &[1], 3, &params).unwrap();
        assert!(fit.converged);
        let (_, g) = softmax_loss_gradient(&fit.weights, 3, &rows, &[1], 0.1);
        assert!(g.iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = crate::seed::rng_from_seed(11);
        let data: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..4).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
        let labels: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let w: Vec<f64> = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, g) = softmax_loss_gradient(&w, 3, &rows, &labels, 0.05);
        let h = 1e-6;
        for j in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += h;
            wm[j] -= h;
            let fp = softmax_loss_gradient(&wp, 3, &rows, &labels, 0.05).0;
            let fm = softmax_loss_gradient(&wm, 3, &rows, &labels, 0.05).0;
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (fd - g[j]).abs() <= 1e-5 * g[j].abs().max(1e-3),
                "{j}: {fd} vs {}",
                g[j]
            );
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut s = vec![3.0, -1.0, 700.0, 0.0];
        softmax_in_place(&mut s);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
