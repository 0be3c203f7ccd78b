//! One-vs-rest linear SVM trained by full-batch subgradient descent.
//!
//! Each binary problem minimises `||w||² / (2 C N) + mean hinge`, which has
//! the same minimiser as the usual `||w||²/2 + C Σ hinge`. The bias is not
//! regularised. Steps follow `η_t = learning_rate / sqrt(t)` and the iterate
//! with the lowest objective is kept.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    /// Margin penalty.
    pub c: f64,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            epochs: 300,
            learning_rate: 0.5,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::arg("SVM penalty C must be positive"));
        }
        if self.epochs == 0 || !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::arg("SVM epochs and learning_rate must be positive"));
        }
        Ok(())
    }
}

fn objective(w: &[f64], rows: &[&[f64]], targets: &[f64], lambda: f64) -> f64 {
    let d = w.len() - 1;
    let hinge: f64 = rows
        .iter()
        .zip(targets)
        .map(|(x, &y)| {
            let s = x.iter().zip(&w[..d]).map(|(a, b)| a * b).sum::<f64>() + w[d];
            (1.0 - y * s).max(0.0)
        })
        .sum();
    0.5 * lambda * w[..d].iter().map(|v| v * v).sum::<f64>() + hinge / rows.len() as f64
}

/// Trains one binary separator for targets in `{-1, +1}`; returns `[w, b]`.
pub(crate) fn fit_binary(rows: &[&[f64]], targets: &[f64], params: &SvmParams) -> Result<Vec<f64>> {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let lambda = 1.0 / (params.c * n);
    let mut w = vec![0.0; d + 1];
    let mut best = w.clone();
    let mut best_obj = objective(&w, rows, targets, lambda);
    let mut grad = vec![0.0; d + 1];
    for epoch in 0..params.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (x, &y) in rows.iter().zip(targets) {
            let s = x.iter().zip(&w[..d]).map(|(a, b)| a * b).sum::<f64>() + w[d];
            if y * s < 1.0 {
                for (g, xj) in grad[..d].iter_mut().zip(x.iter()) {
                    *g -= y * xj / n;
                }
                grad[d] -= y / n;
            }
        }
        for (g, wj) in grad[..d].iter_mut().zip(&w[..d]) {
            *g += lambda * wj;
        }
        if grad.iter().all(|g| *g == 0.0) {
            break;
        }
        let step = params.learning_rate / ((epoch + 1) as f64).sqrt();
        for (wj, g) in w.iter_mut().zip(&grad) {
            *wj -= step * g;
        }
        let obj = objective(&w, rows, targets, lambda);
        if !obj.is_finite() {
            return Err(Error::Training {
                epoch,
                message: "SVM objective is not finite".into(),
            });
        }
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&w);
        }
    }
    Ok(best)
}

/// One separator per class in `0..classes`, concatenated row-major.
pub(crate) fn fit_one_vs_rest(
    rows: &[&[f64]],
    labels: &[usize],
    classes: usize,
    params: &SvmParams,
) -> Result<Vec<f64>> {
    params.validate()?;
    let mut weights = Vec::with_capacity(classes * (rows[0].len() + 1));
    for c in 0..classes {
        let targets: Vec<f64> = labels
            .iter()
            .map(|&l| if l == c { 1.0 } else { -1.0 })
            .collect();
        weights.extend(fit_binary(rows, &targets, params)?);
    }
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_two_points() {
        let rows: Vec<&[f64]> = vec![&[-1.0], &[1.0]];
        let w = fit_binary(&rows, &[-1.0, 1.0], &SvmParams::default()).unwrap();
        assert!(-w[0] + w[1] < 0.0);
        assert!(w[0] + w[1] > 0.0);
    }

    #[test]
    fn rejects_bad_params() {
        let p = SvmParams {
            c: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }
}
