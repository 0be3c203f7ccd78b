//! Binary logistic regression for the local complexity discriminator.
//!
//! Tags are encoded easy → 0, difficult → 1, so `h(x) = σ(βᵀ[x, 1])` is the
//! probability that `x` is difficult. `h(x) = 0.5` exactly counts as easy.
//! Fitting is damped Newton on mean log-loss plus `l2/2 * ||β||²`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComplexityTag {
    Easy,
    Difficult,
}

impl ComplexityTag {
    pub fn as_target(self) -> f64 {
        match self {
            ComplexityTag::Easy => 0.0,
            ComplexityTag::Difficult => 1.0,
        }
    }

    /// `+` for easy, `-` for difficult.
    pub fn symbol(self) -> char {
        match self {
            ComplexityTag::Easy => '+',
            ComplexityTag::Difficult => '-',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ComplexityTag::Easy => "easy",
            ComplexityTag::Difficult => "difficult",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogitOptions {
    pub l2: f64,
    pub max_iter: usize,
    /// Convergence threshold on the largest gradient entry.
    pub tolerance: f64,
}

impl Default for LogitOptions {
    fn default() -> Self {
        LogitOptions {
            l2: 1e-4,
            max_iter: 100,
            tolerance: 1e-9,
        }
    }
}

/// Fitted coefficients: feature weights followed by the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogitParams {
    pub beta: Vec<f64>,
}

impl LogitParams {
    pub fn probability_difficult(&self, x: &[f64]) -> f64 {
        sigmoid(linear(&self.beta, x))
    }
}

/// Either a fitted discriminator or the constant answer for single-tag input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LogitModel {
    Constant(ComplexityTag),
    Fitted(LogitParams),
}

impl LogitModel {
    pub fn probability_difficult(&self, x: &[f64]) -> f64 {
        match self {
            LogitModel::Constant(t) => t.as_target(),
            LogitModel::Fitted(p) => p.probability_difficult(x),
        }
    }

    pub fn classify(&self, x: &[f64]) -> ComplexityTag {
        match self {
            LogitModel::Constant(t) => *t,
            LogitModel::Fitted(p) => {
                if p.probability_difficult(x) > 0.5 {
                    ComplexityTag::Difficult
                } else {
                    ComplexityTag::Easy
                }
            }
        }
    }
}

fn linear(beta: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    beta[..d].iter().zip(x).map(|(b, v)| b * v).sum::<f64>() + beta[d]
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn objective(beta: &[f64], xs: &[&[f64]], ys: &[f64], l2: f64) -> f64 {
    let n = xs.len() as f64;
    let data: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = linear(beta, x);
            softplus(z) - y * z
        })
        .sum();
    data / n + 0.5 * l2 * beta.iter().map(|b| b * b).sum::<f64>()
}

/// Regularised mean log-loss and its gradient; `ys` holds 0/1 targets.
pub fn binary_logit_loss_gradient(
    beta: &[f64],
    xs: &[&[f64]],
    ys: &[f64],
    l2: f64,
) -> (f64, Vec<f64>) {
    let d = beta.len() - 1;
    let n = xs.len() as f64;
    let mut grad = vec![0.0; beta.len()];
    for (x, &y) in xs.iter().zip(ys) {
        let r = (sigmoid(linear(beta, x)) - y) / n;
        for (g, v) in grad[..d].iter_mut().zip(x.iter()) {
            *g += r * v;
        }
        grad[d] += r;
    }
    for (g, b) in grad.iter_mut().zip(beta) {
        *g += l2 * b;
    }
    (objective(beta, xs, ys, l2), grad)
}

/// Solves `(l2 I + SᵀS) Δ = g` where `S = diag(√w) Z`. When there are fewer
/// rows than coefficients the Woodbury form keeps the solve `n x n`.
fn newton_direction(
    z: &DMatrix<f64>,
    weights: &[f64],
    grad: &DVector<f64>,
    l2: f64,
) -> Option<DVector<f64>> {
    let (n, p) = z.shape();
    let mut s = z.clone();
    for (i, w) in weights.iter().enumerate() {
        let r = w.max(0.0).sqrt();
        s.row_mut(i).scale_mut(r);
    }
    if p <= n || l2 <= 0.0 {
        let mut h = s.transpose() * &s;
        for j in 0..p {
            h[(j, j)] += l2.max(1e-12);
        }
        h.cholesky().map(|c| c.solve(grad))
    } else {
        let mut inner = &s * s.transpose();
        for i in 0..n {
            inner[(i, i)] += l2;
        }
        let sg = &s * grad;
        let t = inner.cholesky()?.solve(&sg);
        Some((grad - s.transpose() * t) / l2)
    }
}

/// Fits the local discriminator. All-identical tags yield the constant model
/// for that tag without fitting.
pub fn train_binary_logit(
    xs: &[&[f64]],
    tags: &[ComplexityTag],
    options: &LogitOptions,
) -> Result<LogitModel> {
    if xs.is_empty() || xs.len() != tags.len() {
        return Err(Error::arg(
            "binary logit needs matching, non-empty inputs and tags",
        ));
    }
    if tags.iter().all(|t| *t == tags[0]) {
        return Ok(LogitModel::Constant(tags[0]));
    }
    let d = xs[0].len();
    let ys: Vec<f64> = tags.iter().map(|t| t.as_target()).collect();
    let z = DMatrix::from_fn(xs.len(), d + 1, |i, j| if j < d { xs[i][j] } else { 1.0 });
    let mut beta = vec![0.0; d + 1];
    let mut f = objective(&beta, xs, &ys, options.l2);
    for iter in 0..options.max_iter {
        let (_, grad) = binary_logit_loss_gradient(&beta, xs, &ys, options.l2);
        if grad.iter().all(|g| g.abs() < options.tolerance) {
            break;
        }
        let n = xs.len() as f64;
        let weights: Vec<f64> = xs
            .iter()
            .map(|x| {
                let p = sigmoid(linear(&beta, x));
                p * (1.0 - p) / n
            })
            .collect();
        let g = DVector::from_vec(grad.clone());
        let Some(dir) = newton_direction(&z, &weights, &g, options.l2) else {
            return Err(Error::Training {
                epoch: iter,
                message: "logit Hessian is not positive definite".into(),
            });
        };
        let slope: f64 = dir.iter().zip(&grad).map(|(a, b)| a * b).sum();
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let cand: Vec<f64> = beta
                .iter()
                .zip(dir.iter())
                .map(|(b, s)| b - t * s)
                .collect();
            let fc = objective(&cand, xs, &ys, options.l2);
            if fc <= f - 1e-4 * t * slope {
                beta = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !f.is_finite() || beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Training {
                epoch: iter,
                message: "logit coefficients are not finite".into(),
            });
        }
        if !accepted {
            break;
        }
    }
    Ok(LogitModel::Fitted(LogitParams { beta }))
}
