//! Principal component analysis by symmetric eigendecomposition.
//!
//! When there are fewer samples than dimensions (the LBP case: tens of
//! thousands of histogram bins) the `N x N` Gram matrix is decomposed
//! instead of the `d x d` covariance; both give the same components.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean vector plus an orthonormal projection basis (one row per component,
/// descending variance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    mean: Vec<f64>,
    basis: Vec<Vec<f64>>,
    variances: Vec<f64>,
}

impl PcaModel {
    /// Builds a model from explicit parts; basis rows must be orthonormal.
    pub fn from_parts(mean: Vec<f64>, basis: Vec<Vec<f64>>, variances: Vec<f64>) -> Result<Self> {
        let d = mean.len();
        if basis.iter().any(|r| r.len() != d) || variances.len() != basis.len() || basis.len() > d {
            return Err(Error::arg("PCA parts have inconsistent dimensions"));
        }
        Ok(PcaModel {
            mean,
            basis,
            variances,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn target_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Sample-covariance eigenvalue of each retained component.
    pub fn component_variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn captured_variance(&self) -> f64 {
        self.variances.iter().sum()
    }

    /// `basis * (x - mean)`.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::arg(format!(
                "PCA expects dimension {}, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        Ok(self
            .basis
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(b, (v, m))| b * (v - m))
                    .sum()
            })
            .collect())
    }

    /// `mean + basisᵀ y`.
    pub fn inverse_transform(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.target_dim() {
            return Err(Error::arg(format!(
                "PCA reconstruction expects {} components, got {}",
                self.target_dim(),
                y.len()
            )));
        }
        let mut out = self.mean.clone();
        for (row, &c) in self.basis.iter().zip(y) {
            for (o, b) in out.iter_mut().zip(row) {
                *o += c * b;
            }
        }
        Ok(out)
    }
}

/// Same as [`PcaModel::transform`].
pub fn pca_transform(model: &PcaModel, x: &[f64]) -> Result<Vec<f64>> {
    model.transform(x)
}

/// Fits the top `target_dim` principal components of `rows`.
///
/// Components are ordered by descending eigenvalue; each basis row is signed
/// so that its first non-negligible entry is positive.
pub fn fit_pca<R: AsRef<[f64]>>(rows: &[R], target_dim: usize) -> Result<PcaModel> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::arg(format!("PCA needs at least 2 rows, got {n}")));
    }
    let d = rows[0].as_ref().len();
    if rows.iter().any(|r| r.as_ref().len() != d) {
        return Err(Error::Data("PCA rows have differing dimensions".into()));
    }
    if rows
        .iter()
        .any(|r| r.as_ref().iter().any(|v| !v.is_finite()))
    {
        return Err(Error::Data("PCA input contains non-finite values".into()));
    }
    if target_dim > (n - 1).min(d) {
        return Err(Error::arg(format!(
            "target dimension {target_dim} exceeds min(N - 1, d) = {}",
            (n - 1).min(d)
        )));
    }

    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.as_ref()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered = DMatrix::from_fn(n, d, |i, j| rows[i].as_ref()[j] - mean[j]);
    let denom = (n - 1) as f64;

    let (variances, mut basis) = if d <= n {
        let cov = (centered.transpose() * &centered) / denom;
        let eig = SymmetricEigen::new(cov);
        let order = descending(eig.eigenvalues.as_slice());
        let vars = order[..target_dim]
            .iter()
            .map(|&i| eig.eigenvalues[i].max(0.0))
            .collect();
        let basis: Vec<Vec<f64>> = order[..target_dim]
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect();
        (vars, basis)
    } else {
        let gram = (&centered * centered.transpose()) / denom;
        let eig = SymmetricEigen::new(gram);
        let order = descending(eig.eigenvalues.as_slice());
        let top = eig.eigenvalues[order[0]].max(0.0);
        let mut vars = Vec::with_capacity(target_dim);
        let mut basis = Vec::with_capacity(target_dim);
        for &i in &order[..target_dim] {
            let lambda = eig.eigenvalues[i].max(0.0);
            vars.push(lambda);
            if lambda <= 1e-12 * top.max(f64::MIN_POSITIVE) {
                basis.push(vec![0.0; d]);
                continue;
            }
            let u = eig.eigenvectors.column(i);
            let v = centered.transpose() * u;
            let norm = v.norm();
            basis.push(v.iter().map(|x| x / norm).collect());
        }
        (vars, basis)
    };
    orthonormalize(&mut basis);
    for row in &mut basis {
        fix_sign(row);
    }
    Ok(PcaModel {
        mean,
        basis,
        variances,
    })
}

fn descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Two passes of modified Gram-Schmidt. Rows that collapse (null-space
/// components of rank-deficient data) are completed with the first
/// standard basis vector that is independent of the rows before them.
fn orthonormalize(rows: &mut [Vec<f64>]) {
    let d = rows.first().map_or(0, Vec::len);
    for i in 0..rows.len() {
        let (done, rest) = rows.split_at_mut(i);
        let row = &mut rest[0];
        let mut ok = reduce(row, done);
        let mut candidate = 0;
        while !ok && candidate < d {
            row.iter_mut().for_each(|v| *v = 0.0);
            row[candidate] = 1.0;
            candidate += 1;
            ok = reduce(row, done);
        }
    }
}

fn reduce(row: &mut [f64], done: &[Vec<f64>]) -> bool {
    let start = norm(row);
    if start == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for q in done {
            let dot: f64 = row.iter().zip(q).map(|(a, b)| a * b).sum();
            row.iter_mut().zip(q).for_each(|(a, b)| *a -= dot * b);
        }
    }
    let n = norm(row);
    if n <= 1e-10 * start {
        return false;
    }
    row.iter_mut().for_each(|v| *v /= n);
    true
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn fix_sign(row: &mut [f64]) {
    let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(first) = row.iter().find(|v| v.abs() > 1e-9 * scale) {
        if *first < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
    }
}
