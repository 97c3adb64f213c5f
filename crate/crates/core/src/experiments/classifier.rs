//! One-vs-rest linear SVM trained by averaged stochastic subgradient descent
//! on the regularized hinge loss.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Per-column affine map to zero mean and unit variance. Constant columns
/// map to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    inv_std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(features: &DMatrix<f64>) -> Self {
        let rows = features.nrows() as f64;
        let mut mean = Vec::with_capacity(features.ncols());
        let mut inv_std = Vec::with_capacity(features.ncols());
        for col in features.column_iter() {
            let mu = col.sum() / rows;
            let var = col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / rows;
            let sd = var.sqrt();
            mean.push(mu);
            inv_std.push(if sd > 1e-12 * (1.0 + mu.abs()) {
                1.0 / sd
            } else {
                0.0
            });
        }
        Self { mean, inv_std }
    }

    pub fn transform(&self, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if features.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                context: "feature columns vs standardizer",
                expected: self.mean.len(),
                found: features.ncols(),
            });
        }
        Ok(DMatrix::from_fn(
            features.nrows(),
            features.ncols(),
            |r, c| (features[(r, c)] - self.mean[c]) * self.inv_std[c],
        ))
    }
}

/// Trained one-vs-rest model: `score_c(x) = w_c · z(x) + b_c`, with `z` the
/// standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    standardizer: Standardizer,
    /// `classes × features`.
    weights: DMatrix<f64>,
    bias: DVector<f64>,
}

impl LinearModel {
    pub fn classes(&self) -> usize {
        self.weights.nrows()
    }

    /// Predicted class per row; ties go to the lower class index.
    pub fn predict(&self, features: &DMatrix<f64>) -> Result<Vec<usize>> {
        let z = self.standardizer.transform(features)?;
        let scores = &z * self.weights.transpose();
        Ok(scores
            .row_iter()
            .map(|row| {
                let mut best = 0;
                for c in 1..row.len() {
                    if row[c] + self.bias[c] > row[best] + self.bias[best] {
                        best = c;
                    }
                }
                best
            })
            .collect())
    }

    pub fn accuracy(&self, features: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
        if labels.len() != features.nrows() {
            return Err(Error::SizeMismatch {
                expected: features.nrows(),
                found: labels.len(),
            });
        }
        let pred = self.predict(features)?;
        let hits = pred.iter().zip(labels).filter(|(a, b)| a == b).count();
        Ok(hits as f64 / labels.len().max(1) as f64)
    }
}

/// Trains on `features` (one example per row) with labels in `0..c`.
///
/// Step size follows `η_t = η_0 / (1 + η_0 λ t)` and the returned weights are
/// the running average over the final epoch.
pub fn train_linear<R: Rng + ?Sized>(
    features: &DMatrix<f64>,
    labels: &[usize],
    reg: f64,
    epochs: usize,
    rng: &mut R,
) -> Result<LinearModel> {
    let rows = features.nrows();
    if labels.len() != rows {
        return Err(Error::SizeMismatch {
            expected: rows,
            found: labels.len(),
        });
    }
    if !(reg > 0.0) || epochs == 0 {
        return Err(Error::InvalidParameter(
            "need reg > 0 and epochs >= 1".into(),
        ));
    }
    let classes = labels.iter().copied().max().map_or(2, |m| (m + 1).max(2));
    let mut present = vec![false; classes];
    for &l in labels {
        present[l] = true;
    }
    if let Some(missing) = present.iter().position(|&p| !p) {
        return Err(Error::DegenerateLabels(missing));
    }

    let standardizer = Standardizer::fit(features);
    let z = standardizer.transform(features)?;
    let dim = z.ncols();
    let eta0 = 0.5;
    let mut w = DMatrix::<f64>::zeros(classes, dim);
    let mut b = DVector::<f64>::zeros(classes);
    let mut w_avg = w.clone();
    let mut b_avg = b.clone();
    let mut order: Vec<usize> = (0..rows).collect();
    let mut t = 0usize;
    for epoch in 0..epochs {
        order.shuffle(rng);
        let last = epoch + 1 == epochs;
        let mut seen = 0usize;
        if last {
            w_avg.fill(0.0);
            b_avg.fill(0.0);
        }
        for &r in &order {
            let eta = eta0 / (1.0 + eta0 * reg * t as f64);
            let x = z.row(r);
            for c in 0..classes {
                let y = if labels[r] == c { 1.0 } else { -1.0 };
                let margin = y * (w.row(c).dot(&x) + b[c]);
                let shrink = 1.0 - eta * reg;
                let step = if margin < 1.0 { eta * y } else { 0.0 };
                for k in 0..dim {
                    w[(c, k)] = shrink * w[(c, k)] + step * x[k];
                }
                b[c] += step;
            }
            t += 1;
            if last {
                seen += 1;
                let a = 1.0 / seen as f64;
                w_avg = &w_avg * (1.0 - a) + &w * a;
                b_avg = &b_avg * (1.0 - a) + &b * a;
            }
        }
    }
    Ok(LinearModel {
        standardizer,
        weights: w_avg,
        bias: b_avg,
    })
}

/// Accuracy of always predicting the most frequent label.
pub fn chance_accuracy(labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let classes = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut counts = vec![0usize; classes];
    for &l in labels {
        counts[l] += 1;
    }
    *counts.iter().max().unwrap() as f64 / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::trial_rng;

    #[test]
    fn separable_clusters() {
        let mut rng = trial_rng(0, &[]);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let c = i % 2;
            let centre = if c == 0 { -3.0 } else { 3.0 };
            rows.push(centre + rng.random_range(-1.0..1.0));
            rows.push(centre + rng.random_range(-1.0..1.0));
            labels.push(c);
        }
        let x = DMatrix::from_row_slice(40, 2, &rows);
        let model = train_linear(&x, &labels, 1e-3, 30, &mut rng).unwrap();
        assert_eq!(model.accuracy(&x, &labels).unwrap(), 1.0);
    }

    #[test]
    fn xor_is_not_separable() {
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0]);
        let labels = [0, 0, 1, 1];
        let model = train_linear(&x, &labels, 1e-3, 50, &mut trial_rng(1, &[])).unwrap();
        assert!(model.accuracy(&x, &labels).unwrap() <= 0.75);
    }

    #[test]
    fn degenerate_labels() {
        let x = DMatrix::zeros(3, 2);
        let mut rng = trial_rng(0, &[]);
        assert_eq!(
            train_linear(&x, &[0, 0, 0], 1e-3, 5, &mut rng),
            Err(Error::DegenerateLabels(1))
        );
        assert_eq!(
            train_linear(&x, &[2, 2, 0], 1e-3, 5, &mut rng),
            Err(Error::DegenerateLabels(1))
        );
    }

    #[test]
    fn chance_is_majority_frequency() {
        assert_eq!(chance_accuracy(&[0, 1, 1, 2]), 0.5);
    }
}
