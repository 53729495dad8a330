//! Linear classifier trained with Pegasos-style stochastic subgradient descent
//! on the L2-regularized hinge loss.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Norm;
use crate::error::{Error, Result};
use crate::features::MapDocument;
use crate::rng::stream_rng;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Learn an unregularized bias term.
    pub fit_intercept: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lambda: 1e-5,
            epochs: 100,
            seed: 0,
            fit_intercept: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyperparams: Hyperparams,
}

fn check_training_set(features: &[Vec<f64>], labels: &[f64], hp: &Hyperparams) -> Result<usize> {
    if features.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    if features.is_empty() {
        return Err(Error::Degenerate("no training examples".into()));
    }
    if !(hp.lambda.is_finite() && hp.lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda must be > 0, got {}",
            hp.lambda
        )));
    }
    if hp.epochs == 0 {
        return Err(Error::invalid("epochs must be >= 1"));
    }
    if let Some(y) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
        return Err(Error::Degenerate(format!(
            "labels must be +1 or -1, found {y}"
        )));
    }
    if !(labels.contains(&1.0) && labels.contains(&-1.0)) {
        return Err(Error::Degenerate(
            "training labels contain a single class".into(),
        ));
    }
    let dim = features[0].len();
    if let Some(row) = features.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: row.len(),
        });
    }
    Ok(dim)
}

/// Final iterate of Pegasos: at step `t` the rate is `1 / (λ t)`; examples are
/// visited in a fresh seeded order each epoch.
pub fn train(features: &[Vec<f64>], labels: &[f64], hp: &Hyperparams) -> Result<LinearModel> {
    Ok(train_with_trace(features, labels, hp)?.0)
}

/// As [`train`], also returning the regularized objective after each epoch.
pub fn train_with_trace(
    features: &[Vec<f64>],
    labels: &[f64],
    hp: &Hyperparams,
) -> Result<(LinearModel, Vec<f64>)> {
    let dim = check_training_set(features, labels, hp)?;
    let mut model = LinearModel {
        weights: vec![0.0; dim],
        bias: 0.0,
        hyperparams: *hp,
    };
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut trace = Vec::with_capacity(hp.epochs);
    let mut t = 0u64;
    for epoch in 0..hp.epochs {
        order.shuffle(&mut stream_rng(hp.seed, epoch as u64));
        for &i in &order {
            t += 1;
            let (z, y) = (&features[i], labels[i]);
            let margin = y * model.decision(z);
            let eta = 1.0 / (hp.lambda * t as f64);
            let shrink = 1.0 - 1.0 / t as f64;
            for w in &mut model.weights {
                *w *= shrink;
            }
            if margin < 1.0 {
                let step = eta * y;
                for (w, v) in model.weights.iter_mut().zip(z) {
                    *w += step * v;
                }
                if hp.fit_intercept {
                    model.bias += step;
                }
            }
        }
        trace.push(objective(&model, features, labels, hp.lambda));
    }
    Ok((model, trace))
}

/// `λ/2 |w|² + mean hinge loss`.
pub fn objective(model: &LinearModel, features: &[Vec<f64>], labels: &[f64], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * model.weights.iter().map(|w| w * w).sum::<f64>();
    let loss: f64 = features
        .iter()
        .zip(labels)
        .map(|(z, y)| (1.0 - y * model.decision(z)).max(0.0))
        .sum();
    reg + loss / features.len() as f64
}

impl LinearModel {
    fn decision(&self, z: &[f64]) -> f64 {
        self.weights.iter().zip(z).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn decision_value(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: z.len(),
            });
        }
        Ok(self.decision(z))
    }

    /// `sign(w·z + b)` with ties going to +1.
    pub fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        features
            .iter()
            .map(|z| {
                Ok(if self.decision_value(z)? >= 0.0 {
                    1.0
                } else {
                    -1.0
                })
            })
            .collect()
    }

    pub fn accuracy(&self, features: &[Vec<f64>], labels: &[f64]) -> Result<f64> {
        if features.is_empty() {
            return Err(Error::Degenerate(
                "accuracy of an empty set is undefined".into(),
            ));
        }
        if features.len() != labels.len() {
            return Err(Error::invalid("feature and label counts differ"));
        }
        let pred = self.predict(features)?;
        let correct = pred.iter().zip(labels).filter(|(p, y)| p == y).count();
        Ok(correct as f64 / labels.len() as f64)
    }
}

/// Serialized model with everything needed to score raw inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyperparams: Hyperparams,
    /// Feature map applied before the linear model; `None` for raw features.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapDocument>,
    /// Inputs are divided by this before mapping.
    pub scale: f64,
    pub norm: Norm,
    pub negative_labels: Vec<f64>,
    pub positive_labels: Vec<f64>,
}

impl ModelDocument {
    pub fn model(&self) -> Result<LinearModel> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {}",
                self.format_version
            )));
        }
        Ok(LinearModel {
            weights: self.weights.clone(),
            bias: self.bias,
            hyperparams: self.hyperparams,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(lambda: f64, epochs: usize) -> Hyperparams {
        Hyperparams {
            lambda,
            epochs,
            seed: 5,
            fit_intercept: true,
        }
    }

    #[test]
    fn separable_pair() {
        let x = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        let y = [1.0, -1.0];
        let m = train(&x, &y, &hp(0.01, 50)).unwrap();
        assert_eq!(m.accuracy(&x, &y).unwrap(), 1.0);
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn degenerate_inputs() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            train(&x, &[1.0, 1.0], &hp(0.1, 1)),
            Err(Error::Degenerate(_))
        ));
        assert!(train(&[], &[], &hp(0.1, 1)).is_err());
        assert!(train(&x, &[1.0, -1.0], &hp(0.0, 1)).is_err());
        let m = LinearModel {
            weights: vec![0.0],
            bias: 0.0,
            hyperparams: hp(0.1, 1),
        };
        assert!(m.accuracy(&[], &[]).is_err());
        assert!(m.predict(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn zero_model_predicts_positive() {
        let m = LinearModel {
            weights: vec![0.0; 3],
            bias: 0.0,
            hyperparams: Hyperparams::default(),
        };
        assert_eq!(m.predict(&[vec![1.0, -2.0, 0.5]]).unwrap(), vec![1.0]);
    }

    #[test]
    fn deterministic() {
        let x: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i as f64).sin(), (i as f64).cos()])
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| if r[0] > 0.1 { 1.0 } else { -1.0 })
            .collect();
        assert_eq!(
            train(&x, &y, &hp(0.01, 5)).unwrap(),
            train(&x, &y, &hp(0.01, 5)).unwrap()
        );
    }
}
