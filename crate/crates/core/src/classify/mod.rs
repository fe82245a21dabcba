//! Classifiers over parameter vectors: kernel density estimates, nearest
//! neighbors and a small multilayer perceptron.

mod kde;
mod knn;
mod mlp;
mod persist;
mod sufficiency;

pub use kde::{kde_likelihood, log_kernel, scott_bandwidth, select_bandwidth, KdeModel, BANDWIDTH_FLOOR};
pub use knn::{KnnModel, DEFAULT_K};
pub use mlp::{MlpConfig, MlpModel, TrainingLog};
pub use persist::{load_model, read_model, save_model, write_model, Model, ModelKind};
pub use sufficiency::{confusion_matrix, SufficiencyReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::{ParamVector, Shape};

/// Tolerance on Σ p = 1.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A probability vector over the m classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub probs: Vec<f64>,
    /// Set when every class scored zero and the uniform fallback was used.
    #[serde(default)]
    pub fallback: bool,
}

impl ClassDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::ShapeMismatch(format!("need at least 2 classes, got {}", probs.len())));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::ShapeMismatch("negative or NaN probability".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::ShapeMismatch(format!("probabilities sum to {s}")));
        }
        Ok(ClassDistribution { probs, fallback: false })
    }

    pub fn uniform(m: usize) -> Self {
        ClassDistribution {
            probs: vec![1.0 / m as f64; m],
            fallback: false,
        }
    }

    /// Normalizes nonnegative weights; all-zero weights give the uniform
    /// distribution with `fallback` set.
    pub fn from_weights(w: &[f64]) -> Self {
        let s: f64 = w.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            let mut u = ClassDistribution::uniform(w.len());
            u.fallback = true;
            return u;
        }
        ClassDistribution {
            probs: w.iter().map(|x| x / s).collect(),
            fallback: false,
        }
    }

    /// Softmax of log-weights, stable for very negative entries.
    pub fn from_log_weights(logw: &[f64]) -> Self {
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            let mut u = ClassDistribution::uniform(logw.len());
            u.fallback = true;
            return u;
        }
        let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
        ClassDistribution::from_weights(&w)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Most probable class; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }

    pub fn max(&self) -> f64 {
        self.probs[self.argmax()]
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// `h: Q -> simplex`. Implementations are immutable once fitted.
pub trait Classifier: Send + Sync {
    fn classes(&self) -> usize;

    fn shape(&self) -> Shape;

    /// Class distribution for raw vector values of the model's shape.
    fn predict(&self, q: &[f64]) -> ClassDistribution;

    /// Per-class log evidence for sequential Bayesian updates. Density
    /// models return log P(q | class); discriminative models fall back to
    /// the log of their predicted probabilities, which differs from the
    /// likelihood by a class prior that is uniform here.
    fn log_evidence(&self, q: &[f64]) -> Vec<f64> {
        self.predict(q).probs.iter().map(|p| p.max(1e-300).ln()).collect()
    }

    fn predict_vector(&self, q: &ParamVector) -> Result<ClassDistribution> {
        self.check_shape(&q.shape)?;
        Ok(self.predict(&q.values))
    }

    fn check_shape(&self, shape: &Shape) -> Result<()> {
        if *shape != self.shape() {
            return Err(Error::ShapeMismatch(format!("model expects {}, got {}", self.shape(), shape)));
        }
        Ok(())
    }
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn classes(&self) -> usize {
        (**self).classes()
    }
    fn shape(&self) -> Shape {
        (**self).shape()
    }
    fn predict(&self, q: &[f64]) -> ClassDistribution {
        (**self).predict(q)
    }
    fn log_evidence(&self, q: &[f64]) -> Vec<f64> {
        (**self).log_evidence(q)
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn classes(&self) -> usize {
        (**self).classes()
    }
    fn shape(&self) -> Shape {
        (**self).shape()
    }
    fn predict(&self, q: &[f64]) -> ClassDistribution {
        (**self).predict(q)
    }
    fn log_evidence(&self, q: &[f64]) -> Vec<f64> {
        (**self).log_evidence(q)
    }
}
