use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{argmax, ClassDistribution, Classifier};
use crate::error::{Error, Result};
use crate::param::Shape;
use crate::rng;
use crate::sampling::LabeledDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpConfig {
    /// Hidden layer widths; empty selects three layers of `max(64, 8w)`.
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: Vec::new(),
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 32,
            epochs: 60,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn layer_sizes(&self, w: usize, m: usize) -> Vec<usize> {
        let hidden = if self.hidden.is_empty() {
            vec![64.max(8 * w); 3]
        } else {
            self.hidden.clone()
        };
        std::iter::once(w).chain(hidden).chain(std::iter::once(m)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Mean training cross-entropy per epoch.
    pub losses: Vec<f64>,
    /// Validation accuracy per epoch, when a validation set was given.
    pub val_accuracy: Vec<f64>,
    /// Epoch whose weights were kept (1-based; 0 = initial weights).
    pub best_epoch: usize,
}

/// Fully connected ReLU network with a softmax output. Inputs are
/// standardized with the training mean and deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub shape: Shape,
    pub class_names: Vec<String>,
    pub sizes: Vec<usize>,
    /// `[W1, b1, W2, b2, ...]`, each `W` row-major `out × in`.
    pub params: Vec<f64>,
    pub mean: Vec<f64>,
    pub inv_std: Vec<f64>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|p| p[1] * p[0] + p[1]).sum()
}

impl MlpModel {
    pub fn new(
        shape: Shape,
        class_names: Vec<String>,
        sizes: Vec<usize>,
        params: Vec<f64>,
        mean: Vec<f64>,
        inv_std: Vec<f64>,
    ) -> Result<Self> {
        if sizes.len() < 2 || sizes[0] != shape.dim() || *sizes.last().unwrap() != class_names.len() {
            return Err(Error::InvalidModel(format!(
                "layer sizes {sizes:?} do not fit w = {} and m = {}",
                shape.dim(),
                class_names.len()
            )));
        }
        if params.len() != param_count(&sizes) || mean.len() != sizes[0] || inv_std.len() != sizes[0] {
            return Err(Error::InvalidModel("parameter count does not match the layer sizes".into()));
        }
        if params.iter().chain(&mean).chain(&inv_std).any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("non-finite parameter".into()));
        }
        Ok(MlpModel {
            shape,
            class_names,
            sizes,
            params,
            mean,
            inv_std,
        })
    }

    /// Seeded He initialization with identity standardization.
    pub fn init(shape: Shape, class_names: Vec<String>, sizes: Vec<usize>, seed: u64) -> Result<Self> {
        let mut r = rng::stream(seed, &[0]);
        let mut params = Vec::with_capacity(param_count(&sizes));
        for p in sizes.windows(2) {
            let he = Normal::new(0.0, (2.0 / p[0] as f64).sqrt()).expect("positive std");
            params.extend((0..p[0] * p[1]).map(|_| he.sample(&mut r)));
            params.extend(std::iter::repeat_n(0.0, p[1]));
        }
        let w = sizes[0];
        MlpModel::new(shape, class_names, sizes, params, vec![0.0; w], vec![1.0; w])
    }

    fn standardize(&self, q: &[f64]) -> Vec<f64> {
        q.iter()
            .zip(self.mean.iter().zip(&self.inv_std))
            .map(|(x, (m, s))| (x - m) * s)
            .collect()
    }

    /// Pre-activations of every layer for one input.
    fn forward(&self, q: &[f64]) -> Vec<Vec<f64>> {
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(self.sizes.len() - 1);
        let mut a = self.standardize(q);
        let mut off = 0;
        let last = self.sizes.len() - 2;
        for (l, p) in self.sizes.windows(2).enumerate() {
            let (nin, nout) = (p[0], p[1]);
            let wts = &self.params[off..off + nin * nout];
            let b = &self.params[off + nin * nout..off + nin * nout + nout];
            off += nin * nout + nout;
            let z: Vec<f64> = (0..nout)
                .map(|o| b[o] + wts[o * nin..(o + 1) * nin].iter().zip(&a).map(|(w, x)| w * x).sum::<f64>())
                .collect();
            if l < last {
                a = z.iter().map(|&v| v.max(0.0)).collect();
            }
            pre.push(z);
        }
        pre
    }

    pub fn logits(&self, q: &[f64]) -> Vec<f64> {
        self.forward(q).pop().expect("at least one layer")
    }

    /// Mean cross-entropy over the batch and its gradient with respect to
    /// `params`.
    pub fn loss_and_gradient(&self, xs: &[&[f64]], ys: &[usize]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let nl = self.sizes.len() - 1;
        // start offset of each layer's weights
        let mut offs = Vec::with_capacity(nl);
        let mut off = 0;
        for p in self.sizes.windows(2) {
            offs.push(off);
            off += p[0] * p[1] + p[1];
        }
        for (x, &y) in xs.iter().zip(ys) {
            let pre = self.forward(x);
            let input = self.standardize(x);
            let z = &pre[nl - 1];
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            loss += lse - z[y];
            let mut delta: Vec<f64> = z.iter().map(|v| (v - lse).exp()).collect();
            delta[y] -= 1.0;
            for l in (0..nl).rev() {
                let (nin, nout) = (self.sizes[l], self.sizes[l + 1]);
                let act: Vec<f64> = if l == 0 {
                    input.clone()
                } else {
                    pre[l - 1].iter().map(|&v| v.max(0.0)).collect()
                };
                let o = offs[l];
                for r in 0..nout {
                    let g = &mut grad[o + r * nin..o + (r + 1) * nin];
                    for (gi, ai) in g.iter_mut().zip(&act) {
                        *gi += delta[r] * ai;
                    }
                    grad[o + nin * nout + r] += delta[r];
                }
                if l > 0 {
                    let wts = &self.params[o..o + nin * nout];
                    let mut prev = vec![0.0; nin];
                    for r in 0..nout {
                        for (c, p) in prev.iter_mut().enumerate() {
                            *p += wts[r * nin + c] * delta[r];
                        }
                    }
                    for (p, z) in prev.iter_mut().zip(&pre[l - 1]) {
                        if *z <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        let k = xs.len().max(1) as f64;
        grad.iter_mut().for_each(|g| *g /= k);
        (loss / k, grad)
    }

    pub fn accuracy(&self, ds: &LabeledDataset) -> f64 {
        if ds.is_empty() {
            return 0.0;
        }
        let hits = ds
            .rows
            .iter()
            .zip(&ds.labels)
            .filter(|(r, &l)| argmax(&self.logits(r)) == l)
            .count();
        hits as f64 / ds.len() as f64
    }

    /// Minibatch SGD with momentum on the cross-entropy. With a validation
    /// set the weights of the best validation epoch are kept.
    pub fn train(
        ds: &LabeledDataset,
        valid: Option<&LabeledDataset>,
        cfg: &MlpConfig,
    ) -> Result<(MlpModel, TrainingLog)> {
        ds.check()?;
        if ds.is_empty() {
            return Err(Error::EmptyClass(0));
        }
        if cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) || !(0.0..1.0).contains(&cfg.momentum) {
            return Err(Error::Config("batch_size, learning_rate and momentum must be valid".into()));
        }
        let w = ds.shape().dim();
        let sizes = cfg.layer_sizes(w, ds.classes());
        let mut model = MlpModel::init(ds.shape(), ds.class_names.clone(), sizes, cfg.seed)?;
        let m = ds.len() as f64;
        for k in 0..w {
            let mean = ds.rows.iter().map(|r| r[k]).sum::<f64>() / m;
            let sd = (ds.rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / m).sqrt();
            model.mean[k] = mean;
            model.inv_std[k] = if sd > 1e-12 { 1.0 / sd } else { 1.0 };
        }

        let mut log = TrainingLog::default();
        let mut best = (valid.map(|v| model.accuracy(v)).unwrap_or(0.0), model.params.clone());
        let mut velocity = vec![0.0; model.params.len()];
        let mut order: Vec<usize> = (0..ds.len()).collect();
        for epoch in 1..=cfg.epochs {
            let mut r = rng::stream(cfg.seed, &[1, epoch as u64]);
            order.shuffle(&mut r);
            let mut total = 0.0;
            for batch in order.chunks(cfg.batch_size) {
                let xs: Vec<&[f64]> = batch.iter().map(|&i| ds.rows[i].as_slice()).collect();
                let ys: Vec<usize> = batch.iter().map(|&i| ds.labels[i]).collect();
                let (loss, grad) = model.loss_and_gradient(&xs, &ys);
                if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    return Err(Error::DivergenceDetected(epoch));
                }
                total += loss * batch.len() as f64;
                for ((p, v), g) in model.params.iter_mut().zip(&mut velocity).zip(&grad) {
                    *v = cfg.momentum * *v - cfg.learning_rate * g;
                    *p += *v;
                }
            }
            log.losses.push(total / m);
            match valid {
                Some(v) => {
                    let acc = model.accuracy(v);
                    log.val_accuracy.push(acc);
                    if acc > best.0 {
                        best = (acc, model.params.clone());
                        log.best_epoch = epoch;
                    }
                }
                None => log.best_epoch = epoch,
            }
        }
        if valid.is_some() {
            model.params = best.1;
        }
        Ok((model, log))
    }
}

impl Classifier for MlpModel {
    fn classes(&self) -> usize {
        self.class_names.len()
    }

    fn shape(&self) -> Shape {
        self.shape
    }

    fn predict(&self, q: &[f64]) -> ClassDistribution {
        ClassDistribution::from_log_weights(&self.logits(q))
    }
}
